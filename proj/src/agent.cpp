#include "microciv/agent.hpp"

#include "microciv/error.hpp"
#include "microciv/queries.hpp"
#include "microciv/rng.hpp"
#include "microciv/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace microciv {

namespace {

constexpr std::pair<Skill, const char*> kSkillNames[] = {
    {Skill::DeclareWar, "DeclareWar"},
    {Skill::DefenseAgreement, "DefenseAgreement"},
    {Skill::CommonEnemy, "CommonEnemy"},
    {Skill::SeekPeace, "SeekPeace"},
    {Skill::ResearchAgreement, "ResearchAgreement"},
    {Skill::ChangeCloseness, "ChangeCloseness"},
    {Skill::ProposeTrade, "ProposeTrade"},
    {Skill::ProductionPriority, "ProductionPriority"},
    {Skill::ChooseTechnology, "ChooseTechnology"},
    {Skill::Cheat, "Cheat"},
};

constexpr std::size_t kMaxReflectionChars = 500;
constexpr int kClosenessStep = 10;
constexpr int kTradePrice = 15;

[[noreturn]] void invalid(const std::string& message) { throw Error("invalid_skill", message); }

bool valid_civ(const GameState& s, CivId c) {
    return idx(c) >= 0 && idx(c) < static_cast<int>(s.civs.size());
}

std::string truncate(std::string text, std::size_t n) {
    if (text.size() > n) text.resize(n);
    return text;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(3);
    out << std::fixed << v;
    return out.str();
}

} // namespace

const char* skill_name(Skill skill) noexcept {
    for (const auto& [s, name] : kSkillNames) {
        if (s == skill) return name;
    }
    return "unknown";
}

std::optional<Skill> skill_from_name(std::string_view name) noexcept {
    for (const auto& [s, n] : kSkillNames) {
        if (name == n) return s;
    }
    return std::nullopt;
}

bool needs_response(Skill skill) noexcept {
    switch (skill) {
    case Skill::DefenseAgreement:
    case Skill::CommonEnemy:
    case Skill::SeekPeace:
    case Skill::ResearchAgreement:
    case Skill::ProposeTrade:
        return true;
    default:
        return false;
    }
}

bool is_diplomatic(Skill skill) noexcept {
    return skill != Skill::ProductionPriority && skill != Skill::ChooseTechnology;
}

json encode_skill(const SkillCall& c) {
    json j = {{"skill", skill_name(c.skill)},
              {"proposer", idx(c.proposer)},
              {"item", c.item},
              {"closeness_delta", c.closeness_delta},
              {"message", c.message}};
    if (c.target) j["target"] = idx(*c.target);
    if (c.enemy) j["enemy"] = idx(*c.enemy);
    if (c.trade) j["trade"] = encode_trade(*c.trade);
    if (c.city) j["city"] = idx(*c.city);
    return j;
}

SkillCall decode_skill(const json& j) {
    try {
        SkillCall c;
        const auto skill = skill_from_name(j.at("skill").get<std::string>());
        if (!skill) invalid("unknown skill " + j.at("skill").dump());
        c.skill = *skill;
        c.proposer = CivId{j.at("proposer").get<int>()};
        if (j.contains("target")) c.target = CivId{j.at("target").get<int>()};
        if (j.contains("enemy")) c.enemy = CivId{j.at("enemy").get<int>()};
        if (j.contains("trade")) c.trade = decode_trade(j.at("trade"));
        if (j.contains("city")) c.city = CityId{j.at("city").get<int>()};
        c.item = j.value("item", std::string());
        c.closeness_delta = j.value("closeness_delta", 0);
        c.message = j.value("message", std::string());
        return c;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        invalid(std::string("malformed skill call: ") + e.what());
    }
}

void validate_skill(const SkillCall& c, const GameState& s) {
    if (!valid_civ(s, c.proposer)) invalid("unknown proposer");
    const bool needs_target = c.skill != Skill::ProductionPriority && c.skill != Skill::ChooseTechnology;
    if (needs_target) {
        if (!c.target || !valid_civ(s, *c.target)) invalid(std::string(skill_name(c.skill)) + " needs a target civ");
        if (*c.target == c.proposer) invalid("a skill cannot target its proposer");
    }
    switch (c.skill) {
    case Skill::CommonEnemy:
        if (!c.enemy || !valid_civ(s, *c.enemy)) invalid("CommonEnemy needs an enemy civ");
        if (*c.enemy == c.proposer || *c.enemy == *c.target) invalid("the enemy must be a third civ");
        break;
    case Skill::ChangeCloseness:
        if (c.closeness_delta == 0 || std::abs(c.closeness_delta) > 200) {
            invalid("closeness delta must be nonzero and within [-200, 200]");
        }
        break;
    case Skill::ProposeTrade:
        if (!c.trade) invalid("ProposeTrade needs a trade bundle");
        if (c.trade->proposer != c.proposer || c.trade->target != *c.target) {
            invalid("trade parties must match the proposer and target");
        }
        break;
    case Skill::SeekPeace:
        if (c.trade && (c.trade->proposer != c.proposer || c.trade->target != *c.target)) {
            invalid("peace terms must name the proposer and target");
        }
        break;
    case Skill::ProductionPriority:
        if (!c.city || c.item.empty()) invalid("ProductionPriority needs a city and an item");
        break;
    case Skill::ChooseTechnology:
        if (c.item.empty()) invalid("ChooseTechnology needs a tech id");
        break;
    case Skill::Cheat:
        if (c.message.empty()) invalid("Cheat needs a message");
        break;
    default:
        break;
    }
}

std::vector<EngineAction> skill_actions(const SkillCall& c, const GameState& s) {
    validate_skill(c, s);
    const CivId p = c.proposer;
    switch (c.skill) {
    case Skill::DeclareWar:
        return {DeclareWar{p, *c.target}};
    case Skill::DefenseAgreement:
        return {SignDefensivePact{p, *c.target}};
    case Skill::CommonEnemy: {
        std::vector<EngineAction> out;
        if (!at_war(s, p, *c.enemy)) out.push_back(DeclareWar{p, *c.enemy});
        if (!at_war(s, *c.target, *c.enemy)) out.push_back(DeclareWar{*c.target, *c.enemy});
        return out;
    }
    case Skill::SeekPeace:
        return {OfferPeace{p, *c.target, c.trade}};
    case Skill::ResearchAgreement:
        return {SignResearchAgreement{p, *c.target}};
    case Skill::ChangeCloseness:
        return {AdjustCloseness{p, *c.target, c.closeness_delta}};
    case Skill::ProposeTrade:
        return {ExecuteTrade{*c.trade}};
    case Skill::ProductionPriority:
        return {SetProduction{p, *c.city, c.item}};
    case Skill::ChooseTechnology:
        return {SetResearch{p, c.item}};
    case Skill::Cheat:
        return {SendChat{p, private_channel(s.civ(p).name, s.civ(*c.target).name), c.message}};
    }
    return {};
}

std::optional<Illegality> check_skill(const Engine& engine, const GameState& state,
                                      const SkillCall& call) {
    std::vector<EngineAction> actions;
    try {
        actions = skill_actions(call, state);
    } catch (const Error& e) {
        return Illegality{e.code(), e.what()};
    }
    if (call.skill == Skill::CommonEnemy) {
        if (actions.empty()) return Illegality{"already_at_war", "both civs already fight the enemy"};
        if (at_war(state, call.proposer, *call.target)) {
            return Illegality{"at_war", "allies cannot be at war with each other"};
        }
    }
    if (actions.size() == 1) return engine.check(state, actions.front());
    GameState work = state;
    for (const auto& a : actions) {
        if (auto e = engine.check(work, a)) return e;
        engine.apply(work, a);
    }
    return std::nullopt;
}

void apply_skill(const Engine& engine, GameState& state, const SkillCall& call) {
    if (auto e = check_skill(engine, state, call)) throw IllegalAction(e->code, e->message);
    for (const auto& a : skill_actions(call, state)) engine.apply(state, a);
}

std::string describe_skill(const SkillCall& c, const GameState& s) {
    auto name = [&](std::optional<CivId> id) {
        return id && valid_civ(s, *id) ? s.civ(*id).name : std::string("?");
    };
    std::string out = name(c.proposer) + " " + skill_name(c.skill);
    if (c.target) out += " -> " + name(c.target);
    if (c.enemy) out += " against " + name(c.enemy);
    if (!c.item.empty()) out += " (" + c.item + ")";
    if (c.closeness_delta) out += " by " + std::to_string(c.closeness_delta);
    if (c.trade) {
        const auto bundle = [](const TradeBundle& b) {
            std::string t = std::to_string(b.gold) + " gold";
            for (const auto& [r, q] : b.resources) t += ", " + std::to_string(q) + " " + r;
            if (!b.cities.empty()) t += ", " + std::to_string(b.cities.size()) + " cities";
            for (Treaty tr : b.treaties) t += std::string(", ") + treaty_name(tr);
            return t;
        };
        out += " [gives " + bundle(c.trade->give) + "; asks " + bundle(c.trade->receive) + "]";
    }
    return out;
}

void AgentMemory::remember(std::string line) {
    short_term_.push_back(std::move(line));
    while (short_term_.size() > kShortTermCapacity) {
        if (summaries_.empty() || lines_in_last_summary_ >= kLinesPerSummary) {
            summaries_.push_back("Earlier:");
            lines_in_last_summary_ = 0;
        }
        summaries_.back() += "\n" + short_term_.front();
        ++lines_in_last_summary_;
        short_term_.pop_front();
    }
}

std::string AgentMemory::digest() const {
    std::string out;
    for (const auto& s : summaries_) out += s + "\n";
    for (const auto& l : short_term_) out += l + "\n";
    return out;
}

HashingEmbedder::HashingEmbedder(int dimension) : dimension_(dimension) {
    if (dimension < 1) throw Error("invalid_argument", "embedding dimension must be >= 1");
}

std::vector<float> HashingEmbedder::embed(std::string_view text) const {
    std::vector<double> acc(dimension_, 0.0);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        const std::uint64_t h = fnv1a64(token);
        const double sign = (mix64(h) & 1u) ? 1.0 : -1.0;
        acc[h % static_cast<std::uint64_t>(dimension_)] += sign;
        token.clear();
    };
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) {
            token.push_back(static_cast<char>(std::tolower(u)));
        } else {
            flush();
        }
    }
    flush();
    double norm = 0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    std::vector<float> out(dimension_, 0.0f);
    if (norm == 0) return out;
    for (int i = 0; i < dimension_; ++i) out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) throw Error("invalid_argument", "embedding sizes differ");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0 || nb == 0) return 0;
    return dot / std::sqrt(na * nb);
}

std::vector<std::string> chunk_text(std::string_view text, std::size_t size, std::size_t overlap) {
    if (size == 0 || overlap >= size) throw Error("invalid_argument", "chunk size must exceed overlap");
    std::vector<std::string> out;
    if (text.empty()) return out;
    const std::size_t step = size - overlap;
    for (std::size_t start = 0;; start += step) {
        out.emplace_back(text.substr(start, size));
        if (start + size >= text.size()) break;
    }
    return out;
}

std::size_t store_experience(AgentMemory& memory, const Embedder& embedder, ReflectionEntry entry) {
    const auto chunks = chunk_text(entry.text);
    for (const auto& chunk : chunks) {
        ReflectionEntry e = entry;
        e.text = chunk;
        e.embedding = embedder.embed(chunk);
        memory.long_term().push_back(std::move(e));
    }
    return chunks.size();
}

std::vector<RankedExperience> rank_experiences(const AgentMemory& memory, const Embedder& embedder,
                                               std::string_view query, int k) {
    if (k < 1) throw Error("invalid_argument", "k must be >= 1");
    const auto& entries = memory.long_term();
    if (entries.empty()) return {};
    const std::vector<float> q = embedder.embed(query);
    std::vector<RankedExperience> ranked;
    ranked.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) ranked.push_back({i, cosine(q, entries[i].embedding)});
    const std::size_t n = std::min<std::size_t>(k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + n, ranked.end(),
                      [](const RankedExperience& a, const RankedExperience& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.index > b.index;
                      });
    ranked.resize(n);
    return ranked;
}

std::vector<ReflectionEntry> retrieve_experiences(const AgentMemory& memory,
                                                  const Embedder& embedder,
                                                  std::string_view query, int k) {
    std::vector<ReflectionEntry> out;
    for (const auto& r : rank_experiences(memory, embedder, query, k)) {
        out.push_back(memory.long_term()[r.index]);
    }
    return out;
}

std::set<std::string> default_key_actions() {
    return {"DeclareWar", "SeekPeace", "DefenseAgreement", "CommonEnemy"};
}

std::vector<std::pair<std::size_t, std::size_t>> segment_trajectory(
    const Trajectory& t, const std::set<std::string>& key_actions) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        if (key_actions.count(t.steps[i].kind)) {
            out.emplace_back(start, i);
            start = i + 1;
        }
    }
    if (start < t.steps.size()) out.emplace_back(start, t.steps.size() - 1);
    return out;
}

namespace {

void require_roles(const ReflectionRoles& roles) {
    if (!roles.evaluator || !roles.self_reflection || !roles.memory || !roles.embedder) {
        throw Error("invalid_argument", "reflection needs an evaluator, a self-reflection role, memory and an embedder");
    }
}

std::string join_kinds(const std::vector<std::string>& kinds) {
    std::string out;
    for (const auto& k : kinds) out += (out.empty() ? "" : ", ") + k;
    return out.empty() ? std::string("routine play") : out;
}

DecisionOption valued(std::string id, std::string tag, std::string text, double value) {
    return {std::move(id), std::move(tag), std::move(text), value, json::object()};
}

// Picks an evaluation label for a segment's score change.
std::string evaluate(Advisor& evaluator, const std::string& civ, int turn, const std::string& summary,
                     const std::string& feedback, double reward) {
    DecisionContext c;
    c.kind = DecisionKind::evaluation;
    c.civ = civ;
    c.turn = turn;
    c.background = summary;
    c.events = feedback;
    c.options = {valued("neutral", "neutral", "the segment changed little", 0.0),
                 valued("positive", "positive", "the segment paid off", reward),
                 valued("negative", "negative", "the segment backfired", -reward)};
    return checked_decide(evaluator, c).choice();
}

} // namespace

std::vector<ReflectionEntry> reflect_rearview(const Trajectory& t, const ReflectionRoles& roles,
                                              const std::set<std::string>& key_actions) {
    if (t.steps.empty()) return {};
    require_roles(roles);
    std::vector<ReflectionEntry> out;
    const auto segments = segment_trajectory(t, key_actions);
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const auto [first, last] = segments[s];
        const TrajectoryStep& end = t.steps[last];
        const double end_score = s + 1 < segments.size() ? t.steps[segments[s + 1].first].score
                                                         : t.outcome.final_score;
        const double reward = end_score - t.steps[first].score;
        std::vector<std::string> keys;
        std::string summary;
        for (std::size_t i = first; i <= last; ++i) {
            if (key_actions.count(t.steps[i].kind)) keys.push_back(t.steps[i].kind);
            if (summary.size() < 200) summary += t.steps[i].description + "; ";
        }
        const std::string feedback = end.feedback.value_or("no feedback") +
                                     "; game result " + t.outcome.result + ", score change " +
                                     fmt(reward);
        const std::string label = evaluate(*roles.evaluator, t.civ, end.turn, summary, feedback, reward);

        const std::string what = join_kinds(keys);
        DecisionContext c;
        c.kind = DecisionKind::reflection;
        c.civ = t.civ;
        c.turn = end.turn;
        c.background = summary;
        c.events = feedback + "; evaluated " + label;
        c.options = {valued("revise", "revise", what + " had little effect; look for better timing.", 0.0),
                     valued("repeat", "repeat", "Repeat " + what + " in similar situations; it gained " + fmt(reward) + " score.", reward),
                     valued("avoid", "avoid", "Avoid " + what + " in similar situations; it cost " + fmt(-reward) + " score.", -reward)};
        const std::string lesson_id = checked_decide(*roles.self_reflection, c).choice();
        std::string lesson;
        for (const auto& o : c.options) {
            if (o.id == lesson_id) lesson = o.text;
        }

        ReflectionEntry e;
        e.turn_from = t.steps[first].turn;
        e.turn_to = end.turn;
        e.key_actions = keys;
        e.outcome = label;
        e.text = truncate("Turns " + std::to_string(e.turn_from) + "-" + std::to_string(e.turn_to) +
                              " (" + what + "): " + label + ". Lesson: " + lesson + " Context: " + summary,
                          kMaxReflectionChars);
        e.embedding = roles.embedder->embed(e.text);
        roles.memory->long_term().push_back(e);
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<Decision> default_alternatives(const TrajectoryStep& step, const GameState&) {
    std::vector<Decision> out{std::nullopt};
    if (!step.action) return out;
    if (const auto* w = std::get_if<DeclareWar>(&*step.action)) {
        out.push_back(OfferPeace{w->civ, w->target, std::nullopt});
    } else if (const auto* p = std::get_if<OfferPeace>(&*step.action)) {
        out.push_back(DeclareWar{p->civ, p->target});
    }
    return out;
}

SimulatorReflection reflect_with_simulator(const Trajectory& t, const ReflectionRoles& roles,
                                           const Simulator& simulator, const ArchiveLookup& archive,
                                           const std::set<std::string>& key_actions,
                                           const AlternativesFn& alternatives,
                                           const RolloutConfig& config) {
    SimulatorReflection out;
    std::vector<const TrajectoryStep*> points;
    for (const auto& s : t.steps) {
        if (key_actions.count(s.kind) && s.action) points.push_back(&s);
    }
    if (points.empty()) return out;
    require_roles(roles);
    for (const TrajectoryStep* p : points) {
        std::optional<GameState> state = archive ? archive(p->turn) : std::nullopt;
        if (!state) {
            out.warnings.push_back("no archived save for turn " + std::to_string(p->turn) +
                                   "; skipped " + p->kind);
            continue;
        }
        const CivId me = actor_of(*p->action);
        std::vector<Decision> branches{*p->action};
        for (auto& alt : alternatives(*p, *state)) branches.push_back(std::move(alt));
        const auto results = simulator.compare_decisions(*state, branches, config);
        out.branch_counts.push_back(static_cast<int>(results.size()));

        auto label = [&](std::size_t i) {
            if (i == 0) return p->kind + " (taken)";
            return branches[i] ? action_kind(*branches[i]) : std::string("no-op");
        };
        auto value = [&](std::size_t i) {
            return results[i].error ? -1e6 : results[i].deltas.at(idx(me)).S;
        };
        std::string feedback;
        DecisionContext ev;
        ev.kind = DecisionKind::evaluation;
        ev.civ = t.civ;
        ev.turn = p->turn;
        ev.background = p->description;
        std::size_t best_alt = 0;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const std::string outcome = results[i].error ? "illegal (" + results[i].error->code + ")"
                                                         : "score change " + fmt(value(i));
            feedback += label(i) + ": " + outcome + "; ";
            ev.options.push_back(valued("branch_" + std::to_string(i), i == 0 ? "taken" : "alternative",
                                        label(i) + " -> " + outcome, value(i)));
            if (i > 0 && (best_alt == 0 || value(i) > value(best_alt))) best_alt = i;
        }
        ev.events = feedback;
        const std::string best = checked_decide(*roles.evaluator, ev).choice();
        const bool taken_best = best == "branch_0";

        DecisionContext sr;
        sr.kind = DecisionKind::reflection;
        sr.civ = t.civ;
        sr.turn = p->turn;
        sr.background = p->description;
        sr.events = feedback + " best: " + best;
        const double margin = best_alt ? value(0) - value(best_alt) : 0.0;
        sr.options = {valued("keep", "keep", "Keep choosing " + p->kind + " in this situation.", margin),
                      valued("switch", "switch",
                             "Prefer " + (best_alt ? label(best_alt) : std::string("the alternative")) +
                                 " over " + p->kind + " in this situation.",
                             -margin)};
        const std::string lesson_id = checked_decide(*roles.self_reflection, sr).choice();

        ReflectionEntry e;
        e.turn_from = p->turn;
        e.turn_to = p->turn + config.turns;
        e.key_actions = {p->kind};
        e.outcome = taken_best ? "positive" : "negative";
        e.text = truncate("Turn " + std::to_string(p->turn) + " " + p->kind + ": " + feedback +
                              "Lesson: " + sr.options[lesson_id == "keep" ? 0 : 1].text,
                          kMaxReflectionChars);
        e.embedding = roles.embedder->embed(e.text);
        roles.memory->long_term().push_back(e);
        out.entries.push_back(std::move(e));
    }
    return out;
}

CivAgent::CivAgent(const Ruleset& ruleset, CivId civ, std::shared_ptr<Advisor> advisor,
                   AgentConfig config, std::shared_ptr<const Embedder> embedder,
                   const Simulator* simulator)
    : ruleset_(&ruleset),
      civ_(civ),
      advisor_(std::move(advisor)),
      config_(config),
      embedder_(embedder ? std::move(embedder) : std::make_shared<HashingEmbedder>()),
      simulator_(simulator) {
    if (!advisor_) throw Error("invalid_argument", "an agent needs an advisor");
}

void CivAgent::log(const json& record) const {
    if (transcript_) transcript_(record);
}

void CivAgent::record_step(TrajectoryStep step) {
    memory_.remember("T" + std::to_string(step.turn) + ": " + step.description +
                     (step.feedback ? " (" + *step.feedback + ")" : ""));
    trajectory_.steps.push_back(std::move(step));
}

namespace {

struct Standing {
    double mine = 0;
    std::map<std::string, double> military; // F per civ name
    std::map<std::string, int> distance;    // nearest known city distance, -1 unknown
};

Standing standing(const Observation& obs) {
    Standing st;
    const json& b = obs.body;
    const std::string me = b.at("viewer");
    for (const auto& [name, score] : b.at("scores").items()) st.military[name] = score.at("F").get<double>();
    st.mine = st.military[me];
    std::vector<Coord> own;
    for (const auto& c : b.at("cities").at("own")) own.push_back({c.at("x").get<int>(), c.at("y").get<int>()});
    for (const auto& c : b.at("cities").at("foreign")) {
        const std::string owner = c.at("owner");
        const Coord pos{c.at("x").get<int>(), c.at("y").get<int>()};
        for (Coord o : own) {
            const int d = hex_distance(o, pos);
            auto it = st.distance.find(owner);
            if (it == st.distance.end() || d < it->second) st.distance[owner] = d;
        }
    }
    return st;
}

int known_distance(const Standing& st, const std::string& name) {
    auto it = st.distance.find(name);
    return it == st.distance.end() ? -1 : it->second;
}

std::string situation_text(const GameState& s, const Observation& obs, CivId me) {
    const Standing st = standing(obs);
    std::ostringstream out;
    const Civilization& civ = s.civ(me);
    out << "Turn " << s.turn << ". " << civ.name << " has " << civ.cities.size() << " cities, "
        << civ.units.size() << " units, " << civ.gold << " gold and military " << fmt(st.mine) << ".";
    for (const auto& other : s.civs) {
        if (other.id == me || !other.alive()) continue;
        out << " " << other.name << ": " << (at_war(s, me, other.id) ? "war" : "peace")
            << ", military " << fmt(st.military.at(other.name));
        const int d = known_distance(st, other.name);
        if (d >= 0) out << ", " << d << " tiles away";
        out << ".";
    }
    return out.str();
}

} // namespace

DecisionContext CivAgent::base_context(const GameState& s, const Observation& obs,
                                       DecisionKind kind) const {
    DecisionContext c;
    c.kind = kind;
    c.game_id = s.game_id;
    c.turn = s.turn;
    c.civ = s.civ(civ_).name;
    c.background = situation_text(s, obs, civ_);
    c.role_profile = "You lead " + c.civ +
                     ". Long-term goal: the highest civilization score by the turn cap. Stay alive, grow, and only fight wars you can win.";
    std::string events;
    for (const auto& n : obs.body.at("notifications")) events += n.at("text").get<std::string>() + "\n";
    for (const auto& e : obs.body.at("events")) events += e.at("text").get<std::string>() + "\n";
    c.events = events;
    c.memory_digest = memory_.digest();
    c.observation = obs.body;
    return c;
}

std::vector<SkillCall> CivAgent::candidate_skills(const GameState& s) const {
    const Engine engine(*ruleset_);
    std::vector<SkillCall> out;
    auto consider = [&](SkillCall c) {
        if (!check_skill(engine, s, c)) out.push_back(std::move(c));
    };
    const Civilization& me = s.civ(civ_);
    if (!me.alive()) return out;
    const auto held = civ_resources(s, civ_);
    for (const auto& other : s.civs) {
        if (other.id == civ_ || !other.alive()) continue;
        const CivId t = other.id;
        if (at_war(s, civ_, t)) {
            consider({Skill::SeekPeace, civ_, t});
            continue;
        }
        consider({Skill::DeclareWar, civ_, t});
        consider({Skill::DefenseAgreement, civ_, t});
        consider({Skill::ResearchAgreement, civ_, t});
        SkillCall closer{Skill::ChangeCloseness, civ_, t};
        closer.closeness_delta = kClosenessStep;
        consider(closer);
        for (const auto& enemy : s.civs) {
            if (enemy.id == civ_ || enemy.id == t || !enemy.alive() || !at_war(s, civ_, enemy.id)) continue;
            SkillCall ce{Skill::CommonEnemy, civ_, t};
            ce.enemy = enemy.id;
            consider(ce);
        }
        const auto theirs = civ_resources(s, t);
        for (const auto& [res, qty] : held) {
            const ResourceDef* def = ruleset_->resource(res);
            if (!def || def->kind != ResourceKind::luxury || qty < 2 || theirs.count(res)) continue;
            TradeOffer offer;
            offer.proposer = civ_;
            offer.target = t;
            offer.give.resources = {{res, 1}};
            offer.receive.gold = kTradePrice;
            SkillCall trade{Skill::ProposeTrade, civ_, t};
            trade.trade = offer;
            consider(trade);
            break;
        }
    }
    return out;
}

double CivAgent::heuristic_value(const GameState& s, const Observation& obs, const SkillCall& c) const {
    const Standing st = standing(obs);
    const std::string them = s.civ(*c.target).name;
    const double theirs = st.military.at(them);
    const int d = known_distance(st, them);
    const Relation& rel = s.diplomacy.at(civ_, *c.target);
    switch (c.skill) {
    case Skill::DeclareWar:
        if (st.mine > 0 && st.mine >= 1.5 * theirs && d >= 0 && d <= 8) {
            return 0.5 + std::min(1.0, st.mine / std::max(theirs, 1.0) - 1.5);
        }
        return -1.0;
    case Skill::SeekPeace:
        if (st.mine < 0.8 * theirs) return 1.0;
        return st.mine < theirs ? 0.3 : -0.5;
    case Skill::DefenseAgreement: {
        bool threat = false;
        for (const auto& [name, f] : st.military) {
            if (name == them || name == s.civ(civ_).name) continue;
            const int dn = known_distance(st, name);
            threat |= f > st.mine && dn >= 0 && dn <= 10;
        }
        return (threat ? 0.4 : -0.2) + rel.closeness / 200.0;
    }
    case Skill::ResearchAgreement:
        return s.civ(civ_).gold >= ruleset_->rules.research_agreement_cost + 20 ? 0.3 : -1.0;
    case Skill::ChangeCloseness:
        return rel.closeness < 50 ? 0.05 : -0.1;
    case Skill::CommonEnemy: {
        const double enemy = st.military.at(s.civ(*c.enemy).name);
        return theirs >= 0.5 * enemy ? 0.6 : -0.3;
    }
    case Skill::ProposeTrade:
        return 0.2;
    default:
        return 0.0;
    }
}

double CivAgent::retrieval_adjustment(const std::vector<RankedExperience>& hits, Skill skill) const {
    double adj = 0;
    for (const auto& h : hits) {
        const ReflectionEntry& e = memory_.long_term()[h.index];
        if (std::find(e.key_actions.begin(), e.key_actions.end(), skill_name(skill)) == e.key_actions.end()) {
            continue;
        }
        if (e.outcome == "positive") adj += 0.25 * h.score;
        if (e.outcome == "negative") adj -= 0.25 * h.score;
    }
    return adj;
}

ProposalTrace CivAgent::propose_skills(const GameState& s) {
    if (s.turn % config_.proposal_interval != 0) {
        throw Error("cadence_violation", "skills are proposed only every " +
                                             std::to_string(config_.proposal_interval) + " turns");
    }
    ProposalTrace trace;
    const Observation obs = extract_observation(s, *ruleset_, civ_);

    // Situation reasoning.
    trace.situation = situation_text(s, obs, civ_);

    // Goal setting informed by retrieved reflections.
    const auto hits = rank_experiences(memory_, *embedder_, trace.situation, config_.retrieval_k);
    for (const auto& h : hits) trace.retrieved.push_back(memory_.long_term()[h.index]);
    const Standing st = standing(obs);
    bool war = false, losing = false;
    for (const auto& other : s.civs) {
        if (other.id == civ_ || !other.alive() || !at_war(s, civ_, other.id)) continue;
        war = true;
        losing |= st.mine < st.military.at(other.name);
    }
    trace.goals = std::string("Long-term: highest score by the turn cap. Short-term: ") +
                  (losing ? "secure peace and rebuild the army." : war ? "press the advantage in the current war." : "expand, build and keep neighbours friendly.");
    for (const auto& e : trace.retrieved) trace.goals += " Recalled: " + e.text.substr(0, 120);

    // Candidate selection.
    trace.candidates = candidate_skills(s);
    std::vector<double> values;
    for (const auto& c : trace.candidates) values.push_back(heuristic_value(s, obs, c));
    if (simulator_ && !trace.candidates.empty()) {
        std::vector<Decision> branches{std::nullopt};
        for (const auto& c : trace.candidates) branches.push_back(skill_actions(c, s).front());
        const auto results = simulator_->compare_decisions(s, branches, config_.proposal_rollout);
        const double base = results[0].error ? 0.0 : results[0].deltas.at(idx(civ_)).S;
        for (std::size_t i = 0; i < trace.candidates.size(); ++i) {
            const auto& r = results[i + 1];
            values[i] = r.error ? -1e6 : r.deltas.at(idx(civ_)).S - base;
        }
    }
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += retrieval_adjustment(hits, trace.candidates[i].skill);

    json log_record = {{"game_id", s.game_id}, {"turn", s.turn}, {"civ", s.civ(civ_).name},
                       {"workflow", "propose_skills"}, {"situation", trace.situation},
                       {"goals", trace.goals}};
    json retrieved = json::array();
    for (const auto& e : trace.retrieved) retrieved.push_back(e.text);
    log_record["retrieved"] = retrieved;

    if (trace.candidates.empty()) {
        log_record["dispatched"] = json::array();
        log(log_record);
        return trace;
    }

    // Conversion of confirmed skills.
    DecisionContext ctx = base_context(s, obs, DecisionKind::skill_proposal);
    ctx.role_profile += " " + trace.goals;
    ctx.max_choices = static_cast<int>(trace.candidates.size());
    ctx.allow_empty = true;
    for (std::size_t i = 0; i < trace.candidates.size(); ++i) {
        const SkillCall& c = trace.candidates[i];
        ctx.options.push_back({"skill_" + std::to_string(i), skill_name(c.skill), describe_skill(c, s),
                               values[i], encode_skill(c)});
    }
    AdvisorDecision decision;
    try {
        decision = checked_decide(*advisor_, ctx);
    } catch (const std::exception& e) {
        trace.error = e.what();
        log_record["error"] = e.what();
        log_record["dispatched"] = json::array();
        log(log_record);
        memory_.remember("T" + std::to_string(s.turn) + ": skill proposal failed: " + e.what());
        return trace;
    }
    const Engine engine(*ruleset_);
    for (const auto& id : decision.choices) {
        if (static_cast<int>(trace.dispatched.size()) >= config_.max_skills) break;
        const std::size_t i = std::stoul(id.substr(6));
        const SkillCall& c = trace.candidates[i];
        if (check_skill(engine, s, c)) continue;
        trace.dispatched.push_back(c);
    }
    json dispatched = json::array();
    for (const auto& c : trace.dispatched) dispatched.push_back(encode_skill(c));
    log_record["candidates"] = encode_context(ctx)["options"];
    log_record["decision"] = encode_decision(decision);
    log_record["dispatched"] = dispatched;
    log(log_record);
    return trace;
}

double CivAgent::response_heuristic(const GameState& s, const Observation& obs, const SkillCall& c) const {
    const Standing st = standing(obs);
    const std::string them = s.civ(c.proposer).name;
    const double theirs = st.military.at(them);
    const Relation& rel = s.diplomacy.at(civ_, c.proposer);
    switch (c.skill) {
    case Skill::SeekPeace:
        if (st.mine < theirs) return 1.0;
        return st.mine >= 1.5 * theirs ? -1.0 : 0.2;
    case Skill::DefenseAgreement:
        return rel.closeness >= 0 ? 0.5 : -0.5;
    case Skill::ResearchAgreement:
        return s.civ(civ_).gold >= ruleset_->rules.research_agreement_cost + 10 ? 0.5 : -1.0;
    case Skill::CommonEnemy: {
        const double enemy = st.military.at(s.civ(*c.enemy).name);
        return st.mine >= 0.8 * enemy ? 0.4 : -0.6;
    }
    case Skill::ProposeTrade: {
        // Value of what flows to this civ minus what flows away.
        auto worth = [&](const TradeBundle& b, bool incoming) {
            double v = b.gold + 150.0 * b.cities.size() + 15.0 * b.treaties.size();
            const auto held = civ_resources(s, civ_);
            for (const auto& [res, q] : b.resources) {
                auto it = held.find(res);
                const bool have = it != held.end() && it->second > (incoming ? 0 : q);
                v += q * (have ? 4.0 : 12.0);
            }
            return v;
        };
        return worth(c.trade->give, true) - worth(c.trade->receive, false);
    }
    default:
        return 0.0;
    }
}

SkillResponse CivAgent::respond_to_skill(const GameState& s, const SkillCall& incoming) {
    SkillResponse r;
    json log_record = {{"game_id", s.game_id}, {"turn", s.turn}, {"workflow", "respond_to_skill"},
                       {"incoming", encode_skill(incoming)}};
    auto decline = [&](std::string reason) {
        r.agree = false;
        r.reason = std::move(reason);
        log_record["response"] = "disagree";
        log_record["reason"] = r.reason;
        log(log_record);
        return r;
    };
    try {
        validate_skill(incoming, s);
    } catch (const Error& e) {
        return decline(e.code());
    }
    if (!incoming.target || *incoming.target != civ_ || !needs_response(incoming.skill)) {
        return decline("not_addressed");
    }
    log_record["civ"] = s.civ(civ_).name;
    const Engine engine(*ruleset_);
    if (auto e = check_skill(engine, s, incoming)) return decline(e->code);

    const Observation obs = extract_observation(s, *ruleset_, civ_);
    const Standing st = standing(obs);
    const std::string proposer = s.civ(incoming.proposer).name;

    // Intent reasoning.
    const double theirs = st.military.at(proposer);
    const std::string intent = "Why would " + proposer + " propose " + skill_name(incoming.skill) +
                               "? Their military is " + fmt(theirs) + " against our " + fmt(st.mine) +
                               (theirs > st.mine ? "; they hold the upper hand." : "; they may need us.");
    log_record["intent"] = intent;

    // Accept/reject evaluation.
    double value = 0;
    if (simulator_) {
        GameState accepted = s;
        apply_skill(engine, accepted, incoming);
        RolloutConfig cfg{config_.response_horizon, true};
        const double yes = simulator_->rollout(accepted, cfg).end.at(idx(civ_)).S;
        const double no = simulator_->rollout(s, cfg).end.at(idx(civ_)).S;
        value = yes - no;
        log_record["evaluation"] = {{"accept", yes}, {"reject", no}};
    } else {
        const double h = response_heuristic(s, obs, incoming);
        DecisionContext ev = base_context(s, obs, DecisionKind::evaluation);
        ev.events = intent + "\n" + describe_skill(incoming, s);
        ev.options = {valued("unfavorable", "unfavorable", "accepting hurts us", -h),
                      valued("favorable", "favorable", "accepting helps us", h)};
        try {
            const std::string verdict = checked_decide(*advisor_, ev).choice();
            value = verdict == "favorable" ? std::max(std::abs(h), 1e-3) : -std::max(std::abs(h), 1e-3);
            if (h == 0) value = 0;
        } catch (const std::exception& e) {
            return decline("advisor_failure");
        }
        log_record["evaluation"] = {{"heuristic", h}};
    }

    // Retrieval-augmented final decision.
    const std::string query = intent + " " + describe_skill(incoming, s);
    const auto hits = rank_experiences(memory_, *embedder_, query, config_.retrieval_k);
    value += retrieval_adjustment(hits, incoming.skill);
    DecisionContext fin = base_context(s, obs, DecisionKind::diplomacy_response);
    fin.events = intent + "\n" + describe_skill(incoming, s);
    for (const auto& h : hits) fin.memory_digest += "Recalled: " + memory_.long_term()[h.index].text + "\n";
    fin.options = {valued("disagree", "disagree", "decline the proposal", 0.0),
                   valued("agree", "agree", "accept the proposal", value)};
    std::string answer;
    try {
        answer = checked_decide(*advisor_, fin).choice();
    } catch (const std::exception&) {
        return decline("advisor_failure");
    }
    r.agree = answer == "agree";
    r.reason = r.agree ? "favorable" : "unfavorable";
    if (r.agree) {
        r.actions = skill_actions(incoming, s);
    } else if (incoming.skill == Skill::ProposeTrade) {
        TradeOffer counter = *incoming.trade;
        if (counter.receive.gold > 0) counter.receive.gold /= 2;
        else if (counter.give.gold > 0) counter.give.gold += counter.give.gold / 2;
        if (!(counter == *incoming.trade)) r.counter = counter;
    }
    log_record["response"] = answer;
    log_record["value"] = value;
    log(log_record);
    return r;
}

std::optional<std::string> CivAgent::choose_production(const GameState& s, const City& city) {
    const auto items = production_candidates(*ruleset_, s, civ_, city.id);
    if (items.empty()) return std::nullopt;
    const Observation obs = extract_observation(s, *ruleset_, civ_);
    DecisionContext c = base_context(s, obs, DecisionKind::production);
    c.events = "City " + city.name + " (population " + std::to_string(city.population) + ") is idle.";
    for (const auto& item : items) {
        c.options.push_back({item, production_tag(*ruleset_, item), "build " + item, std::nullopt,
                             json{{"city", idx(city.id)}}});
    }
    try {
        return checked_decide(*advisor_, c).choice();
    } catch (const std::exception& e) {
        log({{"game_id", s.game_id}, {"turn", s.turn}, {"workflow", "production"}, {"error", e.what()}});
        return items.front();
    }
}

std::optional<std::string> CivAgent::choose_research(const GameState& s) {
    auto techs = researchable_techs(*ruleset_, s.civ(civ_).techs);
    if (techs.empty()) return std::nullopt;
    std::stable_sort(techs.begin(), techs.end(), [&](const std::string& a, const std::string& b) {
        return ruleset_->tech(a)->cost < ruleset_->tech(b)->cost;
    });
    const Observation obs = extract_observation(s, *ruleset_, civ_);
    DecisionContext c = base_context(s, obs, DecisionKind::research);
    for (const auto& t : techs) {
        c.options.push_back({t, "tech", "research " + t + " (" + std::to_string(ruleset_->tech(t)->cost) + ")",
                             std::nullopt, json::object()});
    }
    try {
        return checked_decide(*advisor_, c).choice();
    } catch (const std::exception& e) {
        log({{"game_id", s.game_id}, {"turn", s.turn}, {"workflow", "research"}, {"error", e.what()}});
        return techs.front();
    }
}

} // namespace microciv
