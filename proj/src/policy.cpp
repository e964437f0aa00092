#include "microciv/policy.hpp"

#include "microciv/engine.hpp"
#include "microciv/error.hpp"
#include "microciv/queries.hpp"
#include "microciv/scoring.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace microciv {

namespace {

constexpr int kExpansionTarget = 4;
constexpr int kWarDistance = 8;
constexpr double kWarAdvantage = 1.5;
constexpr double kPeaceDisadvantage = 0.6;

class Planner {
public:
    Planner(const Ruleset& rs, const GameState& s, CivId civ, const AspectSwitches& sw, bool log)
        : rs_(rs), engine_(rs), work_(s), civ_(civ), sw_(sw), log_suppressed_(log) {}

    BaselineTurn run() {
        if (idx(civ_) < 0 || idx(civ_) >= static_cast<int>(work_.civs.size()) || !me().alive()) {
            return {};
        }
        if (sw_.technology) research();
        if (sw_.production) production();
        if (sw_.diplomacy || log_suppressed_) diplomacy();
        if (sw_.unit) units();
        return std::move(out_);
    }

    // One item per production category: expansion, economic, military.
    std::vector<std::string> candidates(CityId id) {
        std::vector<std::string> out;
        const City* city = find_city(work_, id);
        if (!city || city->owner != civ_) return out;
        const int cities = static_cast<int>(me().cities.size());
        const bool settler_ok = !engine_.check(work_, SetProduction{civ_, id, "settler"});
        if (settler_ok && city->population >= 2 &&
            cities + count_units("settler") < kExpansionTarget && count_units("settler") == 0) {
            out.push_back("settler");
        }
        const bool worker_ok = !engine_.check(work_, SetProduction{civ_, id, "worker"});
        if (worker_ok && count_units("worker") < std::max(1, cities / 2)) {
            out.push_back("worker");
        } else if (auto b = best_building(*city)) {
            out.push_back(*b);
        }
        if (city->population >= 2) {
            if (auto m = best_military(*city)) out.push_back(*m);
        }
        return out;
    }

private:
    const Ruleset& rs_;
    Engine engine_;
    GameState work_;
    CivId civ_;
    AspectSwitches sw_;
    bool log_suppressed_;
    BaselineTurn out_;

    Civilization& me() { return work_.civ(civ_); }

    bool attempt(const EngineAction& a) {
        if (engine_.check(work_, a)) return false;
        engine_.apply(work_, a);
        out_.actions.push_back(a);
        return true;
    }

    bool at_war_with_anyone() {
        for (const auto& other : work_.civs) {
            if (other.id != civ_ && other.alive() && at_war(work_, civ_, other.id)) return true;
        }
        return false;
    }

    void research() {
        if (!me().current_research.empty()) return;
        const TechDef* best = nullptr;
        for (const auto& id : researchable_techs(rs_, me().techs)) {
            const TechDef* t = rs_.tech(id);
            if (t && (!best || t->cost < best->cost)) best = t;
        }
        if (best) attempt(SetResearch{civ_, best->id});
    }

    int count_units(const std::string& type) {
        int n = 0;
        for (const auto& u : me().units) n += u.type == type ? 1 : 0;
        for (const auto& c : me().cities) n += c.production == type ? 1 : 0;
        return n;
    }

    int military_units() {
        int n = 0;
        for (const auto& u : me().units) {
            const UnitTypeDef* t = rs_.unit_type(u.type);
            n += t && t->is_military ? 1 : 0;
        }
        return n;
    }

    std::optional<std::string> best_military(const City& city) {
        const UnitTypeDef* best = nullptr;
        for (const auto& t : rs_.unit_types) {
            if (!t.is_military || t.is_water) continue;
            if (engine_.check(work_, SetProduction{civ_, city.id, t.id})) continue;
            const double v = static_cast<double>(t.strength) / std::max(1, t.cost);
            if (!best || v > static_cast<double>(best->strength) / std::max(1, best->cost)) best = &t;
        }
        if (!best) return std::nullopt;
        return best->id;
    }

    std::optional<std::string> best_building(const City& city) {
        const BuildingDef* best = nullptr;
        double best_v = 0;
        for (const auto& b : rs_.buildings) {
            if (engine_.check(work_, SetProduction{civ_, city.id, b.id})) continue;
            bool queued = false;
            for (const auto& c : me().cities) queued |= b.is_wonder && c.production == b.id;
            if (queued) continue;
            const double v = static_cast<double>(b.yields.total()) / std::max(1, b.cost);
            if (!best || v > best_v) {
                best = &b;
                best_v = v;
            }
        }
        if (!best) return std::nullopt;
        return best->id;
    }

    std::optional<std::string> choose_item(const City& city, bool war) {
        if (war && city.population >= 2) {
            if (auto m = best_military(city)) return m;
        }
        const int cities = static_cast<int>(me().cities.size());
        if (city.population >= 2 && cities + count_units("settler") < kExpansionTarget &&
            count_units("settler") == 0) {
            return std::string("settler");
        }
        if (count_units("worker") < std::max(1, cities / 2)) return std::string("worker");
        if (military_units() < cities && city.population >= 2) {
            if (auto m = best_military(city)) return m;
        }
        if (auto b = best_building(city)) return b;
        if (city.population >= 2) return best_military(city);
        return std::nullopt;
    }

    void production() {
        const bool war = at_war_with_anyone();
        std::vector<CityId> ids;
        for (const auto& c : me().cities) ids.push_back(c.id);
        for (CityId id : ids) {
            const City* city = find_city(work_, id);
            if (!city || !city->production.empty()) continue;
            if (auto item = choose_item(*city, war)) attempt(SetProduction{civ_, id, *item});
        }
    }

    void diplomacy() {
        const double mine = military_strength(me(), rs_);
        for (const auto& other : work_.civs) {
            if (other.id == civ_ || !other.alive()) continue;
            const double theirs = military_strength(other, rs_);
            std::optional<EngineAction> intent;
            if (at_war(work_, civ_, other.id)) {
                if (mine < kPeaceDisadvantage * theirs) intent = OfferPeace{civ_, other.id, std::nullopt};
            } else {
                const int d = distance_between_civs(work_, civ_, other.id);
                if (mine > 0 && mine >= kWarAdvantage * theirs && d >= 0 && d <= kWarDistance) {
                    intent = DeclareWar{civ_, other.id};
                }
            }
            if (!intent || engine_.check(work_, *intent)) continue;
            if (sw_.diplomacy) {
                attempt(*intent);
            } else {
                out_.suppressed.push_back(*intent);
            }
        }
    }

    bool site_ok(Coord c) {
        const Tile& t = work_.map.at(c);
        if (!is_passable_land(rs_, t) || (t.owner && *t.owner != civ_)) return false;
        for (const auto& civ : work_.civs) {
            for (const auto& city : civ.cities) {
                if (hex_distance(city.pos, c) < rs_.rules.city_min_distance) return false;
            }
        }
        return true;
    }

    // Moves toward `target`, preferring the reachable tile closest to it.
    void move_toward(const Unit& u, Coord target) {
        const int here = hex_distance(u.pos, target);
        std::optional<Coord> best;
        int best_d = here;
        int best_left = -1;
        for (const auto& [c, left] : reachable_tiles(rs_, work_, u)) {
            const int d = hex_distance(c, target);
            if (d < best_d || (d == best_d && best && left > best_left)) {
                best = c;
                best_d = d;
                best_left = left;
            }
        }
        if (best && *best != u.pos) attempt(MoveUnit{civ_, u.id, *best});
    }

    std::optional<Coord> nearest(Coord from, const std::vector<Coord>& targets) {
        std::optional<Coord> best;
        int best_d = std::numeric_limits<int>::max();
        for (Coord c : targets) {
            const int d = hex_distance(from, c);
            if (d < best_d) {
                best = c;
                best_d = d;
            }
        }
        return best;
    }

    void settle(UnitId id) {
        if (attempt(FoundCity{civ_, id})) return;
        const Unit* u = find_unit(work_, id);
        if (!u || u->moves_left <= 0) return;
        std::vector<Coord> sites;
        for (int i = 0; i < work_.map.tile_count(); ++i) {
            const Coord c = work_.map.coord_of(i);
            if (hex_distance(c, u->pos) <= 8 && site_ok(c)) sites.push_back(c);
        }
        if (auto target = nearest(u->pos, sites)) {
            move_toward(*u, *target);
            attempt(FoundCity{civ_, id});
        }
    }

    bool improve_here(UnitId id) {
        for (const auto& imp : rs_.improvements) {
            if (attempt(ImproveTile{civ_, id, imp.id})) return true;
        }
        return false;
    }

    void work(UnitId id) {
        if (improve_here(id)) return;
        const Unit* u = find_unit(work_, id);
        if (!u || u->moves_left <= 0) return;
        std::vector<Coord> spots;
        for (int i = 0; i < work_.map.tile_count(); ++i) {
            const Tile& t = work_.map.tiles()[i];
            if (t.owner != civ_ || city_at(work_, work_.map.coord_of(i))) continue;
            for (const auto& imp : rs_.improvements) {
                const bool fits = std::find(imp.terrains.begin(), imp.terrains.end(), t.terrain) !=
                                  imp.terrains.end();
                if (fits && (t.improvement.empty() ||
                             (t.improvement == imp.id && t.improvement_count < imp.max_applications))) {
                    spots.push_back(work_.map.coord_of(i));
                    break;
                }
            }
        }
        if (auto target = nearest(u->pos, spots)) {
            move_toward(*u, *target);
            improve_here(id);
        }
    }

    bool strike(UnitId id) {
        const Unit* u = find_unit(work_, id);
        if (!u) return false;
        std::vector<std::pair<int, CombatTarget>> targets;
        for (const auto& other : work_.civs) {
            if (other.id == civ_ || !at_war(work_, civ_, other.id)) continue;
            for (const auto& c : other.cities) targets.push_back({c.health, c.id});
            for (const auto& d : other.units) targets.push_back({1000 + d.health, d.id});
        }
        std::stable_sort(targets.begin(), targets.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [prio, target] : targets) {
            if (attempt(Attack{civ_, id, target})) return true;
        }
        return false;
    }

    void fight(UnitId id) {
        if (strike(id)) return;
        const Unit* u = find_unit(work_, id);
        if (!u || u->moves_left <= 0) return;
        std::vector<Coord> enemy_cities;
        std::vector<Coord> enemy_units;
        for (const auto& other : work_.civs) {
            if (other.id == civ_ || !at_war(work_, civ_, other.id)) continue;
            for (const auto& c : other.cities) enemy_cities.push_back(c.pos);
            for (const auto& d : other.units) enemy_units.push_back(d.pos);
        }
        auto target = nearest(u->pos, enemy_cities);
        if (!target) target = nearest(u->pos, enemy_units);
        if (target) {
            move_toward(*u, *target);
            strike(id);
            return;
        }
        const UnitTypeDef* type = rs_.unit_type(u->type);
        if (type && type->movement >= 2 && !type->is_water) {
            explore(*u);
            return;
        }
        std::vector<Coord> homes;
        for (const auto& c : me().cities) homes.push_back(c.pos);
        if (auto home = nearest(u->pos, homes); home && *home != u->pos) move_toward(*u, *home);
    }

    void explore(const Unit& u) {
        std::optional<Coord> best;
        int best_unknown = 0;
        for (const auto& [c, left] : reachable_tiles(rs_, work_, u)) {
            int unknown = 0;
            for (int i = 0; i < work_.map.tile_count(); ++i) {
                const Coord t = work_.map.coord_of(i);
                if (!work_.map.tiles()[i].explored(civ_) && hex_distance(t, c) <= rs_.rules.sight_radius) {
                    ++unknown;
                }
            }
            if (unknown > best_unknown) {
                best = c;
                best_unknown = unknown;
            }
        }
        if (best) attempt(MoveUnit{civ_, u.id, *best});
    }

    void units() {
        std::vector<UnitId> ids;
        for (const auto& u : me().units) ids.push_back(u.id);
        for (UnitId id : ids) {
            const Unit* u = find_unit(work_, id);
            if (!u) continue;
            attempt(PromoteUnit{civ_, id});
            const UnitTypeDef* type = rs_.unit_type(u->type);
            if (!type) continue;
            if (type->can_found_city) {
                settle(id);
            } else if (type->can_improve) {
                if (sw_.workers) work(id);
            } else if (type->is_military) {
                fight(id);
            }
        }
    }
};

const std::vector<std::string>& production_priority(bool war) {
    static const std::vector<std::string> peace{"expansion", "economic", "military"};
    static const std::vector<std::string> wartime{"military", "expansion", "economic"};
    return war ? wartime : peace;
}

bool observation_at_war(const json& obs) {
    if (!obs.contains("diplomacy")) return false;
    for (const auto& d : obs["diplomacy"]) {
        for (const auto& s : d.value("states", json::array())) {
            if (s == "war") return true;
        }
    }
    return false;
}

} // namespace

BaselineTurn baseline_turn_detailed(const Ruleset& ruleset, const GameState& state, CivId civ,
                                    const AspectSwitches& switches, bool log_suppressed) {
    return Planner(ruleset, state, civ, switches, log_suppressed).run();
}

std::vector<EngineAction> baseline_turn(const Ruleset& ruleset, const GameState& state, CivId civ,
                                        const AspectSwitches& switches) {
    return baseline_turn_detailed(ruleset, state, civ, switches).actions;
}

std::vector<std::string> production_candidates(const Ruleset& ruleset, const GameState& state,
                                               CivId civ, CityId city) {
    return Planner(ruleset, state, civ, {}, false).candidates(city);
}

std::string production_tag(const Ruleset& ruleset, std::string_view item) {
    if (const UnitTypeDef* u = ruleset.unit_type(item)) {
        if (u->can_found_city) return "expansion";
        if (u->is_military) return "military";
        return "economic";
    }
    return "economic";
}

namespace {

constexpr std::pair<DecisionKind, const char*> kKindNames[] = {
    {DecisionKind::production, "production"},
    {DecisionKind::research, "research"},
    {DecisionKind::diplomacy_response, "diplomacy_response"},
    {DecisionKind::skill_proposal, "skill_proposal"},
    {DecisionKind::negotiation_reply, "negotiation_reply"},
    {DecisionKind::deception_judgement, "deception_judgement"},
    {DecisionKind::chat, "chat"},
    {DecisionKind::evaluation, "evaluation"},
    {DecisionKind::reflection, "reflection"},
};

} // namespace

const char* decision_kind_name(DecisionKind kind) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "production";
}

DecisionKind decision_kind_from_name(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (name == n) return k;
    }
    throw Error("schema_error", "unknown decision kind '" + std::string(name) + "'");
}

json encode_context(const DecisionContext& c) {
    json options = json::array();
    for (const auto& o : c.options) {
        options.push_back({{"id", o.id},
                           {"tag", o.tag},
                           {"text", o.text},
                           {"value", o.value ? json(*o.value) : json(nullptr)},
                           {"payload", o.payload}});
    }
    return {{"kind", decision_kind_name(c.kind)},
            {"game_id", c.game_id},
            {"turn", c.turn},
            {"civ", c.civ},
            {"background", c.background},
            {"role_profile", c.role_profile},
            {"events", c.events},
            {"memory_digest", c.memory_digest},
            {"observation", c.observation},
            {"options", std::move(options)},
            {"max_choices", c.max_choices},
            {"allow_empty", c.allow_empty}};
}

DecisionContext decode_context(const json& j) {
    try {
        DecisionContext c;
        c.kind = decision_kind_from_name(j.at("kind").get<std::string>());
        c.game_id = j.value("game_id", "");
        c.turn = j.value("turn", 0);
        c.civ = j.value("civ", "");
        c.background = j.value("background", "");
        c.role_profile = j.value("role_profile", "");
        c.events = j.value("events", "");
        c.memory_digest = j.value("memory_digest", "");
        c.observation = j.value("observation", json::object());
        for (const auto& o : j.at("options")) {
            DecisionOption opt;
            opt.id = o.at("id").get<std::string>();
            opt.tag = o.value("tag", "");
            opt.text = o.value("text", "");
            if (o.contains("value") && !o["value"].is_null()) opt.value = o["value"].get<double>();
            opt.payload = o.value("payload", json::object());
            c.options.push_back(std::move(opt));
        }
        c.max_choices = j.value("max_choices", 1);
        c.allow_empty = j.value("allow_empty", false);
        return c;
    } catch (const json::exception& e) {
        throw Error("schema_error", std::string("malformed decision context: ") + e.what());
    }
}

json encode_decision(const AdvisorDecision& d) {
    return {{"choices", d.choices}, {"rationale", d.rationale}};
}

AdvisorDecision decode_decision(const json& j) {
    try {
        AdvisorDecision d;
        d.choices = j.at("choices").get<std::vector<std::string>>();
        d.rationale = j.value("rationale", "");
        return d;
    } catch (const json::exception& e) {
        throw Error("schema_error", std::string("malformed decision: ") + e.what());
    }
}

void check_closed_world(const DecisionContext& c, const AdvisorDecision& d) {
    const std::size_t n = d.choices.size();
    if (n == 0 && !c.allow_empty) throw Error("closed_world_violation", "no option chosen");
    if (static_cast<int>(n) > std::max(1, c.max_choices)) {
        throw Error("closed_world_violation", "too many options chosen");
    }
    std::set<std::string> seen;
    for (const auto& choice : d.choices) {
        const bool offered = std::any_of(c.options.begin(), c.options.end(),
                                         [&](const DecisionOption& o) { return o.id == choice; });
        if (!offered) throw Error("closed_world_violation", "'" + choice + "' was not offered");
        if (!seen.insert(choice).second) throw Error("closed_world_violation", "repeated choice");
    }
}

AdvisorDecision ScriptedAdvisor::decide(const DecisionContext& c) {
    if (c.options.empty()) throw Error("empty_options", "no options to choose from");
    const std::size_t limit = static_cast<std::size_t>(std::max(1, c.max_choices));
    const bool valued = std::all_of(c.options.begin(), c.options.end(),
                                    [](const DecisionOption& o) { return o.value.has_value(); });
    AdvisorDecision d;
    if (valued) {
        std::vector<std::size_t> order(c.options.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return *c.options[a].value > *c.options[b].value;
        });
        for (std::size_t i : order) {
            if (d.choices.size() >= limit) break;
            if (c.allow_empty && *c.options[i].value <= 0) break;
            d.choices.push_back(c.options[i].id);
        }
        d.rationale = "highest estimated value";
        return d;
    }
    std::vector<std::size_t> order;
    if (c.kind == DecisionKind::production) {
        for (const auto& tag : production_priority(observation_at_war(c.observation))) {
            for (std::size_t i = 0; i < c.options.size(); ++i) {
                if (c.options[i].tag == tag) order.push_back(i);
            }
        }
        for (std::size_t i = 0; i < c.options.size(); ++i) {
            if (std::find(order.begin(), order.end(), i) == order.end()) order.push_back(i);
        }
        d.rationale = "production priority table";
    } else {
        for (std::size_t i = 0; i < c.options.size(); ++i) order.push_back(i);
        d.rationale = "first listed option";
    }
    for (std::size_t i : order) {
        if (d.choices.size() >= limit) break;
        d.choices.push_back(c.options[i].id);
    }
    return d;
}

AdvisorDecision RecordingAdvisor::decide(const DecisionContext& context) {
    AdvisorDecision d = inner_->decide(context);
    std::lock_guard lock(mutex_);
    log_.push_back({{"kind", decision_kind_name(context.kind)},
                    {"turn", context.turn},
                    {"civ", context.civ},
                    {"decision", encode_decision(d)}});
    return d;
}

json RecordingAdvisor::log() const {
    std::lock_guard lock(mutex_);
    return log_;
}

AdvisorDecision ReplayAdvisor::decide(const DecisionContext& context) {
    if (!log_.is_array() || next_ >= log_.size()) {
        throw Error("replay_mismatch", "replay log exhausted");
    }
    const json& entry = log_[next_];
    if (entry.value("kind", "") != decision_kind_name(context.kind)) {
        throw Error("replay_mismatch", "expected a " + entry.value("kind", std::string("?")) +
                                           " decision, got " + decision_kind_name(context.kind));
    }
    ++next_;
    return decode_decision(entry.at("decision"));
}

AdvisorDecision checked_decide(Advisor& advisor, const DecisionContext& context) {
    AdvisorDecision d = advisor.decide(context);
    check_closed_world(context, d);
    return d;
}

} // namespace microciv
