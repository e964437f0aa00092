#include "microciv/game.hpp"

#include "microciv/error.hpp"
#include "microciv/queries.hpp"

#include <algorithm>

namespace microciv {

namespace {

constexpr int kLuxuryValueLacking = 20;
constexpr int kLuxuryValueSpare = 8;

bool priced_trade(const SkillCall& call) {
    return call.skill == Skill::ProposeTrade && (call.trade->give.gold > 0 || call.trade->receive.gold > 0);
}

} // namespace

SeatController SeatController::baseline_seat(std::string variant) {
    SeatController s;
    s.variant = std::move(variant);
    return s;
}

SeatController SeatController::agent_seat(std::shared_ptr<Advisor> advisor, std::string variant,
                                          bool use_simulator) {
    SeatController s;
    s.kind = Kind::agent;
    s.advisor = std::move(advisor);
    s.variant = std::move(variant);
    s.use_simulator = use_simulator;
    return s;
}

GameRunner::GameRunner(const Ruleset& ruleset, RunnerConfig config, GameHooks hooks)
    : GameRunner(ruleset, config, Engine(ruleset).new_game(config.game), std::move(hooks)) {}

GameRunner::GameRunner(const Ruleset& ruleset, RunnerConfig config, GameState initial, GameHooks hooks)
    : ruleset_(&ruleset),
      engine_(ruleset),
      config_(std::move(config)),
      hooks_(std::move(hooks)),
      state_(std::move(initial)) {
    if (config_.turn_cap < 1) throw ConfigError("invalid_turn_cap", "turn cap must be >= 1");
    if (config_.seats.size() > state_.civs.size()) {
        throw ConfigError("too_many_seats", "more seats than civilizations");
    }
    agents_.resize(state_.civs.size());
    simulators_.resize(state_.civs.size());
    reflected_upto_.assign(state_.civs.size(), 0);
    for (std::size_t i = 0; i < config_.seats.size(); ++i) {
        const SeatController& seat = config_.seats[i];
        if (seat.kind != SeatController::Kind::agent) continue;
        if (!seat.advisor) throw ConfigError("missing_advisor", "agent seat " + std::to_string(i) + " has no advisor");
        if (seat.use_simulator) simulators_[i] = std::make_unique<Simulator>(ruleset);
        agents_[i] = std::make_unique<CivAgent>(ruleset, CivId{static_cast<int>(i)}, seat.advisor,
                                                config_.agent, nullptr, simulators_[i].get());
        agents_[i]->trajectory().civ = state_.civs[i].name;
        if (hooks_.transcript) agents_[i]->set_transcript(hooks_.transcript);
    }
    start_turn_ = state_.turn;
    winner_ = engine_.check_victory(state_);
    finished_ = winner_.has_value();
}

CivAgent* GameRunner::agent(CivId civ) {
    if (idx(civ) < 0 || idx(civ) >= static_cast<int>(agents_.size())) return nullptr;
    return agents_[idx(civ)].get();
}

void GameRunner::log(const json& record) const {
    if (hooks_.transcript) hooks_.transcript(record);
}

double GameRunner::own_score(CivId civ) const {
    return civ_score(state_.civ(civ), state_, *ruleset_).S;
}

void GameRunner::run() {
    while (!finished_) play_turn();
}

void GameRunner::play_turn() {
    if (finished_) return;
    for (std::size_t i = 0; i < state_.civs.size(); ++i) {
        const CivId civ{static_cast<int>(i)};
        if (state_.civ(civ).alive()) act(civ);
    }
    const int ended = state_.turn;
    engine_.end_turn(state_);
    TurnRecord record;
    record.turn = ended;
    for (const auto& c : state_.civs) record.scores.push_back(civ_score(c, state_, *ruleset_));
    turns_.push_back(std::move(record));
    if (hooks_.on_turn_end) hooks_.on_turn_end(state_);

    winner_ = engine_.check_victory(state_);
    finished_ = winner_.has_value() || state_.turn - start_turn_ >= config_.turn_cap;
    if (config_.reflection_interval > 0 && state_.turn % config_.reflection_interval == 0 && !finished_) {
        reflect(false);
    }
    if (finished_ && config_.reflect_at_end) reflect(true);
}

void GameRunner::act(CivId civ) {
    CivAgent* a = agent(civ);
    if (!a) {
        for (const auto& action : baseline_turn(*ruleset_, state_, civ)) {
            if (!engine_.check(state_, action)) engine_.apply(state_, action);
        }
        return;
    }
    answer_pending(civ);
    if (!state_.civ(civ).alive()) return;

    if (state_.turn % config_.agent.proposal_interval == 0) {
        const ProposalTrace trace = a->propose_skills(state_);
        proposals_.push_back({state_.turn, state_.civ(civ).name, static_cast<int>(trace.dispatched.size())});
        for (const auto& call : trace.dispatched) dispatch(civ, call);
    }

    std::vector<CityId> idle;
    for (const auto& c : state_.civ(civ).cities) {
        if (c.production.empty()) idle.push_back(c.id);
    }
    for (CityId id : idle) {
        const City* city = find_city(state_, id);
        if (!city) continue;
        const auto item = a->choose_production(state_, *city);
        if (!item) continue;
        const SetProduction action{civ, id, *item};
        if (engine_.check(state_, action)) continue;
        engine_.apply(state_, action);
        a->record_step({state_.turn, "ProductionPriority", "build " + *item + " in " + city->name,
                        action, std::nullopt, own_score(civ)});
    }
    if (state_.civ(civ).current_research.empty()) {
        if (const auto tech = a->choose_research(state_)) {
            const SetResearch action{civ, *tech};
            if (!engine_.check(state_, action)) {
                engine_.apply(state_, action);
                a->record_step({state_.turn, "ChooseTechnology", "research " + *tech, action,
                                std::nullopt, own_score(civ)});
            }
        }
    }

    AspectSwitches sw;
    sw.production = false;
    sw.technology = false;
    sw.diplomacy = false;
    for (const auto& action : baseline_turn(*ruleset_, state_, civ, sw)) {
        if (!engine_.check(state_, action)) engine_.apply(state_, action);
    }
}

void GameRunner::dispatch(CivId civ, const SkillCall& call) {
    if (check_skill(engine_, state_, call)) return;
    const double score = own_score(civ);
    if (!needs_response(call.skill)) {
        apply_skill(engine_, state_, call);
        skills_.push_back({state_.turn, state_.civ(civ).name,
                           call.target ? state_.civ(*call.target).name : std::string(),
                           skill_name(call.skill), "none"});
        agent(civ)->record_step({state_.turn, skill_name(call.skill), describe_skill(call, state_),
                                 skill_actions(call, state_).front(), std::string("executed"), score});
        return;
    }
    const CivId target = *call.target;
    if (agent(target)) {
        pending_[idx(target)].push_back({call, state_.turn, score});
        return;
    }
    const bool agreed = priced_trade(call) ? bargain(call) : baseline_accepts(call);
    settle(call, agreed, state_.turn, score);
}

void GameRunner::answer_pending(CivId civ) {
    auto it = pending_.find(idx(civ));
    if (it == pending_.end()) return;
    std::vector<Pending> queue = std::move(it->second);
    pending_.erase(it);
    CivAgent* a = agent(civ);
    for (const auto& p : queue) {
        const SkillCall& call = p.call;
        if (!state_.civ(call.proposer).alive()) continue;
        bool agreed = false;
        std::string reason;
        if (priced_trade(call)) {
            agreed = !check_skill(engine_, state_, call) && bargain(call);
            reason = agreed ? "deal" : "no_deal";
        } else {
            const SkillResponse r = a->respond_to_skill(state_, call);
            agreed = r.agree;
            reason = r.reason;
        }
        const bool applied = settle(call, agreed, p.turn, p.proposer_score);
        const std::string verdict = applied ? "agreed" : "declined";
        const auto actions = skill_actions(call, state_);
        a->record_step({state_.turn, std::string("Respond") + skill_name(call.skill),
                        "answered " + describe_skill(call, state_) + ": " + verdict,
                        actions.empty() ? std::nullopt : std::optional<EngineAction>(actions.front()),
                        reason, own_score(civ)});
    }
}

bool GameRunner::settle(const SkillCall& call, bool agreed, int proposed_turn, double proposer_score) {
    std::vector<EngineAction> actions;
    if (!check_skill(engine_, state_, call)) actions = skill_actions(call, state_);
    bool applied = false;
    if (agreed && priced_trade(call)) {
        applied = true; // the bargaining step executed the trade
    } else if (agreed && !actions.empty()) {
        apply_skill(engine_, state_, call);
        applied = true;
    }
    const std::string target = state_.civ(*call.target).name;
    skills_.push_back({proposed_turn, state_.civ(call.proposer).name, target, skill_name(call.skill),
                       applied ? "agree" : "disagree"});
    log({{"game_id", state_.game_id}, {"turn", state_.turn}, {"workflow", "skill"},
         {"call", encode_skill(call)}, {"response", applied ? "agree" : "disagree"}});
    if (CivAgent* a = agent(call.proposer)) {
        std::optional<EngineAction> first;
        if (!actions.empty()) first = actions.front();
        a->record_step({proposed_turn, skill_name(call.skill), describe_skill(call, state_), first,
                        std::string(applied ? "agreed by " : "declined by ") + target, proposer_score});
    }
    return applied;
}

bool GameRunner::baseline_accepts(const SkillCall& call) const {
    const CivId me = *call.target;
    const double mine = military_strength(state_.civ(me), *ruleset_);
    const double theirs = military_strength(state_.civ(call.proposer), *ruleset_);
    switch (call.skill) {
    case Skill::SeekPeace:
        return mine < 1.5 * theirs || mine == 0;
    case Skill::DefenseAgreement:
        return state_.diplomacy.at(me, call.proposer).closeness >= 0;
    case Skill::ResearchAgreement:
        return state_.civ(me).gold >= ruleset_->rules.research_agreement_cost + 10;
    case Skill::CommonEnemy:
        return mine >= 0.8 * military_strength(state_.civ(*call.enemy), *ruleset_);
    case Skill::ProposeTrade:
        return true;
    default:
        return false;
    }
}

std::shared_ptr<NegotiationPolicy> GameRunner::negotiation_policy(CivId civ) {
    if (CivAgent* a = agent(civ)) return std::make_shared<AdvisorNegotiationPolicy>(a->advisor_handle());
    return std::make_shared<ConcedingPolicy>();
}

bool GameRunner::bargain(const SkillCall& call) {
    const TradeOffer& offer = *call.trade;
    // The side paying gold is the buyer; the gold amount is the price.
    const bool proposer_buys = offer.give.gold > 0;
    const CivId buyer = proposer_buys ? offer.proposer : offer.target;
    const CivId seller = proposer_buys ? offer.target : offer.proposer;
    const TradeBundle& goods = proposer_buys ? offer.receive : offer.give;
    const int preset = proposer_buys ? offer.give.gold : offer.receive.gold;

    const auto buyer_has = civ_resources(state_, buyer);
    const auto seller_has = civ_resources(state_, seller);
    int buyer_bottom = 0, seller_bottom = 0;
    for (const auto& [res, q] : goods.resources) {
        buyer_bottom += q * (buyer_has.count(res) ? kLuxuryValueSpare : kLuxuryValueLacking);
        auto it = seller_has.find(res);
        seller_bottom += q * (it != seller_has.end() && it->second > q ? kLuxuryValueSpare : kLuxuryValueLacking);
    }
    buyer_bottom = std::min(buyer_bottom, state_.civ(buyer).gold);
    seller_bottom = std::max(seller_bottom, 1);

    NegotiationSession ns;
    ns.buyer = negotiation_policy(buyer);
    ns.seller = negotiation_policy(seller);
    ns.initial_price = preset;
    ns.buyer_bottom = buyer_bottom;
    ns.seller_bottom = seller_bottom;
    const std::uint64_t seed = fnv1a64(state_.game_id) ^ static_cast<std::uint64_t>(state_.turn);
    ns.buyer_reference = market_reference(std::max(1, buyer_bottom), seed);
    ns.seller_reference = market_reference(seller_bottom, seed + 1);
    ns.hi = std::max(1, 10 * std::max(1, preset));
    const NegotiationOutcome out = run_negotiation(ns);

    json transcript = json::array();
    for (const auto& o : out.transcript) {
        transcript.push_back({{"round", o.round}, {"side", side_name(o.side)}, {"price", o.price}});
    }
    log({{"game_id", state_.game_id}, {"turn", state_.turn}, {"workflow", "bargain"},
         {"call", encode_skill(call)}, {"offers", transcript}, {"deal", out.deal}, {"price", out.price}});
    if (!out.deal) return false;
    TradeOffer priced = offer;
    (proposer_buys ? priced.give.gold : priced.receive.gold) = out.price;
    const ExecuteTrade action{priced};
    if (engine_.check(state_, action)) return false;
    engine_.apply(state_, action);
    return true;
}

void GameRunner::reflect(bool at_end) {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        CivAgent* a = agents_[i].get();
        if (!a || (i < config_.seats.size() && !config_.seats[i].reflect)) continue;
        const auto& steps = a->trajectory().steps;
        if (reflected_upto_[i] >= steps.size()) continue;
        Trajectory window;
        window.civ = a->trajectory().civ;
        window.steps.assign(steps.begin() + static_cast<std::ptrdiff_t>(reflected_upto_[i]), steps.end());
        const CivId civ{static_cast<int>(i)};
        window.outcome.final_score = own_score(civ);
        window.outcome.score_delta = window.outcome.final_score - window.steps.front().score;
        if (!at_end) {
            window.outcome.result = "checkpoint";
        } else if (winner_) {
            window.outcome.result = *winner_ == civ ? "victory" : "defeat";
        } else {
            window.outcome.result = state_.civ(civ).alive() ? "turn_cap" : "defeat";
        }
        ReflectionRoles roles{&a->advisor(), &a->advisor(), &a->advisor(), &a->memory(), &a->embedder()};
        const auto entries = reflect_rearview(window, roles, config_.key_actions);
        reflected_upto_[i] = steps.size();
        json texts = json::array();
        for (const auto& e : entries) texts.push_back(e.text);
        log({{"game_id", state_.game_id}, {"turn", state_.turn}, {"civ", window.civ},
             {"workflow", "reflection"}, {"entries", texts}});
    }
}

} // namespace microciv
