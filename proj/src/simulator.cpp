#include "microciv/simulator.hpp"

#include "microciv/error.hpp"
#include "microciv/persistence.hpp"
#include "microciv/policy.hpp"

#include <chrono>
#include <future>

namespace microciv {

namespace {

std::vector<ScoreBreakdown> scores_of(const GameState& s, const Ruleset& rs) {
    std::vector<ScoreBreakdown> out;
    out.reserve(s.civs.size());
    for (const auto& civ : s.civs) out.push_back(civ_score(civ, s, rs));
    return out;
}

void check_config(const RolloutConfig& config) {
    if (config.turns < 1 || config.turns > kMaxRolloutTurns) {
        throw ConfigError("invalid_turns", "rollout turns must lie in [1, 500], got " +
                                               std::to_string(config.turns));
    }
}

} // namespace

ScoreDelta score_delta(const ScoreBreakdown& a, const ScoreBreakdown& b) {
    return {b.S - a.S, b.N - a.N, b.C - a.C, b.P - a.P, b.G - a.G, b.T - a.T,
            b.F - a.F, b.H - a.H, b.W - a.W, b.A - a.A};
}

RolloutResult Simulator::run(GameState s, const std::vector<ScoreBreakdown>& start,
                             const RolloutConfig& config) const {
    const auto t0 = std::chrono::steady_clock::now();
    const Ruleset& rs = *ruleset_;
    const Engine engine(rs);
    AspectSwitches switches;
    switches.diplomacy = !config.freeze_diplomacy;
    switches.workers = !config.disable_workers;
    TurnOptions options;
    options.freeze_diplomacy = config.freeze_diplomacy;

    RolloutResult r;
    for (int t = 0; t < config.turns; ++t) {
        if (engine.check_victory(s)) break;
        for (std::size_t i = 0; i < s.civs.size(); ++i) {
            const CivId civ{static_cast<int>(i)};
            if (!s.civ(civ).alive()) continue;
            BaselineTurn plan = baseline_turn_detailed(rs, s, civ, switches, config.freeze_diplomacy);
            for (const auto& a : plan.actions) {
                if (!engine.check(s, a)) engine.apply(s, a);
            }
            for (auto& a : plan.suppressed) r.suppressed.push_back(std::move(a));
        }
        engine.end_turn(s, options);
        ++r.turns_simulated;
    }
    r.start = start;
    r.end = scores_of(s, rs);
    for (std::size_t i = 0; i < r.end.size(); ++i) r.deltas.push_back(score_delta(r.start[i], r.end[i]));
    r.final_save = save_game(s);
    r.final_state = std::move(s);
    r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

RolloutResult Simulator::rollout(const GameState& state, const RolloutConfig& config) const {
    check_config(config);
    GameState s = state;
    if (config.seed) s.rng.reseed(*config.seed);
    return run(std::move(s), scores_of(state, *ruleset_), config);
}

RolloutResult Simulator::rollout(std::string_view save, const RolloutConfig& config) const {
    return rollout(load_game(save, *ruleset_), config);
}

std::vector<RolloutResult> Simulator::compare_decisions(const GameState& state,
                                                        const std::vector<Decision>& decisions,
                                                        const RolloutConfig& config) const {
    check_config(config);
    const std::vector<ScoreBreakdown> start = scores_of(state, *ruleset_);
    const Engine engine(*ruleset_);
    std::vector<std::future<RolloutResult>> branches;
    branches.reserve(decisions.size());
    for (const auto& decision : decisions) {
        branches.push_back(std::async(std::launch::async, [&, decision]() {
            GameState s = state;
            if (config.seed) s.rng.reseed(*config.seed);
            if (decision) {
                if (auto e = engine.check(s, *decision)) {
                    RolloutResult failed;
                    failed.error = *e;
                    return failed;
                }
                engine.apply(s, *decision);
            }
            return run(std::move(s), start, config);
        }));
    }
    std::vector<RolloutResult> out;
    out.reserve(branches.size());
    for (auto& b : branches) out.push_back(b.get());
    return out;
}

std::vector<RolloutResult> Simulator::compare_decisions(std::string_view save,
                                                        const std::vector<Decision>& decisions,
                                                        const RolloutConfig& config) const {
    return compare_decisions(load_game(save, *ruleset_), decisions, config);
}

} // namespace microciv
