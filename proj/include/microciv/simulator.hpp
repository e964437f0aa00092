#pragma once

#include "microciv/actions.hpp"
#include "microciv/engine.hpp"
#include "microciv/ruleset.hpp"
#include "microciv/scoring.hpp"
#include "microciv/state.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace microciv {

inline constexpr int kMaxRolloutTurns = 500;

struct RolloutConfig {
    int turns = 10;
    bool freeze_diplomacy = false;
    bool disable_workers = false;
    // Replaces the state's RNG seed before simulating when set.
    std::optional<std::uint64_t> seed;
};

struct ScoreDelta {
    double S = 0;
    int N = 0, C = 0, P = 0, G = 0, T = 0;
    double F = 0;
    int H = 0, W = 0, A = 0;
};

ScoreDelta score_delta(const ScoreBreakdown& before, const ScoreBreakdown& after);

struct RolloutResult {
    // Set when the branch's decision was illegal; the other fields are then empty.
    std::optional<Illegality> error;
    GameState final_state;
    std::string final_save;
    std::vector<ScoreBreakdown> start; // index == CivId
    std::vector<ScoreBreakdown> end;
    std::vector<ScoreDelta> deltas;
    // Diplomacy intents the baseline AI formed but did not act on.
    std::vector<EngineAction> suppressed;
    int turns_simulated = 0;
    double elapsed_seconds = 0;
};

// A branch decision; nullopt is the no-op.
using Decision = std::optional<EngineAction>;

// Clones a state and advances it under the baseline AI controlling every civ.
class Simulator {
public:
    explicit Simulator(const Ruleset& ruleset) : ruleset_(&ruleset) {}

    const Ruleset& ruleset() const noexcept { return *ruleset_; }

    // Throws ConfigError(invalid_turns) unless 1 <= turns <= 500.
    RolloutResult rollout(const GameState& state, const RolloutConfig& config) const;
    // Loads the save first; load errors propagate.
    RolloutResult rollout(std::string_view save, const RolloutConfig& config) const;

    // One result per decision, in input order; branches run concurrently.
    // Deltas are measured from the shared, pre-decision start.
    std::vector<RolloutResult> compare_decisions(const GameState& state,
                                                 const std::vector<Decision>& decisions,
                                                 const RolloutConfig& config) const;
    std::vector<RolloutResult> compare_decisions(std::string_view save,
                                                 const std::vector<Decision>& decisions,
                                                 const RolloutConfig& config) const;

private:
    RolloutResult run(GameState state, const std::vector<ScoreBreakdown>& start,
                      const RolloutConfig& config) const;

    const Ruleset* ruleset_;
};

} // namespace microciv
