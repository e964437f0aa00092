#pragma once

#include "microciv/actions.hpp"
#include "microciv/ruleset.hpp"
#include "microciv/state.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace microciv {

struct GameConfig {
    int width = 20;
    int height = 16;
    std::vector<std::string> civs;
    std::uint64_t seed = 0;
    std::string game_id; // defaults to a seed-derived id
};

struct TurnOptions {
    // Treaty countdowns still tick but never expire, so diplomacy flags stay
    // fixed for the duration (used by simulator rollouts).
    bool freeze_diplomacy = false;
};

struct CombatReport {
    UnitId attacker{};
    CombatTarget defender;
    int damage_to_defender = 0;
    int damage_to_attacker = 0;
    double attacker_strength = 0;
    double defender_strength = 0;
    bool defender_destroyed = false;
    bool attacker_destroyed = false;
    bool city_captured = false;
};

struct Illegality {
    std::string code;
    std::string message;
};

struct StepResult {
    GameState state;
    std::vector<Event> events;
};

// Damage dealt by strength `attacker` against strength `defender`.
int combat_damage(double attacker, double defender, const GameRules& rules);
// Food needed for a city of the given population to grow.
int growth_threshold(int population, const GameRules& rules);

class Engine {
public:
    explicit Engine(const Ruleset& ruleset) : ruleset_(&ruleset) {}

    const Ruleset& ruleset() const noexcept { return *ruleset_; }

    // Throws ConfigError: too_few_civs, unknown_civ, duplicate_civ,
    // insufficient_area, too_many_civs, insufficient_land.
    GameState new_game(const GameConfig& config) const;

    // nullopt when the action is legal.
    std::optional<Illegality> check(const GameState& state, const EngineAction& action) const;
    // Applies a legal action in place. Throws IllegalAction (state untouched).
    std::vector<Event> apply(GameState& state, const EngineAction& action) const;
    CombatReport resolve_combat(GameState& state, UnitId attacker, CombatTarget defender,
                                std::vector<Event>* events = nullptr) const;
    std::vector<Event> end_turn(GameState& state, const TurnOptions& options = {}) const;

    // Every legal action for the civ this turn, except parametric ones whose
    // argument space is open (trades, chat, closeness adjustments, peace
    // offers with terms).
    std::vector<EngineAction> legal_actions(const GameState& state, CivId civ) const;
    std::optional<CivId> check_victory(const GameState& state) const;

    // Throws SaveError(invariant_violation) describing the first broken
    // invariant.
    void validate(const GameState& state) const;

    // Re-derives explored flags and the per-civ transient bookkeeping.
    void refresh_exploration(GameState& state) const;

private:
    const Ruleset* ruleset_;
};

// Value-semantics wrappers.
StepResult apply_action(const Ruleset& ruleset, GameState state, const EngineAction& action);
StepResult end_turn(const Ruleset& ruleset, GameState state, const TurnOptions& options = {});

} // namespace microciv
