#pragma once

#include "microciv/codec.hpp"
#include "microciv/ruleset.hpp"
#include "microciv/state.hpp"

#include <string>
#include <string_view>

namespace microciv {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kObservedNotifications = 10;
inline constexpr std::size_t kObservedEvents = 20;

// Canonical save bytes: sorted keys, id-ordered lists, no whitespace.
std::string save_game(const GameState& state);

// Parses, checks the schema version and ruleset hash, then validates every
// engine invariant. Throws SaveError with code parse_error, schema_error,
// version_mismatch, ruleset_mismatch or invariant_violation.
GameState load_game(std::string_view bytes, const Ruleset& ruleset);

// What one civilization may know about the game.
struct Observation {
    CivId viewer{};
    int turn = 0;
    json body;

    bool operator==(const Observation&) const = default;
};

// Throws Error(unknown_civ) for an unknown viewer.
Observation extract_observation(const GameState& state, const Ruleset& ruleset, CivId viewer);

} // namespace microciv
