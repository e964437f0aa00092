#pragma once

#include "microciv/engine.hpp"
#include "microciv/ruleset.hpp"
#include "microciv/state.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace microciv::test {

const Ruleset& mini();
Engine mini_engine();

const std::vector<std::string>& four_civs();
GameState four_civ_game(std::uint64_t seed = 7, int width = 20, int height = 16);

// Hand-built scenario: every tile grassland, no units or cities, all pairs at
// peace, starting gold as per the rules.
GameState flat_state(const Ruleset& rs, int width, int height,
                     const std::vector<std::string>& civs);

Unit& add_unit(const Ruleset& rs, GameState& s, CivId civ, const std::string& type, Coord pos);
// Founds a city through the engine (settler + found_city) and sets its size.
City& add_city(const Ruleset& rs, GameState& s, CivId civ, Coord pos, int population = 1);

std::string read_file(const std::string& path);

// Plays `steps` random legal actions (plus periodic wars, chat and turn ends)
// from a fresh four-civ game; used to reach varied mid-game states.
GameState random_game(std::uint64_t seed, int steps, int width = 16, int height = 16);

} // namespace microciv::test
