#pragma once

#include "microciv/ruleset.hpp"
#include "microciv/state.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace microciv {

// Read-only helpers over a GameState. None of these mutate or consume RNG.

Unit* find_unit(GameState& state, UnitId id);
const Unit* find_unit(const GameState& state, UnitId id);
City* find_city(GameState& state, CityId id);
const City* find_city(const GameState& state, CityId id);
const City* city_at(const GameState& state, Coord pos);
const City* capital_of(const Civilization& civ);

bool at_war(const GameState& state, CivId a, CivId b);
bool at_peace(const GameState& state, CivId a, CivId b);

// Items (buildings, unit types) the civ may build, honouring tech gating.
bool item_unlocked(const Ruleset& ruleset, const Civilization& civ, std::string_view item);
bool wonder_built_anywhere(const GameState& state, std::string_view wonder);

bool is_water(const Ruleset& ruleset, const Tile& tile);
bool is_passable_land(const Ruleset& ruleset, const Tile& tile);
int movement_cost(const Ruleset& ruleset, const Tile& tile);
bool is_coastal(const Ruleset& ruleset, const GameState& state, Coord pos);

Yields tile_yields(const Ruleset& ruleset, const Tile& tile);
// Total per-turn city output: center tile, worked tiles, center bonus,
// buildings, the population science term and (capital only) luxury food.
Yields city_yields(const Ruleset& ruleset, const GameState& state, const City& city);
int civ_science(const Ruleset& ruleset, const GameState& state, const Civilization& civ);
int civ_maintenance(const Ruleset& ruleset, const Civilization& civ);
int civ_gold_income(const Ruleset& ruleset, const GameState& state, const Civilization& civ);

// Resource quantities held: owned resource tiles plus incoming trades minus
// outgoing ones.
std::map<std::string, int> civ_resources(const GameState& state, CivId civ);
int owned_tile_count(const GameState& state, CivId civ);

// Tiles currently in line of sight: within the sight radius of an own unit
// or city, plus every owned tile. Indexed by map tile index.
std::vector<bool> visible_tiles(const Ruleset& ruleset, const GameState& state, CivId civ);

bool unit_can_enter(const Ruleset& ruleset, const GameState& state, const Unit& unit,
                    Coord pos);
// Reachable destinations this turn with the moves left on arrival, in map
// index order. A unit may always enter a tile while it has moves left.
std::vector<std::pair<Coord, int>> reachable_tiles(const Ruleset& ruleset,
                                                   const GameState& state, const Unit& unit);

// Hex distance to the nearest foreign city, or -1 when there is none.
int distance_between_civs(const GameState& state, CivId a, CivId b);

} // namespace microciv
