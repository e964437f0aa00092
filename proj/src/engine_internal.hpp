#pragma once

#include "microciv/engine.hpp"
#include "microciv/queries.hpp"

#include <string>
#include <vector>

namespace microciv::detail {

// Records an event in the bounded world log and the caller's sink.
void log_event(const Ruleset& ruleset, GameState& state, std::vector<Event>* sink,
               std::string kind, std::vector<CivId> civs, std::string text, bool is_public);
void notify(const Ruleset& ruleset, GameState& state, CivId civ, std::string text);

Unit& spawn_unit(GameState& state, const UnitTypeDef& type, CivId owner, Coord pos);
void remove_unit(GameState& state, UnitId id);

// Claims unowned tiles around `city` within `radius` for its owner.
void claim_tiles(GameState& state, const City& city, int radius);
// Claims the best-yielding unowned tile within the work radius, if any.
void expand_border(const Ruleset& ruleset, GameState& state, const City& city);
void assign_worked_tiles(const Ruleset& ruleset, GameState& state, City& city);

// Removes every unit of a civ that has lost its last city, releases any
// leftover territory and logs the defeat. Returns true when it happened.
bool settle_defeat(const Ruleset& ruleset, GameState& state, CivId civ,
                   std::vector<Event>* sink);

void set_war(const Ruleset& ruleset, GameState& state, CivId a, CivId b,
             std::vector<Event>* sink);
void set_peace(const Ruleset& ruleset, GameState& state, CivId a, CivId b,
               std::vector<Event>* sink);
void sign_treaty(const Ruleset& ruleset, GameState& state, CivId a, CivId b, Treaty t,
                 std::vector<Event>* sink);

// Moves a city (and the tiles it owns) to a new owner, fixing up capitals.
// Units of other civs standing in the city are removed.
void transfer_city(const Ruleset& ruleset, GameState& state, CityId city, CivId new_owner,
                   std::vector<Event>* sink);

// Marks tiles within sight of `pos` as explored by `civ`.
void reveal_around(const Ruleset& ruleset, GameState& state, CivId civ, Coord pos);

std::optional<Illegality> check_attack(const Ruleset& ruleset, const GameState& state,
                                       CivId civ, UnitId attacker, const CombatTarget& target);

std::string next_city_name(const Ruleset& ruleset, const GameState& state,
                           const Civilization& civ);

} // namespace microciv::detail
