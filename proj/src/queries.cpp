#include "microciv/queries.hpp"

#include <algorithm>
#include <queue>

namespace microciv {

namespace {

template <typename State, typename Fn>
auto* find_in_civs(State& state, Fn&& fn) {
    for (auto& civ : state.civs) {
        if (auto* found = fn(civ)) {
            return found;
        }
    }
    return static_cast<decltype(fn(state.civs.front()))>(nullptr);
}

template <typename Vec, typename Id>
auto* find_by_id(Vec& items, Id id) {
    auto it = std::lower_bound(items.begin(), items.end(), id,
                               [](const auto& item, Id key) { return idx(item.id) < idx(key); });
    return (it != items.end() && it->id == id) ? &*it : nullptr;
}

} // namespace

Unit* find_unit(GameState& state, UnitId id) {
    return find_in_civs(state, [&](Civilization& c) { return find_by_id(c.units, id); });
}

const Unit* find_unit(const GameState& state, UnitId id) {
    return find_in_civs(state, [&](const Civilization& c) { return find_by_id(c.units, id); });
}

City* find_city(GameState& state, CityId id) {
    return find_in_civs(state, [&](Civilization& c) { return find_by_id(c.cities, id); });
}

const City* find_city(const GameState& state, CityId id) {
    return find_in_civs(state, [&](const Civilization& c) { return find_by_id(c.cities, id); });
}

const City* city_at(const GameState& state, Coord pos) {
    for (const auto& civ : state.civs) {
        for (const auto& city : civ.cities) {
            if (city.pos == pos) {
                return &city;
            }
        }
    }
    return nullptr;
}

const City* capital_of(const Civilization& civ) {
    for (const auto& city : civ.cities) {
        if (city.is_capital) {
            return &city;
        }
    }
    return nullptr;
}

bool at_war(const GameState& state, CivId a, CivId b) {
    return a != b && state.diplomacy.has(a, b, Treaty::war);
}

bool at_peace(const GameState& state, CivId a, CivId b) {
    return a != b && state.diplomacy.has(a, b, Treaty::peace);
}

bool item_unlocked(const Ruleset& ruleset, const Civilization& civ, std::string_view item) {
    if (!ruleset.is_tech_gated(item)) {
        return true;
    }
    for (const auto& tech_id : civ.techs) {
        const TechDef* tech = ruleset.tech(tech_id);
        if (tech && std::find(tech->unlocks.begin(), tech->unlocks.end(), item) !=
                        tech->unlocks.end()) {
            return true;
        }
    }
    return false;
}

bool wonder_built_anywhere(const GameState& state, std::string_view wonder) {
    for (const auto& civ : state.civs) {
        for (const auto& city : civ.cities) {
            if (city.buildings.count(std::string(wonder))) {
                return true;
            }
        }
    }
    return false;
}

bool is_water(const Ruleset& ruleset, const Tile& tile) {
    const TerrainDef* t = ruleset.terrain(tile.terrain);
    return t && t->is_water;
}

bool is_passable_land(const Ruleset& ruleset, const Tile& tile) {
    const TerrainDef* t = ruleset.terrain(tile.terrain);
    return t && !t->is_water && !t->impassable;
}

int movement_cost(const Ruleset& ruleset, const Tile& tile) {
    int cost = 1;
    if (const TerrainDef* t = ruleset.terrain(tile.terrain)) {
        cost = t->movement_cost;
    }
    if (const FeatureDef* f = tile.feature.empty() ? nullptr : ruleset.feature(tile.feature)) {
        cost += f->movement_cost_extra;
    }
    return std::max(cost, 1);
}

bool is_coastal(const Ruleset& ruleset, const GameState& state, Coord pos) {
    for (Coord n : hex_neighbors(pos)) {
        if (state.map.contains(n) && is_water(ruleset, state.map.at(n))) {
            return true;
        }
    }
    return false;
}

Yields tile_yields(const Ruleset& ruleset, const Tile& tile) {
    Yields y;
    if (const TerrainDef* t = ruleset.terrain(tile.terrain)) {
        y += t->yields;
    }
    if (!tile.feature.empty()) {
        if (const FeatureDef* f = ruleset.feature(tile.feature)) y += f->yields;
    }
    if (!tile.resource.empty()) {
        if (const ResourceDef* r = ruleset.resource(tile.resource)) y += r->yields;
    }
    if (!tile.improvement.empty()) {
        if (const ImprovementDef* i = ruleset.improvement(tile.improvement)) {
            for (int n = 0; n < tile.improvement_count; ++n) y += i->yields;
        }
    }
    y.food = std::max(y.food, 0);
    y.production = std::max(y.production, 0);
    y.gold = std::max(y.gold, 0);
    y.science = std::max(y.science, 0);
    return y;
}

Yields city_yields(const Ruleset& ruleset, const GameState& state, const City& city) {
    Yields y = tile_yields(ruleset, state.map.at(city.pos));
    for (Coord c : city.worked_tiles) {
        y += tile_yields(ruleset, state.map.at(c));
    }
    y += ruleset.rules.city_center_bonus;
    for (const auto& b : city.buildings) {
        if (const BuildingDef* def = ruleset.building(b)) {
            y += def->yields;
        }
    }
    y.science += city.population;
    if (city.is_capital) {
        int luxuries = 0;
        for (const auto& [res, qty] : civ_resources(state, city.owner)) {
            const ResourceDef* def = ruleset.resource(res);
            if (def && def->kind == ResourceKind::luxury && qty > 0) {
                luxuries += qty;
            }
        }
        y.food += luxuries * ruleset.rules.luxury_food_per_copy;
    }
    return y;
}

int civ_science(const Ruleset& ruleset, const GameState& state, const Civilization& civ) {
    int science = 0;
    for (const auto& city : civ.cities) {
        science += city_yields(ruleset, state, city).science;
    }
    bool agreement = false;
    for (const auto& other : state.civs) {
        if (other.id != civ.id && state.diplomacy.has(civ.id, other.id, Treaty::research_agreement)) {
            agreement = true;
        }
    }
    if (agreement) {
        science += science * ruleset.rules.research_agreement_bonus_pct / 100;
    }
    return science;
}

int civ_maintenance(const Ruleset& ruleset, const Civilization& civ) {
    int total = 0;
    for (const auto& city : civ.cities) {
        for (const auto& b : city.buildings) {
            if (const BuildingDef* def = ruleset.building(b)) total += def->maintenance;
        }
    }
    for (const auto& unit : civ.units) {
        if (const UnitTypeDef* def = ruleset.unit_type(unit.type)) total += def->maintenance;
    }
    return total;
}

int civ_gold_income(const Ruleset& ruleset, const GameState& state, const Civilization& civ) {
    int income = 0;
    for (const auto& city : civ.cities) {
        income += city_yields(ruleset, state, city).gold;
    }
    return income;
}

std::map<std::string, int> civ_resources(const GameState& state, CivId civ) {
    std::map<std::string, int> held;
    for (const auto& tile : state.map.tiles()) {
        if (tile.owner == civ && !tile.resource.empty()) {
            ++held[tile.resource];
        }
    }
    for (const auto& trade : state.resource_trades) {
        if (trade.from == civ) held[trade.resource] -= trade.quantity;
        if (trade.to == civ) held[trade.resource] += trade.quantity;
    }
    return held;
}

int owned_tile_count(const GameState& state, CivId civ) {
    return static_cast<int>(std::count_if(state.map.tiles().begin(), state.map.tiles().end(),
                                           [&](const Tile& t) { return t.owner == civ; }));
}

std::vector<bool> visible_tiles(const Ruleset& ruleset, const GameState& state, CivId civ) {
    const HexMap& map = state.map;
    std::vector<bool> visible(map.tile_count(), false);
    const int radius = ruleset.rules.sight_radius;
    auto reveal = [&](Coord center) {
        for (int y = center.y - radius; y <= center.y + radius; ++y) {
            for (int x = center.x - radius - 1; x <= center.x + radius + 1; ++x) {
                Coord c{x, y};
                if (map.contains(c) && hex_distance(center, c) <= radius) {
                    visible[map.index_of(c)] = true;
                }
            }
        }
    };
    const Civilization& owner = state.civ(civ);
    for (const auto& unit : owner.units) reveal(unit.pos);
    for (const auto& city : owner.cities) reveal(city.pos);
    for (int i = 0; i < map.tile_count(); ++i) {
        if (map.tiles()[i].owner == civ) visible[i] = true;
    }
    return visible;
}

bool unit_can_enter(const Ruleset& ruleset, const GameState& state, const Unit& unit,
                    Coord pos) {
    if (!state.map.contains(pos)) {
        return false;
    }
    const Tile& tile = state.map.at(pos);
    const UnitTypeDef* type = ruleset.unit_type(unit.type);
    const bool water_unit = type && type->is_water;
    if (water_unit) {
        const City* c = city_at(state, pos);
        if (!is_water(ruleset, tile) && !(c && c->owner == unit.owner)) {
            return false;
        }
    } else if (!is_passable_land(ruleset, tile)) {
        return false;
    }
    if (tile.owner && *tile.owner != unit.owner && !at_war(state, unit.owner, *tile.owner) &&
        !state.diplomacy.has(unit.owner, *tile.owner, Treaty::open_borders)) {
        return false;
    }
    if (const City* c = city_at(state, pos); c && c->owner != unit.owner) {
        return false;
    }
    for (const auto& civ : state.civs) {
        if (civ.id == unit.owner) continue;
        for (const auto& other : civ.units) {
            if (other.pos == pos) return false;
        }
    }
    return true;
}

std::vector<std::pair<Coord, int>> reachable_tiles(const Ruleset& ruleset,
                                                   const GameState& state, const Unit& unit) {
    const HexMap& map = state.map;
    std::vector<int> best(map.tile_count(), -1);
    using Entry = std::pair<int, int>; // moves left, tile index
    std::priority_queue<Entry> frontier;
    const int start = map.index_of(unit.pos);
    best[start] = unit.moves_left;
    frontier.emplace(unit.moves_left, start);
    while (!frontier.empty()) {
        auto [moves, at] = frontier.top();
        frontier.pop();
        if (moves < best[at] || moves <= 0) {
            continue;
        }
        for (Coord n : hex_neighbors(map.coord_of(at))) {
            if (!map.contains(n) || !unit_can_enter(ruleset, state, unit, n)) {
                continue;
            }
            const int ni = map.index_of(n);
            const int left = std::max(0, moves - movement_cost(ruleset, map.at(n)));
            if (left > best[ni]) {
                best[ni] = left;
                frontier.emplace(left, ni);
            }
        }
    }
    std::vector<std::pair<Coord, int>> out;
    for (int i = 0; i < map.tile_count(); ++i) {
        if (i != start && best[i] >= 0) {
            out.emplace_back(map.coord_of(i), best[i]);
        }
    }
    return out;
}

int distance_between_civs(const GameState& state, CivId a, CivId b) {
    int best = -1;
    for (const auto& ca : state.civ(a).cities) {
        for (const auto& cb : state.civ(b).cities) {
            const int d = hex_distance(ca.pos, cb.pos);
            if (best < 0 || d < best) best = d;
        }
    }
    return best;
}

} // namespace microciv
