#include "microciv/scoring.hpp"

#include "microciv/error.hpp"
#include "microciv/queries.hpp"

#include <algorithm>
#include <cmath>

namespace microciv {

double map_size_factor(int map_tile_count) {
    if (map_tile_count <= 0) {
        throw Error("invalid_argument", "map tile count must be positive");
    }
    return static_cast<double>(map_tile_count) / kBaselineMapTiles;
}

double gold_bonus(int gold) {
    if (gold < 0) {
        throw Error("invalid_argument", "gold must be >= 0");
    }
    return std::min(std::sqrt(static_cast<double>(gold)) / 100.0, 2.0);
}

double military_strength(const Civilization& civ, const Ruleset& ruleset, StrengthMode mode) {
    double sum = 0;
    for (const auto& u : civ.units) {
        const UnitTypeDef* type = ruleset.unit_type(u.type);
        if (!type) continue;
        const double value = mode == StrengthMode::count ? 1.0 : type->strength;
        sum += type->is_water ? value / 2 : value;
    }
    return sum * std::min(gold_bonus(std::max(civ.gold, 0)), 2.0);
}

double total_score(const ScoreBreakdown& b) {
    return b.c * 10 * b.m + b.p * 3 * b.m + b.t_owned * b.m + b.w * 40 * b.m + b.s * 4 +
           b.f * 10 + b.k * 0.1;
}

ScoreBreakdown civ_score(const Civilization& civ, const GameState& state, const Ruleset& ruleset,
                         StrengthMode mode) {
    ScoreBreakdown b;
    b.m = map_size_factor(state.map.tile_count());
    b.c = static_cast<int>(civ.cities.size());
    for (const auto& city : civ.cities) {
        b.p += city.population;
        for (const auto& building : city.buildings) {
            const BuildingDef* def = ruleset.building(building);
            if (def && def->is_wonder) ++b.w;
        }
        const Yields y = city_yields(ruleset, state, city);
        b.C += y.food;
        b.P += y.production;
    }
    b.t_owned = owned_tile_count(state, civ.id);
    b.s = static_cast<int>(civ.techs.size());
    for (const auto& t : civ.techs) {
        const TechDef* def = ruleset.tech(t);
        if (def && def->future) ++b.f;
    }
    b.g = civ.gold;
    b.k = military_strength(civ, ruleset, mode);

    b.N = b.p;
    b.G = b.g;
    b.T = b.t_owned;
    b.F = b.k;
    b.W = b.s;
    b.H = 0;
    b.A = 0;
    b.S = total_score(b);
    return b;
}

} // namespace microciv
