#pragma once

#include "microciv/ruleset.hpp"
#include "microciv/state.hpp"

namespace microciv {

inline constexpr int kBaselineMapTiles = 1276;

// How a unit contributes to military strength: its combat strength, or 1
// per unit (sensitivity runs).
enum class StrengthMode { strength, count };

struct ScoreBreakdown {
    // Score dimensions: total, population, crops, production, gold,
    // territory, military, happiness, tech, culture.
    double S = 0;
    int N = 0;
    int C = 0;
    int P = 0;
    int G = 0;
    int T = 0;
    double F = 0;
    int H = 0;
    int W = 0;
    int A = 0;

    // Components of the total score.
    int c = 0;       // cities
    int p = 0;       // population
    int t_owned = 0; // owned tiles
    int w = 0;       // wonders
    int s = 0;       // techs
    int f = 0;       // future techs
    double k = 0;    // military strength
    double m = 1;    // map size factor
    int g = 0;       // gold

    bool operator==(const ScoreBreakdown&) const = default;
};

// Linear map size factor, 1.0 at the baseline tile count. Throws Error
// (invalid_argument) for a nonpositive count.
double map_size_factor(int map_tile_count);
// min(sqrt(g) / 100, 2). Throws Error (invalid_argument) for negative gold.
double gold_bonus(int gold);
double military_strength(const Civilization& civ, const Ruleset& ruleset,
                         StrengthMode mode = StrengthMode::strength);
// The weighted total recomputed from the components alone.
double total_score(const ScoreBreakdown& b);
ScoreBreakdown civ_score(const Civilization& civ, const GameState& state, const Ruleset& ruleset,
                         StrengthMode mode = StrengthMode::strength);

} // namespace microciv
