#pragma once

#include <array>
#include <compare>

namespace microciv {

// Offset coordinates on a pointy-top hex grid, odd rows shifted right.
struct Coord {
    int x = 0;
    int y = 0;

    auto operator<=>(const Coord&) const = default;
};

int hex_distance(Coord a, Coord b) noexcept;

// The six neighbours in a fixed order; some may lie off the map.
std::array<Coord, 6> hex_neighbors(Coord c) noexcept;

} // namespace microciv
