#include "microciv/hex.hpp"

#include <algorithm>
#include <cstdlib>

namespace microciv {

namespace {

struct Cube {
    int q, r, s;
};

Cube to_cube(Coord c) noexcept {
    const int q = c.x - (c.y - (c.y & 1)) / 2;
    const int r = c.y;
    return {q, r, -q - r};
}

} // namespace

int hex_distance(Coord a, Coord b) noexcept {
    const Cube ca = to_cube(a);
    const Cube cb = to_cube(b);
    return std::max({std::abs(ca.q - cb.q), std::abs(ca.r - cb.r), std::abs(ca.s - cb.s)});
}

std::array<Coord, 6> hex_neighbors(Coord c) noexcept {
    if ((c.y & 1) == 0) {
        return {{{c.x + 1, c.y}, {c.x, c.y - 1}, {c.x - 1, c.y - 1},
                 {c.x - 1, c.y}, {c.x - 1, c.y + 1}, {c.x, c.y + 1}}};
    }
    return {{{c.x + 1, c.y}, {c.x + 1, c.y - 1}, {c.x, c.y - 1},
             {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x + 1, c.y + 1}}};
}

} // namespace microciv
