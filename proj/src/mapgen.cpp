#include "engine_internal.hpp"
#include "microciv/error.hpp"

#include <algorithm>
#include <set>

namespace microciv {

namespace {

constexpr int kMinTilesPerCiv = 16;
constexpr std::size_t kMaxCivs = 32; // width of Tile::explored_by

const TerrainDef* first_water(const Ruleset& rs) {
    for (const auto& t : rs.terrains) {
        if (t.is_water) return &t;
    }
    return nullptr;
}

void generate_terrain(const Ruleset& rs, GameState& s) {
    HexMap& map = s.map;
    int total_weight = 0;
    for (const auto& t : rs.terrains) total_weight += std::max(t.frequency, 0);
    if (total_weight <= 0) {
        throw ConfigError("invalid_ruleset", "terrain frequencies sum to zero");
    }
    const TerrainDef* water = first_water(rs);
    for (int i = 0; i < map.tile_count(); ++i) {
        const Coord c = map.coord_of(i);
        const bool edge = c.x == 0 || c.y == 0 || c.x == map.width() - 1 || c.y == map.height() - 1;
        Tile& tile = map.tiles()[i];
        if (edge && water && s.rng.uniform_int("mapgen", 0, 99) < rs.rules.edge_water_pct) {
            tile.terrain = water->id;
        } else {
            int pick = s.rng.uniform_int("mapgen", 0, total_weight - 1);
            for (const auto& t : rs.terrains) {
                pick -= std::max(t.frequency, 0);
                if (pick < 0) {
                    tile.terrain = t.id;
                    break;
                }
            }
        }
        for (const auto& f : rs.features) {
            if (std::find(f.terrains.begin(), f.terrains.end(), tile.terrain) == f.terrains.end()) {
                continue;
            }
            if (s.rng.uniform_int("mapgen", 0, 99) < f.frequency) {
                tile.feature = f.id;
                break;
            }
        }
        if (s.rng.uniform_int("mapgen", 0, 99) < rs.rules.resource_density_pct) {
            std::vector<const ResourceDef*> eligible;
            for (const auto& r : rs.resources) {
                if (std::find(r.terrains.begin(), r.terrains.end(), tile.terrain) !=
                    r.terrains.end()) {
                    eligible.push_back(&r);
                }
            }
            if (!eligible.empty()) {
                const auto k = s.rng.uniform_int("mapgen", 0,
                                                  static_cast<int>(eligible.size()) - 1);
                tile.resource = eligible[k]->id;
            }
        }
    }
}

std::vector<Coord> choose_spawns(const Ruleset& rs, GameState& s, std::size_t count) {
    const HexMap& map = s.map;
    std::vector<Coord> candidates;
    for (int i = 0; i < map.tile_count(); ++i) {
        const Coord c = map.coord_of(i);
        if (!is_passable_land(rs, map.tiles()[i])) continue;
        bool has_land_neighbour = false;
        for (Coord n : hex_neighbors(c)) {
            has_land_neighbour = has_land_neighbour ||
                                 (map.contains(n) && is_passable_land(rs, map.at(n)));
        }
        if (has_land_neighbour) candidates.push_back(c);
    }
    if (candidates.size() < count) {
        throw ConfigError("insufficient_land", "map has too little usable land for " +
                                                   std::to_string(count) + " civilizations");
    }
    for (std::size_t i = candidates.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(
            s.rng.uniform_int("spawn", 0, static_cast<int>(i)));
        std::swap(candidates[i], candidates[j]);
    }
    std::vector<Coord> spawns{candidates.front()};
    while (spawns.size() < count) {
        int best_distance = -1;
        Coord best{};
        for (Coord c : candidates) {
            int nearest = 1 << 30;
            for (Coord p : spawns) nearest = std::min(nearest, hex_distance(c, p));
            if (nearest > best_distance) {
                best_distance = nearest;
                best = c;
            }
        }
        if (best_distance <= 0) {
            throw ConfigError("insufficient_land", "cannot place distinct spawn tiles");
        }
        spawns.push_back(best);
    }
    return spawns;
}

} // namespace

GameState Engine::new_game(const GameConfig& config) const {
    const Ruleset& rs = *ruleset_;
    const std::size_t n = config.civs.size();
    if (n < 2) {
        throw ConfigError("too_few_civs", "a game needs at least 2 civilizations");
    }
    if (n > kMaxCivs) {
        throw ConfigError("too_many_civs", "at most 32 civilizations are supported");
    }
    std::set<std::string> seen;
    for (const auto& name : config.civs) {
        if (!rs.nation(name)) {
            throw ConfigError("unknown_civ", "unknown civilization '" + name + "'");
        }
        if (!seen.insert(name).second) {
            throw ConfigError("duplicate_civ", "civilization '" + name + "' listed twice");
        }
    }
    if (config.width < 1 || config.height < 1 ||
        static_cast<long>(config.width) * config.height < kMinTilesPerCiv * static_cast<long>(n)) {
        throw ConfigError("insufficient_area",
                          "map " + std::to_string(config.width) + "x" +
                              std::to_string(config.height) + " is too small for " +
                              std::to_string(n) + " civilizations");
    }
    for (const auto& u : rs.rules.starting_units) {
        if (!rs.unit_type(u)) {
            throw ConfigError("invalid_ruleset", "unknown starting unit '" + u + "'");
        }
    }

    GameState s;
    s.game_id = config.game_id.empty() ? "game-" + to_hex(config.seed) : config.game_id;
    s.ruleset_id = rs.id;
    s.ruleset_hash = rs.content_hash;
    s.map = HexMap(config.width, config.height);
    s.rng = RngStreams(config.seed);
    generate_terrain(rs, s);
    const auto spawns = choose_spawns(rs, s, n);

    std::set<Coord> occupied(spawns.begin(), spawns.end());
    for (std::size_t i = 0; i < n; ++i) {
        Civilization civ;
        civ.id = CivId{static_cast<int>(i)};
        civ.name = config.civs[i];
        civ.gold = rs.rules.starting_gold;
        s.civs.push_back(std::move(civ));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const CivId id{static_cast<int>(i)};
        bool first = true;
        for (const auto& type_id : rs.rules.starting_units) {
            Coord pos = spawns[i];
            if (!first) {
                for (Coord nb : hex_neighbors(spawns[i])) {
                    if (s.map.contains(nb) && is_passable_land(rs, s.map.at(nb)) &&
                        !occupied.count(nb)) {
                        pos = nb;
                        break;
                    }
                }
                occupied.insert(pos);
            }
            detail::spawn_unit(s, *rs.unit_type(type_id), id, pos);
            first = false;
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            s.diplomacy.at(CivId{static_cast<int>(a)}, CivId{static_cast<int>(b)})
                .set(Treaty::peace);
        }
    }
    refresh_exploration(s);
    return s;
}

} // namespace microciv
