#include "support.hpp"

#include "microciv/queries.hpp"

#include <fstream>
#include <sstream>

namespace microciv::test {

const Ruleset& mini() {
    static const Ruleset rs = load_ruleset(default_ruleset_path());
    return rs;
}

Engine mini_engine() { return Engine(mini()); }

const std::vector<std::string>& four_civs() {
    static const std::vector<std::string> names{"Rome", "Aztecs", "Greece", "Egypt"};
    return names;
}

GameState four_civ_game(std::uint64_t seed, int width, int height) {
    GameConfig cfg;
    cfg.width = width;
    cfg.height = height;
    cfg.civs = four_civs();
    cfg.seed = seed;
    return mini_engine().new_game(cfg);
}

GameState flat_state(const Ruleset& rs, int width, int height,
                     const std::vector<std::string>& civs) {
    GameState s;
    s.game_id = "test";
    s.ruleset_id = rs.id;
    s.ruleset_hash = rs.content_hash;
    s.map = HexMap(width, height);
    for (auto& t : s.map.tiles()) t.terrain = "grassland";
    for (std::size_t i = 0; i < civs.size(); ++i) {
        Civilization c;
        c.id = CivId{static_cast<int>(i)};
        c.name = civs[i];
        c.gold = rs.rules.starting_gold;
        s.civs.push_back(std::move(c));
    }
    for (std::size_t a = 0; a < civs.size(); ++a) {
        for (std::size_t b = a + 1; b < civs.size(); ++b) {
            s.diplomacy.at(CivId{static_cast<int>(a)}, CivId{static_cast<int>(b)}).set(Treaty::peace);
        }
    }
    return s;
}

Unit& add_unit(const Ruleset& rs, GameState& s, CivId civ, const std::string& type, Coord pos) {
    const UnitTypeDef* def = rs.unit_type(type);
    Unit u;
    u.id = UnitId{s.next_unit_id++};
    u.type = type;
    u.owner = civ;
    u.original_owner = civ;
    u.pos = pos;
    u.moves_left = def ? def->movement : 1;
    auto& units = s.civ(civ).units;
    units.push_back(u);
    return units.back();
}

City& add_city(const Ruleset& rs, GameState& s, CivId civ, Coord pos, int population) {
    const Unit& settler = add_unit(rs, s, civ, "settler", pos);
    const int before = s.next_city_id;
    Engine(rs).apply(s, FoundCity{civ, settler.id});
    City& city = *find_city(s, CityId{before});
    city.population = population;
    return city;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

GameState random_game(std::uint64_t seed, int steps, int width, int height) {
    const Engine engine(mini());
    GameState s = four_civ_game(seed, width, height);
    RngStreams rng(seed ^ 0x5eedULL);
    for (int step = 0; step < steps; ++step) {
        const CivId civ{rng.uniform_int("civ", 0, 3)};
        if (step % 17 == 3) {
            const CivId other{rng.uniform_int("civ", 0, 3)};
            if (!engine.check(s, DeclareWar{civ, other})) engine.apply(s, DeclareWar{civ, other});
        }
        if (step % 11 == 7 && s.civ(civ).alive()) {
            engine.apply(s, SendChat{civ, kGlobalChannel, "turn " + std::to_string(s.turn)});
        }
        const auto legal = engine.legal_actions(s, civ);
        if (!legal.empty()) {
            engine.apply(s, legal[rng.uniform_int("go", 0, static_cast<int>(legal.size()) - 1)]);
        }
        if (step % 6 == 5) engine.end_turn(s);
    }
    return s;
}

} // namespace microciv::test
