#include "engine_internal.hpp"
#include "microciv/error.hpp"

#include <set>

namespace microciv {

std::vector<EngineAction> Engine::legal_actions(const GameState& s, CivId civ_id) const {
    const Ruleset& rs = *ruleset_;
    std::vector<EngineAction> out;
    if (idx(civ_id) < 0 || idx(civ_id) >= static_cast<int>(s.civs.size())) return out;
    const Civilization& civ = s.civ(civ_id);
    if (!civ.alive()) return out;

    auto offer = [&](EngineAction a) {
        if (!check(s, a)) out.push_back(std::move(a));
    };

    for (const auto& u : civ.units) {
        if (u.moves_left > 0) {
            for (const auto& [c, left] : reachable_tiles(rs, s, u)) {
                out.push_back(MoveUnit{civ_id, u.id, c});
            }
        }
        offer(FoundCity{civ_id, u.id});
        const UnitTypeDef* type = rs.unit_type(u.type);
        if (type && type->can_improve) {
            for (const auto& imp : rs.improvements) offer(ImproveTile{civ_id, u.id, imp.id});
        }
        if (type && type->is_military && u.moves_left > 0 && !u.has_attacked) {
            const int reach = std::max(1, type->range);
            for (const auto& other : s.civs) {
                if (!at_war(s, civ_id, other.id)) continue;
                for (const auto& d : other.units) {
                    if (hex_distance(u.pos, d.pos) <= reach) offer(Attack{civ_id, u.id, d.id});
                }
                for (const auto& c : other.cities) {
                    if (hex_distance(u.pos, c.pos) <= reach) offer(Attack{civ_id, u.id, c.id});
                }
            }
        }
        offer(PromoteUnit{civ_id, u.id});
    }
    for (const auto& city : civ.cities) {
        for (const auto& b : rs.buildings) offer(SetProduction{civ_id, city.id, b.id});
        for (const auto& t : rs.unit_types) offer(SetProduction{civ_id, city.id, t.id});
    }
    for (const auto& tech : researchable_techs(rs, civ.techs)) {
        out.push_back(SetResearch{civ_id, tech});
    }
    for (const auto& other : s.civs) {
        if (other.id == civ_id) continue;
        offer(DeclareWar{civ_id, other.id});
        offer(OfferPeace{civ_id, other.id, std::nullopt});
        offer(SignDefensivePact{civ_id, other.id});
        offer(SignResearchAgreement{civ_id, other.id});
        offer(DeclareFriendship{civ_id, other.id});
        offer(SetOpenBorders{civ_id, other.id});
    }
    return out;
}

namespace {

[[noreturn]] void broken(const std::string& what) {
    throw SaveError("invariant_violation", what);
}

} // namespace

void Engine::validate(const GameState& s) const {
    const Ruleset& rs = *ruleset_;
    const HexMap& map = s.map;
    if (map.width() <= 0 || map.height() <= 0 ||
        static_cast<int>(map.tiles().size()) != map.tile_count()) {
        broken("map dimensions do not match tile count");
    }
    if (s.turn < 0) broken("negative turn counter");
    const int civ_count = static_cast<int>(s.civs.size());
    if (civ_count > 32) broken("too many civilizations");
    for (int i = 0; i < civ_count; ++i) {
        if (idx(s.civs[i].id) != i) broken("civilization ids must match their position");
    }
    for (int i = 0; i < map.tile_count(); ++i) {
        const Tile& t = map.tiles()[i];
        const std::string where = "tile " + std::to_string(i);
        if (!rs.terrain(t.terrain)) broken(where + " has unknown terrain");
        if (!t.feature.empty() && !rs.feature(t.feature)) broken(where + " has unknown feature");
        if (!t.resource.empty() && !rs.resource(t.resource)) broken(where + " has unknown resource");
        if (t.improvement_count < 0 || t.improvement_count > 3) {
            broken(where + " improvement count out of range");
        }
        if (!t.improvement.empty() && !rs.improvement(t.improvement)) {
            broken(where + " has unknown improvement");
        }
        if (t.owner) {
            if (idx(*t.owner) < 0 || idx(*t.owner) >= civ_count) broken(where + " owner unknown");
            if (!s.civ(*t.owner).alive()) broken(where + " owned by a defeated civilization");
        }
        if (civ_count < 32 && (t.explored_by >> civ_count) != 0) {
            broken(where + " explored by unknown civilization");
        }
    }
    std::set<int> unit_ids, city_ids;
    std::set<Coord> city_tiles;
    for (const auto& civ : s.civs) {
        if (civ.gold < 0) broken(civ.name + " has negative gold");
        for (const auto& tech : civ.techs) {
            if (!rs.tech(tech)) broken(civ.name + " knows unknown tech " + tech);
        }
        if (!civ.current_research.empty() && !rs.tech(civ.current_research)) {
            broken(civ.name + " researches unknown tech");
        }
        int prev = 0;
        for (const auto& u : civ.units) {
            if (idx(u.id) <= prev) broken(civ.name + " units out of id order");
            prev = idx(u.id);
            if (!unit_ids.insert(idx(u.id)).second) broken("duplicate unit id");
            if (idx(u.id) >= s.next_unit_id) broken("unit id beyond allocator");
            if (u.owner != civ.id) broken("unit owner mismatch");
            if (!map.contains(u.pos)) broken("unit off the map");
            if (u.health < 1 || u.health > 100) broken("unit health out of range");
            if (u.moves_left < 0) broken("negative moves");
            if (!rs.unit_type(u.type)) broken("unknown unit type " + u.type);
        }
        prev = 0;
        int capitals = 0;
        for (const auto& c : civ.cities) {
            if (idx(c.id) <= prev) broken(civ.name + " cities out of id order");
            prev = idx(c.id);
            if (!city_ids.insert(idx(c.id)).second) broken("duplicate city id");
            if (idx(c.id) >= s.next_city_id) broken("city id beyond allocator");
            if (c.owner != civ.id) broken("city owner mismatch");
            if (!map.contains(c.pos)) broken("city off the map");
            if (!city_tiles.insert(c.pos).second) broken("two cities on one tile");
            if (c.population < 1) broken(c.name + " has population below 1");
            if (c.health < 0 || c.health > rs.rules.city_max_health) {
                broken(c.name + " health out of range");
            }
            if (static_cast<int>(c.worked_tiles.size()) > c.population) {
                broken(c.name + " works more tiles than its population");
            }
            std::set<Coord> worked;
            for (Coord w : c.worked_tiles) {
                if (!map.contains(w) || map.at(w).owner != civ.id ||
                    hex_distance(w, c.pos) > rs.rules.city_work_radius || !worked.insert(w).second) {
                    broken(c.name + " works an invalid tile");
                }
            }
            if (!c.production.empty() && !rs.building(c.production) &&
                !rs.unit_type(c.production)) {
                broken(c.name + " produces an unknown item");
            }
            capitals += c.is_capital ? 1 : 0;
        }
        if (capitals > 1) broken(civ.name + " has several capitals");
    }
    for (const auto& [key, rel] : s.diplomacy.relations) {
        if (key.first >= key.second || key.first < 0 || key.second >= civ_count) {
            broken("malformed diplomacy key");
        }
        const bool war = rel.has(Treaty::war);
        const bool peace = rel.has(Treaty::peace);
        if (war == peace) broken("each pair must be at exactly one of war or peace");
        for (Treaty t : kAllTreaties) {
            if (!is_timed(t)) continue;
            const bool active = rel.has(t);
            auto it = rel.countdowns.find(t);
            if (active && !peace) broken(std::string(treaty_name(t)) + " without peace");
            if (active && (it == rel.countdowns.end() || it->second <= 0)) {
                broken(std::string(treaty_name(t)) + " lacks a positive countdown");
            }
            if (!active && it != rel.countdowns.end()) broken("countdown for inactive treaty");
        }
    }
    for (int a = 0; a < civ_count; ++a) {
        for (int b = a + 1; b < civ_count; ++b) {
            if (!s.diplomacy.relations.count({a, b})) broken("missing diplomacy entry");
        }
    }
}

} // namespace microciv
