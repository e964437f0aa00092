#include "engine_internal.hpp"

#include <algorithm>

namespace microciv::detail {

void log_event(const Ruleset& ruleset, GameState& state, std::vector<Event>* sink,
               std::string kind, std::vector<CivId> civs, std::string text, bool is_public) {
    Event e{state.turn, std::move(kind), std::move(civs), std::move(text), is_public};
    if (sink) {
        sink->push_back(e);
    }
    state.events.push_back(std::move(e));
    while (static_cast<int>(state.events.size()) > ruleset.rules.event_log_capacity) {
        state.events.pop_front();
    }
}

void notify(const Ruleset& ruleset, GameState& state, CivId civ, std::string text) {
    auto& list = state.civ(civ).notifications;
    list.push_back({state.turn, std::move(text)});
    while (static_cast<int>(list.size()) > ruleset.rules.notification_capacity) {
        list.pop_front();
    }
}

Unit& spawn_unit(GameState& state, const UnitTypeDef& type, CivId owner, Coord pos) {
    Unit u;
    u.id = UnitId{state.next_unit_id++};
    u.type = type.id;
    u.owner = owner;
    u.original_owner = owner;
    u.pos = pos;
    u.moves_left = type.movement;
    auto& units = state.civ(owner).units;
    units.push_back(std::move(u));
    return units.back();
}

void remove_unit(GameState& state, UnitId id) {
    for (auto& civ : state.civs) {
        auto it = std::find_if(civ.units.begin(), civ.units.end(),
                               [&](const Unit& u) { return u.id == id; });
        if (it != civ.units.end()) {
            civ.units.erase(it);
            return;
        }
    }
}

void claim_tiles(GameState& state, const City& city, int radius) {
    HexMap& map = state.map;
    for (int i = 0; i < map.tile_count(); ++i) {
        Coord c = map.coord_of(i);
        Tile& t = map.tiles()[i];
        if (!t.owner && hex_distance(c, city.pos) <= radius) {
            t.owner = city.owner;
            t.owner_city = city.id;
        }
    }
}

namespace {

int tile_score(const Yields& y) { return 3 * y.food + 2 * y.production + y.gold; }

} // namespace

void expand_border(const Ruleset& ruleset, GameState& state, const City& city) {
    HexMap& map = state.map;
    int best = -1;
    int best_score = -1;
    for (int i = 0; i < map.tile_count(); ++i) {
        const Tile& t = map.tiles()[i];
        if (t.owner || hex_distance(map.coord_of(i), city.pos) > ruleset.rules.city_work_radius) {
            continue;
        }
        const int score = tile_score(tile_yields(ruleset, t));
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    if (best >= 0) {
        map.tiles()[best].owner = city.owner;
        map.tiles()[best].owner_city = city.id;
    }
}

void assign_worked_tiles(const Ruleset& ruleset, GameState& state, City& city) {
    const HexMap& map = state.map;
    std::vector<std::pair<int, int>> candidates; // (-score, index)
    for (int i = 0; i < map.tile_count(); ++i) {
        const Tile& t = map.tiles()[i];
        const Coord c = map.coord_of(i);
        if (t.owner != city.owner || t.owner_city != city.id || c == city.pos ||
            hex_distance(c, city.pos) > ruleset.rules.city_work_radius) {
            continue;
        }
        candidates.emplace_back(-tile_score(tile_yields(ruleset, t)), i);
    }
    std::sort(candidates.begin(), candidates.end());
    city.worked_tiles.clear();
    for (const auto& [neg, i] : candidates) {
        if (static_cast<int>(city.worked_tiles.size()) >= city.population) break;
        city.worked_tiles.push_back(map.coord_of(i));
    }
}

bool settle_defeat(const Ruleset& ruleset, GameState& state, CivId civ_id,
                   std::vector<Event>* sink) {
    Civilization& civ = state.civ(civ_id);
    if (!civ.ever_had_city || !civ.cities.empty()) {
        return false;
    }
    if (civ.units.empty()) {
        bool owns = false;
        for (const auto& t : state.map.tiles()) owns = owns || t.owner == civ_id;
        if (!owns) return false;
    }
    civ.units.clear();
    for (auto& t : state.map.tiles()) {
        if (t.owner == civ_id) {
            t.owner.reset();
            t.owner_city.reset();
        }
    }
    log_event(ruleset, state, sink, "civ_defeated", {civ_id}, civ.name + " has been defeated",
              true);
    return true;
}

void set_war(const Ruleset& ruleset, GameState& state, CivId a, CivId b,
             std::vector<Event>* sink) {
    Relation& rel = state.diplomacy.at(a, b);
    for (Treaty t : kAllTreaties) rel.clear(t);
    rel.countdowns.clear();
    rel.set(Treaty::war);
    rel.last_transition_turn = state.turn;
    rel.history.push_back({state.turn, "declare_war", a});
    state.resource_trades.erase(
        std::remove_if(state.resource_trades.begin(), state.resource_trades.end(),
                       [&](const ResourceTrade& t) {
                           return (t.from == a && t.to == b) || (t.from == b && t.to == a);
                       }),
        state.resource_trades.end());
    log_event(ruleset, state, sink, "declare_war", {a, b},
              state.civ(a).name + " declared war on " + state.civ(b).name, true);
    notify(ruleset, state, b, state.civ(a).name + " declared war on us");
}

void set_peace(const Ruleset& ruleset, GameState& state, CivId a, CivId b,
               std::vector<Event>* sink) {
    Relation& rel = state.diplomacy.at(a, b);
    rel.clear(Treaty::war);
    rel.set(Treaty::peace);
    rel.last_transition_turn = state.turn;
    rel.history.push_back({state.turn, "make_peace", a});
    log_event(ruleset, state, sink, "make_peace", {a, b},
              state.civ(a).name + " made peace with " + state.civ(b).name, true);
    notify(ruleset, state, b, state.civ(a).name + " made peace with us");
}

void sign_treaty(const Ruleset& ruleset, GameState& state, CivId a, CivId b, Treaty t,
                 std::vector<Event>* sink) {
    Relation& rel = state.diplomacy.at(a, b);
    rel.set(t);
    rel.countdowns[t] = ruleset.rules.treaty_duration;
    rel.history.push_back({state.turn, treaty_name(t), a});
    log_event(ruleset, state, sink, treaty_name(t), {a, b},
              state.civ(a).name + " and " + state.civ(b).name + " signed " + treaty_name(t),
              true);
    notify(ruleset, state, b, state.civ(a).name + " signed " + treaty_name(t) + " with us");
}

std::string next_city_name(const Ruleset& ruleset, const GameState& state,
                           const Civilization& civ) {
    auto taken = [&](const std::string& name) {
        for (const auto& c : state.civs) {
            for (const auto& city : c.cities) {
                if (city.name == name) return true;
            }
        }
        return false;
    };
    if (const NationDef* nation = ruleset.nation(civ.name)) {
        for (const auto& name : nation->city_names) {
            if (!taken(name)) return name;
        }
    }
    for (int n = civ.cities_founded + 1;; ++n) {
        std::string name = civ.name + " " + std::to_string(n);
        if (!taken(name)) return name;
    }
}

void transfer_city(const Ruleset& ruleset, GameState& state, CityId city_id, CivId new_owner,
                   std::vector<Event>* sink) {
    City* found = find_city(state, city_id);
    const CivId old_owner = found->owner;
    Civilization& from = state.civ(old_owner);
    auto it = std::find_if(from.cities.begin(), from.cities.end(),
                           [&](const City& c) { return c.id == city_id; });
    City city = std::move(*it);
    from.cities.erase(it);

    const bool was_capital = city.is_capital;
    city.owner = new_owner;
    city.is_capital = false;
    city.production.clear();
    city.production_progress = 0;
    for (auto& t : state.map.tiles()) {
        if (t.owner_city == city_id) {
            t.owner = new_owner;
        }
    }
    std::vector<UnitId> evicted;
    for (const auto& civ : state.civs) {
        if (civ.id == new_owner) continue;
        for (const auto& u : civ.units) {
            if (u.pos == city.pos) evicted.push_back(u.id);
        }
    }
    for (UnitId u : evicted) remove_unit(state, u);

    Civilization& to = state.civ(new_owner);
    if (!capital_of(to)) {
        city.is_capital = true;
    }
    to.ever_had_city = true;
    const std::string name = city.name;
    auto pos = std::lower_bound(to.cities.begin(), to.cities.end(), city,
                                [](const City& a, const City& b) { return idx(a.id) < idx(b.id); });
    to.cities.insert(pos, std::move(city));
    if (was_capital && !from.cities.empty()) {
        from.cities.front().is_capital = true;
    }
    for (auto* c : {&from, &to}) {
        for (auto& owned : c->cities) assign_worked_tiles(ruleset, state, owned);
    }
    log_event(ruleset, state, sink, "city_transferred", {old_owner, new_owner},
              name + " passed from " + state.civ(old_owner).name + " to " +
                  state.civ(new_owner).name,
              true);
    notify(ruleset, state, old_owner, "We lost " + name);
    settle_defeat(ruleset, state, old_owner, sink);
}

void reveal_around(const Ruleset& ruleset, GameState& state, CivId civ, Coord pos) {
    const int r = ruleset.rules.sight_radius;
    const std::uint32_t bit = 1u << idx(civ);
    for (int y = pos.y - r; y <= pos.y + r; ++y) {
        for (int x = pos.x - r - 1; x <= pos.x + r + 1; ++x) {
            const Coord c{x, y};
            if (state.map.contains(c) && hex_distance(pos, c) <= r) {
                state.map.at(c).explored_by |= bit;
            }
        }
    }
}

} // namespace microciv::detail
