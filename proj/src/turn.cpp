#include "engine_internal.hpp"
#include "microciv/error.hpp"

#include <algorithm>
#include <queue>

namespace microciv {

namespace {

using detail::log_event;
using detail::notify;

constexpr std::size_t kScienceHistory = 8;

int growth_threshold_for(int population, const GameRules& r) {
    return r.growth_base + r.growth_per_population * (population - 1);
}

// Finds the tile a newly built unit appears on, or nullopt when none fits.
std::optional<Coord> spawn_tile(const Ruleset& rs, const GameState& s, const City& city,
                                const UnitTypeDef& type) {
    if (!type.is_water) {
        return city.pos;
    }
    for (Coord n : hex_neighbors(city.pos)) {
        if (s.map.contains(n) && is_water(rs, s.map.at(n))) {
            return n;
        }
    }
    return std::nullopt;
}

void grow_city(const Ruleset& rs, GameState& s, City& city, const Yields& y) {
    const GameRules& r = rs.rules;
    city.food_stock += y.food - r.food_per_population * city.population;
    const int threshold = growth_threshold_for(city.population, r);
    if (city.food_stock >= threshold) {
        city.food_stock -= threshold;
        ++city.population;
        detail::expand_border(rs, s, city);
        notify(rs, s, city.owner, city.name + " grew to " + std::to_string(city.population));
    } else if (city.food_stock < 0) {
        city.food_stock = 0;
        if (city.population > 1) {
            --city.population;
            notify(rs, s, city.owner, city.name + " is starving");
        }
    }
    detail::assign_worked_tiles(rs, s, city);
}

void produce(const Ruleset& rs, GameState& s, CivId owner, std::size_t city_index,
             const Yields& y, std::vector<Event>* sink) {
    City& city = s.civ(owner).cities[city_index];
    city.production_progress += y.production;
    if (city.production.empty()) {
        return;
    }
    if (const BuildingDef* b = rs.building(city.production)) {
        if (city.production_progress < b->cost) return;
        if (city.buildings.count(b->id) || (b->is_wonder && wonder_built_anywhere(s, b->id))) {
            notify(rs, s, owner, b->id + " can no longer be built in " + city.name);
            city.production.clear();
            return;
        }
        city.production_progress -= b->cost;
        city.buildings.insert(b->id);
        city.production.clear();
        notify(rs, s, owner, city.name + " completed " + b->id);
        log_event(rs, s, sink, b->is_wonder ? "wonder_built" : "building_built", {owner},
                  city.name + " completed " + b->id, b->is_wonder);
        return;
    }
    const UnitTypeDef* u = rs.unit_type(city.production);
    if (!u || city.production_progress < u->cost) return;
    const int pop_cost = u->is_military ? rs.rules.military_population_cost : 0;
    if (city.population - pop_cost < 1) {
        return; // stalls until the city can pay the population cost
    }
    const auto where = spawn_tile(rs, s, city, *u);
    if (!where) return;
    city.population -= pop_cost;
    city.production_progress -= u->cost;
    city.production.clear();
    const std::string city_name = city.name;
    detail::assign_worked_tiles(rs, s, s.civ(owner).cities[city_index]);
    detail::spawn_unit(s, *u, owner, *where);
    notify(rs, s, owner, city_name + " trained " + u->id);
    log_event(rs, s, sink, "unit_built", {owner}, city_name + " trained " + u->id, false);
}

void research(const Ruleset& rs, GameState& s, Civilization& civ, std::vector<Event>* sink) {
    const int science = civ_science(rs, s, civ);
    civ.science_history.push_back(science);
    while (civ.science_history.size() > kScienceHistory) civ.science_history.pop_front();
    civ.research_progress += science;
    while (!civ.current_research.empty()) {
        const TechDef* tech = rs.tech(civ.current_research);
        if (!tech || civ.research_progress < tech->cost) break;
        civ.research_progress -= tech->cost;
        civ.techs.insert(tech->id);
        civ.current_research.clear();
        notify(rs, s, civ.id, "Researched " + tech->id);
        log_event(rs, s, sink, "tech_researched", {civ.id}, civ.name + " researched " + tech->id,
                  false);
    }
}

void pay_upkeep(const Ruleset& rs, GameState& s, Civilization& civ, std::vector<Event>* sink) {
    civ.gold += civ_gold_income(rs, s, civ) - civ_maintenance(rs, civ);
    if (civ.gold >= 0) return;
    civ.gold = 0;
    const Unit* victim = nullptr;
    int worst = -1;
    for (const auto& u : civ.units) {
        const UnitTypeDef* t = rs.unit_type(u.type);
        const int m = t ? t->maintenance : 0;
        if (m >= worst) {
            worst = m;
            victim = &u;
        }
    }
    if (!victim) return;
    const std::string type = victim->type;
    detail::remove_unit(s, victim->id);
    notify(rs, s, civ.id, "A " + type + " disbanded for lack of gold");
    log_event(rs, s, sink, "unit_disbanded", {civ.id}, civ.name + " disbanded a " + type, false);
}

void heal_units(const Ruleset& rs, GameState& s, Civilization& civ) {
    for (auto& u : civ.units) {
        const City* c = city_at(s, u.pos);
        int heal = rs.rules.heal_outside;
        if (c && c->owner == civ.id) {
            heal = rs.rules.heal_in_city;
        } else if (s.map.at(u.pos).owner == civ.id) {
            heal = rs.rules.heal_in_borders;
        }
        u.health = std::min(100, u.health + heal);
    }
}

void tick_treaties(const Ruleset& rs, GameState& s, bool freeze, std::vector<Event>* sink) {
    for (auto& [key, rel] : s.diplomacy.relations) {
        for (auto it = rel.countdowns.begin(); it != rel.countdowns.end();) {
            --it->second;
            if (it->second > 0) {
                ++it;
            } else if (freeze) {
                it->second = 1;
                ++it;
            } else {
                const Treaty t = it->first;
                rel.clear(t);
                it = rel.countdowns.erase(it);
                const CivId a{key.first};
                const CivId b{key.second};
                log_event(rs, s, sink, "treaty_expired", {a, b},
                          std::string(treaty_name(t)) + " between " + s.civ(a).name + " and " +
                              s.civ(b).name + " expired",
                          true);
            }
        }
    }
    for (auto& trade : s.resource_trades) --trade.turns_left;
    s.resource_trades.erase(std::remove_if(s.resource_trades.begin(), s.resource_trades.end(),
                                           [](const ResourceTrade& t) { return t.turns_left <= 0; }),
                            s.resource_trades.end());
}

void update_connections(GameState& s, Civilization& civ) {
    const City* capital = capital_of(civ);
    std::vector<bool> reach(s.map.tile_count(), false);
    if (capital) {
        std::queue<Coord> open;
        open.push(capital->pos);
        reach[s.map.index_of(capital->pos)] = true;
        while (!open.empty()) {
            const Coord c = open.front();
            open.pop();
            for (Coord n : hex_neighbors(c)) {
                if (!s.map.contains(n) || reach[s.map.index_of(n)] ||
                    s.map.at(n).owner != civ.id) {
                    continue;
                }
                reach[s.map.index_of(n)] = true;
                open.push(n);
            }
        }
    }
    for (auto& city : civ.cities) {
        city.connected_to_capital = reach[s.map.index_of(city.pos)];
    }
}

} // namespace

int growth_threshold(int population, const GameRules& rules) {
    return growth_threshold_for(population, rules);
}

std::vector<Event> Engine::end_turn(GameState& s, const TurnOptions& options) const {
    const Ruleset& rs = *ruleset_;
    std::vector<Event> events;
    for (auto& civ_ref : s.civs) {
        const CivId id = civ_ref.id;
        if (civ_ref.cities.empty() && civ_ref.units.empty()) continue;
        for (std::size_t i = 0; i < s.civ(id).cities.size(); ++i) {
            City& city = s.civ(id).cities[i];
            detail::assign_worked_tiles(rs, s, city);
            const Yields y = city_yields(rs, s, city);
            grow_city(rs, s, city, y);
            produce(rs, s, id, i, y, &events);
        }
        research(rs, s, s.civ(id), &events);
        pay_upkeep(rs, s, s.civ(id), &events);
        heal_units(rs, s, s.civ(id));
    }
    for (auto& civ : s.civs) {
        for (auto& city : civ.cities) {
            if (city.last_attacked_turn != s.turn) {
                city.health = std::min(rs.rules.city_max_health, city.health + rs.rules.city_recovery);
            }
        }
    }
    tick_treaties(rs, s, options.freeze_diplomacy, &events);
    ++s.turn;
    for (auto& civ : s.civs) {
        for (auto& u : civ.units) {
            const UnitTypeDef* t = rs.unit_type(u.type);
            u.moves_left = t ? t->movement : 0;
            u.has_attacked = false;
        }
        update_connections(s, civ);
    }
    refresh_exploration(s);
    return events;
}

void Engine::refresh_exploration(GameState& s) const {
    for (const auto& civ : s.civs) {
        if (civ.units.empty() && civ.cities.empty()) continue;
        const auto visible = visible_tiles(*ruleset_, s, civ.id);
        const std::uint32_t bit = 1u << idx(civ.id);
        for (int i = 0; i < s.map.tile_count(); ++i) {
            if (visible[i]) s.map.tiles()[i].explored_by |= bit;
        }
    }
}

std::optional<CivId> Engine::check_victory(const GameState& s) const {
    std::optional<CivId> holder;
    for (const auto& civ : s.civs) {
        if (!civ.cities.empty()) {
            if (holder) return std::nullopt;
            holder = civ.id;
        }
    }
    if (!holder) return std::nullopt;
    for (const auto& civ : s.civs) {
        if (civ.id != *holder && civ.alive()) return std::nullopt;
    }
    return holder;
}

StepResult end_turn(const Ruleset& ruleset, GameState state, const TurnOptions& options) {
    Engine engine(ruleset);
    auto events = engine.end_turn(state, options);
    return {std::move(state), std::move(events)};
}

} // namespace microciv
