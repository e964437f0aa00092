#include "engine_internal.hpp"
#include "microciv/error.hpp"

#include <algorithm>
#include <cmath>

namespace microciv {

int combat_damage(double attacker, double defender, const GameRules& rules) {
    if (defender <= 0) {
        return 100;
    }
    const double raw = rules.combat_base_damage * std::pow(attacker / defender, rules.combat_exponent);
    return static_cast<int>(std::clamp(std::lround(raw), 1L, 100L));
}

namespace {

std::optional<Illegality> fail(std::string code, std::string message) {
    return Illegality{std::move(code), std::move(message)};
}

double city_defense(const Ruleset& rs, const GameState& s, const City& city) {
    int garrison = 0;
    for (const auto& u : s.civ(city.owner).units) {
        if (u.pos != city.pos) continue;
        if (const UnitTypeDef* t = rs.unit_type(u.type); t && t->is_military) {
            garrison = std::max(garrison, t->strength);
        }
    }
    return rs.rules.city_base_defense + rs.rules.city_defense_per_population * city.population +
           garrison;
}

} // namespace

namespace detail {

std::optional<Illegality> check_attack(const Ruleset& rs, const GameState& s, CivId civ,
                                       UnitId attacker, const CombatTarget& target) {
    const Unit* u = find_unit(s, attacker);
    if (!u) return fail("unknown_unit", "no unit " + std::to_string(idx(attacker)));
    if (u->owner != civ) return fail("not_owner", "unit belongs to another civilization");
    const UnitTypeDef* type = rs.unit_type(u->type);
    if (!type || !type->is_military || type->strength <= 0) {
        return fail("not_military", u->type + " cannot attack");
    }
    if (u->moves_left <= 0 || u->has_attacked) {
        return fail("attacker_exhausted", "unit has already acted this turn");
    }
    const int reach = std::max(1, type->range);
    Coord where;
    CivId defender_owner{};
    if (const auto* unit_id = std::get_if<UnitId>(&target)) {
        const Unit* d = find_unit(s, *unit_id);
        if (!d) return fail("unknown_target", "no unit " + std::to_string(idx(*unit_id)));
        where = d->pos;
        defender_owner = d->owner;
        if (const City* c = city_at(s, d->pos); c && c->owner == d->owner && d->owner != civ) {
            if (at_war(s, civ, d->owner)) {
                return fail("target_in_city", "units inside a city are attacked via the city");
            }
        }
    } else {
        const City* c = find_city(s, std::get<CityId>(target));
        if (!c) return fail("unknown_target", "no such city");
        where = c->pos;
        defender_owner = c->owner;
    }
    if (defender_owner == civ) return fail("invalid_target", "cannot attack own forces");
    if (!at_war(s, civ, defender_owner)) {
        return fail("not_at_war", s.civ(civ).name + " is not at war with " +
                                      s.civ(defender_owner).name);
    }
    if (hex_distance(u->pos, where) > reach) {
        return fail("out_of_range", "target is " + std::to_string(hex_distance(u->pos, where)) +
                                        " tiles away");
    }
    if (type->range == 0 && std::holds_alternative<UnitId>(target) &&
        is_water(rs, s.map.at(where)) != type->is_water) {
        return fail("out_of_range", "melee units cannot fight across land and water");
    }
    return std::nullopt;
}

} // namespace detail

CombatReport Engine::resolve_combat(GameState& s, UnitId attacker, CombatTarget target,
                                    std::vector<Event>* events) const {
    const Ruleset& rs = *ruleset_;
    const Unit* probe = find_unit(s, attacker);
    if (!probe) throw IllegalAction("unknown_unit", "no such attacker");
    if (auto e = detail::check_attack(rs, s, probe->owner, attacker, target)) {
        throw IllegalAction(e->code, e->message);
    }
    Unit& att = *find_unit(s, attacker);
    const UnitTypeDef& att_type = *rs.unit_type(att.type);
    const CivId att_owner = att.owner;
    const bool ranged = att_type.range > 0;

    CombatReport report;
    report.attacker = attacker;
    report.defender = target;
    report.attacker_strength = att_type.strength;
    CivId def_owner{};
    std::string target_name;

    if (const auto* unit_id = std::get_if<UnitId>(&target)) {
        Unit& def = *find_unit(s, *unit_id);
        const UnitTypeDef& def_type = *rs.unit_type(def.type);
        def_owner = def.owner;
        target_name = def.type;
        report.defender_strength = def_type.strength;
        if (def_type.strength <= 0) {
            report.damage_to_defender = def.health;
        } else {
            report.damage_to_defender =
                combat_damage(report.attacker_strength, report.defender_strength, rs.rules);
            if (!ranged) {
                report.damage_to_attacker =
                    combat_damage(report.defender_strength, report.attacker_strength, rs.rules);
            }
        }
        def.health -= report.damage_to_defender;
        if (def.health <= 0) {
            report.defender_destroyed = true;
            detail::remove_unit(s, *unit_id);
        } else {
            def.experience += rs.rules.combat_xp;
        }
    } else {
        City& city = *find_city(s, std::get<CityId>(target));
        def_owner = city.owner;
        target_name = city.name;
        report.defender_strength = city_defense(rs, s, city);
        report.damage_to_defender =
            combat_damage(report.attacker_strength, report.defender_strength, rs.rules);
        if (!ranged) {
            report.damage_to_attacker =
                combat_damage(report.defender_strength, report.attacker_strength, rs.rules);
        }
        city.health -= report.damage_to_defender;
        city.last_attacked_turn = s.turn;
    }

    Unit& a = *find_unit(s, attacker);
    a.health -= report.damage_to_attacker;
    if (a.health <= 0) {
        report.attacker_destroyed = true;
        detail::remove_unit(s, attacker);
    } else {
        a.experience += rs.rules.combat_xp;
        a.moves_left = 0;
        a.has_attacked = true;
    }

    detail::log_event(rs, s, events, "combat", {att_owner, def_owner},
                      s.civ(att_owner).name + " attacked " + target_name + " of " +
                          s.civ(def_owner).name,
                      false);
    detail::notify(rs, s, def_owner, s.civ(att_owner).name + " attacked our " + target_name);

    if (const auto* city_id = std::get_if<CityId>(&target)) {
        City& city = *find_city(s, *city_id);
        if (city.health <= 0) {
            const bool can_capture = !ranged && !report.attacker_destroyed && !att_type.is_water;
            if (can_capture) {
                const Coord pos = city.pos;
                city.health = rs.rules.city_capture_health;
                detail::transfer_city(rs, s, *city_id, att_owner, events);
                Unit& winner = *find_unit(s, attacker);
                winner.movement_memory.push_back(winner.pos);
                winner.pos = pos;
                detail::reveal_around(rs, s, att_owner, pos);
                report.city_captured = true;
                detail::log_event(rs, s, events, "city_captured", {att_owner, def_owner},
                                  s.civ(att_owner).name + " captured " + target_name, true);
            } else {
                city.health = 0;
            }
        }
    }
    return report;
}

} // namespace microciv
