#include "engine_internal.hpp"
#include "microciv/error.hpp"

#include <algorithm>

namespace microciv {

namespace {

using detail::log_event;
using detail::notify;

constexpr std::size_t kMovementMemory = 10;

std::optional<Illegality> fail(std::string code, std::string message) {
    return Illegality{std::move(code), std::move(message)};
}

bool valid_civ(const GameState& s, CivId c) {
    return idx(c) >= 0 && idx(c) < static_cast<int>(s.civs.size());
}

std::optional<Illegality> check_actor(const GameState& s, CivId civ) {
    if (!valid_civ(s, civ)) return fail("unknown_civ", "no such civilization");
    if (!s.civ(civ).alive()) return fail("civ_defeated", s.civ(civ).name + " is defeated");
    return std::nullopt;
}

std::optional<Illegality> check_pair(const GameState& s, CivId civ, CivId target) {
    if (auto e = check_actor(s, civ)) return e;
    if (!valid_civ(s, target)) return fail("unknown_civ", "no such target civilization");
    if (civ == target) return fail("invalid_target", "a civilization cannot target itself");
    if (!s.civ(target).alive()) return fail("civ_defeated", s.civ(target).name + " is defeated");
    return std::nullopt;
}

// Looks up a unit owned by `civ`; sets `out` or returns the failure.
std::optional<Illegality> own_unit(const GameState& s, CivId civ, UnitId id, const Unit*& out) {
    if (auto e = check_actor(s, civ)) return e;
    out = find_unit(s, id);
    if (!out) return fail("unknown_unit", "no unit " + std::to_string(idx(id)));
    if (out->owner != civ) return fail("not_owner", "unit belongs to another civilization");
    return std::nullopt;
}

int turns_since_transition(const GameState& s, CivId a, CivId b) {
    return s.turn - s.diplomacy.at(a, b).last_transition_turn;
}

std::optional<Illegality> check_bundle(const Ruleset& rs, const GameState& s, CivId from,
                                       CivId to, const TradeBundle& b, bool peace_implied) {
    const Civilization& giver = s.civ(from);
    if (b.gold < 0) return fail("invalid_amount", "gold amount must be >= 0");
    if (b.gold > giver.gold) {
        return fail("insufficient_gold", giver.name + " holds only " + std::to_string(giver.gold) +
                                             " gold");
    }
    const auto held = civ_resources(s, from);
    for (const auto& [res, qty] : b.resources) {
        if (!rs.resource(res)) return fail("unknown_resource", "unknown resource '" + res + "'");
        if (qty <= 0) return fail("invalid_amount", "resource quantities must be positive");
        auto it = held.find(res);
        if (it == held.end() || it->second < qty) {
            return fail("insufficient_resources", giver.name + " lacks " + std::to_string(qty) +
                                                      " " + res);
        }
    }
    for (CityId c : b.cities) {
        const City* city = find_city(s, c);
        if (!city || city->owner != from) {
            return fail("invalid_city", "city " + std::to_string(idx(c)) + " is not owned by " +
                                            giver.name);
        }
        if (city->is_capital) return fail("cannot_trade_capital", "capitals cannot be traded");
    }
    for (Treaty t : b.treaties) {
        if (!is_timed(t)) return fail("invalid_treaty", "war and peace are not tradeable items");
        if (!peace_implied && !at_peace(s, from, to)) {
            return fail("not_at_peace", "treaties require peace");
        }
        if (s.diplomacy.has(from, to, t)) {
            return fail("already_active", std::string(treaty_name(t)) + " is already active");
        }
        if (t == Treaty::research_agreement) {
            const int cost = rs.rules.research_agreement_cost;
            if (giver.gold - b.gold < cost || s.civ(to).gold < cost) {
                return fail("insufficient_gold", "research agreements cost " +
                                                     std::to_string(cost) + " gold each");
            }
        }
    }
    return std::nullopt;
}

std::optional<Illegality> check_trade(const Ruleset& rs, const GameState& s, const TradeOffer& o,
                                      bool peace_implied) {
    if (auto e = check_pair(s, o.proposer, o.target)) return e;
    if (!peace_implied && at_war(s, o.proposer, o.target)) {
        return fail("at_war", "cannot trade while at war");
    }
    if (o.give.empty() && o.receive.empty() && !peace_implied) {
        return fail("empty_trade", "trade offers must contain at least one item");
    }
    if (o.duration < 1) return fail("invalid_duration", "trade duration must be >= 1 turn");
    if (auto e = check_bundle(rs, s, o.proposer, o.target, o.give, peace_implied)) return e;
    if (auto e = check_bundle(rs, s, o.target, o.proposer, o.receive, peace_implied)) return e;
    return std::nullopt;
}

void execute_bundle(const Ruleset& rs, GameState& s, CivId from, CivId to, const TradeBundle& b,
                    int duration, std::vector<Event>* sink) {
    s.civ(from).gold -= b.gold;
    s.civ(to).gold += b.gold;
    for (const auto& [res, qty] : b.resources) {
        s.resource_trades.push_back({from, to, res, qty, duration});
    }
    for (CityId c : b.cities) {
        detail::transfer_city(rs, s, c, to, sink);
    }
    for (Treaty t : b.treaties) {
        if (s.diplomacy.has(from, to, t)) continue; // listed by both sides
        if (t == Treaty::research_agreement) {
            s.civ(from).gold -= rs.rules.research_agreement_cost;
            s.civ(to).gold -= rs.rules.research_agreement_cost;
        }
        detail::sign_treaty(rs, s, from, to, t, sink);
    }
}

void execute_trade(const Ruleset& rs, GameState& s, const TradeOffer& o,
                   std::vector<Event>* sink) {
    execute_bundle(rs, s, o.proposer, o.target, o.give, o.duration, sink);
    execute_bundle(rs, s, o.target, o.proposer, o.receive, o.duration, sink);
    log_event(rs, s, sink, "trade", {o.proposer, o.target},
              s.civ(o.proposer).name + " traded with " + s.civ(o.target).name, false);
}

struct Checker {
    const Ruleset& rs;
    const GameState& s;

    std::optional<Illegality> operator()(const MoveUnit& a) const {
        const Unit* u = nullptr;
        if (auto e = own_unit(s, a.civ, a.unit, u)) return e;
        if (u->moves_left <= 0) return fail("no_moves", "unit has no moves left");
        for (const auto& [c, left] : reachable_tiles(rs, s, *u)) {
            if (c == a.to) return std::nullopt;
        }
        return fail("unreachable", "destination not reachable this turn");
    }

    std::optional<Illegality> operator()(const FoundCity& a) const {
        const Unit* u = nullptr;
        if (auto e = own_unit(s, a.civ, a.unit, u)) return e;
        const UnitTypeDef* type = rs.unit_type(u->type);
        if (!type || !type->can_found_city) {
            return fail("cannot_found_city", u->type + " cannot found cities");
        }
        if (u->moves_left <= 0) return fail("no_moves", "unit has no moves left");
        const Tile& tile = s.map.at(u->pos);
        if (!is_passable_land(rs, tile)) return fail("invalid_terrain", "cities need open land");
        if (tile.owner && *tile.owner != a.civ) {
            return fail("tile_owned_by_other", "tile belongs to another civilization");
        }
        for (const auto& civ : s.civs) {
            for (const auto& city : civ.cities) {
                if (hex_distance(city.pos, u->pos) < rs.rules.city_min_distance) {
                    return fail("city_too_close", "too close to " + city.name);
                }
            }
        }
        return std::nullopt;
    }

    std::optional<Illegality> operator()(const ImproveTile& a) const {
        const Unit* u = nullptr;
        if (auto e = own_unit(s, a.civ, a.unit, u)) return e;
        const UnitTypeDef* type = rs.unit_type(u->type);
        if (!type || !type->can_improve) return fail("not_a_worker", u->type + " cannot improve");
        if (u->moves_left <= 0) return fail("no_moves", "unit has no moves left");
        const ImprovementDef* imp = rs.improvement(a.improvement);
        if (!imp) return fail("invalid_improvement", "unknown improvement '" + a.improvement + "'");
        const Tile& tile = s.map.at(u->pos);
        if (tile.owner != a.civ) return fail("tile_not_owned", "tile is outside own territory");
        if (std::find(imp->terrains.begin(), imp->terrains.end(), tile.terrain) ==
            imp->terrains.end()) {
            return fail("invalid_terrain", a.improvement + " cannot be built on " + tile.terrain);
        }
        if (!tile.improvement.empty() && tile.improvement != a.improvement) {
            return fail("improvement_conflict", "tile already carries " + tile.improvement);
        }
        if (tile.improvement_count >= imp->max_applications) {
            return fail("tile_improvement_cap", "tile already improved " +
                                                    std::to_string(tile.improvement_count) +
                                                    " times");
        }
        return std::nullopt;
    }

    std::optional<Illegality> operator()(const Attack& a) const {
        if (auto e = check_actor(s, a.civ)) return e;
        return detail::check_attack(rs, s, a.civ, a.unit, a.target);
    }

    std::optional<Illegality> operator()(const PromoteUnit& a) const {
        const Unit* u = nullptr;
        if (auto e = own_unit(s, a.civ, a.unit, u)) return e;
        if (u->experience < rs.rules.promotion_xp_step * (u->promotions + 1)) {
            return fail("insufficient_experience", "not enough experience to promote");
        }
        return std::nullopt;
    }

    std::optional<Illegality> operator()(const SetProduction& a) const {
        if (auto e = check_actor(s, a.civ)) return e;
        const City* city = find_city(s, a.city);
        if (!city) return fail("unknown_city", "no city " + std::to_string(idx(a.city)));
        if (city->owner != a.civ) return fail("not_owner", "city belongs to another civilization");
        const BuildingDef* building = rs.building(a.item);
        const UnitTypeDef* unit = rs.unit_type(a.item);
        if (!building && !unit) return fail("unknown_item", "unknown item '" + a.item + "'");
        if (!item_unlocked(rs, s.civ(a.civ), a.item)) {
            return fail("not_unlocked", a.item + " requires an unresearched technology");
        }
        if (building) {
            if (city->buildings.count(a.item)) return fail("already_built", a.item + " exists");
            if (building->is_wonder && wonder_built_anywhere(s, a.item)) {
                return fail("wonder_taken", a.item + " was already built");
            }
        }
        if (unit && unit->is_water && !is_coastal(rs, s, city->pos)) {
            return fail("not_coastal", "water units need a coastal city");
        }
        return std::nullopt;
    }

    std::optional<Illegality> operator()(const SetResearch& a) const {
        if (auto e = check_actor(s, a.civ)) return e;
        const TechDef* tech = rs.tech(a.tech);
        if (!tech) return fail("unknown_tech", "unknown tech '" + a.tech + "'");
        const auto& known = s.civ(a.civ).techs;
        if (known.count(a.tech)) return fail("already_researched", a.tech + " is known");
        for (const auto& p : tech->prerequisites) {
            if (!known.count(p)) return fail("prerequisites_missing", a.tech + " requires " + p);
        }
        return std::nullopt;
    }

    std::optional<Illegality> operator()(const DeclareWar& a) const {
        if (auto e = check_pair(s, a.civ, a.target)) return e;
        if (at_war(s, a.civ, a.target)) return fail("already_at_war", "already at war");
        if (turns_since_transition(s, a.civ, a.target) < rs.rules.min_turns_peace_to_war) {
            return fail("transition_too_soon", "peace was made too recently");
        }
        return std::nullopt;
    }

    std::optional<Illegality> operator()(const OfferPeace& a) const {
        if (auto e = check_pair(s, a.civ, a.target)) return e;
        if (!at_war(s, a.civ, a.target)) return fail("not_at_war", "the civilizations are not at war");
        if (turns_since_transition(s, a.civ, a.target) < rs.rules.min_turns_war_to_peace) {
            return fail("transition_too_soon", "war was declared too recently");
        }
        if (a.terms) {
            if (a.terms->proposer != a.civ || a.terms->target != a.target) {
                return fail("invalid_terms", "peace terms must be between the two parties");
            }
            return check_trade(rs, s, *a.terms, true);
        }
        return std::nullopt;
    }

    std::optional<Illegality> treaty(CivId civ, CivId target, Treaty t) const {
        if (auto e = check_pair(s, civ, target)) return e;
        if (!at_peace(s, civ, target)) return fail("not_at_peace", "treaties require peace");
        if (s.diplomacy.has(civ, target, t)) {
            return fail("already_active", std::string(treaty_name(t)) + " is already active");
        }
        if (t == Treaty::research_agreement) {
            const int cost = rs.rules.research_agreement_cost;
            if (s.civ(civ).gold < cost || s.civ(target).gold < cost) {
                return fail("insufficient_gold",
                            "research agreements cost " + std::to_string(cost) + " gold each");
            }
        }
        return std::nullopt;
    }
    std::optional<Illegality> operator()(const SignDefensivePact& a) const {
        return treaty(a.civ, a.target, Treaty::defensive_pact);
    }
    std::optional<Illegality> operator()(const SignResearchAgreement& a) const {
        return treaty(a.civ, a.target, Treaty::research_agreement);
    }
    std::optional<Illegality> operator()(const DeclareFriendship& a) const {
        return treaty(a.civ, a.target, Treaty::friendship);
    }
    std::optional<Illegality> operator()(const SetOpenBorders& a) const {
        return treaty(a.civ, a.target, Treaty::open_borders);
    }

    std::optional<Illegality> operator()(const AdjustCloseness& a) const {
        return check_pair(s, a.civ, a.target);
    }

    std::optional<Illegality> operator()(const ExecuteTrade& a) const {
        return check_trade(rs, s, a.offer, false);
    }

    std::optional<Illegality> operator()(const SendChat& a) const {
        if (auto e = check_actor(s, a.civ)) return e;
        if (a.text.empty()) return fail("empty_message", "chat messages must not be empty");
        const std::string& name = s.civ(a.civ).name;
        if (a.channel != kGlobalChannel) {
            bool known = false;
            for (const auto& other : s.civs) {
                if (other.id != a.civ && a.channel == private_channel(name, other.name)) {
                    known = true;
                }
            }
            if (!known) return fail("not_channel_member", name + " cannot post to " + a.channel);
        }
        return std::nullopt;
    }
};

struct Applier {
    const Engine& engine;
    const Ruleset& rs;
    GameState& s;
    std::vector<Event>* sink;

    void operator()(const MoveUnit& a) const {
        Unit* u = find_unit(s, a.unit);
        int left = 0;
        for (const auto& [c, l] : reachable_tiles(rs, s, *u)) {
            if (c == a.to) left = l;
        }
        u->movement_memory.push_back(u->pos);
        if (u->movement_memory.size() > kMovementMemory) {
            u->movement_memory.erase(u->movement_memory.begin());
        }
        u->pos = a.to;
        u->moves_left = left;
        detail::reveal_around(rs, s, a.civ, a.to);
    }

    void operator()(const FoundCity& a) const {
        const Unit* u = find_unit(s, a.unit);
        const Coord pos = u->pos;
        Civilization& civ = s.civ(a.civ);
        City city;
        city.id = CityId{s.next_city_id++};
        city.name = detail::next_city_name(rs, s, civ);
        city.pos = pos;
        city.owner = a.civ;
        city.founder = a.civ;
        city.health = rs.rules.city_max_health;
        city.founded_turn = s.turn;
        city.is_capital = capital_of(civ) == nullptr;
        city.is_original_capital = !civ.ever_had_city;
        std::vector<const ResourceDef*> luxuries;
        for (const auto& r : rs.resources) {
            if (r.kind == ResourceKind::luxury) luxuries.push_back(&r);
        }
        if (!luxuries.empty()) {
            city.demanded_resource =
                luxuries[s.rng.uniform_int("city.demand", 0, static_cast<int>(luxuries.size()) - 1)]
                    ->id;
        }
        detail::remove_unit(s, a.unit);
        Tile& center = s.map.at(pos);
        center.owner = a.civ;
        center.owner_city = city.id;
        detail::claim_tiles(s, city, 1);
        civ.ever_had_city = true;
        ++civ.cities_founded;
        civ.cities.push_back(city);
        City& placed = civ.cities.back();
        detail::assign_worked_tiles(rs, s, placed);
        detail::reveal_around(rs, s, a.civ, pos);
        log_event(rs, s, sink, "found_city", {a.civ}, civ.name + " founded " + city.name, true);
    }

    void operator()(const ImproveTile& a) const {
        Unit* u = find_unit(s, a.unit);
        Tile& tile = s.map.at(u->pos);
        tile.improvement = a.improvement;
        ++tile.improvement_count;
        u->moves_left = 0;
    }

    void operator()(const Attack& a) const { engine.resolve_combat(s, a.unit, a.target, sink); }

    void operator()(const PromoteUnit& a) const {
        Unit* u = find_unit(s, a.unit);
        ++u->promotions;
        u->health = std::min(100, u->health + rs.rules.promotion_heal);
    }

    void operator()(const SetProduction& a) const { find_city(s, a.city)->production = a.item; }

    void operator()(const SetResearch& a) const { s.civ(a.civ).current_research = a.tech; }

    void operator()(const DeclareWar& a) const {
        std::vector<CivId> partners;
        for (const auto& other : s.civs) {
            if (other.id != a.civ && other.id != a.target && other.alive() &&
                s.diplomacy.has(a.target, other.id, Treaty::defensive_pact)) {
                partners.push_back(other.id);
            }
        }
        detail::set_war(rs, s, a.civ, a.target, sink);
        for (CivId p : partners) {
            if (at_war(s, p, a.civ)) continue;
            if (turns_since_transition(s, p, a.civ) < rs.rules.min_turns_peace_to_war) {
                log_event(rs, s, sink, "pact_call_skipped", {p, a.civ},
                          s.civ(p).name + " could not honour its defensive pact yet", false);
                continue;
            }
            detail::set_war(rs, s, p, a.civ, sink);
        }
    }

    void operator()(const OfferPeace& a) const {
        detail::set_peace(rs, s, a.civ, a.target, sink);
        if (a.terms) execute_trade(rs, s, *a.terms, sink);
    }

    void operator()(const SignDefensivePact& a) const {
        detail::sign_treaty(rs, s, a.civ, a.target, Treaty::defensive_pact, sink);
    }
    void operator()(const SignResearchAgreement& a) const {
        s.civ(a.civ).gold -= rs.rules.research_agreement_cost;
        s.civ(a.target).gold -= rs.rules.research_agreement_cost;
        detail::sign_treaty(rs, s, a.civ, a.target, Treaty::research_agreement, sink);
    }
    void operator()(const DeclareFriendship& a) const {
        detail::sign_treaty(rs, s, a.civ, a.target, Treaty::friendship, sink);
    }
    void operator()(const SetOpenBorders& a) const {
        detail::sign_treaty(rs, s, a.civ, a.target, Treaty::open_borders, sink);
    }

    void operator()(const AdjustCloseness& a) const {
        Relation& rel = s.diplomacy.at(a.civ, a.target);
        rel.closeness = std::clamp(rel.closeness + a.delta, rs.rules.closeness_min,
                                   rs.rules.closeness_max);
    }

    void operator()(const ExecuteTrade& a) const { execute_trade(rs, s, a.offer, sink); }

    void operator()(const SendChat& a) const {
        auto& log = s.chat[a.channel];
        log.push_back({static_cast<int>(log.size()) + 1, s.turn, s.civ(a.civ).name, a.text});
    }
};

} // namespace

std::optional<Illegality> Engine::check(const GameState& state, const EngineAction& action) const {
    return std::visit(Checker{*ruleset_, state}, action);
}

std::vector<Event> Engine::apply(GameState& state, const EngineAction& action) const {
    if (auto e = check(state, action)) {
        throw IllegalAction(e->code, e->message);
    }
    std::vector<Event> events;
    std::visit(Applier{*this, *ruleset_, state, &events}, action);
    return events;
}

StepResult apply_action(const Ruleset& ruleset, GameState state, const EngineAction& action) {
    Engine engine(ruleset);
    auto events = engine.apply(state, action);
    return {std::move(state), std::move(events)};
}

} // namespace microciv
