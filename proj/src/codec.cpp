#include "microciv/codec.hpp"

#include "microciv/error.hpp"

#include <cstdlib>

namespace microciv {

namespace {

[[noreturn]] void bad(const std::string& what) {
    throw SaveError("schema_error", what);
}

CivId civ_id(const json& j) { return CivId{j.get<int>()}; }

json encode_coords(const std::vector<Coord>& cs) {
    json out = json::array();
    for (Coord c : cs) out.push_back(encode_coord(c));
    return out;
}

std::vector<Coord> decode_coords(const json& j) {
    std::vector<Coord> out;
    for (const auto& c : j) out.push_back(decode_coord(c));
    return out;
}

Treaty treaty_of(const json& j) {
    const auto t = treaty_from_name(j.get<std::string>());
    if (!t) bad("unknown treaty " + j.get<std::string>());
    return *t;
}

json encode_tile(const Tile& t) {
    json j = {{"terrain", t.terrain}};
    if (!t.feature.empty()) j["feature"] = t.feature;
    if (!t.resource.empty()) j["resource"] = t.resource;
    if (!t.improvement.empty()) j["improvement"] = t.improvement;
    if (t.improvement_count != 0) j["improvement_count"] = t.improvement_count;
    if (t.owner) j["owner"] = idx(*t.owner);
    if (t.owner_city) j["owner_city"] = idx(*t.owner_city);
    if (t.road) j["road"] = true;
    if (t.explored_by != 0) j["explored_by"] = t.explored_by;
    return j;
}

Tile decode_tile(const json& j) {
    Tile t;
    t.terrain = j.at("terrain").get<std::string>();
    t.feature = j.value("feature", "");
    t.resource = j.value("resource", "");
    t.improvement = j.value("improvement", "");
    t.improvement_count = j.value("improvement_count", 0);
    if (j.contains("owner")) t.owner = civ_id(j.at("owner"));
    if (j.contains("owner_city")) t.owner_city = CityId{j.at("owner_city").get<int>()};
    t.road = j.value("road", false);
    t.explored_by = j.value("explored_by", std::uint32_t{0});
    return t;
}

json encode_unit(const Unit& u) {
    return {{"id", idx(u.id)},
            {"type", u.type},
            {"owner", idx(u.owner)},
            {"original_owner", idx(u.original_owner)},
            {"pos", encode_coord(u.pos)},
            {"health", u.health},
            {"moves_left", u.moves_left},
            {"has_attacked", u.has_attacked},
            {"experience", u.experience},
            {"promotions", u.promotions},
            {"movement_memory", encode_coords(u.movement_memory)}};
}

Unit decode_unit(const json& j) {
    Unit u;
    u.id = UnitId{j.at("id").get<int>()};
    u.type = j.at("type").get<std::string>();
    u.owner = civ_id(j.at("owner"));
    u.original_owner = civ_id(j.at("original_owner"));
    u.pos = decode_coord(j.at("pos"));
    u.health = j.at("health").get<int>();
    u.moves_left = j.at("moves_left").get<int>();
    u.has_attacked = j.at("has_attacked").get<bool>();
    u.experience = j.at("experience").get<int>();
    u.promotions = j.at("promotions").get<int>();
    u.movement_memory = decode_coords(j.at("movement_memory"));
    return u;
}

json encode_city(const City& c) {
    return {{"id", idx(c.id)},
            {"name", c.name},
            {"pos", encode_coord(c.pos)},
            {"owner", idx(c.owner)},
            {"founder", idx(c.founder)},
            {"population", c.population},
            {"food_stock", c.food_stock},
            {"production", c.production},
            {"production_progress", c.production_progress},
            {"buildings", c.buildings},
            {"health", c.health},
            {"worked_tiles", encode_coords(c.worked_tiles)},
            {"is_original_capital", c.is_original_capital},
            {"is_capital", c.is_capital},
            {"connected_to_capital", c.connected_to_capital},
            {"demanded_resource", c.demanded_resource},
            {"founded_turn", c.founded_turn},
            {"last_attacked_turn", c.last_attacked_turn}};
}

City decode_city(const json& j) {
    City c;
    c.id = CityId{j.at("id").get<int>()};
    c.name = j.at("name").get<std::string>();
    c.pos = decode_coord(j.at("pos"));
    c.owner = civ_id(j.at("owner"));
    c.founder = civ_id(j.at("founder"));
    c.population = j.at("population").get<int>();
    c.food_stock = j.at("food_stock").get<int>();
    c.production = j.at("production").get<std::string>();
    c.production_progress = j.at("production_progress").get<int>();
    c.buildings = j.at("buildings").get<std::set<std::string>>();
    c.health = j.at("health").get<int>();
    c.worked_tiles = decode_coords(j.at("worked_tiles"));
    c.is_original_capital = j.at("is_original_capital").get<bool>();
    c.is_capital = j.at("is_capital").get<bool>();
    c.connected_to_capital = j.at("connected_to_capital").get<bool>();
    c.demanded_resource = j.at("demanded_resource").get<std::string>();
    c.founded_turn = j.at("founded_turn").get<int>();
    c.last_attacked_turn = j.at("last_attacked_turn").get<int>();
    return c;
}

json encode_civ(const Civilization& c) {
    json notes = json::array();
    for (const auto& n : c.notifications) notes.push_back({{"turn", n.turn}, {"text", n.text}});
    json cities = json::array();
    for (const auto& city : c.cities) cities.push_back(encode_city(city));
    json units = json::array();
    for (const auto& u : c.units) units.push_back(encode_unit(u));
    return {{"id", idx(c.id)},
            {"name", c.name},
            {"ever_had_city", c.ever_had_city},
            {"gold", c.gold},
            {"techs", c.techs},
            {"current_research", c.current_research},
            {"research_progress", c.research_progress},
            {"science_history", c.science_history},
            {"notifications", std::move(notes)},
            {"cities", std::move(cities)},
            {"units", std::move(units)},
            {"cities_founded", c.cities_founded}};
}

Civilization decode_civ(const json& j) {
    Civilization c;
    c.id = civ_id(j.at("id"));
    c.name = j.at("name").get<std::string>();
    c.ever_had_city = j.at("ever_had_city").get<bool>();
    c.gold = j.at("gold").get<int>();
    c.techs = j.at("techs").get<std::set<std::string>>();
    c.current_research = j.at("current_research").get<std::string>();
    c.research_progress = j.at("research_progress").get<int>();
    c.science_history = j.at("science_history").get<std::deque<int>>();
    for (const auto& n : j.at("notifications")) {
        c.notifications.push_back({n.at("turn").get<int>(), n.at("text").get<std::string>()});
    }
    for (const auto& city : j.at("cities")) c.cities.push_back(decode_city(city));
    for (const auto& u : j.at("units")) c.units.push_back(decode_unit(u));
    c.cities_founded = j.at("cities_founded").get<int>();
    return c;
}

json encode_relation(std::pair<int, int> key, const Relation& r) {
    json states = json::array();
    json countdowns = json::object();
    for (Treaty t : kAllTreaties) {
        if (r.has(t)) states.push_back(treaty_name(t));
    }
    for (const auto& [t, n] : r.countdowns) countdowns[treaty_name(t)] = n;
    json history = json::array();
    for (const auto& h : r.history) {
        history.push_back({{"turn", h.turn}, {"kind", h.kind}, {"actor", idx(h.actor)}});
    }
    return {{"a", key.first},
            {"b", key.second},
            {"states", std::move(states)},
            {"countdowns", std::move(countdowns)},
            {"closeness", r.closeness},
            {"last_transition_turn", r.last_transition_turn},
            {"history", std::move(history)}};
}

json encode_bundle(const TradeBundle& b) {
    json cities = json::array();
    for (CityId c : b.cities) cities.push_back(idx(c));
    json treaties = json::array();
    for (Treaty t : b.treaties) treaties.push_back(treaty_name(t));
    return {{"gold", b.gold},
            {"resources", b.resources},
            {"cities", std::move(cities)},
            {"treaties", std::move(treaties)}};
}

TradeBundle decode_bundle(const json& j) {
    TradeBundle b;
    b.gold = j.value("gold", 0);
    if (j.contains("resources")) b.resources = j.at("resources").get<std::map<std::string, int>>();
    if (j.contains("cities")) {
        for (const auto& c : j.at("cities")) b.cities.push_back(CityId{c.get<int>()});
    }
    if (j.contains("treaties")) {
        for (const auto& t : j.at("treaties")) b.treaties.push_back(treaty_of(t));
    }
    return b;
}

template <typename T>
T with_schema(const char* what, auto&& fn) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        bad(std::string("malformed ") + what + ": " + e.what());
    }
}

} // namespace

json encode_coord(Coord c) { return {{"x", c.x}, {"y", c.y}}; }

Coord decode_coord(const json& j) {
    return with_schema<Coord>("coordinate", [&] {
        return Coord{j.at("x").get<int>(), j.at("y").get<int>()};
    });
}

json encode_event(const Event& e) {
    json civs = json::array();
    for (CivId c : e.civs) civs.push_back(idx(c));
    return {{"turn", e.turn},
            {"kind", e.kind},
            {"civs", std::move(civs)},
            {"text", e.text},
            {"public", e.is_public}};
}

Event decode_event(const json& j) {
    return with_schema<Event>("event", [&] {
        Event e;
        e.turn = j.at("turn").get<int>();
        e.kind = j.at("kind").get<std::string>();
        for (const auto& c : j.at("civs")) e.civs.push_back(civ_id(c));
        e.text = j.at("text").get<std::string>();
        e.is_public = j.at("public").get<bool>();
        return e;
    });
}

json encode_state(const GameState& s) {
    json tiles = json::array();
    for (const auto& t : s.map.tiles()) tiles.push_back(encode_tile(t));
    json civs = json::array();
    for (const auto& c : s.civs) civs.push_back(encode_civ(c));
    json diplomacy = json::array();
    for (const auto& [key, rel] : s.diplomacy.relations) diplomacy.push_back(encode_relation(key, rel));
    json trades = json::array();
    for (const auto& t : s.resource_trades) {
        trades.push_back({{"from", idx(t.from)},
                          {"to", idx(t.to)},
                          {"resource", t.resource},
                          {"quantity", t.quantity},
                          {"turns_left", t.turns_left}});
    }
    json events = json::array();
    for (const auto& e : s.events) events.push_back(encode_event(e));
    json chat = json::object();
    for (const auto& [channel, messages] : s.chat) {
        json list = json::array();
        for (const auto& m : messages) {
            list.push_back({{"seq", m.seq}, {"turn", m.turn}, {"sender", m.sender}, {"text", m.text}});
        }
        chat[channel] = std::move(list);
    }
    json counters = json::object();
    for (const auto& [stream, n] : s.rng.counters()) counters[stream] = n;
    return {{"game_id", s.game_id},
            {"turn", s.turn},
            {"map", {{"width", s.map.width()}, {"height", s.map.height()}, {"tiles", std::move(tiles)}}},
            {"civs", std::move(civs)},
            {"diplomacy", std::move(diplomacy)},
            {"resource_trades", std::move(trades)},
            {"events", std::move(events)},
            {"chat", std::move(chat)},
            {"rng", {{"seed", to_hex(s.rng.seed())}, {"counters", std::move(counters)}}},
            {"next_unit_id", s.next_unit_id},
            {"next_city_id", s.next_city_id}};
}

GameState decode_state(const json& j) {
    return with_schema<GameState>("state", [&] {
        GameState s;
        s.game_id = j.at("game_id").get<std::string>();
        s.turn = j.at("turn").get<int>();
        const json& map = j.at("map");
        const int w = map.at("width").get<int>();
        const int h = map.at("height").get<int>();
        if (w <= 0 || h <= 0 || w > 1024 || h > 1024) bad("map dimensions out of range");
        const json& tiles = map.at("tiles");
        if (!tiles.is_array() || static_cast<int>(tiles.size()) != w * h) {
            bad("tile count does not match map dimensions");
        }
        s.map = HexMap(w, h);
        for (int i = 0; i < w * h; ++i) s.map.tiles()[i] = decode_tile(tiles[i]);
        for (const auto& c : j.at("civs")) s.civs.push_back(decode_civ(c));
        for (const auto& r : j.at("diplomacy")) {
            Relation rel;
            for (const auto& name : r.at("states")) rel.set(treaty_of(name));
            for (const auto& [name, n] : r.at("countdowns").items()) {
                const auto t = treaty_from_name(name);
                if (!t) bad("unknown treaty " + name);
                rel.countdowns[*t] = n.get<int>();
            }
            rel.closeness = r.at("closeness").get<int>();
            rel.last_transition_turn = r.at("last_transition_turn").get<int>();
            for (const auto& h : r.at("history")) {
                rel.history.push_back({h.at("turn").get<int>(), h.at("kind").get<std::string>(),
                                       civ_id(h.at("actor"))});
            }
            s.diplomacy.relations[{r.at("a").get<int>(), r.at("b").get<int>()}] = std::move(rel);
        }
        for (const auto& t : j.at("resource_trades")) {
            s.resource_trades.push_back({civ_id(t.at("from")), civ_id(t.at("to")),
                                         t.at("resource").get<std::string>(),
                                         t.at("quantity").get<int>(), t.at("turns_left").get<int>()});
        }
        for (const auto& e : j.at("events")) s.events.push_back(decode_event(e));
        for (const auto& [channel, list] : j.at("chat").items()) {
            auto& messages = s.chat[channel];
            for (const auto& m : list) {
                messages.push_back({m.at("seq").get<int>(), m.at("turn").get<int>(),
                                    m.at("sender").get<std::string>(), m.at("text").get<std::string>()});
            }
        }
        const json& rng = j.at("rng");
        const std::string seed = rng.at("seed").get<std::string>();
        char* end = nullptr;
        const std::uint64_t seed_value = std::strtoull(seed.c_str(), &end, 16);
        if (seed.empty() || *end != '\0') bad("rng seed is not hexadecimal");
        s.rng.reseed(seed_value);
        for (const auto& [stream, n] : rng.at("counters").items()) {
            s.rng.set_counter(stream, n.get<std::uint64_t>());
        }
        s.next_unit_id = j.at("next_unit_id").get<int>();
        s.next_city_id = j.at("next_city_id").get<int>();
        return s;
    });
}

json encode_trade(const TradeOffer& o) {
    return {{"proposer", idx(o.proposer)},
            {"target", idx(o.target)},
            {"give", encode_bundle(o.give)},
            {"receive", encode_bundle(o.receive)},
            {"duration", o.duration}};
}

TradeOffer decode_trade(const json& j) {
    return with_schema<TradeOffer>("trade", [&] {
        TradeOffer o;
        o.proposer = civ_id(j.at("proposer"));
        o.target = civ_id(j.at("target"));
        if (j.contains("give")) o.give = decode_bundle(j.at("give"));
        if (j.contains("receive")) o.receive = decode_bundle(j.at("receive"));
        o.duration = j.value("duration", 30);
        return o;
    });
}

json encode_action(const EngineAction& action) {
    json j = std::visit(
        [](const auto& a) -> json {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, MoveUnit>) {
                return {{"civ", idx(a.civ)}, {"unit", idx(a.unit)}, {"to", encode_coord(a.to)}};
            } else if constexpr (std::is_same_v<T, FoundCity> || std::is_same_v<T, PromoteUnit>) {
                return {{"civ", idx(a.civ)}, {"unit", idx(a.unit)}};
            } else if constexpr (std::is_same_v<T, ImproveTile>) {
                return {{"civ", idx(a.civ)}, {"unit", idx(a.unit)}, {"improvement", a.improvement}};
            } else if constexpr (std::is_same_v<T, Attack>) {
                json target;
                if (const auto* u = std::get_if<UnitId>(&a.target)) {
                    target = {{"unit", idx(*u)}};
                } else {
                    target = {{"city", idx(std::get<CityId>(a.target))}};
                }
                return {{"civ", idx(a.civ)}, {"unit", idx(a.unit)}, {"target", std::move(target)}};
            } else if constexpr (std::is_same_v<T, SetProduction>) {
                return {{"civ", idx(a.civ)}, {"city", idx(a.city)}, {"item", a.item}};
            } else if constexpr (std::is_same_v<T, SetResearch>) {
                return {{"civ", idx(a.civ)}, {"tech", a.tech}};
            } else if constexpr (std::is_same_v<T, OfferPeace>) {
                json out = {{"civ", idx(a.civ)}, {"target", idx(a.target)}};
                if (a.terms) out["terms"] = encode_trade(*a.terms);
                return out;
            } else if constexpr (std::is_same_v<T, AdjustCloseness>) {
                return {{"civ", idx(a.civ)}, {"target", idx(a.target)}, {"delta", a.delta}};
            } else if constexpr (std::is_same_v<T, ExecuteTrade>) {
                return {{"offer", encode_trade(a.offer)}};
            } else if constexpr (std::is_same_v<T, SendChat>) {
                return {{"civ", idx(a.civ)}, {"channel", a.channel}, {"text", a.text}};
            } else {
                return {{"civ", idx(a.civ)}, {"target", idx(a.target)}};
            }
        },
        action);
    j["kind"] = action_kind(action);
    return j;
}

EngineAction decode_action(const json& j) {
    return with_schema<EngineAction>("action", [&]() -> EngineAction {
        const std::string kind = j.at("kind").get<std::string>();
        auto civ = [&] { return civ_id(j.at("civ")); };
        auto unit = [&] { return UnitId{j.at("unit").get<int>()}; };
        auto target = [&] { return civ_id(j.at("target")); };
        if (kind == "move_unit") return MoveUnit{civ(), unit(), decode_coord(j.at("to"))};
        if (kind == "found_city") return FoundCity{civ(), unit()};
        if (kind == "improve_tile") {
            return ImproveTile{civ(), unit(), j.at("improvement").get<std::string>()};
        }
        if (kind == "attack") {
            const json& t = j.at("target");
            CombatTarget ct;
            if (t.contains("unit")) {
                ct = UnitId{t.at("unit").get<int>()};
            } else {
                ct = CityId{t.at("city").get<int>()};
            }
            return Attack{civ(), unit(), ct};
        }
        if (kind == "promote_unit") return PromoteUnit{civ(), unit()};
        if (kind == "set_production") {
            return SetProduction{civ(), CityId{j.at("city").get<int>()}, j.at("item").get<std::string>()};
        }
        if (kind == "set_research") return SetResearch{civ(), j.at("tech").get<std::string>()};
        if (kind == "declare_war") return DeclareWar{civ(), target()};
        if (kind == "offer_peace") {
            OfferPeace p{civ(), target(), std::nullopt};
            if (j.contains("terms")) p.terms = decode_trade(j.at("terms"));
            return p;
        }
        if (kind == "sign_defensive_pact") return SignDefensivePact{civ(), target()};
        if (kind == "sign_research_agreement") return SignResearchAgreement{civ(), target()};
        if (kind == "declare_friendship") return DeclareFriendship{civ(), target()};
        if (kind == "set_open_borders") return SetOpenBorders{civ(), target()};
        if (kind == "adjust_closeness") {
            return AdjustCloseness{civ(), target(), j.at("delta").get<int>()};
        }
        if (kind == "execute_trade") return ExecuteTrade{decode_trade(j.at("offer"))};
        if (kind == "send_chat") {
            return SendChat{civ(), j.at("channel").get<std::string>(), j.at("text").get<std::string>()};
        }
        bad("unknown action kind " + kind);
    });
}

json encode_score(const ScoreBreakdown& b) {
    return {{"S", b.S}, {"N", b.N}, {"C", b.C}, {"P", b.P}, {"G", b.G}, {"T", b.T},
            {"F", b.F}, {"H", b.H}, {"W", b.W}, {"A", b.A}};
}

} // namespace microciv
