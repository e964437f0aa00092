#include "microciv/persistence.hpp"

#include "microciv/engine.hpp"
#include "microciv/error.hpp"
#include "microciv/queries.hpp"
#include "microciv/scoring.hpp"

namespace microciv {

std::string save_game(const GameState& state) {
    const json doc = {{"schema_version", kSchemaVersion},
                      {"ruleset", {{"id", state.ruleset_id}, {"hash", state.ruleset_hash}}},
                      {"state", encode_state(state)}};
    return doc.dump();
}

GameState load_game(std::string_view bytes, const Ruleset& ruleset) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw SaveError("parse_error", e.what());
    }
    if (!doc.is_object() || !doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
        throw SaveError("schema_error", "save file lacks a schema version");
    }
    const int version = doc["schema_version"].get<int>();
    if (version != kSchemaVersion) {
        throw SaveError("version_mismatch", "unsupported schema version " + std::to_string(version));
    }
    if (!doc.contains("ruleset") || !doc["ruleset"].is_object() || !doc.contains("state")) {
        throw SaveError("schema_error", "save file lacks ruleset or state");
    }
    const json& rs = doc["ruleset"];
    const std::string hash = rs.value("hash", "");
    if (hash != ruleset.content_hash) {
        throw SaveError("ruleset_mismatch", "save was made with ruleset hash " + hash +
                                                ", loaded ruleset has " + ruleset.content_hash);
    }
    GameState state = decode_state(doc["state"]);
    state.ruleset_id = rs.value("id", "");
    state.ruleset_hash = hash;
    Engine(ruleset).validate(state);
    return state;
}

namespace {

json tile_view(const GameState& s, const Tile& t, Coord c, bool visible) {
    json j = {{"x", c.x}, {"y", c.y}, {"terrain", t.terrain}, {"visible", visible}};
    if (!t.feature.empty()) j["feature"] = t.feature;
    if (!t.resource.empty()) j["resource"] = t.resource;
    if (!t.improvement.empty()) {
        j["improvement"] = t.improvement;
        j["improvement_count"] = t.improvement_count;
    }
    if (t.owner) j["owner"] = s.civ(*t.owner).name;
    if (t.road) j["road"] = true;
    return j;
}

json own_unit_view(const Unit& u) {
    return {{"id", idx(u.id)},
            {"type", u.type},
            {"x", u.pos.x},
            {"y", u.pos.y},
            {"health", u.health},
            {"moves_left", u.moves_left},
            {"has_attacked", u.has_attacked},
            {"experience", u.experience},
            {"promotions", u.promotions},
            {"movement_memory", [&] {
                 json out = json::array();
                 for (Coord c : u.movement_memory) out.push_back(encode_coord(c));
                 return out;
             }()}};
}

json own_city_view(const Ruleset& rs, const GameState& s, const City& c) {
    const Yields y = city_yields(rs, s, c);
    json worked = json::array();
    for (Coord w : c.worked_tiles) worked.push_back(encode_coord(w));
    return {{"id", idx(c.id)},
            {"name", c.name},
            {"x", c.pos.x},
            {"y", c.pos.y},
            {"population", c.population},
            {"food_stock", c.food_stock},
            {"growth_threshold", growth_threshold(c.population, rs.rules)},
            {"production", c.production},
            {"production_progress", c.production_progress},
            {"buildings", c.buildings},
            {"health", c.health},
            {"worked_tiles", std::move(worked)},
            {"is_capital", c.is_capital},
            {"connected_to_capital", c.connected_to_capital},
            {"demanded_resource", c.demanded_resource},
            {"yields",
             {{"food", y.food}, {"production", y.production}, {"gold", y.gold}, {"science", y.science}}}};
}

} // namespace

Observation extract_observation(const GameState& s, const Ruleset& rs, CivId viewer) {
    if (idx(viewer) < 0 || idx(viewer) >= static_cast<int>(s.civs.size())) {
        throw Error("unknown_civ", "no civilization " + std::to_string(idx(viewer)));
    }
    const Civilization& me = s.civ(viewer);
    const std::vector<bool> visible = visible_tiles(rs, s, viewer);
    auto explored = [&](Coord c) { return s.map.at(c).explored(viewer); };
    auto sees = [&](Coord c) { return static_cast<bool>(visible[s.map.index_of(c)]); };

    json tiles = json::array();
    for (int i = 0; i < s.map.tile_count(); ++i) {
        const Coord c = s.map.coord_of(i);
        if (explored(c) || visible[i]) tiles.push_back(tile_view(s, s.map.tiles()[i], c, visible[i]));
    }

    json own_units = json::array();
    for (const auto& u : me.units) own_units.push_back(own_unit_view(u));
    json foreign_units = json::array();
    json own_cities = json::array();
    for (const auto& c : me.cities) own_cities.push_back(own_city_view(rs, s, c));
    json foreign_cities = json::array();
    for (const auto& civ : s.civs) {
        if (civ.id == viewer) continue;
        for (const auto& u : civ.units) {
            if (!sees(u.pos)) continue;
            foreign_units.push_back({{"id", idx(u.id)},
                                     {"owner", civ.name},
                                     {"type", u.type},
                                     {"x", u.pos.x},
                                     {"y", u.pos.y},
                                     {"health", u.health}});
        }
        for (const auto& c : civ.cities) {
            if (!explored(c.pos) && !sees(c.pos)) continue;
            json view = {{"id", idx(c.id)}, {"name", c.name}, {"owner", civ.name},
                         {"x", c.pos.x},    {"y", c.pos.y},    {"is_capital", c.is_capital}};
            if (sees(c.pos)) {
                view["population"] = c.population;
                view["health"] = c.health;
            }
            foreign_cities.push_back(std::move(view));
        }
    }

    json technology = {{"researched", me.techs},
                       {"current", me.current_research},
                       {"progress", me.research_progress},
                       {"researchable", researchable_techs(rs, me.techs)},
                       {"science_per_turn", civ_science(rs, s, me)},
                       {"science_history", me.science_history}};

    json diplomacy = json::array();
    json others = json::array();
    json scores = json::object();
    for (const auto& civ : s.civs) {
        scores[civ.name] = encode_score(civ_score(civ, s, rs));
        if (civ.id == viewer) continue;
        others.push_back({{"name", civ.name}, {"alive", civ.alive()}});
        const Relation& rel = s.diplomacy.at(viewer, civ.id);
        json states = json::array();
        for (Treaty t : kAllTreaties) {
            if (rel.has(t)) states.push_back(treaty_name(t));
        }
        json countdowns = json::object();
        for (const auto& [t, n] : rel.countdowns) countdowns[treaty_name(t)] = n;
        diplomacy.push_back({{"civ", civ.name},
                             {"states", std::move(states)},
                             {"countdowns", std::move(countdowns)},
                             {"closeness", rel.closeness}});
    }

    json self = {{"name", me.name},
                 {"gold", me.gold},
                 {"gold_per_turn", civ_gold_income(rs, s, me) - civ_maintenance(rs, me)},
                 {"resources", civ_resources(s, viewer)},
                 {"owned_tiles", owned_tile_count(s, viewer)}};

    json notifications = json::array();
    for (auto it = me.notifications.rbegin();
         it != me.notifications.rend() && notifications.size() < kObservedNotifications; ++it) {
        notifications.push_back({{"turn", it->turn}, {"text", it->text}});
    }
    json events = json::array();
    for (auto it = s.events.rbegin(); it != s.events.rend() && events.size() < kObservedEvents; ++it) {
        if (!it->is_public) continue;
        events.push_back({{"turn", it->turn}, {"kind", it->kind}, {"text", it->text}});
    }
    json dialogue = json::object();
    for (const auto& [channel, messages] : s.chat) {
        if (!channel_member(channel, me.name)) continue;
        json list = json::array();
        for (const auto& m : messages) {
            list.push_back({{"seq", m.seq}, {"turn", m.turn}, {"sender", m.sender}, {"text", m.text}});
        }
        dialogue[channel] = std::move(list);
    }

    Observation obs;
    obs.viewer = viewer;
    obs.turn = s.turn;
    obs.body = {{"viewer", me.name},
                {"turn", s.turn},
                {"map", {{"width", s.map.width()}, {"height", s.map.height()}, {"tiles", std::move(tiles)}}},
                {"units", {{"own", std::move(own_units)}, {"foreign", std::move(foreign_units)}}},
                {"cities", {{"own", std::move(own_cities)}, {"foreign", std::move(foreign_cities)}}},
                {"technology", std::move(technology)},
                {"diplomacy", std::move(diplomacy)},
                {"civilizations", {{"self", std::move(self)}, {"others", std::move(others)}}},
                {"scores", std::move(scores)},
                {"notifications", std::move(notifications)},
                {"events", std::move(events)},
                {"dialogue", std::move(dialogue)},
                {"religion", json::object()},
                {"espionage", json::object()}};
    return obs;
}

} // namespace microciv
