#include "microciv/ruleset.hpp"

#include "microciv/error.hpp"
#include "microciv/rng.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace microciv {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxTerrains = 9;
constexpr std::size_t kMaxFeatures = 23;
constexpr std::size_t kMaxResources = 35;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return fallback;
    }
    return it->get<T>();
}

std::string require_id(const json& j, const char* key, const char* section) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw RulesetError("schema_error", std::string("missing '") + key + "' in " + section);
    }
    return it->get<std::string>();
}

Yields parse_yields(const json& j) {
    Yields y;
    if (j.is_null()) {
        return y;
    }
    y.food = get_or(j, "food", 0);
    y.production = get_or(j, "production", 0);
    y.gold = get_or(j, "gold", 0);
    y.science = get_or(j, "science", 0);
    return y;
}

std::vector<std::string> string_list(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return {};
    }
    return it->get<std::vector<std::string>>();
}

const json& section(const json& doc, const char* key) {
    static const json empty = json::array();
    auto it = doc.find(key);
    if (it == doc.end()) {
        return empty;
    }
    if (!it->is_array()) {
        throw RulesetError("schema_error", std::string("'") + key + "' must be a list");
    }
    return *it;
}

void non_negative(int value, const std::string& what) {
    if (value < 0) {
        throw RulesetError("negative_value", what + " must be >= 0");
    }
}

GameRules parse_rules(const json& j) {
    GameRules r;
    if (j.is_null()) {
        return r;
    }
    auto take = [&](const char* key, int& field) { field = get_or(j, key, field); };
    take("starting_gold", r.starting_gold);
    take("heal_in_city", r.heal_in_city);
    take("heal_in_borders", r.heal_in_borders);
    take("heal_outside", r.heal_outside);
    take("promotion_heal", r.promotion_heal);
    take("promotion_xp_step", r.promotion_xp_step);
    take("combat_xp", r.combat_xp);
    take("min_turns_war_to_peace", r.min_turns_war_to_peace);
    take("min_turns_peace_to_war", r.min_turns_peace_to_war);
    take("military_population_cost", r.military_population_cost);
    take("city_max_health", r.city_max_health);
    take("city_recovery", r.city_recovery);
    take("city_capture_health", r.city_capture_health);
    take("city_work_radius", r.city_work_radius);
    take("city_min_distance", r.city_min_distance);
    take("sight_radius", r.sight_radius);
    take("treaty_duration", r.treaty_duration);
    take("research_agreement_cost", r.research_agreement_cost);
    take("research_agreement_bonus_pct", r.research_agreement_bonus_pct);
    take("luxury_food_per_copy", r.luxury_food_per_copy);
    take("food_per_population", r.food_per_population);
    take("growth_base", r.growth_base);
    take("growth_per_population", r.growth_per_population);
    take("city_base_defense", r.city_base_defense);
    take("city_defense_per_population", r.city_defense_per_population);
    take("closeness_min", r.closeness_min);
    take("closeness_max", r.closeness_max);
    take("event_log_capacity", r.event_log_capacity);
    take("notification_capacity", r.notification_capacity);
    take("resource_density_pct", r.resource_density_pct);
    take("edge_water_pct", r.edge_water_pct);
    if (auto it = j.find("starting_units"); it != j.end()) {
        r.starting_units = it->get<std::vector<std::string>>();
    }
    r.combat_base_damage = get_or(j, "combat_base_damage", r.combat_base_damage);
    r.combat_exponent = get_or(j, "combat_exponent", r.combat_exponent);
    if (auto it = j.find("city_center_bonus"); it != j.end()) {
        r.city_center_bonus = parse_yields(*it);
    }
    return r;
}

template <typename Defs>
void index_ids(const Defs& defs, std::unordered_map<std::string, std::size_t>& idx,
               const char* kind) {
    idx.clear();
    for (std::size_t i = 0; i < defs.size(); ++i) {
        if (!idx.emplace(defs[i].id, i).second) {
            throw RulesetError("duplicate_id", std::string("duplicate ") + kind + " id '" +
                                                   defs[i].id + "'");
        }
    }
}

template <typename Defs>
auto lookup(const Defs& defs, const std::unordered_map<std::string, std::size_t>& idx,
            std::string_view id) -> decltype(&defs[0]) {
    auto it = idx.find(std::string(id));
    return it == idx.end() ? nullptr : &defs[it->second];
}

void check_tech_graph(const Ruleset& rs) {
    // Iterative DFS with colours; reports the first back edge found in
    // ruleset order.
    enum Colour { white, grey, black };
    std::vector<Colour> colour(rs.techs.size(), white);
    std::map<std::string, std::size_t> at;
    for (std::size_t i = 0; i < rs.techs.size(); ++i) {
        at[rs.techs[i].id] = i;
    }
    for (std::size_t root = 0; root < rs.techs.size(); ++root) {
        if (colour[root] != white) {
            continue;
        }
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        colour[root] = grey;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            const auto& prereqs = rs.techs[node].prerequisites;
            if (next == prereqs.size()) {
                colour[node] = black;
                stack.pop_back();
                continue;
            }
            const std::size_t child = at.at(prereqs[next++]);
            if (colour[child] == grey) {
                throw RulesetError("tech_cycle", "tech prerequisite cycle through '" +
                                                     rs.techs[child].id + "'");
            }
            if (colour[child] == white) {
                colour[child] = grey;
                stack.emplace_back(child, 0);
            }
        }
    }
}

void validate(const Ruleset& rs) {
    if (rs.terrains.size() > kMaxTerrains) {
        throw RulesetError("too_many", "at most 9 base terrains are supported");
    }
    if (rs.features.size() > kMaxFeatures) {
        throw RulesetError("too_many", "at most 23 terrain features are supported");
    }
    if (rs.resources.size() > kMaxResources) {
        throw RulesetError("too_many", "at most 35 resources are supported");
    }

    auto need_terrain = [&](const std::string& id, const std::string& owner) {
        if (!rs.terrain(id)) {
            throw RulesetError("dangling_reference",
                               owner + " references unknown terrain '" + id + "'");
        }
    };
    for (const auto& t : rs.terrains) {
        non_negative(t.movement_cost, "terrain '" + t.id + "' movement_cost");
    }
    for (const auto& f : rs.features) {
        non_negative(f.movement_cost_extra, "feature '" + f.id + "' movement_cost_extra");
        for (const auto& t : f.terrains) need_terrain(t, "feature '" + f.id + "'");
    }
    for (const auto& r : rs.resources) {
        for (const auto& t : r.terrains) need_terrain(t, "resource '" + r.id + "'");
    }
    for (const auto& i : rs.improvements) {
        for (const auto& t : i.terrains) need_terrain(t, "improvement '" + i.id + "'");
        if (i.max_applications < 0 || i.max_applications > 3) {
            throw RulesetError("schema_error", "improvement '" + i.id +
                                                   "' max_applications must be in [0,3]");
        }
    }
    for (const auto& t : rs.techs) {
        non_negative(t.cost, "tech '" + t.id + "' cost");
        for (const auto& p : t.prerequisites) {
            if (!rs.tech(p)) {
                throw RulesetError("dangling_reference",
                                   "tech '" + t.id + "' requires unknown tech '" + p + "'");
            }
        }
        for (const auto& u : t.unlocks) {
            if (!rs.building(u) && !rs.unit_type(u)) {
                throw RulesetError("dangling_reference",
                                   "tech '" + t.id + "' unlocks unknown item '" + u + "'");
            }
        }
    }
    for (const auto& b : rs.buildings) {
        non_negative(b.cost, "building '" + b.id + "' cost");
        non_negative(b.maintenance, "building '" + b.id + "' maintenance");
        if (rs.unit_type(b.id)) {
            throw RulesetError("duplicate_id", "id '" + b.id + "' is both a building and a unit");
        }
    }
    for (const auto& u : rs.unit_types) {
        non_negative(u.cost, "unit '" + u.id + "' cost");
        non_negative(u.maintenance, "unit '" + u.id + "' maintenance");
        non_negative(u.strength, "unit '" + u.id + "' strength");
        non_negative(u.range, "unit '" + u.id + "' range");
        non_negative(u.movement, "unit '" + u.id + "' movement");
    }
    for (const auto& u : rs.rules.starting_units) {
        if (!rs.unit_type(u)) {
            throw RulesetError("dangling_reference", "starting unit '" + u + "' is not a unit type");
        }
    }
    check_tech_graph(rs);
}

} // namespace

const TerrainDef* Ruleset::terrain(std::string_view id) const { return lookup(terrains, terrain_idx_, id); }
const FeatureDef* Ruleset::feature(std::string_view id) const { return lookup(features, feature_idx_, id); }
const ResourceDef* Ruleset::resource(std::string_view id) const { return lookup(resources, resource_idx_, id); }
const TechDef* Ruleset::tech(std::string_view id) const { return lookup(techs, tech_idx_, id); }
const BuildingDef* Ruleset::building(std::string_view id) const { return lookup(buildings, building_idx_, id); }
const UnitTypeDef* Ruleset::unit_type(std::string_view id) const { return lookup(unit_types, unit_idx_, id); }
const ImprovementDef* Ruleset::improvement(std::string_view id) const { return lookup(improvements, improvement_idx_, id); }

const NationDef* Ruleset::nation(std::string_view name) const {
    auto it = nation_idx_.find(std::string(name));
    return it == nation_idx_.end() ? nullptr : &nations[it->second];
}

bool Ruleset::is_tech_gated(std::string_view item) const { return gated_.contains(item); }

void Ruleset::index() {
    index_ids(terrains, terrain_idx_, "terrain");
    index_ids(features, feature_idx_, "feature");
    index_ids(resources, resource_idx_, "resource");
    index_ids(techs, tech_idx_, "tech");
    index_ids(buildings, building_idx_, "building");
    index_ids(unit_types, unit_idx_, "unit");
    index_ids(improvements, improvement_idx_, "improvement");
    nation_idx_.clear();
    for (std::size_t i = 0; i < nations.size(); ++i) {
        if (!nation_idx_.emplace(nations[i].name, i).second) {
            throw RulesetError("duplicate_id", "duplicate nation '" + nations[i].name + "'");
        }
    }
    gated_.clear();
    for (const auto& t : techs) {
        gated_.insert(t.unlocks.begin(), t.unlocks.end());
    }
}

Ruleset parse_ruleset(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw RulesetError("parse_error", std::string("ruleset parse error: ") + e.what());
    }
    if (!doc.is_object()) {
        throw RulesetError("parse_error", "ruleset document must be an object");
    }

    Ruleset rs;
    try {
        rs.id = get_or<std::string>(doc, "id", "unnamed");
        rs.version = get_or<std::string>(doc, "version", "0");

        for (const auto& j : section(doc, "terrains")) {
            TerrainDef t;
            t.id = require_id(j, "id", "terrains");
            t.yields = parse_yields(j.value("yields", json()));
            t.movement_cost = get_or(j, "movement_cost", 1);
            t.is_water = get_or(j, "is_water", false);
            t.impassable = get_or(j, "impassable", false);
            t.frequency = get_or(j, "frequency", 10);
            rs.terrains.push_back(std::move(t));
        }
        for (const auto& j : section(doc, "features")) {
            FeatureDef f;
            f.id = require_id(j, "id", "features");
            f.yields = parse_yields(j.value("yields", json()));
            f.movement_cost_extra = get_or(j, "movement_cost_extra", 0);
            f.terrains = string_list(j, "terrains");
            f.frequency = get_or(j, "frequency", 0);
            rs.features.push_back(std::move(f));
        }
        for (const auto& j : section(doc, "resources")) {
            ResourceDef r;
            r.id = require_id(j, "id", "resources");
            const auto kind = get_or<std::string>(j, "kind", "bonus");
            if (kind == "strategic") {
                r.kind = ResourceKind::strategic;
            } else if (kind == "luxury") {
                r.kind = ResourceKind::luxury;
            } else if (kind == "bonus") {
                r.kind = ResourceKind::bonus;
            } else {
                throw RulesetError("schema_error", "resource '" + r.id + "' has unknown kind '" + kind + "'");
            }
            r.yields = parse_yields(j.value("yields", json()));
            r.terrains = string_list(j, "terrains");
            rs.resources.push_back(std::move(r));
        }
        for (const auto& j : section(doc, "techs")) {
            TechDef t;
            t.id = require_id(j, "id", "techs");
            t.era = get_or(j, "era", 1);
            t.cost = get_or(j, "cost", 0);
            t.prerequisites = string_list(j, "prerequisites");
            t.unlocks = string_list(j, "unlocks");
            t.future = get_or(j, "future", false);
            rs.techs.push_back(std::move(t));
        }
        for (const auto& j : section(doc, "buildings")) {
            BuildingDef b;
            b.id = require_id(j, "id", "buildings");
            b.cost = get_or(j, "cost", 0);
            b.maintenance = get_or(j, "maintenance", 0);
            b.yields = parse_yields(j.value("yields", json()));
            b.is_wonder = get_or(j, "is_wonder", false);
            rs.buildings.push_back(std::move(b));
        }
        for (const auto& j : section(doc, "unit_types")) {
            UnitTypeDef u;
            u.id = require_id(j, "id", "unit_types");
            u.cost = get_or(j, "cost", 0);
            u.maintenance = get_or(j, "maintenance", 0);
            u.strength = get_or(j, "strength", 0);
            u.range = get_or(j, "range", 0);
            u.movement = get_or(j, "movement", 1);
            u.is_water = get_or(j, "is_water", false);
            u.is_military = get_or(j, "is_military", false);
            u.can_found_city = get_or(j, "can_found_city", false);
            u.can_improve = get_or(j, "can_improve", false);
            rs.unit_types.push_back(std::move(u));
        }
        for (const auto& j : section(doc, "improvements")) {
            ImprovementDef i;
            i.id = require_id(j, "id", "improvements");
            i.yields = parse_yields(j.value("yields", json()));
            i.terrains = string_list(j, "terrains");
            i.max_applications = get_or(j, "max_applications", 3);
            rs.improvements.push_back(std::move(i));
        }
        for (const auto& j : section(doc, "nations")) {
            NationDef n;
            n.name = require_id(j, "name", "nations");
            n.city_names = string_list(j, "city_names");
            rs.nations.push_back(std::move(n));
        }
        rs.rules = parse_rules(doc.value("rules", json()));
    } catch (const json::exception& e) {
        throw RulesetError("schema_error", std::string("ruleset schema error: ") + e.what());
    }

    rs.index();
    validate(rs);
    rs.content_hash = to_hex(fnv1a64(doc.dump()));
    return rs;
}

Ruleset load_ruleset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw RulesetError("io_error", "cannot open ruleset '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ruleset(buf.str());
}

std::vector<std::string> researchable_techs(const Ruleset& ruleset,
                                            const std::set<std::string>& researched) {
    for (const auto& id : researched) {
        if (!ruleset.tech(id)) {
            throw RulesetError("unknown_tech", "unknown tech '" + id + "'");
        }
    }
    std::vector<std::string> out;
    for (const auto& t : ruleset.techs) {
        if (researched.contains(t.id)) {
            continue;
        }
        bool ready = true;
        for (const auto& p : t.prerequisites) {
            if (!researched.contains(p)) {
                ready = false;
                break;
            }
        }
        if (ready) {
            out.push_back(t.id);
        }
    }
    return out;
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("MICROCIV_DATA_DIR"); env && *env) {
        return env;
    }
#ifdef MICROCIV_SOURCE_DATA_DIR
    return MICROCIV_SOURCE_DATA_DIR;
#else
    return "data";
#endif
}

std::filesystem::path default_ruleset_path() { return default_data_dir() / "rulesets" / "mini.json"; }

} // namespace microciv
