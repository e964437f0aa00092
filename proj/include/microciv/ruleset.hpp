#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace microciv {

struct Yields {
    int food = 0;
    int production = 0;
    int gold = 0;
    int science = 0;

    Yields& operator+=(const Yields& o) noexcept {
        food += o.food;
        production += o.production;
        gold += o.gold;
        science += o.science;
        return *this;
    }
    friend Yields operator+(Yields a, const Yields& b) noexcept { return a += b; }
    int total() const noexcept { return food + production + gold + science; }
    bool operator==(const Yields&) const = default;
};

struct TerrainDef {
    std::string id;
    Yields yields;
    int movement_cost = 1;
    bool is_water = false;
    bool impassable = false;
    int frequency = 10; // map generation weight
};

struct FeatureDef {
    std::string id;
    Yields yields;
    int movement_cost_extra = 0;
    std::vector<std::string> terrains;
    int frequency = 0; // percent chance on an eligible tile
};

enum class ResourceKind { strategic, luxury, bonus };

struct ResourceDef {
    std::string id;
    ResourceKind kind = ResourceKind::bonus;
    Yields yields;
    std::vector<std::string> terrains;
};

struct TechDef {
    std::string id;
    int era = 1;
    int cost = 0;
    std::vector<std::string> prerequisites;
    std::vector<std::string> unlocks;
    bool future = false;
};

struct BuildingDef {
    std::string id;
    int cost = 0;
    int maintenance = 0;
    Yields yields;
    bool is_wonder = false;
};

struct UnitTypeDef {
    std::string id;
    int cost = 0;
    int maintenance = 0;
    int strength = 0;
    int range = 0; // 0 = melee
    int movement = 1;
    bool is_water = false;
    bool is_military = false;
    bool can_found_city = false;
    bool can_improve = false;
};

struct ImprovementDef {
    std::string id;
    Yields yields;
    std::vector<std::string> terrains;
    int max_applications = 3;
};

struct NationDef {
    std::string name;
    std::vector<std::string> city_names;
};

// Tunable rule constants. Defaults carry the benchmark rule modifications
// (1-turn war/peace gap, 10/3/0 healing, +20 upgrade heal, military units
// cost one population).
struct GameRules {
    int starting_gold = 20;
    int heal_in_city = 10;
    int heal_in_borders = 3;
    int heal_outside = 0;
    int promotion_heal = 20;
    int promotion_xp_step = 10;
    int combat_xp = 5;
    int min_turns_war_to_peace = 1;
    int min_turns_peace_to_war = 1;
    int military_population_cost = 1;
    int city_max_health = 200;
    int city_recovery = 10;
    int city_capture_health = 50;
    int city_work_radius = 2;
    int city_min_distance = 3;
    int sight_radius = 2;
    int treaty_duration = 30;
    int research_agreement_cost = 30;
    int research_agreement_bonus_pct = 25;
    int luxury_food_per_copy = 1;
    int food_per_population = 2;
    int growth_base = 10;
    int growth_per_population = 6;
    double combat_base_damage = 30.0;
    double combat_exponent = 1.5;
    int city_base_defense = 8;
    int city_defense_per_population = 2;
    int closeness_min = -100;
    int closeness_max = 100;
    int event_log_capacity = 200;
    int notification_capacity = 10;
    int resource_density_pct = 12;
    int edge_water_pct = 60;
    Yields city_center_bonus{1, 1, 2, 1};
    std::vector<std::string> starting_units{"settler", "scout"};

    bool operator==(const GameRules&) const = default;
};

class Ruleset {
public:
    std::string id;
    std::string version;
    std::vector<TerrainDef> terrains;
    std::vector<FeatureDef> features;
    std::vector<ResourceDef> resources;
    std::vector<TechDef> techs;
    std::vector<BuildingDef> buildings;
    std::vector<UnitTypeDef> unit_types;
    std::vector<ImprovementDef> improvements;
    std::vector<NationDef> nations;
    GameRules rules;
    // FNV-1a over the canonical re-serialisation of the document.
    std::string content_hash;

    const TerrainDef* terrain(std::string_view id) const;
    const FeatureDef* feature(std::string_view id) const;
    const ResourceDef* resource(std::string_view id) const;
    const TechDef* tech(std::string_view id) const;
    const BuildingDef* building(std::string_view id) const;
    const UnitTypeDef* unit_type(std::string_view id) const;
    const ImprovementDef* improvement(std::string_view id) const;
    const NationDef* nation(std::string_view name) const;

    // Items (buildings and unit types) unlocked by some tech. Everything else
    // is available from the start.
    bool is_tech_gated(std::string_view item) const;

    // Rebuilds the lookup tables; called by the loader.
    void index();

private:
    std::unordered_map<std::string, std::size_t> terrain_idx_, feature_idx_, resource_idx_,
        tech_idx_, building_idx_, unit_idx_, improvement_idx_, nation_idx_;
    std::set<std::string, std::less<>> gated_;
};

// Parses and validates a ruleset document. Throws RulesetError with codes
// parse_error, schema_error, duplicate_id, dangling_reference, tech_cycle,
// negative_value or too_many.
Ruleset parse_ruleset(std::string_view text);
Ruleset load_ruleset(const std::filesystem::path& path);

// Techs not yet researched whose prerequisites are all researched, in
// ruleset order. Throws RulesetError(unknown_tech) on an unknown id.
std::vector<std::string> researchable_techs(const Ruleset& ruleset,
                                            const std::set<std::string>& researched);

// Location of the shipped content packs (compile-time default, overridable
// with the MICROCIV_DATA_DIR environment variable).
std::filesystem::path default_data_dir();
std::filesystem::path default_ruleset_path();

} // namespace microciv
