#pragma once

#include "microciv/hex.hpp"
#include "microciv/rng.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace microciv {

enum class CivId : int {};
enum class UnitId : int {};
enum class CityId : int {};

constexpr int idx(CivId c) noexcept { return static_cast<int>(c); }
constexpr int idx(UnitId u) noexcept { return static_cast<int>(u); }
constexpr int idx(CityId c) noexcept { return static_cast<int>(c); }

struct Tile {
    std::string terrain;
    std::string feature;
    std::string resource;
    std::string improvement;
    int improvement_count = 0;
    std::optional<CivId> owner;
    std::optional<CityId> owner_city;
    bool road = false;
    std::uint32_t explored_by = 0; // bit i = civ i

    bool explored(CivId c) const noexcept { return (explored_by >> idx(c)) & 1u; }
    bool operator==(const Tile&) const = default;
};

class HexMap {
public:
    HexMap() = default;
    HexMap(int width, int height) : width_(width), height_(height), tiles_(width * height) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int tile_count() const noexcept { return width_ * height_; }

    bool contains(Coord c) const noexcept {
        return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
    }
    int index_of(Coord c) const noexcept { return c.y * width_ + c.x; }
    Coord coord_of(int index) const noexcept { return {index % width_, index / width_}; }

    Tile& at(Coord c) { return tiles_[index_of(c)]; }
    const Tile& at(Coord c) const { return tiles_[index_of(c)]; }
    std::vector<Tile>& tiles() noexcept { return tiles_; }
    const std::vector<Tile>& tiles() const noexcept { return tiles_; }

    bool operator==(const HexMap&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Tile> tiles_;
};

struct Unit {
    UnitId id{};
    std::string type;
    CivId owner{};
    CivId original_owner{};
    Coord pos;
    int health = 100;
    int moves_left = 0;
    bool has_attacked = false;
    int experience = 0;
    int promotions = 0;
    std::vector<Coord> movement_memory; // most recent last, bounded

    bool operator==(const Unit&) const = default;
};

struct City {
    CityId id{};
    std::string name;
    Coord pos;
    CivId owner{};
    CivId founder{};
    int population = 1;
    int food_stock = 0;
    std::string production;
    int production_progress = 0;
    std::set<std::string> buildings;
    int health = 200;
    std::vector<Coord> worked_tiles;
    bool is_original_capital = false;
    bool is_capital = false;
    bool connected_to_capital = false;
    std::string demanded_resource;
    int founded_turn = 0;
    int last_attacked_turn = -1;

    bool operator==(const City&) const = default;
};

struct Notification {
    int turn = 0;
    std::string text;
    bool operator==(const Notification&) const = default;
};

struct Civilization {
    CivId id{};
    std::string name;
    bool ever_had_city = false;
    int gold = 0;
    std::set<std::string> techs;
    std::string current_research;
    int research_progress = 0;
    std::deque<int> science_history; // last 8 turns, most recent last
    std::deque<Notification> notifications; // bounded, most recent last
    std::vector<City> cities;  // id order
    std::vector<Unit> units;   // id order
    int cities_founded = 0;

    // A civ is defeated once it has lost every city it ever had, or if it
    // never founded one and has no units left.
    bool alive() const noexcept {
        return !cities.empty() || (!ever_had_city && !units.empty());
    }

    bool operator==(const Civilization&) const = default;
};

// The six diplomatic states.
enum class Treaty : int {
    war = 0,
    peace = 1,
    friendship = 2,
    defensive_pact = 3,
    open_borders = 4,
    research_agreement = 5,
};

inline constexpr Treaty kAllTreaties[] = {Treaty::war, Treaty::peace, Treaty::friendship,
                                          Treaty::defensive_pact, Treaty::open_borders,
                                          Treaty::research_agreement};

const char* treaty_name(Treaty t) noexcept;
std::optional<Treaty> treaty_from_name(std::string_view name) noexcept;
// Timed treaties carry a countdown; war and peace do not.
constexpr bool is_timed(Treaty t) noexcept { return t != Treaty::war && t != Treaty::peace; }

struct DiplomaticEvent {
    int turn = 0;
    std::string kind;
    CivId actor{};
    bool operator==(const DiplomaticEvent&) const = default;
};

struct Relation {
    std::uint8_t flags = 0;
    std::map<Treaty, int> countdowns;
    int closeness = 0;
    int last_transition_turn = -1000; // last war/peace switch
    std::vector<DiplomaticEvent> history;

    bool has(Treaty t) const noexcept { return (flags >> static_cast<int>(t)) & 1u; }
    void set(Treaty t) noexcept { flags |= static_cast<std::uint8_t>(1u << static_cast<int>(t)); }
    void clear(Treaty t) noexcept { flags &= static_cast<std::uint8_t>(~(1u << static_cast<int>(t))); }

    bool operator==(const Relation&) const = default;
};

// One entry per unordered pair, so symmetry holds by construction.
class DiplomacyTable {
public:
    static std::pair<int, int> key(CivId a, CivId b) noexcept {
        return idx(a) < idx(b) ? std::pair{idx(a), idx(b)} : std::pair{idx(b), idx(a)};
    }
    Relation& at(CivId a, CivId b) { return relations[key(a, b)]; }
    const Relation& at(CivId a, CivId b) const { return relations.at(key(a, b)); }
    bool has(CivId a, CivId b, Treaty t) const {
        auto it = relations.find(key(a, b));
        return it != relations.end() && it->second.has(t);
    }

    std::map<std::pair<int, int>, Relation> relations;

    bool operator==(const DiplomacyTable&) const = default;
};

struct ResourceTrade {
    CivId from{};
    CivId to{};
    std::string resource;
    int quantity = 0;
    int turns_left = 0;
    bool operator==(const ResourceTrade&) const = default;
};

struct Event {
    int turn = 0;
    std::string kind;
    std::vector<CivId> civs;
    std::string text;
    bool is_public = false;
    bool operator==(const Event&) const = default;
};

struct ChatMessage {
    int seq = 0;
    int turn = 0;
    std::string sender;
    std::string text;
    bool operator==(const ChatMessage&) const = default;
};

struct GameState {
    std::string game_id;
    int turn = 0;
    std::string ruleset_id;
    std::string ruleset_hash;
    HexMap map;
    std::vector<Civilization> civs; // index == CivId
    DiplomacyTable diplomacy;
    std::vector<ResourceTrade> resource_trades;
    std::deque<Event> events; // bounded, most recent last
    std::map<std::string, std::vector<ChatMessage>> chat;
    RngStreams rng;
    int next_unit_id = 1;
    int next_city_id = 1;

    Civilization& civ(CivId c) { return civs.at(idx(c)); }
    const Civilization& civ(CivId c) const { return civs.at(idx(c)); }
    std::optional<CivId> civ_by_name(std::string_view name) const;

    bool operator==(const GameState&) const = default;
};

// Chat channel naming: "global" for the group channel, "private:A|B" (names
// sorted) for a pairwise channel.
inline constexpr const char* kGlobalChannel = "global";
std::string private_channel(const std::string& a, const std::string& b);
bool channel_member(const std::string& channel, const std::string& civ_name);

} // namespace microciv
