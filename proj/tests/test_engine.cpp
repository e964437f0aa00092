#include "support.hpp"

#include "microciv/error.hpp"
#include "microciv/queries.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace microciv {
namespace {

const CivId kRome{0};
const CivId kAztecs{1};
const CivId kGreece{2};

std::string illegal_code(const Engine& engine, GameState& s, const EngineAction& a) {
    const GameState before = s;
    try {
        engine.apply(s, a);
    } catch (const IllegalAction& e) {
        EXPECT_EQ(s, before) << "illegal action mutated the state";
        return e.code();
    }
    return "legal";
}

GameState duel_state() {
    return test::flat_state(test::mini(), 12, 12, {"Rome", "Aztecs", "Greece"});
}

void force_war(GameState& s, CivId a, CivId b) {
    Relation& rel = s.diplomacy.at(a, b);
    rel.clear(Treaty::peace);
    rel.set(Treaty::war);
    rel.last_transition_turn = s.turn - 5;
}

TEST(NewGame, SameInputsGiveIdenticalStates) {
    EXPECT_EQ(test::four_civ_game(7), test::four_civ_game(7));
}

TEST(NewGame, RejectsTinyMap) {
    GameConfig cfg;
    cfg.width = 4;
    cfg.height = 4;
    cfg.civs = {"Rome", "Aztecs"};
    try {
        test::mini_engine().new_game(cfg);
        FAIL() << "expected insufficient_area";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.code(), "insufficient_area");
    }
}

TEST(NewGame, RejectsUnknownAndSingleCiv) {
    GameConfig cfg;
    cfg.civs = {"Rome", "Atlantis"};
    try {
        test::mini_engine().new_game(cfg);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.code(), "unknown_civ");
    }
    cfg.civs = {"Rome"};
    try {
        test::mini_engine().new_game(cfg);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.code(), "too_few_civs");
    }
}

TEST(NewGame, StartingPositions) {
    const Ruleset& rs = test::mini();
    const GameState s = test::four_civ_game(7);
    std::set<Coord> spawns;
    for (const auto& civ : s.civs) {
        ASSERT_EQ(civ.units.size(), 2u);
        EXPECT_TRUE(rs.unit_type(civ.units[0].type)->can_found_city);
        EXPECT_TRUE(rs.unit_type(civ.units[1].type)->is_military);
        EXPECT_NE(civ.units[0].pos, civ.units[1].pos);
        EXPECT_TRUE(spawns.insert(civ.units[0].pos).second);
        EXPECT_EQ(civ.gold, rs.rules.starting_gold);
        for (const auto& other : s.civs) {
            if (other.id != civ.id) {
                EXPECT_TRUE(at_peace(s, civ.id, other.id));
                EXPECT_FALSE(at_war(s, civ.id, other.id));
            }
        }
    }
    test::mini_engine().validate(s);
}

TEST(NewGame, NeighbouringSeedsMoveSpawns) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const GameState a = test::four_civ_game(seed);
        const GameState b = test::four_civ_game(seed + 1);
        bool differs = false;
        for (std::size_t i = 0; i < a.civs.size(); ++i) {
            differs = differs || a.civs[i].units[0].pos != b.civs[i].units[0].pos;
        }
        EXPECT_TRUE(differs) << "seeds " << seed << " and " << seed + 1;
    }
}

TEST(Diplomacy, DeclareWarSetsSymmetricFlagAndLogs) {
    const Engine engine = test::mini_engine();
    GameState s = test::four_civ_game(7);
    const auto events = engine.apply(s, DeclareWar{kRome, kAztecs});
    EXPECT_TRUE(s.diplomacy.has(kRome, kAztecs, Treaty::war));
    EXPECT_TRUE(s.diplomacy.has(kAztecs, kRome, Treaty::war));
    EXPECT_FALSE(s.diplomacy.has(kRome, kAztecs, Treaty::peace));
    ASSERT_FALSE(events.empty());
    EXPECT_EQ(events.front().kind, "declare_war");
    EXPECT_EQ(s.events.back().kind, "declare_war");
}

TEST(Diplomacy, PeaceOneTurnAfterWarIsLegal) {
    const Engine engine = test::mini_engine();
    GameState s = test::four_civ_game(7);
    engine.apply(s, DeclareWar{kRome, kAztecs});
    EXPECT_EQ(illegal_code(engine, s, OfferPeace{kRome, kAztecs, std::nullopt}),
              "transition_too_soon");
    engine.end_turn(s);
    EXPECT_EQ(illegal_code(engine, s, OfferPeace{kRome, kAztecs, std::nullopt}), "legal");
    EXPECT_TRUE(at_peace(s, kRome, kAztecs));
    EXPECT_EQ(illegal_code(engine, s, DeclareWar{kRome, kAztecs}), "transition_too_soon");
    engine.end_turn(s);
    EXPECT_EQ(illegal_code(engine, s, DeclareWar{kAztecs, kRome}), "legal");
}

TEST(Diplomacy, PeaceRequiresWar) {
    const Engine engine = test::mini_engine();
    GameState s = test::four_civ_game(7);
    EXPECT_EQ(illegal_code(engine, s, OfferPeace{kRome, kAztecs, std::nullopt}), "not_at_war");
    EXPECT_EQ(illegal_code(engine, s, DeclareWar{kRome, kRome}), "invalid_target");
}

TEST(Diplomacy, TreatiesRequirePeaceAndGold) {
    const Engine engine = test::mini_engine();
    GameState s = test::four_civ_game(7);
    s.civ(kAztecs).gold = 10;
    EXPECT_EQ(illegal_code(engine, s, SignResearchAgreement{kRome, kAztecs}), "insufficient_gold");
    s.civ(kAztecs).gold = 40;
    s.civ(kRome).gold = 35;
    EXPECT_EQ(illegal_code(engine, s, SignResearchAgreement{kRome, kAztecs}), "legal");
    EXPECT_EQ(s.civ(kRome).gold, 5);
    EXPECT_EQ(s.civ(kAztecs).gold, 10);
    EXPECT_EQ(illegal_code(engine, s, SignResearchAgreement{kRome, kAztecs}), "already_active");
    engine.apply(s, DeclareWar{kRome, kGreece});
    EXPECT_EQ(illegal_code(engine, s, SetOpenBorders{kGreece, kRome}), "not_at_peace");
    // War wipes the pair's treaties.
    EXPECT_EQ(illegal_code(engine, s, DeclareFriendship{kRome, kAztecs}), "legal");
    engine.end_turn(s);
    engine.apply(s, DeclareWar{kAztecs, kRome});
    EXPECT_FALSE(s.diplomacy.has(kRome, kAztecs, Treaty::friendship));
    EXPECT_FALSE(s.diplomacy.has(kRome, kAztecs, Treaty::research_agreement));
    EXPECT_TRUE(s.diplomacy.at(kRome, kAztecs).countdowns.empty());
}

TEST(Diplomacy, DefensivePactDragsPartnerIn) {
    const Engine engine = test::mini_engine();
    GameState s = test::four_civ_game(7);
    engine.apply(s, SignDefensivePact{kRome, kAztecs});
    const auto events = engine.apply(s, DeclareWar{kGreece, kRome});
    EXPECT_TRUE(at_war(s, kGreece, kRome));
    EXPECT_TRUE(at_war(s, kAztecs, kGreece));
    EXPECT_EQ(std::count_if(events.begin(), events.end(),
                            [](const Event& e) { return e.kind == "declare_war"; }),
              2);
}

TEST(Diplomacy, TreatiesExpireUnlessFrozen) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = test::four_civ_game(7);
    engine.apply(s, SetOpenBorders{kRome, kAztecs});
    GameState frozen = s;
    for (int t = 0; t < rs.rules.treaty_duration - 1; ++t) engine.end_turn(s);
    EXPECT_TRUE(s.diplomacy.has(kRome, kAztecs, Treaty::open_borders));
    EXPECT_EQ(s.diplomacy.at(kRome, kAztecs).countdowns.at(Treaty::open_borders), 1);
    engine.end_turn(s);
    EXPECT_FALSE(s.diplomacy.has(kRome, kAztecs, Treaty::open_borders));

    const auto flags_before = frozen.diplomacy.at(kRome, kAztecs).flags;
    for (int t = 0; t < rs.rules.treaty_duration + 5; ++t) {
        engine.end_turn(frozen, TurnOptions{true});
    }
    EXPECT_EQ(frozen.diplomacy.at(kRome, kAztecs).flags, flags_before);
    EXPECT_EQ(frozen.diplomacy.at(kRome, kAztecs).countdowns.at(Treaty::open_borders), 1);
}

TEST(Trade, GoldIsConserved) {
    const Engine engine = test::mini_engine();
    GameState s = test::four_civ_game(7);
    s.civ(kRome).gold = 50;
    s.civ(kAztecs).gold = 15;
    TradeOffer offer{kRome, kAztecs, {}, {}, 30};
    offer.give.gold = 30;
    offer.receive.gold = 5;
    engine.apply(s, ExecuteTrade{offer});
    EXPECT_EQ(s.civ(kRome).gold + s.civ(kAztecs).gold, 65);
    EXPECT_EQ(s.civ(kRome).gold, 25);
    offer.give.gold = 1000;
    EXPECT_EQ(illegal_code(engine, s, ExecuteTrade{offer}), "insufficient_gold");
    offer = TradeOffer{kRome, kAztecs, {}, {}, 30};
    EXPECT_EQ(illegal_code(engine, s, ExecuteTrade{offer}), "empty_trade");
}

TEST(Trade, CitiesAndResourcesChangeHands) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    test::add_city(rs, s, kRome, {2, 2});
    City& second = test::add_city(rs, s, kRome, {8, 8});
    const CityId traded = second.id;
    test::add_unit(rs, s, kAztecs, "scout", {11, 0});
    s.map.at({8, 9}).resource = "silk";
    ASSERT_EQ(s.map.at({8, 9}).owner, kRome);
    TradeOffer offer{kRome, kAztecs, {}, {}, 10};
    offer.give.cities.push_back(traded);
    engine.apply(s, ExecuteTrade{offer});
    EXPECT_EQ(find_city(s, traded)->owner, kAztecs);
    EXPECT_EQ(s.map.at({8, 9}).owner, kAztecs);
    EXPECT_TRUE(find_city(s, traded)->is_capital);

    TradeOffer lend{kAztecs, kRome, {}, {}, 3};
    lend.give.resources["silk"] = 1;
    engine.apply(s, ExecuteTrade{lend});
    EXPECT_EQ(civ_resources(s, kRome)["silk"], 1);
    EXPECT_EQ(civ_resources(s, kAztecs)["silk"], 0);
    for (int i = 0; i < 3; ++i) engine.end_turn(s);
    EXPECT_EQ(civ_resources(s, kAztecs)["silk"], 1);
    EXPECT_EQ(illegal_code(engine, s, ExecuteTrade{lend}), "legal");
    EXPECT_EQ(illegal_code(engine, s, ExecuteTrade{lend}), "insufficient_resources");
}

TEST(Units, ImprovementCapIsThree) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    test::add_city(rs, s, kRome, {4, 4});
    Unit& worker = test::add_unit(rs, s, kRome, "worker", {4, 5});
    const UnitId id = worker.id;
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(illegal_code(engine, s, ImproveTile{kRome, id, "farm"}), "legal");
        find_unit(s, id)->moves_left = 2;
    }
    EXPECT_EQ(s.map.at({4, 5}).improvement_count, 3);
    EXPECT_EQ(illegal_code(engine, s, ImproveTile{kRome, id, "farm"}), "tile_improvement_cap");
    EXPECT_EQ(illegal_code(engine, s, ImproveTile{kRome, id, "mine"}), "invalid_terrain");
    // Yields stack once per application.
    EXPECT_EQ(tile_yields(rs, s.map.at({4, 5})).food, 2 + 3);
}

TEST(Units, FoundCityRules) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    const UnitId settler = test::add_unit(rs, s, kRome, "settler", {5, 5}).id;
    const UnitId scout = test::add_unit(rs, s, kRome, "scout", {5, 6}).id;
    EXPECT_EQ(illegal_code(engine, s, FoundCity{kRome, scout}), "cannot_found_city");
    EXPECT_EQ(illegal_code(engine, s, FoundCity{kRome, settler}), "legal");
    const Civilization& rome = s.civ(kRome);
    ASSERT_EQ(rome.cities.size(), 1u);
    EXPECT_TRUE(rome.cities[0].is_capital);
    EXPECT_TRUE(rome.cities[0].is_original_capital);
    EXPECT_EQ(rome.cities[0].name, "Rome");
    EXPECT_EQ(owned_tile_count(s, kRome), 7);
    const UnitId second = test::add_unit(rs, s, kRome, "settler", {6, 6}).id;
    EXPECT_EQ(illegal_code(engine, s, FoundCity{kRome, second}), "city_too_close");
}

TEST(Units, MovementRespectsBordersAndTerrain) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    test::add_city(rs, s, kAztecs, {6, 6});
    s.map.at({2, 3}).terrain = "mountain";
    s.map.at({3, 2}).terrain = "ocean";
    const UnitId scout = test::add_unit(rs, s, kRome, "scout", {2, 2}).id;
    EXPECT_EQ(illegal_code(engine, s, MoveUnit{kRome, scout, {2, 3}}), "unreachable");
    EXPECT_EQ(illegal_code(engine, s, MoveUnit{kRome, scout, {3, 2}}), "unreachable");
    EXPECT_EQ(illegal_code(engine, s, MoveUnit{kRome, scout, {1, 2}}), "legal");
    EXPECT_EQ(find_unit(s, scout)->moves_left, 1);
    EXPECT_EQ(find_unit(s, scout)->movement_memory.back(), (Coord{2, 2}));

    const UnitId walker = test::add_unit(rs, s, kRome, "scout", {4, 6}).id;
    EXPECT_EQ(illegal_code(engine, s, MoveUnit{kRome, walker, {5, 6}}), "unreachable");
    engine.apply(s, SetOpenBorders{kRome, kAztecs});
    EXPECT_EQ(illegal_code(engine, s, MoveUnit{kRome, walker, {5, 6}}), "legal");
}

TEST(Combat, EqualStrengthsTakeBaseDamage) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    force_war(s, kRome, kAztecs);
    const UnitId a = test::add_unit(rs, s, kRome, "warrior", {4, 4}).id;
    const UnitId d = test::add_unit(rs, s, kAztecs, "warrior", {5, 4}).id;
    const CombatReport r = engine.resolve_combat(s, a, d);
    EXPECT_EQ(r.damage_to_defender, 30);
    EXPECT_EQ(r.damage_to_attacker, 30);
    EXPECT_EQ(find_unit(s, a)->health, 70);
    EXPECT_EQ(find_unit(s, d)->health, 70);
    EXPECT_EQ(find_unit(s, a)->experience, rs.rules.combat_xp);
    EXPECT_EQ(illegal_code(engine, s, Attack{kRome, a, d}), "attacker_exhausted");
}

TEST(Combat, DamageFollowsStrengthRatio) {
    const GameRules rules;
    for (int sa = 1; sa <= 40; ++sa) {
        for (int sd = 1; sd <= 40; ++sd) {
            const double raw = 30.0 * std::pow(static_cast<double>(sa) / sd, 1.5);
            const int expected = std::min(100, std::max(1, static_cast<int>(std::floor(raw + 0.5))));
            EXPECT_EQ(combat_damage(sa, sd, rules), expected) << sa << " vs " << sd;
            if (sa > 1) EXPECT_GE(combat_damage(sa, sd, rules), combat_damage(sa - 1, sd, rules));
        }
    }
}

TEST(Combat, RangedAttackersTakeNoRetaliation) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    force_war(s, kRome, kAztecs);
    const UnitId archer = test::add_unit(rs, s, kRome, "archer", {2, 4}).id;
    const UnitId d = test::add_unit(rs, s, kAztecs, "warrior", {4, 4}).id;
    const CombatReport r = engine.resolve_combat(s, archer, d);
    EXPECT_EQ(r.damage_to_defender, static_cast<int>(std::lround(30.0 * std::pow(7.0 / 8.0, 1.5))));
    EXPECT_EQ(r.damage_to_attacker, 0);
    EXPECT_EQ(find_unit(s, archer)->health, 100);
}

TEST(Combat, IllegalAttacks) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    const UnitId a = test::add_unit(rs, s, kRome, "warrior", {4, 4}).id;
    const UnitId d = test::add_unit(rs, s, kAztecs, "warrior", {5, 4}).id;
    const UnitId far = test::add_unit(rs, s, kAztecs, "warrior", {9, 9}).id;
    const UnitId worker = test::add_unit(rs, s, kRome, "worker", {3, 4}).id;
    EXPECT_EQ(illegal_code(engine, s, Attack{kRome, a, d}), "not_at_war");
    force_war(s, kRome, kAztecs);
    EXPECT_EQ(illegal_code(engine, s, Attack{kRome, a, far}), "out_of_range");
    EXPECT_EQ(illegal_code(engine, s, Attack{kRome, worker, d}), "not_military");
    EXPECT_EQ(illegal_code(engine, s, Attack{kAztecs, a, d}), "not_owner");
}

TEST(Combat, CivilianDefenderIsDestroyed) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    force_war(s, kRome, kAztecs);
    const UnitId a = test::add_unit(rs, s, kRome, "scout", {4, 4}).id;
    const UnitId settler = test::add_unit(rs, s, kAztecs, "settler", {5, 4}).id;
    const CombatReport r = engine.resolve_combat(s, a, settler);
    EXPECT_TRUE(r.defender_destroyed);
    EXPECT_EQ(r.damage_to_attacker, 0);
    EXPECT_EQ(find_unit(s, settler), nullptr);
}

TEST(Combat, CityCaptureTransfersCityAndTiles) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    City& home = test::add_city(rs, s, kRome, {2, 2});
    (void)home;
    City& target = test::add_city(rs, s, kAztecs, {6, 6}, 2);
    const CityId target_id = target.id;
    std::vector<int> city_tiles;
    for (int i = 0; i < s.map.tile_count(); ++i) {
        if (s.map.tiles()[i].owner_city == target_id) city_tiles.push_back(i);
    }
    ASSERT_FALSE(city_tiles.empty());
    target.health = 5;
    force_war(s, kRome, kAztecs);
    const UnitId h = test::add_unit(rs, s, kRome, "horseman", {6, 5}).id;
    const CombatReport r = engine.resolve_combat(s, h, target_id);
    EXPECT_TRUE(r.city_captured);
    const City* captured = find_city(s, target_id);
    ASSERT_NE(captured, nullptr);
    EXPECT_EQ(captured->owner, kRome);
    EXPECT_EQ(captured->founder, kAztecs);
    for (int i : city_tiles) EXPECT_EQ(s.map.tiles()[i].owner, kRome);
    EXPECT_EQ(find_unit(s, h)->pos, (Coord{6, 6}));
    EXPECT_FALSE(s.civ(kAztecs).alive());
    engine.validate(s);
    // Greece never founded a city but still has a unit, so no winner yet.
    test::add_unit(rs, s, kGreece, "scout", {10, 10});
    EXPECT_FALSE(engine.check_victory(s).has_value());
    s.civ(kGreece).units.clear();
    EXPECT_EQ(engine.check_victory(s), kRome);
}

TEST(Combat, CityDefenceUsesPopulationAndGarrison) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    City& c = test::add_city(rs, s, kAztecs, {6, 6}, 3);
    const CityId cid = c.id;
    test::add_unit(rs, s, kAztecs, "spearman", {6, 6});
    force_war(s, kRome, kAztecs);
    const UnitId a = test::add_unit(rs, s, kRome, "horseman", {6, 5}).id;
    const CombatReport r = engine.resolve_combat(s, a, cid);
    EXPECT_DOUBLE_EQ(r.defender_strength, 8 + 2 * 3 + 11);
    EXPECT_EQ(r.damage_to_defender, combat_damage(12, 25, rs.rules));
    EXPECT_EQ(r.damage_to_attacker, combat_damage(25, 12, rs.rules));
    EXPECT_EQ(find_city(s, cid)->health, rs.rules.city_max_health - r.damage_to_defender);
    // No recovery on the turn of the attack, +10 afterwards.
    engine.end_turn(s);
    EXPECT_EQ(find_city(s, cid)->health, rs.rules.city_max_health - r.damage_to_defender);
    engine.end_turn(s);
    EXPECT_EQ(find_city(s, cid)->health,
              std::min(rs.rules.city_max_health,
                       rs.rules.city_max_health - r.damage_to_defender + rs.rules.city_recovery));
}

TEST(Victory, NoneWhileSeveralHoldCities) {
    const Ruleset& rs = test::mini();
    GameState s = duel_state();
    test::add_city(rs, s, kRome, {2, 2});
    test::add_city(rs, s, kAztecs, {8, 2});
    test::add_city(rs, s, kGreece, {5, 9});
    EXPECT_FALSE(Engine(rs).check_victory(s).has_value());
}

TEST(Victory, SoleCityHolderWins) {
    const Ruleset& rs = test::mini();
    GameState s = duel_state();
    test::add_city(rs, s, kRome, {2, 2});
    EXPECT_EQ(Engine(rs).check_victory(s), kRome);
}

TEST(EndTurn, MilitaryUnitCostsOnePopulation) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    City& c = test::add_city(rs, s, kRome, {5, 5}, 3);
    c.production = "warrior";
    c.production_progress = 25;
    const CityId id = c.id;
    const std::size_t units_before = s.civ(kRome).units.size();
    engine.end_turn(s);
    EXPECT_EQ(find_city(s, id)->population, 2);
    EXPECT_EQ(s.civ(kRome).units.size(), units_before + 1);
    EXPECT_EQ(s.civ(kRome).units.back().type, "warrior");
}

TEST(EndTurn, CivilianUnitKeepsPopulationAndSizeOneStalls) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    City& c = test::add_city(rs, s, kRome, {5, 5}, 2);
    c.production = "worker";
    c.production_progress = 30;
    const CityId id = c.id;
    engine.end_turn(s);
    EXPECT_EQ(find_city(s, id)->population, 2);
    EXPECT_EQ(s.civ(kRome).units.back().type, "worker");

    City& small = test::add_city(rs, s, kAztecs, {1, 10}, 1);
    small.production = "warrior";
    small.production_progress = 30;
    const CityId sid = small.id;
    const auto units = s.civ(kAztecs).units.size();
    engine.end_turn(s);
    EXPECT_EQ(find_city(s, sid)->population, 1);
    EXPECT_EQ(s.civ(kAztecs).units.size(), units);
    EXPECT_EQ(find_city(s, sid)->production, "warrior");
}

TEST(EndTurn, HealingByLocation) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    test::add_city(rs, s, kRome, {5, 5});
    const UnitId in_city = test::add_unit(rs, s, kRome, "warrior", {5, 5}).id;
    const UnitId in_borders = test::add_unit(rs, s, kRome, "warrior", {5, 6}).id;
    const UnitId outside = test::add_unit(rs, s, kRome, "warrior", {10, 10}).id;
    const UnitId nearly = test::add_unit(rs, s, kRome, "scout", {5, 5}).id;
    s.civ(kRome).gold = 100;
    find_unit(s, in_city)->health = 50;
    find_unit(s, in_borders)->health = 50;
    find_unit(s, outside)->health = 50;
    find_unit(s, nearly)->health = 95;
    engine.end_turn(s);
    EXPECT_EQ(find_unit(s, in_city)->health, 60);
    EXPECT_EQ(find_unit(s, in_borders)->health, 53);
    EXPECT_EQ(find_unit(s, outside)->health, 50);
    EXPECT_EQ(find_unit(s, nearly)->health, 100);
}

TEST(EndTurn, EmptyCivsOnlyAdvanceTurn) {
    const Engine engine = test::mini_engine();
    const GameState s = duel_state();
    GameState next = s;
    const auto events = engine.end_turn(next);
    EXPECT_TRUE(events.empty());
    GameState expected = s;
    expected.turn += 1;
    EXPECT_EQ(next, expected);
}

TEST(EndTurn, GrowthThresholdAndStarvation) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    EXPECT_EQ(growth_threshold(1, rs.rules), 10);
    EXPECT_EQ(growth_threshold(4, rs.rules), 28);
    GameState s = duel_state();
    City& c = test::add_city(rs, s, kRome, {5, 5}, 1);
    const CityId id = c.id;
    engine.end_turn(s);
    const City& after = *find_city(s, id);
    // Oracle: center tile food + one worked grassland + center bonus - 2 per pop.
    const int surplus = 2 + 2 + rs.rules.city_center_bonus.food - 2;
    EXPECT_EQ(after.food_stock, surplus);

    City& hungry = *find_city(s, id);
    hungry.population = 3;
    hungry.food_stock = 0;
    for (auto& t : s.map.tiles()) {
        if (t.owner_city == id) t.terrain = "desert";
    }
    engine.end_turn(s);
    EXPECT_EQ(find_city(s, id)->population, 2);
    EXPECT_EQ(find_city(s, id)->food_stock, 0);
}

TEST(EndTurn, MaintenanceShortfallDisbandsCostliestUnit) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    test::add_unit(rs, s, kRome, "warrior", {1, 1});
    const UnitId last = test::add_unit(rs, s, kRome, "scout", {2, 1}).id;
    s.civ(kRome).gold = 1;
    engine.end_turn(s);
    EXPECT_EQ(s.civ(kRome).gold, 0);
    ASSERT_EQ(s.civ(kRome).units.size(), 1u);
    EXPECT_EQ(find_unit(s, last), nullptr); // equal upkeep: highest id goes
}

TEST(EndTurn, ResearchCompletesAndNotifies) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    test::add_city(rs, s, kRome, {5, 5});
    engine.apply(s, SetResearch{kRome, "agriculture"});
    s.civ(kRome).research_progress = 19;
    engine.end_turn(s);
    EXPECT_TRUE(s.civ(kRome).techs.count("agriculture"));
    EXPECT_TRUE(s.civ(kRome).current_research.empty());
    EXPECT_NE(s.civ(kRome).notifications.back().text.find("agriculture"), std::string::npos);
    auto code = [&](const EngineAction& a) {
        GameState copy = s;
        return illegal_code(engine, copy, a);
    };
    EXPECT_EQ(code(SetResearch{kRome, "currency"}), "prerequisites_missing");
    EXPECT_EQ(code(SetResearch{kRome, "agriculture"}), "already_researched");
    EXPECT_EQ(code(SetResearch{kRome, "alchemy"}), "unknown_tech");
}

TEST(Production, UnlockingAndWonders) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    GameState s = duel_state();
    const CityId rome = test::add_city(rs, s, kRome, {2, 2}).id;
    const CityId tenoch = test::add_city(rs, s, kAztecs, {8, 8}).id;
    EXPECT_EQ(illegal_code(engine, s, SetProduction{kRome, rome, "archer"}), "not_unlocked");
    EXPECT_EQ(illegal_code(engine, s, SetProduction{kRome, rome, "palace"}), "unknown_item");
    EXPECT_EQ(illegal_code(engine, s, SetProduction{kRome, tenoch, "warrior"}), "not_owner");
    EXPECT_EQ(illegal_code(engine, s, SetProduction{kRome, rome, "trireme"}), "not_unlocked");
    s.civ(kRome).techs = {"agriculture", "pottery", "sailing", "writing", "mining", "masonry",
                          "philosophy"};
    s.civ(kAztecs).techs = s.civ(kRome).techs;
    EXPECT_EQ(illegal_code(engine, s, SetProduction{kRome, rome, "trireme"}), "not_coastal");
    find_city(s, tenoch)->buildings.insert("great_library");
    EXPECT_EQ(illegal_code(engine, s, SetProduction{kRome, rome, "great_library"}), "wonder_taken");
    EXPECT_EQ(illegal_code(engine, s, SetProduction{kAztecs, tenoch, "great_library"}),
              "already_built");
}

TEST(Chat, ChannelMembership) {
    const Engine engine = test::mini_engine();
    GameState s = test::four_civ_game(7);
    EXPECT_EQ(illegal_code(engine, s, SendChat{kRome, "global", "hello"}), "legal");
    EXPECT_EQ(illegal_code(engine, s, SendChat{kRome, private_channel("Rome", "Aztecs"), "hi"}),
              "legal");
    EXPECT_EQ(illegal_code(engine, s, SendChat{kGreece, private_channel("Rome", "Aztecs"), "psst"}),
              "not_channel_member");
    EXPECT_EQ(illegal_code(engine, s, SendChat{kRome, "global", ""}), "empty_message");
    EXPECT_EQ(s.chat.at("global").front().sender, "Rome");
    EXPECT_EQ(s.chat.at(private_channel("Aztecs", "Rome")).size(), 1u);
}

TEST(LegalActions, FreshGameOffersFoundCity) {
    const Engine engine = test::mini_engine();
    const GameState s = test::four_civ_game(7);
    const UnitId settler = s.civ(kRome).units[0].id;
    const auto actions = engine.legal_actions(s, kRome);
    EXPECT_NE(std::find(actions.begin(), actions.end(), EngineAction{FoundCity{kRome, settler}}),
              actions.end());
}

TEST(LegalActions, NoTreatiesWhileAtWarWithEveryone) {
    const Engine engine = test::mini_engine();
    GameState s = test::four_civ_game(7);
    s.civ(kRome).gold = 500;
    for (int other = 1; other < 4; ++other) engine.apply(s, DeclareWar{kRome, CivId{other}});
    for (const auto& a : engine.legal_actions(s, kRome)) {
        EXPECT_FALSE(std::holds_alternative<SignResearchAgreement>(a));
        EXPECT_FALSE(std::holds_alternative<SignDefensivePact>(a));
        EXPECT_FALSE(std::holds_alternative<SetOpenBorders>(a));
    }
}

// Random walk over legal play: every enumerated action must apply, every
// state must validate, and randomly generated actions apply iff enumerated.
class RandomPlay : public ::testing::Test {
protected:
    static EngineAction random_action(RngStreams& rng, const GameState& s, const Ruleset& rs) {
        const CivId civ{rng.uniform_int("a", 0, static_cast<int>(s.civs.size()) - 1)};
        const CivId other{rng.uniform_int("a", 0, static_cast<int>(s.civs.size()) - 1)};
        const UnitId unit{rng.uniform_int("a", 1, std::max(1, s.next_unit_id))};
        const CityId city{rng.uniform_int("a", 1, std::max(1, s.next_city_id))};
        const Coord to{rng.uniform_int("a", 0, s.map.width() - 1),
                       rng.uniform_int("a", 0, s.map.height() - 1)};
        switch (rng.uniform_int("a", 0, 11)) {
        case 0: return MoveUnit{civ, unit, to};
        case 1: return FoundCity{civ, unit};
        case 2: return ImproveTile{civ, unit, rs.improvements[rng.uniform_int("a", 0, 2)].id};
        case 3: return Attack{civ, unit, UnitId{rng.uniform_int("a", 1, std::max(1, s.next_unit_id))}};
        case 4: return Attack{civ, unit, city};
        case 5: return PromoteUnit{civ, unit};
        case 6: return SetProduction{civ, city, rs.unit_types[rng.uniform_int("a", 0, 7)].id};
        case 7: return SetResearch{civ, rs.techs[rng.uniform_int("a", 0, 11)].id};
        case 8: return DeclareWar{civ, other};
        case 9: return OfferPeace{civ, other, std::nullopt};
        case 10: return SignResearchAgreement{civ, other};
        default: return DeclareFriendship{civ, other};
        }
    }
};

TEST_F(RandomPlay, EnumeratedActionsApplyAndComplementFails) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    int samples = 0;
    int complement = 0;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        GameState s = test::four_civ_game(seed, 16, 16);
        RngStreams rng(seed * 977);
        for (int step = 0; step < 120; ++step) {
            const CivId civ{rng.uniform_int("civ", 0, 3)};
            const auto legal = engine.legal_actions(s, civ);
            for (int k = 0; k < 2 && !legal.empty(); ++k) {
                const auto& a = legal[rng.uniform_int("pick", 0, static_cast<int>(legal.size()) - 1)];
                GameState copy = s;
                EXPECT_NO_THROW(engine.apply(copy, a)) << action_kind(a);
                ++samples;
            }
            const EngineAction probe = random_action(rng, s, rs);
            const CivId actor = actor_of(probe);
            const bool listed = [&] {
                if (idx(actor) < 0 || idx(actor) >= 4) return false;
                const auto l = engine.legal_actions(s, actor);
                return std::find(l.begin(), l.end(), probe) != l.end();
            }();
            GameState copy = s;
            bool applied = true;
            try {
                engine.apply(copy, probe);
            } catch (const IllegalAction&) {
                applied = false;
                EXPECT_EQ(copy, s);
            }
            EXPECT_EQ(applied, listed) << action_kind(probe);
            complement += listed ? 0 : 1;

            if (!legal.empty()) {
                engine.apply(s, legal[rng.uniform_int("go", 0, static_cast<int>(legal.size()) - 1)]);
            }
            if (step % 6 == 5) engine.end_turn(s);
            engine.validate(s);
        }
    }
    EXPECT_GE(samples, 1000);
    EXPECT_GT(complement, 100);
}

TEST_F(RandomPlay, ReplayIsDeterministic) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    auto play = [&] {
        GameState s = test::four_civ_game(3);
        RngStreams rng(99);
        for (int step = 0; step < 200; ++step) {
            const CivId civ{rng.uniform_int("civ", 0, 3)};
            const auto legal = engine.legal_actions(s, civ);
            if (!legal.empty()) {
                engine.apply(s, legal[rng.uniform_int("go", 0, static_cast<int>(legal.size()) - 1)]);
            }
            if (step % 5 == 4) engine.end_turn(s);
        }
        return s;
    };
    EXPECT_EQ(play(), play());
}

TEST(Values, WrappersLeaveInputUntouched) {
    const Ruleset& rs = test::mini();
    const GameState s = test::four_civ_game(7);
    const StepResult r = apply_action(rs, s, DeclareWar{kRome, kAztecs});
    EXPECT_FALSE(at_war(s, kRome, kAztecs));
    EXPECT_TRUE(at_war(r.state, kRome, kAztecs));
    const StepResult t = end_turn(rs, s);
    EXPECT_EQ(s.turn, 0);
    EXPECT_EQ(t.state.turn, 1);
}

} // namespace
} // namespace microciv
