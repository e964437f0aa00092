#include "support.hpp"

#include "microciv/error.hpp"
#include "microciv/persistence.hpp"
#include "microciv/queries.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>

namespace microciv {
namespace {

const CivId kRome{0};
const CivId kAztecs{1};

// Odd-r offset to cube coordinates, then the cube metric.
int oracle_distance(int x1, int y1, int x2, int y2) {
    auto cube = [](int x, int y) {
        const int q = x - (y - (y & 1)) / 2;
        return std::array<int, 3>{q, y, -q - y};
    };
    const auto a = cube(x1, y1);
    const auto b = cube(x2, y2);
    return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

// Brute-force line of sight: owned tiles plus every tile within two steps of
// an own unit or city.
std::set<std::pair<int, int>> oracle_visible(const GameState& s, CivId viewer) {
    std::set<std::pair<int, int>> out;
    std::vector<Coord> eyes;
    for (const auto& u : s.civ(viewer).units) eyes.push_back(u.pos);
    for (const auto& c : s.civ(viewer).cities) eyes.push_back(c.pos);
    for (int y = 0; y < s.map.height(); ++y) {
        for (int x = 0; x < s.map.width(); ++x) {
            if (s.map.at({x, y}).owner == viewer) out.insert({x, y});
            for (Coord e : eyes) {
                if (oracle_distance(x, y, e.x, e.y) <= 2) out.insert({x, y});
            }
        }
    }
    return out;
}

TEST(Save, IdenticalBytesTwice) {
    const GameState s = test::random_game(5, 120);
    EXPECT_EQ(save_game(s), save_game(s));
    const GameState copy = s;
    EXPECT_EQ(save_game(copy), save_game(s));
}

TEST(Save, TurnZeroFitsBudget) {
    const GameState s = test::four_civ_game(7, 20, 16);
    EXPECT_LE(save_game(s).size(), 256u * 1024u);
}

TEST(Save, RoundTripOnRandomStates) {
    const Ruleset& rs = test::mini();
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const GameState s = test::random_game(seed, static_cast<int>(seed % 7) * 40);
        const std::string bytes = save_game(s);
        const GameState back = load_game(bytes, rs);
        EXPECT_EQ(back, s) << "seed " << seed;
        EXPECT_EQ(save_game(back), bytes) << "seed " << seed;
    }
}

TEST(Save, KeysAreSorted) {
    const std::string bytes = save_game(test::four_civ_game(7));
    EXPECT_EQ(bytes.rfind("{\"ruleset\":", 0), 0u);
    EXPECT_NE(bytes.find("\"schema_version\":1"), std::string::npos);
}

TEST(Load, TruncatedBytesFailToParse) {
    const Ruleset& rs = test::mini();
    const std::string bytes = save_game(test::four_civ_game(7));
    for (std::size_t cut : {std::size_t{0}, std::size_t{1}, bytes.size() / 2, bytes.size() - 1}) {
        try {
            (void)load_game(bytes.substr(0, cut), rs);
            FAIL() << "truncated at " << cut;
        } catch (const SaveError& e) {
            EXPECT_EQ(e.code(), "parse_error");
        }
    }
}

TEST(Load, ForeignRulesetHashRejected) {
    const Ruleset& rs = test::mini();
    GameState s = test::four_civ_game(7);
    s.ruleset_hash = "0123456789abcdef";
    try {
        (void)load_game(save_game(s), rs);
        FAIL();
    } catch (const SaveError& e) {
        EXPECT_EQ(e.code(), "ruleset_mismatch");
    }
}

TEST(Load, VersionMismatchRejected) {
    const Ruleset& rs = test::mini();
    json doc = json::parse(save_game(test::four_civ_game(7)));
    doc["schema_version"] = 2;
    try {
        (void)load_game(doc.dump(), rs);
        FAIL();
    } catch (const SaveError& e) {
        EXPECT_EQ(e.code(), "version_mismatch");
    }
}

TEST(Load, CorruptStateViolatesInvariants) {
    const Ruleset& rs = test::mini();
    json doc = json::parse(save_game(test::four_civ_game(7)));
    doc["state"]["civs"][0]["units"][0]["health"] = 0;
    try {
        (void)load_game(doc.dump(), rs);
        FAIL();
    } catch (const SaveError& e) {
        EXPECT_EQ(e.code(), "invariant_violation");
    }
    doc = json::parse(save_game(test::four_civ_game(7)));
    doc["state"]["map"]["tiles"].erase(0);
    try {
        (void)load_game(doc.dump(), rs);
        FAIL();
    } catch (const SaveError& e) {
        EXPECT_EQ(e.code(), "schema_error");
    }
}

TEST(Load, GoldenSaveStillLoads) {
    const Ruleset& rs = test::mini();
    const std::string path = std::string(MICROCIV_TEST_DIR) + "/golden/save_turn0_seed7.json";
    const std::string fresh = save_game(test::four_civ_game(7));
    if (std::getenv("MICROCIV_UPDATE_GOLDEN")) {
        std::ofstream(path, std::ios::binary) << fresh;
    }
    const std::string golden = test::read_file(path);
    ASSERT_FALSE(golden.empty()) << path;
    EXPECT_EQ(golden, fresh);
    EXPECT_EQ(load_game(golden, rs), test::four_civ_game(7));
}

TEST(Codec, ActionsRoundTrip) {
    TradeOffer offer{kRome, kAztecs, {}, {}, 20};
    offer.give.gold = 15;
    offer.give.resources["wine"] = 1;
    offer.receive.cities = {CityId{3}};
    offer.receive.treaties = {Treaty::open_borders};
    const std::vector<EngineAction> actions = {
        MoveUnit{kRome, UnitId{4}, {3, 5}},
        FoundCity{kRome, UnitId{1}},
        ImproveTile{kRome, UnitId{2}, "farm"},
        Attack{kRome, UnitId{2}, UnitId{9}},
        Attack{kRome, UnitId{2}, CityId{3}},
        PromoteUnit{kRome, UnitId{2}},
        SetProduction{kRome, CityId{1}, "warrior"},
        SetResearch{kRome, "pottery"},
        DeclareWar{kRome, kAztecs},
        OfferPeace{kRome, kAztecs, std::nullopt},
        OfferPeace{kRome, kAztecs, offer},
        SignDefensivePact{kRome, kAztecs},
        SignResearchAgreement{kRome, kAztecs},
        DeclareFriendship{kRome, kAztecs},
        SetOpenBorders{kRome, kAztecs},
        AdjustCloseness{kRome, kAztecs, -7},
        ExecuteTrade{offer},
        SendChat{kRome, "global", "hello"},
    };
    for (const auto& a : actions) {
        const json j = encode_action(a);
        EXPECT_EQ(j.at("kind"), action_kind(a));
        EXPECT_EQ(decode_action(j), a) << j.dump();
    }
    EXPECT_THROW(decode_action(json{{"kind", "teleport"}}), SaveError);
    EXPECT_THROW(decode_action(json{{"kind", "declare_war"}}), SaveError);
}

TEST(Observation, UnknownViewerRejected) {
    const GameState s = test::four_civ_game(7);
    EXPECT_THROW(extract_observation(s, test::mini(), CivId{9}), Error);
}

TEST(Observation, VisibilityOracleOverRandomSamples) {
    const Ruleset& rs = test::mini();
    int samples = 0;
    int foreign_seen = 0;
    for (std::uint64_t seed = 1; samples < 1000; ++seed) {
        GameState s = test::four_civ_game(seed, 14, 14);
        const Engine engine(rs);
        RngStreams rng(seed);
        for (int snap = 0; snap < 5; ++snap) {
            for (int step = 0; step < 30; ++step) {
                const CivId civ{rng.uniform_int("civ", 0, 3)};
                const auto legal = engine.legal_actions(s, civ);
                if (!legal.empty()) {
                    engine.apply(s, legal[rng.uniform_int("go", 0, static_cast<int>(legal.size()) - 1)]);
                }
                if (step % 6 == 5) engine.end_turn(s);
            }
            for (int v = 0; v < 4; ++v) {
                const CivId viewer{v};
                const auto visible = oracle_visible(s, viewer);
                const json body = extract_observation(s, rs, viewer).body;
                auto known = [&](int x, int y) {
                    return visible.count({x, y}) > 0 || s.map.at({x, y}).explored(viewer);
                };
                for (const auto& t : body["map"]["tiles"]) {
                    const int x = t["x"], y = t["y"];
                    ASSERT_TRUE(known(x, y)) << x << "," << y;
                    EXPECT_EQ(t["visible"].get<bool>(), visible.count({x, y}) > 0);
                }
                for (const auto& u : body["units"]["foreign"]) {
                    ASSERT_TRUE(visible.count({u["x"].get<int>(), u["y"].get<int>()}));
                    EXPECT_NE(u["owner"], s.civ(viewer).name);
                    ++foreign_seen;
                }
                for (const auto& c : body["cities"]["foreign"]) {
                    const int x = c["x"], y = c["y"];
                    ASSERT_TRUE(known(x, y));
                    EXPECT_EQ(c.contains("population"), visible.count({x, y}) > 0);
                }
                // Every visible foreign unit is reported.
                std::size_t expected = 0;
                for (const auto& civ : s.civs) {
                    if (civ.id == viewer) continue;
                    for (const auto& u : civ.units) expected += visible.count({u.pos.x, u.pos.y});
                }
                EXPECT_EQ(body["units"]["foreign"].size(), expected);
                ++samples;
            }
        }
    }
    EXPECT_GE(samples, 1000);
    EXPECT_GT(foreign_seen, 0);
}

TEST(Observation, NeverExploredEnemyIsAbsent) {
    const Ruleset& rs = test::mini();
    GameState s = test::flat_state(rs, 20, 10, {"Rome", "Aztecs"});
    test::add_unit(rs, s, kRome, "warrior", {1, 1});
    const Unit& far = test::add_unit(rs, s, kAztecs, "warrior", {18, 8});
    Engine(rs).refresh_exploration(s);
    const json body = extract_observation(s, rs, kRome).body;
    EXPECT_TRUE(body["units"]["foreign"].empty());
    for (const auto& t : body["map"]["tiles"]) {
        EXPECT_FALSE(t["x"] == far.pos.x && t["y"] == far.pos.y);
    }
    EXPECT_LT(body["map"]["tiles"].size(), static_cast<std::size_t>(s.map.tile_count()));
}

TEST(Observation, OwnResearchPresentForeignResearchAbsent) {
    const Ruleset& rs = test::mini();
    GameState s = test::four_civ_game(7);
    s.civ(kRome).current_research = "pottery";
    s.civ(kRome).research_progress = 4;
    s.civ(kAztecs).current_research = "bronze_working";
    const json body = extract_observation(s, rs, kRome).body;
    EXPECT_EQ(body["technology"]["current"], "pottery");
    EXPECT_EQ(body["technology"]["progress"], 4);
    EXPECT_EQ(body.dump().find("bronze_working\",\"progress"), std::string::npos);
    for (const auto& other : body["civilizations"]["others"]) {
        EXPECT_FALSE(other.contains("current_research"));
        EXPECT_FALSE(other.contains("techs"));
    }
    EXPECT_EQ(body["religion"], json::object());
    EXPECT_EQ(body["espionage"], json::object());
}

TEST(Observation, ScoresOfAllCivsPresent) {
    const Ruleset& rs = test::mini();
    const GameState s = test::random_game(4, 150);
    const json body = extract_observation(s, rs, kRome).body;
    for (const auto& civ : s.civs) {
        ASSERT_TRUE(body["scores"].contains(civ.name));
        const json& sc = body["scores"][civ.name];
        for (const char* dim : {"S", "N", "C", "P", "G", "T", "F", "H", "W", "A"}) {
            EXPECT_TRUE(sc.contains(dim)) << dim;
        }
    }
}

TEST(Observation, PureAndWindowed) {
    const Ruleset& rs = test::mini();
    const GameState s = test::random_game(11, 300);
    for (int v = 0; v < 4; ++v) {
        const Observation a = extract_observation(s, rs, CivId{v});
        const Observation b = extract_observation(s, rs, CivId{v});
        EXPECT_EQ(a, b);
        const json& notes = a.body["notifications"];
        const json& events = a.body["events"];
        EXPECT_LE(notes.size(), 10u);
        EXPECT_LE(events.size(), 20u);
        for (std::size_t i = 1; i < notes.size(); ++i) {
            EXPECT_GE(notes[i - 1]["turn"].get<int>(), notes[i]["turn"].get<int>());
        }
        for (std::size_t i = 1; i < events.size(); ++i) {
            EXPECT_GE(events[i - 1]["turn"].get<int>(), events[i]["turn"].get<int>());
        }
    }
}

TEST(Observation, EventWindowIsMostRecentPublic) {
    const Ruleset& rs = test::mini();
    GameState s = test::four_civ_game(7);
    for (int i = 0; i < 30; ++i) {
        s.events.push_back({i, "public_" + std::to_string(i), {kRome}, "p", true});
        s.events.push_back({i, "private_" + std::to_string(i), {kAztecs}, "q", false});
        s.civ(kRome).notifications.push_back({i, "note " + std::to_string(i)});
    }
    const json body = extract_observation(s, rs, kRome).body;
    ASSERT_EQ(body["events"].size(), 20u);
    ASSERT_EQ(body["notifications"].size(), 10u);
    EXPECT_EQ(body["events"][0]["kind"], "public_29");
    EXPECT_EQ(body["events"][19]["kind"], "public_10");
    EXPECT_EQ(body["notifications"][0]["text"], "note 29");
    EXPECT_EQ(body["notifications"][9]["text"], "note 20");
}

TEST(Observation, DialogueLimitedToMemberChannels) {
    const Ruleset& rs = test::mini();
    GameState s = test::four_civ_game(7);
    const Engine engine(rs);
    const std::string rome_aztecs = private_channel("Rome", "Aztecs");
    const std::string greece_egypt = private_channel(s.civ(CivId{2}).name, s.civ(CivId{3}).name);
    engine.apply(s, SendChat{kRome, rome_aztecs, "hi"});
    engine.apply(s, SendChat{CivId{2}, greece_egypt, "secret"});
    engine.apply(s, SendChat{CivId{2}, kGlobalChannel, "all"});
    const json body = extract_observation(s, rs, kRome).body;
    EXPECT_TRUE(body["dialogue"].contains(rome_aztecs));
    EXPECT_TRUE(body["dialogue"].contains(kGlobalChannel));
    EXPECT_FALSE(body["dialogue"].contains(greece_egypt));
}

} // namespace
} // namespace microciv
