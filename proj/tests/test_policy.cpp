#include "support.hpp"

#include "microciv/error.hpp"
#include "microciv/persistence.hpp"
#include "microciv/policy.hpp"
#include "microciv/queries.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace microciv {
namespace {

const CivId kRome{0};
const CivId kAztecs{1};

// Rome has a city and three warriors next to a defenceless Aztec city.
GameState war_scenario() {
    const Ruleset& rs = test::mini();
    GameState s = test::flat_state(rs, 14, 8, {"Rome", "Aztecs"});
    test::add_city(rs, s, kRome, {2, 3}, 3);
    test::add_city(rs, s, kAztecs, {8, 3}, 2);
    for (int i = 0; i < 3; ++i) test::add_unit(rs, s, kRome, "warrior", {3, 3 + (i % 2)});
    return s;
}

bool is_worker_action(const GameState& s, const EngineAction& a) {
    if (std::holds_alternative<ImproveTile>(a)) return true;
    if (const auto* m = std::get_if<MoveUnit>(&a)) {
        const Unit* u = find_unit(s, m->unit);
        return u && u->type == "worker";
    }
    return false;
}

TEST(Baseline, AllSwitchesOffEmitsNothing) {
    const Ruleset& rs = test::mini();
    const GameState s = test::random_game(3, 120);
    for (int c = 0; c < 4; ++c) {
        EXPECT_TRUE(baseline_turn(rs, s, CivId{c}, AspectSwitches::none()).empty());
    }
}

TEST(Baseline, DisabledAspectsEmitNoActionsOfThatAspect) {
    const Ruleset& rs = test::mini();
    const std::pair<ActionAspect, AspectSwitches> cases[] = {
        {ActionAspect::unit, {false, true, true, true, true}},
        {ActionAspect::production, {true, false, true, true, true}},
        {ActionAspect::technology, {true, true, false, true, true}},
        {ActionAspect::diplomacy, {true, true, true, false, true}},
    };
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const GameState s = seed % 2 ? test::random_game(seed, 90) : war_scenario();
        for (int c = 0; c < static_cast<int>(s.civs.size()); ++c) {
            for (const auto& [aspect, sw] : cases) {
                for (const auto& a : baseline_turn(rs, s, CivId{c}, sw)) {
                    EXPECT_NE(aspect_of(a), aspect) << action_kind(a);
                }
            }
            AspectSwitches no_workers;
            no_workers.workers = false;
            for (const auto& a : baseline_turn(rs, s, CivId{c}, no_workers)) {
                EXPECT_FALSE(is_worker_action(s, a)) << action_kind(a);
            }
        }
    }
}

TEST(Baseline, EveryActionIsEnumeratedLegal) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        GameState s = test::four_civ_game(seed, 16, 16);
        for (int turn = 0; turn < 30; ++turn) {
            for (int c = 0; c < 4; ++c) {
                const CivId civ{c};
                for (const auto& a : baseline_turn(rs, s, civ)) {
                    const auto legal = engine.legal_actions(s, civ);
                    ASSERT_NE(std::find(legal.begin(), legal.end(), a), legal.end())
                        << action_kind(a) << " on turn " << s.turn;
                    engine.apply(s, a);
                    ++checked;
                }
            }
            engine.end_turn(s);
            engine.validate(s);
        }
    }
    EXPECT_GT(checked, 500);
}

TEST(Baseline, SettlersFoundCitiesWithinThreeTurns) {
    const Ruleset& rs = test::mini();
    const Engine engine(rs);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        GameState s = test::four_civ_game(seed);
        std::vector<int> founded_on(4, -1);
        for (int turn = 0; turn < 3; ++turn) {
            for (int c = 0; c < 4; ++c) {
                for (const auto& a : baseline_turn(rs, s, CivId{c})) {
                    if (std::holds_alternative<FoundCity>(a) && founded_on[c] < 0) founded_on[c] = turn;
                    engine.apply(s, a);
                }
            }
            engine.end_turn(s);
        }
        for (int c = 0; c < 4; ++c) {
            EXPECT_GE(founded_on[c], 0) << "seed " << seed << " civ " << c;
            EXPECT_FALSE(s.civ(CivId{c}).cities.empty());
        }
    }
}

TEST(Baseline, DeterministicGivenState) {
    const Ruleset& rs = test::mini();
    const GameState s = test::random_game(9, 200);
    for (int c = 0; c < 4; ++c) {
        EXPECT_EQ(baseline_turn(rs, s, CivId{c}), baseline_turn(rs, s, CivId{c}));
    }
}

TEST(Baseline, DeclaresWarOnlyWithAdvantageAndProximity) {
    const Ruleset& rs = test::mini();
    const GameState s = war_scenario();
    const auto actions = baseline_turn(rs, s, kRome);
    EXPECT_NE(std::find(actions.begin(), actions.end(), EngineAction{DeclareWar{kRome, kAztecs}}),
              actions.end());
    // The weak side never starts a war.
    for (const auto& a : baseline_turn(rs, s, kAztecs)) {
        EXPECT_FALSE(std::holds_alternative<DeclareWar>(a));
    }
    // Far apart: no war.
    GameState far = test::flat_state(rs, 30, 8, {"Rome", "Aztecs"});
    test::add_city(rs, far, kRome, {1, 3}, 3);
    test::add_city(rs, far, kAztecs, {28, 3}, 2);
    test::add_unit(rs, far, kRome, "warrior", {2, 3});
    for (const auto& a : baseline_turn(rs, far, kRome)) {
        EXPECT_FALSE(std::holds_alternative<DeclareWar>(a));
    }
    // With diplomacy disabled the intent is reported but not emitted.
    AspectSwitches sw;
    sw.diplomacy = false;
    const BaselineTurn muted = baseline_turn_detailed(rs, s, kRome, sw, true);
    EXPECT_EQ(muted.suppressed.size(), 1u);
    for (const auto& a : muted.actions) EXPECT_NE(aspect_of(a), ActionAspect::diplomacy);
}

TEST(Baseline, MilitaryHeadsForEnemyCityAtWar) {
    const Ruleset& rs = test::mini();
    GameState s = war_scenario();
    const Engine engine(rs);
    engine.apply(s, DeclareWar{kRome, kAztecs});
    const int before = hex_distance(s.civ(kRome).units.back().pos, {8, 3});
    GameState after = s;
    for (const auto& a : baseline_turn(rs, s, kRome)) engine.apply(after, a);
    const Unit* u = find_unit(after, s.civ(kRome).units.back().id);
    ASSERT_NE(u, nullptr);
    EXPECT_LT(hex_distance(u->pos, {8, 3}), before);
}

TEST(Baseline, SeeksPeaceWhenOutmatched) {
    const Ruleset& rs = test::mini();
    GameState s = war_scenario();
    Engine(rs).apply(s, DeclareWar{kRome, kAztecs});
    s.turn += 2;
    const auto actions = baseline_turn(rs, s, kAztecs);
    EXPECT_NE(std::find(actions.begin(), actions.end(),
                        EngineAction{OfferPeace{kAztecs, kRome, std::nullopt}}),
              actions.end());
}

DecisionContext production_context(bool war) {
    DecisionContext c;
    c.kind = DecisionKind::production;
    c.civ = "Rome";
    json relation = {{"civ", "Aztecs"}, {"states", json::array({war ? "war" : "peace"})}};
    c.observation = {{"diplomacy", json::array({relation})}};
    c.options = {{"monument", "economic", "build monument", std::nullopt, json::object()},
                 {"warrior", "military", "train warrior", std::nullopt, json::object()}};
    return c;
}

TEST(ScriptedAdvisor, SingleOptionIsChosen) {
    ScriptedAdvisor advisor;
    DecisionContext c;
    c.kind = DecisionKind::research;
    c.options = {{"pottery", "", "", std::nullopt, json::object()}};
    EXPECT_EQ(advisor.decide(c).choice(), "pottery");
}

TEST(ScriptedAdvisor, MilitaryPreferredAtWar) {
    ScriptedAdvisor advisor;
    EXPECT_EQ(advisor.decide(production_context(true)).choice(), "warrior");
    EXPECT_EQ(advisor.decide(production_context(false)).choice(), "monument");
}

TEST(ScriptedAdvisor, GreedyOnValuesAndPure) {
    ScriptedAdvisor advisor;
    DecisionContext c = production_context(true);
    c.options[0].value = 3.0;
    c.options[1].value = 1.0;
    EXPECT_EQ(advisor.decide(c).choice(), "monument");
    EXPECT_EQ(advisor.decide(c), advisor.decide(c));
    c.kind = DecisionKind::skill_proposal;
    c.max_choices = 3;
    c.allow_empty = true;
    c.options.push_back({"war", "", "", 5.0, json::object()});
    c.options.push_back({"bad", "", "", -1.0, json::object()});
    EXPECT_EQ(advisor.decide(c).choices, (std::vector<std::string>{"war", "monument", "warrior"}));
    c.max_choices = 2;
    EXPECT_EQ(advisor.decide(c).choices, (std::vector<std::string>{"war", "monument"}));
}

TEST(ScriptedAdvisor, EmptyOptionsRejected) {
    ScriptedAdvisor advisor;
    DecisionContext c;
    EXPECT_THROW(advisor.decide(c), Error);
}

TEST(ClosedWorld, RejectsUnofferedRepeatedAndOverlong) {
    const DecisionContext c = production_context(false);
    EXPECT_NO_THROW(check_closed_world(c, {{"warrior"}, ""}));
    EXPECT_THROW(check_closed_world(c, {{"settler"}, ""}), Error);
    EXPECT_THROW(check_closed_world(c, {{}, ""}), Error);
    EXPECT_THROW(check_closed_world(c, {{"warrior", "monument"}, ""}), Error);
    DecisionContext multi = c;
    multi.max_choices = 2;
    EXPECT_THROW(check_closed_world(multi, {{"warrior", "warrior"}, ""}), Error);
}

TEST(Advisors, ContextSurvivesJson) {
    DecisionContext c = production_context(true);
    c.options[0].value = 0.1 + 0.2;
    c.memory_digest = "remember";
    EXPECT_EQ(decode_context(json::parse(encode_context(c).dump())), c);
    const AdvisorDecision d{{"warrior"}, "why"};
    EXPECT_EQ(decode_decision(encode_decision(d)), d);
}

TEST(Advisors, RecordThenReplay) {
    auto recorder = std::make_shared<RecordingAdvisor>(std::make_shared<ScriptedAdvisor>());
    const DecisionContext war = production_context(true);
    const DecisionContext peace = production_context(false);
    const auto a = checked_decide(*recorder, war);
    const auto b = checked_decide(*recorder, peace);
    ReplayAdvisor replay(recorder->log());
    EXPECT_EQ(replay.decide(war), a);
    EXPECT_EQ(replay.decide(peace), b);
    EXPECT_THROW(replay.decide(war), Error);
    ReplayAdvisor wrong(recorder->log());
    DecisionContext research = war;
    research.kind = DecisionKind::research;
    EXPECT_THROW(wrong.decide(research), Error);
}

} // namespace
} // namespace microciv
