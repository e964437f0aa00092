#include "support.hpp"

#include "microciv/error.hpp"
#include "microciv/persistence.hpp"
#include "microciv/server.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <set>
#include <thread>

namespace microciv {
namespace {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("microciv-server-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

SessionConfig small_session(int cap = 10, std::vector<std::string> civs = {"Rome", "Aztecs", "Greece"}) {
    SessionConfig c;
    c.game.civs = std::move(civs);
    c.game.width = 12;
    c.game.height = 10;
    c.game.seed = 1;
    c.turn_cap = cap;
    return c;
}

std::string error_code(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

TEST(Host, SaveRoundTripAndStaleVersions) {
    TempDir dir;
    GameHost host(test::mini(), dir.path());
    const std::string id = host.create_game(small_session());
    const SaveVersion first = host.fetch_save(id);
    EXPECT_EQ(first.version, 1);
    GameState s = load_game(first.save, test::mini());
    s.civ(CivId{0}).gold += 17;
    const std::string edited = save_game(s);
    EXPECT_EQ(host.submit_save(id, edited, 2), 2);
    EXPECT_EQ(host.fetch_save(id).save, edited);
    EXPECT_EQ(error_code([&] { host.submit_save(id, edited, 2); }), "stale_version");
    EXPECT_EQ(error_code([&] { host.submit_save(id, edited, 1); }), "stale_version");
    EXPECT_EQ(error_code([&] { host.submit_save(id, "not json", 3); }).empty(), false);
    EXPECT_EQ(host.fetch_save(id).save, edited);
    EXPECT_EQ(error_code([&] { host.fetch_save("game-9999"); }), "unknown_game");
}

TEST(Host, ConcurrentSessionsAreIsolated) {
    TempDir dir;
    GameHost host(test::mini(), dir.path());
    std::vector<std::string> ids(8);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] { ids[i] = host.create_game(small_session()); });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), 8u);
    const std::string before = host.fetch_save(ids[1]).save;
    host.advance(ids[0], 3);
    host.post_chat(ids[0], "global", "Rome", "only in game A");
    EXPECT_EQ(host.fetch_save(ids[1]).save, before);
    EXPECT_TRUE(host.poll_chat(ids[1], "global", "Rome", 0).empty());
    EXPECT_EQ(host.fetch_save(ids[0]).version, 4);
}

TEST(Chat, PostPollAndAuthorization) {
    TempDir dir;
    GameHost host(test::mini(), dir.path());
    const std::string id = host.create_game(small_session());
    const HostMessage m = host.post_chat(id, "global", "Rome", "hello");
    const auto polled = host.poll_chat(id, "global", "Greece", 0);
    ASSERT_EQ(polled.size(), 1u);
    EXPECT_EQ(polled[0], m);
    EXPECT_TRUE(host.poll_chat(id, "global", "Greece", m.seq).empty());

    const std::string channel = private_channel("Rome", "Aztecs");
    host.post_chat(id, channel, "Aztecs", "psst");
    EXPECT_EQ(error_code([&] { host.post_chat(id, channel, "Greece", "me too"); }), "forbidden");
    EXPECT_EQ(error_code([&] { host.poll_chat(id, channel, "Greece", 0); }), "forbidden");
    EXPECT_EQ(error_code([&] { host.post_chat(id, "global", "Egypt", "hi"); }), "not_participant");
    EXPECT_EQ(error_code([&] { host.post_chat(id, "private:Egypt|Rome", "Rome", "hi"); }), "unknown_channel");
    EXPECT_EQ(error_code([&] { host.post_chat(id, "lobby", "Rome", "hi"); }), "unknown_channel");
}

TEST(Chat, ConcurrentWritersShareOneTotalOrder) {
    TempDir dir;
    GameHost host(test::mini(), dir.path());
    const std::vector<std::string> civs = {"Rome", "Aztecs", "Greece", "Egypt"};
    const std::string id = host.create_game(small_session(10, civs));
    std::vector<std::thread> writers;
    for (const auto& civ : civs) {
        writers.emplace_back([&, civ] {
            for (int i = 0; i < 25; ++i) host.post_chat(id, "global", civ, civ + " " + std::to_string(i));
        });
    }
    for (auto& t : writers) t.join();
    const auto all = host.poll_chat(id, "global", "Rome", 0);
    ASSERT_EQ(all.size(), 100u);
    std::map<std::string, int> next;
    for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_EQ(all[i].seq, static_cast<std::int64_t>(i) + 1);
        EXPECT_EQ(all[i].text, all[i].sender + " " + std::to_string(next[all[i].sender]++));
    }
    const auto tail = host.poll_chat(id, "global", "Egypt", 60);
    ASSERT_EQ(tail.size(), 40u);
    EXPECT_EQ(tail.front().seq, 61);
    // The archive holds the same order.
    const json bundle = host.export_bundle(id);
    ASSERT_EQ(bundle["chat"].size(), 100u);
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(decode_chat(bundle["chat"][i]), all[i]);
}

TEST(Archive, OneSnapshotPerCompletedTurnAndReloadableExport) {
    TempDir dir;
    GameHost host(test::mini(), dir.path());
    SessionConfig cfg = small_session(50, {"Rome", "Aztecs"});
    cfg.participants["Rome"] = {Participant::Kind::agent, ""};
    const std::string id = host.create_game(cfg);
    int played = 0;
    while (true) {
        const AdvanceResult r = host.advance(id, 7);
        played += r.turns_played;
        if (r.finished) break;
    }
    EXPECT_EQ(played, 50);
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir.path() / "games" / id / "saves")) files += e.path().extension() == ".json";
    EXPECT_EQ(files, 50);
    const json bundle = host.export_bundle(id);
    ASSERT_EQ(bundle["saves"].size(), 50u);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(bundle["saves"][i]["turn"], static_cast<int>(i));
        EXPECT_NO_THROW(load_game(bundle["saves"][i]["save"].get<std::string>(), test::mini()));
    }
    EXPECT_EQ(bundle["saves"][49]["save"].get<std::string>(), host.fetch_save(id).save);
    EXPECT_FALSE(bundle["transcripts"].empty());
    EXPECT_EQ(decode_session_config(bundle["config"]).game.civs, cfg.game.civs);
    EXPECT_TRUE(host.warnings().empty());
}

TEST(Archive, StorageFailureIsLoggedNotFatal) {
    TempDir dir;
    GameHost host(test::mini(), dir.path());
    const std::string id = host.create_game(small_session());
    fs::remove_all(dir.path() / "games" / id / "saves");
    const AdvanceResult r = host.advance(id, 2);
    EXPECT_EQ(r.turns_played, 2);
    EXPECT_EQ(host.warnings().size(), 2u);
}

TEST(Ratings, RangeValidated) {
    TempDir dir;
    GameHost host(test::mini(), dir.path());
    const std::string id = host.create_game(small_session());
    RatingRecord r{id, 0, "expert", "Rome", "turn-0/production", 7, std::nullopt};
    EXPECT_EQ(error_code([&] { host.submit_rating(r); }), "invalid_rating");
    r.score = 0;
    EXPECT_EQ(error_code([&] { host.submit_rating(r); }), "invalid_rating");
    for (int score = 1; score <= 5; ++score) {
        r.score = score;
        host.submit_rating(r);
    }
    r.target = "Egypt";
    EXPECT_EQ(error_code([&] { host.submit_rating(r); }), "invalid_rating");
    const json bundle = host.export_bundle(id);
    ASSERT_EQ(bundle["ratings"].size(), 5u);
    EXPECT_EQ(decode_rating(bundle["ratings"][4]).score, 5);
}

DecisionContext research_context() {
    DecisionContext c;
    c.kind = DecisionKind::research;
    c.game_id = "g";
    c.civ = "Rome";
    c.options = {{"a", "tech", "A", 1.0, json::object()},
                 {"b", "tech", "B", 3.0, json::object()},
                 {"c", "tech", "C", 2.0, json::object()}};
    return c;
}

TransportReply choose(const std::string& id) {
    return {200, encode_decision(AdvisorDecision{{id}, "remote"}).dump()};
}

TEST(RemoteAdvisor, ClosedWorldAndMalformedRepliesFallBack) {
    auto fallback = std::make_shared<ScriptedAdvisor>();
    const DecisionContext c = research_context();
    const std::string local = fallback->decide(c).choice();
    int fake_now = 0;
    const Clock clock = [&] { return std::chrono::milliseconds(fake_now); };

    RemoteAdvisor ok("http://module", "g", fallback, [](auto&&...) { return choose("a"); }, clock);
    EXPECT_EQ(ok.decide(c).choice(), "a");
    EXPECT_EQ(ok.calls().back().outcome, "ok");

    RemoteAdvisor rogue("http://module", "g", fallback, [](auto&&...) { return choose("z"); }, clock);
    EXPECT_EQ(rogue.decide(c).choice(), local);
    EXPECT_EQ(rogue.calls().back().outcome, "closed_world");

    RemoteAdvisor garbage("http://module", "g", fallback,
                          [](auto&&...) { return TransportReply{200, "{\"choice\": 3"}; }, clock);
    EXPECT_EQ(garbage.decide(c).choice(), local);
    EXPECT_EQ(garbage.calls().back().outcome, "malformed");

    RemoteAdvisor down("http://module", "g", fallback,
                       [](auto&&...) -> TransportReply { throw Error("unreachable", "refused"); }, clock);
    EXPECT_EQ(down.decide(c).choice(), local);
    EXPECT_EQ(down.calls().back().outcome, "unreachable");
}

TEST(RemoteAdvisor, TimeoutWithMockClock) {
    auto fallback = std::make_shared<ScriptedAdvisor>();
    const DecisionContext c = research_context();
    const std::string local = fallback->decide(c).choice();
    ASSERT_NE(local, "a");
    std::int64_t now = 1000;
    std::chrono::milliseconds given{0};
    std::int64_t sleep_ms = 60000;
    const Transport sleepy = [&](const std::string&, const std::string&, const std::string&,
                                 std::chrono::milliseconds timeout) {
        given = timeout;
        now += sleep_ms;
        return choose("a");
    };
    RemoteAdvisor remote("http://module", "g", fallback, sleepy, [&] { return std::chrono::milliseconds(now); });
    EXPECT_EQ(remote.decide(c).choice(), local);
    EXPECT_EQ(given, std::chrono::milliseconds(30000));
    EXPECT_EQ(remote.calls().back().outcome, "timeout");
    EXPECT_EQ(remote.calls().back().latency_ms, 60000);

    sleep_ms = 29999;
    EXPECT_EQ(remote.decide(c).choice(), "a");
    EXPECT_EQ(remote.calls().back().outcome, "ok");
    sleep_ms = 30000;
    EXPECT_EQ(remote.decide(c).choice(), local);
    EXPECT_EQ(remote.calls().back().outcome, "timeout");
}

std::string in_process_game(const std::string& game_id, const SessionConfig& session) {
    RunnerConfig rc;
    rc.game = session.game;
    rc.game.game_id = game_id;
    rc.turn_cap = session.turn_cap;
    for (std::size_t i = 0; i < session.game.civs.size(); ++i) {
        rc.seats.push_back(SeatController::agent_seat(std::make_shared<ScriptedAdvisor>()));
    }
    GameRunner runner(test::mini(), rc);
    runner.run();
    return save_game(runner.state());
}

TEST(TransportInvariance, HttpEndpointsMatchInProcessGame) {
    AdvisorEndpoint endpoint(std::make_shared<ScriptedAdvisor>());
    endpoint.start();
    TempDir dir;
    GameHost host(test::mini(), dir.path());
    SessionConfig cfg;
    cfg.game.civs = test::four_civs();
    cfg.game.seed = 21;
    cfg.turn_cap = 30;
    for (const auto& civ : cfg.game.civs) cfg.participants[civ] = {Participant::Kind::remote, endpoint.url()};
    const std::string id = host.create_game(cfg);
    const AdvanceResult r = host.advance(id, 1000);
    EXPECT_EQ(r.turns_played, 30);
    EXPECT_GT(endpoint.requests(), 100u);
    const auto calls = host.remote_calls(id);
    ASSERT_EQ(calls.size(), endpoint.requests());
    for (const auto& call : calls) ASSERT_EQ(call.outcome, "ok") << call.detail;
    EXPECT_EQ(host.fetch_save(id).save, in_process_game(id, cfg));
}

TEST(TransportInvariance, InProcessTransportMatchesToo) {
    AdvisorEndpoint endpoint(std::make_shared<ScriptedAdvisor>());
    TempDir dir;
    HostOptions options;
    options.transport = in_process_transport(endpoint);
    GameHost host(test::mini(), dir.path(), options);
    SessionConfig cfg;
    cfg.game.civs = test::four_civs();
    cfg.game.seed = 5;
    cfg.turn_cap = 20;
    for (const auto& civ : cfg.game.civs) cfg.participants[civ] = {Participant::Kind::remote, "inproc"};
    const std::string id = host.create_game(cfg);
    host.advance(id, 20);
    EXPECT_EQ(host.fetch_save(id).save, in_process_game(id, cfg));
}

// Expected bodies are matched as subsets: every listed field must be present
// and equal; error messages are free text and left out of the fixtures.
bool subset(const json& expected, const json& actual) {
    if (expected.is_object()) {
        if (!actual.is_object()) return false;
        for (const auto& [k, v] : expected.items()) {
            if (!actual.contains(k) || !subset(v, actual.at(k))) return false;
        }
        return true;
    }
    if (expected.is_array()) {
        if (!actual.is_array() || actual.size() != expected.size()) return false;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (!subset(expected[i], actual[i])) return false;
        }
        return true;
    }
    return expected == actual;
}

void replay(httplib::Client& client, const json& exchanges) {
    for (const auto& ex : exchanges) {
        SCOPED_TRACE(ex["name"].get<std::string>());
        const json& rq = ex["request"];
        const std::string method = rq["method"];
        const std::string path = rq["path"];
        const std::string body = rq.contains("raw_body") ? rq["raw_body"].get<std::string>()
                                 : rq.contains("body")   ? rq["body"].dump()
                                                         : "";
        httplib::Headers headers;
        const json request_headers = rq.value("headers", json::object());
        for (const auto& [k, v] : request_headers.items()) headers.emplace(k, v.get<std::string>());
        httplib::Result res = method == "GET"  ? client.Get(path, headers)
                              : method == "PUT" ? client.Put(path, headers, body, "application/json")
                                                : client.Post(path, headers, body, "application/json");
        ASSERT_TRUE(res);
        const json& want = ex["response"];
        EXPECT_EQ(res->status, want["status"].get<int>()) << res->body;
        const json response_headers = want.value("headers", json::object());
        for (const auto& [k, v] : response_headers.items()) {
            EXPECT_EQ(res->get_header_value(k), v.get<std::string>());
        }
        if (want.contains("body")) EXPECT_TRUE(subset(want["body"], json::parse(res->body))) << res->body;
    }
}

json fixture(const std::string& name) {
    return json::parse(test::read_file(std::string(MICROCIV_TEST_DIR) + "/../docs/protocol/" + name));
}

TEST(Protocol, HostGoldenExchanges) {
    TempDir dir;
    GameHost host(test::mini(), dir.path());
    HostServer server(host);
    const int port = server.start();
    httplib::Client client("127.0.0.1", port);
    replay(client, fixture("host_exchanges.json"));
    const json bundle = host.export_bundle("game-0001");
    EXPECT_EQ(bundle["saves"].size(), 2u);
    EXPECT_EQ(bundle["ratings"].size(), 1u);
    EXPECT_EQ(bundle["chat"].size(), 2u);
}

TEST(Protocol, DecisionGoldenExchanges) {
    AdvisorEndpoint endpoint(std::make_shared<ScriptedAdvisor>());
    const int port = endpoint.start();
    httplib::Client client("127.0.0.1", port);
    replay(client, fixture("decision_exchanges.json"));
}

TEST(Protocol, ExportOverHttpIsReloadable) {
    TempDir dir;
    GameHost host(test::mini(), dir.path());
    HostServer server(host);
    httplib::Client client("127.0.0.1", server.start());
    auto created = client.Post("/games", encode_session_config(small_session(4)).dump(), "application/json");
    ASSERT_TRUE(created);
    const std::string id = json::parse(created->body)["game_id"];
    ASSERT_TRUE(client.Post("/games/" + id + "/advance", "{\"turns\": 10}", "application/json"));
    auto exported = client.Get("/games/" + id + "/export");
    ASSERT_TRUE(exported);
    ASSERT_EQ(exported->status, 200);
    const json bundle = json::parse(exported->body);
    ASSERT_EQ(bundle["saves"].size(), 4u);
    for (const auto& s : bundle["saves"]) EXPECT_NO_THROW(load_game(s["save"].get<std::string>(), test::mini()));
}

} // namespace
} // namespace microciv
