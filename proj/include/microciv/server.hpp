#pragma once

#include "microciv/game.hpp"
#include "microciv/policy.hpp"
#include "microciv/ruleset.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace microciv {

struct TransportReply {
    int status = 0;
    std::string body;
};

// Sends `body` as a POST to base_url + path. Throws Error(unreachable) when
// no reply arrives within `timeout`.
using Transport = std::function<TransportReply(const std::string& base_url, const std::string& path,
                                               const std::string& body,
                                               std::chrono::milliseconds timeout)>;

// Monotonic milliseconds; injectable so timeouts can be tested without waiting.
using Clock = std::function<std::chrono::milliseconds()>;

Transport http_transport();
Clock steady_clock_ms();

inline constexpr std::chrono::milliseconds kDecisionTimeout{30000};

struct RemoteCallRecord {
    std::string kind;
    std::string civ;
    int turn = 0;
    std::string outcome; // ok, timeout, unreachable, malformed, closed_world
    std::int64_t latency_ms = 0;
    std::string detail;
};

json encode_remote_call(const RemoteCallRecord& record);

// Advisor reached over HTTP through POST {endpoint}/games/{id}/decision.
// Late, unreachable, malformed or out-of-menu replies fall back to the local
// advisor; every call is logged.
class RemoteAdvisor : public Advisor {
public:
    RemoteAdvisor(std::string endpoint, std::string game_id, std::shared_ptr<Advisor> fallback,
                  Transport transport = http_transport(), Clock clock = steady_clock_ms(),
                  std::chrono::milliseconds timeout = kDecisionTimeout);

    AdvisorDecision decide(const DecisionContext& context) override;
    std::string name() const override { return "remote:" + endpoint_; }

    std::vector<RemoteCallRecord> calls() const;
    void set_log(std::function<void(const RemoteCallRecord&)> sink) { sink_ = std::move(sink); }

private:
    AdvisorDecision fall_back(const DecisionContext& context, RemoteCallRecord record);

    std::string endpoint_;
    std::string game_id_;
    std::shared_ptr<Advisor> fallback_;
    Transport transport_;
    Clock clock_;
    std::chrono::milliseconds timeout_;
    mutable std::mutex mutex_;
    std::vector<RemoteCallRecord> calls_;
    std::function<void(const RemoteCallRecord&)> sink_;
};

// Module side of the decision protocol: serves an advisor over HTTP.
class AdvisorEndpoint {
public:
    explicit AdvisorEndpoint(std::shared_ptr<Advisor> advisor);
    ~AdvisorEndpoint();
    AdvisorEndpoint(const AdvisorEndpoint&) = delete;
    AdvisorEndpoint& operator=(const AdvisorEndpoint&) = delete;

    // Handles one decision request body.
    TransportReply handle(const std::string& body);

    // Binds host:port (0 picks a free port) and serves in a background thread.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    void stop();
    std::string url() const;
    std::size_t requests() const noexcept { return requests_; }

private:
    std::shared_ptr<Advisor> advisor_;
    std::mutex advisor_mutex_;
    std::atomic<std::size_t> requests_{0};
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::string host_;
    int port_ = 0;
};

// Calls the endpoint's handler directly, skipping the socket.
Transport in_process_transport(AdvisorEndpoint& endpoint);

struct Participant {
    enum class Kind { baseline, agent, remote, human };
    Kind kind = Kind::baseline;
    std::string endpoint; // remote only

    bool operator==(const Participant&) const = default;
};

const char* participant_kind_name(Participant::Kind kind) noexcept;

struct SessionConfig {
    GameConfig game;
    int turn_cap = 250;
    std::map<std::string, Participant> participants; // civ name -> controller; absent = baseline

    bool operator==(const SessionConfig&) const = default;
};

json encode_session_config(const SessionConfig& config);
// Throws ConfigError on malformed input.
SessionConfig decode_session_config(const json& j);

struct SaveVersion {
    std::int64_t version = 0;
    std::string save;
};

struct HostMessage {
    std::int64_t seq = 0; // game-wide total order, starting at 1
    std::string channel;
    std::string sender;
    int turn = 0;
    std::string text;

    bool operator==(const HostMessage&) const = default;
};

json encode_chat(const HostMessage& message);
HostMessage decode_chat(const json& j);

struct RatingRecord {
    std::string game_id;
    int turn = 0;
    std::string rater;
    std::string target; // civ name
    std::string decision_ref;
    int score = 0; // 1..5
    std::optional<std::string> comment;

    bool operator==(const RatingRecord&) const = default;
};

json encode_rating(const RatingRecord& rating);
RatingRecord decode_rating(const json& j);

struct AdvanceResult {
    int turn = 0;
    std::int64_t version = 0;
    int turns_played = 0;
    bool finished = false;
    std::optional<std::string> winner;
};

struct HostOptions {
    Transport transport = http_transport();
    Clock clock = steady_clock_ms();
    std::chrono::milliseconds decision_timeout = kDecisionTimeout;
};

// Multiplayer host: sessions, save synchronization, chat, archive, ratings.
// Archive layout: <data_dir>/games/<id>/{config.json, saves/turn_NNNN.json,
// chat.jsonl, transcripts.jsonl, ratings.jsonl}.
class GameHost {
public:
    GameHost(const Ruleset& ruleset, std::filesystem::path data_dir, HostOptions options = {});
    ~GameHost();

    const Ruleset& ruleset() const noexcept { return *ruleset_; }
    const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

    std::string create_game(const SessionConfig& config);
    std::vector<std::string> game_ids() const;
    SessionConfig config(const std::string& game_id) const;

    SaveVersion fetch_save(const std::string& game_id) const;
    // Throws Error(stale_version) unless version exceeds the stored one and
    // SaveError when the save does not load.
    std::int64_t submit_save(const std::string& game_id, const std::string& save, std::int64_t version);

    // Plays up to `turns` turns, archiving each completed turn.
    AdvanceResult advance(const std::string& game_id, int turns);

    HostMessage post_chat(const std::string& game_id, const std::string& channel,
                          const std::string& sender, const std::string& text);
    std::vector<HostMessage> poll_chat(const std::string& game_id, const std::string& channel,
                                       const std::string& viewer, std::int64_t since) const;

    void archive_turn(const std::string& game_id, int turn, const std::string& save,
                      const std::vector<json>& transcripts);
    void submit_rating(const RatingRecord& rating);

    // Dataset bundle assembled from the archive.
    json export_bundle(const std::string& game_id) const;

    std::vector<RemoteCallRecord> remote_calls(const std::string& game_id) const;
    std::vector<std::string> warnings() const;

private:
    struct Session;

    std::shared_ptr<Session> find(const std::string& game_id) const;
    std::filesystem::path game_dir(const std::string& game_id) const;
    void reset_runner(Session& session, GameState state);
    void warn(std::string message);

    const Ruleset* ruleset_;
    std::filesystem::path data_dir_;
    HostOptions options_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    int next_id_ = 1;
    mutable std::mutex warnings_mutex_;
    std::vector<std::string> warnings_;
};

// HTTP front for a GameHost.
class HostServer {
public:
    explicit HostServer(GameHost& host);
    ~HostServer();
    HostServer(const HostServer&) = delete;
    HostServer& operator=(const HostServer&) = delete;

    int start(const std::string& host = "127.0.0.1", int port = 0);
    // Serves on the calling thread until stop().
    void listen(const std::string& host, int port);
    void stop();
    int port() const noexcept { return port_; }

private:
    void routes();

    GameHost* host_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

} // namespace microciv
