#include "microciv/server.hpp"

#include "microciv/error.hpp"
#include "microciv/persistence.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace microciv {

namespace fs = std::filesystem;

namespace {

json error_body(const std::string& code, const std::string& message) {
    return json{{"error", {{"code", code}, {"message", message}}}};
}

std::string turn_file(int turn) {
    std::ostringstream out;
    out << "turn_" << std::setw(4) << std::setfill('0') << turn << ".json";
    return out.str();
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw SaveError("storage_failure", "cannot write " + tmp.string());
        out << bytes;
        out.flush();
        if (!out) throw SaveError("storage_failure", "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw SaveError("storage_failure", "cannot rename " + tmp.string() + ": " + ec.message());
}

void append_line(const fs::path& path, const json& record) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw SaveError("storage_failure", "cannot append to " + path.string());
    out << record.dump() << '\n';
    out.flush();
    if (!out) throw SaveError("storage_failure", "append failed for " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SaveError("storage_failure", "cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::vector<json> read_lines(const fs::path& path) {
    std::vector<json> out;
    if (!fs::exists(path)) return out;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(json::parse(line));
    }
    return out;
}

} // namespace

Transport http_transport() {
    struct Pool {
        std::mutex mutex;
        std::map<std::string, std::unique_ptr<httplib::Client>> clients;
    };
    auto pool = std::make_shared<Pool>();
    return [pool](const std::string& base_url, const std::string& path, const std::string& body,
                  std::chrono::milliseconds timeout) {
        std::lock_guard lock(pool->mutex);
        auto& client = pool->clients[base_url];
        if (!client) {
            client = std::make_unique<httplib::Client>(base_url);
            client->set_keep_alive(true);
        }
        client->set_connection_timeout(timeout);
        client->set_read_timeout(timeout);
        client->set_write_timeout(timeout);
        auto res = client->Post(path, body, "application/json");
        if (!res) {
            const std::string why = httplib::to_string(res.error());
            pool->clients.erase(base_url);
            throw Error("unreachable", base_url + path + ": " + why);
        }
        return TransportReply{res->status, res->body};
    };
}

Clock steady_clock_ms() {
    return [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now().time_since_epoch());
    };
}

json encode_remote_call(const RemoteCallRecord& r) {
    return json{{"kind", r.kind},       {"civ", r.civ},       {"turn", r.turn},
                {"outcome", r.outcome}, {"latency_ms", r.latency_ms}, {"detail", r.detail}};
}

RemoteAdvisor::RemoteAdvisor(std::string endpoint, std::string game_id, std::shared_ptr<Advisor> fallback,
                             Transport transport, Clock clock, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)),
      game_id_(std::move(game_id)),
      fallback_(std::move(fallback)),
      transport_(std::move(transport)),
      clock_(std::move(clock)),
      timeout_(timeout) {
    if (!fallback_) throw ConfigError("missing_advisor", "remote advisor needs a fallback");
    if (!transport_ || !clock_) throw ConfigError("invalid_transport", "transport and clock are required");
}

AdvisorDecision RemoteAdvisor::decide(const DecisionContext& context) {
    RemoteCallRecord record{decision_kind_name(context.kind), context.civ, context.turn, "ok", 0, ""};
    const json request{{"game_id", game_id_}, {"civ", context.civ}, {"context", encode_context(context)}};
    const auto started = clock_();
    TransportReply reply;
    try {
        reply = transport_(endpoint_, "/games/" + game_id_ + "/decision", request.dump(), timeout_);
    } catch (const Error& e) {
        record.latency_ms = (clock_() - started).count();
        record.outcome = record.latency_ms >= timeout_.count() ? "timeout" : "unreachable";
        record.detail = e.what();
        return fall_back(context, std::move(record));
    }
    record.latency_ms = (clock_() - started).count();
    if (record.latency_ms >= timeout_.count()) {
        record.outcome = "timeout";
        record.detail = "reply after " + std::to_string(record.latency_ms) + " ms";
        return fall_back(context, std::move(record));
    }
    AdvisorDecision decision;
    try {
        if (reply.status != 200) throw Error("malformed", "status " + std::to_string(reply.status));
        decision = decode_decision(json::parse(reply.body));
    } catch (const std::exception& e) {
        record.outcome = "malformed";
        record.detail = e.what();
        return fall_back(context, std::move(record));
    }
    try {
        check_closed_world(context, decision);
    } catch (const Error& e) {
        record.outcome = "closed_world";
        record.detail = e.what();
        return fall_back(context, std::move(record));
    }
    {
        std::lock_guard lock(mutex_);
        calls_.push_back(record);
    }
    if (sink_) sink_(record);
    return decision;
}

AdvisorDecision RemoteAdvisor::fall_back(const DecisionContext& context, RemoteCallRecord record) {
    std::cerr << "warning: remote advisor " << endpoint_ << " " << record.outcome << " (" << record.detail
              << "), using fallback\n";
    {
        std::lock_guard lock(mutex_);
        calls_.push_back(record);
    }
    if (sink_) sink_(record);
    return checked_decide(*fallback_, context);
}

std::vector<RemoteCallRecord> RemoteAdvisor::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

AdvisorEndpoint::AdvisorEndpoint(std::shared_ptr<Advisor> advisor) : advisor_(std::move(advisor)) {
    if (!advisor_) throw ConfigError("missing_advisor", "endpoint needs an advisor");
}

AdvisorEndpoint::~AdvisorEndpoint() { stop(); }

TransportReply AdvisorEndpoint::handle(const std::string& body) {
    ++requests_;
    DecisionContext context;
    try {
        const json j = json::parse(body);
        context = decode_context(j.at("context"));
    } catch (const std::exception& e) {
        return {400, error_body("bad_request", e.what()).dump()};
    }
    try {
        std::lock_guard lock(advisor_mutex_);
        return {200, encode_decision(advisor_->decide(context)).dump()};
    } catch (const std::exception& e) {
        return {500, error_body("advisor_failure", e.what()).dump()};
    }
}

int AdvisorEndpoint::start(const std::string& host, int port) {
    if (server_) throw Error("already_running", "endpoint already started");
    server_ = std::make_unique<httplib::Server>();
    server_->Post(R"(/games/([A-Za-z0-9_-]+)/decision)", [this](const httplib::Request& req, httplib::Response& res) {
        const TransportReply reply = handle(req.body);
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    });
    host_ = host;
    port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (port_ < 0) {
        server_.reset();
        throw Error("bind_failed", "cannot bind " + host + ":" + std::to_string(port));
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void AdvisorEndpoint::stop() {
    if (!server_) return;
    server_->stop();
    if (thread_.joinable()) thread_.join();
    server_.reset();
}

std::string AdvisorEndpoint::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

Transport in_process_transport(AdvisorEndpoint& endpoint) {
    return [&endpoint](const std::string&, const std::string&, const std::string& body, std::chrono::milliseconds) {
        return endpoint.handle(body);
    };
}

const char* participant_kind_name(Participant::Kind kind) noexcept {
    switch (kind) {
    case Participant::Kind::baseline: return "baseline";
    case Participant::Kind::agent: return "agent";
    case Participant::Kind::remote: return "remote";
    case Participant::Kind::human: return "human";
    }
    return "baseline";
}

json encode_session_config(const SessionConfig& c) {
    json participants = json::object();
    for (const auto& [name, p] : c.participants) {
        json entry{{"kind", participant_kind_name(p.kind)}};
        if (p.kind == Participant::Kind::remote) entry["endpoint"] = p.endpoint;
        participants[name] = entry;
    }
    return json{{"civs", c.game.civs},          {"width", c.game.width}, {"height", c.game.height},
                {"seed", c.game.seed},          {"turn_cap", c.turn_cap},
                {"participants", participants}};
}

SessionConfig decode_session_config(const json& j) {
    SessionConfig c;
    try {
        if (!j.is_object()) throw ConfigError("invalid_config", "config must be an object");
        c.game.civs = j.at("civs").get<std::vector<std::string>>();
        c.game.width = j.value("width", c.game.width);
        c.game.height = j.value("height", c.game.height);
        c.game.seed = j.value("seed", std::uint64_t{0});
        c.turn_cap = j.value("turn_cap", c.turn_cap);
        const json participants = j.value("participants", json::object());
        for (const auto& [name, entry] : participants.items()) {
            Participant p;
            const std::string kind = entry.at("kind").get<std::string>();
            if (kind == "baseline") p.kind = Participant::Kind::baseline;
            else if (kind == "agent") p.kind = Participant::Kind::agent;
            else if (kind == "remote") p.kind = Participant::Kind::remote;
            else if (kind == "human") p.kind = Participant::Kind::human;
            else throw ConfigError("invalid_config", "unknown participant kind " + kind);
            if (p.kind == Participant::Kind::remote) p.endpoint = entry.at("endpoint").get<std::string>();
            c.participants[name] = p;
        }
    } catch (const json::exception& e) {
        throw ConfigError("invalid_config", e.what());
    }
    if (c.game.civs.size() < 2) throw ConfigError("invalid_config", "at least two civilizations required");
    if (c.turn_cap < 1) throw ConfigError("invalid_config", "turn_cap must be >= 1");
    for (const auto& [name, p] : c.participants) {
        if (std::find(c.game.civs.begin(), c.game.civs.end(), name) == c.game.civs.end()) {
            throw ConfigError("invalid_config", "participant " + name + " is not a civilization");
        }
    }
    return c;
}

json encode_chat(const HostMessage& m) {
    return json{{"seq", m.seq}, {"channel", m.channel}, {"sender", m.sender}, {"turn", m.turn}, {"text", m.text}};
}

HostMessage decode_chat(const json& j) {
    return {j.at("seq").get<std::int64_t>(), j.at("channel").get<std::string>(), j.at("sender").get<std::string>(),
            j.at("turn").get<int>(), j.at("text").get<std::string>()};
}

json encode_rating(const RatingRecord& r) {
    json j{{"game_id", r.game_id}, {"turn", r.turn},   {"rater", r.rater},
           {"target", r.target},   {"decision_ref", r.decision_ref}, {"score", r.score}};
    if (r.comment) j["comment"] = *r.comment;
    return j;
}

RatingRecord decode_rating(const json& j) {
    RatingRecord r;
    try {
        r.game_id = j.at("game_id").get<std::string>();
        r.turn = j.at("turn").get<int>();
        r.rater = j.at("rater").get<std::string>();
        r.target = j.at("target").get<std::string>();
        r.decision_ref = j.value("decision_ref", std::string());
        r.score = j.at("score").get<int>();
        if (j.contains("comment")) r.comment = j.at("comment").get<std::string>();
    } catch (const json::exception& e) {
        throw Error("invalid_rating", e.what());
    }
    return r;
}

struct GameHost::Session {
    std::string id;
    SessionConfig config;
    fs::path dir;

    // Turn pipeline: one writer at a time.
    mutable std::mutex mutex;
    std::int64_t version = 1;
    std::string save;
    std::unique_ptr<GameRunner> runner;
    std::vector<std::shared_ptr<RemoteAdvisor>> remotes;
    std::vector<json> pending_transcripts;

    // Chat is concurrent with the turn pipeline.
    mutable std::mutex chat_mutex;
    std::vector<HostMessage> chat;

    mutable std::mutex archive_mutex;
    std::atomic<int> turn{0};

    bool is_civ(const std::string& name) const {
        return std::find(config.game.civs.begin(), config.game.civs.end(), name) != config.game.civs.end();
    }
};

GameHost::GameHost(const Ruleset& ruleset, fs::path data_dir, HostOptions options)
    : ruleset_(&ruleset), data_dir_(std::move(data_dir)), options_(std::move(options)) {
    std::error_code ec;
    fs::create_directories(data_dir_ / "games", ec);
    if (ec) throw ConfigError("invalid_data_dir", "cannot create " + (data_dir_ / "games").string());
}

GameHost::~GameHost() = default;

fs::path GameHost::game_dir(const std::string& game_id) const { return data_dir_ / "games" / game_id; }

std::shared_ptr<GameHost::Session> GameHost::find(const std::string& game_id) const {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(game_id);
    if (it == sessions_.end()) throw Error("unknown_game", "no game " + game_id);
    return it->second;
}

void GameHost::warn(std::string message) {
    std::cerr << "warning: " << message << '\n';
    std::lock_guard lock(warnings_mutex_);
    warnings_.push_back(std::move(message));
}

std::vector<std::string> GameHost::warnings() const {
    std::lock_guard lock(warnings_mutex_);
    return warnings_;
}

void GameHost::reset_runner(Session& s, GameState state) {
    RunnerConfig rc;
    rc.game = s.config.game;
    rc.turn_cap = std::max(1, s.config.turn_cap - state.turn);
    s.remotes.clear();
    for (const auto& name : s.config.game.civs) {
        auto it = s.config.participants.find(name);
        const Participant p = it == s.config.participants.end() ? Participant{} : it->second;
        switch (p.kind) {
        case Participant::Kind::agent:
            rc.seats.push_back(SeatController::agent_seat(std::make_shared<ScriptedAdvisor>()));
            break;
        case Participant::Kind::remote: {
            auto remote = std::make_shared<RemoteAdvisor>(p.endpoint, s.id, std::make_shared<ScriptedAdvisor>(),
                                                          options_.transport, options_.clock,
                                                          options_.decision_timeout);
            s.remotes.push_back(remote);
            rc.seats.push_back(SeatController::agent_seat(remote, "remote"));
            break;
        }
        case Participant::Kind::baseline:
        case Participant::Kind::human:
            rc.seats.push_back(SeatController::baseline_seat());
            break;
        }
    }
    GameHooks hooks;
    Session* session = &s;
    hooks.transcript = [session](const json& record) { session->pending_transcripts.push_back(record); };
    s.turn = state.turn;
    s.runner = std::make_unique<GameRunner>(*ruleset_, rc, std::move(state), std::move(hooks));
}

std::string GameHost::create_game(const SessionConfig& config) {
    if (config.game.civs.size() < 2) throw ConfigError("invalid_config", "at least two civilizations required");
    auto s = std::make_shared<Session>();
    {
        std::unique_lock lock(sessions_mutex_);
        do {
            std::ostringstream out;
            out << "game-" << std::setw(4) << std::setfill('0') << next_id_++;
            s->id = out.str();
        } while (sessions_.count(s->id) || fs::exists(game_dir(s->id)));
    }
    s->config = config;
    s->config.game.game_id = s->id;
    s->dir = game_dir(s->id);
    fs::create_directories(s->dir / "saves");
    write_file_atomic(s->dir / "config.json", encode_session_config(s->config).dump(2) + "\n");
    GameState state = Engine(*ruleset_).new_game(s->config.game);
    s->save = save_game(state);
    reset_runner(*s, std::move(state));
    std::unique_lock registry(sessions_mutex_);
    sessions_[s->id] = s;
    return s->id;
}

std::vector<std::string> GameHost::game_ids() const {
    std::shared_lock lock(sessions_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
}

SessionConfig GameHost::config(const std::string& game_id) const { return find(game_id)->config; }

SaveVersion GameHost::fetch_save(const std::string& game_id) const {
    auto s = find(game_id);
    std::lock_guard lock(s->mutex);
    return {s->version, s->save};
}

std::int64_t GameHost::submit_save(const std::string& game_id, const std::string& save, std::int64_t version) {
    auto s = find(game_id);
    std::lock_guard lock(s->mutex);
    if (version <= s->version) {
        throw Error("stale_version", "version " + std::to_string(version) + " is not newer than " +
                                         std::to_string(s->version));
    }
    GameState state = load_game(save, *ruleset_);
    if (state.civs.size() != s->config.game.civs.size()) {
        throw SaveError("civ_mismatch", "save does not match the session's civilizations");
    }
    for (std::size_t i = 0; i < state.civs.size(); ++i) {
        if (state.civs[i].name != s->config.game.civs[i]) {
            throw SaveError("civ_mismatch", "save changes the session's turn order");
        }
    }
    s->version = version;
    s->save = save;
    reset_runner(*s, std::move(state));
    return s->version;
}

AdvanceResult GameHost::advance(const std::string& game_id, int turns) {
    if (turns < 1) throw Error("invalid_argument", "turns must be >= 1");
    auto s = find(game_id);
    std::lock_guard lock(s->mutex);
    AdvanceResult result;
    for (int i = 0; i < turns && !s->runner->finished(); ++i) {
        s->runner->play_turn();
        ++result.turns_played;
        const std::string save = save_game(s->runner->state());
        s->save = save;
        ++s->version;
        s->turn = s->runner->state().turn;
        std::vector<json> transcripts = std::move(s->pending_transcripts);
        s->pending_transcripts.clear();
        try {
            archive_turn(game_id, s->runner->turns().back().turn, save, transcripts);
        } catch (const std::exception& e) {
            warn("archive of " + game_id + " failed: " + e.what());
        }
    }
    result.turn = s->runner->state().turn;
    result.version = s->version;
    result.finished = s->runner->finished();
    if (auto w = s->runner->winner()) result.winner = s->runner->state().civ(*w).name;
    return result;
}

HostMessage GameHost::post_chat(const std::string& game_id, const std::string& channel, const std::string& sender,
                                const std::string& text) {
    auto s = find(game_id);
    if (!s->is_civ(sender)) throw Error("not_participant", sender + " is not in " + game_id);
    const bool known = channel == kGlobalChannel || [&] {
        for (const auto& a : s->config.game.civs) {
            for (const auto& b : s->config.game.civs) {
                if (a != b && private_channel(a, b) == channel) return true;
            }
        }
        return false;
    }();
    if (!known) throw Error("unknown_channel", "no channel " + channel + " in " + game_id);
    if (!channel_member(channel, sender)) throw Error("forbidden", sender + " may not post to " + channel);
    std::lock_guard lock(s->chat_mutex);
    HostMessage m{static_cast<std::int64_t>(s->chat.size()) + 1, channel, sender, s->turn.load(), text};
    {
        std::lock_guard archive(s->archive_mutex);
        append_line(s->dir / "chat.jsonl", encode_chat(m));
    }
    s->chat.push_back(m);
    return m;
}

std::vector<HostMessage> GameHost::poll_chat(const std::string& game_id, const std::string& channel,
                                             const std::string& viewer, std::int64_t since) const {
    auto s = find(game_id);
    if (!s->is_civ(viewer)) throw Error("not_participant", viewer + " is not in " + game_id);
    bool known = channel == kGlobalChannel;
    for (const auto& a : s->config.game.civs) {
        for (const auto& b : s->config.game.civs) known |= a != b && private_channel(a, b) == channel;
    }
    if (!known) throw Error("unknown_channel", "no channel " + channel + " in " + game_id);
    if (!channel_member(channel, viewer)) throw Error("forbidden", viewer + " may not read " + channel);
    std::lock_guard lock(s->chat_mutex);
    std::vector<HostMessage> out;
    for (const auto& m : s->chat) {
        if (m.seq > since && m.channel == channel) out.push_back(m);
    }
    return out;
}

void GameHost::archive_turn(const std::string& game_id, int turn, const std::string& save,
                            const std::vector<json>& transcripts) {
    auto s = find(game_id);
    std::lock_guard lock(s->archive_mutex);
    write_file_atomic(s->dir / "saves" / turn_file(turn), save);
    for (const auto& t : transcripts) append_line(s->dir / "transcripts.jsonl", json{{"turn", turn}, {"record", t}});
}

void GameHost::submit_rating(const RatingRecord& rating) {
    if (rating.score < 1 || rating.score > 5) {
        throw Error("invalid_rating", "score " + std::to_string(rating.score) + " outside [1,5]");
    }
    auto s = find(rating.game_id);
    if (!s->is_civ(rating.target)) throw Error("invalid_rating", "unknown target civ " + rating.target);
    std::lock_guard lock(s->archive_mutex);
    append_line(s->dir / "ratings.jsonl", encode_rating(rating));
}

json GameHost::export_bundle(const std::string& game_id) const {
    auto s = find(game_id);
    std::lock_guard lock(s->archive_mutex);
    json saves = json::array();
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(s->dir / "saves")) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const std::string stem = f.stem().string();
        saves.push_back({{"turn", std::stoi(stem.substr(5))}, {"save", read_file(f)}});
    }
    return json{{"bundle_version", 1},
                {"game_id", game_id},
                {"config", json::parse(read_file(s->dir / "config.json"))},
                {"saves", saves},
                {"chat", read_lines(s->dir / "chat.jsonl")},
                {"transcripts", read_lines(s->dir / "transcripts.jsonl")},
                {"ratings", read_lines(s->dir / "ratings.jsonl")}};
}

std::vector<RemoteCallRecord> GameHost::remote_calls(const std::string& game_id) const {
    auto s = find(game_id);
    std::lock_guard lock(s->mutex);
    std::vector<RemoteCallRecord> out;
    for (const auto& r : s->remotes) {
        const auto calls = r->calls();
        out.insert(out.end(), calls.begin(), calls.end());
    }
    return out;
}

namespace {

int status_for(const std::string& code) {
    if (code == "unknown_game" || code == "unknown_channel") return 404;
    if (code == "stale_version") return 409;
    if (code == "forbidden" || code == "not_participant") return 403;
    return 400;
}

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& body) {
    try {
        body();
    } catch (const Error& e) {
        reply_json(res, status_for(e.code()), error_body(e.code(), e.what()));
    } catch (const json::exception& e) {
        reply_json(res, 400, error_body("bad_request", e.what()));
    } catch (const std::exception& e) {
        reply_json(res, 500, error_body("internal", e.what()));
    }
}

} // namespace

HostServer::HostServer(GameHost& host) : host_(&host), server_(std::make_unique<httplib::Server>()) { routes(); }

HostServer::~HostServer() { stop(); }

void HostServer::routes() {
    auto& srv = *server_;
    GameHost& host = *host_;
    srv.Post("/games", [&host](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = host.create_game(decode_session_config(json::parse(req.body)));
            reply_json(res, 201, json{{"game_id", id}, {"version", host.fetch_save(id).version}});
        });
    });
    srv.Get(R"(/games/([A-Za-z0-9_-]+)/save)", [&host](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const SaveVersion v = host.fetch_save(req.matches[1]);
            res.status = 200;
            res.set_header("X-Save-Version", std::to_string(v.version));
            res.set_content(v.save, "application/json");
        });
    });
    srv.Put(R"(/games/([A-Za-z0-9_-]+)/save)", [&host](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            if (!req.has_header("X-Save-Version")) throw Error("missing_version", "X-Save-Version header required");
            std::int64_t version = 0;
            try {
                version = std::stoll(req.get_header_value("X-Save-Version"));
            } catch (const std::exception&) {
                throw Error("missing_version", "X-Save-Version must be an integer");
            }
            reply_json(res, 200, json{{"version", host.submit_save(req.matches[1], req.body, version)}});
        });
    });
    srv.Post(R"(/games/([A-Za-z0-9_-]+)/advance)", [&host](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const int turns = req.body.empty() ? 1 : json::parse(req.body).value("turns", 1);
            const AdvanceResult r = host.advance(req.matches[1], turns);
            json body{{"turn", r.turn}, {"version", r.version}, {"turns_played", r.turns_played},
                      {"finished", r.finished}};
            body["winner"] = r.winner ? json(*r.winner) : json(nullptr);
            reply_json(res, 200, body);
        });
    });
    srv.Post(R"(/games/([A-Za-z0-9_-]+)/chat/([^/]+))", [&host](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json j = json::parse(req.body);
            const HostMessage m = host.post_chat(req.matches[1], req.matches[2], j.at("sender").get<std::string>(),
                                                 j.at("text").get<std::string>());
            reply_json(res, 201, encode_chat(m));
        });
    });
    srv.Get(R"(/games/([A-Za-z0-9_-]+)/chat/([^/]+))", [&host](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            if (!req.has_param("viewer")) throw Error("not_participant", "viewer parameter required");
            std::int64_t since = 0;
            if (req.has_param("since")) {
                try {
                    since = std::stoll(req.get_param_value("since"));
                } catch (const std::exception&) {
                    throw Error("invalid_argument", "since must be an integer");
                }
            }
            json messages = json::array();
            for (const auto& m : host.poll_chat(req.matches[1], req.matches[2], req.get_param_value("viewer"), since)) {
                messages.push_back(encode_chat(m));
            }
            reply_json(res, 200, json{{"messages", messages}});
        });
    });
    srv.Post(R"(/games/([A-Za-z0-9_-]+)/ratings)", [&host](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            json j = json::parse(req.body);
            j["game_id"] = std::string(req.matches[1]);
            host.submit_rating(decode_rating(j));
            reply_json(res, 201, json{{"status", "recorded"}});
        });
    });
    srv.Get(R"(/games/([A-Za-z0-9_-]+)/export)", [&host](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { reply_json(res, 200, host.export_bundle(req.matches[1])); });
    });
}

int HostServer::start(const std::string& host, int port) {
    if (thread_.joinable()) throw Error("already_running", "server already started");
    port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (port_ < 0) throw Error("bind_failed", "cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void HostServer::listen(const std::string& host, int port) {
    if (!server_->bind_to_port(host, port)) throw Error("bind_failed", "cannot bind " + host + ":" + std::to_string(port));
    port_ = port;
    server_->listen_after_bind();
}

void HostServer::stop() {
    if (!server_) return;
    server_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace microciv
