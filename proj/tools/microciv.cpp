#include "microciv/bench.hpp"
#include "microciv/codec.hpp"
#include "microciv/engine.hpp"
#include "microciv/error.hpp"
#include "microciv/persistence.hpp"
#include "microciv/server.hpp"
#include "microciv/simulator.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace microciv;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("unreadable", "cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("unwritable", "cannot write " + path.string());
    out << text;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

TournamentConfig tournament_from_json(const json& j) {
    TournamentConfig c;
    c.civs = j.value("civs", c.civs);
    c.variants = j.value("variants", c.variants);
    c.permutations = j.value("permutations", c.permutations);
    c.turn_cap = j.value("turn_cap", c.turn_cap);
    c.map_seeds = j.value("map_seeds", c.map_seeds);
    c.matches_per_seed = j.value("matches_per_seed", c.matches_per_seed);
    c.width = j.value("width", c.width);
    c.height = j.value("height", c.height);
    c.workers = j.value("workers", c.workers);
    return c;
}

void write_table(const fs::path& out, const std::string& stem, const CrossTable& table) {
    write_text(out / (stem + ".txt"), emit_cross_table(table, ReportFormat::text));
    write_text(out / (stem + ".csv"), emit_cross_table(table, ReportFormat::csv));
    std::cout << emit_cross_table(table, ReportFormat::text);
}

HostServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"microciv: turn-based strategy engine, agents, host and benchmarks"};
    app.require_subcommand(1);
    std::string ruleset_path = default_ruleset_path().string();
    app.add_option("--ruleset", ruleset_path, "Ruleset document")->check(CLI::ExistingFile);

    auto* new_game = app.add_subcommand("new-game", "Generate a fresh game and write its save");
    std::string civs = "Rome,Aztecs,Greece,Egypt";
    std::uint64_t seed = 1;
    int width = 20, height = 16;
    std::string out_path;
    new_game->add_option("--civs", civs, "Comma-separated civilization names");
    new_game->add_option("--seed", seed);
    new_game->add_option("--width", width);
    new_game->add_option("--height", height);
    new_game->add_option("--out", out_path, "Save file (stdout when omitted)");

    auto* rollout = app.add_subcommand("rollout", "Advance a save N turns under the baseline AI");
    std::string save_path;
    int turns = 10;
    bool freeze = false;
    std::optional<std::uint64_t> rollout_seed;
    std::string final_out;
    rollout->add_option("--save", save_path, "Save file")->required()->check(CLI::ExistingFile);
    rollout->add_option("--turns", turns);
    rollout->add_flag("--freeze-diplomacy", freeze);
    rollout->add_option("--seed", rollout_seed);
    rollout->add_option("--final-save", final_out, "Write the final state here");

    auto* serve = app.add_subcommand("serve", "Run the multiplayer game host");
    int port = 8080;
    std::string data_dir = "microciv-data";
    std::string config_path;
    std::string host = "127.0.0.1";
    serve->add_option("--port", port)->envname("MICROCIV_PORT");
    serve->add_option("--data-dir", data_dir)->envname("MICROCIV_DATA_DIR");
    serve->add_option("--config", config_path, "JSON host config")->check(CLI::ExistingFile);
    serve->add_option("--host", host);

    auto* bench = app.add_subcommand("bench", "Experiment harness");
    bench->require_subcommand(1);
    std::string bench_config;
    std::string bench_out = "bench-out";
    auto* full_game = bench->add_subcommand("full-game", "Tournament of agent variants");
    full_game->add_option("--config", bench_config, "JSON tournament config")->check(CLI::ExistingFile);
    full_game->add_option("--out", bench_out);
    auto* negotiation = bench->add_subcommand("negotiation", "Buyer vs seller cross-table");
    NegotiationBenchConfig neg;
    std::string neg_policies;
    negotiation->add_option("--policies", neg_policies, "Comma-separated policy names");
    negotiation->add_option("--saves", neg.saves);
    negotiation->add_option("--reps", neg.repetitions);
    negotiation->add_option("--seed", neg.seed);
    negotiation->add_option("--out", bench_out);
    auto* deception = bench->add_subcommand("deception", "Deceiver vs detector cross-table");
    DeceptionBenchConfig dec;
    deception->add_option("--saves", dec.saves);
    deception->add_option("--reps", dec.repetitions);
    deception->add_option("--warmup-turns", dec.warmup_turns);
    deception->add_option("--seed", dec.seed);
    deception->add_option("--out", bench_out);

    CLI11_PARSE(app, argc, argv);

    try {
        const Ruleset ruleset = load_ruleset(ruleset_path);

        if (*new_game) {
            GameConfig cfg;
            cfg.civs = split_csv(civs);
            cfg.seed = seed;
            cfg.width = width;
            cfg.height = height;
            const std::string save = save_game(Engine(ruleset).new_game(cfg));
            if (out_path.empty()) std::cout << save << '\n';
            else write_text(out_path, save);
            return 0;
        }

        if (*rollout) {
            const Simulator sim(ruleset);
            RolloutConfig cfg{turns, freeze, false, rollout_seed};
            const RolloutResult r = sim.rollout(read_text(save_path), cfg);
            if (r.error) throw IllegalAction(r.error->code, r.error->message);
            json out{{"turns_simulated", r.turns_simulated}, {"start", json::array()}, {"end", json::array()}};
            for (const auto& s : r.start) out["start"].push_back(encode_score(s));
            for (const auto& s : r.end) out["end"].push_back(encode_score(s));
            std::cout << out.dump(2) << '\n';
            if (!final_out.empty()) write_text(final_out, r.final_save);
            return 0;
        }

        if (*serve) {
            HostOptions options;
            if (!config_path.empty()) {
                const json j = json::parse(read_text(config_path));
                host = j.value("host", host);
                options.decision_timeout = std::chrono::milliseconds(j.value("decision_timeout_ms", 30000));
            }
            GameHost game_host(ruleset, data_dir, options);
            HostServer server(game_host);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving on " << host << ":" << port << ", data in " << data_dir << '\n';
            server.listen(host, port);
            return 0;
        }

        if (*full_game) {
            const TournamentConfig cfg =
                bench_config.empty() ? TournamentConfig{} : tournament_from_json(json::parse(read_text(bench_config)));
            const auto reports = run_tournament(ruleset, cfg);
            std::string lines;
            int failed = 0;
            for (const auto& r : reports) {
                lines += encode_match_report(r).dump() + "\n";
                if (r.error) {
                    ++failed;
                    std::cerr << "match " << r.index << " failed: " << *r.error << '\n';
                }
            }
            write_text(fs::path(bench_out) / "reports.jsonl", lines);
            const MetricsSummary summary = compute_metrics(reports);
            write_text(fs::path(bench_out) / "metrics.txt", emit_metrics(summary, ReportFormat::text));
            write_text(fs::path(bench_out) / "metrics.csv", emit_metrics(summary, ReportFormat::csv));
            std::cout << emit_metrics(summary, ReportFormat::text);
            return failed ? 1 : 0;
        }

        if (*negotiation) {
            if (!neg_policies.empty()) neg.policies = split_csv(neg_policies);
            write_table(bench_out, "negotiation", run_negotiation_bench(neg));
            return 0;
        }

        if (*deception) {
            write_table(bench_out, "deception", run_deception_bench(ruleset, dec));
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error (" << e.code() << "): " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
