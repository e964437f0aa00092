#pragma once

#include "microciv/game.hpp"
#include "microciv/minigames.hpp"
#include "microciv/ruleset.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace microciv {

// Takes options in the order offered, ignoring any estimates.
class NaiveAdvisor : public Advisor {
public:
    AdvisorDecision decide(const DecisionContext& context) override;
    std::string name() const override { return "naive"; }
};

struct VariantSpec {
    std::string name;
    std::function<SeatController()> make; // fresh controller per match
};

using VariantRegistry = std::map<std::string, VariantSpec>;

// baseline, CivAgent-N, CivAgent-W, CivAgent-S and CivAgent-SR.
VariantRegistry standard_variants();

struct TournamentConfig {
    std::vector<std::string> civs = {"Rome", "Aztecs", "Greece", "Egypt"};
    // Per seat in fixed mode; the set to permute in permutation mode.
    std::vector<std::string> variants = {"CivAgent-N", "CivAgent-W", "CivAgent-S", "CivAgent-SR"};
    bool permutations = false;
    int turn_cap = 250;
    std::vector<std::uint64_t> map_seeds = {1};
    int matches_per_seed = 1; // repeats per seating with distinct game seeds
    int width = 20;
    int height = 16;
    int workers = 1;
};

// Every seating played per map seed: the fixed assignment, or all orderings.
std::vector<std::vector<std::string>> seatings(const TournamentConfig& config);

struct RankEntry {
    std::string civ;
    std::string variant;
    double score = 0;    // total score S
    double military = 0; // dimension F
    int rank = 0;        // 1 = strongest

    bool operator==(const RankEntry&) const = default;
};

// Ordered by S, then F, then civ name.
std::vector<RankEntry> rank_civs(const GameState& state, const Ruleset& ruleset,
                                 const std::vector<std::string>& seating);

struct MatchReport {
    int index = 0;
    std::uint64_t map_seed = 0;
    std::uint64_t game_seed = 0;
    std::vector<std::string> seating; // variant per civ
    std::vector<std::string> civs;
    std::vector<TurnRecord> turns;
    std::vector<SkillRecord> skills;
    std::vector<RankEntry> ranking;
    std::optional<std::string> winner;
    int turns_played = 0;
    std::optional<std::string> error;

    bool operator==(const MatchReport&) const = default;
};

json encode_match_report(const MatchReport& report);

// Runs every match; failures are caught per match and reported in `error`.
std::vector<MatchReport> run_tournament(const Ruleset& ruleset, const TournamentConfig& config,
                                        const VariantRegistry& registry = standard_variants());

// Skills in report column order; DeclareWar carries Freq only.
const std::vector<std::string>& metric_skills();

struct SkillMetric {
    std::int64_t uses = 0;
    std::int64_t responded = 0;
    std::int64_t accepted = 0;
    std::int64_t appearances = 0;

    // uses / appearances, rounded to one decimal.
    double freq() const;
    // accepted / responded in percent, rounded to one decimal; nullopt when
    // nothing was responded to.
    std::optional<double> success_rate() const;
};

struct VariantMetrics {
    std::string variant;
    std::int64_t appearances = 0;     // (match, seat) pairs played
    std::int64_t score_tenths_sum = 0; // sum of final S in tenths
    std::map<std::string, SkillMetric> skills;

    double avg_score() const;
};

struct MetricsSummary {
    std::vector<VariantMetrics> rows; // ordered by variant name
    int matches = 0;
    int failed = 0;
};

// Throws Error(invalid_argument) on an empty report list.
MetricsSummary compute_metrics(const std::vector<MatchReport>& reports);

enum class ReportFormat { text, csv };

std::string emit_metrics(const MetricsSummary& summary, ReportFormat format);

// Rounds num/den to `decimals` places, half away from zero, without floating point.
std::string format_ratio(std::int64_t num, std::int64_t den, int decimals = 1);

struct CellStats {
    double mean = 0;
    double std = 0; // sample standard deviation; 0 below two samples
    std::size_t n = 0;
};

CellStats cell_stats(const std::vector<double>& samples);
// "mean(±std)" with one decimal each.
std::string format_cell(const CellStats& stats);

// Rows vs columns of trial scores, e.g. buyers vs sellers.
struct CrossTable {
    std::string corner = "Model";
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    std::map<std::pair<std::string, std::string>, std::vector<double>> samples;
};

// Cells plus an "Avg. Score" column (row mean of cell means) and row
// (column mean). An empty table emits the header line only.
std::string emit_cross_table(const CrossTable& table, ReportFormat format);

struct NegotiationBenchConfig {
    std::vector<std::string> policies = {"conceding-0.10", "conceding-0.25", "conceding-0.50", "advisor"};
    int saves = 10;       // trial sessions per cell
    int repetitions = 10; // negotiations averaged per trial
    std::uint64_t seed = 1;
};

std::shared_ptr<NegotiationPolicy> make_negotiation_policy(const std::string& name);

// Buyer (rows) vs seller (columns) buyer scores.
CrossTable run_negotiation_bench(const NegotiationBenchConfig& config);

struct DeceptionBenchConfig {
    std::vector<std::string> deceivers = {"visible", "hidden"};
    std::vector<std::string> detectors = {"checking", "coin_flip", "advisor"};
    int saves = 10;
    int repetitions = 10;
    int warmup_turns = 20; // turns played to produce each shared save
    std::uint64_t seed = 1;
};

// Deceiver (rows) vs detector (columns) deceiver success rates in percent.
CrossTable run_deception_bench(const Ruleset& ruleset, const DeceptionBenchConfig& config);

} // namespace microciv
