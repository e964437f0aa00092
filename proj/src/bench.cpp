#include "microciv/bench.hpp"

#include "microciv/codec.hpp"
#include "microciv/error.hpp"
#include "microciv/persistence.hpp"
#include "microciv/rng.hpp"
#include "microciv/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

namespace microciv {

AdvisorDecision NaiveAdvisor::decide(const DecisionContext& context) {
    AdvisorDecision d;
    d.rationale = "first offered";
    if (context.options.empty()) return d;
    const int take = context.kind == DecisionKind::skill_proposal ? context.max_choices : 1;
    for (const auto& o : context.options) {
        if (static_cast<int>(d.choices.size()) >= std::min(take, context.max_choices)) break;
        d.choices.push_back(o.id);
    }
    return d;
}

VariantRegistry standard_variants() {
    VariantRegistry r;
    r["baseline"] = {"baseline", [] { return SeatController::baseline_seat("baseline"); }};
    r["CivAgent-N"] = {"CivAgent-N", [] {
                           SeatController s = SeatController::agent_seat(std::make_shared<NaiveAdvisor>(), "CivAgent-N");
                           s.reflect = false;
                           return s;
                       }};
    r["CivAgent-W"] = {"CivAgent-W", [] {
                           SeatController s = SeatController::agent_seat(std::make_shared<ScriptedAdvisor>(), "CivAgent-W");
                           s.reflect = false;
                           return s;
                       }};
    r["CivAgent-S"] = {"CivAgent-S", [] {
                           SeatController s =
                               SeatController::agent_seat(std::make_shared<ScriptedAdvisor>(), "CivAgent-S", true);
                           s.reflect = false;
                           return s;
                       }};
    r["CivAgent-SR"] = {"CivAgent-SR", [] {
                            return SeatController::agent_seat(std::make_shared<ScriptedAdvisor>(), "CivAgent-SR", true);
                        }};
    return r;
}

std::vector<std::vector<std::string>> seatings(const TournamentConfig& config) {
    if (config.civs.size() < 2) throw ConfigError("invalid_config", "at least two civilizations required");
    if (config.variants.empty()) throw ConfigError("invalid_config", "no variants given");
    std::vector<std::vector<std::string>> out;
    if (!config.permutations) {
        std::vector<std::string> seating;
        for (std::size_t i = 0; i < config.civs.size(); ++i) seating.push_back(config.variants[i % config.variants.size()]);
        out.push_back(std::move(seating));
        return out;
    }
    if (config.variants.size() != config.civs.size()) {
        throw ConfigError("invalid_config", "permutation mode needs one variant per civilization");
    }
    std::vector<std::size_t> order(config.variants.size());
    std::iota(order.begin(), order.end(), 0);
    do {
        std::vector<std::string> seating;
        for (std::size_t i : order) seating.push_back(config.variants[i]);
        out.push_back(std::move(seating));
    } while (std::next_permutation(order.begin(), order.end()));
    return out;
}

std::vector<RankEntry> rank_civs(const GameState& state, const Ruleset& ruleset,
                                 const std::vector<std::string>& seating) {
    std::vector<RankEntry> out;
    for (std::size_t i = 0; i < state.civs.size(); ++i) {
        const ScoreBreakdown b = civ_score(state.civs[i], state, ruleset);
        out.push_back({state.civs[i].name, i < seating.size() ? seating[i] : "baseline", b.S, b.F, 0});
    }
    std::sort(out.begin(), out.end(), [](const RankEntry& a, const RankEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.military != b.military) return a.military > b.military;
        return a.civ < b.civ;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
    return out;
}

json encode_match_report(const MatchReport& r) {
    json turns = json::array();
    for (const auto& t : r.turns) {
        json scores = json::array();
        for (const auto& s : t.scores) scores.push_back(encode_score(s));
        turns.push_back({{"turn", t.turn}, {"scores", scores}});
    }
    json skills = json::array();
    for (const auto& k : r.skills) {
        skills.push_back({{"turn", k.turn}, {"proposer", k.proposer}, {"target", k.target}, {"skill", k.skill},
                          {"response", k.response}});
    }
    json ranking = json::array();
    for (const auto& e : r.ranking) {
        ranking.push_back({{"rank", e.rank}, {"civ", e.civ}, {"variant", e.variant}, {"score", e.score},
                           {"military", e.military}});
    }
    return json{{"index", r.index},
                {"map_seed", r.map_seed},
                {"game_seed", r.game_seed},
                {"civs", r.civs},
                {"seating", r.seating},
                {"turns_played", r.turns_played},
                {"winner", r.winner ? json(*r.winner) : json(nullptr)},
                {"error", r.error ? json(*r.error) : json(nullptr)},
                {"ranking", ranking},
                {"skills", skills},
                {"turns", turns}};
}

namespace {

struct MatchPlan {
    std::uint64_t map_seed = 0;
    std::uint64_t game_seed = 0;
    std::vector<std::string> seating;
};

MatchReport play_match(const Ruleset& ruleset, const TournamentConfig& config, const VariantRegistry& registry,
                       const MatchPlan& plan, int index) {
    MatchReport report;
    report.index = index;
    report.map_seed = plan.map_seed;
    report.game_seed = plan.game_seed;
    report.seating = plan.seating;
    report.civs = config.civs;
    try {
        RunnerConfig rc;
        rc.game.civs = config.civs;
        rc.game.width = config.width;
        rc.game.height = config.height;
        rc.game.seed = plan.game_seed;
        rc.turn_cap = config.turn_cap;
        for (const auto& name : plan.seating) {
            auto it = registry.find(name);
            if (it == registry.end()) throw ConfigError("unknown_variant", "no variant " + name);
            rc.seats.push_back(it->second.make());
        }
        GameRunner runner(ruleset, rc);
        runner.run();
        report.turns = runner.turns();
        report.skills = runner.skills();
        report.turns_played = runner.turns_played();
        if (auto w = runner.winner()) report.winner = runner.state().civ(*w).name;
        report.ranking = rank_civs(runner.state(), ruleset, plan.seating);
    } catch (const std::exception& e) {
        report.error = e.what();
    }
    return report;
}

} // namespace

std::vector<MatchReport> run_tournament(const Ruleset& ruleset, const TournamentConfig& config,
                                        const VariantRegistry& registry) {
    if (config.matches_per_seed < 1) throw ConfigError("invalid_config", "matches_per_seed must be >= 1");
    for (const auto& name : config.variants) {
        if (!registry.count(name)) throw ConfigError("unknown_variant", "no variant " + name);
    }
    std::vector<MatchPlan> plans;
    const auto all = seatings(config);
    for (std::uint64_t map_seed : config.map_seeds) {
        for (int r = 0; r < config.matches_per_seed; ++r) {
            const std::uint64_t game_seed = r == 0 ? map_seed : mix64(map_seed + static_cast<std::uint64_t>(r));
            for (const auto& seating : all) plans.push_back({map_seed, game_seed, seating});
        }
    }
    std::vector<MatchReport> reports(plans.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < plans.size(); i = next++) {
            reports[i] = play_match(ruleset, config, registry, plans[i], static_cast<int>(i));
        }
    };
    const int n = std::max(1, std::min<int>(config.workers, static_cast<int>(plans.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return reports;
}

const std::vector<std::string>& metric_skills() {
    static const std::vector<std::string> skills = {"ChangeCloseness",   "SeekPeace",   "DefenseAgreement",
                                                    "ResearchAgreement", "CommonEnemy", "DeclareWar"};
    return skills;
}

std::string format_ratio(std::int64_t num, std::int64_t den, int decimals) {
    if (den == 0) throw Error("invalid_argument", "zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    const bool negative = num < 0;
    const std::int64_t a = negative ? -num : num;
    // Half away from zero: floor((2*a*scale + den) / (2*den)).
    const std::int64_t scaled = (2 * a * scale + den) / (2 * den);
    std::ostringstream out;
    if (negative && scaled != 0) out << '-';
    out << scaled / scale;
    if (decimals > 0) out << '.' << std::setw(decimals) << std::setfill('0') << scaled % scale;
    return out.str();
}

double SkillMetric::freq() const {
    if (appearances == 0) return 0;
    return std::stod(format_ratio(uses, appearances));
}

std::optional<double> SkillMetric::success_rate() const {
    if (responded == 0) return std::nullopt;
    return std::stod(format_ratio(100 * accepted, responded));
}

double VariantMetrics::avg_score() const {
    if (appearances == 0) return 0;
    return std::stod(format_ratio(score_tenths_sum, 10 * appearances));
}

MetricsSummary compute_metrics(const std::vector<MatchReport>& reports) {
    if (reports.empty()) throw Error("invalid_argument", "no reports");
    MetricsSummary summary;
    std::map<std::string, VariantMetrics> rows;
    for (const auto& r : reports) {
        if (r.error) {
            ++summary.failed;
            continue;
        }
        ++summary.matches;
        std::map<std::string, std::string> variant_of;
        for (std::size_t i = 0; i < r.civs.size() && i < r.seating.size(); ++i) variant_of[r.civs[i]] = r.seating[i];
        for (const auto& e : r.ranking) {
            VariantMetrics& v = rows[e.variant];
            v.variant = e.variant;
            ++v.appearances;
            v.score_tenths_sum += std::llround(e.score * 10);
            for (const auto& skill : metric_skills()) ++v.skills[skill].appearances;
        }
        for (const auto& k : r.skills) {
            auto it = variant_of.find(k.proposer);
            if (it == variant_of.end()) continue;
            SkillMetric& m = rows[it->second].skills[k.skill];
            ++m.uses;
            if (k.response == "agree" || k.response == "disagree") ++m.responded;
            if (k.response == "agree") ++m.accepted;
        }
    }
    for (auto& [name, v] : rows) {
        for (auto& [skill, m] : v.skills) m.appearances = v.appearances;
        summary.rows.push_back(std::move(v));
    }
    return summary;
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string render(const std::vector<std::vector<std::string>>& table, ReportFormat format) {
    std::ostringstream out;
    if (format == ReportFormat::csv) {
        for (const auto& row : table) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
            out << '\n';
        }
        return out.str();
    }
    // Display width in code points, so "±" pads like one column.
    const auto columns = [](const std::string& s) {
        return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char ch) {
            return (static_cast<unsigned char>(ch) & 0xC0) != 0x80;
        }));
    };
    std::vector<std::size_t> width;
    for (const auto& row : table) {
        width.resize(std::max(width.size(), row.size()), 0);
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], columns(row[i]));
    }
    for (std::size_t r = 0; r < table.size(); ++r) {
        const auto& row = table[r];
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? " | " : "") << row[i];
            if (i + 1 < row.size()) out << std::string(width[i] - columns(row[i]), ' ');
        }
        out << '\n';
        if (r == 0 && table.size() > 1) {
            for (std::size_t i = 0; i < width.size(); ++i) out << (i ? "-|-" : "") << std::string(width[i], '-');
            out << '\n';
        }
    }
    return out.str();
}

} // namespace

std::string emit_metrics(const MetricsSummary& summary, ReportFormat format) {
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> header = {"Methods", "Avg. Score"};
    for (const auto& skill : metric_skills()) {
        header.push_back(skill + " Freq.");
        if (skill != "DeclareWar") header.push_back(skill + " SR");
    }
    table.push_back(header);
    for (const auto& v : summary.rows) {
        std::vector<std::string> row = {v.variant, format_ratio(v.score_tenths_sum, 10 * std::max<std::int64_t>(1, v.appearances))};
        for (const auto& skill : metric_skills()) {
            auto it = v.skills.find(skill);
            const SkillMetric m = it == v.skills.end() ? SkillMetric{0, 0, 0, v.appearances} : it->second;
            row.push_back(format_ratio(m.uses, std::max<std::int64_t>(1, m.appearances)));
            if (skill == "DeclareWar") continue;
            row.push_back(m.responded ? format_ratio(100 * m.accepted, m.responded) + "%" : "N/A");
        }
        table.push_back(std::move(row));
    }
    return render(table, format);
}

CellStats cell_stats(const std::vector<double>& samples) {
    CellStats s;
    s.n = samples.size();
    if (samples.empty()) return s;
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(s.n);
    if (s.n < 2) return s;
    double ss = 0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
    return s;
}

namespace {

std::string one_decimal(double x) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << (std::abs(x) < 0.05 ? 0.0 : x);
    return out.str();
}

} // namespace

std::string format_cell(const CellStats& stats) {
    return one_decimal(stats.mean) + "(±" + one_decimal(stats.std) + ")";
}

std::string emit_cross_table(const CrossTable& t, ReportFormat format) {
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> header = {t.corner};
    for (const auto& c : t.cols) header.push_back(c);
    if (t.rows.empty() || t.cols.empty()) return render({header}, format);
    header.push_back("Avg. Score");
    table.push_back(header);
    std::map<std::string, std::vector<double>> col_means;
    for (const auto& r : t.rows) {
        std::vector<std::string> row = {r};
        std::vector<double> means;
        for (const auto& c : t.cols) {
            auto it = t.samples.find({r, c});
            if (it == t.samples.end() || it->second.empty()) {
                row.push_back("N/A");
                continue;
            }
            const CellStats s = cell_stats(it->second);
            row.push_back(format_cell(s));
            means.push_back(s.mean);
            col_means[c].push_back(s.mean);
        }
        row.push_back(means.empty() ? "N/A" : one_decimal(cell_stats(means).mean));
        table.push_back(std::move(row));
    }
    std::vector<std::string> footer = {"Avg. Score"};
    for (const auto& c : t.cols) {
        footer.push_back(col_means[c].empty() ? "N/A" : one_decimal(cell_stats(col_means[c]).mean));
    }
    footer.push_back("");
    table.push_back(std::move(footer));
    return render(table, format);
}

std::shared_ptr<NegotiationPolicy> make_negotiation_policy(const std::string& name) {
    if (name == "advisor") return std::make_shared<AdvisorNegotiationPolicy>(std::make_shared<ScriptedAdvisor>());
    if (name.rfind("conceding-", 0) == 0) {
        try {
            const double c = std::stod(name.substr(10));
            if (c > 0 && c <= 1) return std::make_shared<ConcedingPolicy>(c);
        } catch (const std::exception&) {
        }
    }
    if (name == "conceding") return std::make_shared<ConcedingPolicy>();
    throw ConfigError("unknown_policy", "no negotiation policy " + name);
}

CrossTable run_negotiation_bench(const NegotiationBenchConfig& config) {
    if (config.saves < 1 || config.repetitions < 1) throw ConfigError("invalid_config", "saves and repetitions must be >= 1");
    CrossTable table;
    table.rows = config.policies;
    table.cols = config.policies;
    for (const auto& buyer : config.policies) {
        for (const auto& seller : config.policies) {
            auto& cell = table.samples[{buyer, seller}];
            for (int save = 0; save < config.saves; ++save) {
                // Every cell sees the same bottom lines for a given save.
                const std::uint64_t save_seed = mix64(config.seed * 1000003 + static_cast<std::uint64_t>(save));
                double total = 0;
                for (int rep = 0; rep < config.repetitions; ++rep) {
                    const auto idx = static_cast<std::uint64_t>(rep);
                    NegotiationSession s;
                    s.buyer = make_negotiation_policy(buyer);
                    s.seller = make_negotiation_policy(seller);
                    s.seller_bottom = 10 + static_cast<int>(stream_value(save_seed, "bench_seller_bottom", idx) % 51);
                    s.buyer_bottom = s.seller_bottom + 10 +
                                     static_cast<int>(stream_value(save_seed, "bench_buyer_margin", idx) % 71);
                    s.initial_price = 1 + static_cast<int>(stream_value(save_seed, "bench_opening", idx) %
                                                           static_cast<std::uint64_t>(s.seller_bottom));
                    s.buyer_reference = market_reference(s.buyer_bottom, mix64(save_seed ^ (2 * idx + 1)));
                    s.seller_reference = market_reference(s.seller_bottom, mix64(save_seed ^ (2 * idx + 2)));
                    s.hi = 200;
                    total += run_negotiation(s).buyer_score;
                }
                cell.push_back(total / config.repetitions);
            }
        }
    }
    return table;
}

namespace {

std::shared_ptr<Deceiver> make_deceiver(const std::string& name) {
    if (name == "visible") return std::make_shared<ScriptedDeceiver>(true);
    if (name == "hidden") return std::make_shared<ScriptedDeceiver>(false);
    throw ConfigError("unknown_deceiver", "no deceiver " + name);
}

std::shared_ptr<Detector> make_detector(const std::string& name) {
    if (name == "checking") return std::make_shared<CheckingDetector>();
    if (name == "coin_flip") return std::make_shared<CoinFlipDetector>();
    if (name == "advisor") return std::make_shared<AdvisorDetector>(std::make_shared<ScriptedAdvisor>());
    throw ConfigError("unknown_detector", "no detector " + name);
}

} // namespace

CrossTable run_deception_bench(const Ruleset& ruleset, const DeceptionBenchConfig& config) {
    if (config.saves < 1 || config.repetitions < 1) throw ConfigError("invalid_config", "saves and repetitions must be >= 1");
    for (const auto& d : config.deceivers) make_deceiver(d);
    for (const auto& d : config.detectors) make_detector(d);
    std::vector<GameState> saves;
    for (int i = 0; i < config.saves; ++i) {
        RunnerConfig rc;
        rc.game.civs = {"Rome", "Aztecs", "Greece", "Egypt"};
        rc.game.seed = mix64(config.seed + static_cast<std::uint64_t>(i));
        rc.turn_cap = std::max(1, config.warmup_turns);
        GameRunner runner(ruleset, rc);
        runner.run();
        saves.push_back(runner.state());
    }
    CrossTable table;
    table.rows = config.deceivers;
    table.cols = config.detectors;
    for (const auto& deceiver : config.deceivers) {
        for (const auto& detector : config.detectors) {
            auto& cell = table.samples[{deceiver, detector}];
            for (int i = 0; i < config.saves; ++i) {
                int counted = 0;
                int fooled = 0;
                for (int rep = 0; rep < config.repetitions; ++rep) {
                    DeceptionTrial trial;
                    trial.deceiver = make_deceiver(deceiver);
                    trial.detector = make_detector(detector);
                    trial.ruleset = &ruleset;
                    trial.shared_state = saves[i];
                    trial.deceiver_civ = CivId{rep % 4};
                    trial.detector_civ = CivId{(rep + 1 + rep / 4 % 3) % 4};
                    trial.seed = mix64(config.seed * 7919 + static_cast<std::uint64_t>(i * config.repetitions + rep));
                    const DeceptionResult r = run_deception(trial);
                    if (r.void_trial) continue;
                    ++counted;
                    fooled += r.deceiver_success;
                }
                if (counted) cell.push_back(100.0 * fooled / counted);
            }
        }
    }
    return table;
}

} // namespace microciv
