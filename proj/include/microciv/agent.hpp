#pragma once

#include "microciv/actions.hpp"
#include "microciv/engine.hpp"
#include "microciv/persistence.hpp"
#include "microciv/policy.hpp"
#include "microciv/simulator.hpp"

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace microciv {

enum class Skill {
    DeclareWar,
    DefenseAgreement,
    CommonEnemy,
    SeekPeace,
    ResearchAgreement,
    ChangeCloseness,
    ProposeTrade,
    ProductionPriority,
    ChooseTechnology,
    Cheat,
};

inline constexpr Skill kAllSkills[] = {
    Skill::DeclareWar,       Skill::DefenseAgreement, Skill::CommonEnemy,
    Skill::SeekPeace,        Skill::ResearchAgreement, Skill::ChangeCloseness,
    Skill::ProposeTrade,     Skill::ProductionPriority, Skill::ChooseTechnology,
    Skill::Cheat,
};

const char* skill_name(Skill skill) noexcept;
std::optional<Skill> skill_from_name(std::string_view name) noexcept;
// Skills the target must agree to before they take effect.
bool needs_response(Skill skill) noexcept;
bool is_diplomatic(Skill skill) noexcept;

struct SkillCall {
    Skill skill = Skill::DeclareWar;
    CivId proposer{};
    std::optional<CivId> target;
    std::optional<CivId> enemy;      // CommonEnemy: the third party
    std::optional<TradeOffer> trade; // ProposeTrade, optional SeekPeace terms
    std::optional<CityId> city;      // ProductionPriority
    std::string item;                // tech id or production item
    int closeness_delta = 0;
    std::string message;

    bool operator==(const SkillCall&) const = default;
};

json encode_skill(const SkillCall& call);
// Throws Error(invalid_skill) on structural problems.
SkillCall decode_skill(const json& j);

// Checks parameters against the skill's schema. Throws Error(invalid_skill).
void validate_skill(const SkillCall& call, const GameState& state);

// Engine actions the skill performs (once agreed, for skills needing a
// response). Throws Error(invalid_skill).
std::vector<EngineAction> skill_actions(const SkillCall& call, const GameState& state);

// nullopt when the schema holds and every action applies in order.
std::optional<Illegality> check_skill(const Engine& engine, const GameState& state,
                                      const SkillCall& call);
// Applies the actions of a legal skill. Throws IllegalAction otherwise.
void apply_skill(const Engine& engine, GameState& state, const SkillCall& call);

std::string describe_skill(const SkillCall& call, const GameState& state);

struct ReflectionEntry {
    std::string text;
    int turn_from = 0;
    int turn_to = 0;
    std::vector<std::string> key_actions;
    std::vector<float> embedding;
    std::string outcome; // positive, neutral or negative

    bool operator==(const ReflectionEntry&) const = default;
};

class AgentMemory {
public:
    static constexpr std::size_t kShortTermCapacity = 20;
    static constexpr std::size_t kLinesPerSummary = 20;

    // Appends a dialogue or action line; the oldest line rolls into the
    // current summary once the window is full.
    void remember(std::string line);

    const std::deque<std::string>& short_term() const noexcept { return short_term_; }
    const std::vector<std::string>& summaries() const noexcept { return summaries_; }
    std::vector<ReflectionEntry>& long_term() noexcept { return long_term_; }
    const std::vector<ReflectionEntry>& long_term() const noexcept { return long_term_; }

    // Short-term window and summaries as one prompt block.
    std::string digest() const;

private:
    std::deque<std::string> short_term_;
    std::vector<std::string> summaries_;
    std::size_t lines_in_last_summary_ = 0;
    std::vector<ReflectionEntry> long_term_;
};

inline constexpr int kDefaultEmbeddingDimension = 4096;

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<float> embed(std::string_view text) const = 0;
    virtual int dimension() const = 0;
};

// Signed feature hashing over lowercase alphanumeric tokens, unit-normalized.
// Text without tokens embeds to the zero vector.
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(int dimension = kDefaultEmbeddingDimension);
    std::vector<float> embed(std::string_view text) const override;
    int dimension() const override { return dimension_; }

private:
    int dimension_;
};

// Cosine similarity; 0 when either vector is zero. Throws on size mismatch.
double cosine(const std::vector<float>& a, const std::vector<float>& b);

// Fixed-length chunks of `size` characters, consecutive chunks sharing
// `overlap` characters.
std::vector<std::string> chunk_text(std::string_view text, std::size_t size = 512,
                                    std::size_t overlap = 64);

// Embeds and stores one entry per chunk of `entry.text`; returns the number
// of entries added.
std::size_t store_experience(AgentMemory& memory, const Embedder& embedder, ReflectionEntry entry);

struct RankedExperience {
    std::size_t index = 0; // position in long_term
    double score = 0;
};

// Top-k long-term entries by cosine similarity to the query, most recent
// first among equal scores. Throws Error(invalid_argument) when k < 1.
std::vector<RankedExperience> rank_experiences(const AgentMemory& memory, const Embedder& embedder,
                                               std::string_view query, int k = 5);
std::vector<ReflectionEntry> retrieve_experiences(const AgentMemory& memory,
                                                  const Embedder& embedder,
                                                  std::string_view query, int k = 5);

struct TrajectoryStep {
    int turn = 0;
    std::string kind; // skill name or engine action kind
    std::string description;
    std::optional<EngineAction> action;
    std::optional<std::string> feedback;
    double score = 0; // own total score when the step was taken

    bool operator==(const TrajectoryStep&) const = default;
};

struct GameOutcome {
    std::string result; // "victory", "defeat", "turn_cap" or "checkpoint"
    double final_score = 0;
    double score_delta = 0;
};

struct Trajectory {
    std::string civ;
    std::vector<TrajectoryStep> steps;
    GameOutcome outcome;
};

struct ReflectionRoles {
    Advisor* actor = nullptr;
    Advisor* evaluator = nullptr;
    Advisor* self_reflection = nullptr;
    AgentMemory* memory = nullptr;
    const Embedder* embedder = nullptr;
};

std::set<std::string> default_key_actions();

// Contiguous [first, last] index ranges; each key action closes its segment.
std::vector<std::pair<std::size_t, std::size_t>> segment_trajectory(
    const Trajectory& trajectory, const std::set<std::string>& key_actions);

std::vector<ReflectionEntry> reflect_rearview(const Trajectory& trajectory,
                                              const ReflectionRoles& roles,
                                              const std::set<std::string>& key_actions);

// State at the start of `turn`, or nullopt when no archived save exists.
using ArchiveLookup = std::function<std::optional<GameState>(int turn)>;
// Alternatives simulated next to the action actually taken.
using AlternativesFn = std::function<std::vector<Decision>(const TrajectoryStep&, const GameState&)>;

// The no-op and, for war and peace moves, the opposite move.
std::vector<Decision> default_alternatives(const TrajectoryStep& step, const GameState& state);

struct SimulatorReflection {
    std::vector<ReflectionEntry> entries;
    std::vector<int> branch_counts; // per reflected key point
    std::vector<std::string> warnings;
};

SimulatorReflection reflect_with_simulator(const Trajectory& trajectory,
                                           const ReflectionRoles& roles,
                                           const Simulator& simulator,
                                           const ArchiveLookup& archive,
                                           const std::set<std::string>& key_actions,
                                           const AlternativesFn& alternatives = default_alternatives,
                                           const RolloutConfig& config = {10, true});

using TranscriptSink = std::function<void(const json&)>;

struct AgentConfig {
    int max_skills = 3;
    int proposal_interval = 5;
    int retrieval_k = 5;
    // Rollouts that adjust proposal values when a simulator is attached.
    RolloutConfig proposal_rollout{5, true};
    // Horizon of the accept/reject comparison when responding.
    int response_horizon = 20;
};

struct SkillResponse {
    bool agree = false;
    std::string reason;
    std::vector<EngineAction> actions; // to apply on agreement
    std::optional<TradeOffer> counter;
};

struct ProposalTrace {
    std::string situation;
    std::string goals;
    std::vector<SkillCall> candidates;
    std::vector<ReflectionEntry> retrieved;
    std::vector<SkillCall> dispatched;
    std::optional<std::string> error;
};

// One agent per civ per game; every call is made by the game loop.
class CivAgent {
public:
    CivAgent(const Ruleset& ruleset, CivId civ, std::shared_ptr<Advisor> advisor,
             AgentConfig config = {}, std::shared_ptr<const Embedder> embedder = nullptr,
             const Simulator* simulator = nullptr);

    CivId civ() const noexcept { return civ_; }
    Advisor& advisor() { return *advisor_; }
    const std::shared_ptr<Advisor>& advisor_handle() const noexcept { return advisor_; }
    AgentMemory& memory() noexcept { return memory_; }
    const AgentMemory& memory() const noexcept { return memory_; }
    Trajectory& trajectory() noexcept { return trajectory_; }
    const Embedder& embedder() const noexcept { return *embedder_; }
    const AgentConfig& config() const noexcept { return config_; }
    void set_transcript(TranscriptSink sink) { transcript_ = std::move(sink); }

    // Situation reasoning, goal setting, candidate selection and conversion
    // into at most max_skills legal calls. Throws Error(cadence_violation)
    // off the proposal cadence.
    ProposalTrace propose_skills(const GameState& state);

    // Intent reasoning, accept/reject evaluation and a retrieval-informed
    // final answer. Malformed or illegal calls are declined with a reason.
    SkillResponse respond_to_skill(const GameState& state, const SkillCall& incoming);

    // Unilateral diplomatic candidates and bilateral proposals considered now.
    std::vector<SkillCall> candidate_skills(const GameState& state) const;

    std::optional<std::string> choose_production(const GameState& state, const City& city);
    std::optional<std::string> choose_research(const GameState& state);

    void record_step(TrajectoryStep step);

private:
    double heuristic_value(const GameState& state, const Observation& obs,
                           const SkillCall& call) const;
    double response_heuristic(const GameState& state, const Observation& obs,
                              const SkillCall& call) const;
    double retrieval_adjustment(const std::vector<RankedExperience>& hits, Skill skill) const;
    DecisionContext base_context(const GameState& state, const Observation& obs,
                                 DecisionKind kind) const;
    void log(const json& record) const;

    const Ruleset* ruleset_;
    CivId civ_;
    std::shared_ptr<Advisor> advisor_;
    AgentConfig config_;
    std::shared_ptr<const Embedder> embedder_;
    const Simulator* simulator_;
    AgentMemory memory_;
    Trajectory trajectory_;
    TranscriptSink transcript_;
};

} // namespace microciv
