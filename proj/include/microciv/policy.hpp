#pragma once

#include "microciv/actions.hpp"
#include "microciv/codec.hpp"
#include "microciv/ruleset.hpp"
#include "microciv/state.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace microciv {

// Per-aspect switches for the rule-based AI; a disabled aspect emits nothing.
struct AspectSwitches {
    bool unit = true;
    bool production = true;
    bool technology = true;
    bool diplomacy = true;
    bool workers = true; // workers idle when false

    static AspectSwitches none() { return {false, false, false, false, false}; }
};

struct BaselineTurn {
    std::vector<EngineAction> actions;
    // Diplomacy intents computed while the diplomacy aspect was disabled.
    std::vector<EngineAction> suppressed;
};

// Deterministic rule-based AI. Every action returned is legal when applied in
// order to `state`.
BaselineTurn baseline_turn_detailed(const Ruleset& ruleset, const GameState& state, CivId civ,
                                    const AspectSwitches& switches, bool log_suppressed = false);
std::vector<EngineAction> baseline_turn(const Ruleset& ruleset, const GameState& state, CivId civ,
                                        const AspectSwitches& switches = {});

// The baseline's pick per production category (expansion, economic,
// military) for a city; categories with nothing sensible are left out.
std::vector<std::string> production_candidates(const Ruleset& ruleset, const GameState& state,
                                               CivId civ, CityId city);

// Production category used by the scripted advisor's priority table.
std::string production_tag(const Ruleset& ruleset, std::string_view item);

enum class DecisionKind {
    production,
    research,
    diplomacy_response,
    skill_proposal,
    negotiation_reply,
    deception_judgement,
    chat,
    evaluation,
    reflection,
};

const char* decision_kind_name(DecisionKind kind) noexcept;
DecisionKind decision_kind_from_name(std::string_view name);

struct DecisionOption {
    std::string id;   // unique within the context
    std::string tag;  // category, e.g. "military", "agree"
    std::string text; // human-readable description
    std::optional<double> value; // simulator or evaluator estimate, higher is better
    json payload = json::object();

    bool operator==(const DecisionOption&) const = default;
};

// The prompt-shaped input handed to an advisor.
struct DecisionContext {
    DecisionKind kind = DecisionKind::production;
    std::string game_id;
    int turn = 0;
    std::string civ;
    std::string background;   // situation summary
    std::string role_profile; // goals and persona
    std::string events;       // recent events and dialogue
    std::string memory_digest;
    json observation = json::object();
    std::vector<DecisionOption> options;
    // Maximum number of options an advisor may pick (ranked); 1 for single choice.
    int max_choices = 1;
    // Whether an empty choice list is acceptable.
    bool allow_empty = false;

    bool operator==(const DecisionContext&) const = default;
};

struct AdvisorDecision {
    std::vector<std::string> choices; // option ids, best first
    std::string rationale;

    const std::string& choice() const { return choices.at(0); }
    bool operator==(const AdvisorDecision&) const = default;
};

json encode_context(const DecisionContext& context);
DecisionContext decode_context(const json& j);
json encode_decision(const AdvisorDecision& decision);
AdvisorDecision decode_decision(const json& j);

// Throws Error(closed_world_violation) when a decision names anything other
// than offered options, repeats one, or has the wrong arity.
void check_closed_world(const DecisionContext& context, const AdvisorDecision& decision);

class Advisor {
public:
    virtual ~Advisor() = default;
    virtual AdvisorDecision decide(const DecisionContext& context) = 0;
    virtual std::string name() const = 0;
};

// Greedy on option values when every option carries one, otherwise a fixed
// priority table per decision kind.
class ScriptedAdvisor : public Advisor {
public:
    AdvisorDecision decide(const DecisionContext& context) override;
    std::string name() const override { return "scripted"; }
};

// Wraps another advisor and records every (context, decision) pair.
class RecordingAdvisor : public Advisor {
public:
    explicit RecordingAdvisor(std::shared_ptr<Advisor> inner) : inner_(std::move(inner)) {}
    AdvisorDecision decide(const DecisionContext& context) override;
    std::string name() const override { return "recording:" + inner_->name(); }
    json log() const;

private:
    std::shared_ptr<Advisor> inner_;
    mutable std::mutex mutex_;
    json log_ = json::array();
};

// Replays a recorded log in order; throws Error(replay_mismatch) when the
// requested kind differs or the log is exhausted.
class ReplayAdvisor : public Advisor {
public:
    explicit ReplayAdvisor(json log) : log_(std::move(log)) {}
    AdvisorDecision decide(const DecisionContext& context) override;
    std::string name() const override { return "replay"; }
    std::size_t remaining() const { return log_.size() - next_; }

private:
    json log_;
    std::size_t next_ = 0;
};

// Calls the advisor and enforces the closed-world rule at the boundary.
AdvisorDecision checked_decide(Advisor& advisor, const DecisionContext& context);

} // namespace microciv
