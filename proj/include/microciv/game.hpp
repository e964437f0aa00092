#pragma once

#include "microciv/agent.hpp"
#include "microciv/engine.hpp"
#include "microciv/minigames.hpp"
#include "microciv/scoring.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace microciv {

struct SeatController {
    enum class Kind { baseline, agent };
    Kind kind = Kind::baseline;
    std::shared_ptr<Advisor> advisor; // agent seats only
    bool use_simulator = false;
    bool reflect = true;
    std::string variant; // label used in reports

    static SeatController baseline_seat(std::string variant = "baseline");
    static SeatController agent_seat(std::shared_ptr<Advisor> advisor, std::string variant = "agent",
                                     bool use_simulator = false);
};

struct RunnerConfig {
    GameConfig game;
    int turn_cap = 250;
    std::vector<SeatController> seats; // index == CivId; missing seats play baseline
    AgentConfig agent;
    std::set<std::string> key_actions = default_key_actions();
    int reflection_interval = 25; // 0 disables mid-game reflection
    bool reflect_at_end = true;
};

struct SkillRecord {
    int turn = 0;
    std::string proposer;
    std::string target;
    std::string skill;
    std::string response; // agree, disagree or none (unilateral)

    bool operator==(const SkillRecord&) const = default;
};

struct ProposalRecord {
    int turn = 0;
    std::string civ;
    int dispatched = 0;

    bool operator==(const ProposalRecord&) const = default;
};

struct TurnRecord {
    int turn = 0; // the turn that just ended
    std::vector<ScoreBreakdown> scores;

    bool operator==(const TurnRecord&) const = default;
};

struct GameHooks {
    // Called after every completed turn with the new state.
    std::function<void(const GameState&)> on_turn_end;
    TranscriptSink transcript;
};

class GameRunner {
public:
    GameRunner(const Ruleset& ruleset, RunnerConfig config, GameHooks hooks = {});
    GameRunner(const Ruleset& ruleset, RunnerConfig config, GameState initial, GameHooks hooks = {});

    const GameState& state() const noexcept { return state_; }
    const RunnerConfig& config() const noexcept { return config_; }
    bool finished() const noexcept { return finished_; }
    std::optional<CivId> winner() const noexcept { return winner_; }
    int turns_played() const noexcept { return static_cast<int>(turns_.size()); }

    // Plays one full turn (every civ acts, then end-of-turn resolution).
    void play_turn();
    // Plays until victory or the turn cap.
    void run();

    const std::vector<TurnRecord>& turns() const noexcept { return turns_; }
    const std::vector<SkillRecord>& skills() const noexcept { return skills_; }
    const std::vector<ProposalRecord>& proposals() const noexcept { return proposals_; }
    CivAgent* agent(CivId civ);

private:
    struct Pending {
        SkillCall call;
        int turn = 0;
        double proposer_score = 0;
    };

    void act(CivId civ);
    void answer_pending(CivId civ);
    void dispatch(CivId civ, const SkillCall& call);
    bool settle(const SkillCall& call, bool agreed, int proposed_turn, double proposer_score);
    bool bargain(const SkillCall& call);
    bool baseline_accepts(const SkillCall& call) const;
    std::shared_ptr<NegotiationPolicy> negotiation_policy(CivId civ);
    double own_score(CivId civ) const;
    void reflect(bool at_end);
    void log(const json& record) const;

    const Ruleset* ruleset_;
    Engine engine_;
    RunnerConfig config_;
    GameHooks hooks_;
    GameState state_;
    std::vector<std::unique_ptr<CivAgent>> agents_; // index == CivId, null for baseline seats
    std::vector<std::unique_ptr<Simulator>> simulators_;
    std::map<int, std::vector<Pending>> pending_; // by target civ
    std::vector<std::size_t> reflected_upto_;
    std::vector<TurnRecord> turns_;
    std::vector<SkillRecord> skills_;
    std::vector<ProposalRecord> proposals_;
    std::optional<CivId> winner_;
    bool finished_ = false;
    int start_turn_ = 0;
};

} // namespace microciv
