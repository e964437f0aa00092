#pragma once

#include "microciv/actions.hpp"
#include "microciv/persistence.hpp"
#include "microciv/policy.hpp"
#include "microciv/simulator.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace microciv {

enum class Side { buyer, seller };
const char* side_name(Side side) noexcept;

struct BottomLine {
    int price = 0;
    bool boundary = false; // the delta kept one sign over the whole range
};

// Binary search over the grid lo, lo+g, ... (<= hi) for the extreme price
// whose delta is still >= 0: the largest for the buyer (delta nonincreasing
// in price), the smallest for the seller (delta nondecreasing). Throws
// Error(no_crossing) when the delta is negative over the whole grid and
// Error(invalid_argument) on an empty grid.
BottomLine search_bottom_line(const std::function<double(int)>& delta, Side side, int lo, int hi,
                              int granularity = 1);

struct BottomLineConfig {
    int horizon = 20;
    int lo = 1;
    int hi = 0; // 0 means ten times the template's initial price
    int granularity = 1;
};

// Price variable of a trade template: the gold the proposer (buyer) gives.
int template_price(const TradeOffer& offer);
TradeOffer with_price(TradeOffer offer, int price);

// Score delta of `side` after `horizon` frozen-diplomacy turns with the trade
// executed at `price`, relative to the same horizon without the trade. An
// illegal trade at that price counts as -infinity.
double trade_score_delta(const Simulator& simulator, const GameState& state, const TradeOffer& offer,
                         Side side, int price, int horizon);

BottomLine compute_bottom_line(const Simulator& simulator, const GameState& state,
                               const TradeOffer& trade_template, Side side,
                               const BottomLineConfig& config = {});

// Uniform in [0.8 b, 1.2 b], rounded to the granularity; deterministic per seed.
int market_reference(int bottom, std::uint64_t seed, int granularity = 1);

struct NegotiationOffer {
    int round = 0;
    Side side = Side::buyer;
    int price = 0;
};

struct NegotiationView {
    Side side = Side::buyer;
    int bottom = 0;      // own true bottom line
    int reference = 0;   // own noisy market reference
    int round = 0;       // round of the offer on the table
    int max_rounds = 4;
    int hi = 0;
    int on_table = 0;    // opponent's latest offer
    std::optional<int> my_last;
    const std::vector<NegotiationOffer>* history = nullptr;
};

struct NegotiationMove {
    enum class Kind { accept, counter, reject };
    Kind kind = Kind::reject;
    int price = 0;
};

class NegotiationPolicy {
public:
    virtual ~NegotiationPolicy() = default;
    virtual NegotiationMove respond(const NegotiationView& view) = 0;
    virtual std::string name() const = 0;
};

// Concedes a fixed share of the remaining gap each round and accepts any
// offer within its bottom line that beats its own next counter.
class ConcedingPolicy : public NegotiationPolicy {
public:
    explicit ConcedingPolicy(double concession = 0.25) : concession_(concession) {}
    NegotiationMove respond(const NegotiationView& view) override;
    std::string name() const override;

private:
    double concession_;
};

// Offers closed-world counter options to an advisor.
class AdvisorNegotiationPolicy : public NegotiationPolicy {
public:
    explicit AdvisorNegotiationPolicy(std::shared_ptr<Advisor> advisor) : advisor_(std::move(advisor)) {}
    NegotiationMove respond(const NegotiationView& view) override;
    std::string name() const override { return "advisor:" + advisor_->name(); }

private:
    std::shared_ptr<Advisor> advisor_;
};

struct NegotiationSession {
    std::shared_ptr<NegotiationPolicy> buyer;
    std::shared_ptr<NegotiationPolicy> seller;
    int initial_price = 20; // the buyer's preset opening offer
    int buyer_bottom = 0;   // B_max
    int seller_bottom = 0;  // S_min
    int buyer_reference = 0;
    int seller_reference = 0;
    int hi = 200;
    int max_rounds = 4;
};

struct NegotiationOutcome {
    bool deal = false;
    int price = 0;
    std::vector<NegotiationOffer> transcript;
    double buyer_score = 0;
    double seller_score = 0;
    std::optional<Side> forfeited;
};

// Buyer opens with the preset price; the sides alternate, at most
// max_rounds offers in total.
NegotiationOutcome run_negotiation(const NegotiationSession& session);

// 100 (B - P) / (B - S); throws Error(invalid_argument) when B == S.
double buyer_score(int buyer_bottom, int seller_bottom, int price);

struct Claim {
    std::string subject; // civ name
    std::string fact;    // "military_score", "gold", "unit_count", ...
    double value = 0;
};

struct DeceptionMessage {
    std::string text;
    std::vector<Claim> claims;
};

class Deceiver {
public:
    virtual ~Deceiver() = default;
    virtual DeceptionMessage compose(const GameState& state, const Ruleset& ruleset, CivId self,
                                     CivId target, std::uint64_t seed) = 0;
};

// Believes (true) or disbelieves (false) a message given its own observation.
class Detector {
public:
    virtual ~Detector() = default;
    virtual bool judge(const DeceptionMessage& message, const Observation& own, std::uint64_t seed) = 0;
    virtual std::string name() const = 0;
};

// Inflates one true fact about itself: a public score dimension when
// `visible_fact`, otherwise its unit count.
class ScriptedDeceiver : public Deceiver {
public:
    explicit ScriptedDeceiver(bool visible_fact = true) : visible_fact_(visible_fact) {}
    DeceptionMessage compose(const GameState& state, const Ruleset& ruleset, CivId self, CivId target,
                             std::uint64_t seed) override;

private:
    bool visible_fact_;
};

// Checks every claim it can verify from its own observation; believes the
// rest.
class CheckingDetector : public Detector {
public:
    bool judge(const DeceptionMessage& message, const Observation& own, std::uint64_t seed) override;
    std::string name() const override { return "checking"; }
};

class CoinFlipDetector : public Detector {
public:
    bool judge(const DeceptionMessage& message, const Observation& own, std::uint64_t seed) override;
    std::string name() const override { return "coin_flip"; }
};

class AdvisorDetector : public Detector {
public:
    explicit AdvisorDetector(std::shared_ptr<Advisor> advisor) : advisor_(std::move(advisor)) {}
    bool judge(const DeceptionMessage& message, const Observation& own, std::uint64_t seed) override;
    std::string name() const override { return "advisor:" + advisor_->name(); }

private:
    std::shared_ptr<Advisor> advisor_;
};

// Claims in `message` that contradict the observation; nullopt when no claim
// could be checked.
std::optional<bool> claims_contradict(const DeceptionMessage& message, const Observation& own);

struct DeceptionTrial {
    std::shared_ptr<Deceiver> deceiver;
    std::shared_ptr<Detector> detector;
    const Ruleset* ruleset = nullptr;
    GameState shared_state;
    CivId deceiver_civ{};
    CivId detector_civ{};
    std::uint64_t seed = 0;
};

struct DeceptionResult {
    bool void_trial = false;
    bool verdict = false; // detector judged the message true
    bool deceiver_success = false;
    DeceptionMessage message;
};

DeceptionResult run_deception(const DeceptionTrial& trial);

} // namespace microciv
