#include "microciv/minigames.hpp"

#include "microciv/error.hpp"
#include "microciv/queries.hpp"
#include "microciv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace microciv {

const char* side_name(Side side) noexcept { return side == Side::buyer ? "buyer" : "seller"; }

BottomLine search_bottom_line(const std::function<double(int)>& delta, Side side, int lo, int hi,
                              int granularity) {
    if (granularity < 1 || hi < lo) {
        throw Error("invalid_argument", "empty price grid");
    }
    const int n = (hi - lo) / granularity + 1;
    auto price = [&](int i) { return lo + i * granularity; };
    auto ok = [&](int i) { return delta(price(i)) >= 0; };

    if (side == Side::buyer) {
        if (!ok(0)) throw Error("no_crossing", "buyer delta is negative over the whole range");
        if (ok(n - 1)) return {price(n - 1), true};
        int good = 0, bad = n - 1;
        while (bad - good > 1) {
            const int mid = good + (bad - good) / 2;
            (ok(mid) ? good : bad) = mid;
        }
        return {price(good), false};
    }
    if (!ok(n - 1)) throw Error("no_crossing", "seller delta is negative over the whole range");
    if (ok(0)) return {price(0), true};
    int bad = 0, good = n - 1;
    while (good - bad > 1) {
        const int mid = bad + (good - bad) / 2;
        (ok(mid) ? good : bad) = mid;
    }
    return {price(good), false};
}

int template_price(const TradeOffer& offer) { return offer.give.gold; }

TradeOffer with_price(TradeOffer offer, int price) {
    offer.give.gold = price;
    return offer;
}

namespace {

RolloutConfig horizon_config(int horizon) {
    RolloutConfig cfg;
    cfg.turns = horizon;
    cfg.freeze_diplomacy = true;
    return cfg;
}

double side_score(const RolloutResult& r, CivId civ) { return r.end.at(idx(civ)).S; }

double delta_against(const Simulator& simulator, const GameState& state, const TradeOffer& offer,
                     Side side, int price, int horizon, double baseline) {
    const TradeOffer priced = with_price(offer, price);
    const CivId civ = side == Side::buyer ? priced.proposer : priced.target;
    const Engine engine(simulator.ruleset());
    GameState s = state;
    if (engine.check(s, ExecuteTrade{priced})) return -std::numeric_limits<double>::infinity();
    engine.apply(s, ExecuteTrade{priced});
    return side_score(simulator.rollout(s, horizon_config(horizon)), civ) - baseline;
}

} // namespace

double trade_score_delta(const Simulator& simulator, const GameState& state, const TradeOffer& offer,
                         Side side, int price, int horizon) {
    const CivId civ = side == Side::buyer ? offer.proposer : offer.target;
    const double baseline = side_score(simulator.rollout(state, horizon_config(horizon)), civ);
    return delta_against(simulator, state, offer, side, price, horizon, baseline);
}

BottomLine compute_bottom_line(const Simulator& simulator, const GameState& state,
                               const TradeOffer& trade_template, Side side,
                               const BottomLineConfig& config) {
    const int hi = config.hi > 0 ? config.hi : 10 * std::max(1, template_price(trade_template));
    const CivId civ = side == Side::buyer ? trade_template.proposer : trade_template.target;
    const double baseline =
        side_score(simulator.rollout(state, horizon_config(config.horizon)), civ);
    return search_bottom_line(
        [&](int price) {
            return delta_against(simulator, state, trade_template, side, price, config.horizon,
                                 baseline);
        },
        side, config.lo, hi, config.granularity);
}

int market_reference(int bottom, std::uint64_t seed, int granularity) {
    if (bottom <= 0) throw Error("invalid_argument", "bottom line must be positive");
    if (granularity < 1) throw Error("invalid_argument", "granularity must be >= 1");
    const double lo = 0.8 * bottom;
    const double hi = 1.2 * bottom;
    const double v = lo + (hi - lo) * unit_interval(stream_value(seed, "market_reference", 0));
    int price = static_cast<int>(std::lround(v / granularity)) * granularity;
    const int grid_lo = static_cast<int>(std::ceil(lo / granularity - 1e-9)) * granularity;
    const int grid_hi = static_cast<int>(std::floor(hi / granularity + 1e-9)) * granularity;
    if (grid_lo <= grid_hi) price = std::clamp(price, grid_lo, grid_hi);
    return price;
}

double buyer_score(int buyer_bottom, int seller_bottom, int price) {
    if (buyer_bottom == seller_bottom) {
        throw Error("invalid_argument", "bottom lines coincide; the score is undefined");
    }
    return 100.0 * (buyer_bottom - price) / static_cast<double>(buyer_bottom - seller_bottom);
}

std::string ConcedingPolicy::name() const {
    std::ostringstream out;
    out << "conceding(" << concession_ << ")";
    return out.str();
}

namespace {

int seller_anchor(const NegotiationView& v) {
    return std::min(v.hi, std::max(v.bottom, static_cast<int>(std::ceil(1.2 * v.reference))));
}

// The next counter a conceding side would make.
int conceding_counter(const NegotiationView& v, double concession) {
    if (v.side == Side::buyer) {
        const int last = v.my_last.value_or(0);
        const int next =
            last + static_cast<int>(std::floor(concession * (v.on_table - last)));
        return std::clamp(next, 0, v.bottom);
    }
    if (!v.my_last) return seller_anchor(v);
    const int last = *v.my_last;
    const int next = last - static_cast<int>(std::floor(concession * (last - v.on_table)));
    return std::clamp(next, v.bottom, std::max(v.bottom, v.hi));
}

bool acceptable(const NegotiationView& v, int price) {
    return v.side == Side::buyer ? price <= v.bottom : price >= v.bottom;
}

double surplus(const NegotiationView& v, int price) {
    return v.side == Side::buyer ? v.bottom - price : price - v.bottom;
}

} // namespace

NegotiationMove ConcedingPolicy::respond(const NegotiationView& v) {
    const bool last_round = v.round >= v.max_rounds;
    const int next = conceding_counter(v, concession_);
    const bool beats_counter = v.side == Side::buyer ? v.on_table <= next : v.on_table >= next;
    if (acceptable(v, v.on_table) && (beats_counter || last_round)) {
        return {NegotiationMove::Kind::accept, v.on_table};
    }
    if (last_round) return {NegotiationMove::Kind::reject, 0};
    return {NegotiationMove::Kind::counter, next};
}

NegotiationMove AdvisorNegotiationPolicy::respond(const NegotiationView& v) {
    DecisionContext c;
    c.kind = DecisionKind::negotiation_reply;
    c.turn = v.round;
    c.civ = side_name(v.side);
    c.background = std::string("You are the ") + side_name(v.side) + ". Your bottom line is " +
                   std::to_string(v.bottom) + " gold and the market reference is " +
                   std::to_string(v.reference) + " gold.";
    c.events = "The other side offers " + std::to_string(v.on_table) + " gold in round " +
               std::to_string(v.round) + " of " + std::to_string(v.max_rounds) + ".";
    c.options.push_back({"accept", "accept", "accept " + std::to_string(v.on_table) + " gold",
                         surplus(v, v.on_table), json{{"price", v.on_table}}});
    if (v.round < v.max_rounds) {
        const std::pair<const char*, double> steps[] = {{"counter_small", 0.10},
                                                        {"counter_medium", 0.25},
                                                        {"counter_large", 0.50}};
        const double chance[] = {0.3, 0.5, 0.8};
        for (std::size_t i = 0; i < 3; ++i) {
            const int price = conceding_counter(v, steps[i].second);
            c.options.push_back({steps[i].first, "counter",
                                 "counter with " + std::to_string(price) + " gold",
                                 chance[i] * std::max(0.0, surplus(v, price)),
                                 json{{"price", price}}});
        }
    }
    c.options.push_back({"reject", "reject", "walk away", 0.0, json::object()});
    const AdvisorDecision d = checked_decide(*advisor_, c);
    for (const auto& o : c.options) {
        if (o.id != d.choice()) continue;
        if (o.tag == "accept") return {NegotiationMove::Kind::accept, v.on_table};
        if (o.tag == "counter") return {NegotiationMove::Kind::counter, o.payload.at("price").get<int>()};
    }
    return {NegotiationMove::Kind::reject, 0};
}

NegotiationOutcome run_negotiation(const NegotiationSession& session) {
    if (!session.buyer || !session.seller) {
        throw Error("invalid_argument", "negotiation needs a buyer and a seller policy");
    }
    if (session.max_rounds < 1) throw Error("invalid_argument", "max_rounds must be >= 1");
    NegotiationOutcome out;
    auto forfeit = [&](Side side) {
        out.forfeited = side;
        return out;
    };
    auto in_range = [&](int price) { return price >= 0 && price <= session.hi; };

    if (!in_range(session.initial_price)) return forfeit(Side::buyer);
    out.transcript.push_back({1, Side::buyer, session.initial_price});
    std::optional<int> last[2] = {session.initial_price, std::nullopt};
    Side to_move = Side::seller;
    while (true) {
        const NegotiationOffer& table = out.transcript.back();
        const bool buyer = to_move == Side::buyer;
        NegotiationView view;
        view.side = to_move;
        view.bottom = buyer ? session.buyer_bottom : session.seller_bottom;
        view.reference = buyer ? session.buyer_reference : session.seller_reference;
        view.round = table.round;
        view.max_rounds = session.max_rounds;
        view.hi = session.hi;
        view.on_table = table.price;
        view.my_last = last[buyer ? 0 : 1];
        view.history = &out.transcript;
        const NegotiationMove move = (buyer ? session.buyer : session.seller)->respond(view);
        if (move.kind == NegotiationMove::Kind::accept) {
            out.deal = true;
            out.price = table.price;
            break;
        }
        if (move.kind == NegotiationMove::Kind::reject || table.round >= session.max_rounds) break;
        if (!in_range(move.price)) return forfeit(to_move);
        out.transcript.push_back({table.round + 1, to_move, move.price});
        last[buyer ? 0 : 1] = move.price;
        to_move = buyer ? Side::seller : Side::buyer;
    }
    if (out.deal) {
        if (session.buyer_bottom == session.seller_bottom) {
            out.buyer_score = 50;
        } else {
            out.buyer_score = buyer_score(session.buyer_bottom, session.seller_bottom, out.price);
        }
        out.seller_score = 100 - out.buyer_score;
    }
    return out;
}

DeceptionMessage ScriptedDeceiver::compose(const GameState& state, const Ruleset& ruleset,
                                           CivId self, CivId target, std::uint64_t seed) {
    const Civilization& me = state.civ(self);
    const double factor = 1.2 + 0.6 * unit_interval(stream_value(seed, "deceiver", 0));
    Claim claim;
    claim.subject = me.name;
    if (visible_fact_) {
        const double truth = civ_score(me, state, ruleset).F;
        claim.fact = "military_score";
        claim.value = std::round((truth * factor + 5.0) * 10.0) / 10.0;
    } else {
        claim.fact = "unit_count";
        claim.value = std::ceil(static_cast<double>(me.units.size()) * factor) + 3;
    }
    std::ostringstream text;
    text << me.name << " to " << state.civ(target).name << ": our " << claim.fact << " stands at "
         << claim.value << ". Think carefully before you test us.";
    return {text.str(), {claim}};
}

std::optional<bool> claims_contradict(const DeceptionMessage& message, const Observation& own) {
    const json& body = own.body;
    bool checked = false;
    for (const Claim& c : message.claims) {
        if (c.fact == "military_score" || c.fact == "total_score" || c.fact == "gold") {
            const char* key = c.fact == "military_score" ? "F" : c.fact == "total_score" ? "S" : "G";
            const auto scores = body.find("scores");
            if (scores == body.end() || !scores->contains(c.subject)) continue;
            checked = true;
            if (std::abs((*scores)[c.subject].at(key).get<double>() - c.value) > 1e-6) return true;
        } else if (c.fact == "unit_count") {
            // Only a lower bound is observable: the subject's units in sight.
            int seen = 0;
            const auto units = body.find("units");
            if (units != body.end()) {
                for (const auto& u : units->at("foreign")) seen += u.at("owner") == c.subject;
            }
            if (seen > c.value) return true;
        }
    }
    if (!checked) return std::nullopt;
    return false;
}

bool CheckingDetector::judge(const DeceptionMessage& message, const Observation& own,
                             std::uint64_t) {
    return claims_contradict(message, own) != true;
}

bool CoinFlipDetector::judge(const DeceptionMessage&, const Observation&, std::uint64_t seed) {
    return (stream_value(seed, "coin_flip", 0) >> 11) & 1u;
}

bool AdvisorDetector::judge(const DeceptionMessage& message, const Observation& own,
                            std::uint64_t seed) {
    DecisionContext c;
    c.kind = DecisionKind::deception_judgement;
    c.turn = own.turn;
    c.civ = own.body.value("viewer", std::string());
    c.background = "Another civilization sent you a message. Judge whether it is true.";
    c.events = message.text;
    c.observation = own.body;
    c.options = {{"true", "believe", "the message is true", std::nullopt, json::object()},
                 {"false", "disbelieve", "the message is false", std::nullopt, json::object()}};
    if (const auto contradiction = claims_contradict(message, own)) {
        c.options[0].value = *contradiction ? -1.0 : 1.0;
        c.options[1].value = *contradiction ? 1.0 : -1.0;
    }
    c.game_id = to_hex(seed);
    return checked_decide(*advisor_, c).choice() == "true";
}

DeceptionResult run_deception(const DeceptionTrial& trial) {
    if (!trial.deceiver || !trial.detector || !trial.ruleset) {
        throw Error("invalid_argument", "deception trial needs a deceiver, a detector and a ruleset");
    }
    DeceptionResult r;
    r.message = trial.deceiver->compose(trial.shared_state, *trial.ruleset, trial.deceiver_civ,
                                        trial.detector_civ, trial.seed);
    if (r.message.text.empty() && r.message.claims.empty()) {
        r.void_trial = true;
        return r;
    }
    const Observation own = extract_observation(trial.shared_state, *trial.ruleset, trial.detector_civ);
    r.verdict = trial.detector->judge(r.message, own, trial.seed);
    r.deceiver_success = r.verdict;
    return r;
}

} // namespace microciv
