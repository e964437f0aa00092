#pragma once

#include "microciv/state.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace microciv {

struct TradeBundle {
    int gold = 0;
    std::map<std::string, int> resources;
    std::vector<CityId> cities;
    std::vector<Treaty> treaties;

    bool empty() const noexcept {
        return gold == 0 && resources.empty() && cities.empty() && treaties.empty();
    }
    bool operator==(const TradeBundle&) const = default;
};

// `give` flows proposer -> target, `receive` flows target -> proposer.
// Resource quantities are lent for `duration` turns; gold and cities move
// permanently; treaties are mutual.
struct TradeOffer {
    CivId proposer{};
    CivId target{};
    TradeBundle give;
    TradeBundle receive;
    int duration = 30;

    bool operator==(const TradeOffer&) const = default;
};

using CombatTarget = std::variant<UnitId, CityId>;

struct MoveUnit {
    CivId civ{};
    UnitId unit{};
    Coord to;
    bool operator==(const MoveUnit&) const = default;
};
struct FoundCity {
    CivId civ{};
    UnitId unit{};
    bool operator==(const FoundCity&) const = default;
};
struct ImproveTile {
    CivId civ{};
    UnitId unit{};
    std::string improvement;
    bool operator==(const ImproveTile&) const = default;
};
struct Attack {
    CivId civ{};
    UnitId unit{};
    CombatTarget target;
    bool operator==(const Attack&) const = default;
};
struct PromoteUnit {
    CivId civ{};
    UnitId unit{};
    bool operator==(const PromoteUnit&) const = default;
};
struct SetProduction {
    CivId civ{};
    CityId city{};
    std::string item;
    bool operator==(const SetProduction&) const = default;
};
struct SetResearch {
    CivId civ{};
    std::string tech;
    bool operator==(const SetResearch&) const = default;
};
struct DeclareWar {
    CivId civ{};
    CivId target{};
    bool operator==(const DeclareWar&) const = default;
};
struct OfferPeace {
    CivId civ{};
    CivId target{};
    std::optional<TradeOffer> terms;
    bool operator==(const OfferPeace&) const = default;
};
struct SignDefensivePact {
    CivId civ{};
    CivId target{};
    bool operator==(const SignDefensivePact&) const = default;
};
struct SignResearchAgreement {
    CivId civ{};
    CivId target{};
    bool operator==(const SignResearchAgreement&) const = default;
};
struct DeclareFriendship {
    CivId civ{};
    CivId target{};
    bool operator==(const DeclareFriendship&) const = default;
};
struct SetOpenBorders {
    CivId civ{};
    CivId target{};
    bool operator==(const SetOpenBorders&) const = default;
};
struct AdjustCloseness {
    CivId civ{};
    CivId target{};
    int delta = 0;
    bool operator==(const AdjustCloseness&) const = default;
};
struct ExecuteTrade {
    TradeOffer offer;
    bool operator==(const ExecuteTrade&) const = default;
};
struct SendChat {
    CivId civ{};
    std::string channel;
    std::string text;
    bool operator==(const SendChat&) const = default;
};

using EngineAction =
    std::variant<MoveUnit, FoundCity, ImproveTile, Attack, PromoteUnit, SetProduction,
                 SetResearch, DeclareWar, OfferPeace, SignDefensivePact, SignResearchAgreement,
                 DeclareFriendship, SetOpenBorders, AdjustCloseness, ExecuteTrade, SendChat>;

enum class ActionAspect { unit, production, technology, diplomacy, chat };

CivId actor_of(const EngineAction& action);
ActionAspect aspect_of(const EngineAction& action);
// Stable snake_case tag, e.g. "declare_war".
std::string action_kind(const EngineAction& action);

} // namespace microciv
