#include "microciv/actions.hpp"

#include <type_traits>

namespace microciv {

namespace {

template <typename T>
constexpr const char* kind_name() {
    if constexpr (std::is_same_v<T, MoveUnit>) return "move_unit";
    else if constexpr (std::is_same_v<T, FoundCity>) return "found_city";
    else if constexpr (std::is_same_v<T, ImproveTile>) return "improve_tile";
    else if constexpr (std::is_same_v<T, Attack>) return "attack";
    else if constexpr (std::is_same_v<T, PromoteUnit>) return "promote_unit";
    else if constexpr (std::is_same_v<T, SetProduction>) return "set_production";
    else if constexpr (std::is_same_v<T, SetResearch>) return "set_research";
    else if constexpr (std::is_same_v<T, DeclareWar>) return "declare_war";
    else if constexpr (std::is_same_v<T, OfferPeace>) return "offer_peace";
    else if constexpr (std::is_same_v<T, SignDefensivePact>) return "sign_defensive_pact";
    else if constexpr (std::is_same_v<T, SignResearchAgreement>) return "sign_research_agreement";
    else if constexpr (std::is_same_v<T, DeclareFriendship>) return "declare_friendship";
    else if constexpr (std::is_same_v<T, SetOpenBorders>) return "set_open_borders";
    else if constexpr (std::is_same_v<T, AdjustCloseness>) return "adjust_closeness";
    else if constexpr (std::is_same_v<T, ExecuteTrade>) return "execute_trade";
    else return "send_chat";
}

} // namespace

CivId actor_of(const EngineAction& action) {
    return std::visit(
        [](const auto& a) -> CivId {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, ExecuteTrade>) {
                return a.offer.proposer;
            } else {
                return a.civ;
            }
        },
        action);
}

ActionAspect aspect_of(const EngineAction& action) {
    return std::visit(
        [](const auto& a) -> ActionAspect {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, MoveUnit> || std::is_same_v<T, FoundCity> ||
                          std::is_same_v<T, ImproveTile> || std::is_same_v<T, Attack> ||
                          std::is_same_v<T, PromoteUnit>) {
                return ActionAspect::unit;
            } else if constexpr (std::is_same_v<T, SetProduction>) {
                return ActionAspect::production;
            } else if constexpr (std::is_same_v<T, SetResearch>) {
                return ActionAspect::technology;
            } else if constexpr (std::is_same_v<T, SendChat>) {
                return ActionAspect::chat;
            } else {
                return ActionAspect::diplomacy;
            }
        },
        action);
}

std::string action_kind(const EngineAction& action) {
    return std::visit([](const auto& a) -> std::string {
        return kind_name<std::decay_t<decltype(a)>>();
    }, action);
}

} // namespace microciv
