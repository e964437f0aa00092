#include "microciv/state.hpp"

#include <algorithm>

namespace microciv {

const char* treaty_name(Treaty t) noexcept {
    switch (t) {
    case Treaty::war: return "war";
    case Treaty::peace: return "peace";
    case Treaty::friendship: return "declaration_of_friendship";
    case Treaty::defensive_pact: return "defensive_pact";
    case Treaty::open_borders: return "open_borders";
    case Treaty::research_agreement: return "research_agreement";
    }
    return "unknown";
}

std::optional<Treaty> treaty_from_name(std::string_view name) noexcept {
    for (Treaty t : kAllTreaties) {
        if (name == treaty_name(t)) {
            return t;
        }
    }
    return std::nullopt;
}

std::optional<CivId> GameState::civ_by_name(std::string_view name) const {
    for (const auto& c : civs) {
        if (c.name == name) {
            return c.id;
        }
    }
    return std::nullopt;
}

std::string private_channel(const std::string& a, const std::string& b) {
    return a < b ? "private:" + a + "|" + b : "private:" + b + "|" + a;
}

bool channel_member(const std::string& channel, const std::string& civ_name) {
    if (channel == kGlobalChannel) {
        return true;
    }
    constexpr std::string_view prefix = "private:";
    if (channel.rfind(prefix, 0) != 0) {
        return false;
    }
    const std::string rest = channel.substr(prefix.size());
    const auto bar = rest.find('|');
    if (bar == std::string::npos) {
        return false;
    }
    return rest.substr(0, bar) == civ_name || rest.substr(bar + 1) == civ_name;
}

} // namespace microciv
