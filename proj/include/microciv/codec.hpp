#pragma once

#include "microciv/actions.hpp"
#include "microciv/scoring.hpp"
#include "microciv/state.hpp"

#include "json.hpp"

namespace microciv {

using nlohmann::json;

// Structured encodings shared by the save format, the wire protocol and the
// agent transcripts. Decoders throw SaveError(schema_error) on malformed
// input.

json encode_coord(Coord c);
Coord decode_coord(const json& j);

json encode_state(const GameState& state);
GameState decode_state(const json& j);

json encode_trade(const TradeOffer& offer);
TradeOffer decode_trade(const json& j);

json encode_action(const EngineAction& action);
EngineAction decode_action(const json& j);

json encode_event(const Event& event);
Event decode_event(const json& j);

json encode_score(const ScoreBreakdown& score);

} // namespace microciv
