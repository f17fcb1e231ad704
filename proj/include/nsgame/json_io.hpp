#pragma once

#include <json.hpp>

#include "nsgame/game.hpp"
#include "nsgame/transforms.hpp"

namespace nsg {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Game files: {"k", "queries", "answers", "pi": [{"q": [...], "p": x}],
// "predicate": {"mode": "accept_list"|"dense", ...}}.  Serialization is
// canonical: pi entries in tuple order with zero weights dropped, and the
// predicate always in dense row-major form (queries outermost, players left
// to right).
nlohmann::json game_to_json(const Game& g);
Game game_from_json(const nlohmann::json& j);

// Strategy files: {"entries": [{"q": [...], "dist": [{"a": [...], "p": x}]}]}.
// Answer label "*" only resolves against games whose alphabets carry the
// placeholder symbol (extended games).
nlohmann::json strategy_to_json(const Game& g, const Strategy& s);
Strategy strategy_from_json(const Game& g, const nlohmann::json& j);

Game game_from_file(const std::string& path);
Strategy strategy_from_file(const Game& g, const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

nlohmann::json check_report_to_json(const Game& g, const CheckReport& r);
nlohmann::json trace_to_json(const PipelineTrace& tr);

}  // namespace nsg
