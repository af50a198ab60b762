#pragma once
// JSON views of evaluation results, shared with the command-line tool.

#include "aok/evaluation.hpp"
#include "json.hpp"

namespace aok::evaluation {

nlohmann::json to_json(const Estimate& e);
nlohmann::json to_json(const MetricBlock& m);
nlohmann::json to_json(const TTest& t);
nlohmann::json to_json(const DiceResult& d);

}  // namespace aok::evaluation
