#pragma once

// Document forms of run inputs and outputs, in the scenario-io conventions
// (camelCase keys, units in field names, canonical key order).

#include <json.hpp>

#include <string>
#include <vector>

#include "blendforge/analytics.h"
#include "blendforge/errors.h"
#include "blendforge/guided.h"
#include "blendforge/optimizer.h"
#include "blendforge/types.h"

namespace blendforge {

using Json = nlohmann::json;

Json to_json(const BlendPlan& plan);
Json to_json(const EvaluationReport& report);
Json to_json(const Strategy& strategy);
Json to_json(const OptimizeResult& result);
Json to_json(const Directive& directive);
Json to_json(const std::vector<Directive>& directives);
Json to_json(const GuidedResult& result);
Json to_json(const std::vector<RankingRow>& ranking);
Json to_json(const AnalyticsReport& report);
Json to_json(const std::vector<FieldError>& errors);
// Incumbent, its report, applied directives, and per-entry history summaries.
Json to_json(const Session& session);

// Throw ValidationError with field paths. Strategy names must be registered.
BlendPlan plan_from_json(const Json& j);
Strategy strategy_from_json(const Json& j, const std::string& path = "");
Directive directive_from_json(const Json& j, const std::string& path = "");
std::vector<Directive> directives_from_json(const Json& j, const std::string& path = "");

// Canonical text form: two-space indent, trailing newline.
std::string dump(const Json& j);
// Parses text; syntax errors become a ValidationError.
Json parse(std::string_view text);

}  // namespace blendforge
