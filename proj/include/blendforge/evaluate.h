#pragma once

#include <vector>

#include "blendforge/constraints.h"
#include "blendforge/types.h"

namespace blendforge {

enum class ObjectiveKind { Npv, Revenue };

double objective_value(const EvaluationReport& report, ObjectiveKind kind);

struct PeriodCosts {
  double haul_hours{0.0};
  double haul_cost{0.0};
  double wash_feed_tonnes{0.0};
  double wash_cost{0.0};
  double rehandle_tonnes{0.0};
  double rehandle_arrived_tonnes{0.0};
  double rehandle_cost{0.0};
};

// Per-period resource usage and costs. Haul hours count pit material at the
// ROM's haul rate, staged material at the staging rate, and the pit-to-staging
// leg of each rehandle in the period it moves.
std::vector<PeriodCosts> compute_costs(const Scenario& scenario, const BlendPlan& plan);

// Runs the full pipeline: degrade -> wash -> blend -> spec check -> price ->
// costs -> NPV and KPIs. Infeasible plans are reported with violations, never
// repaired. Throws StructuralError when the plan does not bind to the scenario.
EvaluationReport evaluate_plan(const Scenario& scenario, const BlendPlan& plan);
EvaluationReport evaluate_plan(const Scenario& scenario, const BlendPlan& plan, const ConstraintSet& constraints);

}  // namespace blendforge
