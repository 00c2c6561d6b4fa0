#include "blendforge/evaluate.h"

#include "engine.h"

namespace blendforge {

double objective_value(const EvaluationReport& report, ObjectiveKind kind) {
  return kind == ObjectiveKind::Npv ? report.npv : report.total_revenue;
}

std::vector<PeriodCosts> compute_costs(const Scenario& scenario, const BlendPlan& plan) {
  const auto cs = detail::compile(scenario);
  const auto dense = detail::to_dense(cs, plan);
  detail::EvalResult ev;
  detail::evaluate(cs, dense, nullptr, ev);
  std::vector<PeriodCosts> out(cs.H);
  for (int t = 0; t < cs.H; ++t) {
    out[t] = PeriodCosts{ev.haul_hours[t],     ev.haul_cost[t],        ev.wash_feed[t],    ev.wash_cost[t],
                         ev.rehandle_moved[t], ev.rehandle_arrived[t], ev.rehandle_cost[t]};
  }
  return out;
}

EvaluationReport evaluate_plan(const Scenario& scenario, const BlendPlan& plan) {
  const auto cs = detail::compile(scenario);
  const auto dense = detail::to_dense(cs, plan);
  detail::EvalResult ev;
  detail::evaluate(cs, dense, nullptr, ev);
  return detail::make_report(cs, ev);
}

EvaluationReport evaluate_plan(const Scenario& scenario, const BlendPlan& plan, const ConstraintSet& constraints) {
  const auto cs = detail::compile(scenario);
  const auto dense = detail::to_dense(cs, plan);
  const auto dc = detail::compile_constraints(cs, constraints);
  detail::EvalResult ev;
  detail::evaluate(cs, dense, constraints.empty() ? nullptr : &dc, ev);
  return detail::make_report(cs, ev);
}

}  // namespace blendforge
