#include "blendforge/analytics.h"

#include <algorithm>
#include <cmath>

#include "blendforge/errors.h"
#include "engine.h"

namespace blendforge {

namespace {

double objective_of(const OptimizeResult& r, const Strategy& s) {
  return objective_value(r.report, s.objective);
}

}  // namespace

ContributionBreakdown quality_contribution(const Scenario& scenario, const BlendPlan& plan, const std::string& product,
                                           int period) {
  const auto cs = detail::compile(scenario);
  const int p = cs.product(product);
  if (p < 0) throw DomainError("unknown product " + product);
  if (period < 0 || period >= cs.H) throw DomainError("period " + std::to_string(period) + " outside the horizon");
  const auto dense = detail::to_dense(cs, plan);
  detail::EvalResult ev;
  detail::evaluate(cs, dense, nullptr, ev);

  ContributionBreakdown out;
  out.product = product;
  out.period = period;
  const std::size_t pp = static_cast<std::size_t>(period) * cs.P + p;
  const double total = ev.pp_tonnes[pp];
  if (total <= 0.0) return out;
  for (int a = 0; a < cs.A; ++a) out.blended[cs.attr_codes[a]] = ev.pp_quality[pp * cs.A + a];
  const double lot = cs.logistics.lot_size_tonnes;
  for (int r = 0; r < cs.R; ++r) {
    const int lots = dense.lots[cs.cell(period, p, r)];
    if (lots <= 0) continue;
    double yield = 1.0, ash = 0.0;
    detail::wash_at(cs, dense, r, period, yield, ash);
    RomContribution rc;
    rc.rom = cs.roms[r].id;
    rc.tonnes = lots * lot * yield;
    rc.share = rc.tonnes / total;
    for (int a = 0; a < cs.A; ++a) {
      const double v = (a == cs.ash_attr && !std::isnan(ash))
                           ? ash
                           : cs.roms[r].degraded[static_cast<std::size_t>(period) * cs.A + a];
      rc.contribution[cs.attr_codes[a]] = rc.share * v;
    }
    out.roms.push_back(std::move(rc));
  }
  return out;
}

std::vector<ConstraintSlack> constraint_slack(const Scenario& scenario, const BlendPlan& plan) {
  const auto cs = detail::compile(scenario);
  const auto dense = detail::to_dense(cs, plan);
  detail::EvalResult ev;
  detail::evaluate(cs, dense, nullptr, ev);
  const double lot = cs.logistics.lot_size_tonnes;
  std::vector<ConstraintSlack> out;
  for (int t = 0; t < cs.H; ++t) {
    if (!cs.haul_cap.empty()) {
      out.push_back({"haul-hours", t, "", cs.haul_cap[t], ev.haul_hours[t], cs.haul_cap[t] - ev.haul_hours[t]});
    }
    if (!cs.wash_cap.empty()) {
      out.push_back({"wash-tonnes", t, "", cs.wash_cap[t], ev.wash_feed[t], cs.wash_cap[t] - ev.wash_feed[t]});
    }
  }
  // Stock flow as the evaluator runs it: pit and staging stock carry forward,
  // feed draws staging first, shortfalls do not carry.
  const double loss = cs.logistics.rehandle_loss_fraction;
  for (int r = 0; r < cs.R; ++r) {
    double pit = 0.0, staging = 0.0;
    for (int t = 0; t < cs.H; ++t) {
      pit += cs.roms[r].available[t];
      const double moved = std::min(pit, dense.rehandle[static_cast<std::size_t>(t) * cs.R + r]);
      pit -= moved;
      staging += moved * (1.0 - loss);
      double feed = 0.0;
      for (int p = 0; p < cs.P; ++p) feed += dense.lots[cs.cell(t, p, r)] * lot;
      const double stock = pit + staging;
      out.push_back({"availability", t, cs.roms[r].id, stock, feed, stock - feed});
      const double from_staging = std::min(feed, staging);
      staging -= from_staging;
      pit = std::max(0.0, pit - (feed - from_staging));
    }
  }
  for (int p = 0; p < cs.P; ++p) {
    for (int t = 0; t < cs.H; ++t) {
      const double contract = cs.products[p].contract[t];
      if (contract <= 0.0) continue;
      const std::size_t pp = static_cast<std::size_t>(t) * cs.P + p;
      const double sold = ev.pp_in_spec[pp] ? ev.pp_tonnes[pp] : 0.0;
      out.push_back({"contract-min", t, cs.products[p].id, contract, sold, sold - contract});
    }
  }
  return out;
}

double marginal_rom_value(const Scenario& scenario, const std::string& rom, double delta_tonnes,
                          const Strategy& strategy) {
  if (!scenario.find_rom(rom)) throw DomainError("unknown ROM " + rom);
  if (!(delta_tonnes > 0.0) || !std::isfinite(delta_tonnes)) throw DomainError("marginal delta must be positive");
  Scenario more = scenario;
  for (auto& r : more.roms) {
    if (r.id == rom) r.available_tonnes.front() += delta_tonnes;
  }
  const double base = objective_of(optimize(scenario, strategy), strategy);
  const double grown = objective_of(optimize(more, strategy), strategy);
  return (grown - base) / delta_tonnes;
}

PriceSensitivity price_sensitivity(const Scenario& scenario, const BlendPlan& plan, const std::string& product,
                                   double price_delta, const Strategy& strategy) {
  if (!scenario.find_product(product)) throw DomainError("unknown product " + product);
  if (!std::isfinite(price_delta)) throw DomainError("price delta must be finite");
  Scenario shifted = scenario;
  for (auto& p : shifted.products) {
    if (p.id != product) continue;
    for (double& price : p.base_price) price += price_delta;
  }
  PriceSensitivity out;
  out.incumbent_objective = objective_value(evaluate_plan(scenario, plan), strategy.objective);
  out.shifted_objective = objective_value(evaluate_plan(shifted, plan), strategy.objective);
  const OptimizeResult before = optimize(scenario, strategy);
  const OptimizeResult after = price_delta == 0.0 ? before : optimize(shifted, strategy);
  out.reoptimized_objective = objective_of(after, strategy);
  out.reoptimized_plan = after.plan;
  out.plan_changed = after.plan != before.plan;
  return out;
}

std::vector<Deadline> degradation_deadline(const Scenario& scenario, const BlendPlan& plan, const std::string& rom) {
  const auto cs = detail::compile(scenario);
  const int r = cs.rom(rom);
  if (r < 0) throw DomainError("unknown ROM " + rom);
  const auto dense = detail::to_dense(cs, plan);
  std::vector<Deadline> out;
  detail::EvalResult ev;
  for (int p = 0; p < cs.P; ++p) {
    int source = -1;
    for (int t = 0; t < cs.H && source < 0; ++t) {
      if (dense.lots[cs.cell(t, p, r)] > 0) source = t;
    }
    if (source < 0) continue;
    int last_safe = -1;
    bool broken = false;
    for (int t = 0; t < cs.H; ++t) {
      detail::DensePlan probe = detail::empty_dense(cs);
      for (int k = 0; k < cs.R; ++k) {
        probe.lots[cs.cell(t, p, k)] = dense.lots[cs.cell(source, p, k)];
        probe.cuts[static_cast<std::size_t>(k) * cs.H + t] = dense.cuts[static_cast<std::size_t>(k) * cs.H + source];
      }
      detail::evaluate(cs, probe, nullptr, ev);
      const bool in_spec = ev.pp_in_spec[static_cast<std::size_t>(t) * cs.P + p] != 0;
      if (in_spec && !broken) last_safe = t;
      if (!in_spec) broken = true;
    }
    Deadline d;
    d.product = cs.products[p].id;
    if (last_safe == cs.H - 1) {
      d.kind = Deadline::Kind::Always;
    } else if (last_safe < 0) {
      d.kind = Deadline::Kind::Never;
    } else {
      d.kind = Deadline::Kind::Period;
      d.last_safe_period = last_safe;
    }
    out.push_back(d);
  }
  return out;
}

AnalyticsReport analyze(const Scenario& scenario, const BlendPlan& plan, const Strategy& strategy,
                        const AnalyticsOptions& options) {
  AnalyticsReport out;
  for (const auto& product : scenario.products) {
    for (int t = 0; t < scenario.horizon_periods; ++t) {
      auto breakdown = quality_contribution(scenario, plan, product.id, t);
      if (!breakdown.roms.empty()) out.contributions.push_back(std::move(breakdown));
    }
  }
  std::sort(out.contributions.begin(), out.contributions.end(), [](const auto& a, const auto& b) {
    return std::tie(a.period, a.product) < std::tie(b.period, b.product);
  });
  out.slacks = constraint_slack(scenario, plan);
  const double delta = options.marginal_delta_tonnes.value_or(scenario.logistics.lot_size_tonnes);
  for (const auto& rom : scenario.roms) {
    if (options.include_marginals) out.marginals[rom.id] = marginal_rom_value(scenario, rom.id, delta, strategy);
    auto deadlines = degradation_deadline(scenario, plan, rom.id);
    if (!deadlines.empty()) out.deadlines[rom.id] = std::move(deadlines);
  }
  return out;
}

}  // namespace blendforge
