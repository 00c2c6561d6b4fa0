#include "blendforge/guided.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "blendforge/errors.h"
#include "blendforge/evaluate.h"

namespace blendforge {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string num(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

std::string signed_num(double v) { return (v >= 0 ? "+" : "") + num(v); }

class Validator {
 public:
  explicit Validator(const Scenario& s) : s_(s) {}

  void period(int t, const std::string& what) const {
    if (t < 0 || t >= s_.horizon_periods) throw DirectiveError(what + ": period " + std::to_string(t) + " outside the horizon");
  }
  void range(int first, int last, const std::string& what) const {
    period(first, what);
    period(last, what);
    if (first > last) throw DirectiveError(what + ": empty period range");
  }
  void product(const std::string& id, const std::string& what) const {
    if (!s_.find_product(id)) throw DirectiveError(what + ": unknown product " + id);
  }
  void rom(const std::string& id, const std::string& what) const {
    if (!s_.find_rom(id)) throw DirectiveError(what + ": unknown ROM " + id);
  }
  void finite(double v, const std::string& what) const {
    if (!std::isfinite(v)) throw DirectiveError(what + ": value must be finite");
  }

 private:
  const Scenario& s_;
};

void check_conflicts(const ConstraintSet& set) {
  for (const auto& [key, pin] : set.pins) {
    auto ex = set.exclusions.find(key);
    if (ex != set.exclusions.end() && pin.lots > 0) throw DirectiveConflictError(pin.source, ex->second.source);
  }
  for (std::size_t i = 0; i < set.quality_bounds.size(); ++i) {
    for (std::size_t j = 0; j < set.quality_bounds.size(); ++j) {
      const auto& u = set.quality_bounds[i];
      const auto& l = set.quality_bounds[j];
      if (!u.upper || l.upper || u.product != l.product || u.period != l.period || u.attribute != l.attribute) continue;
      if (u.bound < l.bound - 1e-9) throw DirectiveConflictError(i < j ? u.source : l.source, i < j ? l.source : u.source);
    }
  }
  for (std::size_t i = 0; i < set.tonnage_bounds.size(); ++i) {
    for (std::size_t j = 0; j < set.tonnage_bounds.size(); ++j) {
      const auto& u = set.tonnage_bounds[i];
      const auto& l = set.tonnage_bounds[j];
      if (u.lower || !l.lower || u.product != l.product || u.period != l.period) continue;
      if (u.bound < l.bound - 1e-6) throw DirectiveConflictError(i < j ? u.source : l.source, i < j ? l.source : u.source);
    }
  }
}

std::string source_of(const ConstraintSet& set, const Violation& v) {
  namespace vc = violation_code;
  if (v.code == vc::kPin) {
    auto it = set.pins.find(AllotmentKey{v.period, v.product, v.rom});
    if (it != set.pins.end()) return it->second.source;
  } else if (v.code == vc::kExclude) {
    auto it = set.exclusions.find(AllotmentKey{v.period, v.product, v.rom});
    if (it != set.exclusions.end()) return it->second.source;
  } else if (v.code == vc::kQualityBound) {
    for (const auto& b : set.quality_bounds) {
      if (b.product == v.product && b.period == v.period && b.attribute == v.attribute) return b.source;
    }
  } else if (v.code == vc::kTonnageBound) {
    for (const auto& b : set.tonnage_bounds) {
      if (b.product == v.product && b.period == v.period) return b.source;
    }
  } else if (v.code == vc::kReserve) {
    for (const auto& r : set.reserves) {
      if (r.rom == v.rom && v.period <= r.until_period) return r.source;
    }
  }
  return "scenario " + v.code;
}

GuidedResult run(const Session& session, const std::vector<Directive>& directives, ConstraintSet& merged) {
  merged = compile_directives(directives, session.scenario, session.incumbent, session.constraints);
  OptimizeOptions options;
  options.constraints = &merged;
  options.warm_start = session.incumbent;
  options.reference = session.incumbent;
  options.near_optimal_tolerance = kMinimalChangeTolerance;
  GuidedResult out;
  out.result = optimize(session.scenario, session.strategy, options);
  out.success = out.result.feasible;
  if (!out.success && !out.result.report.violations.empty()) {
    const auto& vs = out.result.report.violations;
    auto it = std::find_if(vs.begin(), vs.end(), [](const Violation& v) { return v.code.rfind("directive-", 0) == 0; });
    const Violation& binding = it != vs.end() ? *it : vs.front();
    out.binding = binding;
    out.binding_source = source_of(merged, binding);
  }
  return out;
}

}  // namespace

std::string describe(const Directive& directive) {
  return std::visit(
      Overloaded{
          [](const PinAllotment& d) {
            return "pin " + d.product + "/" + d.rom + " period " + std::to_string(d.period) + " to " +
                   std::to_string(d.lots) + " lots";
          },
          [](const QualityDelta& d) {
            return "quality " + d.product + " " + d.attribute + " " + signed_num(d.delta) + " periods " +
                   std::to_string(d.first_period) + "-" + std::to_string(d.last_period);
          },
          [](const TonnageDelta& d) {
            return "tonnage " + d.product + " period " + std::to_string(d.period) + " " + signed_num(d.delta) + " t";
          },
          [](const ExcludeRom& d) {
            return "exclude " + d.rom + " from " + (d.product.empty() ? std::string("all products") : d.product) +
                   " periods " + std::to_string(d.first_period) + "-" + std::to_string(d.last_period);
          },
          [](const ReserveRom& d) {
            return "reserve " + num(d.tonnes) + " t of " + d.rom + " until period " + std::to_string(d.until_period);
          },
      },
      directive);
}

ConstraintSet compile_directives(const std::vector<Directive>& directives, const Scenario& scenario,
                                 const BlendPlan& incumbent, const ConstraintSet& base) {
  ConstraintSet out = base;
  if (directives.empty()) return out;
  const Validator check(scenario);
  const EvaluationReport report = evaluate_plan(scenario, incumbent);
  for (const auto& directive : directives) {
    const std::string source = describe(directive);
    std::visit(
        Overloaded{
            [&](const PinAllotment& d) {
              check.period(d.period, source);
              check.product(d.product, source);
              check.rom(d.rom, source);
              if (d.lots < 0) throw DirectiveError(source + ": lots must be nonnegative");
              const AllotmentKey key{d.period, d.product, d.rom};
              auto [it, fresh] = out.pins.try_emplace(key, ConstraintSet::Pin{d.lots, source});
              if (!fresh && it->second.lots != d.lots) throw DirectiveConflictError(it->second.source, source);
            },
            [&](const QualityDelta& d) {
              check.range(d.first_period, d.last_period, source);
              check.product(d.product, source);
              check.finite(d.delta, source);
              if (!scenario.registry.contains(d.attribute)) throw DirectiveError(source + ": unknown attribute");
              for (int t = d.first_period; t <= d.last_period; ++t) {
                const auto* row = report.find(d.product, t);
                if (!row || row->tonnes <= 0.0 || !row->quality.count(d.attribute)) {
                  throw DirectiveError(source + ": incumbent has no " + d.product + " blend in period " +
                                       std::to_string(t));
                }
                const double now = row->quality.at(d.attribute);
                out.quality_bounds.push_back({d.product, t, d.attribute, now + d.delta, d.delta <= 0.0, source});
              }
            },
            [&](const TonnageDelta& d) {
              check.period(d.period, source);
              check.product(d.product, source);
              check.finite(d.delta, source);
              const auto* row = report.find(d.product, d.period);
              const double now = row ? row->tonnes : 0.0;
              out.tonnage_bounds.push_back({d.product, d.period, now + d.delta, d.delta >= 0.0, source});
            },
            [&](const ExcludeRom& d) {
              check.range(d.first_period, d.last_period, source);
              check.rom(d.rom, source);
              if (!d.product.empty()) check.product(d.product, source);
              for (int t = d.first_period; t <= d.last_period; ++t) {
                for (const auto& p : scenario.products) {
                  if (!d.product.empty() && p.id != d.product) continue;
                  out.exclusions.try_emplace(AllotmentKey{t, p.id, d.rom}, ConstraintSet::Exclusion{source});
                }
              }
            },
            [&](const ReserveRom& d) {
              check.period(d.until_period, source);
              check.rom(d.rom, source);
              check.finite(d.tonnes, source);
              if (d.tonnes < 0.0) throw DirectiveError(source + ": tonnes must be nonnegative");
              out.reserves.push_back({d.rom, d.tonnes, d.until_period, source});
            },
        },
        directive);
  }
  check_conflicts(out);
  return out;
}

Session open_session(const Scenario& scenario, const Strategy& strategy, std::string id) {
  Session s;
  s.id = std::move(id);
  s.scenario = scenario;
  s.strategy = strategy;
  OptimizeResult result = optimize(scenario, strategy);
  s.incumbent = result.plan;
  s.history.push_back(HistoryEntry{{}, std::move(result)});
  return s;
}

GuidedResult guided_reoptimize(Session& session, const std::vector<Directive>& directives) {
  ConstraintSet merged;
  GuidedResult out = run(session, directives, merged);
  if (out.success) {
    session.incumbent = out.result.plan;
    session.constraints = std::move(merged);
    session.directives.insert(session.directives.end(), directives.begin(), directives.end());
    session.history.push_back(HistoryEntry{directives, out.result});
  }
  return out;
}

GuidedResult preview(const Session& session, const std::vector<Directive>& directives) {
  ConstraintSet merged;
  return run(session, directives, merged);
}

const std::vector<HistoryEntry>& session_history(const Session& session) { return session.history; }

Session replay(const Scenario& scenario, const Strategy& strategy, const std::vector<HistoryEntry>& history) {
  Session s = open_session(scenario, strategy);
  for (std::size_t i = 1; i < history.size(); ++i) guided_reoptimize(s, history[i].directives);
  return s;
}

}  // namespace blendforge
