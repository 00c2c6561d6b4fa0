#include "blendforge/optimizer.h"

#include <algorithm>
#include <limits>
#include <cmath>
#include <map>
#include <mutex>

#include "blendforge/errors.h"
#include "search.h"

namespace blendforge {

namespace {

using detail::DensePlan;
using detail::EvalResult;
using detail::Score;
using detail::SearchContext;

constexpr double kDefaultBudget = 50000;

const std::map<std::string, double>& builtin_defaults(const std::string& name) {
  static const std::map<std::string, std::map<std::string, double>> kDefaults{
      {"anneal",
       {{"seed", 0}, {"budgetEvaluations", kDefaultBudget}, {"restarts", 10}, {"initialTemperature", 2},
        {"penaltyWeight", 2}}},
      {"local-search", {{"seed", 0}, {"budgetEvaluations", kDefaultBudget}, {"restarts", 10}, {"penaltyWeight", 2}}},
  };
  static const std::map<std::string, double> kNone;
  auto it = kDefaults.find(name);
  return it == kDefaults.end() ? kNone : it->second;
}

// Everything one run needs, compiled once.
struct Run {
  Run(const Scenario& scenario, const Strategy& strategy, const OptimizeOptions& options)
      : cs(detail::compile(scenario)),
        dc(options.constraints && !options.constraints->empty()
               ? std::optional(detail::compile_constraints(cs, *options.constraints))
               : std::nullopt),
        ctx(cs, dc ? &*dc : nullptr, strategy.objective),
        options(options) {}

  detail::CompiledScenario cs;
  std::optional<detail::DenseConstraints> dc;
  SearchContext ctx;
  const OptimizeOptions& options;
  std::size_t evaluations{0};
  bool cancelled{false};

  DensePlan best;
  Score best_score;
  std::vector<TracePoint> trace;
  // Feasible plans near the best objective, keyed by lots; kept only when a
  // reference plan asks for a minimal-change answer.
  std::map<std::vector<int>, std::pair<double, DensePlan>> archive;

  bool stop() {
    if (options.cancel.requested()) cancelled = true;
    return cancelled;
  }

  void count() {
    ++evaluations;
    if (options.progress) options.progress->fetch_add(1, std::memory_order_relaxed);
  }

  double near_threshold() const {
    return best_score.objective - options.near_optimal_tolerance * std::abs(best_score.objective);
  }

  void offer(const DensePlan& plan, const Score& s) {
    if (best.lots.empty() || detail::better(s, best_score)) {
      best = plan;
      best_score = s;
      if (s.feasible) trace.push_back(TracePoint{evaluations, s.objective});
    }
    if (options.reference && s.feasible && s.objective >= near_threshold()) {
      auto [it, fresh] = archive.try_emplace(plan.lots, s.objective, plan);
      if (!fresh && s.objective > it->second.first) it->second = {s.objective, plan};
      if (archive.size() > 4096) prune();
    }
  }

  void prune() {
    const double floor = near_threshold();
    std::erase_if(archive, [&](const auto& kv) { return kv.second.first < floor; });
  }

  Score repaired(DensePlan& plan, EvalResult& ev) {
    detail::repair_dense(ctx, plan, ev);
    return detail::score_of(ev, ctx.kind);
  }
};

double resolve_or(const Strategy& strategy, const Scenario& scenario, const std::string& key, double fallback) {
  auto it = builtin_defaults(strategy.name).find(key);
  return strategy_param(strategy, scenario, key, it == builtin_defaults(strategy.name).end() ? fallback : it->second);
}

double resolve(const Strategy& strategy, const Scenario& scenario, const std::string& key) {
  return resolve_or(strategy, scenario, key, -1.0);
}

std::uint64_t seed_of(double v) { return static_cast<std::uint64_t>(std::llround(std::max(0.0, v))); }

// Starting point: the better of the repaired satisficing plan and the
// repaired warm start.
void seed_start(Run& run) {
  EvalResult ev;
  DensePlan init = detail::construct(run.ctx, detail::Heuristic::ProfitFirst, run.evaluations);
  Score s = run.repaired(init, ev);
  run.offer(init, s);
  if (run.options.warm_start) {
    DensePlan warm = detail::to_dense(run.cs, *run.options.warm_start);
    Score w = run.repaired(warm, ev);
    run.offer(warm, w);
  }
}

// Annealing and local search share one loop; local search never accepts a
// worse energy and kicks each restart off the incumbent with random moves.
void search(Run& run, const Scenario& scenario, const Strategy& strategy, bool anneal) {
  const auto& cs = run.cs;
  const std::size_t budget = static_cast<std::size_t>(std::max(0.0, resolve(strategy, scenario, "budgetEvaluations")));
  const std::size_t restarts = std::max<std::size_t>(1, seed_of(resolve(strategy, scenario, "restarts")));
  const double penalty = std::max(0.0, resolve(strategy, scenario, "penaltyWeight")) * cs.lot_value;
  Rng rng(seed_of(resolve(strategy, scenario, "seed")));
  const double t0 = anneal ? std::max(0.0, resolve(strategy, scenario, "initialTemperature")) * cs.lot_value : 0.0;
  const double cooling_param = resolve(strategy, scenario, "coolingFactor");

  auto energy = [&](const EvalResult& ev) { return ev.objective(run.ctx.kind) - penalty * ev.infeasibility; };

  EvalResult ev;
  std::size_t used = 0;
  for (std::size_t k = 0; k < restarts && used < budget; ++k) {
    const std::size_t steps = budget / restarts + (k < budget % restarts ? 1 : 0);
    const double cooling = cooling_param > 0.0 ? cooling_param : std::pow(1e-3, 1.0 / std::max<double>(1, steps));
    DensePlan cur = run.best;
    detail::evaluate(cs, cur, run.ctx.dc, ev);
    double cur_energy = energy(ev);
    if (!anneal && k > 0) {
      for (int kick = 0; kick < 3; ++kick) detail::apply_move(run.ctx, cur, rng, MoveKind::Any);
      run.repaired(cur, ev);
      cur_energy = energy(ev);
    }
    double temperature = t0;
    for (std::size_t i = 0; i < steps; ++i) {
      if (run.stop()) return;
      DensePlan cand = cur;
      detail::apply_move(run.ctx, cand, rng, MoveKind::Any);
      const Score s = run.repaired(cand, ev);
      run.count();
      ++used;
      const double e = energy(ev);
      const double delta = e - cur_energy;
      bool accept = delta >= 0.0;
      if (!accept && temperature > 0.0) accept = rng.uniform() < std::exp(delta / temperature);
      run.offer(cand, s);
      if (accept) {
        cur = std::move(cand);
        cur_energy = e;
      }
      temperature *= cooling;
    }
  }
}

// Among archived near-best plans, the one closest to the reference, then
// greedily walked toward it while staying feasible and near-best.
void pick_closest(Run& run) {
  const auto& cs = run.cs;
  EvalResult ev;
  const DensePlan ref = detail::to_dense(cs, *run.options.reference);
  const double floor = run.near_threshold();
  DensePlan chosen = run.best;
  Score chosen_score = run.best_score;
  long long dist = detail::lot_distance(chosen, ref);
  for (const auto& [lots, entry] : run.archive) {
    if (entry.first < floor) continue;
    const long long d = detail::lot_distance(entry.second, ref);
    if (d < dist || (d == dist && entry.first > chosen_score.objective)) {
      chosen = entry.second;
      chosen_score = Score{true, entry.first, 0.0};
      dist = d;
    }
  }

  auto try_plan = [&](DensePlan cand) {
    detail::repair_dense(run.ctx, cand, ev);
    const Score s = detail::score_of(ev, run.ctx.kind);
    if (!s.feasible || s.objective < floor) return false;
    const long long d = detail::lot_distance(cand, ref);
    if (d >= dist) return false;
    chosen = std::move(cand);
    chosen_score = s;
    dist = d;
    return true;
  };
  auto toward = [&](DensePlan& plan, std::size_t c) {
    const int min_lots = cs.logistics.min_lots_per_used_rom;
    int& lots = plan.lots[c];
    if (lots < ref.lots[c]) {
      lots = lots == 0 ? std::max(1, min_lots) : lots + 1;
      const int r = static_cast<int>(c % cs.R), t = static_cast<int>(c / cs.R / cs.P);
      const std::size_t rt = static_cast<std::size_t>(r) * cs.H + t;
      if (cs.washable(r) && !plan.cuts[rt].set) {
        plan.cuts[rt] = ref.cuts[rt].set ? ref.cuts[rt] : run.ctx.cut_choices[r].back();
      }
    } else {
      lots -= 1;
      if (lots < min_lots) lots = 0;
    }
  };
  for (bool improved = true; improved && !run.stop();) {
    improved = false;
    std::vector<std::size_t> diff;
    for (std::size_t c : run.ctx.free_cells) {
      if (chosen.lots[c] != ref.lots[c]) diff.push_back(c);
    }
    for (std::size_t a = 0; a < diff.size() && !improved; ++a) {
      DensePlan cand = chosen;
      toward(cand, diff[a]);
      improved = try_plan(std::move(cand));
    }
    for (std::size_t a = 0; a < diff.size() && !improved; ++a) {
      for (std::size_t b = a + 1; b < diff.size() && !improved; ++b) {
        DensePlan cand = chosen;
        toward(cand, diff[a]);
        toward(cand, diff[b]);
        improved = try_plan(std::move(cand));
      }
    }
  }
  run.best = std::move(chosen);
  run.best_score = chosen_score;
}

OptimizeResult finish(Run& run) {
  if (run.options.reference && run.best_score.feasible) pick_closest(run);
  detail::strip_unused_cuts(run.cs, run.best);
  EvalResult ev;
  detail::evaluate(run.cs, run.best, run.ctx.dc, ev);
  OptimizeResult out;
  out.plan = detail::to_plan(run.cs, run.best);
  out.report = detail::make_report(run.cs, ev);
  out.trace = std::move(run.trace);
  out.feasible = ev.feasible();
  out.objective = ev.objective(run.ctx.kind);
  out.evaluations = run.evaluations;
  out.cancelled = run.cancelled;
  return out;
}

OptimizeResult run_stochastic(const Scenario& scenario, const Strategy& strategy, const OptimizeOptions& options,
                              bool anneal) {
  Run run(scenario, strategy, options);
  seed_start(run);
  run.evaluations = 0;
  for (auto& point : run.trace) point.evaluation = 0;
  search(run, scenario, strategy, anneal);
  return finish(run);
}

OptimizeResult run_heuristic(const Scenario& scenario, const Strategy& strategy, const OptimizeOptions& options,
                             detail::Heuristic heuristic) {
  Run run(scenario, strategy, options);
  if (resolve(strategy, scenario, "budgetEvaluations") == 0.0) {
    seed_start(run);
    return finish(run);
  }
  EvalResult ev;
  DensePlan plan = detail::construct(run.ctx, heuristic, run.evaluations);
  const Score s = run.repaired(plan, ev);
  run.offer(plan, s);
  if (options.warm_start) {
    DensePlan warm = detail::to_dense(run.cs, *options.warm_start);
    const Score w = run.repaired(warm, ev);
    run.offer(warm, w);
  }
  return finish(run);
}

}  // namespace

std::optional<double> resolved_param(const Strategy& strategy, const Scenario& scenario, const std::string& key) {
  const double none = std::numeric_limits<double>::lowest();
  const double v = resolve_or(strategy, scenario, key, none);
  if (v == none) return std::nullopt;
  return v;
}

double strategy_param(const Strategy& strategy, const Scenario& scenario, const std::string& key, double fallback) {
  if (auto it = strategy.parameters.find(key); it != strategy.parameters.end()) return it->second;
  if (auto s = scenario.strategy_overrides.find(strategy.name); s != scenario.strategy_overrides.end()) {
    if (auto it = s->second.find(key); it != s->second.end()) return it->second;
  }
  return fallback;
}

BlendPlan initial_plan(const Scenario& scenario) {
  const auto cs = detail::compile(scenario);
  const SearchContext ctx(cs, nullptr, ObjectiveKind::Npv);
  std::size_t evaluations = 0;
  return detail::to_plan(cs, detail::construct(ctx, detail::Heuristic::ProfitFirst, evaluations));
}

RepairOutcome repair(const Scenario& scenario, const BlendPlan& plan, const ConstraintSet* constraints) {
  const auto cs = detail::compile(scenario);
  std::optional<detail::DenseConstraints> dc;
  if (constraints && !constraints->empty()) dc = detail::compile_constraints(cs, *constraints);
  const SearchContext ctx(cs, dc ? &*dc : nullptr, ObjectiveKind::Npv);
  DensePlan dense = detail::to_dense(cs, plan);
  EvalResult ev;
  const bool complete = detail::repair_dense(ctx, dense, ev);
  return RepairOutcome{detail::to_plan(cs, dense), complete};
}

BlendPlan neighbors(const Scenario& scenario, const BlendPlan& plan, Rng& rng, MoveKind kind) {
  const auto cs = detail::compile(scenario);
  const SearchContext ctx(cs, nullptr, ObjectiveKind::Npv);
  DensePlan dense = detail::to_dense(cs, plan);
  detail::apply_move(ctx, dense, rng, kind);
  EvalResult ev;
  detail::repair_dense(ctx, dense, ev);
  return detail::to_plan(cs, dense);
}

OptimizeResult optimize(const Scenario& scenario, const Strategy& strategy, const ConstraintSet* constraints) {
  OptimizeOptions options;
  options.constraints = constraints;
  return optimize(scenario, strategy, options);
}

OptimizeResult optimize(const Scenario& scenario, const Strategy& strategy, const OptimizeOptions& options) {
  const StrategyImpl* impl = StrategyRegistry::instance().find(strategy.name);
  if (!impl) throw DomainError("unknown strategy " + strategy.name);
  if (auto it = strategy.parameters.find("budgetEvaluations"); it != strategy.parameters.end() && it->second < 0) {
    throw DomainError("budgetEvaluations must be nonnegative");
  }
  return (*impl)(scenario, strategy, options);
}

std::vector<RankingRow> compare_strategies(const Scenario& scenario, const std::vector<Strategy>& strategies) {
  std::vector<RankingRow> rows;
  for (const auto& s : strategies) {
    const OptimizeResult r = optimize(scenario, s);
    rows.push_back(RankingRow{s.name, r.objective, r.feasible});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const RankingRow& a, const RankingRow& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (a.objective != b.objective) return a.objective > b.objective;
    return a.strategy < b.strategy;
  });
  return rows;
}

namespace {
std::mutex g_registry_mutex;
}

StrategyRegistry::StrategyRegistry() {
  using detail::Heuristic;
  auto heuristic = [](Heuristic h) {
    return [h](const Scenario& s, const Strategy& st, const OptimizeOptions& o) { return run_heuristic(s, st, o, h); };
  };
  impls_.emplace(std::string(strategy_names::kGreedyProfitFirst), heuristic(Heuristic::ProfitFirst));
  impls_.emplace(std::string(strategy_names::kAvgValue), heuristic(Heuristic::AvgValue));
  impls_.emplace(std::string(strategy_names::kMaxTonnes), heuristic(Heuristic::MaxTonnes));
  impls_.emplace(std::string(strategy_names::kLocalSearch),
                 [](const Scenario& s, const Strategy& st, const OptimizeOptions& o) {
                   return run_stochastic(s, st, o, false);
                 });
  impls_.emplace(std::string(strategy_names::kAnneal),
                 [](const Scenario& s, const Strategy& st, const OptimizeOptions& o) {
                   return run_stochastic(s, st, o, true);
                 });
}

StrategyRegistry& StrategyRegistry::instance() {
  static StrategyRegistry registry;
  return registry;
}

void StrategyRegistry::add(std::string name, StrategyImpl impl) {
  std::lock_guard lock(g_registry_mutex);
  impls_[std::move(name)] = std::move(impl);
}

const StrategyImpl* StrategyRegistry::find(std::string_view name) const {
  std::lock_guard lock(g_registry_mutex);
  auto it = impls_.find(name);
  return it == impls_.end() ? nullptr : &it->second;
}

std::vector<std::string> StrategyRegistry::names() const {
  std::lock_guard lock(g_registry_mutex);
  std::vector<std::string> out;
  for (const auto& [name, _] : impls_) out.push_back(name);
  return out;
}

}  // namespace blendforge
