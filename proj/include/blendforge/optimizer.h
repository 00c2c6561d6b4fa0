#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blendforge/constraints.h"
#include "blendforge/evaluate.h"
#include "blendforge/random.h"
#include "blendforge/types.h"

namespace blendforge {

namespace strategy_names {
inline constexpr std::string_view kGreedyProfitFirst = "greedy-profit-first";
inline constexpr std::string_view kAvgValue = "avg-value";
inline constexpr std::string_view kMaxTonnes = "max-tonnes";
inline constexpr std::string_view kLocalSearch = "local-search";
inline constexpr std::string_view kAnneal = "anneal";
}  // namespace strategy_names

// Recognized parameters: seed, budgetEvaluations, restarts, initialTemperature
// (fraction of the most valuable lot's revenue), coolingFactor (per evaluation;
// derived from the budget when absent), penaltyWeight.
struct Strategy {
  std::string name;
  std::map<std::string, double> parameters;
  ObjectiveKind objective{ObjectiveKind::Npv};

  bool operator==(const Strategy&) const = default;
};

// Strategy parameter with precedence: explicit > scenario override > fallback.
double strategy_param(const Strategy& strategy, const Scenario& scenario, const std::string& key, double fallback);
// The value a built-in strategy runs with: explicit, scenario override, then
// built-in default. nullopt when none applies.
std::optional<double> resolved_param(const Strategy& strategy, const Scenario& scenario, const std::string& key);

struct TracePoint {
  std::size_t evaluation{0};
  double objective{0.0};

  bool operator==(const TracePoint&) const = default;
};

struct OptimizeResult {
  BlendPlan plan;
  EvaluationReport report;
  // Incumbent improvements; objectives never decrease along the trace.
  std::vector<TracePoint> trace;
  bool feasible{false};
  double objective{0.0};
  std::size_t evaluations{0};
  bool cancelled{false};

  bool operator==(const OptimizeResult&) const = default;
};

class CancellationToken {
 public:
  CancellationToken() : flag_(std::make_shared<std::atomic<bool>>(false)) {}
  void request() const { flag_->store(true); }
  bool requested() const { return flag_->load(std::memory_order_relaxed); }

 private:
  std::shared_ptr<std::atomic<bool>> flag_;
};

struct OptimizeOptions {
  const ConstraintSet* constraints{nullptr};
  // Additional starting candidate; search begins from the better of this and
  // the repaired initial plan.
  std::optional<BlendPlan> warm_start;
  // When set, the returned plan is the one closest (lot-assignment L1
  // distance) to this plan among plans within `near_optimal_tolerance`
  // relative objective of the best found.
  std::optional<BlendPlan> reference;
  double near_optimal_tolerance{0.0};
  CancellationToken cancel;
  std::atomic<std::size_t>* progress{nullptr};
};

// Satisficing constructor: fills contract tonnes first, then spare lots by
// descending base price, adding a lot only while its blend stays in spec and
// logistics stay feasible.
BlendPlan initial_plan(const Scenario& scenario);

struct RepairOutcome {
  BlendPlan plan;
  // False when structural or logistics violations remain (pins can hold a
  // plan infeasible).
  bool complete{true};
};

// Drops lowest-value lots and prunes ROM types until no structural or
// logistics violation remains. Never adds lots; idempotent.
RepairOutcome repair(const Scenario& scenario, const BlendPlan& plan, const ConstraintSet* constraints = nullptr);

enum class MoveKind { Any, AddLot, DropLot, MoveLot, SwapLots, AdjustCutPoint, ToggleRehandle };

// One random move followed by repair.
BlendPlan neighbors(const Scenario& scenario, const BlendPlan& plan, Rng& rng, MoveKind kind = MoveKind::Any);

// Throws DomainError for an unknown strategy name.
OptimizeResult optimize(const Scenario& scenario, const Strategy& strategy,
                        const ConstraintSet* constraints = nullptr);
OptimizeResult optimize(const Scenario& scenario, const Strategy& strategy, const OptimizeOptions& options);

struct RankingRow {
  std::string strategy;
  double objective{0.0};
  bool feasible{false};

  bool operator==(const RankingRow&) const = default;
};

// Runs every strategy independently; feasible results rank above infeasible
// ones, then objective descending, then strategy name.
std::vector<RankingRow> compare_strategies(const Scenario& scenario, const std::vector<Strategy>& strategies);

using StrategyImpl = std::function<OptimizeResult(const Scenario&, const Strategy&, const OptimizeOptions&)>;

// Name -> implementation. The five built-in strategies are always present;
// further strategies can be registered at runtime.
class StrategyRegistry {
 public:
  static StrategyRegistry& instance();
  void add(std::string name, StrategyImpl impl);
  const StrategyImpl* find(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  StrategyRegistry();
  std::map<std::string, StrategyImpl, std::less<>> impls_;
};

}  // namespace blendforge
