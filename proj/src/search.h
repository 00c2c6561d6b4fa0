#pragma once

// Dense-plan search primitives shared by the optimizer strategies and the
// guided layer.

#include <cstddef>
#include <vector>

#include "blendforge/optimizer.h"
#include "blendforge/random.h"
#include "engine.h"

namespace blendforge::detail {

struct SearchContext {
  const CompiledScenario& cs;
  const DenseConstraints* dc{nullptr};
  ObjectiveKind kind{ObjectiveKind::Npv};
  // Cells the search may change: not pinned, not excluded.
  std::vector<std::size_t> free_cells;
  std::vector<char> is_free;
  // Per ROM: cut settings in ascending yield order (densities, then bypass).
  std::vector<std::vector<DenseCut>> cut_choices;
  std::vector<int> washable_roms;
  std::vector<int> rehandle_roms;
  std::vector<MoveKind> moves;

  SearchContext(const CompiledScenario& compiled, const DenseConstraints* constraints, ObjectiveKind objective);
};

struct Score {
  bool feasible{false};
  double objective{0.0};
  double infeasibility{0.0};
};

inline Score score_of(const EvalResult& ev, ObjectiveKind kind) {
  return Score{ev.feasible(), ev.objective(kind), ev.infeasibility};
}

// Feasible beats infeasible; then higher objective; infeasible plans compare
// by lower infeasibility first.
inline bool better(const Score& a, const Score& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) return a.objective > b.objective;
  if (a.infeasibility != b.infeasibility) return a.infeasibility < b.infeasibility;
  return a.objective > b.objective;
}

// Pins and exclusions forced, cut-points filled in for used washable ROMs.
void normalize(const SearchContext& ctx, DensePlan& plan);

// Drop-based repair in place. On return `ev` holds the evaluation of the
// repaired plan. Returns false when repairable violations remain.
bool repair_dense(const SearchContext& ctx, DensePlan& plan, EvalResult& ev);

// Discounted net value of one lot of cell (t, p, r) in the evaluated plan.
double lot_worth(const SearchContext& ctx, const EvalResult& ev, int t, int p, int r);

void apply_move(const SearchContext& ctx, DensePlan& plan, Rng& rng, MoveKind kind);

enum class Heuristic { ProfitFirst, AvgValue, MaxTonnes };

// Deterministic constructive heuristic; counts evaluations into `evaluations`.
DensePlan construct(const SearchContext& ctx, Heuristic heuristic, std::size_t& evaluations);

// Removes cut-points of ROM-periods that receive no feed.
void strip_unused_cuts(const CompiledScenario& cs, DensePlan& plan);

long long lot_distance(const DensePlan& a, const DensePlan& b);

}  // namespace blendforge::detail
