#pragma once

// Index-addressed scenario and plan forms shared by evaluation, enumeration,
// and search. Products and ROMs are sorted by id, so index order is the
// lexicographic tie-break order.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blendforge/constraints.h"
#include "blendforge/evaluate.h"
#include "blendforge/types.h"

namespace blendforge::detail {

inline constexpr double kTonnesTolerance = 1e-6;

struct CompiledRom {
  std::string id;
  // Quality at each period's midpoint age, indexed t * A + a.
  std::vector<double> degraded;
  std::optional<AshYieldCurve> curve;
  // Candidate cut-point densities in ascending order: grid points inside the
  // knot range, or the knot densities when the scenario has no grid.
  std::vector<double> cut_options;
  std::vector<double> available;
  double haul{0.0};
  double staging{0.0};
};

struct CompiledProduct {
  struct Adjustment {
    int attr;
    double target;
    double below;
    double above;
  };
  std::string id;
  std::vector<double> min;
  std::vector<double> max;
  std::vector<Adjustment> adjustments;
  std::vector<double> price;
  std::vector<double> contract;
  std::vector<double> target;
  std::vector<int> target_lots;
  TonnageMode mode{TonnageMode::AtMost};
};

struct CompiledScenario {
  int H{0};
  int P{0};
  int R{0};
  int A{0};
  int ash_attr{-1};
  std::vector<std::string> attr_codes;
  std::vector<CompiledRom> roms;
  std::vector<CompiledProduct> products;
  LogisticsConstraints logistics;
  double discount_rate{0.0};
  std::vector<double> discount_factor;
  std::vector<double> haul_cap;  // empty: unconstrained
  std::vector<double> wash_cap;  // empty: unconstrained
  std::vector<double> grid;
  bool rehandle_useful{false};
  std::map<std::string, int, std::less<>> rom_index;
  std::map<std::string, int, std::less<>> product_index;
  // Revenue of the most valuable single lot; the money scale of the search.
  double lot_value{1.0};

  std::size_t cell(int t, int p, int r) const {
    return (static_cast<std::size_t>(t) * P + p) * R + r;
  }
  std::size_t cells() const { return static_cast<std::size_t>(H) * P * R; }
  int rom(std::string_view id) const;
  int product(std::string_view id) const;
  bool washable(int r) const { return roms[r].curve.has_value(); }
};

CompiledScenario compile(const Scenario& scenario);

struct DenseCut {
  bool set{false};
  bool bypass{true};
  double density{0.0};
  bool operator==(const DenseCut&) const = default;
};

struct DensePlan {
  std::vector<int> lots;          // cell(t, p, r)
  std::vector<DenseCut> cuts;     // r * H + t
  std::vector<double> rehandle;   // t * R + r
  bool operator==(const DensePlan&) const = default;
};

DensePlan empty_dense(const CompiledScenario& cs);
// Throws StructuralError for dangling ids, out-of-horizon periods, negative
// lots, or a washable ROM used without a cut-point; DomainError for invalid
// cut-points.
DensePlan to_dense(const CompiledScenario& cs, const BlendPlan& plan);
BlendPlan to_plan(const CompiledScenario& cs, const DensePlan& plan);

struct DenseConstraints {
  struct QualityBound {
    int p, t, a;
    double bound;
    bool upper;
  };
  struct TonnageBound {
    int p, t;
    double bound;
    bool lower;
  };
  std::vector<int> pin;         // cell -> pinned lots or -1
  std::vector<char> excluded;   // cell
  std::vector<double> reserve;  // r * H + t: stock that must remain at end of t
  std::vector<QualityBound> quality;
  std::vector<TonnageBound> tonnage;
  bool has_pins{false};
};

DenseConstraints compile_constraints(const CompiledScenario& cs, const ConstraintSet& set);

enum class VCode : std::uint8_t {
  Quality,
  ContractMin,
  TonnageTarget,
  Cardinality,
  MinLots,
  Availability,
  RehandleAvailability,
  HaulCapacity,
  WashCapacity,
  Pin,
  Exclude,
  Reserve,
  QualityBound,
  TonnageBound,
};

std::string_view code_name(VCode code);

struct VRec {
  VCode code;
  int period{0};
  int product{-1};
  int rom{-1};
  int attr{-1};
  double magnitude{0.0};
  // Normalized contribution to the infeasibility measure.
  double weight{0.0};
  // Only adding lots can clear it (contract gaps, empty directive blends,
  // exact-tonnage shortfalls, pins below their lots).
  bool fill{false};
};

struct EvalResult {
  std::vector<int> pp_lots;          // t * P + p
  std::vector<int> pp_roms;
  std::vector<double> pp_feed;
  std::vector<double> pp_tonnes;
  std::vector<double> pp_gross;
  std::vector<double> pp_adj;
  std::vector<char> pp_in_spec;
  std::vector<double> pp_quality;    // (t * P + p) * A + a
  std::vector<double> yield;         // r * H + t
  std::vector<char> washed;          // r * H + t
  std::vector<double> haul_hours;    // t
  std::vector<double> haul_cost;
  std::vector<double> wash_feed;
  std::vector<double> wash_cost;
  std::vector<double> rehandle_moved;
  std::vector<double> rehandle_arrived;
  std::vector<double> rehandle_cost;
  std::vector<double> revenue;
  std::vector<double> net;
  std::vector<VRec> violations;
  double total_revenue{0.0};
  double npv{0.0};
  double sold_tonnes{0.0};
  double infeasibility{0.0};
  // Infeasibility from violations that are not fill violations.
  double hard_infeasibility{0.0};

  bool feasible() const { return violations.empty(); }
  double objective(ObjectiveKind kind) const { return kind == ObjectiveKind::Npv ? npv : total_revenue; }
};

void evaluate(const CompiledScenario& cs, const DensePlan& plan, const DenseConstraints* dc, EvalResult& out);

EvaluationReport make_report(const CompiledScenario& cs, const EvalResult& result);

// Yield and product ash for the cut-point of (r, t). Ash is NaN when the feed
// is not washed.
void wash_at(const CompiledScenario& cs, const DensePlan& plan, int r, int t, double& yield, double& ash);

}  // namespace blendforge::detail
