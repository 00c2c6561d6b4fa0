#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "blendforge/constraints.h"
#include "blendforge/evaluate.h"
#include "blendforge/types.h"

namespace blendforge {

using BigInt = boost::multiprecision::cpp_int;

// Number of nonnegative integer k-tuples summing to n, i.e. C(n+k-1, k-1).
// Throws DomainError for k < 1 or n < 0.
BigInt count_compositions(long long n, long long k);

struct SpaceSummary {
  struct Blend {
    std::string label;
    long long allotments{0};
    std::vector<std::string> roms;
    // An extra "unused" slot: the blend may use fewer than `allotments` lots.
    bool slack{false};
  };
  std::vector<Blend> blends;
  // Shared lot budgets per ROM across every blend.
  std::map<std::string, long long> caps;
};

BigInt count_blend_space(const SpaceSummary& summary);

// One blend per (product, period): target lots over every ROM, with a slack
// slot for AtMost products.
SpaceSummary summarize(const Scenario& scenario);

// Cut-point settings the enumerator visits: for every washable (ROM, period),
// the grid points inside the knot range plus bypass when allowed. An empty
// grid falls back to the scenario grid, then to the knot densities.
BigInt cut_point_combinations(const Scenario& scenario, const std::vector<double>& grid);

// Streams every structurally valid plan exactly once in a deterministic order:
// blends vary in (period, product) order, compositions in lexicographic order,
// cut-point settings fastest. Throws SpaceTooLargeError when
// count_blend_space * cut_point_combinations exceeds `limit`.
class PlanEnumerator {
 public:
  PlanEnumerator(const Scenario& scenario, const std::vector<double>& grid, std::uint64_t limit);
  PlanEnumerator(PlanEnumerator&&) noexcept;
  PlanEnumerator& operator=(PlanEnumerator&&) noexcept;
  ~PlanEnumerator();

  const BigInt& size() const;
  std::optional<BlendPlan> next();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

PlanEnumerator enumerate_plans(const Scenario& scenario, const std::vector<double>& grid, std::uint64_t limit);

// Light view of one enumerated plan during a scan.
class EnumeratedPlanView {
 public:
  virtual ~EnumeratedPlanView() = default;
  virtual double objective() const = 0;
  virtual bool feasible() const = 0;
  virtual int lots(int period, const std::string& product, const std::string& rom) const = 0;
  virtual BlendPlan plan() const = 0;
};

// Evaluates every enumerated plan (with optional extra constraints) and hands
// each to `visit`. Returns the number of plans visited.
std::uint64_t scan_plans(const Scenario& scenario, const std::vector<double>& grid, std::uint64_t limit,
                         ObjectiveKind kind, const ConstraintSet* constraints,
                         const std::function<void(const EnumeratedPlanView&)>& visit);

struct EnumeratedOptimum {
  BlendPlan plan;
  double objective{0.0};
  std::uint64_t plans{0};
  std::uint64_t feasible_plans{0};
  // Number of feasible plans attaining the optimum within 1e-9 relative.
  std::uint64_t optimal_plans{0};
};

// Best feasible plan by objective; ties keep the first in enumeration order.
// nullopt when no enumerated plan is feasible.
std::optional<EnumeratedOptimum> enumerated_optimum(const Scenario& scenario, const std::vector<double>& grid,
                                                    std::uint64_t limit, ObjectiveKind kind,
                                                    const ConstraintSet* constraints = nullptr);

}  // namespace blendforge
