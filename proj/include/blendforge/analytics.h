#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blendforge/optimizer.h"
#include "blendforge/types.h"

namespace blendforge {

struct RomContribution {
  std::string rom;
  double tonnes{0.0};
  // Washed tonnes of this ROM over blend tonnes; shares sum to 1.
  double share{0.0};
  // share * the ROM's (degraded, washed) attribute value.
  QualityVector contribution;

  bool operator==(const RomContribution&) const = default;
};

struct ContributionBreakdown {
  std::string product;
  int period{0};
  QualityVector blended;
  std::vector<RomContribution> roms;  // empty for an empty blend

  bool operator==(const ContributionBreakdown&) const = default;
};

ContributionBreakdown quality_contribution(const Scenario& scenario, const BlendPlan& plan, const std::string& product,
                                           int period);

struct ConstraintSlack {
  // haul-hours, wash-tonnes, availability, or contract-min.
  std::string constraint;
  int period{0};
  // ROM for availability, product for contracts, empty otherwise.
  std::string subject;
  double limit{0.0};
  double usage{0.0};
  // limit - usage for capacities and stock; sold - contract for contracts.
  // Below -kSlackTolerance exactly when evaluate_plan reports a violation.
  double slack{0.0};

  bool operator==(const ConstraintSlack&) const = default;
};

inline constexpr double kSlackTolerance = 1e-6;

std::vector<ConstraintSlack> constraint_slack(const Scenario& scenario, const BlendPlan& plan);

// (re-optimized objective with `delta_tonnes` more of the ROM available in the
// first period - re-optimized objective with unchanged availability) /
// delta_tonnes, both runs with the same strategy and seed. Throws DomainError
// for an unknown ROM or a nonpositive delta.
double marginal_rom_value(const Scenario& scenario, const std::string& rom, double delta_tonnes,
                          const Strategy& strategy);

struct PriceSensitivity {
  double incumbent_objective{0.0};
  // The incumbent re-evaluated with the product's base price shifted.
  double shifted_objective{0.0};
  // Re-optimized objective at the shifted price.
  double reoptimized_objective{0.0};
  // Whether re-optimizing at the shifted price picks a different plan than
  // re-optimizing at the unshifted price (same seed).
  bool plan_changed{false};
  BlendPlan reoptimized_plan;
};

PriceSensitivity price_sensitivity(const Scenario& scenario, const BlendPlan& plan, const std::string& product,
                                   double price_delta, const Strategy& strategy);

struct Deadline {
  enum class Kind { Always, Never, Period };
  std::string product;
  Kind kind{Kind::Always};
  // Last period whose degraded quality still keeps the blend in spec, when
  // kind is Period.
  int last_safe_period{0};

  bool operator==(const Deadline&) const = default;
};

// For every product whose incumbent blend uses the ROM: the blend's lot
// proportions and cut-points (from its first period using the ROM) are
// re-evaluated against each period's degraded qualities.
std::vector<Deadline> degradation_deadline(const Scenario& scenario, const BlendPlan& plan, const std::string& rom);

struct AnalyticsReport {
  std::vector<ContributionBreakdown> contributions;
  std::vector<ConstraintSlack> slacks;
  std::map<std::string, double> marginals;
  std::map<std::string, std::vector<Deadline>> deadlines;

  bool operator==(const AnalyticsReport&) const = default;
};

struct AnalyticsOptions {
  // Tonnage step for marginal values; absent: one lot.
  std::optional<double> marginal_delta_tonnes;
  bool include_marginals{true};
};

AnalyticsReport analyze(const Scenario& scenario, const BlendPlan& plan, const Strategy& strategy,
                        const AnalyticsOptions& options = {});

}  // namespace blendforge
