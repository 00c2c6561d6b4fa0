#pragma once

#include <span>
#include <vector>

#include "blendforge/types.h"

namespace blendforge {

// Closed-interval tolerance for range and bound checks.
inline constexpr double kQualityTolerance = 1e-9;

struct Parcel {
  double tonnes{0.0};
  QualityVector quality;
};

// Mass-weighted mean per attribute. Every parcel must carry the same
// attribute set. Throws EmptyBlendError when total tonnes is zero.
QualityVector blend_quality(std::span<const Parcel> parcels);

struct WashResult {
  double tonnes{0.0};
  QualityVector quality;
};

// Washes feed tonnes of a ROM at a cut-point. Ash and tonnage change; all
// other attributes pass through. Bypass returns the feed unchanged.
WashResult wash_parcel(const RomParcel& rom, double feed_tonnes, const CutPoint& cut_point);

// Applies clamp(rate * age, -cap, +cap) per attribute, then clamps percent
// attributes to [0, 100].
QualityVector degrade_quality(const QualityVector& quality, int age_days, const DegradationModel& model,
                              const AttributeRegistry& registry);

struct QualityViolation {
  std::string attribute;
  // value - max when above, value - min when below.
  double magnitude{0.0};

  bool operator==(const QualityViolation&) const = default;
};

std::vector<QualityViolation> check_spec(const QualityVector& quality, double tonnes, const ProductSpec& spec);

struct PriceResult {
  double gross_revenue{0.0};
  double adjustment_revenue{0.0};
};

// Throws ContractViolationError when the blend is off-spec.
PriceResult price_blend(const QualityVector& quality, double tonnes, const ProductSpec& spec, int period);

// Period 0 is undiscounted.
double npv(std::span<const double> net_cashflow_per_period, double discount_rate_per_period);

}  // namespace blendforge
