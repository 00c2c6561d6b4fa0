#include "blendforge/blend_math.h"

#include <algorithm>
#include <cmath>

#include "blendforge/errors.h"

namespace blendforge {

QualityVector blend_quality(std::span<const Parcel> parcels) {
  double total = 0.0;
  for (const auto& p : parcels) {
    if (p.tonnes < 0.0) throw DomainError("negative parcel tonnage");
    total += p.tonnes;
  }
  if (parcels.empty() || total <= 0.0) throw EmptyBlendError();

  const QualityVector& first = parcels.front().quality;
  QualityVector out;
  for (const auto& [code, _] : first) {
    double weighted = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : parcels) {
      if (p.quality.size() != first.size()) throw DomainError("parcels carry different attribute sets");
      auto it = p.quality.find(code);
      if (it == p.quality.end()) throw DomainError("parcel lacks attribute " + code);
      weighted += p.tonnes * it->second;
      lo = std::min(lo, it->second);
      hi = std::max(hi, it->second);
    }
    // The mean lies in [lo, hi]; the clamp only absorbs rounding.
    out[code] = std::clamp(weighted / total, lo, hi);
  }
  return out;
}

WashResult wash_parcel(const RomParcel& rom, double feed_tonnes, const CutPoint& cut_point) {
  if (cut_point.is_bypass()) {
    if (rom.curve && !rom.curve->bypass_allowed) throw DomainError("ROM " + rom.id + " may not bypass the plant");
    return {feed_tonnes, rom.quality};
  }
  if (!rom.curve) throw DomainError("ROM " + rom.id + " has no ash-yield curve to wash with");
  const auto point = rom.curve->at(*cut_point.density_gcc);
  WashResult out{feed_tonnes * point.yield, rom.quality};
  out.quality[std::string(kAshCode)] = point.product_ash_pct;
  return out;
}

QualityVector degrade_quality(const QualityVector& quality, int age_days, const DegradationModel& model,
                              const AttributeRegistry& registry) {
  if (age_days < 0) throw DomainError("negative age");
  QualityVector out = quality;
  for (auto& [code, value] : out) {
    auto rate = model.rate_per_day.find(code);
    if (rate == model.rate_per_day.end() || rate->second == 0.0 || age_days == 0) continue;
    double change = rate->second * age_days;
    if (auto cap = model.cap.find(code); cap != model.cap.end()) {
      change = std::clamp(change, -cap->second, cap->second);
    }
    value += change;
    if (const auto* def = registry.find(code); def && def->unit == Unit::Percent) {
      value = std::clamp(value, 0.0, 100.0);
    }
  }
  return out;
}

std::vector<QualityViolation> check_spec(const QualityVector& quality, double /*tonnes*/, const ProductSpec& spec) {
  std::vector<QualityViolation> out;
  for (const auto& [code, range] : spec.range) {
    auto it = quality.find(code);
    if (it == quality.end()) throw DomainError("blend lacks ranged attribute " + code);
    const double v = it->second;
    if (v > range.max + kQualityTolerance) {
      out.push_back({code, v - range.max});
    } else if (v < range.min - kQualityTolerance) {
      out.push_back({code, v - range.min});
    }
  }
  return out;
}

PriceResult price_blend(const QualityVector& quality, double tonnes, const ProductSpec& spec, int period) {
  if (!check_spec(quality, tonnes, spec).empty()) {
    throw ContractViolationError("product " + spec.id + " is off-spec and cannot be priced");
  }
  if (period < 0 || static_cast<std::size_t>(period) >= spec.base_price.size()) {
    throw DomainError("period outside the product's price horizon");
  }
  PriceResult out;
  out.gross_revenue = spec.base_price[period] * tonnes;
  double per_tonne = 0.0;
  for (const auto& [code, term] : spec.adjustments) {
    auto it = quality.find(code);
    if (it == quality.end()) throw DomainError("blend lacks adjusted attribute " + code);
    const double dev = it->second - term.target;
    if (dev > 0.0) {
      per_tonne += term.rate_above * dev;
    } else if (dev < 0.0) {
      per_tonne += term.rate_below * -dev;
    }
  }
  out.adjustment_revenue = tonnes * per_tonne;
  return out;
}

double npv(std::span<const double> net_cashflow_per_period, double discount_rate_per_period) {
  if (discount_rate_per_period < 0.0) throw DomainError("negative discount rate");
  double total = 0.0;
  double factor = 1.0;
  for (double cf : net_cashflow_per_period) {
    total += cf / factor;
    factor *= 1.0 + discount_rate_per_period;
  }
  return total;
}

}  // namespace blendforge
