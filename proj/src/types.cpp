#include "blendforge/types.h"

#include <algorithm>
#include <set>

#include "blendforge/errors.h"

namespace blendforge {

AttributeRegistry::AttributeRegistry(std::vector<AttributeDef> entries) : entries_(std::move(entries)) {
  std::set<std::string_view> seen;
  for (const auto& e : entries_) {
    if (e.code.empty()) throw DomainError("attribute code must be nonempty");
    if (!seen.insert(e.code).second) throw DomainError("duplicate attribute code: " + e.code);
  }
}

std::optional<std::size_t> AttributeRegistry::index_of(std::string_view code) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].code == code) return i;
  }
  return std::nullopt;
}

const AttributeDef* AttributeRegistry::find(std::string_view code) const {
  auto idx = index_of(code);
  return idx ? &entries_[*idx] : nullptr;
}

AshYieldCurve::Point AshYieldCurve::at(double density_gcc) const {
  if (knots.size() < 2) throw DomainError("ash-yield curve needs at least two knots");
  if (!(density_gcc >= min_density() && density_gcc <= max_density())) {
    throw DomainError("cut-point " + std::to_string(density_gcc) + " outside knot range [" +
                      std::to_string(min_density()) + ", " + std::to_string(max_density()) + "]");
  }
  auto hi = std::upper_bound(knots.begin(), knots.end(), density_gcc,
                             [](double d, const WashKnot& k) { return d < k.density_gcc; });
  if (hi == knots.end()) return {knots.back().product_ash_pct, knots.back().yield};
  auto lo = std::prev(hi);
  if (lo->density_gcc == density_gcc) return {lo->product_ash_pct, lo->yield};
  const double f = (density_gcc - lo->density_gcc) / (hi->density_gcc - lo->density_gcc);
  return {lo->product_ash_pct + f * (hi->product_ash_pct - lo->product_ash_pct),
          lo->yield + f * (hi->yield - lo->yield)};
}

const RomParcel* Scenario::find_rom(std::string_view id) const {
  for (const auto& r : roms) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

const ProductSpec* Scenario::find_product(std::string_view id) const {
  for (const auto& p : products) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

int BlendPlan::lots(int period, std::string_view product, std::string_view rom) const {
  auto it = allotments.find(AllotmentKey{period, std::string(product), std::string(rom)});
  return it == allotments.end() ? 0 : it->second;
}

void BlendPlan::set_lots(int period, std::string product, std::string rom, int lots) {
  AllotmentKey key{period, std::move(product), std::move(rom)};
  if (lots == 0) {
    allotments.erase(key);
  } else {
    allotments[std::move(key)] = lots;
  }
}

int BlendPlan::total_lots() const {
  int total = 0;
  for (const auto& [_, lots] : allotments) total += lots;
  return total;
}

const ProductPeriodResult* EvaluationReport::find(std::string_view product, int period) const {
  for (const auto& row : product_periods) {
    if (row.product == product && row.period == period) return &row;
  }
  return nullptr;
}

std::vector<double> EvaluationReport::net_cashflows() const {
  std::vector<double> out;
  out.reserve(periods.size());
  for (const auto& p : periods) out.push_back(p.net_cashflow);
  return out;
}

}  // namespace blendforge
