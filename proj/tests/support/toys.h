#pragma once

// Small hand-built scenarios shared by the unit and acceptance tests.

#include <cstdint>
#include <string>
#include <vector>

#include "blendforge/random.h"
#include "blendforge/types.h"

namespace toys {

using namespace blendforge;

inline AttributeRegistry ash_registry() { return AttributeRegistry({{"ash", Unit::Percent, true}}); }

inline RomParcel rom(std::string id, double ash, std::vector<double> available) {
  RomParcel r;
  r.id = std::move(id);
  r.pit = "north";
  r.available_tonnes = std::move(available);
  r.quality = {{"ash", ash}};
  return r;
}

inline ProductSpec product(std::string id, double max_ash, std::vector<double> price, std::vector<double> target,
                           TonnageMode mode = TonnageMode::AtMost) {
  ProductSpec p;
  p.id = std::move(id);
  p.range["ash"] = {0.0, max_ash};
  p.base_price = std::move(price);
  p.contract_min_tonnes.assign(p.base_price.size(), 0.0);
  p.tonnage_target = std::move(target);
  p.tonnage_mode = mode;
  return p;
}

inline Scenario single_period(std::vector<RomParcel> roms, std::vector<ProductSpec> products) {
  Scenario s;
  s.horizon_periods = 1;
  s.days_per_period = 30;
  s.registry = ash_registry();
  s.roms = std::move(roms);
  s.products = std::move(products);
  return s;
}

// Sweetener A (ash 6%) and poor B (ash 14%). Product "low" tolerates 12.4% ash
// (at least 20% A); "prime" tolerates 10.4% ash (at least 45% A). Four lots of
// A, plenty of B, ten-lot targets.
inline Scenario sweetener(double low_price, double prime_price, double a_lots = 4) {
  return single_period({rom("A", 6.0, {a_lots * 1000}), rom("B", 14.0, {40000})},
                       {product("low", 12.4, {low_price}, {10000}), product("prime", 10.4, {prime_price}, {10000})});
}

// Greedy-profit-first wins: prime is far dearer and pays a bonus for ash below
// 10%, so filling it first (and fully) is right.
inline Scenario nfl_a() {
  Scenario s = sweetener(100, 300);
  for (auto& p : s.products) {
    if (p.id == "prime") p.adjustments["ash"] = {10.0, 5.0, 0.0};
  }
  return s;
}

// Greedy-profit-first loses: the spread is compressed and the sweetener
// scarce, so the 20% product should get it.
inline Scenario nfl_b() { return sweetener(100, 105); }

// Washable ROM: aggressive cuts remove ash (bonus) but cost yield; the plant
// has a fixed cost, so running flat out is not the most valuable plan.
inline Scenario utilization() {
  RomParcel w = rom("W", 16.0, {20000});
  w.curve = AshYieldCurve{{{1.40, 8.0, 0.55}, {1.60, 11.0, 0.75}, {1.80, 14.0, 0.90}}, true};
  RomParcel c = rom("C", 9.0, {6000});
  ProductSpec p = product("thermal", 13.0, {100}, {12000});
  p.adjustments["ash"] = {12.0, 3.0, -6.0};
  Scenario s = single_period({c, w}, {p});
  s.cut_point_grid = {1.40, 1.50, 1.60, 1.70, 1.80};
  s.logistics.wash_fixed_cost_per_period = 150000;
  s.logistics.wash_variable_cost_per_tonne = 4;
  s.logistics.wash_capacity_tonnes = std::vector<double>{12000};
  return s;
}

// Worked example: five ROM types, two products, 100 kt targets in
// 1000 t allotments, tonnages exact.
inline Scenario five_rom_example() {
  std::vector<RomParcel> roms;
  const double ash[] = {7.5, 9.0, 11.0, 13.5, 16.0};
  for (int i = 0; i < 5; ++i) roms.push_back(rom(std::string("R") + char('1' + i), ash[i], {200000}));
  return single_period(std::move(roms), {product("P1", 12.0, {110}, {100000}, TonnageMode::Exact),
                                         product("P2", 14.0, {95}, {100000}, TonnageMode::Exact)});
}

// Random scenario small enough to enumerate: 1-2 periods, 2-3 products, 2-3
// ROMs, a few lots per blend, optional wash plant on a coarse grid.
inline Scenario random_small(std::uint64_t seed) {
  Rng rng(seed);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  Scenario s;
  s.horizon_periods = 1 + static_cast<int>(rng.below(2));
  s.days_per_period = 30;
  s.registry = AttributeRegistry({{"ash", Unit::Percent, true}, {"sulfur", Unit::Percent, true}});
  s.market.discount_rate_per_period = 0.02;
  const int R = 2 + static_cast<int>(rng.below(2));
  const int P = s.horizon_periods == 2 ? 2 : 2 + static_cast<int>(rng.below(2));
  const int H = s.horizon_periods;
  for (int r = 0; r < R; ++r) {
    RomParcel rp = rom(std::string("R") + char('A' + r), between(6, 16), {});
    rp.quality["sulfur"] = between(0.3, 1.2);
    for (int t = 0; t < H; ++t) rp.available_tonnes.push_back(1000.0 * static_cast<double>(1 + rng.below(4)));
    rp.haul_hours_per_tonne = between(0.001, 0.004);
    rp.staging_haul_hours_per_tonne = rp.haul_hours_per_tonne;
    s.roms.push_back(rp);
  }
  if (H == 1 && rng.chance(0.5)) {
    s.roms[0].curve = AshYieldCurve{{{1.4, s.roms[0].quality["ash"] * 0.6, 0.6},
                                     {1.8, s.roms[0].quality["ash"] * 0.9, 0.9}},
                                    true};
    s.cut_point_grid = {1.4, 1.6, 1.8};
    s.logistics.wash_variable_cost_per_tonne = between(1, 4);
    s.logistics.wash_fixed_cost_per_period = between(0, 3000);
  }
  const int lots = H == 2 ? 2 + static_cast<int>(rng.below(2)) : 3 + static_cast<int>(rng.below(2));
  for (int p = 0; p < P; ++p) {
    ProductSpec ps = product(std::string("P") + char('1' + p), between(9, 14), {}, {});
    ps.range["sulfur"] = {0.0, between(0.7, 1.1)};
    for (int t = 0; t < H; ++t) {
      ps.base_price.push_back(between(60, 140));
      ps.contract_min_tonnes.push_back(0.0);
      ps.tonnage_target.push_back(1000.0 * lots);
    }
    ps.adjustments["ash"] = {ps.range["ash"].max - 1.0, between(0, 3), -between(0, 6)};
    s.products.push_back(ps);
  }
  s.logistics.haul_cost_per_hour = between(50, 200);
  return s;
}

// Random structurally valid plan: up to the target lots per blend, grid or
// knot cut-points for washable ROMs that are used. May violate anything else.
inline BlendPlan random_plan(const Scenario& s, Rng& rng) {
  BlendPlan plan;
  const double lot = s.logistics.lot_size_tonnes;
  for (int t = 0; t < s.horizon_periods; ++t) {
    for (const auto& p : s.products) {
      int left = static_cast<int>(p.tonnage_target[t] / lot + 1e-9);
      for (const auto& r : s.roms) {
        if (left <= 0) break;
        if (!rng.chance(0.6)) continue;
        const int lots = static_cast<int>(rng.below(static_cast<std::uint64_t>(left) + 1));
        if (lots == 0) continue;
        plan.set_lots(t, p.id, r.id, lots);
        left -= lots;
      }
    }
    for (const auto& r : s.roms) {
      if (!r.curve) continue;
      bool used = false;
      for (const auto& p : s.products) used = used || plan.lots(t, p.id, r.id) > 0;
      if (!used) continue;
      std::vector<CutPoint> options;
      for (double d : s.cut_point_grid) {
        if (d >= r.curve->min_density() && d <= r.curve->max_density()) options.push_back(CutPoint::at(d));
      }
      if (options.empty()) {
        for (const auto& k : r.curve->knots) options.push_back(CutPoint::at(k.density_gcc));
      }
      if (r.curve->bypass_allowed) options.push_back(CutPoint::bypass());
      plan.cut_points[{r.id, t}] = options[rng.below(options.size())];
    }
  }
  return plan;
}

}  // namespace toys
