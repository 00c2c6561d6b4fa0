#include "engine.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blendforge/blend_math.h"
#include "blendforge/errors.h"

namespace blendforge::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> per_period(const std::vector<double>& v, int horizon, const std::string& what) {
  if (static_cast<int>(v.size()) != horizon) {
    throw DomainError(what + " has " + std::to_string(v.size()) + " periods, horizon is " + std::to_string(horizon));
  }
  return v;
}

}  // namespace

int CompiledScenario::rom(std::string_view id) const {
  auto it = rom_index.find(id);
  return it == rom_index.end() ? -1 : it->second;
}

int CompiledScenario::product(std::string_view id) const {
  auto it = product_index.find(id);
  return it == product_index.end() ? -1 : it->second;
}

CompiledScenario compile(const Scenario& scenario) {
  CompiledScenario cs;
  cs.H = scenario.horizon_periods;
  cs.A = static_cast<int>(scenario.registry.size());
  cs.logistics = scenario.logistics;
  cs.discount_rate = scenario.market.discount_rate_per_period;
  cs.grid = scenario.cut_point_grid;
  if (cs.H < 1) throw DomainError("horizon must be at least one period");
  if (!(cs.logistics.lot_size_tonnes > 0.0)) throw DomainError("lot size must be positive");
  for (const auto& def : scenario.registry.entries()) cs.attr_codes.push_back(def.code);
  cs.ash_attr = scenario.registry.index_of(kAshCode) ? static_cast<int>(*scenario.registry.index_of(kAshCode)) : -1;

  std::vector<const RomParcel*> roms;
  for (const auto& r : scenario.roms) roms.push_back(&r);
  std::sort(roms.begin(), roms.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::vector<const ProductSpec*> products;
  for (const auto& p : scenario.products) products.push_back(&p);
  std::sort(products.begin(), products.end(), [](auto* a, auto* b) { return a->id < b->id; });
  cs.R = static_cast<int>(roms.size());
  cs.P = static_cast<int>(products.size());

  const int days = scenario.days_per_period;
  for (int r = 0; r < cs.R; ++r) {
    const RomParcel& src = *roms[r];
    if (!cs.rom_index.emplace(src.id, r).second) throw DomainError("duplicate ROM id " + src.id);
    CompiledRom rom;
    rom.id = src.id;
    rom.curve = src.curve;
    rom.available = per_period(src.available_tonnes, cs.H, "availability of ROM " + src.id);
    rom.haul = src.haul_hours_per_tonne;
    rom.staging = src.staging_haul_hours_per_tonne;
    rom.degraded.resize(static_cast<std::size_t>(cs.H) * cs.A);
    for (int t = 0; t < cs.H; ++t) {
      const int midpoint = t * days + days / 2;
      const int age = std::max(0, midpoint - src.excavation_day);
      const QualityVector q = degrade_quality(src.quality, age, src.degradation, scenario.registry);
      for (int a = 0; a < cs.A; ++a) {
        auto it = q.find(cs.attr_codes[a]);
        if (it == q.end()) throw DomainError("ROM " + src.id + " lacks attribute " + cs.attr_codes[a]);
        rom.degraded[static_cast<std::size_t>(t) * cs.A + a] = it->second;
      }
    }
    if (rom.curve) {
      if (rom.curve->knots.size() < 2) throw DomainError("ROM " + src.id + " curve needs two knots");
      if (cs.grid.empty()) {
        for (const auto& k : rom.curve->knots) rom.cut_options.push_back(k.density_gcc);
      } else {
        for (double d : cs.grid) {
          if (d >= rom.curve->min_density() && d <= rom.curve->max_density()) rom.cut_options.push_back(d);
        }
        std::sort(rom.cut_options.begin(), rom.cut_options.end());
        rom.cut_options.erase(std::unique(rom.cut_options.begin(), rom.cut_options.end()), rom.cut_options.end());
      }
      if (rom.cut_options.empty()) {
        for (const auto& k : rom.curve->knots) rom.cut_options.push_back(k.density_gcc);
      }
    }
    if (rom.staging < rom.haul && scenario.logistics.haul_fleet_hours) cs.rehandle_useful = true;
    cs.roms.push_back(std::move(rom));
  }

  const double lot = cs.logistics.lot_size_tonnes;
  cs.lot_value = 1.0;
  for (int p = 0; p < cs.P; ++p) {
    const ProductSpec& src = *products[p];
    if (!cs.product_index.emplace(src.id, p).second) throw DomainError("duplicate product id " + src.id);
    CompiledProduct prod;
    prod.id = src.id;
    prod.min.assign(cs.A, -kInf);
    prod.max.assign(cs.A, kInf);
    for (const auto& [code, range] : src.range) {
      auto a = scenario.registry.index_of(code);
      if (!a) throw DomainError("product " + src.id + " ranges unknown attribute " + code);
      prod.min[*a] = range.min;
      prod.max[*a] = range.max;
    }
    for (const auto& [code, term] : src.adjustments) {
      auto a = scenario.registry.index_of(code);
      if (!a) throw DomainError("product " + src.id + " adjusts unknown attribute " + code);
      prod.adjustments.push_back({static_cast<int>(*a), term.target, term.rate_below, term.rate_above});
    }
    prod.price = per_period(src.base_price, cs.H, "base price of " + src.id);
    prod.contract = per_period(src.contract_min_tonnes, cs.H, "contract tonnes of " + src.id);
    prod.target = per_period(src.tonnage_target, cs.H, "tonnage target of " + src.id);
    prod.mode = src.tonnage_mode;
    for (double target : prod.target) prod.target_lots.push_back(static_cast<int>(std::floor(target / lot + 1e-9)));
    for (double price : prod.price) cs.lot_value = std::max(cs.lot_value, price * lot);
    cs.products.push_back(std::move(prod));
  }

  if (scenario.logistics.haul_fleet_hours) {
    cs.haul_cap = per_period(*scenario.logistics.haul_fleet_hours, cs.H, "haul fleet hours");
  }
  if (scenario.logistics.wash_capacity_tonnes) {
    cs.wash_cap = per_period(*scenario.logistics.wash_capacity_tonnes, cs.H, "wash capacity");
  }
  cs.discount_factor.resize(cs.H);
  double factor = 1.0;
  for (int t = 0; t < cs.H; ++t) {
    cs.discount_factor[t] = 1.0 / factor;
    factor *= 1.0 + cs.discount_rate;
  }
  return cs;
}

DensePlan empty_dense(const CompiledScenario& cs) {
  DensePlan plan;
  plan.lots.assign(cs.cells(), 0);
  plan.cuts.assign(static_cast<std::size_t>(cs.R) * cs.H, DenseCut{});
  plan.rehandle.assign(static_cast<std::size_t>(cs.H) * cs.R, 0.0);
  return plan;
}

DensePlan to_dense(const CompiledScenario& cs, const BlendPlan& plan) {
  DensePlan out = empty_dense(cs);
  auto check_period = [&](int t) {
    if (t < 0 || t >= cs.H) throw StructuralError("period " + std::to_string(t) + " outside the horizon");
  };
  auto rom_of = [&](const std::string& id) {
    const int r = cs.rom(id);
    if (r < 0) throw StructuralError("unknown ROM " + id);
    return r;
  };
  for (const auto& [key, lots] : plan.allotments) {
    check_period(key.period);
    const int p = cs.product(key.product);
    if (p < 0) throw StructuralError("unknown product " + key.product);
    const int r = rom_of(key.rom);
    if (lots < 0) throw StructuralError("negative lots for " + key.product + "/" + key.rom);
    out.lots[cs.cell(key.period, p, r)] = lots;
  }
  for (const auto& [key, cut] : plan.cut_points) {
    check_period(key.period);
    const int r = rom_of(key.rom);
    const auto& curve = cs.roms[r].curve;
    DenseCut& dst = out.cuts[static_cast<std::size_t>(r) * cs.H + key.period];
    dst.set = true;
    if (cut.is_bypass()) {
      if (curve && !curve->bypass_allowed) throw DomainError("ROM " + key.rom + " may not bypass the plant");
      dst.bypass = true;
    } else {
      if (!curve) throw DomainError("wash requested on ROM " + key.rom + " without an ash-yield curve");
      const double d = *cut.density_gcc;
      if (!(d >= curve->min_density() && d <= curve->max_density())) {
        throw DomainError("cut-point for ROM " + key.rom + " outside its knot range");
      }
      dst.bypass = false;
      dst.density = d;
    }
  }
  for (const auto& [key, tonnes] : plan.rehandles) {
    check_period(key.period);
    const int r = rom_of(key.rom);
    if (!(tonnes >= 0.0) || !std::isfinite(tonnes)) throw StructuralError("invalid rehandle tonnage for " + key.rom);
    out.rehandle[static_cast<std::size_t>(key.period) * cs.R + r] = tonnes;
  }
  for (int r = 0; r < cs.R; ++r) {
    if (!cs.washable(r)) continue;
    for (int t = 0; t < cs.H; ++t) {
      if (out.cuts[static_cast<std::size_t>(r) * cs.H + t].set) continue;
      for (int p = 0; p < cs.P; ++p) {
        if (out.lots[cs.cell(t, p, r)] > 0) {
          throw StructuralError("ROM " + cs.roms[r].id + " used in period " + std::to_string(t) +
                                " without a cut-point");
        }
      }
    }
  }
  return out;
}

BlendPlan to_plan(const CompiledScenario& cs, const DensePlan& plan) {
  BlendPlan out;
  for (int t = 0; t < cs.H; ++t) {
    for (int p = 0; p < cs.P; ++p) {
      for (int r = 0; r < cs.R; ++r) {
        const int lots = plan.lots[cs.cell(t, p, r)];
        if (lots != 0) out.allotments.emplace(AllotmentKey{t, cs.products[p].id, cs.roms[r].id}, lots);
      }
    }
  }
  for (int r = 0; r < cs.R; ++r) {
    for (int t = 0; t < cs.H; ++t) {
      const DenseCut& cut = plan.cuts[static_cast<std::size_t>(r) * cs.H + t];
      if (!cut.set) continue;
      out.cut_points.emplace(CutPointKey{cs.roms[r].id, t}, cut.bypass ? CutPoint::bypass() : CutPoint::at(cut.density));
    }
  }
  for (int t = 0; t < cs.H; ++t) {
    for (int r = 0; r < cs.R; ++r) {
      const double moved = plan.rehandle[static_cast<std::size_t>(t) * cs.R + r];
      if (moved > 0.0) out.rehandles.emplace(RehandleKey{t, cs.roms[r].id}, moved);
    }
  }
  return out;
}

DenseConstraints compile_constraints(const CompiledScenario& cs, const ConstraintSet& set) {
  DenseConstraints dc;
  dc.pin.assign(cs.cells(), -1);
  dc.excluded.assign(cs.cells(), 0);
  dc.reserve.assign(static_cast<std::size_t>(cs.R) * cs.H, 0.0);
  auto cell_of = [&](const AllotmentKey& key) {
    const int p = cs.product(key.product);
    const int r = cs.rom(key.rom);
    if (p < 0 || r < 0 || key.period < 0 || key.period >= cs.H) {
      throw StructuralError("constraint references unknown allotment " + key.product + "/" + key.rom);
    }
    return cs.cell(key.period, p, r);
  };
  for (const auto& [key, pin] : set.pins) {
    dc.pin[cell_of(key)] = pin.lots;
    dc.has_pins = true;
  }
  for (const auto& [key, _] : set.exclusions) dc.excluded[cell_of(key)] = 1;
  for (const auto& res : set.reserves) {
    const int r = cs.rom(res.rom);
    if (r < 0) throw StructuralError("reserve references unknown ROM " + res.rom);
    for (int t = 0; t <= std::min(res.until_period, cs.H - 1); ++t) {
      dc.reserve[static_cast<std::size_t>(r) * cs.H + t] += res.tonnes;
    }
  }
  for (const auto& qb : set.quality_bounds) {
    const int p = cs.product(qb.product);
    auto a = std::find(cs.attr_codes.begin(), cs.attr_codes.end(), qb.attribute);
    if (p < 0 || a == cs.attr_codes.end() || qb.period < 0 || qb.period >= cs.H) {
      throw StructuralError("quality bound references unknown product, attribute, or period");
    }
    dc.quality.push_back({p, qb.period, static_cast<int>(a - cs.attr_codes.begin()), qb.bound, qb.upper});
  }
  for (const auto& tb : set.tonnage_bounds) {
    const int p = cs.product(tb.product);
    if (p < 0 || tb.period < 0 || tb.period >= cs.H) throw StructuralError("tonnage bound references unknown product");
    dc.tonnage.push_back({p, tb.period, tb.bound, tb.lower});
  }
  return dc;
}

std::string_view code_name(VCode code) {
  namespace vc = violation_code;
  switch (code) {
    case VCode::Quality: return vc::kQuality;
    case VCode::ContractMin: return vc::kContractMin;
    case VCode::TonnageTarget: return vc::kTonnageTarget;
    case VCode::Cardinality: return vc::kBlendCardinality;
    case VCode::MinLots: return vc::kMinLots;
    case VCode::Availability: return vc::kAvailability;
    case VCode::RehandleAvailability: return vc::kRehandleAvailability;
    case VCode::HaulCapacity: return vc::kHaulCapacity;
    case VCode::WashCapacity: return vc::kWashCapacity;
    case VCode::Pin: return vc::kPin;
    case VCode::Exclude: return vc::kExclude;
    case VCode::Reserve: return vc::kReserve;
    case VCode::QualityBound: return vc::kQualityBound;
    case VCode::TonnageBound: return vc::kTonnageBound;
  }
  return "unknown";
}

void wash_at(const CompiledScenario& cs, const DensePlan& plan, int r, int t, double& yield, double& ash) {
  const auto& curve = cs.roms[r].curve;
  const DenseCut& cut = plan.cuts[static_cast<std::size_t>(r) * cs.H + t];
  if (curve && cut.set && !cut.bypass) {
    const auto point = curve->at(cut.density);
    yield = point.yield;
    ash = point.product_ash_pct;
  } else {
    yield = 1.0;
    ash = std::numeric_limits<double>::quiet_NaN();
  }
}

void evaluate(const CompiledScenario& cs, const DensePlan& plan, const DenseConstraints* dc, EvalResult& out) {
  const int H = cs.H, P = cs.P, R = cs.R, A = cs.A;
  const double lot = cs.logistics.lot_size_tonnes;
  const std::size_t npp = static_cast<std::size_t>(H) * P;

  out.pp_lots.assign(npp, 0);
  out.pp_roms.assign(npp, 0);
  out.pp_feed.assign(npp, 0.0);
  out.pp_tonnes.assign(npp, 0.0);
  out.pp_gross.assign(npp, 0.0);
  out.pp_adj.assign(npp, 0.0);
  out.pp_in_spec.assign(npp, 0);
  out.pp_quality.assign(npp * A, 0.0);
  out.yield.assign(static_cast<std::size_t>(R) * H, 1.0);
  out.washed.assign(static_cast<std::size_t>(R) * H, 0);
  for (auto* v : {&out.haul_hours, &out.haul_cost, &out.wash_feed, &out.wash_cost, &out.rehandle_moved,
                  &out.rehandle_arrived, &out.rehandle_cost, &out.revenue, &out.net}) {
    v->assign(H, 0.0);
  }
  out.violations.clear();
  out.sold_tonnes = 0.0;

  double max_haul = 0.0;
  for (const auto& rom : cs.roms) max_haul = std::max(max_haul, rom.haul);
  const double hours_per_lot = max_haul > 0.0 ? max_haul * lot : 1.0;

  auto add = [&](VCode code, int t, int p, int r, int a, double magnitude, double weight, bool fill) {
    out.violations.push_back(VRec{code, t, p, r, a, magnitude, weight, fill});
  };

  // Washed ash per (r, t); NaN when unwashed.
  std::vector<double> washed_ash(static_cast<std::size_t>(R) * H);
  for (int r = 0; r < R; ++r) {
    for (int t = 0; t < H; ++t) {
      const std::size_t i = static_cast<std::size_t>(r) * H + t;
      wash_at(cs, plan, r, t, out.yield[i], washed_ash[i]);
      out.washed[i] = std::isnan(washed_ash[i]) ? 0 : 1;
    }
  }

  std::vector<double> weighted(A), lo(A), hi(A);
  for (int t = 0; t < H; ++t) {
    for (int p = 0; p < P; ++p) {
      const CompiledProduct& prod = cs.products[p];
      const std::size_t pp = static_cast<std::size_t>(t) * P + p;
      int lots_sum = 0, distinct = 0;
      double tonnes = 0.0;
      std::fill(weighted.begin(), weighted.end(), 0.0);
      std::fill(lo.begin(), lo.end(), kInf);
      std::fill(hi.begin(), hi.end(), -kInf);
      for (int r = 0; r < R; ++r) {
        const std::size_t c = cs.cell(t, p, r);
        const int lots = plan.lots[c];
        if (dc) {
          if (dc->pin[c] >= 0 && lots != dc->pin[c]) {
            add(VCode::Pin, t, p, r, -1, lots - dc->pin[c], std::abs(lots - dc->pin[c]), lots < dc->pin[c]);
          }
          if (dc->excluded[c] && lots > 0) add(VCode::Exclude, t, p, r, -1, lots, lots, false);
        }
        if (lots <= 0) continue;
        if (lots < cs.logistics.min_lots_per_used_rom) {
          add(VCode::MinLots, t, p, r, -1, cs.logistics.min_lots_per_used_rom - lots,
              cs.logistics.min_lots_per_used_rom - lots, false);
        }
        lots_sum += lots;
        ++distinct;
        const std::size_t rt = static_cast<std::size_t>(r) * H + t;
        const double parcel = lots * lot * out.yield[rt];
        tonnes += parcel;
        const double* q = &cs.roms[r].degraded[static_cast<std::size_t>(t) * A];
        for (int a = 0; a < A; ++a) {
          const double v = (a == cs.ash_attr && out.washed[rt]) ? washed_ash[rt] : q[a];
          weighted[a] += parcel * v;
          lo[a] = std::min(lo[a], v);
          hi[a] = std::max(hi[a], v);
        }
      }
      out.pp_lots[pp] = lots_sum;
      out.pp_roms[pp] = distinct;
      out.pp_feed[pp] = lots_sum * lot;
      out.pp_tonnes[pp] = tonnes;

      if (distinct > cs.logistics.max_rom_types_per_blend) {
        const int excess = distinct - cs.logistics.max_rom_types_per_blend;
        add(VCode::Cardinality, t, p, -1, -1, excess, excess, false);
      }
      const int target = prod.target_lots[t];
      if (lots_sum > target) {
        add(VCode::TonnageTarget, t, p, -1, -1, (lots_sum - target) * lot, lots_sum - target, false);
      } else if (prod.mode == TonnageMode::Exact && lots_sum < target) {
        add(VCode::TonnageTarget, t, p, -1, -1, (lots_sum - target) * lot, target - lots_sum, true);
      }

      bool in_spec = false;
      if (tonnes > 0.0) {
        in_spec = true;
        double* qout = &out.pp_quality[pp * A];
        for (int a = 0; a < A; ++a) {
          const double v = std::clamp(weighted[a] / tonnes, lo[a], hi[a]);
          qout[a] = v;
          if (v > prod.max[a] + kQualityTolerance) {
            add(VCode::Quality, t, p, -1, a, v - prod.max[a], v - prod.max[a], false);
            in_spec = false;
          } else if (v < prod.min[a] - kQualityTolerance) {
            add(VCode::Quality, t, p, -1, a, v - prod.min[a], prod.min[a] - v, false);
            in_spec = false;
          }
        }
        if (in_spec) {
          out.pp_gross[pp] = prod.price[t] * tonnes;
          double per_tonne = 0.0;
          for (const auto& adj : prod.adjustments) {
            const double dev = qout[adj.attr] - adj.target;
            if (dev > 0.0) {
              per_tonne += adj.above * dev;
            } else if (dev < 0.0) {
              per_tonne += adj.below * -dev;
            }
          }
          out.pp_adj[pp] = tonnes * per_tonne;
        }
      }
      out.pp_in_spec[pp] = in_spec ? 1 : 0;
      const double sold = in_spec ? tonnes : 0.0;
      out.sold_tonnes += sold;
      if (sold < prod.contract[t] - kTonnesTolerance) {
        add(VCode::ContractMin, t, p, -1, -1, prod.contract[t] - sold, (prod.contract[t] - sold) / lot, true);
      }
      out.revenue[t] += out.pp_gross[pp] + out.pp_adj[pp];
    }
  }

  if (dc) {
    for (const auto& qb : dc->quality) {
      const std::size_t pp = static_cast<std::size_t>(qb.t) * P + qb.p;
      if (out.pp_tonnes[pp] <= 0.0) {
        add(VCode::QualityBound, qb.t, qb.p, -1, qb.a, 1.0, 1.0, true);
        continue;
      }
      const double v = out.pp_quality[pp * A + qb.a];
      if (qb.upper && v > qb.bound + kQualityTolerance) {
        add(VCode::QualityBound, qb.t, qb.p, -1, qb.a, v - qb.bound, v - qb.bound, false);
      } else if (!qb.upper && v < qb.bound - kQualityTolerance) {
        add(VCode::QualityBound, qb.t, qb.p, -1, qb.a, v - qb.bound, qb.bound - v, false);
      }
    }
    for (const auto& tb : dc->tonnage) {
      const double v = out.pp_tonnes[static_cast<std::size_t>(tb.t) * P + tb.p];
      if (tb.lower && v < tb.bound - kTonnesTolerance) {
        add(VCode::TonnageBound, tb.t, tb.p, -1, -1, v - tb.bound, (tb.bound - v) / lot, true);
      } else if (!tb.lower && v > tb.bound + kTonnesTolerance) {
        add(VCode::TonnageBound, tb.t, tb.p, -1, -1, v - tb.bound, (v - tb.bound) / lot, false);
      }
    }
  }

  // Stock flow per ROM: pit stock grows with availability, staging stock with
  // rehandled material net of losses. Feed draws on staging first.
  const double loss = cs.logistics.rehandle_loss_fraction;
  for (int r = 0; r < R; ++r) {
    const CompiledRom& rom = cs.roms[r];
    double pit = 0.0, staging = 0.0;
    for (int t = 0; t < H; ++t) {
      pit += rom.available[t];
      const double moved = plan.rehandle[static_cast<std::size_t>(t) * R + r];
      if (moved > pit + kTonnesTolerance) {
        add(VCode::RehandleAvailability, t, -1, r, -1, moved - pit, (moved - pit) / lot, false);
      }
      pit = std::max(0.0, pit - moved);
      const double arrived = moved * (1.0 - loss);
      staging += arrived;
      out.rehandle_moved[t] += moved;
      out.rehandle_arrived[t] += arrived;

      double feed = 0.0;
      for (int p = 0; p < P; ++p) feed += plan.lots[cs.cell(t, p, r)] * lot;
      const double from_staging = std::min(feed, staging);
      staging -= from_staging;
      const double from_pit = feed - from_staging;
      pit -= from_pit;
      if (pit < -kTonnesTolerance) add(VCode::Availability, t, -1, r, -1, -pit, -pit / lot, false);
      pit = std::max(0.0, pit);
      if (dc) {
        const double reserved = dc->reserve[static_cast<std::size_t>(r) * H + t];
        if (reserved > 0.0 && pit + staging < reserved - kTonnesTolerance) {
          add(VCode::Reserve, t, -1, r, -1, reserved - pit - staging, (reserved - pit - staging) / lot, false);
        }
      }
      out.haul_hours[t] += from_pit * rom.haul + from_staging * rom.staging + moved * (rom.haul - rom.staging);
      if (out.washed[static_cast<std::size_t>(r) * H + t]) out.wash_feed[t] += feed;
    }
  }

  for (int t = 0; t < H; ++t) {
    if (!cs.haul_cap.empty() && out.haul_hours[t] > cs.haul_cap[t] * (1.0 + 1e-12) + 1e-9) {
      const double excess = out.haul_hours[t] - cs.haul_cap[t];
      add(VCode::HaulCapacity, t, -1, -1, -1, excess, excess / hours_per_lot, false);
    }
    if (!cs.wash_cap.empty() && out.wash_feed[t] > cs.wash_cap[t] + kTonnesTolerance) {
      const double excess = out.wash_feed[t] - cs.wash_cap[t];
      add(VCode::WashCapacity, t, -1, -1, -1, excess, excess / lot, false);
    }
    out.haul_cost[t] = out.haul_hours[t] * cs.logistics.haul_cost_per_hour;
    if (out.wash_feed[t] > 0.0) {
      out.wash_cost[t] = cs.logistics.wash_fixed_cost_per_period +
                         cs.logistics.wash_variable_cost_per_tonne * out.wash_feed[t];
    }
    out.rehandle_cost[t] = cs.logistics.rehandle_cost_per_tonne * out.rehandle_moved[t];
    out.net[t] = out.revenue[t] - out.haul_cost[t] - out.wash_cost[t] - out.rehandle_cost[t];
  }

  out.total_revenue = 0.0;
  for (double rev : out.revenue) out.total_revenue += rev;
  out.npv = blendforge::npv(out.net, cs.discount_rate);
  out.infeasibility = 0.0;
  out.hard_infeasibility = 0.0;
  for (const auto& v : out.violations) {
    out.infeasibility += v.weight;
    if (!v.fill) out.hard_infeasibility += v.weight;
  }
}

EvaluationReport make_report(const CompiledScenario& cs, const EvalResult& ev) {
  EvaluationReport report;
  const int H = cs.H, P = cs.P, A = cs.A;
  for (int p = 0; p < P; ++p) {
    for (int t = 0; t < H; ++t) {
      const std::size_t pp = static_cast<std::size_t>(t) * P + p;
      ProductPeriodResult row;
      row.product = cs.products[p].id;
      row.period = t;
      row.lots = ev.pp_lots[pp];
      row.feed_tonnes = ev.pp_feed[pp];
      row.tonnes = ev.pp_tonnes[pp];
      if (ev.pp_tonnes[pp] > 0.0) {
        for (int a = 0; a < A; ++a) row.quality[cs.attr_codes[a]] = ev.pp_quality[pp * A + a];
      }
      row.in_spec = ev.pp_in_spec[pp] != 0;
      row.gross_revenue = ev.pp_gross[pp];
      row.adjustment_revenue = ev.pp_adj[pp];
      report.product_periods.push_back(std::move(row));
    }
  }
  for (int t = 0; t < H; ++t) {
    PeriodResult row;
    row.period = t;
    row.haul_hours = ev.haul_hours[t];
    row.haul_cost = ev.haul_cost[t];
    row.wash_feed_tonnes = ev.wash_feed[t];
    row.wash_cost = ev.wash_cost[t];
    row.rehandle_tonnes = ev.rehandle_moved[t];
    row.rehandle_arrived_tonnes = ev.rehandle_arrived[t];
    row.rehandle_cost = ev.rehandle_cost[t];
    row.revenue = ev.revenue[t];
    row.net_cashflow = ev.net[t];
    report.periods.push_back(row);
    report.kpis.wash_utilization.push_back(
        !cs.wash_cap.empty() && cs.wash_cap[t] > 0.0 ? ev.wash_feed[t] / cs.wash_cap[t] : 0.0);
  }
  for (const auto& v : ev.violations) {
    Violation out;
    out.code = std::string(code_name(v.code));
    out.period = v.period;
    if (v.product >= 0) out.product = cs.products[v.product].id;
    if (v.rom >= 0) out.rom = cs.roms[v.rom].id;
    if (v.attr >= 0) out.attribute = cs.attr_codes[v.attr];
    out.magnitude = v.magnitude;
    report.violations.push_back(std::move(out));
  }
  std::stable_sort(report.violations.begin(), report.violations.end(), [](const Violation& a, const Violation& b) {
    return std::tie(a.period, a.code, a.product, a.rom, a.attribute) <
           std::tie(b.period, b.code, b.product, b.rom, b.attribute);
  });
  report.total_revenue = ev.total_revenue;
  report.npv = ev.npv;
  report.kpis.total_sold_tonnes = ev.sold_tonnes;
  report.kpis.avg_revenue_per_tonne = ev.sold_tonnes > 0.0 ? ev.total_revenue / ev.sold_tonnes : 0.0;
  return report;
}

}  // namespace blendforge::detail
