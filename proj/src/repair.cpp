#include <algorithm>
#include <cmath>
#include <limits>

#include "search.h"

namespace blendforge::detail {

SearchContext::SearchContext(const CompiledScenario& compiled, const DenseConstraints* constraints,
                             ObjectiveKind objective)
    : cs(compiled), dc(constraints), kind(objective) {
  is_free.assign(cs.cells(), 1);
  for (std::size_t c = 0; c < cs.cells(); ++c) {
    if (dc && (dc->pin[c] >= 0 || dc->excluded[c])) is_free[c] = 0;
    if (is_free[c]) free_cells.push_back(c);
  }
  cut_choices.resize(cs.R);
  for (int r = 0; r < cs.R; ++r) {
    const CompiledRom& rom = cs.roms[r];
    if (!rom.curve) continue;
    washable_roms.push_back(r);
    for (double d : rom.cut_options) cut_choices[r].push_back(DenseCut{true, false, d});
    if (rom.curve->bypass_allowed) cut_choices[r].push_back(DenseCut{true, true, 0.0});
  }
  for (int r = 0; r < cs.R && cs.rehandle_useful; ++r) {
    if (cs.roms[r].staging < cs.roms[r].haul) rehandle_roms.push_back(r);
  }
  moves = {MoveKind::AddLot, MoveKind::DropLot, MoveKind::MoveLot, MoveKind::SwapLots};
  if (!washable_roms.empty()) moves.push_back(MoveKind::AdjustCutPoint);
  if (!rehandle_roms.empty()) moves.push_back(MoveKind::ToggleRehandle);
}

void normalize(const SearchContext& ctx, DensePlan& plan) {
  const auto& cs = ctx.cs;
  if (ctx.dc) {
    for (std::size_t c = 0; c < cs.cells(); ++c) {
      if (ctx.dc->pin[c] >= 0) plan.lots[c] = ctx.dc->pin[c];
      else if (ctx.dc->excluded[c]) plan.lots[c] = 0;
    }
  }
  for (int r : ctx.washable_roms) {
    for (int t = 0; t < cs.H; ++t) {
      DenseCut& cut = plan.cuts[static_cast<std::size_t>(r) * cs.H + t];
      if (cut.set) continue;
      bool used = false;
      for (int p = 0; p < cs.P && !used; ++p) used = plan.lots[cs.cell(t, p, r)] > 0;
      if (used) cut = ctx.cut_choices[r].back();
    }
  }
}

double lot_worth(const SearchContext& ctx, const EvalResult& ev, int t, int p, int r) {
  const auto& cs = ctx.cs;
  const double lot = cs.logistics.lot_size_tonnes;
  const std::size_t rt = static_cast<std::size_t>(r) * cs.H + t;
  const std::size_t pp = static_cast<std::size_t>(t) * cs.P + p;
  const CompiledProduct& prod = cs.products[p];
  double value = -lot * cs.roms[r].haul * cs.logistics.haul_cost_per_hour;
  if (ev.washed[rt]) value -= lot * cs.logistics.wash_variable_cost_per_tonne;
  if (ev.pp_in_spec[pp]) {
    const double tonnes = lot * ev.yield[rt];
    value += prod.price[t] * tonnes;
    // Lots that keep a contract or an exact tonnage target whole.
    if (ev.pp_tonnes[pp] - tonnes < prod.contract[t] - kTonnesTolerance) value += 4.0 * cs.lot_value;
  }
  if (prod.mode == TonnageMode::Exact && ev.pp_lots[pp] <= prod.target_lots[t]) value += 4.0 * cs.lot_value;
  return value * cs.discount_factor[t];
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Drops one lot from the lowest-worth free cell accepted by `want`; first cell
// in (period, product, rom) order wins ties.
template <class Pred>
bool drop_cheapest(const SearchContext& ctx, DensePlan& plan, const EvalResult& ev, Pred want) {
  const auto& cs = ctx.cs;
  std::size_t pick = kNone;
  double pick_worth = 0.0;
  for (int t = 0; t < cs.H; ++t) {
    for (int p = 0; p < cs.P; ++p) {
      for (int r = 0; r < cs.R; ++r) {
        const std::size_t c = cs.cell(t, p, r);
        if (plan.lots[c] <= 0 || !ctx.is_free[c] || !want(t, p, r)) continue;
        const double w = lot_worth(ctx, ev, t, p, r);
        if (pick == kNone || w < pick_worth) {
          pick = c;
          pick_worth = w;
        }
      }
    }
  }
  if (pick == kNone) return false;
  plan.lots[pick] -= 1;
  if (plan.lots[pick] < cs.logistics.min_lots_per_used_rom) plan.lots[pick] = 0;
  return true;
}

// Rehandle losses shrink stock; undoing moves of ROM r up to period t frees it.
bool undo_lossy_rehandle(const SearchContext& ctx, DensePlan& plan, int t, int r) {
  if (ctx.cs.logistics.rehandle_loss_fraction <= 0.0) return false;
  for (int s = t; s >= 0; --s) {
    double& moved = plan.rehandle[static_cast<std::size_t>(s) * ctx.cs.R + r];
    if (moved > 0.0) {
      moved = 0.0;
      return true;
    }
  }
  return false;
}

bool fix(const SearchContext& ctx, DensePlan& plan, const EvalResult& ev, const VRec& v) {
  const auto& cs = ctx.cs;
  switch (v.code) {
    case VCode::MinLots: {
      const std::size_t c = cs.cell(v.period, v.product, v.rom);
      if (!ctx.is_free[c]) return false;
      plan.lots[c] = 0;
      return true;
    }
    case VCode::Cardinality: {
      int pick = -1;
      double least = 0.0;
      for (int r = 0; r < cs.R; ++r) {
        const std::size_t c = cs.cell(v.period, v.product, r);
        if (plan.lots[c] <= 0 || !ctx.is_free[c]) continue;
        const double contribution = plan.lots[c] * ev.yield[static_cast<std::size_t>(r) * cs.H + v.period];
        if (pick < 0 || contribution < least) {
          pick = r;
          least = contribution;
        }
      }
      if (pick < 0) return false;
      plan.lots[cs.cell(v.period, v.product, pick)] = 0;
      return true;
    }
    case VCode::TonnageTarget:
    case VCode::TonnageBound:
      if (v.fill) return false;
      return drop_cheapest(ctx, plan, ev, [&](int t, int p, int) { return t == v.period && p == v.product; });
    case VCode::Availability:
    case VCode::Reserve:
      return drop_cheapest(ctx, plan, ev, [&](int t, int, int r) { return t <= v.period && r == v.rom; }) ||
             undo_lossy_rehandle(ctx, plan, v.period, v.rom);
    case VCode::RehandleAvailability: {
      double& moved = plan.rehandle[static_cast<std::size_t>(v.period) * cs.R + v.rom];
      moved = std::max(0.0, moved - v.magnitude);
      if (moved < kTonnesTolerance) moved = 0.0;
      return true;
    }
    case VCode::WashCapacity:
      return drop_cheapest(ctx, plan, ev, [&](int t, int, int r) {
        return t == v.period && ev.washed[static_cast<std::size_t>(r) * cs.H + t];
      });
    case VCode::HaulCapacity: {
      for (int r = 0; r < cs.R; ++r) {
        double& moved = plan.rehandle[static_cast<std::size_t>(v.period) * cs.R + r];
        const double saving = cs.roms[r].haul - cs.roms[r].staging;
        if (moved <= 0.0 || saving <= 0.0) continue;
        moved = std::max(0.0, moved - v.magnitude / saving);
        if (moved < kTonnesTolerance) moved = 0.0;
        return true;
      }
      return drop_cheapest(ctx, plan, ev, [&](int t, int, int r) {
        return t == v.period && (cs.roms[r].haul > 0.0 || cs.roms[r].staging > 0.0);
      });
    }
    default:
      return false;
  }
}

bool repairable(const VRec& v) {
  return !v.fill && v.code != VCode::Quality && v.code != VCode::QualityBound;
}

}  // namespace

bool repair_dense(const SearchContext& ctx, DensePlan& plan, EvalResult& ev) {
  normalize(ctx, plan);
  for (;;) {
    evaluate(ctx.cs, plan, ctx.dc, ev);
    bool changed = false;
    for (const VRec& v : ev.violations) {
      if (repairable(v) && fix(ctx, plan, ev, v)) {
        changed = true;
        break;
      }
    }
    if (!changed) break;
  }
  return std::none_of(ev.violations.begin(), ev.violations.end(), repairable);
}

void strip_unused_cuts(const CompiledScenario& cs, DensePlan& plan) {
  for (int r = 0; r < cs.R; ++r) {
    for (int t = 0; t < cs.H; ++t) {
      bool used = false;
      for (int p = 0; p < cs.P && !used; ++p) used = plan.lots[cs.cell(t, p, r)] > 0;
      if (!used) plan.cuts[static_cast<std::size_t>(r) * cs.H + t] = DenseCut{};
    }
  }
}

long long lot_distance(const DensePlan& a, const DensePlan& b) {
  long long d = 0;
  for (std::size_t c = 0; c < a.lots.size(); ++c) d += std::abs(a.lots[c] - b.lots[c]);
  return d;
}

}  // namespace blendforge::detail
