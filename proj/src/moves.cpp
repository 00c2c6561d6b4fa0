#include <algorithm>
#include <cmath>

#include "search.h"

namespace blendforge::detail {

namespace {

struct Cell {
  int t, p, r;
};

Cell split(const CompiledScenario& cs, std::size_t c) {
  const int r = static_cast<int>(c % cs.R);
  const std::size_t tp = c / cs.R;
  return Cell{static_cast<int>(tp / cs.P), static_cast<int>(tp % cs.P), r};
}

template <class T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[rng.below(items.size())];
}

void ensure_cut(const SearchContext& ctx, DensePlan& plan, int r, int t, Rng& rng) {
  if (!ctx.cs.washable(r)) return;
  DenseCut& cut = plan.cuts[static_cast<std::size_t>(r) * ctx.cs.H + t];
  if (!cut.set) cut = pick(ctx.cut_choices[r], rng);
}

void add_to(const SearchContext& ctx, DensePlan& plan, std::size_t c, int lots, Rng& rng) {
  int& cur = plan.lots[c];
  cur = std::max(cur + lots, cur == 0 ? ctx.cs.logistics.min_lots_per_used_rom : 0);
  const Cell cell = split(ctx.cs, c);
  ensure_cut(ctx, plan, cell.r, cell.t, rng);
}

// Removes one lot (or the whole cell if it would fall below the minimum);
// returns the lots removed.
int take_from(const SearchContext& ctx, DensePlan& plan, std::size_t c) {
  int& cur = plan.lots[c];
  const int before = cur;
  cur -= 1;
  if (cur < ctx.cs.logistics.min_lots_per_used_rom) cur = 0;
  return before - cur;
}

std::vector<std::size_t> used_free_cells(const SearchContext& ctx, const DensePlan& plan) {
  std::vector<std::size_t> out;
  for (std::size_t c : ctx.free_cells) {
    if (plan.lots[c] > 0) out.push_back(c);
  }
  return out;
}

void add_lot(const SearchContext& ctx, DensePlan& plan, Rng& rng) {
  if (ctx.free_cells.empty()) return;
  add_to(ctx, plan, pick(ctx.free_cells, rng), 1, rng);
}

void drop_lot(const SearchContext& ctx, DensePlan& plan, Rng& rng) {
  const auto used = used_free_cells(ctx, plan);
  if (used.empty()) return add_lot(ctx, plan, rng);
  take_from(ctx, plan, pick(used, rng));
}

// Destination for a lot leaving `src`: another ROM in the same blend, the same
// ROM in another product, or the same allotment in another period.
std::size_t shifted(const SearchContext& ctx, const Cell& src, Rng& rng) {
  const auto& cs = ctx.cs;
  Cell dst = src;
  switch (rng.below(3)) {
    case 0:
      if (cs.R > 1) dst.r = static_cast<int>((src.r + 1 + rng.below(cs.R - 1)) % cs.R);
      break;
    case 1:
      if (cs.P > 1) dst.p = static_cast<int>((src.p + 1 + rng.below(cs.P - 1)) % cs.P);
      break;
    default:
      if (cs.H > 1) dst.t = static_cast<int>((src.t + 1 + rng.below(cs.H - 1)) % cs.H);
      break;
  }
  return cs.cell(dst.t, dst.p, dst.r);
}

void move_lot(const SearchContext& ctx, DensePlan& plan, Rng& rng) {
  const auto used = used_free_cells(ctx, plan);
  if (used.empty()) return add_lot(ctx, plan, rng);
  const std::size_t src = pick(used, rng);
  const std::size_t dst = shifted(ctx, split(ctx.cs, src), rng);
  if (dst == src || !ctx.is_free[dst]) return;
  add_to(ctx, plan, dst, take_from(ctx, plan, src), rng);
}

// Exchanges the ROMs of one lot in each of two blends: per-ROM usage and
// per-blend lot totals are both preserved.
void swap_lots(const SearchContext& ctx, DensePlan& plan, Rng& rng) {
  const auto& cs = ctx.cs;
  const auto used = used_free_cells(ctx, plan);
  if (used.size() < 2) return move_lot(ctx, plan, rng);
  const std::size_t a = pick(used, rng);
  const std::size_t b = pick(used, rng);
  const Cell ca = split(cs, a), cb = split(cs, b);
  if (ca.r == cb.r) return move_lot(ctx, plan, rng);
  const std::size_t a_to = cs.cell(ca.t, ca.p, cb.r);
  const std::size_t b_to = cs.cell(cb.t, cb.p, ca.r);
  if (!ctx.is_free[a_to] || !ctx.is_free[b_to]) return;
  add_to(ctx, plan, a_to, take_from(ctx, plan, a), rng);
  add_to(ctx, plan, b_to, take_from(ctx, plan, b), rng);
}

void adjust_cut(const SearchContext& ctx, DensePlan& plan, Rng& rng) {
  const auto& cs = ctx.cs;
  const int r = pick(ctx.washable_roms, rng);
  const int t = static_cast<int>(rng.below(cs.H));
  DenseCut& cut = plan.cuts[static_cast<std::size_t>(r) * cs.H + t];
  const auto& choices = ctx.cut_choices[r];
  if (!cut.set) {
    cut = pick(choices, rng);
    return;
  }
  if (!cs.grid.empty()) {
    // One grid step up or down; bypass sits above the highest density.
    std::size_t at = 0;
    double gap = INFINITY;
    for (std::size_t i = 0; i < choices.size(); ++i) {
      const double g = choices[i].bypass ? (cut.bypass ? 0.0 : INFINITY)
                                         : (cut.bypass ? INFINITY : std::abs(choices[i].density - cut.density));
      if (g < gap) {
        gap = g;
        at = i;
      }
    }
    if (choices.size() < 2) return;
    const bool up = at == 0 || (at + 1 < choices.size() && rng.chance(0.5));
    cut = choices[up ? at + 1 : at - 1];
    return;
  }
  const auto& curve = *cs.roms[r].curve;
  if (curve.bypass_allowed && rng.chance(0.15)) {
    cut = cut.bypass ? choices.front() : DenseCut{true, true, 0.0};
    return;
  }
  const double lo = curve.min_density(), hi = curve.max_density();
  const double from = cut.bypass ? hi : cut.density;
  cut = DenseCut{true, false, std::clamp(from + (rng.uniform() * 2.0 - 1.0) * 0.1 * (hi - lo), lo, hi)};
}

void toggle_rehandle(const SearchContext& ctx, DensePlan& plan, Rng& rng) {
  const auto& cs = ctx.cs;
  const int r = pick(ctx.rehandle_roms, rng);
  const int t = static_cast<int>(rng.below(cs.H));
  double& moved = plan.rehandle[static_cast<std::size_t>(t) * cs.R + r];
  if (moved > 0.0) {
    moved = 0.0;
    return;
  }
  int later = 0;
  for (int s = t; s < cs.H; ++s) {
    for (int p = 0; p < cs.P; ++p) later += plan.lots[cs.cell(s, p, r)];
  }
  moved = cs.logistics.lot_size_tonnes * static_cast<double>(1 + rng.below(std::max(1, later)));
}

}  // namespace

void apply_move(const SearchContext& ctx, DensePlan& plan, Rng& rng, MoveKind kind) {
  if (kind == MoveKind::Any) kind = pick(ctx.moves, rng);
  switch (kind) {
    case MoveKind::AddLot: return add_lot(ctx, plan, rng);
    case MoveKind::DropLot: return drop_lot(ctx, plan, rng);
    case MoveKind::MoveLot: return move_lot(ctx, plan, rng);
    case MoveKind::SwapLots: return swap_lots(ctx, plan, rng);
    case MoveKind::AdjustCutPoint:
      if (!ctx.washable_roms.empty()) adjust_cut(ctx, plan, rng);
      return;
    case MoveKind::ToggleRehandle:
      if (!ctx.rehandle_roms.empty()) toggle_rehandle(ctx, plan, rng);
      return;
    case MoveKind::Any: return;
  }
}

}  // namespace blendforge::detail
