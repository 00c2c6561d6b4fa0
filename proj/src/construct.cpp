#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <tuple>
#include <utility>

#include "search.h"

namespace blendforge::detail {

namespace {

struct Trial {
  bool feasible{false};
  double objective{0.0};
  double infeasibility{0.0};
  double hard{0.0};
  double sold{0.0};
  double avg{0.0};
};

// Candidate ranking: the heuristic's own keys, then the remaining stock of
// the ROMs drawn on (plentiful ROMs first, which saves scarce sweeteners).
using Key = std::tuple<double, double, double>;
using Keys = std::pair<double, double>;

class Builder {
 public:
  Builder(const SearchContext& ctx, DensePlan plan, std::size_t& evaluations)
      : ctx_(&ctx), plan_(std::move(plan)), evaluations_(&evaluations) {
    cur_ = measure();
  }

  const DensePlan& plan() const { return plan_; }
  const Trial& current() const { return cur_; }

  // Applies the best-scoring single-lot addition to blend `pp`, falling back
  // to two-lot additions; `score` returns nullopt for unacceptable trials.
  template <class Score>
  bool step(int pp, Score score) {
    const auto& cs = ctx_->cs;
    const int t = pp / cs.P, p = pp % cs.P;
    std::optional<Key> best;
    std::size_t best_a = 0, best_b = 0;
    auto consider = [&](std::size_t a, std::size_t b) {
      const int old_a = plan_.lots[a], old_b = b == kNone ? 0 : plan_.lots[b];
      bump(a);
      if (b != kNone) bump(b);
      const Trial trial = measure();
      plan_.lots[a] = old_a;
      if (b != kNone) plan_.lots[b] = old_b;
      const auto keys = score(trial);
      if (!keys) return;
      const double stock = remaining(a) + (b == kNone ? 0.0 : remaining(b));
      const Key key{keys->first, keys->second, stock};
      if (!best || key > *best) {
        best = key;
        best_a = a;
        best_b = b;
      }
    };
    for (int r = 0; r < cs.R; ++r) {
      const std::size_t c = cs.cell(t, p, r);
      if (ctx_->is_free[c]) consider(c, kNone);
    }
    if (!best) {
      for (int r1 = 0; r1 < cs.R; ++r1) {
        const std::size_t c1 = cs.cell(t, p, r1);
        if (!ctx_->is_free[c1]) continue;
        for (int r2 = r1; r2 < cs.R; ++r2) {
          const std::size_t c2 = cs.cell(t, p, r2);
          if (ctx_->is_free[c2]) consider(c1, c2);
        }
      }
    }
    if (!best) return false;
    bump(best_a);
    if (best_b != kNone) bump(best_b);
    cur_ = measure();
    return true;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void bump(std::size_t c) {
    int& lots = plan_.lots[c];
    lots += lots == 0 ? ctx_->cs.logistics.min_lots_per_used_rom : 1;
  }

  // Tonnes of the cell's ROM not yet allotted anywhere in the horizon.
  double remaining(std::size_t c) const {
    const auto& cs = ctx_->cs;
    const int r = static_cast<int>(c % cs.R);
    double left = 0.0;
    for (double a : cs.roms[r].available) left += a;
    for (int t = 0; t < cs.H; ++t) {
      for (int p = 0; p < cs.P; ++p) left -= plan_.lots[cs.cell(t, p, r)] * cs.logistics.lot_size_tonnes;
    }
    return left;
  }

  Trial measure() {
    evaluate(ctx_->cs, plan_, ctx_->dc, ev_);
    ++*evaluations_;
    Trial t;
    t.feasible = ev_.feasible();
    t.objective = ev_.objective(ctx_->kind);
    t.infeasibility = ev_.infeasibility;
    t.hard = ev_.hard_infeasibility;
    t.sold = ev_.sold_tonnes;
    t.avg = ev_.sold_tonnes > 0.0 ? ev_.total_revenue / ev_.sold_tonnes : 0.0;
    return t;
  }

  const SearchContext* ctx_;
  DensePlan plan_;
  EvalResult ev_;
  std::size_t* evaluations_;
  Trial cur_;
};

constexpr double kEps = 1e-9;

bool no_worse(const Trial& trial, const Trial& cur) {
  return trial.hard <= cur.hard + kEps && trial.infeasibility <= cur.infeasibility + kEps;
}

double slack(double v) { return kEps * std::max(1.0, std::abs(v)); }

// Cut-point settings tried by the constructors: each level applies the same
// relative position along every washable ROM's cut choices.
std::vector<std::vector<DenseCut>> cut_levels(const SearchContext& ctx) {
  const auto& cs = ctx.cs;
  std::size_t levels = 1;
  for (int r : ctx.washable_roms) levels = std::max(levels, ctx.cut_choices[r].size());
  std::vector<std::vector<DenseCut>> out(levels, std::vector<DenseCut>(cs.R));
  for (std::size_t i = 0; i < levels; ++i) {
    for (int r : ctx.washable_roms) {
      const auto& choices = ctx.cut_choices[r];
      const std::size_t n = choices.size();
      const std::size_t at =
          levels == 1 ? n - 1 : static_cast<std::size_t>(std::lround(double(i) * double(n - 1) / double(levels - 1)));
      out[i][r] = choices[at];
    }
  }
  return out;
}

// Blends (t * P + p) period by period, products by descending base price.
std::vector<int> price_order(const CompiledScenario& cs) {
  std::vector<int> order;
  for (int t = 0; t < cs.H; ++t) {
    std::vector<int> ps(cs.P);
    std::iota(ps.begin(), ps.end(), 0);
    std::stable_sort(ps.begin(), ps.end(),
                     [&](int a, int b) { return cs.products[a].price[t] > cs.products[b].price[t]; });
    for (int p : ps) order.push_back(t * cs.P + p);
  }
  return order;
}

// Lot acceptance inside one blend, relative to the plan before the lot.
std::optional<Keys> lot_keys(Heuristic heuristic, const Trial& t, const Trial& cur) {
  if (!no_worse(t, cur)) return std::nullopt;
  switch (heuristic) {
    case Heuristic::ProfitFirst:
      if (t.objective <= cur.objective + slack(cur.objective)) return std::nullopt;
      return Keys{t.objective, 0.0};
    case Heuristic::AvgValue:
      if (t.sold <= cur.sold + kEps) return std::nullopt;
      if (cur.sold > 0.0 && t.avg < cur.avg - slack(cur.avg)) return std::nullopt;
      return Keys{t.avg, t.objective};
    case Heuristic::MaxTonnes:
      if (t.sold <= cur.sold + kEps) return std::nullopt;
      return Keys{t.sold, t.objective};
  }
  return std::nullopt;
}

void fill_blend(Builder& b, int pp, Heuristic heuristic) {
  while (b.step(pp, [&](const Trial& t) { return lot_keys(heuristic, t, b.current()); })) {
  }
}

DensePlan build(const SearchContext& ctx, Heuristic heuristic, const std::vector<DenseCut>& cuts,
                std::size_t& evaluations) {
  const auto& cs = ctx.cs;
  DensePlan start = empty_dense(cs);
  for (int r : ctx.washable_roms) {
    for (int t = 0; t < cs.H; ++t) start.cuts[static_cast<std::size_t>(r) * cs.H + t] = cuts[r];
  }
  normalize(ctx, start);
  Builder b(ctx, std::move(start), evaluations);
  const std::vector<int> order = price_order(cs);

  // Contracts, exact tonnage targets, and other shortfalls first.
  const auto fill = [&](const Trial& t) -> std::optional<Keys> {
    const Trial& cur = b.current();
    if (t.hard > cur.hard + kEps || t.infeasibility >= cur.infeasibility - kEps) return std::nullopt;
    return Keys{t.objective, 0.0};
  };
  for (int pp : order) {
    while (b.step(pp, fill)) {
    }
  }

  if (heuristic == Heuristic::ProfitFirst) {
    for (int pp : order) fill_blend(b, pp, heuristic);
    return b.plan();
  }
  // Blend by blend: trial-fill every open blend and commit the one that ranks
  // best under the heuristic (highest resulting average revenue per tonne, or
  // most tonnes added).
  std::vector<int> open = order;
  while (!open.empty()) {
    std::optional<Builder> best;
    std::size_t best_at = 0;
    Keys best_keys{};
    for (std::size_t i = 0; i < open.size(); ++i) {
      Builder trial = b;
      fill_blend(trial, open[i], heuristic);
      const Trial& t = trial.current();
      if (t.sold <= b.current().sold + kEps) continue;
      const Keys keys = heuristic == Heuristic::AvgValue ? Keys{t.avg, t.objective} : Keys{t.sold, t.objective};
      if (!best || keys > best_keys) {
        best = std::move(trial);
        best_at = i;
        best_keys = keys;
      }
    }
    if (!best) break;
    b = std::move(*best);
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(best_at));
  }
  return b.plan();
}

// Ranking of finished constructions under each heuristic's own criterion.
std::tuple<bool, double, double> rank(Heuristic heuristic, const EvalResult& ev, ObjectiveKind kind) {
  const double obj = ev.objective(kind);
  if (!ev.feasible()) return {false, -ev.infeasibility, obj};
  switch (heuristic) {
    case Heuristic::AvgValue:
      return {ev.feasible(), ev.sold_tonnes > 0.0 ? ev.total_revenue / ev.sold_tonnes : 0.0, obj};
    case Heuristic::MaxTonnes:
      return {ev.feasible(), ev.sold_tonnes, obj};
    case Heuristic::ProfitFirst:
      break;
  }
  return {true, obj, 0.0};
}

}  // namespace

DensePlan construct(const SearchContext& ctx, Heuristic heuristic, std::size_t& evaluations) {
  std::optional<DensePlan> best;
  std::tuple<bool, double, double> best_rank;
  EvalResult ev;
  for (const auto& cuts : cut_levels(ctx)) {
    DensePlan plan = build(ctx, heuristic, cuts, evaluations);
    repair_dense(ctx, plan, ev);
    const auto r = rank(heuristic, ev, ctx.kind);
    if (!best || r > best_rank) {
      best = std::move(plan);
      best_rank = r;
    }
  }
  strip_unused_cuts(ctx.cs, *best);
  return *best;
}

}  // namespace blendforge::detail
