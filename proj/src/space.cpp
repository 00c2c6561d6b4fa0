#include "blendforge/space.h"

#include <algorithm>
#include <cmath>

#include "blendforge/errors.h"
#include "engine.h"

namespace blendforge {

BigInt count_compositions(long long n, long long k) {
  if (k < 1) throw DomainError("composition count needs k >= 1");
  if (n < 0) throw DomainError("composition count needs n >= 0");
  // C(n + k - 1, k - 1) by the multiplicative formula; every partial product
  // is itself a binomial coefficient, so the division is exact.
  BigInt result = 1;
  const long long top = n + k - 1;
  const long long choose = std::min(k - 1, n);
  for (long long i = 1; i <= choose; ++i) {
    result *= top - choose + i;
    result /= i;
  }
  return result;
}

BigInt count_blend_space(const SpaceSummary& summary) {
  for (const auto& b : summary.blends) {
    if (b.allotments < 0) throw DomainError("blend " + b.label + " has negative allotments");
    if (b.roms.empty() && !b.slack && b.allotments > 0) return 0;
  }
  auto blend_count = [](const SpaceSummary::Blend& b) -> BigInt {
    const long long k = static_cast<long long>(b.roms.size()) + (b.slack ? 1 : 0);
    if (k == 0) return b.allotments == 0 ? 1 : 0;
    return count_compositions(b.allotments, k);
  };
  if (summary.caps.empty()) {
    BigInt total = 1;
    for (const auto& b : summary.blends) total *= blend_count(b);
    return total;
  }

  // Dynamic programming over blends; the state is the lots already consumed
  // from each capped ROM.
  std::vector<std::string> capped;
  for (const auto& [rom, _] : summary.caps) capped.push_back(rom);
  std::map<std::vector<long long>, BigInt> states;
  states[std::vector<long long>(capped.size(), 0)] = 1;
  for (const auto& blend : summary.blends) {
    std::vector<std::size_t> idx;
    long long free_slots = blend.slack ? 1 : 0;
    for (const auto& rom : blend.roms) {
      auto it = std::find(capped.begin(), capped.end(), rom);
      if (it == capped.end()) {
        ++free_slots;
      } else {
        idx.push_back(static_cast<std::size_t>(it - capped.begin()));
      }
    }
    std::map<std::vector<long long>, BigInt> next;
    for (const auto& [usage, ways] : states) {
      std::vector<long long> alloc(idx.size(), 0);
      std::function<void(std::size_t, long long)> rec = [&](std::size_t j, long long remaining) {
        if (j == idx.size()) {
          BigInt fill;
          if (free_slots == 0) {
            fill = remaining == 0 ? 1 : 0;
          } else {
            fill = count_compositions(remaining, free_slots);
          }
          if (fill == 0) return;
          std::vector<long long> used = usage;
          for (std::size_t q = 0; q < idx.size(); ++q) used[idx[q]] += alloc[q];
          next[used] += ways * fill;
          return;
        }
        const long long room = summary.caps.at(capped[idx[j]]) - usage[idx[j]];
        for (long long a = 0; a <= std::min(room, remaining); ++a) {
          alloc[j] = a;
          rec(j + 1, remaining - a);
        }
      };
      rec(0, blend.allotments);
    }
    states = std::move(next);
  }
  BigInt total = 0;
  for (const auto& [_, ways] : states) total += ways;
  return total;
}

SpaceSummary summarize(const Scenario& scenario) {
  const auto cs = detail::compile(scenario);
  SpaceSummary out;
  std::vector<std::string> roms;
  for (const auto& r : cs.roms) roms.push_back(r.id);
  for (int t = 0; t < cs.H; ++t) {
    for (int p = 0; p < cs.P; ++p) {
      const auto& prod = cs.products[p];
      out.blends.push_back({prod.id + "@" + std::to_string(t), prod.target_lots[t], roms,
                            prod.mode == TonnageMode::AtMost});
    }
  }
  return out;
}

namespace {

detail::CompiledScenario compile_with_grid(const Scenario& scenario, const std::vector<double>& grid) {
  if (grid.empty()) return detail::compile(scenario);
  Scenario copy = scenario;
  copy.cut_point_grid = grid;
  return detail::compile(copy);
}

struct CutSlot {
  int r;
  int t;
  std::vector<detail::DenseCut> options;
};

std::vector<CutSlot> cut_slots(const detail::CompiledScenario& cs) {
  std::vector<CutSlot> slots;
  for (int r = 0; r < cs.R; ++r) {
    if (!cs.washable(r)) continue;
    for (int t = 0; t < cs.H; ++t) {
      CutSlot slot{r, t, {}};
      for (double d : cs.roms[r].cut_options) slot.options.push_back({true, false, d});
      if (cs.roms[r].curve->bypass_allowed) slot.options.push_back({true, true, 0.0});
      slots.push_back(std::move(slot));
    }
  }
  return slots;
}

BigInt slot_combinations(const std::vector<CutSlot>& slots) {
  BigInt total = 1;
  for (const auto& s : slots) total *= s.options.size();
  return total;
}

// Odometer over all compositions of every (period, product) blend and every
// cut-point setting.
class DenseEnumerator {
 public:
  DenseEnumerator(detail::CompiledScenario cs, std::uint64_t limit) : cs_(std::move(cs)), slots_(cut_slots(cs_)) {
    for (int t = 0; t < cs_.H; ++t) {
      for (int p = 0; p < cs_.P; ++p) {
        const auto& prod = cs_.products[p];
        Block b;
        b.t = t;
        b.p = p;
        b.n = prod.target_lots[t];
        b.parts = cs_.R + (prod.mode == TonnageMode::AtMost ? 1 : 0);
        blocks_.push_back(b);
      }
    }
    SpaceSummary summary = summarize_compiled();
    size_ = count_blend_space(summary) * slot_combinations(slots_);
    if (size_ > limit) throw SpaceTooLargeError(size_.str());
    plan_ = detail::empty_dense(cs_);
    for (auto& b : blocks_) {
      b.c.assign(std::max(b.parts, 1), 0);
      if (b.parts == 0) {
        if (b.n > 0) exhausted_ = true;
      } else {
        b.c.back() = b.n;
      }
      write_block(b);
    }
    slot_pos_.assign(slots_.size(), 0);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i].options.empty()) {
        exhausted_ = true;
      } else {
        write_slot(i);
      }
    }
    if (size_ == 0) exhausted_ = true;
  }

  const BigInt& size() const { return size_; }
  const detail::CompiledScenario& compiled() const { return cs_; }

  // Yields the current plan and advances. False when exhausted.
  bool next(const detail::DensePlan*& out) {
    if (exhausted_) return false;
    if (started_ && !advance()) {
      exhausted_ = true;
      return false;
    }
    started_ = true;
    out = &plan_;
    return true;
  }

 private:
  struct Block {
    int t, p, n, parts;
    std::vector<int> c;  // composition; the last part is slack when parts > R
  };

  SpaceSummary summarize_compiled() const {
    SpaceSummary s;
    std::vector<std::string> roms;
    for (const auto& r : cs_.roms) roms.push_back(r.id);
    for (const auto& b : blocks_) {
      s.blends.push_back({"", b.n, roms, b.parts > cs_.R});
    }
    return s;
  }

  void write_block(const Block& b) {
    for (int r = 0; r < cs_.R; ++r) plan_.lots[cs_.cell(b.t, b.p, r)] = b.c[r];
  }

  void write_slot(std::size_t i) {
    const auto& s = slots_[i];
    plan_.cuts[static_cast<std::size_t>(s.r) * cs_.H + s.t] = s.options[slot_pos_[i]];
  }

  // Next composition in lexicographic order: the free parts c[0..m-2] run as
  // an odometer bounded by n, the last part takes the remainder.
  static bool next_composition(Block& b) {
    const int m = b.parts;
    if (m <= 1) return false;
    int prefix = b.n - b.c[m - 1];
    for (int i = m - 2; i >= 0; --i) {
      if (prefix < b.n) {
        ++b.c[i];
        b.c[m - 1] = b.n - prefix - 1;
        return true;
      }
      prefix -= b.c[i];
      b.c[i] = 0;
    }
    b.c[m - 1] = b.n;
    return false;
  }

  bool advance() {
    for (std::size_t i = slots_.size(); i-- > 0;) {
      if (++slot_pos_[i] < slots_[i].options.size()) {
        write_slot(i);
        return true;
      }
      slot_pos_[i] = 0;
      write_slot(i);
    }
    for (std::size_t i = blocks_.size(); i-- > 0;) {
      if (next_composition(blocks_[i])) {
        write_block(blocks_[i]);
        return true;
      }
      write_block(blocks_[i]);
    }
    return false;
  }

  detail::CompiledScenario cs_;
  std::vector<CutSlot> slots_;
  std::vector<std::size_t> slot_pos_;
  std::vector<Block> blocks_;
  detail::DensePlan plan_;
  BigInt size_;
  bool started_{false};
  bool exhausted_{false};
};

}  // namespace

BigInt cut_point_combinations(const Scenario& scenario, const std::vector<double>& grid) {
  return slot_combinations(cut_slots(compile_with_grid(scenario, grid)));
}

struct PlanEnumerator::Impl {
  explicit Impl(detail::CompiledScenario cs, std::uint64_t limit) : dense(std::move(cs), limit) {}
  DenseEnumerator dense;
};

PlanEnumerator::PlanEnumerator(const Scenario& scenario, const std::vector<double>& grid, std::uint64_t limit)
    : impl_(std::make_unique<Impl>(compile_with_grid(scenario, grid), limit)) {}
PlanEnumerator::PlanEnumerator(PlanEnumerator&&) noexcept = default;
PlanEnumerator& PlanEnumerator::operator=(PlanEnumerator&&) noexcept = default;
PlanEnumerator::~PlanEnumerator() = default;

const BigInt& PlanEnumerator::size() const { return impl_->dense.size(); }

std::optional<BlendPlan> PlanEnumerator::next() {
  const detail::DensePlan* plan = nullptr;
  if (!impl_->dense.next(plan)) return std::nullopt;
  return detail::to_plan(impl_->dense.compiled(), *plan);
}

PlanEnumerator enumerate_plans(const Scenario& scenario, const std::vector<double>& grid, std::uint64_t limit) {
  return PlanEnumerator(scenario, grid, limit);
}

namespace {

class DenseView final : public EnumeratedPlanView {
 public:
  DenseView(const detail::CompiledScenario& cs, const detail::DensePlan& plan, const detail::EvalResult& ev,
            ObjectiveKind kind)
      : cs_(cs), plan_(plan), ev_(ev), kind_(kind) {}
  double objective() const override { return ev_.objective(kind_); }
  bool feasible() const override { return ev_.feasible(); }
  int lots(int period, const std::string& product, const std::string& rom) const override {
    const int p = cs_.product(product), r = cs_.rom(rom);
    if (p < 0 || r < 0 || period < 0 || period >= cs_.H) return 0;
    return plan_.lots[cs_.cell(period, p, r)];
  }
  BlendPlan plan() const override { return detail::to_plan(cs_, plan_); }

 private:
  const detail::CompiledScenario& cs_;
  const detail::DensePlan& plan_;
  const detail::EvalResult& ev_;
  ObjectiveKind kind_;
};

}  // namespace

std::uint64_t scan_plans(const Scenario& scenario, const std::vector<double>& grid, std::uint64_t limit,
                         ObjectiveKind kind, const ConstraintSet* constraints,
                         const std::function<void(const EnumeratedPlanView&)>& visit) {
  DenseEnumerator en(compile_with_grid(scenario, grid), limit);
  const auto& cs = en.compiled();
  std::optional<detail::DenseConstraints> dc;
  if (constraints && !constraints->empty()) dc = detail::compile_constraints(cs, *constraints);
  detail::EvalResult ev;
  const detail::DensePlan* plan = nullptr;
  std::uint64_t count = 0;
  while (en.next(plan)) {
    detail::evaluate(cs, *plan, dc ? &*dc : nullptr, ev);
    visit(DenseView(cs, *plan, ev, kind));
    ++count;
  }
  return count;
}

std::optional<EnumeratedOptimum> enumerated_optimum(const Scenario& scenario, const std::vector<double>& grid,
                                                    std::uint64_t limit, ObjectiveKind kind,
                                                    const ConstraintSet* constraints) {
  std::optional<EnumeratedOptimum> best;
  std::uint64_t feasible = 0;
  std::uint64_t total = scan_plans(scenario, grid, limit, kind, constraints, [&](const EnumeratedPlanView& v) {
    if (!v.feasible()) return;
    ++feasible;
    const double obj = v.objective();
    if (!best) {
      best = EnumeratedOptimum{v.plan(), obj, 0, 0, 1};
      return;
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(best->objective));
    if (obj > best->objective + tol) {
      best->plan = v.plan();
      best->objective = obj;
      best->optimal_plans = 1;
    } else if (std::abs(obj - best->objective) <= tol) {
      ++best->optimal_plans;
    }
  });
  if (best) {
    best->plans = total;
    best->feasible_plans = feasible;
  }
  return best;
}

}  // namespace blendforge
