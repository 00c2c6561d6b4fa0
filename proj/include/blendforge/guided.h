#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blendforge/constraints.h"
#include "blendforge/optimizer.h"
#include "blendforge/types.h"

namespace blendforge {

// Fix the lots of one allotment.
struct PinAllotment {
  int period{0};
  std::string product;
  std::string rom;
  int lots{0};
  bool operator==(const PinAllotment&) const = default;
};

// Move a blended attribute by `delta` absolute units (percentage points for
// percent attributes) from the incumbent, in every period of [first, last].
// Negative deltas become upper bounds, positive deltas lower bounds.
struct QualityDelta {
  std::string product;
  std::string attribute;
  double delta{0.0};
  int first_period{0};
  int last_period{0};
  bool operator==(const QualityDelta&) const = default;
};

// Move a product-period's produced tonnes by `delta` from the incumbent.
struct TonnageDelta {
  std::string product;
  int period{0};
  double delta{0.0};
  bool operator==(const TonnageDelta&) const = default;
};

// Keep a ROM out of a product (every product when empty) over [first, last].
struct ExcludeRom {
  std::string rom;
  std::string product;
  int first_period{0};
  int last_period{0};
  bool operator==(const ExcludeRom&) const = default;
};

// Leave `tonnes` of a ROM in stock at the end of every period up to `until`.
struct ReserveRom {
  std::string rom;
  double tonnes{0.0};
  int until_period{0};
  bool operator==(const ReserveRom&) const = default;
};

using Directive = std::variant<PinAllotment, QualityDelta, TonnageDelta, ExcludeRom, ReserveRom>;

// Stable one-line description, used to name directives in conflicts and
// binding-constraint reports.
std::string describe(const Directive& directive);

// Compiles directives against the incumbent into hard constraints, merged
// onto `base`. Throws DirectiveError for directives that do not validate and
// DirectiveConflictError naming the first contradictory pair.
ConstraintSet compile_directives(const std::vector<Directive>& directives, const Scenario& scenario,
                                 const BlendPlan& incumbent, const ConstraintSet& base = {});

struct HistoryEntry {
  std::vector<Directive> directives;
  OptimizeResult result;
};

struct Session {
  std::string id;
  Scenario scenario;
  Strategy strategy;
  BlendPlan incumbent;
  // Every directive applied so far, in order, and their compiled constraints.
  std::vector<Directive> directives;
  ConstraintSet constraints;
  // Opening run first, then one entry per successful guided run.
  std::vector<HistoryEntry> history;
};

Session open_session(const Scenario& scenario, const Strategy& strategy, std::string id = {});

struct GuidedResult {
  bool success{false};
  OptimizeResult result;
  // On failure: the violation that kept the best plan infeasible, and the
  // directive (or scenario constraint) it belongs to.
  std::optional<Violation> binding;
  std::string binding_source;
};

// Hard-constrained re-optimization warm-started from the incumbent. Among
// plans within 0.1% of the best objective found, returns the one closest to
// the incumbent (lot-assignment L1 distance). Success replaces the incumbent
// and appends history; failure leaves the session untouched.
GuidedResult guided_reoptimize(Session& session, const std::vector<Directive>& directives);

// Same run without touching the session.
GuidedResult preview(const Session& session, const std::vector<Directive>& directives);

const std::vector<HistoryEntry>& session_history(const Session& session);

// Re-opens the session and re-applies every recorded directive set.
Session replay(const Scenario& scenario, const Strategy& strategy, const std::vector<HistoryEntry>& history);

inline constexpr double kMinimalChangeTolerance = 1e-3;

}  // namespace blendforge
