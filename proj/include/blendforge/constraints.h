#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "blendforge/types.h"

namespace blendforge {

// Hard constraints layered over a scenario, typically compiled from planner
// directives. Each entry remembers the directive it came from so conflicts and
// binding constraints can be named.
struct ConstraintSet {
  struct Pin {
    int lots{0};
    std::string source;
    bool operator==(const Pin&) const = default;
  };
  struct Exclusion {
    std::string source;
    bool operator==(const Exclusion&) const = default;
  };
  struct QualityBound {
    std::string product;
    int period{0};
    std::string attribute;
    double bound{0.0};
    bool upper{true};
    std::string source;
    bool operator==(const QualityBound&) const = default;
  };
  struct TonnageBound {
    std::string product;
    int period{0};
    double bound{0.0};
    bool lower{true};
    std::string source;
    bool operator==(const TonnageBound&) const = default;
  };
  struct Reserve {
    std::string rom;
    double tonnes{0.0};
    int until_period{0};
    std::string source;
    bool operator==(const Reserve&) const = default;
  };

  std::map<AllotmentKey, Pin> pins;
  std::map<AllotmentKey, Exclusion> exclusions;
  std::vector<QualityBound> quality_bounds;
  std::vector<TonnageBound> tonnage_bounds;
  std::vector<Reserve> reserves;

  bool empty() const {
    return pins.empty() && exclusions.empty() && quality_bounds.empty() && tonnage_bounds.empty() &&
           reserves.empty();
  }

  bool operator==(const ConstraintSet&) const = default;
};

}  // namespace blendforge
