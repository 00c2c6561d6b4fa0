#include <doctest.h>

#include <cmath>

#include "blendforge/errors.h"
#include "blendforge/evaluate.h"
#include "blendforge/guided.h"
#include "blendforge/space.h"
#include "support/toys.h"

using namespace blendforge;

namespace {

Strategy anneal(double seed = 42, double budget = 20000) {
  Strategy s;
  s.name = "anneal";
  s.parameters["seed"] = seed;
  s.parameters["budgetEvaluations"] = budget;
  return s;
}

// Three ROMs spanning 6-14% ash, two products; small enough to enumerate.
Scenario guided_toy() {
  return toys::single_period({toys::rom("A", 6, {5000}), toys::rom("B", 10, {12000}), toys::rom("C", 14, {12000})},
                             {toys::product("P", 12, {120}, {6000}), toys::product("Q", 13, {90}, {5000})});
}

double ash_of(const Scenario& s, const BlendPlan& p, const std::string& product, int period = 0) {
  const auto r = evaluate_plan(s, p);
  const auto* row = r.find(product, period);
  return row ? row->quality.at("ash") : std::nan("");
}

long long distance(const BlendPlan& a, const BlendPlan& b) {
  std::map<AllotmentKey, int> all = a.allotments;
  for (const auto& [k, _] : b.allotments) all.try_emplace(k, 0);
  long long d = 0;
  for (const auto& [k, _] : all) {
    auto ia = a.allotments.find(k);
    auto ib = b.allotments.find(k);
    d += std::abs((ia == a.allotments.end() ? 0 : ia->second) - (ib == b.allotments.end() ? 0 : ib->second));
  }
  return d;
}

}  // namespace

TEST_CASE("compile: empty directive list gives an empty constraint set") {
  const Scenario s = guided_toy();
  CHECK(compile_directives({}, s, BlendPlan{}).empty());
}

TEST_CASE("compile: lower ash by two points from 9.5%") {
  Scenario s = toys::single_period({toys::rom("A", 8, {50000}), toys::rom("B", 11, {50000})},
                                   {toys::product("P", 12, {100}, {10000})});
  BlendPlan inc;
  inc.set_lots(0, "P", "A", 3);
  inc.set_lots(0, "P", "B", 3);
  REQUIRE(ash_of(s, inc, "P") == doctest::Approx(9.5));
  const auto set = compile_directives({QualityDelta{"P", "ash", -2.0, 0, 0}}, s, inc);
  REQUIRE(set.quality_bounds.size() == 1);
  CHECK(set.quality_bounds[0].upper);
  CHECK(set.quality_bounds[0].bound == doctest::Approx(7.5));
  CHECK(set.quality_bounds[0].source == "quality P ash -2 periods 0-0");
}

TEST_CASE("compile: raise tonnage by 10 kt from 90 kt") {
  Scenario s = toys::single_period({toys::rom("A", 8, {200000})}, {toys::product("P", 12, {100}, {150000})});
  BlendPlan inc;
  inc.set_lots(0, "P", "A", 90);
  const auto set = compile_directives({TonnageDelta{"P", 0, 10000}}, s, inc);
  REQUIRE(set.tonnage_bounds.size() == 1);
  CHECK(set.tonnage_bounds[0].lower);
  CHECK(set.tonnage_bounds[0].bound == doctest::Approx(100000));
}

TEST_CASE("compile: pins, exclusions and reserves") {
  const Scenario s = guided_toy();
  const auto set = compile_directives({PinAllotment{0, "P", "A", 2}, ExcludeRom{"C", "", 0, 0}, ReserveRom{"B", 3000, 0}},
                                      s, BlendPlan{});
  CHECK(set.pins.at({0, "P", "A"}).lots == 2);
  CHECK(set.exclusions.count({0, "P", "C"}) == 1);
  CHECK(set.exclusions.count({0, "Q", "C"}) == 1);
  REQUIRE(set.reserves.size() == 1);
  CHECK(set.reserves[0].tonnes == 3000);
}

TEST_CASE("compile: contradictions name both directives") {
  const Scenario s = guided_toy();
  const Directive pin = PinAllotment{0, "P", "A", 2};
  const Directive exclude = ExcludeRom{"A", "P", 0, 0};
  try {
    compile_directives({pin, exclude}, s, BlendPlan{});
    FAIL("expected a conflict");
  } catch (const DirectiveConflictError& e) {
    CHECK(e.first() == describe(pin));
    CHECK(e.second() == describe(exclude));
  }
  CHECK_THROWS_AS(compile_directives({PinAllotment{0, "P", "A", 2}, PinAllotment{0, "P", "A", 3}}, s, BlendPlan{}),
                  DirectiveConflictError);
  // Pinning to zero agrees with an exclusion.
  CHECK_NOTHROW(compile_directives({PinAllotment{0, "P", "A", 0}, exclude}, s, BlendPlan{}));

  BlendPlan inc;
  inc.set_lots(0, "P", "B", 4);
  CHECK_THROWS_AS(compile_directives({QualityDelta{"P", "ash", -1, 0, 0}, QualityDelta{"P", "ash", 1, 0, 0}}, s, inc),
                  DirectiveConflictError);
}

TEST_CASE("compile: invalid directives are rejected") {
  const Scenario s = guided_toy();
  BlendPlan inc;
  inc.set_lots(0, "P", "B", 4);
  CHECK_THROWS_AS(compile_directives({PinAllotment{0, "X", "A", 1}}, s, inc), DirectiveError);
  CHECK_THROWS_AS(compile_directives({PinAllotment{0, "P", "Z", 1}}, s, inc), DirectiveError);
  CHECK_THROWS_AS(compile_directives({PinAllotment{3, "P", "A", 1}}, s, inc), DirectiveError);
  CHECK_THROWS_AS(compile_directives({PinAllotment{0, "P", "A", -1}}, s, inc), DirectiveError);
  CHECK_THROWS_AS(compile_directives({QualityDelta{"P", "ash", NAN, 0, 0}}, s, inc), DirectiveError);
  CHECK_THROWS_AS(compile_directives({QualityDelta{"P", "moisture", -1, 0, 0}}, s, inc), DirectiveError);
  CHECK_THROWS_AS(compile_directives({QualityDelta{"Q", "ash", -1, 0, 0}}, s, inc), DirectiveError);
  CHECK_THROWS_AS(compile_directives({ReserveRom{"A", -5, 0}}, s, inc), DirectiveError);
  CHECK_THROWS_AS(compile_directives({TonnageDelta{"P", 0, INFINITY}}, s, inc), DirectiveError);
}

TEST_CASE("sessions open on a fresh optimize result") {
  const Scenario s = guided_toy();
  const Session a = open_session(s, anneal());
  const Session b = open_session(s, anneal());
  CHECK(a.incumbent == optimize(s, anneal()).plan);
  CHECK(a.incumbent == b.incumbent);
  CHECK(a.directives.empty());
  CHECK(session_history(a).size() == 1);

  const Session empty = open_session(toys::single_period({}, {}), anneal());
  CHECK(empty.incumbent.empty());
}

TEST_CASE("guided: empty directives never lose objective") {
  const Scenario s = guided_toy();
  Session session = open_session(s, anneal(1, 200));
  const double before = evaluate_plan(s, session.incumbent).npv;
  const auto r = guided_reoptimize(session, {});
  CHECK(r.success);
  CHECK(r.result.objective >= before - 1e-6);
}

TEST_CASE("guided: lowering ash by two points") {
  const Scenario s = guided_toy();
  Session session = open_session(s, anneal());
  const double ash = ash_of(s, session.incumbent, "P");
  REQUIRE(std::isfinite(ash));
  const std::vector<Directive> d = {QualityDelta{"P", "ash", -2.0, 0, 0}};

  // Oracle: a satisfying plan exists.
  const ConstraintSet set = compile_directives(d, s, session.incumbent);
  const auto best = enumerated_optimum(s, {}, 1'000'000, ObjectiveKind::Npv, &set);
  REQUIRE(best);

  const auto r = guided_reoptimize(session, d);
  REQUIRE(r.success);
  CHECK(ash_of(s, r.result.plan, "P") <= ash - 2.0 + 1e-9);
  CHECK(r.result.report.feasible());
  CHECK(session.incumbent == r.result.plan);
  CHECK(session.directives == d);
  CHECK(r.result.objective >= best->objective * (1 - kMinimalChangeTolerance) - 1e-6);
}

TEST_CASE("guided: impossible quality leaves the incumbent alone") {
  const Scenario s = guided_toy();
  Session session = open_session(s, anneal());
  const Session before = session;
  const double ash = ash_of(s, session.incumbent, "P");
  // Below the cleanest ROM: no blend can get there.
  const Directive d = QualityDelta{"P", "ash", 5.0 - ash, 0, 0};
  const auto r = guided_reoptimize(session, {d});
  CHECK_FALSE(r.success);
  REQUIRE(r.binding.has_value());
  CHECK(r.binding_source == describe(d));
  CHECK(session.incumbent == before.incumbent);
  CHECK(session.history.size() == before.history.size());
  CHECK(session.constraints == before.constraints);
}

TEST_CASE("guided: pins appear verbatim") {
  const Scenario s = guided_toy();
  Session session = open_session(s, anneal());
  const auto r = guided_reoptimize(session, {PinAllotment{0, "Q", "A", 3}, ExcludeRom{"B", "P", 0, 0}});
  REQUIRE(r.success);
  CHECK(r.result.plan.lots(0, "Q", "A") == 3);
  CHECK(r.result.plan.lots(0, "P", "B") == 0);
  // Later runs keep earlier directives.
  const auto r2 = guided_reoptimize(session, {});
  REQUIRE(r2.success);
  CHECK(r2.result.plan.lots(0, "Q", "A") == 3);
  CHECK(r2.result.plan.lots(0, "P", "B") == 0);
}

TEST_CASE("guided: the returned plan is the closest near-optimal plan") {
  const Scenario s = guided_toy();
  Session session = open_session(s, anneal());
  const std::vector<Directive> d = {PinAllotment{0, "P", "A", 1}};
  const ConstraintSet set = compile_directives(d, s, session.incumbent);
  const auto best = enumerated_optimum(s, {}, 1'000'000, ObjectiveKind::Npv, &set);
  REQUIRE(best);
  const double floor = best->objective - kMinimalChangeTolerance * std::abs(best->objective);
  long long closest = -1;
  scan_plans(s, {}, 1'000'000, ObjectiveKind::Npv, &set, [&](const EnumeratedPlanView& v) {
    if (!v.feasible() || v.objective() < floor) return;
    const long long dd = distance(v.plan(), session.incumbent);
    if (closest < 0 || dd < closest) closest = dd;
  });
  const BlendPlan incumbent = session.incumbent;
  const auto r = guided_reoptimize(session, d);
  REQUIRE(r.success);
  CHECK(r.result.objective >= floor - 1e-6);
  CHECK(distance(r.result.plan, incumbent) == closest);
}

TEST_CASE("preview does not touch the session") {
  const Scenario s = guided_toy();
  const Session session = open_session(s, anneal());
  Session copy = session;
  const auto p = preview(session, {PinAllotment{0, "Q", "A", 2}});
  CHECK(p.success);
  const auto g = guided_reoptimize(copy, {PinAllotment{0, "Q", "A", 2}});
  CHECK(p.result == g.result);
  CHECK(session.history.size() == 1);
}

TEST_CASE("history grows in order and replays exactly") {
  const Scenario s = guided_toy();
  const Strategy st = anneal(7, 5000);
  Session session = open_session(s, st);
  const std::vector<std::vector<Directive>> runs = {
      {PinAllotment{0, "Q", "A", 1}}, {ExcludeRom{"C", "P", 0, 0}}, {TonnageDelta{"Q", 0, -1000}}};
  for (const auto& d : runs) REQUIRE(guided_reoptimize(session, d).success);
  const auto& h = session_history(session);
  REQUIRE(h.size() == 4);
  CHECK(h[0].directives.empty());
  for (std::size_t i = 0; i < runs.size(); ++i) CHECK(h[i + 1].directives == runs[i]);
  CHECK(h.back().result.plan == session.incumbent);
  const Session again = replay(s, st, h);
  CHECK(again.incumbent == session.incumbent);
  CHECK(again.history.size() == 4);
}
