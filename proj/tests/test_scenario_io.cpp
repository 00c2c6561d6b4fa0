#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "blendforge/errors.h"
#include "blendforge/evaluate.h"
#include "blendforge/run_log.h"
#include "blendforge/scenario_io.h"
#include "blendforge/serialize.h"
#include "support/toys.h"

using namespace blendforge;
namespace le = load_error;
namespace fs = std::filesystem;

namespace {

// A scenario exercising every optional part of the format.
Scenario full_scenario() {
  Scenario s = toys::utilization();
  s.horizon_periods = 1;
  s.registry = AttributeRegistry({{"ash", Unit::Percent, true}, {"csn", Unit::Index, false}, {"cv", Unit::MegajoulePerKg, false}});
  for (auto& r : s.roms) {
    r.quality["csn"] = 6.5;
    r.quality["cv"] = 27.1;
    r.excavation_day = 12;
    r.degradation.rate_per_day["cv"] = -0.01;
    r.degradation.cap["cv"] = 1.5;
    r.haul_hours_per_tonne = 0.003;
    r.staging_haul_hours_per_tonne = 0.002;
  }
  s.products[0].range["csn"] = {5.0, 9.0};
  s.products[0].contract_min_tonnes = {3000};
  s.products[0].tonnage_mode = TonnageMode::Exact;
  s.logistics.haul_fleet_hours = std::vector<double>{400};
  s.logistics.rehandle_loss_fraction = 0.02;
  s.logistics.rehandle_cost_per_tonne = 1.25;
  s.logistics.haul_cost_per_hour = 180;
  s.logistics.min_lots_per_used_rom = 2;
  s.logistics.max_rom_types_per_blend = 4;
  s.market.discount_rate_per_period = 0.01;
  s.strategy_overrides["anneal"]["initialTemperature"] = 1.5;
  return s;
}

Json base_doc() { return Json::parse(save_scenario(full_scenario())); }

std::vector<FieldError> errors_of(const std::string& text) {
  try {
    load_scenario(text);
  } catch (const ValidationError& e) {
    return e.errors();
  }
  return {};
}

bool has(const std::vector<FieldError>& errors, std::string_view code, const std::string& path) {
  for (const auto& e : errors) {
    if (e.code == code && e.path == path) return true;
  }
  return false;
}

Scenario random_valid(std::uint64_t seed) {
  Rng rng(seed);
  Scenario s = toys::random_small(seed);
  for (auto& r : s.roms) {
    r.excavation_day = static_cast<int>(rng.below(40)) - 10;
    if (rng.chance(0.5)) {
      r.degradation.rate_per_day["sulfur"] = 0.001 * rng.uniform();
      r.degradation.cap["sulfur"] = rng.uniform();
    }
    r.haul_hours_per_tonne = rng.uniform() / 7.0;
    r.staging_haul_hours_per_tonne = r.haul_hours_per_tonne * rng.uniform();
  }
  for (auto& p : s.products) {
    for (auto& c : p.contract_min_tonnes) c = 1000.0 * static_cast<double>(rng.below(3));
    if (rng.chance(0.5)) p.tonnage_mode = TonnageMode::Exact;
    for (auto& price : p.base_price) price = 50.0 + 100.0 * rng.uniform();
  }
  if (rng.chance(0.5)) s.logistics.haul_fleet_hours = std::vector<double>(s.horizon_periods, 100.0 * rng.uniform());
  if (rng.chance(0.5)) s.logistics.wash_capacity_tonnes = std::vector<double>(s.horizon_periods, 5000.0 * rng.uniform());
  s.logistics.lot_size_tonnes = rng.chance(0.5) ? 1000.0 : 500.0;
  s.logistics.rehandle_loss_fraction = 0.1 * rng.uniform();
  s.market.discount_rate_per_period = 0.1 * rng.uniform();
  s.days_per_period = 7 + static_cast<int>(rng.below(30));
  if (rng.chance(0.3)) s.strategy_overrides["local-search"]["restarts"] = static_cast<double>(1 + rng.below(5));
  return s;
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("blendforge_io_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("minimal document takes the defaults") {
  const Scenario s = load_scenario(R"({"schemaVersion": 1, "horizonPeriods": 2,
      "attributes": [{"code": "ash", "unit": "percent"}]})");
  CHECK(s.horizon_periods == 2);
  CHECK(s.days_per_period == 30);
  CHECK(s.logistics.lot_size_tonnes == 1000.0);
  CHECK(s.logistics.min_lots_per_used_rom == 1);
  CHECK_FALSE(s.logistics.haul_fleet_hours.has_value());
  CHECK(s.market.discount_rate_per_period == 0.0);
  CHECK(s.roms.empty());
  CHECK(s.products.empty());
  CHECK(s.registry.contains("ash"));
}

TEST_CASE("optional per-ROM and per-product fields default sensibly") {
  const Scenario s = load_scenario(R"({"schemaVersion": 1, "horizonPeriods": 2,
      "attributes": [{"code": "ash", "unit": "percent"}],
      "roms": [{"id": "R", "availableTonnes": [1, 2], "quality": {"ash": 9}, "haulHoursPerTonne": 0.01}],
      "products": [{"id": "P", "basePricePerTonne": [1, 1], "tonnageTargetTonnes": [0, 0]}]})");
  CHECK(s.roms[0].staging_haul_hours_per_tonne == 0.01);
  CHECK_FALSE(s.roms[0].curve.has_value());
  CHECK(s.products[0].contract_min_tonnes == std::vector<double>{0, 0});
  CHECK(s.products[0].tonnage_mode == TonnageMode::AtMost);
}

TEST_CASE("yield above one names the knot") {
  Json doc = base_doc();
  doc["roms"][1]["washCurve"]["knots"][2]["yieldFraction"] = 1.2;
  const auto errors = errors_of(doc.dump());
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].code == "curve-yield-range");
  CHECK(errors[0].path == "roms[1].washCurve.knots[2].yieldFraction");
}

TEST_CASE("every invariant has its own error code") {
  struct Case {
    std::string_view code;
    std::string path;
    std::function<void(Json&)> mutate;
  };
  const std::vector<Case> cases = {
      {le::kUnknownField, "roms[0].colour", [](Json& d) { d["roms"][0]["colour"] = "black"; }},
      {le::kUnknownField, "extra", [](Json& d) { d["extra"] = 1; }},
      {le::kMissingField, "horizonPeriods", [](Json& d) { d.erase("horizonPeriods"); }},
      {le::kMissingField, "roms[0].quality", [](Json& d) { d["roms"][0].erase("quality"); }},
      {le::kType, "daysPerPeriod", [](Json& d) { d["daysPerPeriod"] = "thirty"; }},
      {le::kType, "products[0].id", [](Json& d) { d["products"][0]["id"] = 7; }},
      {le::kHorizon, "horizonPeriods", [](Json& d) {
         d["horizonPeriods"] = 0;
         d["roms"] = Json::array();
         d["products"] = Json::array();
         d["logistics"].erase("haulFleetHours");
         d["logistics"].erase("washCapacityTonnes");
       }},
      {le::kDaysPerPeriod, "daysPerPeriod", [](Json& d) { d["daysPerPeriod"] = 0; }},
      {le::kPeriodCount, "roms[0].availableTonnes", [](Json& d) { d["roms"][0]["availableTonnes"].push_back(5); }},
      {le::kAttributeCodeEmpty, "attributes[1].code", [](Json& d) { d["attributes"][1]["code"] = ""; }},
      {le::kAttributeCodeDuplicate, "attributes[2].code", [](Json& d) { d["attributes"][2]["code"] = "ash"; }},
      {le::kUnknownAttribute, "roms[0].quality.vm", [](Json& d) { d["roms"][0]["quality"]["vm"] = 20; }},
      {le::kMissingAttribute, "roms[1].quality.csn", [](Json& d) { d["roms"][1]["quality"].erase("csn"); }},
      {le::kPercentRange, "roms[0].quality.ash", [](Json& d) { d["roms"][0]["quality"]["ash"] = 101; }},
      {le::kCurveKnots, "roms[1].washCurve.knots", [](Json& d) {
         auto& k = d["roms"][1]["washCurve"]["knots"];
         k = Json::array({k[0]});
       }},
      {le::kCurveDensityOrder, "roms[1].washCurve.knots[1].densityGcc",
       [](Json& d) { d["roms"][1]["washCurve"]["knots"][1]["densityGcc"] = 1.40; }},
      {le::kCurveAshOrder, "roms[1].washCurve.knots[1].productAshPercent",
       [](Json& d) { d["roms"][1]["washCurve"]["knots"][1]["productAshPercent"] = 7.0; }},
      {le::kCurveYieldOrder, "roms[1].washCurve.knots[1].yieldFraction",
       [](Json& d) { d["roms"][1]["washCurve"]["knots"][1]["yieldFraction"] = 0.5; }},
      {le::kDegradationCap, "roms[0].degradation.cap.cv", [](Json& d) { d["roms"][0]["degradation"]["cap"]["cv"] = -1; }},
      {le::kRomIdEmpty, "roms[0].id", [](Json& d) { d["roms"][0]["id"] = ""; }},
      {le::kRomIdDuplicate, "roms[1].id", [](Json& d) { d["roms"][1]["id"] = d["roms"][0]["id"]; }},
      {le::kAvailableTonnes, "roms[0].availableTonnes[0]", [](Json& d) { d["roms"][0]["availableTonnes"][0] = -1; }},
      {le::kHaulRate, "roms[0].haulHoursPerTonne", [](Json& d) {
         d["roms"][0]["haulHoursPerTonne"] = -1;
         d["roms"][0]["stagingHaulHoursPerTonne"] = -2;
       }},
      {le::kStagingRate, "roms[0].stagingHaulHoursPerTonne",
       [](Json& d) { d["roms"][0]["stagingHaulHoursPerTonne"] = 0.01; }},
      {le::kProductIdEmpty, "products[0].id", [](Json& d) { d["products"][0]["id"] = ""; }},
      {le::kProductIdDuplicate, "products[1].id", [](Json& d) { d["products"].push_back(d["products"][0]); }},
      {le::kRangeOrder, "products[0].range.csn", [](Json& d) { d["products"][0]["range"]["csn"]["min"] = 10; }},
      {le::kAdjustmentTarget, "products[0].adjustments.ash.target",
       [](Json& d) { d["products"][0]["adjustments"]["ash"]["target"] = 20; }},
      {le::kBasePrice, "products[0].basePricePerTonne[0]", [](Json& d) { d["products"][0]["basePricePerTonne"][0] = -3; }},
      {le::kContractTonnes, "products[0].contractMinTonnes[0]",
       [](Json& d) { d["products"][0]["contractMinTonnes"][0] = -3; }},
      {le::kTargetTonnes, "products[0].tonnageTargetTonnes[0]",
       [](Json& d) { d["products"][0]["tonnageTargetTonnes"][0] = -3; }},
      {le::kTonnageMode, "products[0].tonnageMode", [](Json& d) { d["products"][0]["tonnageMode"] = "around"; }},
      {le::kUnit, "attributes[0].unit", [](Json& d) { d["attributes"][0]["unit"] = "ppm"; }},
      {le::kLotSize, "logistics.lotSizeTonnes", [](Json& d) { d["logistics"]["lotSizeTonnes"] = 0; }},
      {le::kMinLots, "logistics.minLotsPerUsedRom", [](Json& d) { d["logistics"]["minLotsPerUsedRom"] = 0; }},
      {le::kMaxRomTypes, "logistics.maxRomTypesPerBlend", [](Json& d) { d["logistics"]["maxRomTypesPerBlend"] = 0; }},
      {le::kFleetHours, "logistics.haulFleetHours[0]", [](Json& d) { d["logistics"]["haulFleetHours"][0] = -1; }},
      {le::kWashCapacity, "logistics.washCapacityTonnes[0]", [](Json& d) { d["logistics"]["washCapacityTonnes"][0] = -1; }},
      {le::kRehandleLoss, "logistics.rehandleLossFraction", [](Json& d) { d["logistics"]["rehandleLossFraction"] = 1.0; }},
      {le::kDiscountRate, "market.discountRatePerPeriod", [](Json& d) { d["market"]["discountRatePerPeriod"] = -0.1; }},
      {le::kCutPointGrid, "cutPointGridGcc[2]", [](Json& d) { d["cutPointGridGcc"][2] = 1.45; }},
  };
  std::set<std::string_view> codes;
  for (const auto& c : cases) {
    Json doc = base_doc();
    c.mutate(doc);
    const auto errors = errors_of(doc.dump());
    CAPTURE(c.code);
    CAPTURE(c.path);
    CAPTURE(doc.dump());
    CHECK(has(errors, c.code, c.path));
    codes.insert(c.code);
  }
  // Every scenario-level code; plan-only codes, syntax, version, non-finite
  // numbers and ash-required are covered separately.
  CHECK(codes.size() == 38);
  CHECK(has(errors_of("{\"schemaVersion\": 1,"), le::kSyntax, ""));
  // Documents cannot spell NaN or infinity; overflowing literals are syntax.
  std::string text = base_doc().dump();
  text.replace(text.find("27.1"), 4, "1e999");
  CHECK(has(errors_of(text), le::kSyntax, ""));
}

TEST_CASE("ash is required by wash curves") {
  Json doc = base_doc();
  doc["attributes"].erase(0);
  for (auto& r : doc["roms"]) r["quality"].erase("ash");
  doc["products"][0]["range"].erase("ash");
  doc["products"][0]["adjustments"].erase("ash");
  CHECK(has(errors_of(doc.dump()), le::kAshRequired, "roms[1].washCurve"));
}

TEST_CASE("all problems are reported together") {
  Json doc = base_doc();
  doc["daysPerPeriod"] = 0;
  doc["roms"][0]["quality"]["ash"] = -4;
  doc["logistics"]["lotSizeTonnes"] = -1;
  CHECK(errors_of(doc.dump()).size() == 3);
}

TEST_CASE("future schema versions are refused explicitly") {
  Json doc = base_doc();
  doc["schemaVersion"] = 2;
  doc["newThing"] = true;
  const auto errors = errors_of(doc.dump());
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].code == "schema-version");
  CHECK_THROWS_AS(load_plan(R"({"schemaVersion": 9})"), ValidationError);
}

TEST_CASE("in-memory validation matches load-time checks") {
  Scenario s = full_scenario();
  CHECK(validate_scenario(s).empty());
  s.roms[0].quality["csn"] = NAN;
  s.roms[1].curve->knots[0].yield = 0.0;
  const auto errors = validate_scenario(s);
  CHECK(has(errors, le::kNotFinite, "roms[0].quality.csn"));
  CHECK(has(errors, le::kCurveYieldRange, "roms[1].washCurve.knots[0].yieldFraction"));
}

TEST_CASE("scenario round trip over random valid instances") {
  const Scenario full = full_scenario();
  CHECK(load_scenario(save_scenario(full)) == full);
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const Scenario s = random_valid(seed);
    REQUIRE(validate_scenario(s).empty());
    const std::string text = save_scenario(s);
    const Scenario back = load_scenario(text);
    CAPTURE(seed);
    CHECK(back == s);
    CHECK(save_scenario(back) == text);
  }
}

TEST_CASE("plan round trip and canonical bytes") {
  CHECK(load_plan(save_plan(BlendPlan{})) == BlendPlan{});
  BlendPlan p;
  p.set_lots(1, "P2", "R3", 4);
  p.set_lots(0, "P1", "R1", 2);
  p.set_lots(0, "P1", "R2", 7);
  p.cut_points[{"R2", 0}] = CutPoint::at(1.55);
  p.cut_points[{"R3", 1}] = CutPoint::bypass();
  p.rehandles[{0, "R1"}] = 1250.5;
  const std::string text = save_plan(p);
  CHECK(load_plan(text) == p);
  CHECK(save_plan(load_plan(text)) == text);
  BlendPlan q;
  q.set_lots(0, "P1", "R2", 7);
  q.set_lots(0, "P1", "R1", 2);
  q.set_lots(1, "P2", "R3", 4);
  q.cut_points = p.cut_points;
  q.rehandles = p.rehandles;
  CHECK(save_plan(q) == text);
  CHECK(text.back() == '\n');
  CHECK(text.find("\"allotments\"") < text.find("\"cutPoints\""));

  Rng rng(3);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Scenario s = toys::random_small(seed);
    const BlendPlan r = toys::random_plan(s, rng);
    CHECK(load_plan(save_plan(r)) == r);
  }
}

TEST_CASE("plans reference ids; dangling ids surface at bind time") {
  const BlendPlan p = load_plan(R"({"schemaVersion": 1,
      "allotments": [{"period": 0, "product": "nope", "rom": "R1", "lots": 2}]})");
  CHECK(p.lots(0, "nope", "R1") == 2);
  CHECK_THROWS_AS(evaluate_plan(toys::five_rom_example(), p), StructuralError);
}

TEST_CASE("plan load errors") {
  auto plan_errors = [](const std::string& text) {
    try {
      load_plan(text);
    } catch (const ValidationError& e) {
      return e.errors();
    }
    return std::vector<FieldError>{};
  };
  CHECK(has(plan_errors(R"({"schemaVersion": 1, "allotments": [{"period": -1, "product": "P", "rom": "R", "lots": 1}]})"),
            le::kPeriod, "allotments[0].period"));
  CHECK(has(plan_errors(R"({"schemaVersion": 1, "allotments": [{"period": 0, "product": "P", "rom": "R", "lots": -1}]})"),
            le::kLots, "allotments[0].lots"));
  CHECK(has(plan_errors(R"({"schemaVersion": 1, "allotments": [{"period": 0, "product": "P", "rom": "R", "lots": 1},
                                                              {"period": 0, "product": "P", "rom": "R", "lots": 2}]})"),
            le::kDuplicateEntry, "allotments[1]"));
  CHECK(has(plan_errors(R"({"schemaVersion": 1, "rehandles": [{"period": 0, "rom": "R", "tonnes": -5}]})"),
            le::kRehandleTonnes, "rehandles[0].tonnes"));
  CHECK(has(plan_errors(R"({"schemaVersion": 1, "cutPoints": [{"period": 0, "rom": "R", "densityGcc": "wash"}]})"),
            le::kCutPoint, "cutPoints[0].densityGcc"));
  CHECK(has(plan_errors(R"({"schemaVersion": 1, "cutpoints": []})"), le::kUnknownField, "cutpoints"));
}

TEST_CASE("file helpers report I/O errors") {
  CHECK_THROWS_AS(read_file("/nonexistent/dir/x.scenario"), IoError);
  CHECK_THROWS_AS(write_file("/nonexistent/dir/x.scenario", "{}"), IoError);
  const fs::path p = temp_path("file.plan");
  write_file(p, "hello\n");
  CHECK(read_file(p) == "hello\n");
  fs::remove(p);
}

TEST_CASE("run log: fresh, appends, restart, failure") {
  const fs::path p = temp_path("log.runlog");
  fs::remove(p);
  CHECK(RunLog(p).read().empty());

  const Scenario s = toys::five_rom_example();
  Strategy st;
  st.name = "anneal";
  st.parameters["seed"] = 4;
  RunRecord a{utc_timestamp(), scenario_hash(s), "optimize", st, {}, 123.5, true};
  RunRecord b{"2026-01-02T03:04:05Z", scenario_hash(s), "session s1", st,
              {PinAllotment{0, "P1", "R1", 3}, QualityDelta{"P1", "ash", -2, 0, 0}}, -7.25, false};
  RunLog(p).append(a);
  {
    const auto got = RunLog(p).read();
    REQUIRE(got.size() == 1);
    CHECK(got[0] == a);
  }
  // A fresh handle stands in for a restarted process.
  RunLog(p).append(b);
  const auto got = RunLog(p).read();
  REQUIRE(got.size() == 2);
  CHECK(got[0] == a);
  CHECK(got[1] == b);
  fs::remove(p);

  CHECK_THROWS_AS(RunLog("/nonexistent/dir/x.runlog").append(a), IoError);
  std::ofstream(p) << "not json\n";
  CHECK_THROWS_AS(RunLog(p).read(), IoError);
  fs::remove(p);
}

TEST_CASE("scenario hash is stable and content-sensitive") {
  const Scenario s = toys::five_rom_example();
  const std::string h = scenario_hash(s);
  CHECK(h.size() == 64);
  CHECK(h == scenario_hash(load_scenario(save_scenario(s))));
  Scenario t = s;
  t.roms[0].quality["ash"] += 0.1;
  CHECK(scenario_hash(t) != h);
  CHECK(utc_timestamp().size() == 20);
}
