#include "blendforge/scenario_io.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_reader.h"

namespace blendforge {

namespace {

using detail::Fields;
using detail::index;
using detail::Json;
using detail::join;
using detail::Reader;
namespace le = load_error;

std::string unit_name(Unit u) {
  switch (u) {
    case Unit::Percent: return "percent";
    case Unit::Index: return "index";
    case Unit::MegajoulePerKg: return "MJ-per-kg";
  }
  return "percent";
}

std::optional<Unit> parse_unit(const std::string& s) {
  if (s == "percent") return Unit::Percent;
  if (s == "index") return Unit::Index;
  if (s == "MJ-per-kg") return Unit::MegajoulePerKg;
  return std::nullopt;
}

std::string mode_name(TonnageMode m) { return m == TonnageMode::Exact ? "exact" : "at-most"; }

// ---------------------------------------------------------------- validation

class Checker {
 public:
  Checker(const Scenario& s, std::vector<FieldError>& out) : s_(s), out_(out) {}

  void run() {
    if (s_.horizon_periods < 1) err(le::kHorizon, "horizonPeriods", "horizon must be at least one period");
    if (s_.days_per_period < 1) err(le::kDaysPerPeriod, "daysPerPeriod", "days per period must be positive");
    registry();
    std::set<std::string> ids;
    for (std::size_t i = 0; i < s_.roms.size(); ++i) rom(s_.roms[i], index("roms", i), ids);
    ids.clear();
    for (std::size_t i = 0; i < s_.products.size(); ++i) product(s_.products[i], index("products", i), ids);
    logistics();
    if (!finite(s_.market.discount_rate_per_period, "market.discountRatePerPeriod")) {
    } else if (s_.market.discount_rate_per_period < 0.0) {
      err(le::kDiscountRate, "market.discountRatePerPeriod", "discount rate must be nonnegative");
    }
    for (std::size_t i = 0; i < s_.cut_point_grid.size(); ++i) {
      const double d = s_.cut_point_grid[i];
      const std::string path = index("cutPointGridGcc", i);
      if (!finite(d, path)) continue;
      if (d <= 0.0) err(le::kCutPointGrid, path, "cut-point densities must be positive");
      if (i > 0 && d <= s_.cut_point_grid[i - 1]) err(le::kCutPointGrid, path, "grid must be strictly increasing");
    }
    for (const auto& [name, params] : s_.strategy_overrides) {
      for (const auto& [key, v] : params) finite(v, "strategyOverrides." + name + "." + key);
    }
  }

 private:
  void err(std::string_view code, std::string path, std::string message) {
    out_.push_back({std::string(code), std::move(path), std::move(message)});
  }

  bool finite(double v, const std::string& path) {
    if (std::isfinite(v)) return true;
    err(le::kNotFinite, path, "number must be finite");
    return false;
  }

  void per_period(const std::vector<double>& v, const std::string& path, std::string_view code, bool nonneg) {
    if (static_cast<int>(v.size()) != s_.horizon_periods) {
      err(le::kPeriodCount, path,
          "expected " + std::to_string(s_.horizon_periods) + " periods, got " + std::to_string(v.size()));
    }
    for (std::size_t t = 0; t < v.size(); ++t) {
      if (finite(v[t], index(path, t)) && nonneg && v[t] < 0.0) err(code, index(path, t), "must be nonnegative");
    }
  }

  void registry() {
    std::set<std::string> codes;
    const auto& entries = s_.registry.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string path = index("attributes", i) + ".code";
      if (entries[i].code.empty()) err(le::kAttributeCodeEmpty, path, "attribute code must be nonempty");
      else if (!codes.insert(entries[i].code).second) err(le::kAttributeCodeDuplicate, path, "duplicate attribute code " + entries[i].code);
    }
    if (!s_.registry.contains(kAshCode)) {
      for (std::size_t i = 0; i < s_.roms.size(); ++i) {
        if (s_.roms[i].curve) {
          err(le::kAshRequired, index("roms", i) + ".washCurve", "a wash curve needs the ash attribute");
          break;
        }
      }
    }
  }

  void known(const std::string& code, const std::string& path) {
    if (!s_.registry.contains(code)) err(le::kUnknownAttribute, path, "attribute " + code + " is not registered");
  }

  void percent(const std::string& code, double v, const std::string& path) {
    const auto* def = s_.registry.find(code);
    if (def && def->unit == Unit::Percent && (v < 0.0 || v > 100.0)) {
      err(le::kPercentRange, path, "percent value outside [0, 100]");
    }
  }

  void rom(const RomParcel& r, const std::string& path, std::set<std::string>& ids) {
    if (r.id.empty()) err(le::kRomIdEmpty, join(path, "id"), "ROM id must be nonempty");
    else if (!ids.insert(r.id).second) err(le::kRomIdDuplicate, join(path, "id"), "duplicate ROM id " + r.id);
    per_period(r.available_tonnes, join(path, "availableTonnes"), le::kAvailableTonnes, true);
    for (const auto& [code, v] : r.quality) {
      const std::string p = join(path, "quality." + code);
      known(code, p);
      if (finite(v, p)) percent(code, v, p);
    }
    for (const auto& def : s_.registry.entries()) {
      if (!def.code.empty() && !r.quality.count(def.code)) {
        err(le::kMissingAttribute, join(path, "quality." + def.code), "ROM lacks registered attribute " + def.code);
      }
    }
    if (r.curve) curve(*r.curve, join(path, "washCurve"));
    for (const auto& [code, v] : r.degradation.rate_per_day) {
      const std::string p = join(path, "degradation.ratePerDay." + code);
      known(code, p);
      finite(v, p);
    }
    for (const auto& [code, v] : r.degradation.cap) {
      const std::string p = join(path, "degradation.cap." + code);
      known(code, p);
      if (finite(v, p) && v < 0.0) err(le::kDegradationCap, p, "degradation cap must be nonnegative");
    }
    const std::string haul = join(path, "haulHoursPerTonne");
    const std::string staging = join(path, "stagingHaulHoursPerTonne");
    if (finite(r.haul_hours_per_tonne, haul) && r.haul_hours_per_tonne < 0.0) {
      err(le::kHaulRate, haul, "haul rate must be nonnegative");
    }
    if (finite(r.staging_haul_hours_per_tonne, staging)) {
      if (r.staging_haul_hours_per_tonne < 0.0) err(le::kStagingRate, staging, "staging haul rate must be nonnegative");
      else if (r.staging_haul_hours_per_tonne > r.haul_hours_per_tonne) {
        err(le::kStagingRate, staging, "staging haul rate exceeds the pit haul rate");
      }
    }
  }

  void curve(const AshYieldCurve& c, const std::string& path) {
    if (c.knots.size() < 2) err(le::kCurveKnots, join(path, "knots"), "a curve needs at least two knots");
    for (std::size_t i = 0; i < c.knots.size(); ++i) {
      const auto& k = c.knots[i];
      const std::string p = index(join(path, "knots"), i);
      const bool ok = finite(k.density_gcc, join(p, "densityGcc")) & finite(k.product_ash_pct, join(p, "productAshPercent")) &
                      finite(k.yield, join(p, "yieldFraction"));
      if (!ok) continue;
      if (k.product_ash_pct < 0.0 || k.product_ash_pct > 100.0) {
        err(le::kPercentRange, join(p, "productAshPercent"), "percent value outside [0, 100]");
      }
      if (!(k.yield > 0.0 && k.yield <= 1.0)) err(le::kCurveYieldRange, join(p, "yieldFraction"), "yield must lie in (0, 1]");
      if (i == 0) continue;
      const auto& prev = c.knots[i - 1];
      if (!(k.density_gcc > prev.density_gcc)) {
        err(le::kCurveDensityOrder, join(p, "densityGcc"), "densities must be strictly increasing");
      }
      if (k.product_ash_pct < prev.product_ash_pct) {
        err(le::kCurveAshOrder, join(p, "productAshPercent"), "product ash must not decrease with density");
      }
      if (k.yield < prev.yield) err(le::kCurveYieldOrder, join(p, "yieldFraction"), "yield must not decrease with density");
    }
  }

  void product(const ProductSpec& p, const std::string& path, std::set<std::string>& ids) {
    if (p.id.empty()) err(le::kProductIdEmpty, join(path, "id"), "product id must be nonempty");
    else if (!ids.insert(p.id).second) err(le::kProductIdDuplicate, join(path, "id"), "duplicate product id " + p.id);
    for (const auto& [code, range] : p.range) {
      const std::string rp = join(path, "range." + code);
      known(code, rp);
      if (finite(range.min, join(rp, "min")) && finite(range.max, join(rp, "max")) && range.min > range.max) {
        err(le::kRangeOrder, rp, "min exceeds max");
      }
    }
    for (const auto& [code, term] : p.adjustments) {
      const std::string ap = join(path, "adjustments." + code);
      known(code, ap);
      finite(term.rate_below, join(ap, "rateBelowPerTonne"));
      finite(term.rate_above, join(ap, "rateAbovePerTonne"));
      if (!finite(term.target, join(ap, "target"))) continue;
      auto range = p.range.find(code);
      if (range != p.range.end() && (term.target < range->second.min || term.target > range->second.max)) {
        err(le::kAdjustmentTarget, join(ap, "target"), "adjustment target outside the product's quality range");
      }
    }
    per_period(p.base_price, join(path, "basePricePerTonne"), le::kBasePrice, true);
    per_period(p.contract_min_tonnes, join(path, "contractMinTonnes"), le::kContractTonnes, true);
    per_period(p.tonnage_target, join(path, "tonnageTargetTonnes"), le::kTargetTonnes, true);
  }

  void logistics() {
    const auto& l = s_.logistics;
    if (finite(l.lot_size_tonnes, "logistics.lotSizeTonnes") && l.lot_size_tonnes <= 0.0) {
      err(le::kLotSize, "logistics.lotSizeTonnes", "lot size must be positive");
    }
    if (l.min_lots_per_used_rom < 1) err(le::kMinLots, "logistics.minLotsPerUsedRom", "must be a positive integer");
    if (l.max_rom_types_per_blend < 1) err(le::kMaxRomTypes, "logistics.maxRomTypesPerBlend", "must be a positive integer");
    if (l.haul_fleet_hours) per_period(*l.haul_fleet_hours, "logistics.haulFleetHours", le::kFleetHours, true);
    if (l.wash_capacity_tonnes) per_period(*l.wash_capacity_tonnes, "logistics.washCapacityTonnes", le::kWashCapacity, true);
    finite(l.wash_fixed_cost_per_period, "logistics.washFixedCostPerPeriod");
    finite(l.wash_variable_cost_per_tonne, "logistics.washVariableCostPerTonne");
    finite(l.rehandle_cost_per_tonne, "logistics.rehandleCostPerTonne");
    finite(l.haul_cost_per_hour, "logistics.haulCostPerHour");
    if (finite(l.rehandle_loss_fraction, "logistics.rehandleLossFraction") &&
        !(l.rehandle_loss_fraction >= 0.0 && l.rehandle_loss_fraction < 1.0)) {
      err(le::kRehandleLoss, "logistics.rehandleLossFraction", "loss fraction must lie in [0, 1)");
    }
  }

  const Scenario& s_;
  std::vector<FieldError>& out_;
};

// ------------------------------------------------------------------- reading

int read_version(Fields& f, Reader& rd) {
  auto v = f.integer("schemaVersion", true);
  if (!v) return -1;
  if (*v > kSchemaVersion) {
    rd.error(le::kSchemaVersion, f.path("schemaVersion"),
             "schema version " + std::to_string(*v) + " is newer than supported version " +
                 std::to_string(kSchemaVersion));
    return -1;
  }
  if (*v < 1) {
    rd.error(le::kSchemaVersion, f.path("schemaVersion"), "unknown schema version " + std::to_string(*v));
    return -1;
  }
  return static_cast<int>(*v);
}

std::map<std::string, double> read_number_map(Reader& rd, const Json* j, const std::string& path) {
  std::map<std::string, double> out;
  if (!j) return out;
  for (auto it = j->begin(); it != j->end(); ++it) {
    const std::string p = join(path, it.key());
    if (!it->is_number()) {
      rd.error(le::kType, p, "expected a number");
      continue;
    }
    out[it.key()] = it->get<double>();
  }
  return out;
}

std::vector<double> or_zeros(std::optional<std::vector<double>> v, int horizon) {
  return v ? std::move(*v) : std::vector<double>(static_cast<std::size_t>(std::max(horizon, 0)), 0.0);
}

AshYieldCurve read_curve(Reader& rd, const Json& j, const std::string& path) {
  AshYieldCurve c;
  Fields f(rd, j, path);
  c.bypass_allowed = f.boolean("bypassAllowed").value_or(false);
  if (const Json* knots = f.array("knots", true)) {
    for (std::size_t i = 0; i < knots->size(); ++i) {
      Fields k(rd, (*knots)[i], index(f.path("knots"), i));
      WashKnot knot;
      knot.density_gcc = k.number("densityGcc", true).value_or(0.0);
      knot.product_ash_pct = k.number("productAshPercent", true).value_or(0.0);
      knot.yield = k.number("yieldFraction", true).value_or(1.0);
      c.knots.push_back(knot);
    }
  }
  return c;
}

RomParcel read_rom(Reader& rd, const Json& j, const std::string& path, int horizon) {
  RomParcel r;
  Fields f(rd, j, path);
  r.id = f.string("id", true).value_or("");
  r.pit = f.string("pit").value_or("");
  if (auto d = f.integer("excavationDay")) r.excavation_day = static_cast<int>(*d);
  r.available_tonnes = or_zeros(f.numbers("availableTonnes", true), horizon);
  r.quality = read_number_map(rd, f.object("quality", true), f.path("quality"));
  if (const Json* c = f.take("washCurve", false)) r.curve = read_curve(rd, *c, f.path("washCurve"));
  if (const Json* d = f.take("degradation", false)) {
    Fields g(rd, *d, f.path("degradation"));
    r.degradation.rate_per_day = read_number_map(rd, g.object("ratePerDay"), g.path("ratePerDay"));
    r.degradation.cap = read_number_map(rd, g.object("cap"), g.path("cap"));
  }
  r.haul_hours_per_tonne = f.number_or("haulHoursPerTonne", 0.0);
  r.staging_haul_hours_per_tonne = f.number_or("stagingHaulHoursPerTonne", r.haul_hours_per_tonne);
  return r;
}

ProductSpec read_product(Reader& rd, const Json& j, const std::string& path, int horizon) {
  ProductSpec p;
  Fields f(rd, j, path);
  p.id = f.string("id", true).value_or("");
  if (const Json* ranges = f.object("range")) {
    for (auto it = ranges->begin(); it != ranges->end(); ++it) {
      Fields g(rd, *it, join(f.path("range"), it.key()));
      QualityRange range;
      range.min = g.number("min", true).value_or(0.0);
      range.max = g.number("max", true).value_or(0.0);
      p.range[it.key()] = range;
    }
  }
  if (const Json* adj = f.object("adjustments")) {
    for (auto it = adj->begin(); it != adj->end(); ++it) {
      Fields g(rd, *it, join(f.path("adjustments"), it.key()));
      AdjustmentTerm term;
      term.target = g.number("target", true).value_or(0.0);
      term.rate_below = g.number_or("rateBelowPerTonne", 0.0);
      term.rate_above = g.number_or("rateAbovePerTonne", 0.0);
      p.adjustments[it.key()] = term;
    }
  }
  p.base_price = or_zeros(f.numbers("basePricePerTonne", true), horizon);
  p.contract_min_tonnes = or_zeros(f.numbers("contractMinTonnes"), horizon);
  p.tonnage_target = or_zeros(f.numbers("tonnageTargetTonnes", true), horizon);
  if (auto mode = f.string("tonnageMode")) {
    if (*mode == "exact") p.tonnage_mode = TonnageMode::Exact;
    else if (*mode != "at-most") rd.error(le::kTonnageMode, f.path("tonnageMode"), "expected at-most or exact");
  }
  return p;
}

void read_logistics(Reader& rd, const Json& j, LogisticsConstraints& l) {
  Fields f(rd, j, "logistics");
  l.lot_size_tonnes = f.number_or("lotSizeTonnes", l.lot_size_tonnes);
  if (auto v = f.integer("minLotsPerUsedRom")) l.min_lots_per_used_rom = static_cast<int>(*v);
  if (auto v = f.integer("maxRomTypesPerBlend")) l.max_rom_types_per_blend = static_cast<int>(*v);
  l.haul_fleet_hours = f.numbers("haulFleetHours");
  l.wash_capacity_tonnes = f.numbers("washCapacityTonnes");
  l.wash_fixed_cost_per_period = f.number_or("washFixedCostPerPeriod", 0.0);
  l.wash_variable_cost_per_tonne = f.number_or("washVariableCostPerTonne", 0.0);
  l.rehandle_cost_per_tonne = f.number_or("rehandleCostPerTonne", 0.0);
  l.rehandle_loss_fraction = f.number_or("rehandleLossFraction", 0.0);
  l.haul_cost_per_hour = f.number_or("haulCostPerHour", 0.0);
}

Json number_map(const std::map<std::string, double>& m) {
  Json out = Json::object();
  for (const auto& [k, v] : m) out[k] = v;
  return out;
}

}  // namespace

std::vector<FieldError> validate_scenario(const Scenario& scenario) {
  std::vector<FieldError> out;
  Checker(scenario, out).run();
  return out;
}

Scenario load_scenario(std::string_view text) {
  Reader rd;
  auto doc = detail::parse_document(text, rd);
  rd.throw_if_failed();
  Scenario s;
  std::vector<std::pair<std::string, AttributeDef>> attributes;
  {
    Fields f(rd, *doc, "");
    if (!f.valid()) rd.throw_if_failed();
    if (read_version(f, rd) < 0) {
      // Do not report the rest of a document we cannot interpret.
      ValidationError err(rd.errors);
      throw err;
    }
    if (auto h = f.integer("horizonPeriods", true)) s.horizon_periods = static_cast<int>(*h);
    if (auto d = f.integer("daysPerPeriod")) s.days_per_period = static_cast<int>(*d);
    if (const Json* attrs = f.array("attributes", true)) {
      for (std::size_t i = 0; i < attrs->size(); ++i) {
        Fields a(rd, (*attrs)[i], index("attributes", i));
        AttributeDef def;
        def.code = a.string("code", true).value_or("");
        if (auto unit = a.string("unit", true)) {
          if (auto u = parse_unit(*unit)) def.unit = *u;
          else rd.error(le::kUnit, a.path("unit"), "expected percent, index, or MJ-per-kg");
        }
        def.lower_is_better = a.boolean("lowerIsBetter").value_or(true);
        attributes.emplace_back(a.path("code"), def);
      }
    }
    const int horizon = s.horizon_periods;
    if (const Json* roms = f.array("roms")) {
      for (std::size_t i = 0; i < roms->size(); ++i) s.roms.push_back(read_rom(rd, (*roms)[i], index("roms", i), horizon));
    }
    if (const Json* products = f.array("products")) {
      for (std::size_t i = 0; i < products->size(); ++i) {
        s.products.push_back(read_product(rd, (*products)[i], index("products", i), horizon));
      }
    }
    if (const Json* l = f.take("logistics", false)) read_logistics(rd, *l, s.logistics);
    if (const Json* m = f.take("market", false)) {
      Fields g(rd, *m, "market");
      s.market.discount_rate_per_period = g.number_or("discountRatePerPeriod", 0.0);
    }
    if (auto grid = f.numbers("cutPointGridGcc")) s.cut_point_grid = *grid;
    if (const Json* o = f.object("strategyOverrides")) {
      for (auto it = o->begin(); it != o->end(); ++it) {
        const std::string p = join("strategyOverrides", it.key());
        if (!it->is_object()) {
          rd.error(le::kType, p, "expected an object of numbers");
          continue;
        }
        s.strategy_overrides[it.key()] = read_number_map(rd, &*it, p);
      }
    }
  }
  // The registry constructor rejects bad codes; report those as field errors.
  std::vector<AttributeDef> defs;
  std::set<std::string> codes;
  for (const auto& [path, def] : attributes) {
    if (def.code.empty()) rd.error(le::kAttributeCodeEmpty, path, "attribute code must be nonempty");
    else if (!codes.insert(def.code).second) rd.error(le::kAttributeCodeDuplicate, path, "duplicate attribute code " + def.code);
    else defs.push_back(def);
  }
  s.registry = AttributeRegistry(std::move(defs));
  rd.throw_if_failed();
  auto problems = validate_scenario(s);
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return s;
}

std::string save_scenario(const Scenario& s) {
  Json doc;
  doc["schemaVersion"] = kSchemaVersion;
  doc["horizonPeriods"] = s.horizon_periods;
  doc["daysPerPeriod"] = s.days_per_period;
  doc["attributes"] = Json::array();
  for (const auto& def : s.registry.entries()) {
    doc["attributes"].push_back({{"code", def.code}, {"unit", unit_name(def.unit)}, {"lowerIsBetter", def.lower_is_better}});
  }
  doc["roms"] = Json::array();
  for (const auto& r : s.roms) {
    Json j;
    j["id"] = r.id;
    j["pit"] = r.pit;
    j["excavationDay"] = r.excavation_day;
    j["availableTonnes"] = r.available_tonnes;
    j["quality"] = number_map(r.quality);
    if (r.curve) {
      Json knots = Json::array();
      for (const auto& k : r.curve->knots) {
        knots.push_back({{"densityGcc", k.density_gcc}, {"productAshPercent", k.product_ash_pct}, {"yieldFraction", k.yield}});
      }
      j["washCurve"] = {{"bypassAllowed", r.curve->bypass_allowed}, {"knots", knots}};
    }
    j["degradation"] = {{"ratePerDay", number_map(r.degradation.rate_per_day)}, {"cap", number_map(r.degradation.cap)}};
    j["haulHoursPerTonne"] = r.haul_hours_per_tonne;
    j["stagingHaulHoursPerTonne"] = r.staging_haul_hours_per_tonne;
    doc["roms"].push_back(j);
  }
  doc["products"] = Json::array();
  for (const auto& p : s.products) {
    Json j;
    j["id"] = p.id;
    j["range"] = Json::object();
    for (const auto& [code, range] : p.range) j["range"][code] = {{"min", range.min}, {"max", range.max}};
    j["adjustments"] = Json::object();
    for (const auto& [code, term] : p.adjustments) {
      j["adjustments"][code] = {
          {"target", term.target}, {"rateBelowPerTonne", term.rate_below}, {"rateAbovePerTonne", term.rate_above}};
    }
    j["basePricePerTonne"] = p.base_price;
    j["contractMinTonnes"] = p.contract_min_tonnes;
    j["tonnageTargetTonnes"] = p.tonnage_target;
    j["tonnageMode"] = mode_name(p.tonnage_mode);
    doc["products"].push_back(j);
  }
  const auto& l = s.logistics;
  Json lj;
  lj["lotSizeTonnes"] = l.lot_size_tonnes;
  lj["minLotsPerUsedRom"] = l.min_lots_per_used_rom;
  lj["maxRomTypesPerBlend"] = l.max_rom_types_per_blend;
  if (l.haul_fleet_hours) lj["haulFleetHours"] = *l.haul_fleet_hours;
  if (l.wash_capacity_tonnes) lj["washCapacityTonnes"] = *l.wash_capacity_tonnes;
  lj["washFixedCostPerPeriod"] = l.wash_fixed_cost_per_period;
  lj["washVariableCostPerTonne"] = l.wash_variable_cost_per_tonne;
  lj["rehandleCostPerTonne"] = l.rehandle_cost_per_tonne;
  lj["rehandleLossFraction"] = l.rehandle_loss_fraction;
  lj["haulCostPerHour"] = l.haul_cost_per_hour;
  doc["logistics"] = lj;
  doc["market"] = {{"discountRatePerPeriod", s.market.discount_rate_per_period}};
  doc["cutPointGridGcc"] = s.cut_point_grid;
  doc["strategyOverrides"] = Json::object();
  for (const auto& [name, params] : s.strategy_overrides) doc["strategyOverrides"][name] = number_map(params);
  return detail::canonical(doc);
}

BlendPlan load_plan(std::string_view text) {
  Reader rd;
  auto doc = detail::parse_document(text, rd);
  rd.throw_if_failed();
  BlendPlan plan;
  {
    Fields f(rd, *doc, "");
    if (!f.valid()) rd.throw_if_failed();
    if (read_version(f, rd) < 0) throw ValidationError(rd.errors);
    if (const Json* list = f.array("allotments")) {
      for (std::size_t i = 0; i < list->size(); ++i) {
        Fields a(rd, (*list)[i], index("allotments", i));
        const auto period = a.integer("period", true);
        const auto product = a.string("product", true);
        const auto rom = a.string("rom", true);
        const auto lots = a.integer("lots", true);
        if (!period || !product || !rom || !lots) continue;
        if (*period < 0) rd.error(le::kPeriod, a.path("period"), "period must be nonnegative");
        if (*lots < 0) rd.error(le::kLots, a.path("lots"), "lots must be nonnegative");
        if (*period < 0 || *lots < 0) continue;
        const AllotmentKey key{static_cast<int>(*period), *product, *rom};
        if (plan.allotments.count(key)) {
          rd.error(le::kDuplicateEntry, index("allotments", i), "allotment listed twice");
          continue;
        }
        if (*lots > 0) plan.allotments[key] = static_cast<int>(*lots);
      }
    }
    if (const Json* list = f.array("cutPoints")) {
      for (std::size_t i = 0; i < list->size(); ++i) {
        Fields c(rd, (*list)[i], index("cutPoints", i));
        const auto period = c.integer("period", true);
        const auto rom = c.string("rom", true);
        const Json* density = c.take("densityGcc", true);
        if (!period || !rom || !density) continue;
        CutPoint cut;
        if (density->is_string() && density->get<std::string>() == "bypass") {
          cut = CutPoint::bypass();
        } else if (density->is_number() && std::isfinite(density->get<double>()) && density->get<double>() > 0.0) {
          cut = CutPoint::at(density->get<double>());
        } else {
          rd.error(le::kCutPoint, c.path("densityGcc"), "expected a positive density or \"bypass\"");
          continue;
        }
        if (*period < 0) {
          rd.error(le::kPeriod, c.path("period"), "period must be nonnegative");
          continue;
        }
        if (!plan.cut_points.emplace(CutPointKey{*rom, static_cast<int>(*period)}, cut).second) {
          rd.error(le::kDuplicateEntry, index("cutPoints", i), "cut-point listed twice");
        }
      }
    }
    if (const Json* list = f.array("rehandles")) {
      for (std::size_t i = 0; i < list->size(); ++i) {
        Fields r(rd, (*list)[i], index("rehandles", i));
        const auto period = r.integer("period", true);
        const auto rom = r.string("rom", true);
        const auto tonnes = r.number("tonnes", true);
        if (!period || !rom || !tonnes) continue;
        if (*period < 0) rd.error(le::kPeriod, r.path("period"), "period must be nonnegative");
        if (*tonnes < 0.0) rd.error(le::kRehandleTonnes, r.path("tonnes"), "tonnes must be nonnegative");
        if (*period < 0 || *tonnes < 0.0) continue;
        const RehandleKey key{static_cast<int>(*period), *rom};
        if (plan.rehandles.count(key)) {
          rd.error(le::kDuplicateEntry, index("rehandles", i), "rehandle listed twice");
          continue;
        }
        if (*tonnes > 0.0) plan.rehandles[key] = *tonnes;
      }
    }
  }
  rd.throw_if_failed();
  return plan;
}

std::string save_plan(const BlendPlan& plan) {
  Json doc;
  doc["schemaVersion"] = kSchemaVersion;
  doc["allotments"] = Json::array();
  for (const auto& [key, lots] : plan.allotments) {
    doc["allotments"].push_back({{"period", key.period}, {"product", key.product}, {"rom", key.rom}, {"lots", lots}});
  }
  doc["cutPoints"] = Json::array();
  for (const auto& [key, cut] : plan.cut_points) {
    Json density = cut.is_bypass() ? Json("bypass") : Json(*cut.density_gcc);
    doc["cutPoints"].push_back({{"period", key.period}, {"rom", key.rom}, {"densityGcc", density}});
  }
  doc["rehandles"] = Json::array();
  for (const auto& [key, tonnes] : plan.rehandles) {
    doc["rehandles"].push_back({{"period", key.period}, {"rom", key.rom}, {"tonnes", tonnes}});
  }
  return detail::canonical(doc);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace blendforge
