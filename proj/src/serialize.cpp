#include "blendforge/serialize.h"

#include "blendforge/evaluate.h"
#include "blendforge/scenario_io.h"
#include "json_reader.h"

namespace blendforge {

namespace {

using detail::Fields;
using detail::index;
using detail::Reader;
namespace le = load_error;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Json number_map(const std::map<std::string, double>& m) {
  Json out = Json::object();
  for (const auto& [k, v] : m) out[k] = v;
  return out;
}

int to_int(std::optional<long long> v) { return static_cast<int>(v.value_or(0)); }

Directive read_directive(Reader& rd, const Json& j, const std::string& path) {
  Fields f(rd, j, path);
  const std::string kind = f.string("kind", true).value_or("");
  if (kind == "pin") {
    PinAllotment d;
    d.period = to_int(f.integer("period", true));
    d.product = f.string("product", true).value_or("");
    d.rom = f.string("rom", true).value_or("");
    d.lots = to_int(f.integer("lots", true));
    return d;
  }
  if (kind == "quality") {
    QualityDelta d;
    d.product = f.string("product", true).value_or("");
    d.attribute = f.string("attribute", true).value_or("");
    d.delta = f.number("delta", true).value_or(0.0);
    d.first_period = to_int(f.integer("firstPeriod", true));
    d.last_period = to_int(f.integer("lastPeriod", true));
    return d;
  }
  if (kind == "tonnage") {
    TonnageDelta d;
    d.product = f.string("product", true).value_or("");
    d.period = to_int(f.integer("period", true));
    d.delta = f.number("deltaTonnes", true).value_or(0.0);
    return d;
  }
  if (kind == "exclude") {
    ExcludeRom d;
    d.rom = f.string("rom", true).value_or("");
    d.product = f.string("product").value_or("");
    d.first_period = to_int(f.integer("firstPeriod", true));
    d.last_period = to_int(f.integer("lastPeriod", true));
    return d;
  }
  if (kind == "reserve") {
    ReserveRom d;
    d.rom = f.string("rom", true).value_or("");
    d.tonnes = f.number("tonnes", true).value_or(0.0);
    d.until_period = to_int(f.integer("untilPeriod", true));
    return d;
  }
  if (f.valid() && !kind.empty()) {
    rd.error(le::kUnknownValue, f.path("kind"), "unknown directive kind " + kind);
  }
  // Mark the remaining keys as seen; the kind error is the useful one.
  if (f.valid()) {
    for (auto it = j.begin(); it != j.end(); ++it) f.take(it.key(), false);
  }
  return PinAllotment{};
}

}  // namespace

std::string dump(const Json& j) { return detail::canonical(j); }

Json parse(std::string_view text) {
  Reader rd;
  auto doc = detail::parse_document(text, rd);
  rd.throw_if_failed();
  return std::move(*doc);
}

Json to_json(const BlendPlan& plan) { return Json::parse(save_plan(plan)); }

BlendPlan plan_from_json(const Json& j) { return load_plan(j.dump()); }

Json to_json(const EvaluationReport& report) {
  Json out;
  out["productPeriods"] = Json::array();
  for (const auto& row : report.product_periods) {
    out["productPeriods"].push_back({{"product", row.product},
                                     {"period", row.period},
                                     {"lots", row.lots},
                                     {"feedTonnes", row.feed_tonnes},
                                     {"tonnes", row.tonnes},
                                     {"quality", number_map(row.quality)},
                                     {"inSpec", row.in_spec},
                                     {"grossRevenue", row.gross_revenue},
                                     {"adjustmentRevenue", row.adjustment_revenue}});
  }
  out["periods"] = Json::array();
  for (const auto& p : report.periods) {
    out["periods"].push_back({{"period", p.period},
                              {"haulHours", p.haul_hours},
                              {"haulCost", p.haul_cost},
                              {"washFeedTonnes", p.wash_feed_tonnes},
                              {"washCost", p.wash_cost},
                              {"rehandleTonnes", p.rehandle_tonnes},
                              {"rehandleArrivedTonnes", p.rehandle_arrived_tonnes},
                              {"rehandleCost", p.rehandle_cost},
                              {"revenue", p.revenue},
                              {"netCashflow", p.net_cashflow}});
  }
  out["violations"] = Json::array();
  for (const auto& v : report.violations) {
    out["violations"].push_back({{"code", v.code},
                                 {"period", v.period},
                                 {"product", v.product},
                                 {"rom", v.rom},
                                 {"attribute", v.attribute},
                                 {"magnitude", v.magnitude}});
  }
  out["totalRevenue"] = report.total_revenue;
  out["npv"] = report.npv;
  out["feasible"] = report.feasible();
  out["kpis"] = {{"totalSoldTonnes", report.kpis.total_sold_tonnes},
                 {"avgRevenuePerTonne", report.kpis.avg_revenue_per_tonne},
                 {"washUtilizationFraction", report.kpis.wash_utilization}};
  return out;
}

Json to_json(const Strategy& s) {
  return {{"name", s.name},
          {"objective", s.objective == ObjectiveKind::Npv ? "npv" : "revenue"},
          {"parameters", number_map(s.parameters)}};
}

Strategy strategy_from_json(const Json& j, const std::string& path) {
  Reader rd;
  Strategy s;
  {
    Fields f(rd, j, path);
    if (auto name = f.string("name", true)) {
      s.name = *name;
      if (!StrategyRegistry::instance().find(s.name)) {
        rd.error(le::kUnknownValue, f.path("name"), "unknown strategy " + s.name);
      }
    }
    if (auto objective = f.string("objective")) {
      if (*objective == "revenue") s.objective = ObjectiveKind::Revenue;
      else if (*objective != "npv") rd.error(le::kUnknownValue, f.path("objective"), "expected npv or revenue");
    }
    if (const Json* params = f.object("parameters")) {
      for (auto it = params->begin(); it != params->end(); ++it) {
        if (!it->is_number()) {
          rd.error(le::kType, detail::join(f.path("parameters"), it.key()), "expected a number");
          continue;
        }
        s.parameters[it.key()] = it->get<double>();
      }
    }
  }
  rd.throw_if_failed();
  return s;
}

Json to_json(const OptimizeResult& r) {
  Json trace = Json::array();
  for (const auto& p : r.trace) trace.push_back({{"evaluation", p.evaluation}, {"objective", p.objective}});
  return {{"plan", to_json(r.plan)},
          {"report", to_json(r.report)},
          {"trace", trace},
          {"feasible", r.feasible},
          {"objective", r.objective},
          {"evaluations", r.evaluations},
          {"cancelled", r.cancelled}};
}

Json to_json(const Directive& directive) {
  return std::visit(Overloaded{
                        [](const PinAllotment& d) -> Json {
                          return {{"kind", "pin"}, {"period", d.period}, {"product", d.product}, {"rom", d.rom},
                                  {"lots", d.lots}};
                        },
                        [](const QualityDelta& d) -> Json {
                          return {{"kind", "quality"},         {"product", d.product},
                                  {"attribute", d.attribute},  {"delta", d.delta},
                                  {"firstPeriod", d.first_period}, {"lastPeriod", d.last_period}};
                        },
                        [](const TonnageDelta& d) -> Json {
                          return {{"kind", "tonnage"}, {"product", d.product}, {"period", d.period},
                                  {"deltaTonnes", d.delta}};
                        },
                        [](const ExcludeRom& d) -> Json {
                          Json j = {{"kind", "exclude"}, {"rom", d.rom}, {"firstPeriod", d.first_period},
                                    {"lastPeriod", d.last_period}};
                          if (!d.product.empty()) j["product"] = d.product;
                          return j;
                        },
                        [](const ReserveRom& d) -> Json {
                          return {{"kind", "reserve"}, {"rom", d.rom}, {"tonnes", d.tonnes},
                                  {"untilPeriod", d.until_period}};
                        },
                    },
                    directive);
}

Json to_json(const std::vector<Directive>& directives) {
  Json out = Json::array();
  for (const auto& d : directives) out.push_back(to_json(d));
  return out;
}

Directive directive_from_json(const Json& j, const std::string& path) {
  Reader rd;
  Directive d = read_directive(rd, j, path);
  rd.throw_if_failed();
  return d;
}

std::vector<Directive> directives_from_json(const Json& j, const std::string& path) {
  Reader rd;
  std::vector<Directive> out;
  if (!j.is_array()) {
    rd.error(le::kType, path, "expected a list of directives");
  } else {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_directive(rd, j[i], index(path, i)));
  }
  rd.throw_if_failed();
  return out;
}

Json to_json(const GuidedResult& r) {
  Json out = {{"success", r.success}, {"result", to_json(r.result)}};
  if (r.binding) {
    const auto& v = *r.binding;
    out["binding"] = {{"code", v.code},           {"period", v.period},       {"product", v.product},
                      {"rom", v.rom},             {"attribute", v.attribute}, {"magnitude", v.magnitude},
                      {"source", r.binding_source}};
  }
  return out;
}

Json to_json(const std::vector<RankingRow>& ranking) {
  Json out = Json::array();
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const auto& row = ranking[i];
    out.push_back({{"rank", i + 1}, {"strategy", row.strategy}, {"objective", row.objective}, {"feasible", row.feasible}});
  }
  return out;
}

Json to_json(const AnalyticsReport& report) {
  Json out;
  out["contributions"] = Json::array();
  for (const auto& c : report.contributions) {
    Json roms = Json::array();
    for (const auto& r : c.roms) {
      roms.push_back({{"rom", r.rom}, {"tonnes", r.tonnes}, {"share", r.share}, {"contribution", number_map(r.contribution)}});
    }
    out["contributions"].push_back(
        {{"product", c.product}, {"period", c.period}, {"blended", number_map(c.blended)}, {"roms", roms}});
  }
  out["slacks"] = Json::array();
  for (const auto& s : report.slacks) {
    out["slacks"].push_back({{"constraint", s.constraint},
                             {"period", s.period},
                             {"subject", s.subject},
                             {"limit", s.limit},
                             {"usage", s.usage},
                             {"slack", s.slack},
                             {"binding", s.slack <= kSlackTolerance}});
  }
  out["marginalValuePerTonne"] = number_map(report.marginals);
  out["degradationDeadlines"] = Json::object();
  for (const auto& [rom, deadlines] : report.deadlines) {
    Json list = Json::array();
    for (const auto& d : deadlines) {
      Json e = {{"product", d.product}};
      switch (d.kind) {
        case Deadline::Kind::Always: e["lastSafePeriod"] = "always"; break;
        case Deadline::Kind::Never: e["lastSafePeriod"] = "never"; break;
        case Deadline::Kind::Period: e["lastSafePeriod"] = d.last_safe_period; break;
      }
      list.push_back(e);
    }
    out["degradationDeadlines"][rom] = list;
  }
  return out;
}

Json to_json(const std::vector<FieldError>& errors) {
  Json out = Json::array();
  for (const auto& e : errors) out.push_back({{"code", e.code}, {"path", e.path}, {"message", e.message}});
  return out;
}

Json to_json(const Session& s) {
  Json history = Json::array();
  for (std::size_t i = 0; i < s.history.size(); ++i) {
    const auto& h = s.history[i];
    history.push_back({{"index", i},
                       {"directives", to_json(h.directives)},
                       {"objective", h.result.objective},
                       {"feasible", h.result.feasible},
                       {"evaluations", h.result.evaluations}});
  }
  return {{"id", s.id},
          {"strategy", to_json(s.strategy)},
          {"incumbent", to_json(s.incumbent)},
          {"report", to_json(evaluate_plan(s.scenario, s.incumbent, s.constraints))},
          {"directives", to_json(s.directives)},
          {"history", history}};
}

}  // namespace blendforge
