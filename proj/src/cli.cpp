#include "blendforge/cli.h"

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <sstream>

#include "blendforge/analytics.h"
#include "blendforge/errors.h"
#include "blendforge/evaluate.h"
#include "blendforge/optimizer.h"
#include "blendforge/run_log.h"
#include "blendforge/scenario_io.h"
#include "blendforge/serialize.h"
#include "blendforge/space.h"

namespace blendforge {

namespace {

struct RunArgs {
  std::string scenario;
  std::string strategy{"anneal"};
  std::string objective{"npv"};
  std::optional<long long> seed;
  std::optional<long long> budget;
  std::string runlog;
};

Strategy make_strategy(const std::string& name, const RunArgs& a) {
  if (!StrategyRegistry::instance().find(name)) throw ValidationError({{"unknown-value", "--strategy", "unknown strategy " + name}});
  if (a.objective != "npv" && a.objective != "revenue") {
    throw ValidationError({{"unknown-value", "--objective", "expected npv or revenue"}});
  }
  if (a.budget && *a.budget < 0) throw ValidationError({{"unknown-value", "--budget", "budget must be nonnegative"}});
  Strategy s;
  s.name = name;
  s.objective = a.objective == "revenue" ? ObjectiveKind::Revenue : ObjectiveKind::Npv;
  if (a.seed) s.parameters["seed"] = static_cast<double>(*a.seed);
  if (a.budget) s.parameters["budgetEvaluations"] = static_cast<double>(*a.budget);
  return s;
}

std::string money(double v) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2) << v;
  return o.str();
}

std::string fixed(double v, int digits) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

void print_report(std::ostream& out, const EvaluationReport& r) {
  out << std::left << std::setw(12) << "product" << std::right << std::setw(7) << "period" << std::setw(6) << "lots"
      << std::setw(14) << "tonnes" << std::setw(8) << "spec" << std::setw(16) << "revenue"
      << "  quality\n";
  for (const auto& row : r.product_periods) {
    out << std::left << std::setw(12) << row.product << std::right << std::setw(7) << row.period << std::setw(6)
        << row.lots << std::setw(14) << fixed(row.tonnes, 1) << std::setw(8) << (row.in_spec ? "in" : "OFF")
        << std::setw(16) << money(row.gross_revenue + row.adjustment_revenue) << " ";
    for (const auto& [code, v] : row.quality) out << " " << code << "=" << fixed(v, 3);
    out << "\n";
  }
  out << "total revenue " << money(r.total_revenue) << "  npv " << money(r.npv) << "  sold "
      << fixed(r.kpis.total_sold_tonnes, 1) << " t\n";
  if (r.violations.empty()) {
    out << "feasible\n";
    return;
  }
  out << r.violations.size() << " violation(s):\n";
  for (const auto& v : r.violations) {
    out << "  " << v.code << " period " << v.period;
    if (!v.product.empty()) out << " product " << v.product;
    if (!v.rom.empty()) out << " rom " << v.rom;
    if (!v.attribute.empty()) out << " attribute " << v.attribute;
    out << " magnitude " << fixed(v.magnitude, 4) << "\n";
  }
}

void log_run(const RunArgs& a, const Scenario& s, const Strategy& strategy, const std::string& source,
             const OptimizeResult& r) {
  if (a.runlog.empty()) return;
  RunLog(a.runlog).append({utc_timestamp(), scenario_hash(s), source, strategy, {}, r.objective, r.feasible});
}

int cmd_count(const std::string& path, std::ostream& out) {
  const Scenario s = load_scenario(read_file(path));
  const BigInt n = count_blend_space(summarize(s)) * cut_point_combinations(s, {});
  char sci[64];
  std::snprintf(sci, sizeof sci, "%.2Le", n.convert_to<long double>());
  out << n << " (" << sci << ")\n";
  return exit_code::kOk;
}

int cmd_optimize(const RunArgs& a, const std::string& out_path, std::string report_path, std::ostream& out) {
  const Scenario s = load_scenario(read_file(a.scenario));
  const Strategy strategy = make_strategy(a.strategy, a);
  const OptimizeResult r = optimize(s, strategy);
  out << "strategy " << strategy.name << "  evaluations " << r.evaluations << "  objective " << money(r.objective)
      << "\n";
  print_report(out, r.report);
  if (!out_path.empty()) {
    write_file(out_path, save_plan(r.plan));
    if (report_path.empty()) report_path = out_path + ".report";
  }
  if (!report_path.empty()) write_file(report_path, dump(to_json(r)));
  log_run(a, s, strategy, "cli optimize", r);
  return r.feasible ? exit_code::kOk : exit_code::kInfeasible;
}

int cmd_compare(const RunArgs& a, const std::string& names, const std::string& out_path, std::ostream& out) {
  const Scenario s = load_scenario(read_file(a.scenario));
  std::vector<Strategy> strategies;
  std::stringstream list(names);
  for (std::string name; std::getline(list, name, ',');) {
    if (!name.empty()) strategies.push_back(make_strategy(name, a));
  }
  if (strategies.empty()) throw ValidationError({{"missing-field", "--strategies", "no strategies named"}});
  const auto ranking = compare_strategies(s, strategies);
  out << std::left << std::setw(6) << "rank" << std::setw(22) << "strategy" << std::right << std::setw(18)
      << "objective" << std::setw(10) << "feasible\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    out << std::left << std::setw(6) << i + 1 << std::setw(22) << ranking[i].strategy << std::right << std::setw(18)
        << money(ranking[i].objective) << std::setw(10) << (ranking[i].feasible ? "yes" : "no") << "\n";
  }
  if (!out_path.empty()) write_file(out_path, dump(to_json(ranking)));
  const bool any = std::any_of(ranking.begin(), ranking.end(), [](const RankingRow& r) { return r.feasible; });
  return any ? exit_code::kOk : exit_code::kInfeasible;
}

int cmd_analyze(const RunArgs& a, const std::string& plan_path, bool marginals, const std::string& out_path,
                std::ostream& out) {
  const Scenario s = load_scenario(read_file(a.scenario));
  const BlendPlan plan = load_plan(read_file(plan_path));
  const Strategy strategy = make_strategy(a.strategy, a);
  const EvaluationReport report = evaluate_plan(s, plan);
  print_report(out, report);
  AnalyticsOptions opts;
  opts.include_marginals = marginals;
  const AnalyticsReport ar = analyze(s, plan, strategy, opts);

  out << "\nquality contributions\n";
  for (const auto& c : ar.contributions) {
    out << "  " << c.product << " period " << c.period << ":";
    for (const auto& [code, v] : c.blended) out << " " << code << "=" << fixed(v, 3);
    out << "\n";
    for (const auto& r : c.roms) {
      out << "    " << std::left << std::setw(10) << r.rom << std::right << std::setw(8) << fixed(100 * r.share, 1) << "%";
      for (const auto& [code, v] : r.contribution) out << " " << code << "+" << fixed(v, 3);
      out << "\n";
    }
  }
  out << "\nconstraint slack\n";
  for (const auto& sl : ar.slacks) {
    out << "  " << std::left << std::setw(14) << sl.constraint << std::right << std::setw(4) << sl.period << " "
        << std::left << std::setw(10) << sl.subject << std::right << std::setw(14) << fixed(sl.limit, 2)
        << std::setw(14) << fixed(sl.usage, 2) << std::setw(14) << fixed(sl.slack, 2)
        << (sl.slack <= kSlackTolerance ? "  binding" : "") << "\n";
  }
  if (marginals) {
    out << "\nmarginal value per tonne\n";
    for (const auto& [rom, v] : ar.marginals) out << "  " << std::left << std::setw(10) << rom << " " << money(v) << "\n";
  }
  out << "\ndegradation deadlines\n";
  for (const auto& [rom, list] : ar.deadlines) {
    for (const auto& d : list) {
      out << "  " << std::left << std::setw(10) << rom << " " << std::setw(12) << d.product << " ";
      if (d.kind == Deadline::Kind::Always) out << "always";
      else if (d.kind == Deadline::Kind::Never) out << "never";
      else out << "period " << d.last_safe_period;
      out << "\n";
    }
  }
  if (!out_path.empty()) write_file(out_path, dump(Json{{"report", to_json(report)}, {"analytics", to_json(ar)}}));
  return report.feasible() ? exit_code::kOk : exit_code::kInfeasible;
}

void add_run_options(CLI::App* cmd, RunArgs& a, bool with_strategy) {
  cmd->add_option("--scenario", a.scenario, "Scenario file")->required();
  if (with_strategy) cmd->add_option("--strategy", a.strategy, "Strategy name");
  cmd->add_option("--objective", a.objective, "npv or revenue");
  cmd->add_option("--seed", a.seed, "Random seed");
  cmd->add_option("--budget", a.budget, "Evaluation budget");
  cmd->add_option("--runlog", a.runlog, "Append a record to this run log");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"blendforge: coal-blend planning"};
  app.require_subcommand(1);
  RunArgs a;

  std::string count_scenario;
  auto* count = app.add_subcommand("count", "Print the exact blend-space size");
  count->add_option("--scenario", count_scenario, "Scenario file")->required();

  std::string out_path, report_path;
  auto* opt = app.add_subcommand("optimize", "Optimize a scenario");
  add_run_options(opt, a, true);
  opt->add_option("--out", out_path, "Write the plan here");
  opt->add_option("--report", report_path, "Write the result document here (default: <out>.report)");

  std::string names;
  std::string compare_out;
  auto* cmp = app.add_subcommand("compare", "Rank strategies on one scenario");
  add_run_options(cmp, a, false);
  cmp->add_option("--strategies", names, "Comma-separated strategy names")->required();
  cmp->add_option("--out", compare_out, "Write the ranking document here");

  std::string plan_path, analyze_out;
  bool no_marginals = false;
  auto* an = app.add_subcommand("analyze", "Evaluate and analyze a plan");
  add_run_options(an, a, true);
  an->add_option("--plan", plan_path, "Plan file")->required();
  an->add_flag("--no-marginals", no_marginals, "Skip marginal ROM values (each needs two re-optimizations)");
  an->add_option("--out", analyze_out, "Write the analytics document here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    err << "blendforge: " << e.what() << "\n";
    return exit_code::kValidation;
  }

  try {
    if (*count) return cmd_count(count_scenario, out);
    if (*opt) return cmd_optimize(a, out_path, report_path, out);
    if (*cmp) return cmd_compare(a, names, compare_out, out);
    if (*an) return cmd_analyze(a, plan_path, !no_marginals, analyze_out, out);
  } catch (const ValidationError& e) {
    err << "blendforge: invalid input\n";
    for (const auto& fe : e.errors()) err << "  " << fe.code << " at " << (fe.path.empty() ? "$" : fe.path) << ": " << fe.message << "\n";
    return exit_code::kValidation;
  } catch (const IoError& e) {
    err << "blendforge: " << e.what() << "\n";
    return exit_code::kIo;
  } catch (const BlendError& e) {
    err << "blendforge: " << e.what() << "\n";
    return exit_code::kValidation;
  }
  return exit_code::kValidation;
}

}  // namespace blendforge
