// Acceptance suite: one PASS/FAIL line per headline criterion; exits nonzero
// if any fails.

#include <httplib.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "blendforge/blend_math.h"
#include "blendforge/cli.h"
#include "blendforge/evaluate.h"
#include "blendforge/guided.h"
#include "blendforge/optimizer.h"
#include "blendforge/scenario_io.h"
#include "blendforge/serialize.h"
#include "blendforge/server.h"
#include "blendforge/space.h"
#include "support/oracles.h"
#include "support/toys.h"

using namespace blendforge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass{true};
  std::ostringstream detail;

  // Records a failed expectation; keeps the first few messages.
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail.str("");
    else detail << "; ";
    pass = false;
    detail << what;
  }
};

Strategy named(const std::string& name) {
  Strategy s;
  s.name = name;
  return s;
}

Strategy anneal(double seed) {
  Strategy s = named("anneal");
  s.parameters["seed"] = seed;
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double objective_of(const std::vector<RankingRow>& rows, const std::string& name) {
  for (const auto& r : rows) {
    if (r.strategy == name) return r.objective;
  }
  return std::nan("");
}

void combinatorics(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const BigInt single = count_compositions(100, 5);
  o.expect(single == 4598126, "count_compositions(100, 5) != 4598126");
  o.expect(single == BigInt(oracles::lattice_count(100, 5).str()), "single blend disagrees with DP oracle");
  const Scenario example = toys::five_rom_example();
  const BigInt n = count_blend_space(summarize(example)) * cut_point_combinations(example, {});
  const BigInt expected = BigInt(oracles::lattice_count(100, 5).str()) * BigInt(oracles::lattice_count(100, 5).str());
  o.expect(n == expected, "five-ROM example disagrees with DP oracle");
  o.expect(n == BigInt(4598126) * 4598126, "five-ROM example != 4598126^2");
  o.expect(n >= BigInt("10000000000000") && n < BigInt("100000000000000"), "count outside [1e13, 1e14)");
  const double dt = seconds_since(t0);
  o.expect(dt < 1.0, "took longer than 1 s");
  if (o.pass) o.detail << "five-ROM example " << n << " = 4598126^2 in " << dt << " s";
}

void oracle_optimality(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr int kSeeds = 20;
  int chosen = 0, passing = 0;
  std::ostringstream per;
  for (std::uint64_t gen = 1; gen <= 40 && chosen < 6; ++gen) {
    const Scenario s = toys::random_small(gen);
    const BigInt size = count_blend_space(summarize(s)) * cut_point_combinations(s, {});
    if (size > 200000) continue;
    const auto best = enumerated_optimum(s, {}, 200000, ObjectiveKind::Npv);
    if (!best || best->objective <= 0) continue;
    ++chosen;
    int hits = 0;
    for (int seed = 1; seed <= kSeeds; ++seed) {
      const OptimizeResult r = optimize(s, anneal(seed));
      if (r.feasible && r.objective >= 0.99 * best->objective) ++hits;
    }
    const bool ok = hits >= 0.95 * kSeeds;
    passing += ok;
    per << " #" << gen << "(" << best->plans << " plans): " << hits << "/" << kSeeds;
    o.expect(ok, "scenario #" + std::to_string(gen) + " reached 99% on " + std::to_string(hits) + "/20 seeds");
  }
  o.expect(chosen >= 5, "fewer than 5 enumerable scenarios generated");
  const double dt = seconds_since(t0);
  o.expect(dt < 120, "took longer than 2 min");
  if (o.pass) o.detail << passing << "/" << chosen << " scenarios;" << per.str() << "; " << dt << " s";
}

void nfl_inversion(Outcome& o) {
  const std::vector<Strategy> heuristics = {named("greedy-profit-first"), named("avg-value"), named("max-tonnes")};
  const auto ra = compare_strategies(toys::nfl_a(), heuristics);
  const auto rb = compare_strategies(toys::nfl_b(), heuristics);
  const double ga = objective_of(ra, "greedy-profit-first"), gb = objective_of(rb, "greedy-profit-first");
  o.expect(ga > objective_of(ra, "avg-value") && ga > objective_of(ra, "max-tonnes"),
           "greedy-profit-first not strictly best on A");
  const double other_b = std::max(objective_of(rb, "avg-value"), objective_of(rb, "max-tonnes"));
  o.expect(other_b > gb, "greedy-profit-first not strictly beaten on B");
  const auto oa = enumerated_optimum(toys::nfl_a(), {}, 1'000'000, ObjectiveKind::Npv);
  const auto ob = enumerated_optimum(toys::nfl_b(), {}, 1'000'000, ObjectiveKind::Npv);
  o.expect(oa && std::abs(ga - oa->objective) <= 1e-6 * std::abs(oa->objective), "A winner is not the enumerated optimum");
  o.expect(ob && std::abs(other_b - ob->objective) <= 1e-6 * std::abs(ob->objective),
           "B winner is not the enumerated optimum");
  if (o.pass) {
    o.detail << "A: greedy " << ga << " = optimum; B: " << rb.front().strategy << " " << other_b << " = optimum > greedy "
             << gb;
  }
}

void sweetener_flip(Outcome& o) {
  // low needs >= 20% A, prime >= 45% A; only the price spread changes.
  const Scenario low_wins = toys::sweetener(100, 200);
  const Scenario prime_wins = toys::sweetener(100, 300);
  auto a_to = [](const BlendPlan& p, const char* product) { return p.lots(0, product, "A"); };
  const auto e1 = enumerated_optimum(low_wins, {}, 1'000'000, ObjectiveKind::Npv);
  const auto e2 = enumerated_optimum(prime_wins, {}, 1'000'000, ObjectiveKind::Npv);
  if (!e1 || !e2) {
    o.expect(false, "no feasible enumerated plan");
    return;
  }
  o.expect(a_to(e1->plan, "low") > a_to(e1->plan, "prime") || a_to(e1->plan, "low") >= 2,
           "spread 100/200: optimum does not send A to low");
  o.expect(a_to(e2->plan, "prime") > a_to(e2->plan, "low"), "spread 100/300: optimum does not send A to prime");
  o.expect(a_to(e1->plan, "prime") != a_to(e2->plan, "prime"), "A allocation did not flip");
  const auto r1 = optimize(low_wins, anneal(0));
  const auto r2 = optimize(prime_wins, anneal(0));
  o.expect(a_to(r1.plan, "prime") == a_to(e1->plan, "prime") && a_to(r1.plan, "low") == a_to(e1->plan, "low"),
           "optimizer misses the 100/200 allocation");
  o.expect(a_to(r2.plan, "prime") == a_to(e2->plan, "prime") && a_to(r2.plan, "low") == a_to(e2->plan, "low"),
           "optimizer misses the 100/300 allocation");
  if (o.pass) {
    o.detail << "A low/prime lots: 100/200 -> " << a_to(e1->plan, "low") << "/" << a_to(e1->plan, "prime")
             << ", 100/300 -> " << a_to(e2->plan, "low") << "/" << a_to(e2->plan, "prime") << "; optimizer tracks both";
  }
}

void utilization_vs_npv(Outcome& o) {
  const Scenario s = toys::utilization();
  // Maximum-throughput plan: the feasible plan feeding the most tonnes
  // through the wash plant; ties go to the highest NPV.
  double best_feed = -1, best_npv = -1e300;
  BlendPlan throughput_plan;
  scan_plans(s, {}, 1'000'000, ObjectiveKind::Npv, nullptr, [&](const EnumeratedPlanView& v) {
    if (!v.feasible()) return;
    const BlendPlan p = v.plan();
    const EvaluationReport r = evaluate_plan(s, p);
    double feed = 0;
    for (double u : r.kpis.wash_utilization) feed += u;
    if (feed > best_feed + 1e-12 || (std::abs(feed - best_feed) <= 1e-12 && r.npv > best_npv)) {
      best_feed = feed;
      best_npv = r.npv;
      throughput_plan = p;
    }
  });
  const OptimizeResult opt = optimize(s, anneal(0));
  const double throughput_npv = evaluate_plan(s, throughput_plan).npv;
  const EvaluationReport opt_report = evaluate_plan(s, opt.plan);
  o.expect(opt_report.feasible(), "optimized plan infeasible");
  const double gap = opt_report.npv - throughput_npv;
  o.expect(gap >= 0.01 * std::abs(opt_report.npv), "NPV gap below 1%");
  double opt_feed = 0;
  for (double u : opt_report.kpis.wash_utilization) opt_feed += u;
  if (o.pass) {
    o.detail << "max-throughput (utilization " << best_feed << ") NPV " << throughput_npv << " vs optimized (utilization "
             << opt_feed << ") NPV " << opt_report.npv << ", gap " << 100 * gap / std::abs(opt_report.npv) << "%";
  }
}

Scenario guided_toy() {
  return toys::single_period({toys::rom("A", 6, {5000}), toys::rom("B", 10, {12000}), toys::rom("C", 14, {12000})},
                             {toys::product("P", 12, {120}, {6000}), toys::product("Q", 13, {90}, {5000})});
}

void directive_satisfaction(Outcome& o) {
  const Scenario s = guided_toy();
  auto ash = [&](const BlendPlan& p) {
    const auto* row = evaluate_plan(s, p).find("P", 0);
    return row ? row->quality.at("ash") : std::nan("");
  };
  Session session = open_session(s, anneal(42));
  const double before = ash(session.incumbent);
  const auto r = guided_reoptimize(session, {QualityDelta{"P", "ash", -2.0, 0, 0}});
  o.expect(r.success, "ash -2 directive failed on a feasible toy");
  o.expect(r.success && ash(r.result.plan) <= before - 2.0 + 1e-9, "blended ash not lowered by 2");
  o.expect(session.incumbent == r.result.plan, "incumbent not updated");

  Session impossible = open_session(s, anneal(42));
  const Session kept = impossible;
  const double now = ash(impossible.incumbent);
  const auto f = guided_reoptimize(impossible, {QualityDelta{"P", "ash", 5.0 - now, 0, 0}});
  o.expect(!f.success, "bound below every ROM reported success");
  o.expect(impossible.incumbent == kept.incumbent && impossible.history.size() == kept.history.size(),
           "failed directive changed the session");
  if (o.pass) {
    o.detail << "ash " << before << " -> " << ash(r.result.plan) << "; impossible bound " << 5.0
             << " rejected (" << f.binding_source << "), incumbent unchanged";
  }
}

// CLI output and server result for one seeded run must match the library.
bool wrapper_determinism(const Scenario& s, const Strategy& st, std::string& why) {
  const fs::path dir = fs::temp_directory_path() / ("blendforge_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "s.scenario", save_scenario(s));
  const std::string seed = std::to_string(static_cast<long long>(st.parameters.at("seed")));
  const std::string budget = std::to_string(static_cast<long long>(st.parameters.at("budgetEvaluations")));
  for (const char* name : {"a.plan", "b.plan"}) {
    const std::vector<std::string> args = {"blendforge", "optimize", "--scenario", (dir / "s.scenario").string(),
                                           "--seed", seed, "--budget", budget, "--out", (dir / name).string()};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  const std::string lib = dump(to_json(optimize(s, st)));
  const std::string cli_a = read_file(dir / "a.plan.report"), cli_b = read_file(dir / "b.plan.report");
  fs::remove_all(dir);

  Server server;
  const int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  client.Put("/scenarios/s", save_scenario(s), "application/json");
  const Json body = {{"name", st.name}, {"parameters", st.parameters}};
  const std::string id = Json::parse(client.Post("/scenarios/s/optimize", body.dump(), "application/json")->body)["runId"];
  Json handle;
  do {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    handle = Json::parse(client.Get("/runs/" + id)->body);
  } while (handle["state"] == "queued" || handle["state"] == "running");
  server.stop();
  const std::string served = dump(handle["result"]);
  if (cli_a != cli_b) why = "CLI not byte-stable";
  else if (cli_a != lib) why = "CLI differs from library";
  else if (served != lib) why = "server differs from library";
  return why.empty();
}

void property_suites(Outcome& o) {
  Rng rng(2024);
  int blend_cases = 0;
  for (int trial = 0; trial < 1000; ++trial, ++blend_cases) {
    const int n = 1 + static_cast<int>(rng.below(6));
    std::vector<Parcel> parcels;
    std::vector<std::pair<double, double>> pairs;
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < n; ++i) {
      const double t = 1 + 5000 * rng.uniform(), a = 100 * rng.uniform();
      parcels.push_back(Parcel{t, {{"ash", a}}});
      pairs.emplace_back(t, a);
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    const double q = blend_quality(parcels).at("ash");
    std::vector<Parcel> permuted(parcels.rbegin(), parcels.rend());
    std::vector<Parcel> split = parcels;
    Parcel piece = split[0];
    piece.tonnes *= 0.3;
    split[0].tonnes *= 0.7;
    split.push_back(piece);
    const bool ok = q >= lo - 1e-12 && q <= hi + 1e-12 && std::abs(q - oracles::precise_mean(pairs)) <= 1e-10 &&
                    std::abs(blend_quality(permuted).at("ash") - q) <= 1e-10 &&
                    std::abs(blend_quality(split).at("ash") - q) <= 1e-10;
    if (!ok) {
      o.expect(false, "blending bounds/permutation/split failed at case " + std::to_string(trial));
      break;
    }
  }

  int sweeps = 0;
  for (int trial = 0; trial < 100 && o.pass; ++trial, ++sweeps) {
    RomParcel r = toys::rom("W", 15, {1000});
    double d = 1.3, ash = 4 + 4 * rng.uniform(), y = 0.3 + 0.3 * rng.uniform();
    std::vector<WashKnot> knots;
    for (int i = 0, n = 2 + static_cast<int>(rng.below(4)); i < n; ++i) {
      knots.push_back({d, ash, y});
      d += 0.05 + 0.2 * rng.uniform();
      ash += 5 * rng.uniform();
      y = std::min(1.0, y + 0.2 * rng.uniform());
    }
    r.curve = AshYieldCurve{knots, true};
    double prev_ash = -1, prev_tonnes = -1;
    for (int i = 0; i <= 200; ++i) {
      const double cut = std::min(knots.back().density_gcc,
                                  knots.front().density_gcc + (knots.back().density_gcc - knots.front().density_gcc) * i / 200.0);
      const WashResult w = wash_parcel(r, 1000, CutPoint::at(cut));
      if (w.quality.at("ash") < prev_ash - 1e-12 || w.tonnes < prev_tonnes - 1e-9) {
        o.expect(false, "wash monotonicity failed");
        break;
      }
      prev_ash = w.quality.at("ash");
      prev_tonnes = w.tonnes;
    }
  }

  int plans = 0;
  for (std::uint64_t seed = 1; seed <= 30 && o.pass; ++seed) {
    const Scenario s = toys::random_small(seed);
    Rng prng(seed * 7);
    for (int k = 0; k < 10; ++k, ++plans) {
      const BlendPlan plan = toys::random_plan(s, prng);
      const EvaluationReport r = evaluate_plan(s, plan);
      const auto line = oracles::straight_line(s, plan);
      if (r.npv != npv(r.net_cashflows(), s.market.discount_rate_per_period) ||
          std::abs(r.npv - line.npv) > 1e-6 * std::max(1.0, std::abs(line.npv))) {
        o.expect(false, "NPV consistency failed on scenario #" + std::to_string(seed));
        break;
      }
      const RepairOutcome once = repair(s, plan);
      const RepairOutcome twice = repair(s, once.plan);
      if (!(twice.plan == once.plan)) {
        o.expect(false, "repair not idempotent on scenario #" + std::to_string(seed));
        break;
      }
    }
  }

  std::string why;
  Strategy st = anneal(11);
  st.parameters["budgetEvaluations"] = 20000;
  o.expect(wrapper_determinism(toys::random_small(3), st, why), why);
  if (o.pass) {
    o.detail << blend_cases << " blend cases, " << sweeps << " wash sweeps, " << plans
             << " plans for NPV and repair; library = CLI = server byte-for-byte";
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"combinatorics", combinatorics},
      {"oracle-optimality", oracle_optimality},
      {"nfl-ranking-inversion", nfl_inversion},
      {"sweetener-trade-off", sweetener_flip},
      {"utilization-vs-npv", utilization_vs_npv},
      {"directive-satisfaction", directive_satisfaction},
      {"property-suites", property_suites},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run(o);
    } catch (const std::exception& e) {
      o.expect(false, std::string("threw: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << seconds_since(t0) << " s): " << o.detail.str()
              << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - failed << "/" << criteria.size() << std::endl;
  return failed ? 1 : 0;
}
