#include "blendforge/server.h"

#include <httplib.h>

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include "blendforge/analytics.h"
#include "blendforge/errors.h"
#include "blendforge/guided.h"
#include "blendforge/optimizer.h"
#include "blendforge/run_log.h"
#include "blendforge/scenario_io.h"
#include "blendforge/serialize.h"
#include "json_reader.h"

namespace blendforge {

namespace {

constexpr const char* kJson = "application/json";

enum class RunState { Queued, Running, Done, Cancelled, Failed };

const char* state_name(RunState s) {
  switch (s) {
    case RunState::Queued: return "queued";
    case RunState::Running: return "running";
    case RunState::Done: return "done";
    case RunState::Cancelled: return "cancelled";
    case RunState::Failed: return "failed";
  }
  return "failed";
}

struct Run {
  std::string id;
  Scenario scenario;
  Strategy strategy;
  std::size_t budget{0};
  CancellationToken cancel;
  std::atomic<std::size_t> progress{0};

  std::mutex m;
  RunState state{RunState::Queued};
  std::optional<OptimizeResult> result;
  std::string error;

  bool finished() {
    std::lock_guard lock(m);
    return state == RunState::Done || state == RunState::Cancelled || state == RunState::Failed;
  }

  Json handle() {
    std::lock_guard lock(m);
    Json j = {{"runId", id},
              {"state", state_name(state)},
              {"progress", {{"evaluations", progress.load()}, {"budgetEvaluations", budget}}}};
    if (result) j["result"] = to_json(*result);
    if (!error.empty()) j["error"] = error;
    return j;
  }
};

struct SessionSlot {
  std::mutex m;
  std::atomic<bool> busy{false};
  Session session;
};

// Clears the busy flag on scope exit.
struct BusyGuard {
  std::atomic<bool>& flag;
  ~BusyGuard() { flag.store(false); }
};

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(dump(body), kJson);
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, Json{{"error", message}});
}

}  // namespace

int port_from_env() {
  const char* v = std::getenv("BLENDFORGE_PORT");
  if (!v || !*v) return kDefaultPort;
  char* end = nullptr;
  const long port = std::strtol(v, &end, 10);
  if (*end != '\0' || port < 1 || port > 65535) throw DomainError(std::string("BLENDFORGE_PORT is not a port: ") + v);
  return static_cast<int>(port);
}

struct Server::Impl {
  explicit Impl(ServerOptions o) : options(std::move(o)) {
    if (options.runlog) runlog.emplace(*options.runlog);
    const std::size_t n = std::max<std::size_t>(1, options.workers);
    for (std::size_t i = 0; i < n; ++i) workers.emplace_back([this] { work(); });
    routes();
  }

  ~Impl() { shutdown(); }

  void shutdown() {
    http.stop();
    if (serve_thread.joinable()) serve_thread.join();
    {
      std::lock_guard lock(queue_m);
      if (stopping) return;
      stopping = true;
    }
    {
      std::lock_guard lock(runs_m);
      for (auto& [id, run] : runs) run->cancel.request();
    }
    queue_cv.notify_all();
    for (auto& w : workers) w.join();
  }

  // ------------------------------------------------------------------ runs

  void work() {
    for (;;) {
      std::shared_ptr<Run> run;
      {
        std::unique_lock lock(queue_m);
        queue_cv.wait(lock, [this] { return stopping || !queue.empty(); });
        if (queue.empty()) return;
        run = queue.front();
        queue.pop_front();
      }
      execute(*run);
    }
  }

  void execute(Run& run) {
    {
      std::lock_guard lock(run.m);
      run.state = RunState::Running;
    }
    OptimizeOptions opts;
    opts.cancel = run.cancel;
    opts.progress = &run.progress;
    try {
      OptimizeResult result = optimize(run.scenario, run.strategy, opts);
      persist({utc_timestamp(), scenario_hash(run.scenario), "run " + run.id, run.strategy, {}, result.objective,
               result.feasible});
      std::lock_guard lock(run.m);
      run.state = result.cancelled ? RunState::Cancelled : RunState::Done;
      run.result = std::move(result);
    } catch (const std::exception& e) {
      std::lock_guard lock(run.m);
      run.state = RunState::Failed;
      run.error = e.what();
    }
  }

  void persist(const RunRecord& record) {
    if (!runlog) return;
    try {
      std::lock_guard lock(runlog_m);
      runlog->append(record);
    } catch (const IoError& e) {
      // The result is still served; the loss is reported, never silent.
      std::cerr << "blendforge: " << e.what() << "\n";
      persistence_failures.fetch_add(1);
    }
  }

  std::shared_ptr<Run> find_run(const std::string& id) {
    std::lock_guard lock(runs_m);
    auto it = runs.find(id);
    return it == runs.end() ? nullptr : it->second;
  }

  std::optional<Scenario> find_scenario(const std::string& id) {
    std::lock_guard lock(scenarios_m);
    auto it = scenarios.find(id);
    if (it == scenarios.end()) return std::nullopt;
    return it->second;
  }

  std::shared_ptr<SessionSlot> find_session(const std::string& id) {
    std::lock_guard lock(sessions_m);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  // ---------------------------------------------------------------- routes

  template <class F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const ValidationError& e) {
        reply(res, 422, Json{{"error", e.what()}, {"errors", to_json(e.errors())}});
      } catch (const DirectiveConflictError& e) {
        reply(res, 422, Json{{"error", e.what()}, {"conflict", {e.first(), e.second()}}});
      } catch (const DirectiveError& e) {
        reply_error(res, 422, e.what());
      } catch (const DomainError& e) {
        reply_error(res, 422, e.what());
      } catch (const StructuralError& e) {
        reply_error(res, 422, e.what());
      } catch (const std::exception& e) {
        reply_error(res, 500, e.what());
      }
    };
  }

  void routes() {
    http.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
               reply(res, 200, Json{{"status", "ok"}});
             }));

    http.Get("/strategies", guarded([](const httplib::Request&, httplib::Response& res) {
               reply(res, 200, Json{{"strategies", StrategyRegistry::instance().names()}});
             }));

    http.Put("/scenarios/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.path_params.at("id");
               Scenario s = load_scenario(req.body);
               bool fresh;
               {
                 std::lock_guard lock(scenarios_m);
                 fresh = !scenarios.count(id);
                 scenarios[id] = s;
               }
               res.status = fresh ? 201 : 200;
               res.set_content(save_scenario(s), kJson);
             }));

    http.Get("/scenarios/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto s = find_scenario(req.path_params.at("id"));
               if (!s) return reply_error(res, 404, "unknown scenario " + req.path_params.at("id"));
               res.status = 200;
               res.set_content(save_scenario(*s), kJson);
             }));

    http.Post("/scenarios/:id/optimize", guarded([this](const httplib::Request& req, httplib::Response& res) {
                auto s = find_scenario(req.path_params.at("id"));
                if (!s) return reply_error(res, 404, "unknown scenario " + req.path_params.at("id"));
                Strategy strategy = strategy_from_json(parse(req.body));
                if (auto b = strategy.parameters.find("budgetEvaluations"); b != strategy.parameters.end() && b->second < 0) {
                  throw ValidationError({{std::string(load_error::kUnknownValue), "parameters.budgetEvaluations",
                                          "budget must be nonnegative"}});
                }
                auto run = std::make_shared<Run>();
                run->scenario = std::move(*s);
                run->strategy = std::move(strategy);
                run->budget = static_cast<std::size_t>(
                    std::max(0.0, resolved_param(run->strategy, run->scenario, "budgetEvaluations").value_or(0.0)));
                {
                  std::lock_guard lock(runs_m);
                  run->id = "r" + std::to_string(++run_counter);
                  runs[run->id] = run;
                }
                {
                  std::lock_guard lock(queue_m);
                  queue.push_back(run);
                }
                queue_cv.notify_one();
                reply(res, 202, run->handle());
              }));

    http.Get("/runs/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto run = find_run(req.path_params.at("id"));
               if (!run) return reply_error(res, 404, "unknown run " + req.path_params.at("id"));
               reply(res, 200, run->handle());
             }));

    http.Delete("/runs/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  auto run = find_run(req.path_params.at("id"));
                  if (!run) return reply_error(res, 404, "unknown run " + req.path_params.at("id"));
                  {
                    std::lock_guard lock(run->m);
                    if (run->state != RunState::Queued && run->state != RunState::Running) {
                      return reply(res, 409,
                                   Json{{"error", "run already finished"}, {"state", state_name(run->state)}});
                    }
                    run->cancel.request();
                  }
                  reply(res, 202, run->handle());
                }));

    http.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const Json body = parse(req.body);
                detail::Reader rd;
                std::string scenario_id;
                Json strategy_json;
                {
                  detail::Fields f(rd, body, "");
                  scenario_id = f.string("scenarioId", true).value_or("");
                  if (const Json* s = f.object("strategy", true)) strategy_json = *s;
                }
                rd.throw_if_failed();
                const Strategy strategy = strategy_from_json(strategy_json, "strategy");
                auto s = find_scenario(scenario_id);
                if (!s) return reply_error(res, 404, "unknown scenario " + scenario_id);
                std::string id;
                {
                  std::lock_guard lock(sessions_m);
                  id = "s" + std::to_string(++session_counter);
                }
                auto slot = std::make_shared<SessionSlot>();
                slot->session = open_session(*s, strategy, id);
                persist({utc_timestamp(), scenario_hash(*s), "session " + id, strategy, {},
                         slot->session.history.front().result.objective, slot->session.history.front().result.feasible});
                Json body_out = to_json(slot->session);
                {
                  std::lock_guard lock(sessions_m);
                  sessions[id] = slot;
                }
                reply(res, 201, body_out);
              }));

    http.Get("/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto slot = find_session(req.path_params.at("id"));
               if (!slot) return reply_error(res, 404, "unknown session " + req.path_params.at("id"));
               std::lock_guard lock(slot->m);
               reply(res, 200, to_json(slot->session));
             }));

    http.Post("/sessions/:id/directives", guarded([this](const httplib::Request& req, httplib::Response& res) {
                auto slot = find_session(req.path_params.at("id"));
                if (!slot) return reply_error(res, 404, "unknown session " + req.path_params.at("id"));
                if (slot->busy.exchange(true)) {
                  return reply_error(res, 409, "directives are already being applied to this session");
                }
                BusyGuard guard{slot->busy};
                const auto directives = read_directives(req.body);
                Session work;
                {
                  std::lock_guard lock(slot->m);
                  work = slot->session;
                }
                GuidedResult result = guided_reoptimize(work, directives);
                Json out = to_json(result);
                if (result.success) {
                  persist({utc_timestamp(), scenario_hash(work.scenario), "session " + work.id, work.strategy,
                           directives, result.result.objective, true});
                  std::lock_guard lock(slot->m);
                  slot->session = std::move(work);
                  out["session"] = to_json(slot->session);
                }
                reply(res, 200, out);
              }));

    http.Post("/sessions/:id/what-if", guarded([this](const httplib::Request& req, httplib::Response& res) {
                auto slot = find_session(req.path_params.at("id"));
                if (!slot) return reply_error(res, 404, "unknown session " + req.path_params.at("id"));
                const auto directives = read_directives(req.body);
                Session snapshot;
                {
                  std::lock_guard lock(slot->m);
                  snapshot = slot->session;
                }
                GuidedResult result = preview(snapshot, directives);
                Json out = to_json(result);
                out["deltas"] = deltas(snapshot, result.result);
                reply(res, 200, out);
              }));

    http.Get("/sessions/:id/analytics", guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto slot = find_session(req.path_params.at("id"));
               if (!slot) return reply_error(res, 404, "unknown session " + req.path_params.at("id"));
               Session snapshot;
               {
                 std::lock_guard lock(slot->m);
                 snapshot = slot->session;
               }
               AnalyticsOptions opts;
               if (req.has_param("marginals")) opts.include_marginals = req.get_param_value("marginals") != "false";
               reply(res, 200, to_json(analyze(snapshot.scenario, snapshot.incumbent, snapshot.strategy, opts)));
             }));

    http.Get("/runlog", guarded([this](const httplib::Request&, httplib::Response& res) {
               if (!runlog) return reply_error(res, 404, "server runs without a run log");
               Json list = Json::array();
               std::vector<RunRecord> records;
               {
                 std::lock_guard lock(runlog_m);
                 records = runlog->read();
               }
               for (const auto& r : records) {
                 list.push_back({{"timestamp", r.timestamp},
                                 {"scenarioHash", r.scenario_hash},
                                 {"source", r.source},
                                 {"strategy", to_json(r.strategy)},
                                 {"directives", to_json(r.directives)},
                                 {"objective", r.objective},
                                 {"feasible", r.feasible}});
               }
               reply(res, 200, Json{{"records", list}, {"persistenceFailures", persistence_failures.load()}});
             }));
  }

  static std::vector<Directive> read_directives(const std::string& body) {
    const Json j = parse(body);
    detail::Reader rd;
    Json list;
    {
      detail::Fields f(rd, j, "");
      if (const Json* d = f.array("directives", true)) list = *d;
    }
    rd.throw_if_failed();
    return directives_from_json(list, "directives");
  }

  static Json deltas(const Session& session, const OptimizeResult& would_be) {
    const EvaluationReport now = evaluate_plan(session.scenario, session.incumbent, session.constraints);
    const auto& next = would_be.report;
    Json changes = Json::array();
    std::set<AllotmentKey> keys;
    for (const auto& [k, v] : session.incumbent.allotments) keys.insert(k);
    for (const auto& [k, v] : would_be.plan.allotments) keys.insert(k);
    for (const auto& k : keys) {
      const int before = session.incumbent.lots(k.period, k.product, k.rom);
      const int after = would_be.plan.lots(k.period, k.product, k.rom);
      if (before != after) {
        changes.push_back(
            {{"period", k.period}, {"product", k.product}, {"rom", k.rom}, {"lotsBefore", before}, {"lotsAfter", after}});
      }
    }
    return {{"npv", next.npv - now.npv},
            {"totalRevenue", next.total_revenue - now.total_revenue},
            {"totalSoldTonnes", next.kpis.total_sold_tonnes - now.kpis.total_sold_tonnes},
            {"objective", objective_value(next, session.strategy.objective) -
                              objective_value(now, session.strategy.objective)},
            {"allotments", changes}};
  }

  ServerOptions options;
  httplib::Server http;
  std::thread serve_thread;

  std::optional<RunLog> runlog;
  std::mutex runlog_m;
  std::atomic<std::size_t> persistence_failures{0};

  std::mutex scenarios_m;
  std::map<std::string, Scenario> scenarios;

  std::mutex runs_m;
  std::map<std::string, std::shared_ptr<Run>> runs;
  std::size_t run_counter{0};

  std::mutex sessions_m;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions;
  std::size_t session_counter{0};

  std::mutex queue_m;
  std::condition_variable queue_cv;
  std::deque<std::shared_ptr<Run>> queue;
  bool stopping{false};
  std::vector<std::thread> workers;
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() = default;

int Server::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->http.bind_to_any_port(host);
  } else if (!impl_->http.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->serve_thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return bound;
}

void Server::run(const std::string& host, int port) {
  if (!impl_->http.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->http.listen_after_bind();
}

void Server::stop() { impl_->shutdown(); }

}  // namespace blendforge
