#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

#include "blendforge/errors.h"
#include "blendforge/server.h"

namespace {

// The handler only records the signal; a watcher thread does the shutdown.
volatile std::sig_atomic_t g_signalled = 0;

void on_signal(int) { g_signalled = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blendforge HTTP server (port from BLENDFORGE_PORT, default 8080)"};
  blendforge::ServerOptions options;
  std::string host = "0.0.0.0";
  std::string runlog;
  app.add_option("--workers", options.workers, "Optimization worker threads")->check(CLI::PositiveNumber);
  app.add_option("--runlog", runlog, "Append finished runs to this run log");
  app.add_option("--host", host, "Listen address");
  CLI11_PARSE(app, argc, argv);
  if (!runlog.empty()) options.runlog = runlog;

  try {
    const int port = blendforge::port_from_env();
    blendforge::Server server(options);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::atomic<bool> done{false};
    std::thread watcher([&] {
      while (!done.load()) {
        if (g_signalled) {
          server.stop();
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      }
    });
    std::cerr << "blendforge listening on " << host << ":" << port << " with " << options.workers << " worker(s)\n";
    try {
      server.run(host, port);
    } catch (...) {
      done.store(true);
      watcher.join();
      throw;
    }
    done.store(true);
    watcher.join();
  } catch (const blendforge::BlendError& e) {
    std::cerr << "blendforge: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
