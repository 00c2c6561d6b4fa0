#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace blendforge {

struct ServerOptions {
  // Optimization runs execute on this many worker threads.
  std::size_t workers{2};
  // When set, finished runs and applied directives are appended here.
  std::optional<std::filesystem::path> runlog;
};

inline constexpr int kDefaultPort = 8080;

// BLENDFORGE_PORT, or kDefaultPort when unset. Throws DomainError when the
// variable is not a port number.
int port_from_env();

// HTTP front end over the library: scenarios, polled optimization runs, guided
// sessions, what-if previews, and analytics. State is in memory.
class Server {
 public:
  explicit Server(ServerOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port. Throws IoError when binding fails.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop(). Throws IoError when binding fails.
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace blendforge
