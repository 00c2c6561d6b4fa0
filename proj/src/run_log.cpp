#include "blendforge/run_log.h"

#include <fcntl.h>
#include <openssl/evp.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>

#include "blendforge/errors.h"
#include "blendforge/scenario_io.h"
#include "blendforge/serialize.h"

namespace blendforge {

namespace {

std::string errno_text() { return std::strerror(errno); }

class LockedFile {
 public:
  explicit LockedFile(const std::filesystem::path& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open run log " + path.string() + ": " + errno_text());
    if (::flock(fd_, LOCK_EX) != 0) {
      const std::string why = errno_text();
      ::close(fd_);
      throw IoError("cannot lock run log " + path.string() + ": " + why);
    }
  }
  LockedFile(const LockedFile&) = delete;
  LockedFile& operator=(const LockedFile&) = delete;
  ~LockedFile() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }

  void write_all(const std::string& data) {
    std::size_t done = 0;
    while (done < data.size()) {
      const ssize_t n = ::write(fd_, data.data() + done, data.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError("cannot write run log " + path_.string() + ": " + errno_text());
      }
      done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw IoError("cannot sync run log " + path_.string() + ": " + errno_text());
  }

 private:
  std::filesystem::path path_;
  int fd_{-1};
};

}  // namespace

std::string scenario_hash(const Scenario& scenario) {
  const std::string text = save_scenario(scenario);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw BlendError("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunLog::append(const RunRecord& r) const {
  Json j = {{"timestamp", r.timestamp},
            {"scenarioHash", r.scenario_hash},
            {"source", r.source},
            {"strategy", to_json(r.strategy)},
            {"directives", to_json(r.directives)},
            {"objective", r.objective},
            {"feasible", r.feasible}};
  LockedFile file(path_);
  file.write_all(j.dump() + "\n");
}

std::vector<RunRecord> RunLog::read() const {
  std::vector<RunRecord> out;
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) {
    if (ec) throw IoError("cannot stat run log " + path_.string() + ": " + ec.message());
    return out;
  }
  std::ifstream in(path_);
  if (!in) throw IoError("cannot open run log " + path_.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      RunRecord r;
      r.timestamp = j.at("timestamp").get<std::string>();
      r.scenario_hash = j.at("scenarioHash").get<std::string>();
      r.source = j.at("source").get<std::string>();
      r.strategy.name = j.at("strategy").at("name").get<std::string>();
      r.strategy.objective =
          j.at("strategy").at("objective").get<std::string>() == "revenue" ? ObjectiveKind::Revenue : ObjectiveKind::Npv;
      r.strategy.parameters = j.at("strategy").at("parameters").get<std::map<std::string, double>>();
      r.directives = directives_from_json(j.at("directives"));
      r.objective = j.at("objective").get<double>();
      r.feasible = j.at("feasible").get<bool>();
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw IoError("corrupt run log " + path_.string() + " line " + std::to_string(number) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError("cannot read run log " + path_.string());
  return out;
}

}  // namespace blendforge
