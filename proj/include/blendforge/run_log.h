#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "blendforge/guided.h"
#include "blendforge/optimizer.h"
#include "blendforge/types.h"

namespace blendforge {

struct RunRecord {
  std::string timestamp;  // UTC, ISO 8601
  std::string scenario_hash;
  // What produced the record: "optimize", "run r3", "session s1", ...
  std::string source;
  Strategy strategy;
  std::vector<Directive> directives;
  double objective{0.0};
  bool feasible{false};

  bool operator==(const RunRecord&) const = default;
};

// SHA-256 of the canonical scenario document, lowercase hex.
std::string scenario_hash(const Scenario& scenario);

std::string utc_timestamp();

// Append-only file of one record per line. Appends hold an exclusive file
// lock and are synced before returning; any failure throws IoError.
class RunLog {
 public:
  explicit RunLog(std::filesystem::path path) : path_(std::move(path)) {}

  void append(const RunRecord& record) const;
  // Records in insertion order; a missing file is an empty log.
  std::vector<RunRecord> read() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace blendforge
