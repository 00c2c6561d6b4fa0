#pragma once

// Field-by-field reader over parsed documents. Collects every problem with its
// path instead of stopping at the first; unknown keys are errors.

#include <json.hpp>

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "blendforge/errors.h"
#include "blendforge/scenario_io.h"

namespace blendforge::detail {

using Json = nlohmann::json;

class Reader {
 public:
  void error(std::string_view code, std::string path, std::string message) {
    errors.push_back({std::string(code), std::move(path), std::move(message)});
  }
  bool ok() const { return errors.empty(); }
  void throw_if_failed() const {
    if (!errors.empty()) throw ValidationError(errors);
  }

  std::vector<FieldError> errors;
};

inline std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// Parses text, recording a syntax error on failure.
inline std::optional<Json> parse_document(std::string_view text, Reader& rd) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::exception& e) {
    // Parse errors and out-of-range literals such as 1e999.
    rd.error(load_error::kSyntax, "", e.what());
    return std::nullopt;
  }
}

class Fields {
 public:
  Fields(Reader& rd, const Json& j, std::string path) : rd_(rd), j_(j), path_(std::move(path)) {
    valid_ = j.is_object();
    if (!valid_) rd_.error(load_error::kType, path_, "expected an object");
  }
  Fields(const Fields&) = delete;
  Fields& operator=(const Fields&) = delete;
  ~Fields() {
    if (!valid_) return;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) rd_.error(load_error::kUnknownField, join(path_, it.key()), "unknown field");
    }
  }

  bool valid() const { return valid_; }
  std::string path(std::string_view key) const { return join(path_, key); }

  const Json* take(std::string_view key, bool required) {
    if (!valid_) return nullptr;
    seen_.emplace(key);
    auto it = j_.find(key);
    if (it == j_.end()) {
      if (required) rd_.error(load_error::kMissingField, path(key), "required field missing");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(std::string_view key, bool required = false) {
    const Json* v = take(key, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      rd_.error(load_error::kType, path(key), "expected a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      rd_.error(load_error::kNotFinite, path(key), "number must be finite");
      return std::nullopt;
    }
    return d;
  }
  double number_or(std::string_view key, double fallback) { return number(key).value_or(fallback); }

  std::optional<long long> integer(std::string_view key, bool required = false) {
    const Json* v = take(key, required);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      rd_.error(load_error::kType, path(key), "expected an integer");
      return std::nullopt;
    }
    return v->get<long long>();
  }

  std::optional<std::string> string(std::string_view key, bool required = false) {
    const Json* v = take(key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      rd_.error(load_error::kType, path(key), "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<bool> boolean(std::string_view key, bool required = false) {
    const Json* v = take(key, required);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      rd_.error(load_error::kType, path(key), "expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  // List of finite numbers.
  std::optional<std::vector<double>> numbers(std::string_view key, bool required = false) {
    const Json* v = take(key, required);
    if (!v) return std::nullopt;
    if (!v->is_array()) {
      rd_.error(load_error::kType, path(key), "expected a list of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    bool good = true;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const Json& e = (*v)[i];
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        rd_.error(load_error::kType, index(path(key), i), "expected a finite number");
        good = false;
        continue;
      }
      out.push_back(e.get<double>());
    }
    if (!good) return std::nullopt;
    return out;
  }

  const Json* array(std::string_view key, bool required = false) {
    const Json* v = take(key, required);
    if (v && !v->is_array()) {
      rd_.error(load_error::kType, path(key), "expected a list");
      return nullptr;
    }
    return v;
  }

  const Json* object(std::string_view key, bool required = false) {
    const Json* v = take(key, required);
    if (v && !v->is_object()) {
      rd_.error(load_error::kType, path(key), "expected an object");
      return nullptr;
    }
    return v;
  }

 private:
  Reader& rd_;
  const Json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
  bool valid_{false};
};

inline std::string canonical(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace blendforge::detail
