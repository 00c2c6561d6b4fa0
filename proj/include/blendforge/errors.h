#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace blendforge {

// Base for every error thrown by the library.
class BlendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Blending zero tonnes.
class EmptyBlendError : public BlendError {
 public:
  EmptyBlendError() : BlendError("empty blend: total tonnage is zero") {}
};

// Argument outside the mathematical domain of an operation (cut-point outside
// the knot range, wash on a ROM without a curve, mismatched registries, ...).
class DomainError : public BlendError {
 public:
  using BlendError::BlendError;
};

// Pricing an off-spec blend. Off-spec product is unsaleable.
class ContractViolationError : public BlendError {
 public:
  using BlendError::BlendError;
};

// A plan that cannot be bound to its scenario (dangling ids, periods outside
// the horizon, negative lots, missing cut-points).
class StructuralError : public BlendError {
 public:
  using BlendError::BlendError;
};

// Enumeration refused because the space is larger than the caller's limit.
class SpaceTooLargeError : public BlendError {
 public:
  SpaceTooLargeError(std::string count)
      : BlendError("blend space of " + count + " plans exceeds the enumeration limit"),
        count_(std::move(count)) {}
  const std::string& count() const { return count_; }

 private:
  std::string count_;
};

// Directive that does not validate against the scenario or incumbent.
class DirectiveError : public BlendError {
 public:
  using BlendError::BlendError;
};

// Two directives that cannot both hold.
class DirectiveConflictError : public BlendError {
 public:
  DirectiveConflictError(std::string first, std::string second)
      : BlendError("conflicting directives: " + first + " vs " + second),
        first_(std::move(first)),
        second_(std::move(second)) {}
  const std::string& first() const { return first_; }
  const std::string& second() const { return second_; }

 private:
  std::string first_;
  std::string second_;
};

class IoError : public BlendError {
 public:
  using BlendError::BlendError;
};

// One problem found while loading a document. `code` names the rule that
// failed; `path` locates the field (e.g. roms[0].washCurve.knots[2].yieldFraction).
struct FieldError {
  std::string code;
  std::string path;
  std::string message;

  bool operator==(const FieldError&) const = default;
};

// A document that failed to load, with every problem found.
class ValidationError : public BlendError {
 public:
  explicit ValidationError(std::vector<FieldError> errors)
      : BlendError(summary(errors)), errors_(std::move(errors)) {}
  const std::vector<FieldError>& errors() const { return errors_; }

 private:
  static std::string summary(const std::vector<FieldError>& errors) {
    if (errors.empty()) return "invalid document";
    const auto& e = errors.front();
    std::string out = e.code + " at " + (e.path.empty() ? "$" : e.path) + ": " + e.message;
    if (errors.size() > 1) out += " (+" + std::to_string(errors.size() - 1) + " more)";
    return out;
  }
  std::vector<FieldError> errors_;
};

}  // namespace blendforge
