#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "blendforge/errors.h"
#include "blendforge/types.h"

namespace blendforge {

inline constexpr int kSchemaVersion = 1;

// Load-time error codes. Every scenario invariant has its own code.
namespace load_error {
inline constexpr std::string_view kSyntax = "syntax";
inline constexpr std::string_view kSchemaVersion = "schema-version";
inline constexpr std::string_view kUnknownField = "unknown-field";
inline constexpr std::string_view kMissingField = "missing-field";
inline constexpr std::string_view kType = "type";
inline constexpr std::string_view kHorizon = "horizon";
inline constexpr std::string_view kDaysPerPeriod = "days-per-period";
inline constexpr std::string_view kPeriodCount = "period-count";
inline constexpr std::string_view kNotFinite = "not-finite";
inline constexpr std::string_view kAttributeCodeEmpty = "attribute-code-empty";
inline constexpr std::string_view kAttributeCodeDuplicate = "attribute-code-duplicate";
inline constexpr std::string_view kAshRequired = "ash-required";
inline constexpr std::string_view kUnknownAttribute = "unknown-attribute";
inline constexpr std::string_view kMissingAttribute = "missing-attribute";
inline constexpr std::string_view kPercentRange = "percent-range";
inline constexpr std::string_view kCurveKnots = "curve-knots";
inline constexpr std::string_view kCurveDensityOrder = "curve-density-order";
inline constexpr std::string_view kCurveAshOrder = "curve-ash-order";
inline constexpr std::string_view kCurveYieldOrder = "curve-yield-order";
inline constexpr std::string_view kCurveYieldRange = "curve-yield-range";
inline constexpr std::string_view kDegradationCap = "degradation-cap";
inline constexpr std::string_view kRomIdEmpty = "rom-id-empty";
inline constexpr std::string_view kRomIdDuplicate = "rom-id-duplicate";
inline constexpr std::string_view kAvailableTonnes = "available-tonnes";
inline constexpr std::string_view kHaulRate = "haul-rate";
inline constexpr std::string_view kStagingRate = "staging-rate";
inline constexpr std::string_view kProductIdEmpty = "product-id-empty";
inline constexpr std::string_view kProductIdDuplicate = "product-id-duplicate";
inline constexpr std::string_view kRangeOrder = "range-order";
inline constexpr std::string_view kAdjustmentTarget = "adjustment-target";
inline constexpr std::string_view kBasePrice = "base-price";
inline constexpr std::string_view kContractTonnes = "contract-tonnes";
inline constexpr std::string_view kTargetTonnes = "target-tonnes";
inline constexpr std::string_view kTonnageMode = "tonnage-mode";
inline constexpr std::string_view kUnit = "unit";
inline constexpr std::string_view kLotSize = "lot-size";
inline constexpr std::string_view kMinLots = "min-lots";
inline constexpr std::string_view kMaxRomTypes = "max-rom-types";
inline constexpr std::string_view kFleetHours = "fleet-hours";
inline constexpr std::string_view kWashCapacity = "wash-capacity";
inline constexpr std::string_view kRehandleLoss = "rehandle-loss";
inline constexpr std::string_view kDiscountRate = "discount-rate";
inline constexpr std::string_view kCutPointGrid = "cut-point-grid";
inline constexpr std::string_view kPeriod = "period";
inline constexpr std::string_view kLots = "lots";
inline constexpr std::string_view kDuplicateEntry = "duplicate-entry";
inline constexpr std::string_view kRehandleTonnes = "rehandle-tonnes";
inline constexpr std::string_view kCutPoint = "cut-point";
inline constexpr std::string_view kUnknownValue = "unknown-value";
}  // namespace load_error

// Every invariant violation of an in-memory scenario, with document paths.
std::vector<FieldError> validate_scenario(const Scenario& scenario);

// Parses and validates a scenario document. Throws ValidationError carrying
// every problem found.
Scenario load_scenario(std::string_view text);
// Canonical document: sorted keys, two-space indent, trailing newline.
std::string save_scenario(const Scenario& scenario);

// Plans reference ids only; dangling ids surface when the plan is bound to a
// scenario (evaluate_plan), not here.
BlendPlan load_plan(std::string_view text);
std::string save_plan(const BlendPlan& plan);

// File helpers; throw IoError when the file cannot be read or written.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace blendforge
