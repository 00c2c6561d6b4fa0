#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blendforge {

inline constexpr std::string_view kAshCode = "ash";

enum class Unit { Percent, Index, MegajoulePerKg };

struct AttributeDef {
  std::string code;
  Unit unit{Unit::Percent};
  bool lower_is_better{true};

  bool operator==(const AttributeDef&) const = default;
};

// Ordered set of quality attributes known to a scenario. Codes are unique and
// nonempty; the constructor throws DomainError otherwise.
class AttributeRegistry {
 public:
  AttributeRegistry() = default;
  explicit AttributeRegistry(std::vector<AttributeDef> entries);

  const std::vector<AttributeDef>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::optional<std::size_t> index_of(std::string_view code) const;
  const AttributeDef* find(std::string_view code) const;
  bool contains(std::string_view code) const { return find(code) != nullptr; }

  bool operator==(const AttributeRegistry&) const = default;

 private:
  std::vector<AttributeDef> entries_;
};

// attribute code -> value, in the units the registry declares.
using QualityVector = std::map<std::string, double>;

struct WashKnot {
  double density_gcc{0.0};
  double product_ash_pct{0.0};
  double yield{1.0};

  bool operator==(const WashKnot&) const = default;
};

// Product ash and yield as piecewise-linear functions of the cut-point density.
struct AshYieldCurve {
  std::vector<WashKnot> knots;
  bool bypass_allowed{false};

  struct Point {
    double product_ash_pct;
    double yield;
  };

  double min_density() const { return knots.front().density_gcc; }
  double max_density() const { return knots.back().density_gcc; }
  // Throws DomainError outside [min_density, max_density].
  Point at(double density_gcc) const;

  bool operator==(const AshYieldCurve&) const = default;
};

// Separation density, or bypass (feed goes around the plant unwashed).
struct CutPoint {
  std::optional<double> density_gcc;

  static CutPoint bypass() { return {}; }
  static CutPoint at(double density) { return CutPoint{density}; }
  bool is_bypass() const { return !density_gcc.has_value(); }

  bool operator==(const CutPoint&) const = default;
};

// Linear drift per day since excavation, capped per attribute.
struct DegradationModel {
  std::map<std::string, double> rate_per_day;
  std::map<std::string, double> cap;

  bool operator==(const DegradationModel&) const = default;
};

struct RomParcel {
  std::string id;
  std::string pit;
  int excavation_day{0};
  // Tonnes becoming available in each period; unused stock carries forward.
  std::vector<double> available_tonnes;
  QualityVector quality;
  std::optional<AshYieldCurve> curve;
  DegradationModel degradation;
  double haul_hours_per_tonne{0.0};
  double staging_haul_hours_per_tonne{0.0};

  bool operator==(const RomParcel&) const = default;
};

struct AdjustmentTerm {
  double target{0.0};
  // Money per tonne per attribute unit. Negative is a penalty, positive a bonus.
  double rate_below{0.0};
  double rate_above{0.0};

  bool operator==(const AdjustmentTerm&) const = default;
};

using AdjustmentSchedule = std::map<std::string, AdjustmentTerm>;

struct QualityRange {
  double min{0.0};
  double max{0.0};

  bool operator==(const QualityRange&) const = default;
};

// How a product's tonnage target bounds the feed lots of each blend.
//   AtMost: the blend may use up to target/lotSize lots.
//   Exact:  the blend uses exactly target/lotSize lots.
enum class TonnageMode { AtMost, Exact };

struct ProductSpec {
  std::string id;
  std::map<std::string, QualityRange> range;
  AdjustmentSchedule adjustments;
  std::vector<double> base_price;
  std::vector<double> contract_min_tonnes;
  std::vector<double> tonnage_target;
  TonnageMode tonnage_mode{TonnageMode::AtMost};

  bool operator==(const ProductSpec&) const = default;
};

struct LogisticsConstraints {
  double lot_size_tonnes{1000.0};
  int min_lots_per_used_rom{1};
  int max_rom_types_per_blend{100};
  // Absent means unconstrained.
  std::optional<std::vector<double>> haul_fleet_hours;
  std::optional<std::vector<double>> wash_capacity_tonnes;
  double wash_fixed_cost_per_period{0.0};
  double wash_variable_cost_per_tonne{0.0};
  double rehandle_cost_per_tonne{0.0};
  double rehandle_loss_fraction{0.0};
  double haul_cost_per_hour{0.0};

  bool operator==(const LogisticsConstraints&) const = default;
};

struct MarketModel {
  double discount_rate_per_period{0.0};

  bool operator==(const MarketModel&) const = default;
};

struct Scenario {
  int horizon_periods{1};
  int days_per_period{30};
  AttributeRegistry registry;
  std::vector<RomParcel> roms;
  std::vector<ProductSpec> products;
  LogisticsConstraints logistics;
  MarketModel market;
  // Discrete cut-point densities. Empty: the optimizer moves cut-points
  // continuously between knots.
  std::vector<double> cut_point_grid;
  // strategy name -> parameter defaults that override the built-ins.
  std::map<std::string, std::map<std::string, double>> strategy_overrides;

  const RomParcel* find_rom(std::string_view id) const;
  const ProductSpec* find_product(std::string_view id) const;

  bool operator==(const Scenario&) const = default;
};

struct AllotmentKey {
  int period{0};
  std::string product;
  std::string rom;

  auto operator<=>(const AllotmentKey&) const = default;
};

struct CutPointKey {
  std::string rom;
  int period{0};

  auto operator<=>(const CutPointKey&) const = default;
};

struct RehandleKey {
  int period{0};
  std::string rom;

  auto operator<=>(const RehandleKey&) const = default;
};

// Integer lot allotments plus per-(ROM, period) cut-points and staging moves.
// Maps keep every plan in canonical (period, product, rom) order; zero-lot
// allotments are never stored.
struct BlendPlan {
  std::map<AllotmentKey, int> allotments;
  std::map<CutPointKey, CutPoint> cut_points;
  std::map<RehandleKey, double> rehandles;

  int lots(int period, std::string_view product, std::string_view rom) const;
  void set_lots(int period, std::string product, std::string rom, int lots);
  int total_lots() const;
  bool empty() const { return allotments.empty() && rehandles.empty(); }

  bool operator==(const BlendPlan&) const = default;
};

namespace violation_code {
inline constexpr std::string_view kQuality = "quality-range";
inline constexpr std::string_view kContractMin = "contract-min";
inline constexpr std::string_view kTonnageTarget = "tonnage-target";
inline constexpr std::string_view kBlendCardinality = "blend-cardinality";
inline constexpr std::string_view kMinLots = "min-lots";
inline constexpr std::string_view kAvailability = "availability";
inline constexpr std::string_view kRehandleAvailability = "rehandle-availability";
inline constexpr std::string_view kHaulCapacity = "haul-capacity";
inline constexpr std::string_view kWashCapacity = "wash-capacity";
inline constexpr std::string_view kPin = "directive-pin";
inline constexpr std::string_view kExclude = "directive-exclude";
inline constexpr std::string_view kReserve = "directive-reserve";
inline constexpr std::string_view kQualityBound = "directive-quality";
inline constexpr std::string_view kTonnageBound = "directive-tonnage";
}  // namespace violation_code

struct Violation {
  std::string code;
  int period{0};
  std::string product;
  std::string rom;
  std::string attribute;
  double magnitude{0.0};

  bool operator==(const Violation&) const = default;
};

struct ProductPeriodResult {
  std::string product;
  int period{0};
  int lots{0};
  double feed_tonnes{0.0};
  double tonnes{0.0};
  QualityVector quality;
  bool in_spec{false};
  double gross_revenue{0.0};
  double adjustment_revenue{0.0};

  bool operator==(const ProductPeriodResult&) const = default;
};

struct PeriodResult {
  int period{0};
  double haul_hours{0.0};
  double haul_cost{0.0};
  double wash_feed_tonnes{0.0};
  double wash_cost{0.0};
  double rehandle_tonnes{0.0};
  double rehandle_arrived_tonnes{0.0};
  double rehandle_cost{0.0};
  double revenue{0.0};
  double net_cashflow{0.0};

  bool operator==(const PeriodResult&) const = default;
};

struct Kpis {
  double total_sold_tonnes{0.0};
  double avg_revenue_per_tonne{0.0};
  std::vector<double> wash_utilization;

  bool operator==(const Kpis&) const = default;
};

struct EvaluationReport {
  // Ordered by (product id, period).
  std::vector<ProductPeriodResult> product_periods;
  std::vector<PeriodResult> periods;
  std::vector<Violation> violations;
  double total_revenue{0.0};
  double npv{0.0};
  Kpis kpis;

  bool feasible() const { return violations.empty(); }
  const ProductPeriodResult* find(std::string_view product, int period) const;
  std::vector<double> net_cashflows() const;

  bool operator==(const EvaluationReport&) const = default;
};

}  // namespace blendforge
