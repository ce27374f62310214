#pragma once

#include "amdsp/double_plan.hpp"
#include "amdsp/mc_oracle.hpp"
#include "amdsp/one_sided.hpp"
#include "amdsp/single_plan.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace amdsp {

inline constexpr int kSchemaVersion = 1;

using PlanParameters = std::variant<SinglePlan, DoublePlan, OneSidedDoublePlan>;

/// "single", "double-two-sided" or "double-one-sided".
std::string plan_kind(const PlanParameters& plan);

/// x rounded to `digits` significant decimal digits.
double round_significant(double x, int digits);
/// Plan with every threshold rounded to `digits` significant digits; designs
/// are published this way so documents print compactly and round-trip exactly.
PlanParameters rounded_thresholds(const PlanParameters& plan, int digits = 10);

struct PlanDocument {
  PlanParameters plan;
  SpecLimits limits;
  nlohmann::json provenance;  // null when absent

  friend bool operator==(const PlanDocument&, const PlanDocument&) = default;
};

class DocumentFormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

nlohmann::json to_json(const PlanDocument& doc);
PlanDocument plan_document_from_json(const nlohmann::json& j);
std::string print_plan_document(const PlanDocument& doc);
PlanDocument parse_plan_document(const std::string& text);

nlohmann::json to_json(const DesignRequirement& req);
nlohmann::json to_json(const TighteningRow& row);
nlohmann::json to_json(const SimulationResult& r);

/// Rows of a sweep along the right branch of one iso-p-line.
struct BandRow {
  double sigma = 0.0;
  double mu = 0.0;
  double oc = 0.0;   // NaN when not requested
  double asn = 0.0;  // NaN when not requested
};

struct BandSweep {
  double p = 0.0;
  std::vector<BandRow> rows;
};

enum class BandColumns { oc, asn, both };

/// `points` rows on the geometric grid of band_sigma_grid. Two-sided plans only.
BandSweep sweep_band(const PlanParameters& plan, const SpecLimits& lim, double p, int points,
                     BandColumns what, const QuadratureConfig& cfg = {});

/// Header `sigma,mu,oc,asn`; columns not requested are left empty.
std::string band_csv(const BandSweep& sweep);
std::vector<BandRow> parse_band_csv(const std::string& text);

}  // namespace amdsp
