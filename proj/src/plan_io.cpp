#include "amdsp/plan_io.hpp"

#include "amdsp/band.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace amdsp {

namespace {

using nlohmann::json;

template <class... F>
struct Overload : F... {
  using F::operator()...;
};

template <class T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw DocumentFormatError(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw DocumentFormatError(std::string("field '") + name + "' has the wrong type");
  }
}

json plan_json(const PlanParameters& plan) {
  return std::visit(Overload{
                        [](const SinglePlan& p) { return json{{"n", p.n}, {"k", p.k}}; },
                        [](const DoublePlan& p) {
                          return json{{"n1", p.n1}, {"k1", p.k1}, {"k2", p.k2}, {"n2", p.n2}, {"k3", p.k3}};
                        },
                        [](const OneSidedDoublePlan& p) {
                          return json{{"n1", p.n1}, {"l1", p.l1}, {"l2", p.l2}, {"n2", p.n2}, {"l3", p.l3}};
                        },
                    },
                    plan);
}

PlanParameters plan_from_json(const std::string& kind, const json& j) {
  try {
    if (kind == "single") return SinglePlan(field<int>(j, "n"), field<double>(j, "k"));
    if (kind == "double-two-sided") {
      return DoublePlan(field<int>(j, "n1"), field<double>(j, "k1"), field<double>(j, "k2"), field<int>(j, "n2"),
                        field<double>(j, "k3"));
    }
    if (kind == "double-one-sided") {
      return OneSidedDoublePlan(field<int>(j, "n1"), field<double>(j, "l1"), field<double>(j, "l2"),
                                field<int>(j, "n2"), field<double>(j, "l3"));
    }
  } catch (const DocumentFormatError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw DocumentFormatError(std::string("invalid plan parameters: ") + e.what());
  }
  throw DocumentFormatError("unknown plan kind '" + kind + "'");
}

// Shortest text that reads back to the same double.
std::string number(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& cell) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  double x = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), x);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw DocumentFormatError("bad number '" + cell + "' in band CSV");
  }
  return x;
}

}  // namespace

std::string plan_kind(const PlanParameters& plan) {
  return std::visit(Overload{
                        [](const SinglePlan&) { return std::string("single"); },
                        [](const DoublePlan&) { return std::string("double-two-sided"); },
                        [](const OneSidedDoublePlan&) { return std::string("double-one-sided"); },
                    },
                    plan);
}

double round_significant(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
  return std::strtod(buf, nullptr);
}

PlanParameters rounded_thresholds(const PlanParameters& plan, int digits) {
  const auto r = [digits](double x) { return round_significant(x, digits); };
  return std::visit(Overload{
                        [&](const SinglePlan& p) { return PlanParameters(SinglePlan(p.n, r(p.k))); },
                        [&](const DoublePlan& p) {
                          return PlanParameters(DoublePlan(p.n1, r(p.k1), r(p.k2), p.n2, r(p.k3)));
                        },
                        [&](const OneSidedDoublePlan& p) {
                          return PlanParameters(OneSidedDoublePlan(p.n1, r(p.l1), r(p.l2), p.n2, r(p.l3)));
                        },
                    },
                    plan);
}

json to_json(const PlanDocument& doc) {
  json j{{"schema_version", kSchemaVersion},
         {"kind", plan_kind(doc.plan)},
         {"limits", {{"lower", doc.limits.lower}, {"upper", doc.limits.upper}}},
         {"parameters", plan_json(doc.plan)}};
  if (!doc.provenance.is_null()) j["provenance"] = doc.provenance;
  return j;
}

PlanDocument plan_document_from_json(const json& j) {
  if (!j.is_object()) throw DocumentFormatError("plan document must be a JSON object");
  const int version = field<int>(j, "schema_version");
  if (version != kSchemaVersion) {
    throw DocumentFormatError("unsupported schema_version " + std::to_string(version));
  }
  const json& limits = j.contains("limits") ? j.at("limits") : throw DocumentFormatError("missing field 'limits'");
  PlanDocument doc{SinglePlan{}, SpecLimits{}, json()};
  try {
    doc.limits = SpecLimits(field<double>(limits, "lower"), field<double>(limits, "upper"));
  } catch (const DocumentFormatError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw DocumentFormatError(e.what());
  }
  if (!j.contains("parameters")) throw DocumentFormatError("missing field 'parameters'");
  doc.plan = plan_from_json(field<std::string>(j, "kind"), j.at("parameters"));
  if (j.contains("provenance")) doc.provenance = j.at("provenance");
  return doc;
}

std::string print_plan_document(const PlanDocument& doc) { return to_json(doc).dump(2) + "\n"; }

PlanDocument parse_plan_document(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DocumentFormatError(std::string("plan document is not valid JSON: ") + e.what());
  }
  return plan_document_from_json(j);
}

json to_json(const DesignRequirement& req) {
  return {{"p1", req.p1}, {"p2", req.p2}, {"alpha", req.alpha}, {"beta", req.beta}};
}

json to_json(const TighteningRow& row) {
  return {{"alpha_star2", row.alpha_star2},
          {"beta_star2", row.beta_star2},
          {"one_sided", plan_json(row.one_sided)},
          {"candidate", plan_json(row.candidate)},
          {"n_max", row.n_max},
          {"min_oc_p1", row.min_oc_p1.value},
          {"min_oc_p1_sigma", row.min_oc_p1.sigma_star},
          {"max_oc_p2", row.max_oc_p2.value},
          {"max_oc_p2_sigma", row.max_oc_p2.sigma_star},
          {"passes", row.passes}};
}

json to_json(const SimulationResult& r) {
  return {{"schema_version", kSchemaVersion},
          {"acceptance_rate", r.acceptance_rate},
          {"asn_estimate", r.asn_estimate},
          {"replicates", r.replicates},
          {"se_acceptance", r.se_acceptance},
          {"se_asn", r.se_asn},
          {"seed", r.seed}};
}

BandSweep sweep_band(const PlanParameters& plan, const SpecLimits& lim, double p, int points, BandColumns what,
                     const QuadratureConfig& cfg) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("band: p must lie in (0, 1)");
  if (points < 1) throw std::invalid_argument("band: need at least one point");
  if (std::holds_alternative<OneSidedDoublePlan>(plan)) {
    throw std::invalid_argument("band: one-sided plans have no OC band");
  }
  const bool want_oc = what != BandColumns::asn;
  const bool want_asn = what != BandColumns::oc;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  BandSweep out;
  out.p = p;
  const std::vector<double> grid = band_sigma_grid(sigma0(p, lim), points);
  out.rows.reserve(grid.size());
  if (const auto* single = std::get_if<SinglePlan>(&plan)) {
    const SinglePlanOC oc(*single, lim);
    for (double s : grid) {
      const double mu = mu_upper(s, p, lim);
      out.rows.push_back({s, mu, want_oc ? oc(ProcessPoint{mu, s}) : nan, want_asn ? double(single->n) : nan});
    }
    return out;
  }
  const DoublePlanEvaluator eval(std::get<DoublePlan>(plan), lim, cfg);
  for (double s : grid) {
    const ProcessPoint pt{mu_upper(s, p, lim), s};
    out.rows.push_back({s, pt.mu, want_oc ? eval.oc(pt).value : nan, want_asn ? eval.asn(pt) : nan});
  }
  return out;
}

std::string band_csv(const BandSweep& sweep) {
  std::string out = "sigma,mu,oc,asn\n";
  for (const BandRow& r : sweep.rows) {
    out += number(r.sigma) + "," + number(r.mu) + "," + number(r.oc) + "," + number(r.asn) + "\n";
  }
  return out;
}

std::vector<BandRow> parse_band_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "sigma,mu,oc,asn") {
    throw DocumentFormatError("band CSV must start with the header sigma,mu,oc,asn");
  }
  std::vector<BandRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 4) throw DocumentFormatError("band CSV rows need four columns");
    rows.push_back({parse_number(cells[0]), parse_number(cells[1]), parse_number(cells[2]), parse_number(cells[3])});
  }
  return rows;
}

}  // namespace amdsp
