// amdsp: design and evaluate double sampling plans by variables.

#include "amdsp/double_plan.hpp"
#include "amdsp/mc_oracle.hpp"
#include "amdsp/one_sided.hpp"
#include "amdsp/plan_io.hpp"
#include "amdsp/single_plan.hpp"
#include "amdsp/special_functions.hpp"

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace amdsp;
using nlohmann::json;

enum Exit { kOk = 0, kUsage = 2, kInfeasible = 3, kNumerical = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadFlags {
  int nodes = 32;
  double tol = 1e-6;
  std::string formula;
};

void add_quad_flags(CLI::App* cmd, QuadFlags& q, const std::string& default_formula) {
  q.formula = default_formula;
  cmd->add_option("--quad-nodes", q.nodes, "Gauss-Legendre nodes per dimension")
      ->check(CLI::Range(8, 256))
      ->capture_default_str();
  cmd->add_option("--tol", q.tol, "absolute tolerance on probabilities")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--formula", q.formula, "second-stage integral: exact or printed")
      ->check(CLI::IsMember({"exact", "printed"}))
      ->capture_default_str();
}

QuadratureConfig config_from(const QuadFlags& q, bool estimate_error) {
  QuadratureConfig cfg;
  cfg.nodes_per_dim = q.nodes;
  cfg.abs_tol = q.tol;
  cfg.estimate_error = estimate_error;
  cfg.formula = parse_oc_formula(q.formula);
  return cfg;
}

PlanDocument read_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open plan file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_plan_document(buf.str());
  } catch (const DocumentFormatError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void apply_thread_limit() {
  const char* env = std::getenv("AMDSP_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw UsageError("AMDSP_THREADS must be a positive integer");
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(n));
#endif
}

json single_design_json(const SingleDesign& d) {
  return {{"n", d.plan.n},         {"k", d.plan.k},           {"alpha_star", d.alpha_star},
          {"beta_star", d.beta_star}, {"alpha_eff", d.alpha_eff}, {"beta_eff", d.beta_eff}};
}

json trace_json(const TighteningTrace& trace) {
  json rows = json::array();
  for (const auto& row : trace) rows.push_back(to_json(row));
  return rows;
}

// --- design ---------------------------------------------------------------

struct DesignFlags {
  std::string kind = "double";
  double lower = 0.0, upper = 0.0;
  double p1 = 0.0, p2 = 0.0, alpha = 0.0, beta = 0.0;
  double step = 0.001;
  int max_iterations = 200;
  bool quiet = false;
  QuadFlags quad;
};

int run_design(const DesignFlags& f) {
  const SpecLimits lim(f.lower, f.upper);
  const DesignRequirement req(f.p1, f.p2, f.alpha, f.beta);
  if (f.kind == "single") {
    const SingleDesign d = design_single(req, lim, f.step);
    PlanDocument doc{rounded_thresholds(d.plan), lim, {{"requirement", to_json(req)}, {"design", single_design_json(d)}}};
    std::cout << print_plan_document(doc);
    return kOk;
  }

  TwoSidedDesignOptions opt;
  opt.band_quadrature = config_from(f.quad, false);
  opt.step = f.step;
  opt.max_iterations = f.max_iterations;
  if (!f.quiet) {
    opt.on_row = [](const TighteningRow& r) {
      std::cerr << "alpha** " << r.alpha_star2 << "  n_max " << r.n_max << "  min OC(p1) " << r.min_oc_p1.value
                << "  max OC(p2) " << r.max_oc_p2.value << (r.passes ? "  accepted" : "") << "\n";
    };
  }
  try {
    const TwoSidedDesign d = design_two_sided_am(req, lim, opt);
    const TighteningRow& last = d.trace.back();
    // error estimates at the two band extremes of the final plan
    QuadratureConfig check = opt.band_quadrature;
    check.estimate_error = true;
    check.abs_tol = std::max(check.abs_tol, 1.0);  // report, do not throw
    const DoublePlanEvaluator eval(d.plan, lim, check);
    const double err_p1 =
        eval.oc(ProcessPoint{mu_upper(last.min_oc_p1.sigma_star, req.p1, lim), last.min_oc_p1.sigma_star}).error;
    const double err_p2 =
        eval.oc(ProcessPoint{mu_upper(last.max_oc_p2.sigma_star, req.p2, lim), last.max_oc_p2.sigma_star}).error;
    json prov{{"requirement", to_json(req)},
              {"single_design", single_design_json(d.single)},
              {"band_formula", to_string(opt.band_quadrature.formula)},
              {"quad_nodes", opt.band_quadrature.nodes_per_dim},
              {"n_max", last.n_max},
              {"oc_error_estimates", {{"min_oc_p1", err_p1}, {"max_oc_p2", err_p2}}},
              {"trace", trace_json(d.trace)}};
    std::cout << print_plan_document(PlanDocument{rounded_thresholds(d.plan), lim, prov});
    return kOk;
  } catch (const TighteningExhausted& e) {
    std::cout << json{{"schema_version", kSchemaVersion}, {"error", e.what()}, {"trace", trace_json(e.trace())}}.dump(2)
              << "\n";
    throw;
  }
}

// --- eval -----------------------------------------------------------------

struct PointFlags {
  std::string plan;
  double mu = 0.0, sigma = 0.0;
  QuadFlags quad;
};

int run_eval(const PointFlags& f) {
  const PlanDocument doc = read_plan(f.plan);
  const ProcessPoint pt(f.mu, f.sigma);
  const QuadratureConfig cfg = config_from(f.quad, true);
  json out{{"schema_version", kSchemaVersion}, {"kind", plan_kind(doc.plan)}, {"mu", f.mu}, {"sigma", f.sigma},
           {"quad_nodes", cfg.nodes_per_dim}, {"tol", cfg.abs_tol}};
  if (const auto* s = std::get_if<SinglePlan>(&doc.plan)) {
    const IntegralResult oc = SinglePlanOC(*s, doc.limits).evaluate(pt);
    out.update({{"fraction_defective", fraction_defective(pt, doc.limits)},
                {"oc", oc.value}, {"oc_error", oc.error}, {"asn", double(s->n)}, {"asn_error", 0.0}});
  } else if (const auto* d = std::get_if<DoublePlan>(&doc.plan)) {
    const DoublePlanEvaluator eval(*d, doc.limits, cfg);
    const IntegralResult oc = eval.oc(pt);
    out.update({{"fraction_defective", fraction_defective(pt, doc.limits)},
                {"formula", to_string(cfg.formula)},
                {"oc", oc.value},
                {"oc_error", oc.error},
                {"asn", eval.asn(pt)},
                {"asn_error", 0.0}});
  } else {
    // one-sided plans see the upper limit only
    const auto& o = std::get<OneSidedDoublePlan>(doc.plan);
    const double p = normal_cdf((f.mu - doc.limits.upper) / f.sigma);
    const double oc = oc_one_sided_double(o, p, cfg.nodes_per_dim);
    const double finer = oc_one_sided_double(o, p, cfg.nodes_per_dim + 8);
    if (std::abs(oc - finer) > cfg.abs_tol) throw NumericalFailure("one-sided OC misses the tolerance", std::abs(oc - finer));
    out.update({{"fraction_defective", p}, {"oc", oc}, {"oc_error", std::abs(oc - finer)},
                {"asn", asn_one_sided(o, p)}, {"asn_error", 0.0}});
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

// --- band -----------------------------------------------------------------

struct BandFlags {
  std::string plan;
  double p = 0.0;
  int points = 64;
  std::string what = "both";
  QuadFlags quad;
};

int run_band(const BandFlags& f) {
  const PlanDocument doc = read_plan(f.plan);
  if (!(f.p > 0.0 && f.p < 1.0)) throw UsageError("--p must lie in (0, 1)");
  if (std::holds_alternative<OneSidedDoublePlan>(doc.plan)) throw UsageError("band needs a two-sided plan");
  const BandColumns what = f.what == "oc" ? BandColumns::oc : f.what == "asn" ? BandColumns::asn : BandColumns::both;
  QuadratureConfig cfg = config_from(f.quad, false);
  const BandSweep sweep = sweep_band(doc.plan, doc.limits, f.p, f.points, what, cfg);
  // achieved error at the grid point with the widest estimate among a few
  if (what != BandColumns::asn && std::holds_alternative<DoublePlan>(doc.plan)) {
    cfg.estimate_error = true;
    cfg.abs_tol = std::max(cfg.abs_tol, 1.0);
    const DoublePlanEvaluator eval(std::get<DoublePlan>(doc.plan), doc.limits, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < sweep.rows.size(); i += std::max<std::size_t>(1, sweep.rows.size() / 4)) {
      worst = std::max(worst, eval.oc(ProcessPoint{sweep.rows[i].mu, sweep.rows[i].sigma}).error);
    }
    std::cerr << "oc error estimate (max over sampled rows): " << worst << "\n";
    if (worst > f.quad.tol) {
      throw NumericalFailure("band OC misses the requested tolerance", worst);
    }
  }
  std::cout << band_csv(sweep);
  return kOk;
}

// --- simulate -------------------------------------------------------------

struct SimFlags {
  std::string plan;
  double mu = 0.0, sigma = 0.0;
  long replicates = 1000000;
  std::uint64_t seed = 1;
  QuadFlags quad;
};

int run_simulate(const SimFlags& f) {
  const PlanDocument doc = read_plan(f.plan);
  const ProcessPoint pt(f.mu, f.sigma);
  if (f.replicates < 1) throw UsageError("--replicates must be at least 1");
  SimulationResult r;
  if (const auto* s = std::get_if<SinglePlan>(&doc.plan)) {
    r = simulate_single_plan(*s, pt, doc.limits, f.replicates, f.seed);
  } else if (const auto* d = std::get_if<DoublePlan>(&doc.plan)) {
    r = simulate_double_plan(*d, pt, doc.limits, f.replicates, f.seed);
  } else {
    throw UsageError("simulate needs a two-sided plan");
  }
  std::cout << to_json(r).dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ASN-minimax double sampling plans by variables (two-sided limits, unknown sigma)"};
  app.require_subcommand(1);

  DesignFlags design;
  auto* cmd_design = app.add_subcommand("design", "design a single or double plan for a two-point requirement");
  cmd_design->add_option("--kind", design.kind)->check(CLI::IsMember({"single", "double"}))->capture_default_str();
  cmd_design->add_option("--lower", design.lower)->required();
  cmd_design->add_option("--upper", design.upper)->required();
  cmd_design->add_option("--p1", design.p1)->required();
  cmd_design->add_option("--p2", design.p2)->required();
  cmd_design->add_option("--alpha", design.alpha)->required();
  cmd_design->add_option("--beta", design.beta)->required();
  cmd_design->add_option("--step", design.step, "decrement of the one-sided alpha level")->capture_default_str();
  cmd_design->add_option("--max-iterations", design.max_iterations)->capture_default_str();
  cmd_design->add_flag("--quiet", design.quiet, "no progress on stderr");
  add_quad_flags(cmd_design, design.quad, "printed");

  PointFlags eval;
  auto* cmd_eval = app.add_subcommand("eval", "OC and ASN of a plan at one process point");
  cmd_eval->add_option("--plan", eval.plan)->required();
  cmd_eval->add_option("--mu", eval.mu)->required();
  cmd_eval->add_option("--sigma", eval.sigma)->required();
  add_quad_flags(cmd_eval, eval.quad, "exact");

  BandFlags band;
  auto* cmd_band = app.add_subcommand("band", "OC/ASN along one iso-p-line as CSV");
  cmd_band->add_option("--plan", band.plan)->required();
  cmd_band->add_option("--p", band.p)->required();
  cmd_band->add_option("--points", band.points)->check(CLI::Range(1, 100000))->capture_default_str();
  cmd_band->add_option("--what", band.what)->check(CLI::IsMember({"oc", "asn", "both"}))->capture_default_str();
  add_quad_flags(cmd_band, band.quad, "exact");

  SimFlags sim;
  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo estimate of OC and ASN");
  cmd_sim->add_option("--plan", sim.plan)->required();
  cmd_sim->add_option("--mu", sim.mu)->required();
  cmd_sim->add_option("--sigma", sim.sigma)->required();
  cmd_sim->add_option("--replicates", sim.replicates)->capture_default_str();
  cmd_sim->add_option("--seed", sim.seed)->capture_default_str();
  add_quad_flags(cmd_sim, sim.quad, "exact");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    apply_thread_limit();
    if (*cmd_design) return run_design(design);
    if (*cmd_eval) return run_eval(eval);
    if (*cmd_band) return run_band(band);
    if (*cmd_sim) return run_simulate(sim);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InfeasibleRequirement& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << " (achieved error " << e.achieved_error() << ")\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
