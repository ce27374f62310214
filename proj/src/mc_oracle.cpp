#include "amdsp/mc_oracle.hpp"

#include "amdsp/special_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace amdsp {

namespace {

// SplitMix64 finaliser; a replicate's stream is the sequence mix(key + j * gamma).
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t replicate)
      : state_(mix(seed ^ mix(replicate + kGamma))) {}
  double next() {
    state_ += kGamma;
    const double u = (static_cast<double>(mix(state_) >> 11) + 0.5) * 0x1.0p-53;
    return normal_quantile(u);
  }

 private:
  std::uint64_t state_;
};

// Sums of d = x - shift and d^2 over a sample.
struct Moments {
  int n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double d) {
    ++n;
    sum += d;
    sum_sq += d * d;
  }
  double mean_offset() const { return sum / n; }
  double sd() const {
    const double m = sum / n;
    return std::sqrt(std::max(0.0, (sum_sq - n * m * m) / (n - 1)));
  }
};

double estimate(const Moments& m, double shift, const SpecLimits& lim) {
  const double s = m.sd();
  const double mean = shift + m.mean_offset();
  if (!(s > 0.0)) return (mean < lim.lower || mean > lim.upper) ? 1.0 : 0.0;
  return normal_cdf((lim.lower - mean) / s) + normal_cdf((mean - lim.upper) / s);
}

struct Tally {
  double accepted = 0.0;
  double size = 0.0;
  double size_sq = 0.0;
};

// `run` plays one replicate and returns (accepted, sample size used); each
// replicate has its own stream, so results do not depend on the thread count.
template <class Run>
SimulationResult simulate(long replicates, std::uint64_t seed, Run&& run) {
  if (replicates < 1) throw std::invalid_argument("simulation needs at least one replicate");
  constexpr long kBatch = 4096;
  const long batches = (replicates + kBatch - 1) / kBatch;
  std::vector<Tally> parts(batches);
#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < batches; ++b) {
    Tally t;
    const long end = std::min(replicates, (b + 1) * kBatch);
    for (long i = b * kBatch; i < end; ++i) {
      NormalStream z(seed, static_cast<std::uint64_t>(i));
      const auto [accepted, size] = run(z);
      t.accepted += accepted ? 1.0 : 0.0;
      t.size += size;
      t.size_sq += double(size) * size;
    }
    parts[b] = t;
  }
  Tally total;
  for (const Tally& t : parts) {
    total.accepted += t.accepted;
    total.size += t.size;
    total.size_sq += t.size_sq;
  }
  const double r = double(replicates);
  SimulationResult out;
  out.replicates = replicates;
  out.seed = seed;
  out.acceptance_rate = total.accepted / r;
  out.asn_estimate = total.size / r;
  const double p = out.acceptance_rate;
  out.se_acceptance = std::sqrt(p * (1.0 - p) / r);
  const double var_size = std::max(0.0, total.size_sq / r - out.asn_estimate * out.asn_estimate);
  out.se_asn = std::sqrt(var_size / r);
  return out;
}

}  // namespace

SimulationResult simulate_double_plan(const DoublePlan& plan, const ProcessPoint& pt, const SpecLimits& lim,
                                      long replicates, std::uint64_t seed) {
  const double shift = lim.midpoint();
  const double centre = pt.mu - shift;
  return simulate(replicates, seed, [&](NormalStream& z) {
    Moments m;
    for (int j = 0; j < plan.n1; ++j) m.add(centre + pt.sigma * z.next());
    const double p1 = estimate(m, shift, lim);
    if (p1 <= plan.k1) return std::pair{true, plan.n1};
    if (p1 > plan.k2) return std::pair{false, plan.n1};
    for (int j = 0; j < plan.n2; ++j) m.add(centre + pt.sigma * z.next());
    return std::pair{estimate(m, shift, lim) <= plan.k3, plan.n1 + plan.n2};
  });
}

SimulationResult simulate_single_plan(const SinglePlan& plan, const ProcessPoint& pt, const SpecLimits& lim,
                                      long replicates, std::uint64_t seed) {
  const double shift = lim.midpoint();
  const double centre = pt.mu - shift;
  return simulate(replicates, seed, [&](NormalStream& z) {
    Moments m;
    for (int j = 0; j < plan.n; ++j) m.add(centre + pt.sigma * z.next());
    return std::pair{estimate(m, shift, lim) <= plan.k, plan.n};
  });
}

}  // namespace amdsp
