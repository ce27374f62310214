#pragma once

#include "amdsp/double_plan.hpp"
#include "amdsp/single_plan.hpp"

#include <cstdint>

namespace amdsp {

struct SimulationResult {
  double acceptance_rate = 0.0;
  double asn_estimate = 0.0;
  long replicates = 0;
  double se_acceptance = 0.0;
  double se_asn = 0.0;
  std::uint64_t seed = 0;
};

/// Runs the two-stage procedure on simulated lots. Replicate i draws its
/// normals from a stream keyed by (seed, i), so results do not depend on the
/// thread count.
SimulationResult simulate_double_plan(const DoublePlan& plan, const ProcessPoint& pt, const SpecLimits& lim,
                                      long replicates, std::uint64_t seed);

SimulationResult simulate_single_plan(const SinglePlan& plan, const ProcessPoint& pt, const SpecLimits& lim,
                                      long replicates, std::uint64_t seed);

}  // namespace amdsp
