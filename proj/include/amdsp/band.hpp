#pragma once

#include <functional>
#include <vector>

namespace amdsp {

enum class Extremum { min, max };

/// Extreme of an OC (or ASN) profile along one iso-p-line.
struct BandExtreme {
  double sigma_star = 0.0;
  double value = 0.0;
};

/// Geometric grid of `points` sigmas on (sigma0 * 1e-3, sigma0], increasing,
/// last point exactly sigma0.
std::vector<double> band_sigma_grid(double sigma0, int points);

/// Coarse geometric grid followed by golden-section refinement (in log sigma)
/// around the best cell. `profile` must be safe to call concurrently; grid
/// points are evaluated in parallel.
BandExtreme extremize_band(const std::function<double(double)>& profile, double sigma0,
                           Extremum mode, int grid_points = 64, double log_tol = 1e-7);

}  // namespace amdsp
