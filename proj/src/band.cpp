#include "amdsp/band.hpp"

#include "amdsp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amdsp {

std::vector<double> band_sigma_grid(double sigma0, int points) {
  if (points < 2) throw std::invalid_argument("band grid needs at least two points");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("band grid needs sigma0 > 0");
  std::vector<double> grid(points);
  const double lo = std::log(sigma0 * 1e-3);
  const double hi = std::log(sigma0);
  // (lo, hi]: the open end is shifted by one step
  const double step = (hi - lo) / points;
  for (int i = 0; i < points; ++i) grid[i] = std::exp(lo + step * (i + 1));
  grid.back() = sigma0;
  return grid;
}

BandExtreme extremize_band(const std::function<double(double)>& profile, double sigma0,
                           Extremum mode, int grid_points, double log_tol) {
  const std::vector<double> grid = band_sigma_grid(sigma0, grid_points);
  const double sign = mode == Extremum::max ? 1.0 : -1.0;
  std::vector<double> values(grid.size());
  const auto count = static_cast<long>(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) values[i] = sign * profile(grid[i]);

  const auto best = static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
  BandExtreme result{grid[best], sign * values[best]};
  const double lo = std::log(best == 0 ? grid[0] * grid[0] / grid[1] : grid[best - 1]);
  const double hi = std::log(best + 1 == grid.size() ? grid.back() : grid[best + 1]);
  auto in_log = [&](double x) { return sign * profile(std::min(std::exp(x), sigma0)); };
  const ScalarExtreme refined = golden_section_max(in_log, lo, hi, log_tol);
  if (refined.value > sign * result.value) {
    result = {std::min(std::exp(refined.x), sigma0), sign * refined.value};
  }
  return result;
}

}  // namespace amdsp
