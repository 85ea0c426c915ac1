#pragma once

// Inverse-transform sampling from a tabulated survival function.
//
// Uniform variates come from std::mt19937_64 (64-bit Mersenne Twister, whose
// output sequence the C++ standard fixes exactly), taking the top 53 bits of
// each draw. Between table nodes the survival function is interpolated
// linearly in (ln R, ln F).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "powertail/distribution.hpp"
#include "powertail/errors.hpp"

namespace powertail {

struct GridSpec {
  double r_min = 1e-3;
  double r_max = 1e4;
  std::size_t points = 600;
  /// Tabulation must reach a survival value at or below this.
  double floor = 1e-3;

  void validate() const {
    if (points < 2) throw ConfigError("grid needs at least 2 points");
    if (!(r_min > 0.0) || !(r_max > r_min) || !std::isfinite(r_max)) {
      throw ConfigError("grid needs 0 < r_min < r_max");
    }
    if (!(floor > 0.0 && floor < 1.0)) throw ConfigError("floor must lie in (0, 1)");
  }
};

/// Survival values on R = 0 followed by a log-spaced grid; strictly decreasing.
struct SurvivalTable {
  std::vector<double> r_grid;
  std::vector<double> f_values;
  ModelParams params;
  /// Grid points removed because quadrature ripple broke strict decrease.
  std::size_t dropped = 0;

  double r_min() const { return r_grid.at(1); }
  double r_max() const { return r_grid.back(); }

  /// Interpolated survival: linear on [0, r_min], log-log between later
  /// nodes, the last tabulated value beyond r_max.
  double survival(double R) const {
    if (R <= 0.0) return f_values.front();
    if (R >= r_grid.back()) return f_values.back();
    const auto it = std::upper_bound(r_grid.begin(), r_grid.end(), R);
    const std::size_t i = static_cast<std::size_t>(it - r_grid.begin()) - 1;
    if (i == 0) return f_values[0] + (f_values[1] - f_values[0]) * R / r_grid[1];
    const double t = std::log(R / r_grid[i]) / std::log(r_grid[i + 1] / r_grid[i]);
    return std::exp(std::log(f_values[i]) + t * std::log(f_values[i + 1] / f_values[i]));
  }
};

inline SurvivalTable tabulate(const ModelParams& params, const QuadratureSettings& quad = {},
                              const GridSpec& grid = {}) {
  grid.validate();
  std::vector<double> rs{0.0};
  for (double r : log_grid(grid.r_min, grid.r_max, grid.points)) rs.push_back(r);
  const std::vector<double> fs = Model(params, quad).survival(rs);

  SurvivalTable table;
  table.params = params;
  table.r_grid.push_back(rs[0]);
  table.f_values.push_back(fs[0]);
  for (std::size_t i = 1; i < rs.size(); ++i) {
    if (fs[i] > 0.0 && fs[i] < table.f_values.back()) {
      table.r_grid.push_back(rs[i]);
      table.f_values.push_back(fs[i]);
    } else {
      ++table.dropped;
    }
  }
  if (table.r_grid.size() < 2 || table.r_grid[1] != rs[1]) {
    throw RangeError("tabulate: survival at r_min is not below survival at 0");
  }
  if (table.f_values.back() > grid.floor) {
    throw RangeError("tabulate: survival " + std::to_string(table.f_values.back()) + " at r_max = " +
                     std::to_string(table.r_max()) + " is above the floor; increase r_max");
  }
  return table;
}

/// Inverse of the interpolated survival function: R with F(R) = u.
/// u above F(r_min) maps to r_min; u below F(r_max) maps to r_max.
inline double inverse_survival(const SurvivalTable& table, double u) {
  const auto& r = table.r_grid;
  const auto& f = table.f_values;
  if (u >= f[1]) return r[1];
  if (u <= f.back()) return r.back();
  // first index with f < u; f strictly decreasing, so it lies in [2, size-1]
  const auto it = std::upper_bound(f.begin() + 1, f.end(), u, [](double a, double b) { return a > b; });
  const std::size_t j = static_cast<std::size_t>(it - f.begin());
  const std::size_t i = j - 1;
  const double t = std::log(u / f[i]) / std::log(f[j] / f[i]);
  return std::exp(std::log(r[i]) + t * std::log(r[j] / r[i]));
}

/// n variates; identical (table, n, seed) give bit-identical output.
inline std::vector<double> sample(const SurvivalTable& table, std::size_t n, std::uint64_t seed) {
  if (table.r_grid.size() < 2 || table.r_grid.size() != table.f_values.size()) {
    throw DomainError("sample: malformed survival table");
  }
  std::mt19937_64 engine(seed);
  std::vector<double> out(n);
  for (double& v : out) {
    const double u = (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;  // in (0, 1)
    v = inverse_survival(table, u);
  }
  return out;
}

}  // namespace powertail
