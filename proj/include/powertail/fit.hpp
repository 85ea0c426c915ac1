#pragma once

// Least-squares fit of the model survival function to an empirical one in
// log space: minimize sum_i (ln F_model(R_i) - ln F_emp(R_i))^2 over a
// log-spaced grid, beta held fixed unless fit_beta is set.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "powertail/distribution.hpp"
#include "powertail/empirical.hpp"
#include "powertail/errors.hpp"
#include "powertail/simplex.hpp"

namespace powertail {

struct FitBounds {
  double t_min = 1e-3;
  double t_max = 20.0;
  double theta_min = 1e-2;
  double theta_max = 500.0;
  double beta_min = 1.5 + 1e-3;
  double beta_max = 10.0;
};

struct FitConfig {
  /// Log-spaced evaluation abscissae before tail filtering.
  std::size_t grid_points = 40;
  /// Grid span; when empty, taken from the 1% and 99.9% sample quantiles.
  std::optional<std::pair<double, double>> r_range;
  /// Grid points with fewer exceedances than this are dropped.
  std::size_t min_tail_count = 5;
  FitBounds bounds;
  double beta_fixed = 2.0;
  bool fit_beta = false;
  double initial_theta = 10.0;
  SimplexOptions minimizer{1e-6, 1e-10, 2000};
  QuadratureSettings quad = QuadratureSettings::fast();

  void validate() const {
    if (grid_points < 10) throw ConfigError("grid_points must be >= 10");
    if (min_tail_count < 1) throw ConfigError("min_tail_count must be >= 1");
    if (r_range && !(r_range->first > 0.0 && r_range->second > r_range->first)) {
      throw ConfigError("r_range must satisfy 0 < lo < hi");
    }
    const FitBounds& b = bounds;
    if (!(0.0 < b.t_min && b.t_min < b.t_max) || !(0.0 < b.theta_min && b.theta_min < b.theta_max) ||
        !(1.5 < b.beta_min && b.beta_min < b.beta_max)) {
      throw ConfigError("fit bounds are empty");
    }
    if (!fit_beta && !(beta_fixed > 1.5)) throw ConfigError("beta_fixed must exceed 3/2");
    quad.validate();
  }
};

struct FitResult {
  ModelParams params;
  double objective = 0.0;
  std::vector<double> grid;       ///< abscissae actually used
  std::vector<double> residuals;  ///< ln F_model - ln F_emp per grid point
  int iterations = 0;
  bool converged = false;
};

inline constexpr std::size_t kMinFitPoints = 10;

namespace detail {

// Residuals for one parameter set; nullopt when the model cannot be evaluated there.
inline std::optional<std::vector<double>> log_residuals(const ModelParams& p, std::span<const double> grid,
                                                        std::span<const double> log_emp,
                                                        const QuadratureSettings& quad) {
  try {
    const std::vector<double> f = Model(p, quad).survival(grid);
    std::vector<double> r(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) r[i] = std::log(std::max(f[i], 1e-300)) - log_emp[i];
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline double sum_squares(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

}  // namespace detail

/// Fits to a tabulated survival curve (grid R_i > 0, values F_i in (0, 1]).
/// initial_T seeds the simplex; when absent it is the area under the curve.
inline FitResult fit_curve(std::span<const double> grid, std::span<const double> f_emp, const FitConfig& config,
                           std::optional<double> initial_T = std::nullopt) {
  config.validate();
  if (grid.size() != f_emp.size()) throw DomainError("fit_curve: grid and values differ in length");
  if (grid.size() < kMinFitPoints) {
    throw DataError("insufficient data: " + std::to_string(grid.size()) + " usable grid points, need " +
                    std::to_string(kMinFitPoints));
  }
  std::vector<double> log_emp(f_emp.size());
  for (std::size_t i = 0; i < f_emp.size(); ++i) {
    if (!(grid[i] > 0.0) || !(f_emp[i] > 0.0 && f_emp[i] <= 1.0)) {
      throw DataError("fit_curve: need R > 0 and 0 < F <= 1 at point " + std::to_string(i));
    }
    log_emp[i] = std::log(f_emp[i]);
  }

  double t0 = 0.0;
  if (initial_T) {
    t0 = *initial_T;
  } else {
    t0 = grid[0];  // F ~ 1 below the grid
    for (std::size_t i = 1; i < grid.size(); ++i) t0 += 0.5 * (f_emp[i] + f_emp[i - 1]) * (grid[i] - grid[i - 1]);
  }
  const FitBounds& b = config.bounds;
  t0 = std::clamp(t0, b.t_min, b.t_max);
  const double theta0 = std::clamp(config.initial_theta, b.theta_min, b.theta_max);

  // Search in log coordinates: (ln T, ln theta[, ln(beta - 3/2)]).
  std::vector<double> start{std::log(t0), std::log(theta0)};
  std::vector<double> step{0.3, 0.3};
  std::vector<double> lower{std::log(b.t_min), std::log(b.theta_min)};
  std::vector<double> upper{std::log(b.t_max), std::log(b.theta_max)};
  if (config.fit_beta) {
    const double beta0 = std::clamp(config.beta_fixed, b.beta_min, b.beta_max);
    start.push_back(std::log(beta0 - 1.5));
    step.push_back(0.3);
    lower.push_back(std::log(b.beta_min - 1.5));
    upper.push_back(std::log(b.beta_max - 1.5));
  }
  auto to_params = [&](std::span<const double> z) {
    return ModelParams{std::exp(z[0]), config.fit_beta ? 1.5 + std::exp(z[2]) : config.beta_fixed, std::exp(z[1])};
  };
  constexpr double kUnevaluable = 1e300;
  auto objective = [&](std::span<const double> z) {
    const auto r = detail::log_residuals(to_params(z), grid, log_emp, config.quad);
    return r ? detail::sum_squares(*r) : kUnevaluable;
  };

  const SimplexResult sr = minimize_in_box(objective, start, step, lower, upper, config.minimizer);
  FitResult result;
  result.params = to_params(sr.x);
  result.grid.assign(grid.begin(), grid.end());
  if (auto r = detail::log_residuals(result.params, grid, log_emp, config.quad)) {
    result.residuals = std::move(*r);
    result.objective = detail::sum_squares(result.residuals);
  } else {
    result.objective = kUnevaluable;
  }
  result.iterations = sr.iterations;
  result.converged = sr.converged && result.objective < kUnevaluable;
  return result;
}

/// Log-spaced fit grid for a sample, keeping only points with at least
/// min_tail_count exceedances.
inline std::vector<double> fit_grid(const EmpiricalSurvival& emp, const FitConfig& config) {
  double lo = 0.0;
  double hi = 0.0;
  if (config.r_range) {
    std::tie(lo, hi) = *config.r_range;
  } else {
    lo = emp.quantile(0.01);
    hi = emp.quantile(0.999);
    if (!(lo > 0.0)) {
      const auto& v = emp.values();
      const auto first_positive = std::upper_bound(v.begin(), v.end(), 0.0);
      lo = first_positive == v.end() ? 0.0 : *first_positive;
    }
  }
  std::vector<double> kept;
  if (lo > 0.0 && hi > lo) {
    for (double r : log_grid(lo, hi, config.grid_points)) {
      if (emp.count_above(r) >= config.min_tail_count) kept.push_back(r);
    }
  }
  return kept;
}

/// Fits (T, theta) (and beta when config.fit_beta) to observed impact factors.
/// A minimizer that runs out of iterations yields converged = false rather
/// than an exception.
inline FitResult fit(std::span<const double> values, const FitConfig& config = {}) {
  config.validate();
  const EmpiricalSurvival emp(values);
  const std::vector<double> grid = fit_grid(emp, config);
  if (grid.size() < kMinFitPoints) {
    throw DataError("insufficient data: " + std::to_string(grid.size()) + " usable grid points from " +
                    std::to_string(emp.n()) + " values, need " + std::to_string(kMinFitPoints));
  }
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = emp(grid[i]);
  const double mean = std::accumulate(emp.values().begin(), emp.values().end(), 0.0) / static_cast<double>(emp.n());
  return fit_curve(grid, f, config, mean);
}

}  // namespace powertail
