#pragma once

// Nelder-Mead simplex search inside a box. Trial points are projected onto
// the box before evaluation, so the objective is never called outside it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "powertail/errors.hpp"

namespace powertail {

struct SimplexOptions {
  double x_tol = 1e-8;   ///< max vertex distance from the best vertex, per coordinate
  double f_tol = 1e-12;  ///< max objective spread across vertices
  int max_iterations = 2000;
};

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <class Objective>
SimplexResult minimize_in_box(Objective&& objective, std::span<const double> start, std::span<const double> step,
                              std::span<const double> lower, std::span<const double> upper,
                              const SimplexOptions& options = {}) {
  const std::size_t dim = start.size();
  if (dim == 0 || step.size() != dim || lower.size() != dim || upper.size() != dim) {
    throw DomainError("minimize_in_box: dimension mismatch");
  }
  for (std::size_t k = 0; k < dim; ++k) {
    if (!(lower[k] < upper[k])) throw ConfigError("minimize_in_box: empty box");
  }
  auto project = [&](std::vector<double> p) {
    for (std::size_t k = 0; k < dim; ++k) p[k] = std::clamp(p[k], lower[k], upper[k]);
    return p;
  };

  std::vector<std::vector<double>> pts(dim + 1, project(std::vector<double>(start.begin(), start.end())));
  for (std::size_t k = 0; k < dim; ++k) {
    std::vector<double> p = pts[0];
    p[k] += step[k];
    if (p[k] > upper[k]) p[k] = pts[0][k] - step[k];
    pts[k + 1] = project(std::move(p));
  }
  std::vector<double> vals(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) vals[i] = objective(std::span<const double>(pts[i]));

  std::vector<std::size_t> order(dim + 1);
  auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2(dim + 1);
    std::vector<double> v2(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) {
      p2[i] = std::move(pts[order[i]]);
      v2[i] = vals[order[i]];
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };
  auto converged = [&] {
    if (vals[dim] - vals[0] > options.f_tol) return false;
    for (std::size_t i = 1; i <= dim; ++i) {
      for (std::size_t k = 0; k < dim; ++k) {
        if (std::abs(pts[i][k] - pts[0][k]) > options.x_tol) return false;
      }
    }
    return true;
  };
  auto along = [&](const std::vector<double>& from, const std::vector<double>& to, double t) {
    std::vector<double> p(dim);
    for (std::size_t k = 0; k < dim; ++k) p[k] = from[k] + t * (to[k] - from[k]);
    return project(std::move(p));
  };

  SimplexResult result;
  int iter = 0;
  sort_vertices();
  for (; iter < options.max_iterations; ++iter) {
    if (converged()) {
      result.converged = true;
      break;
    }
    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += pts[i][k] / static_cast<double>(dim);
    }
    const std::vector<double> reflected = along(centroid, pts[dim], -1.0);
    const double f_reflected = objective(std::span<const double>(reflected));
    if (f_reflected < vals[0]) {
      const std::vector<double> expanded = along(centroid, pts[dim], -2.0);
      const double f_expanded = objective(std::span<const double>(expanded));
      if (f_expanded < f_reflected) {
        pts[dim] = expanded;
        vals[dim] = f_expanded;
      } else {
        pts[dim] = reflected;
        vals[dim] = f_reflected;
      }
    } else if (f_reflected < vals[dim - 1]) {
      pts[dim] = reflected;
      vals[dim] = f_reflected;
    } else {
      const bool outside = f_reflected < vals[dim];
      const std::vector<double> contracted =
          outside ? along(centroid, reflected, 0.5) : along(centroid, pts[dim], 0.5);
      const double f_contracted = objective(std::span<const double>(contracted));
      if (f_contracted < (outside ? f_reflected : vals[dim])) {
        pts[dim] = contracted;
        vals[dim] = f_contracted;
      } else {
        for (std::size_t i = 1; i <= dim; ++i) {
          pts[i] = along(pts[0], pts[i], 0.5);
          vals[i] = objective(std::span<const double>(pts[i]));
        }
      }
    }
    sort_vertices();
  }
  if (!result.converged && converged()) result.converged = true;
  result.x = pts[0];
  result.f = vals[0];
  result.iterations = iter;
  return result;
}

}  // namespace powertail
