#pragma once

// Truncated Fourier-cosine inversion of smooth, decaying kernels:
//   I(omega) = int_0^inf cos(omega x) f(x) dx
// by composite Gauss-Legendre panels whose width follows the oscillation
// period 2 pi / omega, with a panel-doubling convergence check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "powertail/errors.hpp"

namespace powertail {

/// Controls for the oscillatory inversion integrals.
struct QuadratureSettings {
  /// The x-integral is cut where the kernel drops below this value.
  double kernel_floor = 1e-15;
  /// Quadrature nodes per period 2 pi / omega of the cosine factor.
  int nodes_per_period = 16;
  /// Upper bound on nodes used by a single inversion.
  std::size_t max_nodes = std::size_t{1} << 20;
  /// Upper R limit standing in for infinity when a density is integrated over R.
  double survival_r_max = 1000.0;
  /// Absolute tolerance between successive panel doublings; also the
  /// threshold below which negative ripple is clipped to zero.
  double abs_tol = 1e-10;
  /// Largest tolerated R * W(R) at survival_r_max when integrating over R.
  double tail_tol = 1e-3;

  void validate() const {
    if (!(kernel_floor > 0.0 && kernel_floor <= 1e-6)) {
      throw ConfigError("kernel_floor must lie in (0, 1e-6]");
    }
    if (nodes_per_period < 8) throw ConfigError("nodes_per_period must be >= 8");
    if (max_nodes < 1000) throw ConfigError("max_nodes must be >= 1000");
    if (!(survival_r_max > 0.0) || !std::isfinite(survival_r_max)) {
      throw ConfigError("survival_r_max must be positive and finite");
    }
    if (!(abs_tol > 0.0)) throw ConfigError("abs_tol must be positive");
    if (!(tail_tol > 0.0)) throw ConfigError("tail_tol must be positive");
  }

  static QuadratureSettings fast() {
    QuadratureSettings q;
    q.kernel_floor = 1e-12;
    q.nodes_per_period = 8;
    q.abs_tol = 1e-8;
    return q;
  }

  static QuadratureSettings accurate() {
    QuadratureSettings q;
    q.kernel_floor = 1e-17;
    q.nodes_per_period = 32;
    q.abs_tol = 1e-12;
    return q;
  }
};

namespace quad {

inline constexpr std::size_t kPanelOrder = 8;

struct GaussLegendreRule {
  std::array<double, kPanelOrder> nodes{};    // on [-1, 1]
  std::array<double, kPanelOrder> weights{};
};

/// Gauss-Legendre rule of order kPanelOrder, by Newton iteration on P_n.
inline const GaussLegendreRule& gauss_legendre() {
  static const GaussLegendreRule rule = [] {
    GaussLegendreRule r;
    constexpr std::size_t n = kPanelOrder;
    for (std::size_t i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = z;
        for (std::size_t k = 2; k <= n; ++k) {
          const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
          p0 = p1;
          p1 = pk;
        }
        dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
        const double step = p1 / dp;
        z -= step;
        if (std::abs(step) < 1e-16) break;
      }
      r.nodes[i] = z;
      r.weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
  }();
  return rule;
}

/// Nodes of a composite rule on [a, b] with their weights already folded
/// into the tabulated function values.
struct WeightedNodes {
  std::vector<double> x;
  std::vector<double> wf;  // weight * f(x)

  std::size_t size() const noexcept { return x.size(); }
};

/// Tabulates f on `panels` equal Gauss-Legendre panels over [a, b].
template <class F>
WeightedNodes tabulate(F&& f, double a, double b, std::size_t panels) {
  const auto& rule = gauss_legendre();
  WeightedNodes out;
  out.x.reserve(panels * kPanelOrder);
  out.wf.reserve(panels * kPanelOrder);
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * width;
    for (std::size_t i = 0; i < kPanelOrder; ++i) {
      const double x = mid + 0.5 * width * rule.nodes[i];
      out.x.push_back(x);
      out.wf.push_back(0.5 * width * rule.weights[i] * f(x));
    }
  }
  return out;
}

inline double cosine_sum(const WeightedNodes& t, double omega) {
  double s = 0.0;
  if (omega == 0.0) {
    for (double v : t.wf) s += v;
    return s;
  }
  for (std::size_t i = 0; i < t.size(); ++i) s += t.wf[i] * std::cos(omega * t.x[i]);
  return s;
}

/// Smallest x (to bisection accuracy) with log_f(x) < log_floor, assuming
/// log_f eventually decreases. `scale` seeds the outward search.
template <class LogF>
double truncation_point(LogF&& log_f, double log_floor, double scale = 1.0) {
  double lo = 0.0;
  double hi = scale;
  int doublings = 0;
  while (!(log_f(hi) < log_floor)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200) throw RangeError("kernel does not decay below the truncation floor");
  }
  for (int i = 0; i < 80 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (log_f(mid) < log_floor) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Evaluates int_0^inf cos(omega x) exp(log_f(x)) dx at every omega.
///
/// The range is cut at the truncation point for settings.kernel_floor. The
/// initial node spacing resolves the fastest cosine with nodes_per_period
/// nodes; panels are doubled until no result moves by more than abs_tol.
template <class LogF>
std::vector<double> cosine_transform(LogF&& log_f, std::span<const double> omegas,
                                     const QuadratureSettings& settings, double scale = 1.0) {
  const double x_max = truncation_point(log_f, std::log(settings.kernel_floor), scale);
  double omega_max = 0.0;
  for (double w : omegas) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("cosine_transform: frequency must be finite and >= 0");
    omega_max = std::max(omega_max, w);
  }
  const double npp = settings.nodes_per_period;
  double spacing = x_max / (8.0 * npp);
  if (omega_max > 0.0) spacing = std::min(spacing, 2.0 * std::numbers::pi / (omega_max * npp));
  std::size_t panels = static_cast<std::size_t>(std::ceil(x_max / spacing / kPanelOrder));
  panels = std::max<std::size_t>(panels, 1);
  const std::size_t max_panels = std::max<std::size_t>(settings.max_nodes / kPanelOrder, 2);
  panels = std::min(panels, max_panels / 2);

  auto f = [&](double x) { return std::exp(log_f(x)); };
  auto evaluate = [&](const WeightedNodes& t) {
    std::vector<double> v(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) v[i] = cosine_sum(t, omegas[i]);
    return v;
  };

  std::vector<double> coarse = evaluate(tabulate(f, 0.0, x_max, panels));
  while (true) {
    std::vector<double> fine = evaluate(tabulate(f, 0.0, x_max, 2 * panels));
    double worst = 0.0;
    std::size_t worst_at = 0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
      const double d = std::abs(fine[i] - coarse[i]);
      if (d > worst) {
        worst = d;
        worst_at = i;
      }
    }
    if (worst <= settings.abs_tol) return fine;
    panels *= 2;
    if (2 * panels > max_panels) {
      throw AccuracyError("cosine_transform: change " + std::to_string(worst) + " exceeds abs_tol at max_nodes",
                          fine[worst_at]);
    }
    coarse = std::move(fine);
  }
}

}  // namespace quad
}  // namespace powertail
