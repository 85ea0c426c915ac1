#pragma once

// Exponential-body, power-law-tail distribution of impact factors R >= 0.
//
// The density is the Fourier-cosine inversion, in sqrt(R), of the theta-th
// power of the characteristic-function kernel phi_nu, nu = beta - 1/2:
//
//   W(R) = 1/(Z sqrt(pi T)) int_0^inf cos(x sqrt R) phi_nu(c x)^theta dx,
//   c = sqrt((beta - 3/2) T / theta).
//
// Z is the mass carried by the unnormalized integral with the bare
// 1/sqrt(pi T) prefactor; it depends on (beta, theta) only and tends to 1 as
// theta grows (Z ~ 0.954 at beta = 2, theta = 30). Dividing by it makes W a
// proper density. For small R the density reduces to (1/T) exp(-R/T).
//
// The survival function F(R) = int_R^inf W is evaluated by the same kind of
// inversion, using int_{sqrt R}^inf sin(x y) dy = cos(x sqrt R)/x:
//
//   F(R) = sqrt(T/pi)/Z int_0^inf cos(x sqrt R) phi_nu(c x)^(theta-1) phi_{nu-1}(c x) dx.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "powertail/errors.hpp"
#include "powertail/quadrature.hpp"
#include "powertail/specfun.hpp"

namespace powertail {

/// Distribution parameters.
struct ModelParams {
  double T = 1.5;       ///< effective temperature, impact-factor units
  double beta = 2.0;    ///< shape; the distribution exists for beta > 3/2
  double theta = 30.0;  ///< exponential-to-power-law transition

  void validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("T must be positive and finite");
    if (!(beta > 1.5) || !std::isfinite(beta)) throw DomainError("beta must exceed 3/2");
    if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("theta must be positive and finite");
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// T = 1.5, beta = 2, theta = 30: the reference fit to the 2011-2013
/// impact-factor tables.
inline constexpr ModelParams kReferenceParams{1.5, 2.0, 30.0};

namespace detail {

inline double check_nonnegative_r(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("R must be finite and >= 0, got " + std::to_string(r));
  return r;
}

// Negative inversion ripple within abs_tol is noise; beyond it is a failure.
inline double clip_ripple(double v, double abs_tol, const char* what) {
  if (v >= 0.0) return v;
  if (v > -abs_tol) return 0.0;
  throw AccuracyError(std::string(what) + ": negative value " + std::to_string(v) + " beyond abs_tol", v);
}

}  // namespace detail

/// Closed-form small-R density (1/T) exp(-R/T).
inline double pdf_small_r(double T, double R) {
  if (!(T > 0.0)) throw DomainError("T must be positive");
  detail::check_nonnegative_r(R);
  return std::exp(-R / T) / T;
}

/// Closed-form small-R survival exp(-R/T).
inline double survival_small_r(double T, double R) {
  if (!(T > 0.0)) throw DomainError("T must be positive");
  detail::check_nonnegative_r(R);
  return std::exp(-R / T);
}

/// A parameterized distribution with its quadrature settings. Construction
/// computes the normalizing mass once; evaluation over a span of R shares one
/// kernel tabulation.
class Model {
 public:
  explicit Model(const ModelParams& params, const QuadratureSettings& quad = {})
      : params_(params), quad_(quad), order_(0.0) {
    params_.validate();
    quad_.validate();
    order_ = KernelOrder::from_beta(params_.beta).nu();
    scale_ = std::sqrt((order_ - 1.0) * params_.T / params_.theta);
    const double zero = 0.0;
    raw_mass_ = std::sqrt(params_.T / std::numbers::pi) * invert_survival_kernel(std::span(&zero, 1))[0];
    if (!(raw_mass_ > 0.0)) throw AccuracyError("normalizing mass is not positive", raw_mass_);
  }

  const ModelParams& params() const noexcept { return params_; }
  const QuadratureSettings& quadrature() const noexcept { return quad_; }

  /// Mass of the density with the bare 1/sqrt(pi T) prefactor.
  double printed_mass() const noexcept { return raw_mass_; }

  double pdf(double R) const { return pdf(std::span(&R, 1))[0]; }

  std::vector<double> pdf(std::span<const double> rs) const {
    std::vector<double> omegas = sqrt_all(rs);
    const double theta = params_.theta;
    auto log_kernel = [&](double x) { return theta * detail::log_cf_kernel_any(order_, scale_ * x); };
    std::vector<double> v = quad::cosine_transform(log_kernel, omegas, quad_, 1.0 / scale_);
    const double norm = 1.0 / (std::sqrt(std::numbers::pi * params_.T) * raw_mass_);
    for (double& d : v) d = detail::clip_ripple(d * norm, quad_.abs_tol, "pdf");
    return v;
  }

  double survival(double R) const { return survival(std::span(&R, 1))[0]; }

  std::vector<double> survival(std::span<const double> rs) const {
    std::vector<double> v = invert_survival_kernel(sqrt_all(rs));
    const double norm = std::sqrt(params_.T / std::numbers::pi) / raw_mass_;
    for (double& f : v) f = std::min(1.0, detail::clip_ripple(f * norm, quad_.abs_tol, "survival"));
    return v;
  }

  /// int_0^{r_max} W(R) dR evaluated as int 2 y W(y^2) dy with
  /// r_max = survival_r_max. Throws ConfigError when R W(R) at r_max exceeds
  /// tail_tol, i.e. when r_max leaves too much of the tail uncounted.
  double normalization() const {
    const double r_max = quad_.survival_r_max;
    const double tail = pdf(r_max) * r_max;
    if (tail > quad_.tail_tol) {
      throw ConfigError("survival_r_max = " + std::to_string(r_max) + " too small: R W(R) = " + std::to_string(tail) +
                        " exceeds tail_tol");
    }
    const double y_max = std::sqrt(r_max);
    const std::size_t panels =
        std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(y_max / (0.25 * std::sqrt(params_.T)))));
    auto integrate = [&](std::size_t n_panels) {
      const quad::WeightedNodes nodes = quad::tabulate([](double) { return 1.0; }, 0.0, y_max, n_panels);
      std::vector<double> rs(nodes.size());
      for (std::size_t i = 0; i < rs.size(); ++i) rs[i] = nodes.x[i] * nodes.x[i];
      const std::vector<double> w = pdf(rs);
      double s = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) s += nodes.wf[i] * 2.0 * nodes.x[i] * w[i];
      return s;
    };
    const double coarse = integrate(panels);
    const double fine = integrate(2 * panels);
    if (std::abs(fine - coarse) > std::max(quad_.abs_tol, 1e-9)) {
      throw AccuracyError("normalization: y-integral not converged", fine);
    }
    return fine;
  }

 private:
  static std::vector<double> sqrt_all(std::span<const double> rs) {
    std::vector<double> out(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) out[i] = std::sqrt(detail::check_nonnegative_r(rs[i]));
    return out;
  }

  std::vector<double> invert_survival_kernel(std::span<const double> omegas) const {
    const double theta = params_.theta;
    auto log_kernel = [&](double x) {
      const double t = scale_ * x;
      return (theta - 1.0) * detail::log_cf_kernel_any(order_, t) + detail::log_cf_kernel_any(order_ - 1.0, t);
    };
    return quad::cosine_transform(log_kernel, omegas, quad_, 1.0 / scale_);
  }

  ModelParams params_;
  QuadratureSettings quad_;
  double order_;
  double scale_ = 1.0;
  double raw_mass_ = 1.0;
};

/// Density W(R).
inline double pdf(const ModelParams& params, double R, const QuadratureSettings& quad = {}) {
  return Model(params, quad).pdf(R);
}

/// Survival F(R) = int_R^inf W(R') dR'.
inline double survival(const ModelParams& params, double R, const QuadratureSettings& quad = {}) {
  return Model(params, quad).survival(R);
}

/// int_0^inf W dR in the substituted variable y = sqrt(R), cut at survival_r_max.
inline double normalization(const ModelParams& params, const QuadratureSettings& quad = {}) {
  return Model(params, quad).normalization();
}

/// Density at beta = 2 from the elementary form of the kernel,
///   exp(-x sqrt(theta T / 2)) (1 + x sqrt(T / (2 theta)))^theta,
/// normalized by its own elementary-form mass. Shares no Bessel code with pdf().
inline double pdf_beta2(double T, double theta, double R, const QuadratureSettings& quad = {}) {
  ModelParams{T, 2.0, theta}.validate();
  quad.validate();
  detail::check_nonnegative_r(R);
  const double b = std::sqrt(T / (2.0 * theta));
  const double a = std::sqrt(theta * T / 2.0);
  auto log_density_kernel = [&](double x) { return theta * std::log1p(b * x) - a * x; };
  auto log_mass_kernel = [&](double x) { return (theta - 1.0) * std::log1p(b * x) - a * x; };
  const double zero = 0.0;
  const double omega = std::sqrt(R);
  const double mass = std::sqrt(T / std::numbers::pi) *
                      quad::cosine_transform(log_mass_kernel, std::span(&zero, 1), quad, 1.0 / b)[0];
  const double raw = quad::cosine_transform(log_density_kernel, std::span(&omega, 1), quad, 1.0 / b)[0];
  return detail::clip_ripple(raw / (std::sqrt(std::numbers::pi * T) * mass), quad.abs_tol, "pdf_beta2");
}

/// Least-squares slope of ln F against ln R over tabulated points.
inline double loglog_slope(std::span<const double> rs, std::span<const double> fs) {
  if (rs.size() != fs.size() || rs.size() < 2) throw DomainError("loglog_slope: need >= 2 matching points");
  double mx = 0.0;
  double my = 0.0;
  const double n = static_cast<double>(rs.size());
  std::vector<double> lx(rs.size());
  std::vector<double> ly(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (!(rs[i] > 0.0)) throw DomainError("loglog_slope: R must be positive");
    if (!(fs[i] > 0.0)) throw RangeError("loglog_slope: survival underflows to 0 at R = " + std::to_string(rs[i]));
    lx[i] = std::log(rs[i]);
    ly[i] = std::log(fs[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("loglog_slope: R values must not all coincide");
  return sxy / sxx;
}

/// Log-spaced abscissae r_lo ... r_hi inclusive.
inline std::vector<double> log_grid(double r_lo, double r_hi, std::size_t points) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw DomainError("log_grid: need 0 < r_lo < r_hi");
  if (points < 2) throw ConfigError("log_grid: need at least 2 points");
  std::vector<double> g(points);
  const double step = std::log(r_hi / r_lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = r_lo * std::exp(step * static_cast<double>(i));
  g.back() = r_hi;
  return g;
}

/// Empirical tail exponent: slope of ln F vs ln R on a log grid in [r_lo, r_hi].
inline double tail_slope(const ModelParams& params, double r_lo, double r_hi, const QuadratureSettings& quad = {},
                         std::size_t points = 32) {
  const std::vector<double> rs = log_grid(r_lo, r_hi, points);
  const std::vector<double> fs = Model(params, quad).survival(rs);
  return loglog_slope(rs, fs);
}

}  // namespace powertail
