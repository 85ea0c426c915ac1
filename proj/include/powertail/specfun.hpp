#pragma once

// Special functions behind the characteristic-function kernel: log-gamma,
// the modified Bessel function of the second kind K_nu (McDonald function),
// and the normalized kernel phi_nu(t) = 2^(1-nu)/Gamma(nu) * t^nu * K_nu(t).

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "powertail/errors.hpp"

namespace powertail {

/// ln Gamma(x) for x > 0.
inline double ln_gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("ln_gamma: argument must be positive and finite, got " + std::to_string(x));
  }
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);  // lgamma proper writes the global signgam
#else
  return std::lgamma(x);
#endif
}

namespace detail {

// Taylor coefficients of 1/Gamma(z) about z = 0, index k multiplies z^k.
inline constexpr std::array<double, 28> kRecipGammaTaylor = {
    0.0,
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
};

// Quantities needed by Temme's series for |mu| <= 1/2:
//   gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
//   gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
// evaluated from the power series so gam1 stays accurate as mu -> 0.
struct TemmeGammas {
  double gam1;
  double gam2;
  double recip_gamma_plus;   // 1/Gamma(1+mu)
  double recip_gamma_minus;  // 1/Gamma(1-mu)
};

inline TemmeGammas temme_gammas(double mu) {
  const auto& c = kRecipGammaTaylor;
  const double mu2 = mu * mu;
  // even part: sum over odd k of c_k mu^(k-1); odd part: sum over even k of c_k mu^(k-2)
  double even = 0.0;
  double odd = 0.0;
  for (std::size_t k = c.size() - 1; k >= 1; --k) {
    if (k % 2 == 1) {
      even = even * mu2 + c[k];
    } else {
      odd = odd * mu2 + c[k];
    }
  }
  return {-odd, even, even + mu * odd, even - mu * odd};
}

inline constexpr int kBesselMaxIterations = 100000;
inline constexpr double kBesselEps = 1e-17;

// Returns {e^x K_mu(x), e^x K_{mu+1}(x)} for |mu| <= 1/2, x > 0.
struct KPair {
  double k_mu;
  double k_mu1;
};

inline KPair scaled_bessel_k_pair(double mu, double x) {
  constexpr double pi = std::numbers::pi;
  const double mu2 = mu * mu;
  if (x <= 2.0) {
    // Temme's series.
    const double half_x = 0.5 * x;
    const double pimu = pi * mu;
    const double fact = std::abs(pimu) < 1e-300 ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(half_x);
    double e = mu * d;
    const double fact2 = std::abs(e) < 1e-300 ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.recip_gamma_plus;
    double q = 0.5 / (e * g.recip_gamma_minus);
    double c = 1.0;
    d = half_x * half_x;
    double sum1 = p;
    int i = 1;
    for (; i <= kBesselMaxIterations; ++i) {
      const double di = i;
      ff = (di * ff + p + q) / (di * di - mu2);
      c *= d / di;
      p /= di - mu;
      q /= di + mu;
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - di * ff);
      if (std::abs(del) < std::abs(sum) * kBesselEps) break;
    }
    if (i > kBesselMaxIterations) throw RangeError("bessel_k: series failed to converge");
    const double scale = std::exp(x);
    return {sum * scale, sum1 * (2.0 / x) * scale};
  }

  // Steed's continued fraction (CF2) for x > 2.
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  int i = 2;
  for (; i <= kBesselMaxIterations; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kBesselEps) break;
  }
  if (i > kBesselMaxIterations) throw RangeError("bessel_k: continued fraction failed to converge");
  h *= a1;
  const double k_mu = std::sqrt(pi / (2.0 * x)) / s;
  return {k_mu, k_mu * (mu + x + 0.5 - h) / x};
}

inline void check_bessel_args(double nu, double x) {
  if (!std::isfinite(nu) || nu < 0.0) {
    throw DomainError("bessel_k: order must be finite and >= 0, got " + std::to_string(nu));
  }
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("bessel_k: argument must be positive and finite, got " + std::to_string(x));
  }
}

// e^x K_nu(x), by forward recurrence in the order from |mu| <= 1/2.
inline double scaled_bessel_k(double nu, double x) {
  check_bessel_args(nu, x);
  const int steps = static_cast<int>(nu + 0.5);
  const double mu = nu - steps;
  auto [k_lo, k_hi] = scaled_bessel_k_pair(mu, x);
  for (int i = 1; i <= steps; ++i) {
    const double next = (mu + i) * (2.0 / x) * k_hi + k_lo;
    k_lo = k_hi;
    k_hi = next;
  }
  if (!std::isfinite(k_lo)) {
    throw RangeError("bessel_k: K_" + std::to_string(nu) + "(" + std::to_string(x) + ") overflows");
  }
  return k_lo;
}

}  // namespace detail

/// Modified Bessel function of the second kind K_nu(x), nu >= 0, x > 0.
/// Temme's series for x <= 2, Steed's continued fraction above, then upward
/// recurrence in the order. Throws RangeError if the result overflows.
inline double bessel_k(double nu, double x) {
  const double scaled = detail::scaled_bessel_k(nu, x);
  const double value = scaled * std::exp(-x);
  if (value == 0.0) {
    throw RangeError("bessel_k: K_" + std::to_string(nu) + "(" + std::to_string(x) + ") underflows");
  }
  return value;
}

/// ln K_nu(x). Usable far beyond the point where K_nu itself underflows.
inline double log_bessel_k(double nu, double x) {
  return std::log(detail::scaled_bessel_k(nu, x)) - x;
}

/// Order nu = beta - 1/2 of the kernel; the distribution exists only for nu > 1.
class KernelOrder {
 public:
  explicit KernelOrder(double nu) : nu_(nu) {
    if (!std::isfinite(nu) || nu <= 1.0) {
      throw DomainError("kernel order must exceed 1 (beta > 3/2), got nu = " + std::to_string(nu));
    }
  }

  static KernelOrder from_beta(double beta) { return KernelOrder(beta - 0.5); }

  double nu() const noexcept { return nu_; }
  double beta() const noexcept { return nu_ + 0.5; }

 private:
  double nu_;
};

namespace detail {

// ln phi_mu(t) for any mu > 0 (the survival kernel needs mu = nu - 1 < 1).
inline double log_cf_kernel_any(double mu, double t) {
  if (!(t >= 0.0)) throw DomainError("cf_kernel: t must be >= 0, got " + std::to_string(t));
  if (t == 0.0) return 0.0;
  if (std::isinf(t)) return -std::numeric_limits<double>::infinity();
  // K_mu(t) would overflow; phi is 1 - t^2/(4(mu-1)) to working precision here.
  if (mu * std::log(2.0 / t) > 650.0) {
    return mu > 1.0 ? -t * t / (4.0 * (mu - 1.0)) : 0.0;
  }
  return (1.0 - mu) * std::numbers::ln2 - ln_gamma(mu) + mu * std::log(t) + log_bessel_k(mu, t);
}

}  // namespace detail

/// ln phi_nu(t); finite wherever phi_nu(t) > 0, -inf at t = inf.
inline double log_cf_kernel(KernelOrder order, double t) { return detail::log_cf_kernel_any(order.nu(), t); }

/// Characteristic-function kernel phi_nu(t) = 2^(1-nu)/Gamma(nu) t^nu K_nu(t),
/// phi_nu(0) = 1. For nu = 3/2 this is (1+t) e^(-t).
inline double cf_kernel(KernelOrder order, double t) { return std::exp(log_cf_kernel(order, t)); }

}  // namespace powertail
