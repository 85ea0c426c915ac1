#pragma once

// Empirical survival functions and the statistics built on them: two-sample
// Kolmogorov-Smirnov distance, tail counts, strata and quartiles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "powertail/errors.hpp"

namespace powertail {

/// Step function F(R) = #{values > R} / n. Right-continuous, non-increasing.
class EmpiricalSurvival {
 public:
  explicit EmpiricalSurvival(std::span<const double> values) : values_(values.begin(), values.end()) {
    if (values_.empty()) throw DomainError("empirical survival needs at least one value");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
        throw DataError("value at index " + std::to_string(i) + " is negative or not finite");
      }
    }
    std::sort(values_.begin(), values_.end());
  }

  std::size_t n() const noexcept { return values_.size(); }

  /// Sorted ascending.
  const std::vector<double>& values() const noexcept { return values_; }

  /// Number of values strictly greater than R.
  std::size_t count_above(double R) const {
    return static_cast<std::size_t>(values_.end() - std::upper_bound(values_.begin(), values_.end(), R));
  }

  double operator()(double R) const { return static_cast<double>(count_above(R)) / static_cast<double>(n()); }

  /// Value at rank floor(p (n - 1)) of the sorted sample.
  double quantile(double p) const {
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(n() - 1);
    return values_[static_cast<std::size_t>(pos)];
  }

 private:
  std::vector<double> values_;
};

/// Two-sample Kolmogorov-Smirnov statistic sup_R |F_a(R) - F_b(R)|, exact
/// over the merged jump points.
inline double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_distance: both samples must be nonempty");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// One-sample KS distance between an empirical survival function and a
/// continuous model survival function, checked on both sides of every jump.
template <class SurvivalFn>
double ks_distance(const EmpiricalSurvival& emp, SurvivalFn&& model_survival) {
  const auto& v = emp.values();
  const double n = static_cast<double>(emp.n());
  double d = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    const double x = v[i];
    const std::size_t at_or_above = v.size() - i;
    while (i < v.size() && v[i] == x) ++i;
    const std::size_t above = v.size() - i;
    const double f = model_survival(x);
    d = std::max({d, std::abs(f - static_cast<double>(above) / n), std::abs(f - static_cast<double>(at_or_above) / n)});
  }
  return d;
}

/// Number of values strictly greater than threshold.
inline std::size_t count_above(std::span<const double> values, double threshold) {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [&](double v) { return v > threshold; }));
}

/// Counts in [kT, (k+1)T) for k = 0 .. k_max-1, then the overflow bin
/// [k_max T, inf) last. Values below zero (or NaN) land in the first bin so
/// the counts always sum to n.
inline std::vector<std::size_t> stratify(std::span<const double> values, double T, std::size_t k_max) {
  if (!(T > 0.0)) throw DomainError("stratify: T must be positive");
  if (k_max < 1) throw DomainError("stratify: k_max must be >= 1");
  std::vector<std::size_t> bins(k_max + 1, 0);
  for (double v : values) {
    if (!(v >= 0.0)) {
      ++bins[0];
      continue;
    }
    const double k = std::floor(v / T);
    ++bins[k >= static_cast<double>(k_max) ? k_max : static_cast<std::size_t>(k)];
  }
  return bins;
}

enum class Quartile { Q1 = 1, Q2 = 2, Q3 = 3, Q4 = 4 };

/// Rank-based quartiles: sort descending (ties keep input order); the top
/// ceil(n/4) are Q1, the next ceil(n/4) Q2, then Q3, the rest Q4.
inline std::vector<Quartile> quartile_assign(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 4) throw DomainError("quartile_assign: need at least 4 values");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  const std::size_t block = (n + 3) / 4;
  std::vector<Quartile> out(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    out[order[rank]] = static_cast<Quartile>(std::min<std::size_t>(rank / block, 3) + 1);
  }
  return out;
}

/// KS distance between two labelled samples.
struct PairDistance {
  std::string label_a;
  std::string label_b;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double ks = 0.0;
};

struct StabilityReport {
  std::vector<PairDistance> pairs;
};

/// KS distance for every unordered pair (i < j) of the labelled samples.
inline StabilityReport stability_report(const std::vector<std::pair<std::string, std::vector<double>>>& samples) {
  StabilityReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const auto& [la, a] = samples[i];
      const auto& [lb, b] = samples[j];
      report.pairs.push_back({la, lb, a.size(), b.size(), ks_distance(a, b)});
    }
  }
  return report;
}

}  // namespace powertail
