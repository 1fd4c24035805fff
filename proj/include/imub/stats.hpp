#pragma once

// Kolmogorov-Smirnov statistics and compensated accumulation.

#include <algorithm>
#include <cmath>
#include <vector>

namespace imub::stats {

/// One-sample KS distance between the empirical law of `samples` and a
/// continuous CDF. Sorts `samples` in place.
template <class Cdf>
double ks_one_sample(std::vector<double>& samples, const Cdf& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - c, c - static_cast<double>(i) / n});
  }
  return d;
}

/// Two-sample KS distance. Sorts both inputs in place. Ties are handled by
/// advancing through equal values on both sides before comparing.
inline double ks_two_sample(std::vector<double>& a, std::vector<double>& b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic Kolmogorov critical value c(alpha) with P(sqrt(n) D > c) = alpha.
inline double ks_critical(double alpha) { return std::sqrt(-0.5 * std::log(0.5 * alpha)); }

/// Neumaier-compensated running sum.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace imub::stats
