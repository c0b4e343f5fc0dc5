/**
 * @file numeric.hpp
 * @brief Small numeric helpers: compensated summation, sample moments, trapezoid weights.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace pdfcov {

/// Neumaier-compensated accumulator. Reductions that must not depend on
/// scheduling are always performed in a fixed order through this type.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  CompensatedSum s;
  for (double x : xs) s += x;
  return s.value() / static_cast<double>(xs.size());
}

/// Unbiased sample variance (n-1 denominator); 0 for fewer than two values.
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  CompensatedSum s;
  for (double x : xs) s += (x - m) * (x - m);
  return s.value() / static_cast<double>(xs.size() - 1);
}

/// Standard error of the mean.
inline double standard_error(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

/// Trapezoid-rule weights for (possibly irregular) abscissae, normalized so
/// that they sum to one: integrating with them yields the time average over
/// [x.front(), x.back()]. A single abscissa gets weight 1.
inline std::vector<double> trapezoid_average_weights(std::span<const double> x) {
  std::vector<double> w(x.size(), 0.0);
  if (x.size() == 1) {
    w[0] = 1.0;
    return w;
  }
  if (x.empty()) return w;
  const double span = x.back() - x.front();
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = 0.5 * (x[i + 1] - x[i]) / span;
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

}  // namespace pdfcov
