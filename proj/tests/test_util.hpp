// Random instance generators shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pdfcov/sampling.hpp"

namespace pdfcov::testing {

/// d tick series on [t0, t0 + L], each with between 1 and max_n increments
/// at uniformly drawn interior times, Gaussian increments of scale `vol`.
inline std::vector<TickSeries> random_ticks(std::mt19937_64& rng, int d, int max_n, double t0 = 0.0, double L = 1.0,
                                            double vol = 1.0) {
  std::uniform_int_distribution<int> nd(1, max_n);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::normal_distribution<double> gd(0.0, vol);
  std::vector<TickSeries> out;
  for (int j = 0; j < d; ++j) {
    const int n = nd(rng);
    std::vector<double> inner;
    while (static_cast<int>(inner.size()) < n - 1) {
      const double u = ud(rng);
      if (u > 0.0 && u < 1.0 && std::find(inner.begin(), inner.end(), u) == inner.end()) inner.push_back(u);
    }
    std::sort(inner.begin(), inner.end());
    TickSeries ts;
    ts.asset_id = j;
    ts.times.push_back(t0);
    for (double u : inner) ts.times.push_back(t0 + u * L);
    ts.times.push_back(t0 + L);
    double x = gd(rng);
    for (std::size_t i = 0; i < ts.times.size(); ++i) {
      ts.log_prices.push_back(x);
      x += gd(rng);
    }
    out.push_back(std::move(ts));
  }
  return out;
}

inline std::vector<double> random_times(std::mt19937_64& rng, int count, double t0, double L) {
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<double> t;
  for (int i = 0; i < count; ++i) t.push_back(t0 + ud(rng) * L);
  return t;
}

inline double abs_increment_sum(const TickSeries& ts) {
  double s = 0.0;
  for (std::size_t l = 1; l < ts.size(); ++l) s += std::abs(ts.log_prices[l] - ts.log_prices[l - 1]);
  return s;
}

inline double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace pdfcov::testing
