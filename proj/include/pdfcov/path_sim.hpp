/**
 * @file path_sim.hpp
 * @brief Euler simulation of d-asset log-price panels under four stochastic
 *        volatility models (Heston, one/two factor exponential, rough Heston).
 *
 * Conventions
 *  - Grid times are in seconds. Model parameters are per trading day; one
 *    Euler step therefore advances model time by step / day_seconds.
 *  - spot_var is the instantaneous variance per trading day. Multiply by
 *    1/day_seconds to get variance per second.
 *  - Brownian drivers are laid out as [W_1..W_d, Z_1..Z_d (, Z2_1..Z2_d)].
 *    W's are equicorrelated, W_j and each of asset j's volatility drivers
 *    share the leverage correlation, everything else is independent.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "pdfcov/errors.hpp"
#include "pdfcov/rng.hpp"

namespace pdfcov {

using PathMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DenseGrid {
  double t0 = 0.0;
  double step = 2.0;
  std::size_t n_steps = 11700;

  double t_end() const noexcept { return t0 + step * static_cast<double>(n_steps); }
  double time(std::size_t i) const noexcept { return t0 + step * static_cast<double>(i); }
  std::size_t size() const noexcept { return n_steps + 1; }

  /// A trading day of `day_seconds` on a grid of width `step`.
  static DenseGrid trading_day(double step = 2.0, double day_seconds = 23400.0) {
    if (!(step > 0.0)) throw ArgumentError("grid step must be positive");
    const double steps = day_seconds / step;
    const auto n = static_cast<std::size_t>(std::llround(steps));
    if (n == 0 || std::abs(steps - static_cast<double>(n)) > 1e-9 * steps)
      throw ArgumentError("grid step must divide the day length");
    return DenseGrid{0.0, step, n};
  }

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ArgumentError("grid step must be positive");
    if (n_steps == 0) throw ArgumentError("grid needs at least one step");
    if (!std::isfinite(t0)) throw ArgumentError("grid origin must be finite");
  }

  /// Index of the grid point nearest to t. Throws if t is outside the grid.
  std::size_t nearest_index(double t) const {
    const double tol = 1e-9 * step;
    if (t < t0 - tol || t > t_end() + tol)
      throw ArgumentError("time " + std::to_string(t) + " outside grid range");
    const double x = std::round((t - t0) / step);
    return std::min(n_steps, static_cast<std::size_t>(std::max(0.0, x)));
  }
};

struct CorrelationSpec {
  double cross_asset_rho = 0.312;
  /// Overrides the model's own leverage parameter when set.
  std::optional<double> leverage_lambda;
  /// Explicit correlation over all drivers (layout in the file comment).
  std::optional<Eigen::MatrixXd> full_matrix;
};

struct HestonParams {
  double mu = 0.05 / 252.0;
  double gamma = 5.0 / 252.0;
  double theta = 0.1;
  double nu = 0.5 / 252.0;
  double lambda = -0.5;
  std::optional<double> v0;  ///< defaults to theta
};

struct Sv1fParams {
  double mu = 0.03;
  double beta0 = 0.125 / (2.0 * -0.025);
  double beta1 = 0.125;
  double alpha = -0.025;
  double lambda = -0.3;
};

struct Sv2fParams {
  double mu = 0.03;
  double beta0 = -1.1;
  double beta1 = 0.04;
  double beta2 = 0.3;
  double beta_v = -0.003;
  double alpha1 = -0.6;
  double alpha2 = 0.25;
  double lambda = -0.3;
  double x0 = 0.4054651081081644;  // log(1.5)
};

struct RoughHestonParams {
  double theta = 0.2;
  double gamma = 0.3;
  double nu = 0.2;
  double lambda = -0.7;
  double H = 0.1;
  std::optional<double> sigma0_sq;  ///< defaults to theta / gamma
  std::optional<double> C;          ///< defaults to 1 / Gamma(H + 1/2)
  double mu = 0.0;

  double initial_variance() const { return sigma0_sq ? *sigma0_sq : theta / gamma; }
  double kernel_constant() const { return C ? *C : 1.0 / std::tgamma(H + 0.5); }
};

using ModelParams = std::variant<HestonParams, Sv1fParams, Sv2fParams, RoughHestonParams>;

inline std::string model_name(const ModelParams& m) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HestonParams>) return "heston";
        else if constexpr (std::is_same_v<T, Sv1fParams>) return "sv1f";
        else if constexpr (std::is_same_v<T, Sv2fParams>) return "sv2f";
        else return "rough_heston";
      },
      m);
}

struct SimOptions {
  double day_seconds = 23400.0;
  double initial_price = 100.0;
};

struct PanelBundle {
  DenseGrid grid;
  int d = 0;
  double day_seconds = 23400.0;
  PathMatrix log_prices;    ///< d x (n_steps+1)
  PathMatrix spot_var;      ///< d x (n_steps+1), per trading day, >= 0
  PathMatrix price_shocks;  ///< d x n_steps standard normals driving W
  std::vector<PathMatrix> factors;  ///< model state variables (variance or tau paths)
  Eigen::MatrixXd asset_corr;       ///< d x d correlation of the price drivers
  std::vector<std::size_t> truncations;  ///< negative-variance events per asset
  std::uint64_t seed = 0;

  /// True spot covariance at grid index i, per trading day.
  Eigen::MatrixXd true_cov_at(std::size_t i) const {
    Eigen::VectorXd s = spot_var.col(static_cast<Eigen::Index>(i)).cwiseSqrt();
    return asset_corr.cwiseProduct(s * s.transpose());
  }
};

/// Spliced exponential: exp(x) up to x0, square-root growth beyond.
inline double sexp(double x, double x0 = 0.4054651081081644) {
  if (x <= x0) return std::exp(x);
  return std::exp(x0) / std::sqrt(x0) * std::sqrt(x0 - x0 * x0 + x * x);
}

namespace detail {

inline void check_unit_interval(double v, const char* what) {
  if (!(v >= -1.0 && v <= 1.0)) throw ArgumentError(std::string(what) + " must lie in [-1, 1]");
}

/// Assembles the driver correlation matrix for d assets with `n_vol`
/// volatility drivers per asset.
inline Eigen::MatrixXd driver_correlation(const CorrelationSpec& corr, int d, int n_vol, double model_lambda) {
  const int m = d * (1 + n_vol);
  if (corr.full_matrix) {
    if (corr.full_matrix->rows() != m || corr.full_matrix->cols() != m)
      throw ConfigurationError("full correlation matrix has wrong size (expected " + std::to_string(m) + ")");
    return *corr.full_matrix;
  }
  const double lambda = corr.leverage_lambda.value_or(model_lambda);
  check_unit_interval(corr.cross_asset_rho, "cross_asset_rho");
  check_unit_interval(lambda, "leverage lambda");
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(m, m);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j)
      if (i != j) R(i, j) = corr.cross_asset_rho;
    for (int f = 1; f <= n_vol; ++f) {
      R(i, f * d + i) = lambda;
      R(f * d + i, i) = lambda;
    }
  }
  return R;
}

/// Validates R and returns A with A A^T = R (pivoted LDLT, so semidefinite
/// matrices such as perfectly correlated assets are accepted).
inline Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& R) {
  const Eigen::Index m = R.rows();
  if (R.cols() != m) throw ConfigurationError("correlation matrix must be square");
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigurationError("correlation matrix is not symmetric");
  for (Eigen::Index i = 0; i < m; ++i)
    if (std::abs(R(i, i) - 1.0) > 1e-12) throw ConfigurationError("correlation matrix needs a unit diagonal");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12)
    throw ConfigurationError("driver correlation matrix is not positive semi-definite (min eigenvalue " +
                             std::to_string(es.eigenvalues().minCoeff()) + ")");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(R);
  Eigen::VectorXd D = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd L = ldlt.matrixL();
  Eigen::MatrixXd A = ldlt.transpositionsP().transpose() * (L * D.asDiagonal());
  return A;
}

/// m x n_steps matrix of correlated standard normal shocks.
inline Eigen::MatrixXd draw_shocks(const Eigen::MatrixXd& A, std::size_t n_steps, Rng& rng) {
  std::normal_distribution<double> nd;
  const Eigen::Index m = A.rows();
  Eigen::MatrixXd Z(m, static_cast<Eigen::Index>(n_steps));
  for (Eigen::Index k = 0; k < Z.cols(); ++k)
    for (Eigen::Index i = 0; i < m; ++i) Z(i, k) = nd(rng);
  return A * Z;
}

inline PanelBundle make_bundle(const DenseGrid& grid, int d, const SimOptions& opt, std::uint64_t seed,
                               const Eigen::MatrixXd& R, const Eigen::MatrixXd& Y) {
  PanelBundle b;
  b.grid = grid;
  b.d = d;
  b.day_seconds = opt.day_seconds;
  b.seed = seed;
  const auto n = static_cast<Eigen::Index>(grid.size());
  b.log_prices.resize(d, n);
  b.spot_var.resize(d, n);
  b.price_shocks = Y.topRows(d);
  b.asset_corr = R.topLeftCorner(d, d);
  b.truncations.assign(static_cast<std::size_t>(d), 0);
  b.log_prices.col(0).setConstant(std::log(opt.initial_price));
  return b;
}

inline void validate_common(const DenseGrid& grid, int d, const SimOptions& opt) {
  grid.validate();
  if (d < 1) throw ArgumentError("need at least one asset");
  if (!(opt.day_seconds > 0.0)) throw ArgumentError("day length must be positive");
  if (!(opt.initial_price > 0.0)) throw ArgumentError("initial price must be positive");
}

inline double dot4(const double* a, const double* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

inline PanelBundle simulate_heston(const HestonParams& p, const CorrelationSpec& corr, const DenseGrid& grid, int d,
                                   std::uint64_t seed, const SimOptions& opt = {}) {
  detail::validate_common(grid, d, opt);
  if (p.gamma < 0 || p.theta < 0 || p.nu < 0) throw ArgumentError("Heston gamma, theta, nu must be non-negative");
  const double v0 = p.v0.value_or(p.theta);
  if (!(v0 > 0.0)) throw ArgumentError("Heston initial variance must be positive");
  const Eigen::MatrixXd R = detail::driver_correlation(corr, d, 1, p.lambda);
  const Eigen::MatrixXd A = detail::correlation_factor(R);
  Rng rng(seed);
  const Eigen::MatrixXd Y = detail::draw_shocks(A, grid.n_steps, rng);
  PanelBundle b = detail::make_bundle(grid, d, opt, seed, R, Y);
  const double dt = grid.step / opt.day_seconds;
  const double sdt = std::sqrt(dt);
  PathMatrix v(d, static_cast<Eigen::Index>(grid.size()));
  for (int j = 0; j < d; ++j) {
    double x = b.log_prices(j, 0);
    double vj = v0;
    v(j, 0) = vj;
    b.spot_var(j, 0) = vj;
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const double vp = std::max(vj, 0.0);
      const double sv = std::sqrt(vp);
      x += (p.mu - 0.5 * vp) * dt + sv * sdt * Y(j, kk);
      vj += p.gamma * (p.theta - vp) * dt + p.nu * sv * sdt * Y(d + j, kk);
      if (vj < 0.0) ++b.truncations[static_cast<std::size_t>(j)];
      b.log_prices(j, kk + 1) = x;
      v(j, kk + 1) = vj;
      b.spot_var(j, kk + 1) = std::max(vj, 0.0);
    }
  }
  b.factors.push_back(std::move(v));
  return b;
}

inline PanelBundle simulate_sv1f(const Sv1fParams& p, const CorrelationSpec& corr, const DenseGrid& grid, int d,
                                 std::uint64_t seed, const SimOptions& opt = {}) {
  detail::validate_common(grid, d, opt);
  const Eigen::MatrixXd R = detail::driver_correlation(corr, d, 1, p.lambda);
  const Eigen::MatrixXd A = detail::correlation_factor(R);
  Rng rng(seed);
  const Eigen::MatrixXd Y = detail::draw_shocks(A, grid.n_steps, rng);
  PanelBundle b = detail::make_bundle(grid, d, opt, seed, R, Y);
  const double dt = grid.step / opt.day_seconds;
  const double sdt = std::sqrt(dt);
  PathMatrix tau(d, static_cast<Eigen::Index>(grid.size()));
  for (int j = 0; j < d; ++j) {
    double x = b.log_prices(j, 0);
    double t = 0.0;
    tau(j, 0) = t;
    b.spot_var(j, 0) = std::exp(2.0 * p.beta0);
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const double sigma = std::exp(p.beta0 + p.beta1 * t);
      x += p.mu * dt + sigma * sdt * Y(j, kk);
      t += p.alpha * t * dt + sdt * Y(d + j, kk);
      const double s_next = std::exp(p.beta0 + p.beta1 * t);
      b.log_prices(j, kk + 1) = x;
      tau(j, kk + 1) = t;
      b.spot_var(j, kk + 1) = s_next * s_next;
    }
  }
  b.factors.push_back(std::move(tau));
  return b;
}

inline PanelBundle simulate_sv2f(const Sv2fParams& p, const CorrelationSpec& corr, const DenseGrid& grid, int d,
                                 std::uint64_t seed, const SimOptions& opt = {}) {
  detail::validate_common(grid, d, opt);
  const Eigen::MatrixXd R = detail::driver_correlation(corr, d, 2, p.lambda);
  const Eigen::MatrixXd A = detail::correlation_factor(R);
  Rng rng(seed);
  const Eigen::MatrixXd Y = detail::draw_shocks(A, grid.n_steps, rng);
  PanelBundle b = detail::make_bundle(grid, d, opt, seed, R, Y);
  const double dt = grid.step / opt.day_seconds;
  const double sdt = std::sqrt(dt);
  const auto n = static_cast<Eigen::Index>(grid.size());
  PathMatrix tau1(d, n), tau2(d, n);
  for (int j = 0; j < d; ++j) {
    double x = b.log_prices(j, 0);
    double t1 = 0.0, t2 = 0.0;
    tau1(j, 0) = 0.0;
    tau2(j, 0) = 0.0;
    const double s0 = sexp(p.beta0, p.x0);
    b.spot_var(j, 0) = s0 * s0;
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const double sigma = sexp(p.beta0 + p.beta1 * t1 + p.beta2 * t2, p.x0);
      x += p.mu * dt + sigma * sdt * Y(j, kk);
      const double dz1 = sdt * Y(d + j, kk);
      const double dz2 = sdt * Y(2 * d + j, kk);
      t1 += p.alpha1 * t1 * dt + dz1;
      t2 += p.alpha2 * t2 * dt + (1.0 + p.beta_v * t2) * dz2;
      const double s_next = sexp(p.beta0 + p.beta1 * t1 + p.beta2 * t2, p.x0);
      b.log_prices(j, kk + 1) = x;
      tau1(j, kk + 1) = t1;
      tau2(j, kk + 1) = t2;
      b.spot_var(j, kk + 1) = s_next * s_next;
    }
  }
  b.factors.push_back(std::move(tau1));
  b.factors.push_back(std::move(tau2));
  return b;
}

/// Volterra-Euler variance scheme with an arbitrary kernel table:
/// v_i = v_0 + sum_{j<i} kernel[i-j] * [(theta - gamma v_j^+) dt + nu sqrt(v_j^+) dZ_j],
/// kernel[0] unused. simulate_rough_heston builds the power-law table; a
/// constant table reproduces the Heston Euler scheme (with theta scaled by gamma).
inline PanelBundle simulate_volterra_heston(const RoughHestonParams& p, const std::vector<double>& kernel,
                                            const CorrelationSpec& corr, const DenseGrid& grid, int d,
                                            std::uint64_t seed, const SimOptions& opt = {}) {
  detail::validate_common(grid, d, opt);
  if (kernel.size() < grid.size()) throw ArgumentError("kernel table shorter than the grid");
  const double v0 = p.initial_variance();
  if (!(v0 >= 0.0)) throw ArgumentError("initial variance must be non-negative");
  const Eigen::MatrixXd R = detail::driver_correlation(corr, d, 1, p.lambda);
  const Eigen::MatrixXd A = detail::correlation_factor(R);
  Rng rng(seed);
  const Eigen::MatrixXd Y = detail::draw_shocks(A, grid.n_steps, rng);
  PanelBundle b = detail::make_bundle(grid, d, opt, seed, R, Y);
  const double dt = grid.step / opt.day_seconds;
  const double sdt = std::sqrt(dt);
  const std::size_t n = grid.n_steps;
  // rev[q] = kernel[n - q], so sum_j kernel[i-j] g[j] = dot(rev + n - i, g, i).
  std::vector<double> rev(n);
  for (std::size_t q = 0; q < n; ++q) rev[q] = kernel[n - q];
  std::vector<double> g(n);
  PathMatrix v(d, static_cast<Eigen::Index>(grid.size()));
  for (int j = 0; j < d; ++j) {
    double x = b.log_prices(j, 0);
    double vj = v0;
    v(j, 0) = vj;
    b.spot_var(j, 0) = std::max(vj, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const double vp = std::max(vj, 0.0);
      const double sv = std::sqrt(vp);
      x += (p.mu - 0.5 * vp) * dt + sv * sdt * Y(j, kk);
      g[k] = (p.theta - p.gamma * vp) * dt + p.nu * sv * sdt * Y(d + j, kk);
      vj = v0 + detail::dot4(rev.data() + (n - k - 1), g.data(), k + 1);
      if (vj < 0.0) ++b.truncations[static_cast<std::size_t>(j)];
      b.log_prices(j, kk + 1) = x;
      v(j, kk + 1) = vj;
      b.spot_var(j, kk + 1) = std::max(vj, 0.0);
    }
  }
  b.factors.push_back(std::move(v));
  return b;
}

inline PanelBundle simulate_rough_heston(const RoughHestonParams& p, const CorrelationSpec& corr,
                                         const DenseGrid& grid, int d, std::uint64_t seed,
                                         const SimOptions& opt = {}) {
  if (!(p.H > 0.0 && p.H < 0.5)) throw ArgumentError("rough Heston requires H in (0, 1/2)");
  const double C = p.kernel_constant();
  if (!(C > 0.0)) throw ArgumentError("rough Heston kernel constant must be positive");
  if (p.gamma < 0 || p.theta < 0 || p.nu < 0) throw ArgumentError("rough Heston theta, gamma, nu must be non-negative");
  grid.validate();
  const double dt = grid.step / opt.day_seconds;
  std::vector<double> kernel(grid.size(), 0.0);
  for (std::size_t m = 1; m < kernel.size(); ++m) kernel[m] = C * std::pow(static_cast<double>(m) * dt, p.H - 0.5);
  return simulate_volterra_heston(p, kernel, corr, grid, d, seed, opt);
}

inline PanelBundle simulate(const ModelParams& model, const CorrelationSpec& corr, const DenseGrid& grid, int d,
                            std::uint64_t seed, const SimOptions& opt = {}) {
  return std::visit(
      [&](const auto& p) -> PanelBundle {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HestonParams>) return simulate_heston(p, corr, grid, d, seed, opt);
        else if constexpr (std::is_same_v<T, Sv1fParams>) return simulate_sv1f(p, corr, grid, d, seed, opt);
        else if constexpr (std::is_same_v<T, Sv2fParams>) return simulate_sv2f(p, corr, grid, d, seed, opt);
        else return simulate_rough_heston(p, corr, grid, d, seed, opt);
      },
      model);
}

/// d Brownian motions with unit variance per unit of grid time and pairwise
/// correlation rho (used by the asynchronicity study on the unit interval).
inline PanelBundle simulate_brownian(const DenseGrid& grid, int d, double rho, std::uint64_t seed) {
  grid.validate();
  if (d < 1) throw ArgumentError("need at least one asset");
  if (!(rho >= -1.0 && rho <= 1.0)) throw ArgumentError("correlation must lie in [-1, 1]");
  CorrelationSpec corr;
  corr.cross_asset_rho = rho;
  Eigen::MatrixXd R = Eigen::MatrixXd::Constant(d, d, rho);
  R.diagonal().setOnes();
  const Eigen::MatrixXd A = detail::correlation_factor(R);
  Rng rng(seed);
  const Eigen::MatrixXd Y = detail::draw_shocks(A, grid.n_steps, rng);
  SimOptions opt{1.0, 1.0};
  PanelBundle b = detail::make_bundle(grid, d, opt, seed, R, Y);
  const double sdt = std::sqrt(grid.step);
  b.log_prices.col(0).setZero();
  b.spot_var.setOnes();
  for (int j = 0; j < d; ++j) {
    double x = 0.0;
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
      x += sdt * Y(j, static_cast<Eigen::Index>(k));
      b.log_prices(j, static_cast<Eigen::Index>(k) + 1) = x;
    }
  }
  return b;
}

/// True spot covariance (per trading day) at the grid point nearest to t.
inline Eigen::MatrixXd true_spot_cov(const PanelBundle& bundle, double t) {
  return bundle.true_cov_at(bundle.grid.nearest_index(t));
}

/// CSV dump: asset,time_s,log_price,spot_var.
inline void write_paths_csv(std::ostream& os, const PanelBundle& b) {
  os << "asset,time_s,log_price,spot_var\n";
  os.precision(17);
  for (int j = 0; j < b.d; ++j)
    for (std::size_t i = 0; i < b.grid.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      os << j << ',' << b.grid.time(i) << ',' << b.log_prices(j, ii) << ',' << b.spot_var(j, ii) << '\n';
    }
}

}  // namespace pdfcov
