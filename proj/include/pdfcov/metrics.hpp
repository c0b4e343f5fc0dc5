/**
 * @file metrics.hpp
 * @brief Accuracy and positivity scores for spot covariance estimates.
 *
 * The time integral in MISE is a trapezoid average over the evaluation grid
 * (integral divided by the grid span), so a constant error c gives MISE c².
 * All reductions across paths run serially in path order through
 * CompensatedSum; per-path work may be computed in parallel beforehand.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "pdfcov/errors.hpp"
#include "pdfcov/fourier_estimator.hpp"
#include "pdfcov/numeric.hpp"

namespace pdfcov {

using MatrixPath = std::vector<Eigen::MatrixXd>;  ///< one matrix per evaluation time

inline constexpr double kPsdRelTol = 1e-10;
inline constexpr double kRmiseRelThreshold = 1e-12;

/// PSD up to tolerance: min eigenvalue >= -1e-10 max(trace, 1) and
/// symmetric to 1e-10 of the largest entry.
inline bool is_psd(const MatrixDiagnostics& g) {
  const double tol = kPsdRelTol * std::max(g.trace, 1.0);
  return g.min_eigenvalue >= -tol && g.symmetry_residual <= kPsdRelTol * g.max_abs;
}

struct ScoreReport {
  double mise = 0.0;
  double mise_se = 0.0;
  double rmise = 0.0;
  double psd_rate = 1.0;       ///< fraction of PSD matrices
  double psd_path_rate = 1.0;  ///< fraction of paths whose matrices are all PSD
  Eigen::MatrixXd per_entry_mise;
  std::vector<double> per_path_mise;
  std::size_t rmise_excluded = 0;
  std::size_t n_paths = 0;
  std::size_t n_matrices = 0;
};

inline void to_json(nlohmann::json& j, const ScoreReport& r) {
  std::vector<std::vector<double>> entries;
  for (Eigen::Index a = 0; a < r.per_entry_mise.rows(); ++a) {
    std::vector<double> row;
    for (Eigen::Index b = 0; b < r.per_entry_mise.cols(); ++b) row.push_back(r.per_entry_mise(a, b));
    entries.push_back(std::move(row));
  }
  j = nlohmann::json{{"mise", r.mise},
                     {"mise_se", r.mise_se},
                     {"rmise", r.rmise},
                     {"psd_rate", r.psd_rate},
                     {"psd_path_rate", r.psd_path_rate},
                     {"per_entry_mise", entries},
                     {"rmise_excluded", r.rmise_excluded},
                     {"n_paths", r.n_paths},
                     {"n_matrices", r.n_matrices}};
}

inline void from_json(const nlohmann::json& j, ScoreReport& r) {
  r.mise = j.at("mise").get<double>();
  r.mise_se = j.value("mise_se", 0.0);
  r.rmise = j.at("rmise").get<double>();
  r.psd_rate = j.at("psd_rate").get<double>();
  r.psd_path_rate = j.value("psd_path_rate", r.psd_rate);
  r.rmise_excluded = j.value("rmise_excluded", std::size_t{0});
  r.n_paths = j.at("n_paths").get<std::size_t>();
  r.n_matrices = j.value("n_matrices", std::size_t{0});
  const auto entries = j.value("per_entry_mise", std::vector<std::vector<double>>{});
  const auto d = static_cast<Eigen::Index>(entries.size());
  r.per_entry_mise = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d && b < static_cast<Eigen::Index>(entries[a].size()); ++b)
      r.per_entry_mise(a, b) = entries[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
}

namespace detail {

inline void check_shapes(const std::vector<SpotCovEstimate>& est, const std::vector<MatrixPath>& truth) {
  if (est.empty()) throw ArgumentError("no estimates to score");
  if (est.size() != truth.size()) throw ArgumentError("estimate and truth path counts differ");
  const auto& times = est.front().eval_times;
  const int d = est.front().d();
  for (std::size_t k = 0; k < est.size(); ++k) {
    if (est[k].eval_times != times) throw ArgumentError("evaluation grids differ across paths");
    if (est[k].matrices.size() != times.size() || truth[k].size() != times.size())
      throw ArgumentError("evaluation grid and matrix count mismatch");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (est[k].matrices[i].rows() != d || est[k].matrices[i].cols() != d || truth[k][i].rows() != d ||
          truth[k][i].cols() != d)
        throw ArgumentError("matrix dimension mismatch");
    }
  }
}

}  // namespace detail

/// Time-averaged squared error of entry (a, b) on one path.
inline double integrated_entry_error(const SpotCovEstimate& est, const MatrixPath& truth, int a, int b) {
  const auto w = trapezoid_average_weights(est.eval_times);
  CompensatedSum s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double e = est.matrices[i](a, b) - truth[i](a, b);
    s += w[i] * e * e;
  }
  return s.value();
}

struct EntryScore {
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> per_path;
};

/// Mean over paths of the integrated squared error of one entry.
inline EntryScore entry_mise(const std::vector<SpotCovEstimate>& est, const std::vector<MatrixPath>& truth, int a,
                             int b) {
  detail::check_shapes(est, truth);
  EntryScore out;
  out.per_path.reserve(est.size());
  for (std::size_t k = 0; k < est.size(); ++k) out.per_path.push_back(integrated_entry_error(est[k], truth[k], a, b));
  out.mean = mean(out.per_path);
  out.se = standard_error(out.per_path);
  return out;
}

inline double psd_rate(const std::vector<SpotCovEstimate>& est) {
  std::size_t total = 0, ok = 0;
  for (const auto& e : est)
    for (const auto& g : e.diagnostics) {
      ++total;
      ok += is_psd(g) ? 1 : 0;
    }
  return total == 0 ? 1.0 : static_cast<double>(ok) / static_cast<double>(total);
}

inline double psd_path_rate(const std::vector<SpotCovEstimate>& est) {
  if (est.empty()) return 1.0;
  std::size_t ok = 0;
  for (const auto& e : est) {
    bool all = true;
    for (const auto& g : e.diagnostics) all = all && is_psd(g);
    ok += all ? 1 : 0;
  }
  return static_cast<double>(ok) / static_cast<double>(est.size());
}

/// MISE = (K d²)^{-1} Σ_k avg_t Σ_{j,i} (V̂ - V)², plus RMISE, per-entry MISE and PSD rates.
inline ScoreReport mise(const std::vector<SpotCovEstimate>& est, const std::vector<MatrixPath>& truth) {
  detail::check_shapes(est, truth);
  const int d = est.front().d();
  const auto dd = static_cast<double>(d) * d;
  const auto w = trapezoid_average_weights(est.front().eval_times);
  ScoreReport r;
  r.n_paths = est.size();
  std::vector<double> rel_path;
  std::vector<CompensatedSum> entry(static_cast<std::size_t>(d * d));
  for (std::size_t k = 0; k < est.size(); ++k) {
    CompensatedSum abs_sum, rel_sum;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Eigen::MatrixXd& V = truth[k][i];
      const Eigen::MatrixXd E = est[k].matrices[i] - V;
      const double vmax = V.cwiseAbs().maxCoeff();
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const double e2 = E(a, b) * E(a, b);
          abs_sum += w[i] * e2;
          entry[static_cast<std::size_t>(a * d + b)] += w[i] * e2 / static_cast<double>(est.size());
          const double v = V(a, b);
          if (std::abs(v) < kRmiseRelThreshold * vmax || v == 0.0) {
            ++r.rmise_excluded;
          } else {
            rel_sum += w[i] * e2 / (v * v);
          }
        }
      ++r.n_matrices;
    }
    r.per_path_mise.push_back(abs_sum.value() / dd);
    rel_path.push_back(rel_sum.value() / dd);
  }
  r.mise = mean(r.per_path_mise);
  r.mise_se = standard_error(r.per_path_mise);
  r.rmise = mean(rel_path);
  r.per_entry_mise.resize(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) r.per_entry_mise(a, b) = entry[static_cast<std::size_t>(a * d + b)].value();
  r.psd_rate = psd_rate(est);
  r.psd_path_rate = psd_path_rate(est);
  return r;
}

inline double weighted_selection(double mise_var, double mise_cov) {
  if (!(mise_var >= 0.0) || !(mise_cov >= 0.0)) throw ArgumentError("MISE values must be non-negative");
  return 0.1 * mise_var + 0.9 * mise_cov;
}

struct BiasMseCurve {
  std::vector<int> N;
  std::vector<double> bias;  ///< relative unless `absolute`
  std::vector<double> bias_se;
  std::vector<double> mse;
  std::vector<double> mse_se;
  bool absolute = false;
};

/// values[i][k] is the estimate for N[i] on path k; truth is the common true value.
/// Relative curves divide by truth (bias) and truth² (MSE); a zero truth
/// switches to absolute curves and sets the flag.
inline BiasMseCurve bias_mse_curve(const std::vector<int>& Ns, const std::vector<std::vector<double>>& values,
                                   double truth) {
  if (Ns.size() != values.size()) throw ArgumentError("N list and value table differ in length");
  BiasMseCurve c;
  c.N = Ns;
  c.absolute = truth == 0.0;
  const double sb = c.absolute ? 1.0 : truth;
  const double sm = c.absolute ? 1.0 : truth * truth;
  for (const auto& v : values) {
    std::vector<double> err, sq;
    for (double x : v) {
      err.push_back((x - truth) / sb);
      sq.push_back((x - truth) * (x - truth) / sm);
    }
    c.bias.push_back(mean(err));
    c.bias_se.push_back(standard_error(err));
    c.mse.push_back(mean(sq));
    c.mse_se.push_back(standard_error(sq));
  }
  return c;
}

}  // namespace pdfcov
