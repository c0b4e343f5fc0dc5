/**
 * @file fourier_estimator.hpp
 * @brief Spot covariance estimators from asynchronous ticks.
 *
 *  - estimate_pdf: positive semi-definite Fourier estimator, evaluated as
 *    G = F C F^H with F the d x (2N+1) matrix of per-asset Fourier sums and
 *    C the Toeplitz matrix of a positive semi-definite weight c.
 *  - estimate_index_set / estimate_reference_oracle: brute-force general
 *    index-set sums, used as correctness oracles on small inputs.
 *  - estimate_classical: the Fejer-Dirichlet Fourier spot estimator, which
 *    carries no PSD guarantee.
 *
 * Tick times on the window [t0, t0 + L] are mapped to s = 2π (t - t0) / L.
 * Increments ΔX_l = X(t_l) - X(t_{l-1}) are attached to their right
 * endpoint. All estimators return variance per original time unit; the
 * common prefactor is 1 / (L (2N + 1)).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pdfcov/errors.hpp"
#include "pdfcov/sampling.hpp"

namespace pdfcov {

using cdouble = std::complex<double>;

struct Window {
  double t0 = 0.0;
  double t_end = 1.0;

  double length() const noexcept { return t_end - t0; }
  double rescale(double t) const noexcept { return 2.0 * std::numbers::pi * (t - t0) / length(); }

  /// The window spanned by the first series; every other series must share it.
  static Window of(const std::vector<TickSeries>& ticks) {
    if (ticks.empty()) throw ArgumentError("no tick series");
    ticks.front().validate();
    return Window{ticks.front().times.front(), ticks.front().times.back()};
  }
};

struct FreqParams {
  int N = 1;
  double M = 1.0;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::size_t n_ref = 0;
};

/// N = max(1, floor(n^alpha / 2)), M = N^beta.
inline FreqParams select_freq(std::size_t n, double alpha, double beta) {
  if (n < 4) throw ArgumentError("frequency selection needs n >= 4");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in (0, 1]");
  if (!(beta > 0.0 && beta <= 1.0)) throw ArgumentError("beta must lie in (0, 1]");
  const double raw = std::pow(static_cast<double>(n), alpha) / 2.0;
  const int N = std::max(1, static_cast<int>(std::floor(raw * (1.0 + 1e-12))));
  return FreqParams{N, std::pow(static_cast<double>(N), beta), alpha, beta, n};
}

inline constexpr double kAlphaNoNoise = 3.0 / 4.0;
inline constexpr double kAlphaNoise = 2.0 / 3.0;
inline constexpr double kBetaDefault = 4.0 / 9.0;

inline FreqParams select_freq(std::size_t n, bool noise_present) {
  return select_freq(n, noise_present ? kAlphaNoise : kAlphaNoNoise, kBetaDefault);
}

/// Lag-1 autocorrelation of tick returns (0 with fewer than 3 returns).
inline double lag1_autocorrelation(const TickSeries& ts) {
  std::vector<double> r;
  for (std::size_t l = 1; l < ts.size(); ++l) r.push_back(ts.log_prices[l] - ts.log_prices[l - 1]);
  if (r.size() < 3) return 0.0;
  double m = 0.0;
  for (double x : r) m += x;
  m /= static_cast<double>(r.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    den += (r[i] - m) * (r[i] - m);
    if (i > 0) num += (r[i] - m) * (r[i - 1] - m);
  }
  return den > 0.0 ? num / den : 0.0;
}

/// Additive noise leaves a negative first-order autocorrelation in returns;
/// flag it when any asset falls below -2/sqrt(n).
inline bool noise_suspected(const std::vector<TickSeries>& ticks) {
  for (const auto& ts : ticks) {
    const auto n = static_cast<double>(ts.n_increments());
    if (n >= 3 && lag1_autocorrelation(ts) < -2.0 / std::sqrt(n)) return true;
  }
  return false;
}

/// Even weight function c(k) on the integers.
class PsdWeight {
 public:
  enum class Kind { kGaussian, kFejer, kCustom };

  /// c(k) = exp(-2π² k² / M).
  static PsdWeight gaussian(double M) {
    if (!(M > 0.0) || !std::isfinite(M)) throw ArgumentError("Gaussian localization M must be positive");
    PsdWeight w;
    w.kind_ = Kind::kGaussian;
    w.M_ = M;
    return w;
  }

  /// c(k) = 1 - |k| / (M + 1) for |k| <= M, 0 beyond.
  static PsdWeight fejer(int M) {
    if (M < 0) throw ArgumentError("Fejer order must be non-negative");
    PsdWeight w;
    w.kind_ = Kind::kFejer;
    w.M_ = M;
    return w;
  }

  /// table[k] = c(k) = c(-k) for k = 0..table.size()-1, zero beyond.
  static PsdWeight custom(std::vector<double> table) {
    if (table.empty()) throw ArgumentError("custom weight table is empty");
    PsdWeight w;
    w.kind_ = Kind::kCustom;
    w.table_ = std::move(table);
    return w;
  }

  Kind kind() const noexcept { return kind_; }
  double M() const noexcept { return M_; }

  double operator()(long k) const {
    const long a = k < 0 ? -k : k;
    switch (kind_) {
      case Kind::kGaussian: {
        const double x = static_cast<double>(a);
        return std::exp(-2.0 * std::numbers::pi * std::numbers::pi * x * x / M_);
      }
      case Kind::kFejer:
        return static_cast<double>(a) <= M_ ? 1.0 - static_cast<double>(a) / (M_ + 1.0) : 0.0;
      case Kind::kCustom:
        return static_cast<std::size_t>(a) < table_.size() ? table_[static_cast<std::size_t>(a)] : 0.0;
    }
    return 0.0;
  }

  /// c(0..max_lag); trailing exact zeros are trimmed.
  std::vector<double> taps(int max_lag) const {
    std::vector<double> c(static_cast<std::size_t>(max_lag) + 1);
    for (int k = 0; k <= max_lag; ++k) c[static_cast<std::size_t>(k)] = (*this)(k);
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    return c;
  }

  /// Minimum eigenvalue of the (2N+1) x (2N+1) Toeplitz matrix [c(u-u')].
  double toeplitz_min_eigenvalue(int N) const {
    const int P = 2 * N + 1;
    Eigen::MatrixXd T(P, P);
    for (int a = 0; a < P; ++a)
      for (int b = 0; b < P; ++b) T(a, b) = (*this)(a - b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  /// Gaussian and Fejer weights are positive definite functions on Z; custom
  /// tables are checked numerically on the lags the estimator uses.
  void require_psd(int N) const {
    if (kind_ != Kind::kCustom) return;
    const double lo = toeplitz_min_eigenvalue(N);
    if (lo < -1e-10)
      throw ConfigurationError("weight is not positive semi-definite (Toeplitz min eigenvalue " + std::to_string(lo) + ")");
  }

 private:
  Kind kind_ = Kind::kGaussian;
  double M_ = 1.0;
  std::vector<double> table_;
};

struct FourierCoeffVector {
  int asset_id = 0;
  double t_eval = 0.0;
  int N = 0;
  std::vector<cdouble> values;  ///< values[u + N], u = -N..N

  cdouble operator()(int u) const { return values.at(static_cast<std::size_t>(u + N)); }
};

enum class EstimatorTag { kPdf, kClassical, kReferenceOracle, kIndexSet, kExternal };

inline std::string tag_name(EstimatorTag t) {
  switch (t) {
    case EstimatorTag::kPdf: return "pdf";
    case EstimatorTag::kClassical: return "classical";
    case EstimatorTag::kReferenceOracle: return "reference";
    case EstimatorTag::kIndexSet: return "index_set";
    case EstimatorTag::kExternal: return "external";
  }
  return "unknown";
}

struct MatrixDiagnostics {
  double min_eigenvalue = 0.0;  ///< of the symmetric part
  double trace = 0.0;
  double symmetry_residual = 0.0;  ///< max |V - V^T|
  double max_abs = 0.0;
  double imag_residual = 0.0;  ///< max |Im| discarded on realification
  bool imag_residual_exceeded = false;
};

inline MatrixDiagnostics diagnose(const Eigen::MatrixXd& V) {
  MatrixDiagnostics d;
  if (V.size() == 0) return d;
  d.trace = V.trace();
  d.max_abs = V.cwiseAbs().maxCoeff();
  d.symmetry_residual = (V - V.transpose()).cwiseAbs().maxCoeff();
  const Eigen::MatrixXd S = 0.5 * (V + V.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

struct SpotCovEstimate {
  std::vector<double> eval_times;
  std::vector<Eigen::MatrixXd> matrices;
  std::vector<MatrixDiagnostics> diagnostics;
  EstimatorTag tag = EstimatorTag::kPdf;
  FreqParams freq;

  int d() const { return matrices.empty() ? 0 : static_cast<int>(matrices.front().rows()); }

  /// Unit conversion, e.g. per-second to per-day with factor = day seconds.
  SpotCovEstimate scaled(double factor) const {
    SpotCovEstimate out = *this;
    for (auto& m : out.matrices) m *= factor;
    for (auto& g : out.diagnostics) {
      g.min_eigenvalue *= factor;
      g.trace *= factor;
      g.symmetry_residual *= std::abs(factor);
      g.max_abs *= std::abs(factor);
      g.imag_residual *= std::abs(factor);
    }
    return out;
  }
};

namespace detail {

inline void check_windows(const std::vector<TickSeries>& ticks, const Window& w) {
  if (!(w.length() > 0.0)) throw ArgumentError("window must have positive length");
  const double tol = 1e-9 * w.length();
  for (const auto& ts : ticks) {
    ts.validate();
    if (std::abs(ts.times.front() - w.t0) > tol || std::abs(ts.times.back() - w.t_end) > tol)
      throw ArgumentError("tick series for asset " + std::to_string(ts.asset_id) + " does not span the common window");
  }
}

inline void check_eval_times(const std::vector<double>& times, const Window& w) {
  const double tol = 1e-9 * w.length();
  for (double t : times)
    if (t < w.t0 - tol || t > w.t_end + tol) throw ArgumentError("evaluation time outside the window");
}

inline void increments(const TickSeries& ts, const Window& w, std::vector<double>& s, std::vector<double>& dx) {
  const std::size_t n = ts.n_increments();
  s.resize(n);
  dx.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    s[l] = w.rescale(ts.times[l + 1]);
    dx[l] = ts.log_prices[l + 1] - ts.log_prices[l];
  }
}

inline constexpr int kReseedEvery = 32;

/// out[u + N] = sum_l e^{-i u s_l} dx_l for u = -N..N, by phase recurrence in
/// u with periodic exact reseeding. Negative and positive frequencies are
/// computed independently.
inline void base_sums(const std::vector<double>& s, const std::vector<double>& dx, int N, cdouble* out) {
  const std::size_t n = s.size();
  std::vector<double> zr(n), zi(n), wr(n), wi(n);
  for (std::size_t l = 0; l < n; ++l) {
    wr[l] = std::cos(s[l]);
    wi[l] = -std::sin(s[l]);
  }
  for (int u = -N; u <= N; ++u) {
    if ((u + N) % kReseedEvery == 0) {
      for (std::size_t l = 0; l < n; ++l) {
        const double a = static_cast<double>(u) * s[l];
        zr[l] = std::cos(a);
        zi[l] = -std::sin(a);
      }
    }
    double ar = 0.0, ai = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      ar += zr[l] * dx[l];
      ai += zi[l] * dx[l];
    }
    out[u + N] = cdouble(ar, ai);
    for (std::size_t l = 0; l < n; ++l) {
      const double r = zr[l] * wr[l] - zi[l] * wi[l];
      const double i = zr[l] * wi[l] + zi[l] * wr[l];
      zr[l] = r;
      zi[l] = i;
    }
  }
}

}  // namespace detail

/// Per-asset sums B_j(u) = Σ_l e^{-i u s_l} ΔX_l, computed once for the
/// largest N needed. Coefficients at any t and any N' <= N follow as
/// f_j(u; t) = e^{i u s_t} B_j(u), without touching the ticks again.
class CoefficientTable {
 public:
  CoefficientTable(const std::vector<TickSeries>& ticks, int N, std::optional<Window> window = std::nullopt)
      : window_(window ? *window : Window::of(ticks)), N_(N) {
    if (N < 0) throw ArgumentError("cutting frequency N must be non-negative");
    detail::check_windows(ticks, window_);
    d_ = static_cast<int>(ticks.size());
    B_.resize(d_, 2 * N + 1);
    std::vector<double> s, dx;
    std::vector<cdouble> row(static_cast<std::size_t>(2 * N + 1));
    for (int j = 0; j < d_; ++j) {
      detail::increments(ticks[static_cast<std::size_t>(j)], window_, s, dx);
      if (dx.empty()) throw ArgumentError("tick series has no increments");
      detail::base_sums(s, dx, N, row.data());
      for (int c = 0; c < 2 * N + 1; ++c) B_(j, c) = row[static_cast<std::size_t>(c)];
    }
  }

  int N() const noexcept { return N_; }
  int d() const noexcept { return d_; }
  const Window& window() const noexcept { return window_; }
  cdouble base(int j, int u) const { return B_(j, u + N_); }

  /// d x (2n+1) matrix F(j, u + n) = e^{i u s_t} B_j(u), for n <= N.
  Eigen::MatrixXcd at(double t, int n = -1) const {
    if (n < 0) n = N_;
    if (n > N_) throw ArgumentError("requested N exceeds the coefficient table");
    const double st = window_.rescale(t);
    Eigen::MatrixXcd F(d_, 2 * n + 1);
    for (int u = -n; u <= n; ++u) {
      const cdouble ph = std::polar(1.0, static_cast<double>(u) * st);
      for (int j = 0; j < d_; ++j) F(j, u + n) = ph * B_(j, u + N_);
    }
    return F;
  }

 private:
  Window window_;
  int N_ = 0;
  int d_ = 0;
  Eigen::MatrixXcd B_;
};

/// f(u; t) = Σ_l e^{i u (s_t - s_l)} ΔX_l for u = -N..N.
inline FourierCoeffVector fourier_coeffs(const TickSeries& ticks, int N, double t_eval, const Window& window) {
  if (ticks.n_increments() == 0) throw ArgumentError("tick series has no increments");
  const CoefficientTable table({ticks}, N, window);
  detail::check_eval_times({t_eval}, window);
  const Eigen::MatrixXcd F = table.at(t_eval);
  FourierCoeffVector out;
  out.asset_id = ticks.asset_id;
  out.t_eval = t_eval;
  out.N = N;
  out.values.assign(F.data(), F.data() + F.size());
  return out;
}

namespace detail {

/// Re(F C F^H) / (L (2N+1)) with the band of C limited to nonzero taps.
inline Eigen::MatrixXd pdf_matrix(const Eigen::MatrixXcd& F, const std::vector<double>& taps, double L,
                                  MatrixDiagnostics& diag) {
  const Eigen::Index d = F.rows();
  const Eigen::Index P = F.cols();
  const Eigen::Index band = std::min<Eigen::Index>(static_cast<Eigen::Index>(taps.size()) - 1, P - 1);
  const Eigen::MatrixXcd Fh = F.adjoint();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(P, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const cdouble* src = Fh.col(j).data();
    cdouble* dst = H.col(j).data();
    for (Eigen::Index u = 0; u < P; ++u) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, u - band);
      const Eigen::Index hi = std::min<Eigen::Index>(P - 1, u + band);
      cdouble acc = 0.0;
      for (Eigen::Index v = lo; v <= hi; ++v) acc += taps[static_cast<std::size_t>(std::abs(u - v))] * src[v];
      dst[u] = acc;
    }
  }
  const Eigen::MatrixXcd G = F * H;
  const double scale = 1.0 / (L * static_cast<double>(P));
  Eigen::MatrixXd V = G.real() * scale;
  diag.imag_residual = G.imag().cwiseAbs().maxCoeff() * scale;
  const Eigen::MatrixXd S = 0.5 * (V + V.transpose());
  diag.imag_residual_exceeded = diag.imag_residual > 1e-10 * std::max(std::abs(S.trace()), 1e-300);
  return S;
}

}  // namespace detail

/// PDF estimate from a precomputed coefficient table (freq.N <= table.N()).
inline SpotCovEstimate estimate_pdf(const CoefficientTable& table, const FreqParams& freq, const PsdWeight& weight,
                                    const std::vector<double>& eval_times) {
  if (freq.N < 0) throw ArgumentError("cutting frequency N must be non-negative");
  weight.require_psd(freq.N);
  detail::check_eval_times(eval_times, table.window());
  const std::vector<double> taps = weight.taps(2 * freq.N);
  SpotCovEstimate out;
  out.tag = EstimatorTag::kPdf;
  out.freq = freq;
  out.eval_times = eval_times;
  for (double t : eval_times) {
    MatrixDiagnostics diag;
    Eigen::MatrixXd V = detail::pdf_matrix(table.at(t, freq.N), taps, table.window().length(), diag);
    MatrixDiagnostics full = diagnose(V);
    full.imag_residual = diag.imag_residual;
    full.imag_residual_exceeded = diag.imag_residual_exceeded;
    out.matrices.push_back(std::move(V));
    out.diagnostics.push_back(full);
  }
  return out;
}

inline SpotCovEstimate estimate_pdf(const std::vector<TickSeries>& ticks, const FreqParams& freq,
                                    const PsdWeight& weight, const std::vector<double>& eval_times,
                                    std::optional<Window> window = std::nullopt) {
  weight.require_psd(freq.N);
  const CoefficientTable table(ticks, freq.N, window);
  return estimate_pdf(table, freq, weight, eval_times);
}

/// Single entry (j, jp) of the PDF estimate at time t and cutting frequency
/// N <= table.N(); `taps` are the weight's nonzero taps. Used where whole
/// matrices are not needed (N sweeps).
inline double pdf_entry(const CoefficientTable& table, int N, const std::vector<double>& taps, double t, int j,
                        int jp) {
  if (N < 0 || N > table.N()) throw ArgumentError("N outside the coefficient table");
  const double st = table.window().rescale(t);
  const int P = 2 * N + 1;
  std::vector<cdouble> a(static_cast<std::size_t>(P)), b(static_cast<std::size_t>(P));
  for (int u = -N; u <= N; ++u) {
    const cdouble ph = std::polar(1.0, static_cast<double>(u) * st);
    a[static_cast<std::size_t>(u + N)] = ph * table.base(j, u);
    b[static_cast<std::size_t>(u + N)] = std::conj(ph * table.base(jp, u));
  }
  const int band = std::min(static_cast<int>(taps.size()) - 1, P - 1);
  double acc = 0.0;
  for (int u = 0; u < P; ++u) {
    const int lo = std::max(0, u - band), hi = std::min(P - 1, u + band);
    cdouble h = 0.0;
    for (int v = lo; v <= hi; ++v) h += taps[static_cast<std::size_t>(std::abs(u - v))] * b[static_cast<std::size_t>(v)];
    acc += (a[static_cast<std::size_t>(u)] * h).real();
  }
  return acc / (table.window().length() * static_cast<double>(P));
}

/// Gaussian-weight PDF estimate with M taken from freq.
inline SpotCovEstimate estimate_pdf(const std::vector<TickSeries>& ticks, const FreqParams& freq,
                                    const std::vector<double>& eval_times) {
  return estimate_pdf(ticks, freq, PsdWeight::gaussian(freq.M), eval_times);
}

/// One index set entry: frequency k with weight c(k) and pairs (s, s') with s + s' = k.
struct IndexSetTerm {
  long k = 0;
  cdouble c = 1.0;
  std::vector<std::pair<long, long>> pairs;
};

/// Brute-force general index-set estimator:
/// V(t) = pre Σ_l Σ_l' Σ_k c(k) e^{i k s_t} Σ_{(s,s')} e^{-i s s_l} e^{-i s' s'_l'} ΔX ΔX'.
/// Cost is O(n² Σ|S(k)|) per matrix entry; meant for small inputs.
inline SpotCovEstimate estimate_index_set(const std::vector<TickSeries>& ticks, const std::vector<IndexSetTerm>& terms,
                                          double prefactor, const std::vector<double>& eval_times,
                                          std::optional<Window> window = std::nullopt) {
  const Window w = window ? *window : Window::of(ticks);
  detail::check_windows(ticks, w);
  detail::check_eval_times(eval_times, w);
  for (const auto& term : terms)
    for (const auto& [s, sp] : term.pairs)
      if (s + sp != term.k) throw ArgumentError("index pair does not sum to k");
  const auto d = static_cast<Eigen::Index>(ticks.size());
  std::vector<std::vector<double>> S(ticks.size()), DX(ticks.size());
  for (std::size_t j = 0; j < ticks.size(); ++j) detail::increments(ticks[j], w, S[j], DX[j]);
  SpotCovEstimate out;
  out.tag = EstimatorTag::kIndexSet;
  out.eval_times = eval_times;
  for (double t : eval_times) {
    const double st = w.rescale(t);
    Eigen::MatrixXd V(d, d);
    double imag = 0.0;
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) {
        const auto& sa = S[static_cast<std::size_t>(a)];
        const auto& sb = S[static_cast<std::size_t>(b)];
        const auto& xa = DX[static_cast<std::size_t>(a)];
        const auto& xb = DX[static_cast<std::size_t>(b)];
        cdouble total = 0.0;
        for (std::size_t l = 0; l < sa.size(); ++l)
          for (std::size_t lp = 0; lp < sb.size(); ++lp) {
            cdouble inner_k = 0.0;
            for (const auto& term : terms) {
              cdouble inner_s = 0.0;
              for (const auto& [s, sp] : term.pairs)
                inner_s += std::exp(cdouble(0.0, -static_cast<double>(s) * sa[l])) *
                           std::exp(cdouble(0.0, -static_cast<double>(sp) * sb[lp]));
              inner_k += term.c * std::exp(cdouble(0.0, static_cast<double>(term.k) * st)) * inner_s;
            }
            total += inner_k * xa[l] * xb[lp];
          }
        total *= prefactor;
        V(a, b) = total.real();
        imag = std::max(imag, std::abs(total.imag()));
      }
    MatrixDiagnostics diag = diagnose(V);
    diag.imag_residual = imag;
    diag.imag_residual_exceeded = imag > 1e-10 * std::max(std::abs(diag.trace), 1e-300);
    out.matrices.push_back(std::move(V));
    out.diagnostics.push_back(diag);
  }
  return out;
}

/// The index sets of the positive semi-definite construction:
/// K = {-2N..2N}, S(k) = {(-N+k+v, N-v)} for k >= 0 and {(N+k-v, -N+v)} for k < 0.
inline std::vector<IndexSetTerm> psd_index_sets(int N, const PsdWeight& weight) {
  std::vector<IndexSetTerm> terms;
  for (long k = -2L * N; k <= 2L * N; ++k) {
    IndexSetTerm term;
    term.k = k;
    term.c = weight(k);
    if (k >= 0) {
      for (long v = 0; v <= 2L * N - k; ++v) term.pairs.emplace_back(-N + k + v, N - v);
    } else {
      for (long v = 0; v <= 2L * N + k; ++v) term.pairs.emplace_back(N + k - v, -N + v);
    }
    terms.push_back(std::move(term));
  }
  return terms;
}

/// Fejer-Dirichlet index sets: K = {-M..M}, S(k) = {(k - b, b) : |b| <= N}.
inline std::vector<IndexSetTerm> classical_index_sets(int N, int M_int) {
  std::vector<IndexSetTerm> terms;
  for (long k = -M_int; k <= M_int; ++k) {
    IndexSetTerm term;
    term.k = k;
    term.c = 1.0 - static_cast<double>(k < 0 ? -k : k) / (M_int + 1.0);
    for (long b = -N; b <= N; ++b) term.pairs.emplace_back(k - b, b);
    terms.push_back(std::move(term));
  }
  return terms;
}

inline constexpr std::size_t kOracleMaxTicks = 100;
inline constexpr int kOracleMaxN = 10;

/// Literal summation over the positive semi-definite index sets.
inline SpotCovEstimate estimate_reference_oracle(const std::vector<TickSeries>& ticks, int N, const PsdWeight& weight,
                                                 const std::vector<double>& eval_times,
                                                 std::optional<Window> window = std::nullopt) {
  if (N < 0) throw ArgumentError("cutting frequency N must be non-negative");
  if (N > kOracleMaxN) throw ArgumentError("reference oracle limited to N <= 10");
  for (const auto& ts : ticks)
    if (ts.n_increments() > kOracleMaxTicks) throw ArgumentError("reference oracle limited to n <= 100 increments");
  const Window w = window ? *window : Window::of(ticks);
  SpotCovEstimate out =
      estimate_index_set(ticks, psd_index_sets(N, weight), 1.0 / (w.length() * (2.0 * N + 1.0)), eval_times, w);
  out.tag = EstimatorTag::kReferenceOracle;
  out.freq.N = N;
  out.freq.M = weight.M();
  return out;
}

/// D_N(x) = Σ_{|k|<=N} e^{ikx} = sin((N+½)x) / sin(x/2).
inline double dirichlet_kernel(int N, double x) {
  const double h = std::sin(0.5 * x);
  if (std::abs(h) < 1e-6) {
    double s = 1.0;
    for (int k = 1; k <= N; ++k) s += 2.0 * std::cos(k * x);
    return s;
  }
  return std::sin((N + 0.5) * x) / h;
}

/// F_M(x) = Σ_{|k|<=M} (1 - |k|/(M+1)) e^{ikx} = (1/(M+1)) (sin((M+1)x/2) / sin(x/2))².
inline double fejer_kernel(int M, double x) {
  const double h = std::sin(0.5 * x);
  if (std::abs(h) < 1e-6) {
    double s = 1.0;
    for (int k = 1; k <= M; ++k) s += 2.0 * (1.0 - k / (M + 1.0)) * std::cos(k * x);
    return s;
  }
  const double r = std::sin(0.5 * (M + 1) * x) / h;
  return r * r / (M + 1.0);
}

/// Classical Fourier spot estimator:
/// V_jj'(t) = 1/(L(2N+1)) Σ_l Σ_l' F_M(s_t - s_l) D_N(s_l - s'_l') ΔX_l ΔX'_l'.
/// The inner Dirichlet sum is evaluated as Re Σ_b e^{i b s_l} B_j'(b).
/// Matrices are returned as computed (not symmetrized).
inline SpotCovEstimate estimate_classical(const std::vector<TickSeries>& ticks, int N, int M_int,
                                          const std::vector<double>& eval_times,
                                          std::optional<Window> window = std::nullopt) {
  if (N < 0 || M_int < 0) throw ArgumentError("classical estimator orders must be non-negative");
  const CoefficientTable table(ticks, N, window);
  const Window& w = table.window();
  detail::check_eval_times(eval_times, w);
  const int d = table.d();
  std::vector<std::vector<double>> S(ticks.size()), DX(ticks.size());
  for (std::size_t j = 0; j < ticks.size(); ++j) detail::increments(ticks[j], w, S[j], DX[j]);
  // a[j][jp][l] = Σ_l' D_N(s_l - s'_l') ΔX'_l'
  std::vector<std::vector<std::vector<double>>> a(static_cast<std::size_t>(d),
                                                  std::vector<std::vector<double>>(static_cast<std::size_t>(d)));
  for (int j = 0; j < d; ++j) {
    const auto& s = S[static_cast<std::size_t>(j)];
    auto& aj = a[static_cast<std::size_t>(j)];
    for (auto& v : aj) v.assign(s.size(), 0.0);
    for (std::size_t l = 0; l < s.size(); ++l)
      for (int b = -N; b <= N; ++b) {
        const cdouble e = std::polar(1.0, static_cast<double>(b) * s[l]);
        for (int jp = 0; jp < d; ++jp) aj[static_cast<std::size_t>(jp)][l] += (e * table.base(jp, b)).real();
      }
  }
  const double pre = 1.0 / (w.length() * (2.0 * N + 1.0));
  SpotCovEstimate est;
  est.tag = EstimatorTag::kClassical;
  est.freq.N = N;
  est.freq.M = M_int;
  est.eval_times = eval_times;
  for (double t : eval_times) {
    const double st = w.rescale(t);
    Eigen::MatrixXd V(d, d);
    for (int j = 0; j < d; ++j) {
      const auto& s = S[static_cast<std::size_t>(j)];
      const auto& dx = DX[static_cast<std::size_t>(j)];
      std::vector<double> fm(s.size());
      for (std::size_t l = 0; l < s.size(); ++l) fm[l] = fejer_kernel(M_int, st - s[l]) * dx[l];
      for (int jp = 0; jp < d; ++jp) {
        const auto& al = a[static_cast<std::size_t>(j)][static_cast<std::size_t>(jp)];
        double acc = 0.0;
        for (std::size_t l = 0; l < s.size(); ++l) acc += fm[l] * al[l];
        V(j, jp) = pre * acc;
      }
    }
    est.diagnostics.push_back(diagnose(V));
    est.matrices.push_back(std::move(V));
  }
  return est;
}

}  // namespace pdfcov
