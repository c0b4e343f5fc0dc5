/**
 * @file experiments.hpp
 * @brief Monte Carlo batches, the (N, M) grid search, the asynchronicity
 *        sensitivity study and estimator comparisons.
 *
 * Estimates are rescaled by the day length so that they share units with the
 * simulated spot variance (per trading day). Every path is computed
 * independently into its own slot and reductions run serially in path order,
 * so results do not depend on the worker count.
 */
#pragma once

#include <chrono>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "pdfcov/harness/parallel.hpp"
#include "pdfcov/harness/result_store.hpp"
#include "pdfcov/harness/scenario.hpp"
#include "pdfcov/metrics.hpp"
#include "pdfcov/sampling.hpp"

namespace pdfcov::harness {

/// Simulated observations for one path, with the efficient-price bundle kept
/// for the truth.
struct PathData {
  PanelBundle bundle;
  std::vector<TickSeries> ticks;
  double mean_n = 0.0;
};

inline PathData simulate_path(const ScenarioConfig& cfg, std::size_t path) {
  const PathSeeds s = path_seeds(cfg, path);
  PathData out;
  out.bundle = simulate(cfg.model, cfg.corr, cfg.grid, cfg.d, s.price, cfg.sim);
  const NoisyPanel panel = apply_noise(out.bundle, cfg.noise, s.noise);
  out.ticks = sample(panel, cfg.sampling, s.sampling);
  double n = 0.0;
  for (const auto& ts : out.ticks) n += static_cast<double>(ts.n_increments());
  out.mean_n = n / static_cast<double>(out.ticks.size());
  return out;
}

/// Observation count used by the frequency rule.
inline std::size_t rule_n(double mean_n) { return static_cast<std::size_t>(std::llround(mean_n)); }

struct BatchResult {
  std::vector<double> eval_times;
  std::vector<MatrixPath> truth;                   ///< [path][time]
  std::vector<std::vector<SpotCovEstimate>> est;   ///< [estimator][path]
  std::vector<double> mean_n;                      ///< [path]
  double wall_time_s = 0.0;
};

namespace detail {

inline void estimate_path(const ScenarioConfig& cfg, const std::vector<EstimatorSpec>& estimators,
                          const std::vector<double>& times, std::size_t path, BatchResult& out) {
  const PathData pd = simulate_path(cfg, path);
  const bool noise_free = is_noise_free(cfg.noise);
  const std::size_t n = rule_n(pd.mean_n);
  const double scale = pd.bundle.day_seconds;
  MatrixPath truth;
  truth.reserve(times.size());
  for (double t : times) truth.push_back(true_spot_cov(pd.bundle, t));
  std::vector<FreqParams> freqs;
  int max_pdf_N = -1;
  for (const auto& e : estimators) {
    freqs.push_back(e.freq.resolve(n, noise_free));
    if (e.kind == EstimatorKind::kPdf) max_pdf_N = std::max(max_pdf_N, freqs.back().N);
  }
  std::optional<CoefficientTable> table;
  if (max_pdf_N >= 0) table.emplace(pd.ticks, max_pdf_N);
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    const FreqParams& f = freqs[e];
    SpotCovEstimate est = estimators[e].kind == EstimatorKind::kPdf
                              ? estimate_pdf(*table, f, PsdWeight::gaussian(f.M), times)
                              : estimate_classical(pd.ticks, f.N, estimators[e].M_int.value_or(default_fejer_order(f.N)), times);
    out.est[e][path] = est.scaled(scale);
  }
  out.truth[path] = std::move(truth);
  out.mean_n[path] = pd.mean_n;
}

}  // namespace detail

/// Simulates cfg.n_paths paths and applies every estimator to each.
inline BatchResult run_batch(const ScenarioConfig& cfg, const std::vector<EstimatorSpec>& estimators,
                             unsigned workers = 0) {
  cfg.validate();
  if (estimators.empty()) throw ArgumentError("no estimators requested");
  const auto start = std::chrono::steady_clock::now();
  BatchResult out;
  out.eval_times = eval_times(cfg);
  out.truth.resize(cfg.n_paths);
  out.mean_n.resize(cfg.n_paths);
  out.est.assign(estimators.size(), std::vector<SpotCovEstimate>(cfg.n_paths));
  parallel_for(cfg.n_paths, [&](std::size_t k) { detail::estimate_path(cfg, estimators, out.eval_times, k, out); },
               workers);
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline Record make_record(const ScenarioConfig& cfg, const EstimatorSpec& spec, const BatchResult& b, std::size_t e) {
  Record r;
  r.scenario_hash = scenario_hash(cfg);
  r.estimator = spec.label();
  r.key = record_key(r.scenario_hash, r.estimator);
  r.label = scenario_label(cfg);
  r.scenario = encode(cfg);
  r.report = mise(b.est[e], b.truth);
  r.mean_n = mean(b.mean_n);
  std::vector<double> Ns, Ms;
  for (const auto& est : b.est[e]) {
    Ns.push_back(est.freq.N);
    Ms.push_back(est.freq.M);
  }
  r.mean_N = mean(Ns);
  r.mean_M = mean(Ms);
  r.wall_time_s = b.wall_time_s;
  r.master_seed = cfg.master_seed;
  return r;
}

/// Standard error of the mean of the per-path differences a - b.
inline double paired_se(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ArgumentError("paired samples differ in length");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return standard_error(d);
}

// ---- grid search ----

inline const std::vector<double>& grid_alphas() {
  static const std::vector<double> v{1.0, 5.0 / 6.0, 3.0 / 4.0, 2.0 / 3.0, 1.0 / 2.0, 1.0 / 3.0};
  return v;
}
inline const std::vector<double>& grid_betas() {
  static const std::vector<double> v{5.0 / 6.0, 3.0 / 4.0, 2.0 / 3.0, 1.0 / 2.0, 4.0 / 9.0};
  return v;
}

struct GridCell {
  double alpha = 0.0;
  double beta = 0.0;
  EntryScore mise_var;  ///< variance entries, averaged over the two assets
  EntryScore mise_cov;  ///< the covariance entry
  double weighted = 0.0;
  double mean_N = 0.0;
  double mean_M = 0.0;
};

struct GridSearchResult {
  std::vector<GridCell> cells;  ///< alpha-major order
  std::size_t best = 0;
  std::vector<double> alphas;
  std::vector<double> betas;

  const GridCell& cell(double alpha, double beta) const {
    for (const auto& c : cells)
      if (std::abs(c.alpha - alpha) < 1e-12 && std::abs(c.beta - beta) < 1e-12) return c;
    throw ArgumentError("no grid cell for the requested (alpha, beta)");
  }
};

/// MISE of the variances and of the covariance for each (alpha, beta); the
/// winner minimizes 0.1 MISE_var + 0.9 MISE_cov.
inline GridSearchResult run_grid_search(const ScenarioConfig& cfg, const std::vector<double>& alphas,
                                        const std::vector<double>& betas, unsigned workers = 0) {
  if (alphas.empty() || betas.empty()) throw ArgumentError("grid search needs at least one alpha and one beta");
  if (cfg.d != 2) throw ArgumentError("grid search is defined for d = 2");
  std::vector<EstimatorSpec> specs;
  for (double a : alphas)
    for (double b : betas) specs.push_back(EstimatorSpec::pdf(a, b));
  const BatchResult batch = run_batch(cfg, specs, workers);
  GridSearchResult out;
  out.alphas = alphas;
  out.betas = betas;
  for (std::size_t e = 0; e < specs.size(); ++e) {
    GridCell c;
    c.alpha = *specs[e].freq.alpha;
    c.beta = *specs[e].freq.beta;
    const EntryScore v0 = entry_mise(batch.est[e], batch.truth, 0, 0);
    const EntryScore v1 = entry_mise(batch.est[e], batch.truth, 1, 1);
    std::vector<double> var(v0.per_path.size());
    for (std::size_t k = 0; k < var.size(); ++k) var[k] = 0.5 * (v0.per_path[k] + v1.per_path[k]);
    c.mise_var = {mean(var), standard_error(var), var};
    c.mise_cov = entry_mise(batch.est[e], batch.truth, 0, 1);
    c.weighted = weighted_selection(c.mise_var.mean, c.mise_cov.mean);
    std::vector<double> Ns, Ms;
    for (const auto& est : batch.est[e]) {
      Ns.push_back(est.freq.N);
      Ms.push_back(est.freq.M);
    }
    c.mean_N = mean(Ns);
    c.mean_M = mean(Ms);
    out.cells.push_back(std::move(c));
  }
  for (std::size_t i = 1; i < out.cells.size(); ++i)
    if (out.cells[i].weighted < out.cells[out.best].weighted) out.best = i;
  return out;
}

/// Long form: alpha,beta,mise_var,mise_var_se,mise_cov,mise_cov_se,weighted,mean_N,mean_M,best.
inline void write_grid_csv(std::ostream& os, const GridSearchResult& g) {
  os << "alpha,beta,mise_var,mise_var_se,mise_cov,mise_cov_se,weighted,mean_N,mean_M,best\n";
  os.precision(10);
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    const auto& c = g.cells[i];
    os << c.alpha << ',' << c.beta << ',' << c.mise_var.mean << ',' << c.mise_var.se << ',' << c.mise_cov.mean << ','
       << c.mise_cov.se << ',' << c.weighted << ',' << c.mean_N << ',' << c.mean_M << ',' << (i == g.best ? 1 : 0)
       << '\n';
  }
}

/// Covariance MISE laid out with one row per alpha and one column per beta.
inline void write_grid_table(std::ostream& os, const GridSearchResult& g) {
  const auto flags = os.flags();
  const auto prec = os.precision(6);
  os << "alpha";
  for (double b : g.betas) os << ",beta=" << b;
  os << '\n';
  for (double a : g.alphas) {
    os << std::defaultfloat << std::setprecision(6) << a << std::scientific << std::setprecision(4);
    for (double b : g.betas) os << ',' << g.cell(a, b).mise_cov.mean;
    os << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

// ---- asynchronicity sensitivity ----

struct SensitivityConfig {
  std::vector<double> rhos{0.2, 0.3, -0.3, 0.5, -0.5, 0.7, -0.7, 1.0, -1.0};
  std::size_t n = 500;
  std::size_t n_paths = 1000;
  std::uint64_t master_seed = 42;
  std::vector<int> Ns;  ///< empty means 0..n
  double t_eval = 0.5;
  double beta = kBetaDefault;
};

struct SensitivityCurve {
  double rho = 0.0;
  BiasMseCurve sync;
  BiasMseCurve async;
  std::vector<double> mse_diff_se;  ///< paired SE of async - sync relative MSE
};

/// Two correlated Brownian motions on [0, 1], observed either both on i/n or
/// on i/n and (i + 1/2)/n; V^{12}(t_eval) for each N with M = N^beta.
/// The same Brownian paths serve both designs and every rho shares the
/// underlying normal draws.
inline std::vector<SensitivityCurve> run_sensitivity_study(const SensitivityConfig& cfg, unsigned workers = 0) {
  for (double r : cfg.rhos)
    if (!(std::abs(r) <= 1.0)) throw ArgumentError("correlation must lie in [-1, 1]");
  for (double r : cfg.rhos)
    if (r == 0.0) throw ArgumentError("relative curves need a nonzero correlation");
  if (cfg.n < 2) throw ArgumentError("need n >= 2");
  if (cfg.n_paths < 1) throw ArgumentError("need at least one path");
  std::vector<int> Ns = cfg.Ns;
  if (Ns.empty())
    for (int N = 0; N <= static_cast<int>(cfg.n); ++N) Ns.push_back(N);
  const int max_N = *std::max_element(Ns.begin(), Ns.end());
  if (*std::min_element(Ns.begin(), Ns.end()) < 0) throw ArgumentError("N must be non-negative");
  std::vector<std::vector<double>> taps(Ns.size());
  for (std::size_t i = 0; i < Ns.size(); ++i)
    taps[i] = PsdWeight::gaussian(std::pow(static_cast<double>(std::max(Ns[i], 1)), cfg.beta)).taps(2 * Ns[i]);
  const DenseGrid grid{0.0, 1.0 / (2.0 * static_cast<double>(cfg.n)), 2 * cfg.n};
  const std::uint64_t key = fnv1a64("sensitivity");
  std::vector<SensitivityCurve> out;
  for (double rho : cfg.rhos) {
    // vals[design][N index][path]
    std::vector<std::vector<std::vector<double>>> vals(
        2, std::vector<std::vector<double>>(Ns.size(), std::vector<double>(cfg.n_paths)));
    parallel_for(
        cfg.n_paths,
        [&](std::size_t k) {
          const auto b = simulate_brownian(grid, 2, rho, derive_seed({cfg.master_seed, key, cfg.n, k}));
          const NoisyPanel panel = identity_panel(b);
          for (int design = 0; design < 2; ++design) {
            const auto [x, y] = sample_shifted_pair(panel, cfg.n, design == 0 ? 0.0 : 0.5);
            const CoefficientTable table({x, y}, max_N);
            for (std::size_t i = 0; i < Ns.size(); ++i)
              vals[static_cast<std::size_t>(design)][i][k] = pdf_entry(table, Ns[i], taps[i], cfg.t_eval, 0, 1);
          }
        },
        workers);
    SensitivityCurve c;
    c.rho = rho;
    c.sync = bias_mse_curve(Ns, vals[0], rho);
    c.async = bias_mse_curve(Ns, vals[1], rho);
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      std::vector<double> ms(cfg.n_paths), ma(cfg.n_paths);
      for (std::size_t k = 0; k < cfg.n_paths; ++k) {
        ms[k] = (vals[0][i][k] - rho) * (vals[0][i][k] - rho) / (rho * rho);
        ma[k] = (vals[1][i][k] - rho) * (vals[1][i][k] - rho) / (rho * rho);
      }
      c.mse_diff_se.push_back(cfg.n_paths > 1 ? paired_se(ma, ms) : 0.0);
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline void write_sensitivity_csv(std::ostream& os, const std::vector<SensitivityCurve>& curves) {
  os << "rho,N,rel_bias_sync,rel_bias_async,rel_mse_sync,rel_mse_async,rel_bias_sync_se,rel_bias_async_se,"
        "rel_mse_sync_se,rel_mse_async_se,rel_mse_diff_se\n";
  os.precision(10);
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.sync.N.size(); ++i)
      os << c.rho << ',' << c.sync.N[i] << ',' << c.sync.bias[i] << ',' << c.async.bias[i] << ',' << c.sync.mse[i]
         << ',' << c.async.mse[i] << ',' << c.sync.bias_se[i] << ',' << c.async.bias_se[i] << ',' << c.sync.mse_se[i]
         << ',' << c.async.mse_se[i] << ',' << c.mse_diff_se[i] << '\n';
}

// ---- comparisons ----

struct ComparisonRow {
  std::string scenario_hash;
  std::string label;
  std::string estimator;
  ScoreReport report;
  double mean_n = 0.0;
  double mean_N = 0.0;
};

inline ComparisonRow row_from_record(const Record& r) {
  return {r.scenario_hash, r.label, r.estimator, r.report, r.mean_n, r.mean_N};
}

/// Dimension sweep (Table-4 style) around a base scenario.
inline std::vector<ScenarioConfig> dimension_sweep(const ScenarioConfig& base, const std::vector<int>& ds) {
  std::vector<ScenarioConfig> out;
  for (int d : ds) {
    ScenarioConfig c = base;
    c.d = d;
    out.push_back(c);
  }
  return out;
}

/// Poisson mean-gap sweep (Table-5 style); N follows the rule at each gap
/// unless the estimator pins it.
inline std::vector<ScenarioConfig> gap_sweep(const ScenarioConfig& base, const std::vector<double>& gaps) {
  std::vector<ScenarioConfig> out;
  for (double g : gaps) {
    ScenarioConfig c = base;
    c.sampling = PoissonSampling{g};
    out.push_back(c);
  }
  return out;
}

/// Estimates supplied by an outside tool, keyed by (scenario, estimator).
/// Rows: scenario,estimator,path,time_s,j,jp,value, values in per-day units.
struct ExternalEstimates {
  // [(scenario, estimator)][path][time] -> entries
  std::map<std::pair<std::string, std::string>, std::map<std::size_t, std::map<double, std::map<std::pair<int, int>, double>>>>
      data;
  std::string source;
};

inline ExternalEstimates read_external_csv(std::istream& is, const std::string& source = "<external>") {
  ExternalEstimates out;
  out.source = source;
  std::string line;
  std::size_t row = 0;
  if (!std::getline(is, line)) throw InputError(source, 1, "empty file; expected a header row");
  ++row;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "scenario,estimator,path,time_s,j,jp,value")
    throw InputError(source, row, "header must be scenario,estimator,path,time_s,j,jp,value");
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = pdfcov::detail::split_csv_line(line);
    if (f.size() != 7) throw InputError(source, row, "expected 7 fields");
    if (f[0].empty() || f[1].empty()) throw InputError(source, row, "empty scenario or estimator name");
    const long path = pdfcov::detail::parse_int(f[2], source, row, "path");
    const double t = pdfcov::detail::parse_double(f[3], source, row, "time_s");
    const long j = pdfcov::detail::parse_int(f[4], source, row, "j");
    const long jp = pdfcov::detail::parse_int(f[5], source, row, "jp");
    const double v = pdfcov::detail::parse_double(f[6], source, row, "value");
    if (path < 0 || j < 0 || jp < 0) throw InputError(source, row, "negative index");
    auto& entries = out.data[{f[0], f[1]}][static_cast<std::size_t>(path)][t];
    if (!entries.emplace(std::pair<int, int>(static_cast<int>(j), static_cast<int>(jp)), v).second)
      throw InputError(source, row, "duplicate entry");
  }
  return out;
}

/// Scores one external estimator on a scenario. Truth is regenerated from
/// the scenario seeds, so the file must cover paths 0..n_paths-1 and every
/// (j, jp) with j <= jp; missing lower-triangle entries are mirrored.
inline ComparisonRow score_external(const ScenarioConfig& cfg, const ExternalEstimates& ext, const std::string& scenario_key,
                                    const std::string& estimator, unsigned workers = 0) {
  const auto it = ext.data.find({scenario_key, estimator});
  if (it == ext.data.end())
    throw InputError(ext.source, 0, "no rows for scenario '" + scenario_key + "' and estimator '" + estimator + "'");
  const auto& paths = it->second;
  const int d = cfg.d;
  std::vector<SpotCovEstimate> est(cfg.n_paths);
  std::vector<MatrixPath> truth(cfg.n_paths);
  for (std::size_t k = 0; k < cfg.n_paths; ++k) {
    const auto p = paths.find(k);
    if (p == paths.end()) throw InputError(ext.source, 0, "missing path " + std::to_string(k));
    SpotCovEstimate& e = est[k];
    e.tag = EstimatorTag::kExternal;
    for (const auto& [t, entries] : p->second) {
      Eigen::MatrixXd V = Eigen::MatrixXd::Constant(d, d, std::numeric_limits<double>::quiet_NaN());
      for (const auto& [jj, v] : entries) {
        if (jj.first >= d || jj.second >= d) throw InputError(ext.source, 0, "asset index out of range");
        V(jj.first, jj.second) = v;
      }
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          if (std::isnan(V(a, b))) V(a, b) = V(b, a);
      if (V.hasNaN())
        throw InputError(ext.source, 0, "path " + std::to_string(k) + " time " + std::to_string(t) + " misses entries");
      e.eval_times.push_back(t);
      e.diagnostics.push_back(diagnose(V));
      e.matrices.push_back(std::move(V));
    }
  }
  parallel_for(
      cfg.n_paths,
      [&](std::size_t k) {
        const PanelBundle b = simulate(cfg.model, cfg.corr, cfg.grid, cfg.d, path_seeds(cfg, k).price, cfg.sim);
        for (double t : est[k].eval_times) truth[k].push_back(true_spot_cov(b, t));
      },
      workers);
  ComparisonRow r;
  r.scenario_hash = scenario_hash(cfg);
  r.label = scenario_label(cfg);
  r.estimator = estimator;
  r.report = mise(est, truth);
  return r;
}

/// Runs the built-in estimators over a set of scenarios.
inline std::vector<ComparisonRow> run_comparison(const std::vector<ScenarioConfig>& scenarios,
                                                 const std::vector<EstimatorSpec>& estimators, unsigned workers = 0) {
  std::vector<ComparisonRow> rows;
  for (const auto& cfg : scenarios) {
    const BatchResult b = run_batch(cfg, estimators, workers);
    for (std::size_t e = 0; e < estimators.size(); ++e) rows.push_back(row_from_record(make_record(cfg, estimators[e], b, e)));
  }
  return rows;
}

inline void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  os << "scenario_hash,label,estimator,mise,mise_se,rmise,psd_rate,psd_path_rate,n_paths,mean_n,mean_N\n";
  os.precision(10);
  for (const auto& r : rows)
    os << r.scenario_hash << ",\"" << r.label << "\",\"" << r.estimator << "\"," << r.report.mise << ','
       << r.report.mise_se << ',' << r.report.rmise << ',' << r.report.psd_rate << ',' << r.report.psd_path_rate << ','
       << r.report.n_paths << ',' << r.mean_n << ',' << r.mean_N << '\n';
}

/// Writes the observed ticks of every path, for estimators run outside this
/// library. Rows: path,asset,time_s,log_price.
inline void write_scenario_ticks_csv(std::ostream& os, const ScenarioConfig& cfg) {
  os << "path,asset,time_s,log_price\n";
  os.precision(17);
  for (std::size_t k = 0; k < cfg.n_paths; ++k) {
    const PathData pd = simulate_path(cfg, k);
    for (const auto& ts : pd.ticks)
      for (std::size_t i = 0; i < ts.size(); ++i) os << k << ',' << ts.asset_id << ',' << ts.times[i] << ',' << ts.log_prices[i] << '\n';
  }
}

}  // namespace pdfcov::harness
