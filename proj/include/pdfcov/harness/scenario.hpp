/**
 * @file scenario.hpp
 * @brief Scenario configuration, canonical hashing, the 64-scenario
 *        enumeration and per-path seed derivation.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "pdfcov/fourier_estimator.hpp"
#include "pdfcov/harness/codec.hpp"
#include "pdfcov/rng.hpp"

namespace pdfcov::harness {

/// How N and M are chosen for a path with n observations. Unset exponents
/// fall back to the noise-dependent defaults; pinned values override the rule.
struct FreqRule {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<int> N;
  std::optional<double> M;

  FreqParams resolve(std::size_t n, bool noise_free) const {
    const double a = alpha ? *alpha : (noise_free ? kAlphaNoNoise : kAlphaNoise);
    const double b = beta ? *beta : kBetaDefault;
    FreqParams f = select_freq(n, a, b);
    if (N) {
      if (*N < 0) throw ArgumentError("pinned N must be non-negative");
      f.N = *N;
      f.M = std::pow(static_cast<double>(std::max(*N, 1)), b);
    }
    if (M) {
      if (!(*M > 0.0)) throw ArgumentError("pinned M must be positive");
      f.M = *M;
    }
    return f;
  }

  std::string label() const {
    auto fmt = [](double x) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", x);
      return std::string(buf);
    };
    std::string s = "a=" + (alpha ? fmt(*alpha) : std::string("auto")) + ",b=" + (beta ? fmt(*beta) : std::string("auto"));
    if (N) s += ",N=" + std::to_string(*N);
    if (M) s += ",M=" + fmt(*M);
    return s;
  }
};

enum class EstimatorKind { kPdf, kClassical };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::kPdf;
  FreqRule freq;
  std::optional<int> M_int;  ///< classical Fejer order; default floor(sqrt(N))

  std::string label() const {
    std::string s = kind == EstimatorKind::kPdf ? "pdf" : "classical";
    s += "[" + freq.label();
    if (kind == EstimatorKind::kClassical && M_int) s += ",Mint=" + std::to_string(*M_int);
    return s + "]";
  }

  static EstimatorSpec pdf(std::optional<double> alpha = std::nullopt, std::optional<double> beta = std::nullopt) {
    EstimatorSpec e;
    e.freq.alpha = alpha;
    e.freq.beta = beta;
    return e;
  }
  static EstimatorSpec classical() {
    EstimatorSpec e;
    e.kind = EstimatorKind::kClassical;
    return e;
  }
};

inline int default_fejer_order(int N) { return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(N))))); }

struct ScenarioConfig {
  ModelParams model = HestonParams{};
  CorrelationSpec corr;
  NoiseSpec noise = NoNoise{};
  SamplingSpec sampling = PoissonSampling{10.0};
  int d = 2;
  std::size_t n_paths = 100;
  std::uint64_t master_seed = 42;
  double eval_grid_minutes = 20.0;
  DenseGrid grid = DenseGrid::trading_day();
  SimOptions sim;

  void validate() const {
    if (d < 1) throw ArgumentError("d must be at least 1");
    if (n_paths < 1) throw ArgumentError("n_paths must be at least 1");
    if (!(eval_grid_minutes > 0.0)) throw ArgumentError("evaluation grid spacing must be positive");
    grid.validate();
  }
};

inline json encode(const SimOptions& s) { return {{"day_seconds", s.day_seconds}, {"initial_price", s.initial_price}}; }

/// Canonical JSON form: keys sorted, every field explicit.
inline json encode(const ScenarioConfig& c) {
  return {{"model", encode(c.model)},
          {"correlation", encode(c.corr)},
          {"noise", encode(c.noise)},
          {"sampling", encode(c.sampling)},
          {"d", c.d},
          {"n_paths", c.n_paths},
          {"master_seed", c.master_seed},
          {"eval_grid_minutes", c.eval_grid_minutes},
          {"grid", encode(c.grid)},
          {"sim", encode(c.sim)}};
}

/// Decodes a scenario object; absent fields keep the values in `base`.
inline ScenarioConfig decode_scenario(const json& j, ScenarioConfig base = {}) {
  detail::check_keys(j,
                     {"model", "correlation", "noise", "sampling", "d", "n_paths", "master_seed", "eval_grid_minutes",
                      "grid", "sim"},
                     "scenario");
  ScenarioConfig c = std::move(base);
  if (j.contains("model")) c.model = decode_model(j.at("model"));
  if (j.contains("correlation")) c.corr = decode_correlation(j.at("correlation"));
  if (j.contains("noise")) c.noise = decode_noise(j.at("noise"));
  if (j.contains("sampling")) c.sampling = decode_sampling(j.at("sampling"));
  detail::read(j, "d", c.d);
  detail::read(j, "n_paths", c.n_paths);
  detail::read(j, "master_seed", c.master_seed);
  detail::read(j, "eval_grid_minutes", c.eval_grid_minutes);
  if (j.contains("grid")) c.grid = decode_grid(j.at("grid"));
  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    detail::check_keys(s, {"day_seconds", "initial_price"}, "sim");
    detail::read(s, "day_seconds", c.sim.day_seconds);
    detail::read(s, "initial_price", c.sim.initial_price);
  }
  c.validate();
  return c;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string scenario_hash(const ScenarioConfig& c) { return hex64(fnv1a64(encode(c).dump())); }

inline std::string scenario_label(const ScenarioConfig& c) {
  return model_name(c.model) + "/" + noise_name(c.noise) + "/" + sampling_name(c.sampling) + "/d=" + std::to_string(c.d);
}

/// Interior evaluation grid: multiples of the spacing, keeping one spacing
/// of margin at each end of the day.
inline std::vector<double> eval_times(const DenseGrid& g, double spacing_seconds) {
  if (!(spacing_seconds > 0.0)) throw ArgumentError("evaluation spacing must be positive");
  std::vector<double> t;
  const double hi = g.t_end() - spacing_seconds;
  for (std::size_t k = 1;; ++k) {
    const double x = g.t0 + spacing_seconds * static_cast<double>(k);
    if (x > hi + 1e-9 * spacing_seconds) break;
    t.push_back(x);
  }
  if (t.empty()) throw ArgumentError("evaluation grid is empty; spacing too wide for the window");
  return t;
}

inline std::vector<double> eval_times(const ScenarioConfig& c) { return eval_times(c.grid, c.eval_grid_minutes * 60.0); }

/// Seeds for one path. The price seed depends only on the parts that shape
/// the efficient price, so scenarios differing only in noise or sampling
/// share price paths; noise and sampling seeds are likewise shared across
/// sampling and noise variations respectively.
struct PathSeeds {
  std::uint64_t price = 0;
  std::uint64_t noise = 0;
  std::uint64_t sampling = 0;
};

inline std::uint64_t price_key(const ScenarioConfig& c) {
  const json k = {{"model", encode(c.model)},
                  {"correlation", encode(c.corr)},
                  {"grid", encode(c.grid)},
                  {"sim", encode(c.sim)},
                  {"d", c.d}};
  return fnv1a64(k.dump());
}

inline PathSeeds path_seeds(const ScenarioConfig& c, std::size_t path) {
  const std::uint64_t pk = price_key(c);
  const auto p = static_cast<std::uint64_t>(path);
  PathSeeds s;
  s.price = derive_seed({c.master_seed, pk, p, static_cast<std::uint64_t>(Stream::kPrice)});
  s.noise = derive_seed({c.master_seed, pk, fnv1a64(encode(c.noise).dump()), p, static_cast<std::uint64_t>(Stream::kNoise)});
  s.sampling =
      derive_seed({c.master_seed, pk, fnv1a64(encode(c.sampling).dump()), p, static_cast<std::uint64_t>(Stream::kSampling)});
  return s;
}

// ---- the 64-scenario enumeration ----

inline std::vector<ModelParams> standard_models() { return {HestonParams{}, Sv1fParams{}, Sv2fParams{}, RoughHestonParams{}}; }

/// none, rounding {0.01, 0.05}, iid {1, 1.5, 2, 2.5}, OU theta {0.2, 0.3, 0.4},
/// correlated rho {-0.1, -0.3, -0.5}, heteroskedastic sigma_bar {3, 3.5, 4}.
inline std::vector<NoiseSpec> standard_noise_specs() {
  std::vector<NoiseSpec> v{NoNoise{}};
  for (double r : {0.01, 0.05}) v.emplace_back(RoundingNoise{r});
  for (double q : {1.0, 1.5, 2.0, 2.5}) v.emplace_back(IidNoise{q});
  for (double th : {0.2, 0.3, 0.4}) v.emplace_back(OuNoise{th, 2.0});
  for (double rho : {-0.1, -0.3, -0.5}) v.emplace_back(CorrelatedOuNoise{0.3, rho, 2.0});
  for (double sb : {3.0, 3.5, 4.0}) v.emplace_back(HeteroskedasticNoise{sb, 0.3, -0.3});
  return v;
}

inline std::vector<ScenarioConfig> enumerate_standard_scenarios(const ScenarioConfig& base) {
  std::vector<ScenarioConfig> out;
  for (const auto& m : standard_models())
    for (const auto& n : standard_noise_specs()) {
      ScenarioConfig c = base;
      c.model = m;
      c.noise = n;
      out.push_back(std::move(c));
    }
  return out;
}

}  // namespace pdfcov::harness
