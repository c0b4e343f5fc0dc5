/**
 * @file codec.hpp
 * @brief JSON encoding of model, noise, sampling and grid specifications.
 *
 * Tagged unions are objects with a "type" member plus the alternative's
 * fields. Missing fields take their defaults; unknown fields are rejected so
 * that typos in configuration files fail loudly.
 */
#pragma once

#include <initializer_list>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "pdfcov/errors.hpp"
#include "pdfcov/microstructure.hpp"
#include "pdfcov/path_sim.hpp"
#include "pdfcov/sampling.hpp"

namespace pdfcov::harness {

using json = nlohmann::json;

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) throw ConfigurationError(what + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.contains(k)) throw ConfigurationError(what + ": unknown field '" + k + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T v{};
  read(j, key, v);
  out = v;
}

inline std::string type_of(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ConfigurationError(what + ": missing string field 'type'");
  return j.at("type").get<std::string>();
}

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace detail

// ---- models ----

inline json encode(const ModelParams& m) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        json j;
        if constexpr (std::is_same_v<T, HestonParams>) {
          j = {{"type", "heston"}, {"mu", p.mu}, {"gamma", p.gamma}, {"theta", p.theta}, {"nu", p.nu}, {"lambda", p.lambda}};
          detail::put(j, "v0", p.v0);
        } else if constexpr (std::is_same_v<T, Sv1fParams>) {
          j = {{"type", "sv1f"},       {"mu", p.mu},       {"beta0", p.beta0},
               {"beta1", p.beta1},     {"alpha", p.alpha}, {"lambda", p.lambda}};
        } else if constexpr (std::is_same_v<T, Sv2fParams>) {
          j = {{"type", "sv2f"},         {"mu", p.mu},         {"beta0", p.beta0},   {"beta1", p.beta1},
               {"beta2", p.beta2},       {"beta_v", p.beta_v}, {"alpha1", p.alpha1}, {"alpha2", p.alpha2},
               {"lambda", p.lambda},     {"x0", p.x0}};
        } else {
          j = {{"type", "rough_heston"}, {"theta", p.theta}, {"gamma", p.gamma}, {"nu", p.nu},
               {"lambda", p.lambda},     {"H", p.H},         {"mu", p.mu}};
          detail::put(j, "sigma0_sq", p.sigma0_sq);
          detail::put(j, "C", p.C);
        }
        return j;
      },
      m);
}

inline ModelParams decode_model(const json& j) {
  const std::string t = detail::type_of(j, "model");
  if (t == "heston") {
    detail::check_keys(j, {"type", "mu", "gamma", "theta", "nu", "lambda", "v0"}, "heston");
    HestonParams p;
    detail::read(j, "mu", p.mu);
    detail::read(j, "gamma", p.gamma);
    detail::read(j, "theta", p.theta);
    detail::read(j, "nu", p.nu);
    detail::read(j, "lambda", p.lambda);
    detail::read(j, "v0", p.v0);
    return p;
  }
  if (t == "sv1f") {
    detail::check_keys(j, {"type", "mu", "beta0", "beta1", "alpha", "lambda"}, "sv1f");
    Sv1fParams p;
    detail::read(j, "mu", p.mu);
    detail::read(j, "beta0", p.beta0);
    detail::read(j, "beta1", p.beta1);
    detail::read(j, "alpha", p.alpha);
    detail::read(j, "lambda", p.lambda);
    return p;
  }
  if (t == "sv2f") {
    detail::check_keys(j, {"type", "mu", "beta0", "beta1", "beta2", "beta_v", "alpha1", "alpha2", "lambda", "x0"},
                       "sv2f");
    Sv2fParams p;
    detail::read(j, "mu", p.mu);
    detail::read(j, "beta0", p.beta0);
    detail::read(j, "beta1", p.beta1);
    detail::read(j, "beta2", p.beta2);
    detail::read(j, "beta_v", p.beta_v);
    detail::read(j, "alpha1", p.alpha1);
    detail::read(j, "alpha2", p.alpha2);
    detail::read(j, "lambda", p.lambda);
    detail::read(j, "x0", p.x0);
    return p;
  }
  if (t == "rough_heston") {
    detail::check_keys(j, {"type", "theta", "gamma", "nu", "lambda", "H", "mu", "sigma0_sq", "C"}, "rough_heston");
    RoughHestonParams p;
    detail::read(j, "theta", p.theta);
    detail::read(j, "gamma", p.gamma);
    detail::read(j, "nu", p.nu);
    detail::read(j, "lambda", p.lambda);
    detail::read(j, "H", p.H);
    detail::read(j, "mu", p.mu);
    detail::read(j, "sigma0_sq", p.sigma0_sq);
    detail::read(j, "C", p.C);
    return p;
  }
  throw ConfigurationError("unknown model type '" + t + "'");
}

inline ModelParams default_model(const std::string& name) { return decode_model(json{{"type", name}}); }

// ---- noise ----

inline json encode(const NoiseSpec& n) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NoNoise>) return {{"type", "none"}};
        else if constexpr (std::is_same_v<T, RoundingNoise>) return {{"type", "rounding"}, {"r", s.r}};
        else if constexpr (std::is_same_v<T, IidNoise>) return {{"type", "iid"}, {"ratio", s.ratio}};
        else if constexpr (std::is_same_v<T, OuNoise>)
          return {{"type", "ou"}, {"theta", s.theta}, {"ratio", s.target_ratio}};
        else if constexpr (std::is_same_v<T, CorrelatedOuNoise>)
          return {{"type", "corr_ou"}, {"theta", s.theta}, {"rho", s.rho}, {"ratio", s.target_ratio}};
        else return {{"type", "hetero"}, {"sigma_bar", s.sigma_bar}, {"theta", s.theta}, {"rho", s.rho}};
      },
      n);
}

inline NoiseSpec decode_noise(const json& j) {
  const std::string t = detail::type_of(j, "noise");
  if (t == "none") {
    detail::check_keys(j, {"type"}, "none");
    return NoNoise{};
  }
  if (t == "rounding") {
    detail::check_keys(j, {"type", "r"}, "rounding");
    RoundingNoise s;
    detail::read(j, "r", s.r);
    return s;
  }
  if (t == "iid") {
    detail::check_keys(j, {"type", "ratio"}, "iid");
    IidNoise s;
    detail::read(j, "ratio", s.ratio);
    return s;
  }
  if (t == "ou") {
    detail::check_keys(j, {"type", "theta", "ratio"}, "ou");
    OuNoise s;
    detail::read(j, "theta", s.theta);
    detail::read(j, "ratio", s.target_ratio);
    return s;
  }
  if (t == "corr_ou") {
    detail::check_keys(j, {"type", "theta", "rho", "ratio"}, "corr_ou");
    CorrelatedOuNoise s;
    detail::read(j, "theta", s.theta);
    detail::read(j, "rho", s.rho);
    detail::read(j, "ratio", s.target_ratio);
    return s;
  }
  if (t == "hetero") {
    detail::check_keys(j, {"type", "sigma_bar", "theta", "rho"}, "hetero");
    HeteroskedasticNoise s;
    detail::read(j, "sigma_bar", s.sigma_bar);
    detail::read(j, "theta", s.theta);
    detail::read(j, "rho", s.rho);
    return s;
  }
  throw ConfigurationError("unknown noise type '" + t + "'");
}

// ---- sampling ----

inline json encode(const SamplingSpec& s) {
  if (const auto* p = std::get_if<PoissonSampling>(&s)) return {{"type", "poisson"}, {"mean_gap", p->mean_gap}};
  if (const auto* r = std::get_if<RegularSampling>(&s)) return {{"type", "regular"}, {"gap", r->gap}};
  const auto& sh = std::get<ShiftedRegularSampling>(s);
  return {{"type", "shifted"}, {"n", sh.n}, {"shift", sh.shift_fraction}};
}

inline SamplingSpec decode_sampling(const json& j) {
  const std::string t = detail::type_of(j, "sampling");
  if (t == "poisson") {
    detail::check_keys(j, {"type", "mean_gap"}, "poisson");
    PoissonSampling s;
    detail::read(j, "mean_gap", s.mean_gap);
    return s;
  }
  if (t == "regular") {
    detail::check_keys(j, {"type", "gap"}, "regular");
    RegularSampling s;
    detail::read(j, "gap", s.gap);
    return s;
  }
  if (t == "shifted") {
    detail::check_keys(j, {"type", "n", "shift"}, "shifted");
    ShiftedRegularSampling s;
    detail::read(j, "n", s.n);
    detail::read(j, "shift", s.shift_fraction);
    return s;
  }
  throw ConfigurationError("unknown sampling type '" + t + "'");
}

// ---- grid and correlation ----

inline json encode(const DenseGrid& g) { return {{"t0", g.t0}, {"step", g.step}, {"n_steps", g.n_steps}}; }

inline DenseGrid decode_grid(const json& j) {
  detail::check_keys(j, {"t0", "step", "n_steps"}, "grid");
  DenseGrid g;
  detail::read(j, "t0", g.t0);
  detail::read(j, "step", g.step);
  detail::read(j, "n_steps", g.n_steps);
  g.validate();
  return g;
}

inline json encode(const CorrelationSpec& c) {
  json j = {{"cross_asset_rho", c.cross_asset_rho}};
  detail::put(j, "leverage_lambda", c.leverage_lambda);
  if (c.full_matrix) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < c.full_matrix->rows(); ++r) {
      std::vector<double> row;
      for (Eigen::Index k = 0; k < c.full_matrix->cols(); ++k) row.push_back((*c.full_matrix)(r, k));
      rows.push_back(row);
    }
    j["full_matrix"] = rows;
  }
  return j;
}

inline CorrelationSpec decode_correlation(const json& j) {
  detail::check_keys(j, {"cross_asset_rho", "leverage_lambda", "full_matrix"}, "correlation");
  CorrelationSpec c;
  detail::read(j, "cross_asset_rho", c.cross_asset_rho);
  detail::read(j, "leverage_lambda", c.leverage_lambda);
  if (j.contains("full_matrix")) {
    std::vector<std::vector<double>> rows;
    detail::read(j, "full_matrix", rows);
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != n)
        throw ConfigurationError("correlation: full_matrix must be square");
      for (Eigen::Index k = 0; k < n; ++k) m(r, k) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
    }
    c.full_matrix = m;
  }
  return c;
}

}  // namespace pdfcov::harness
