/**
 * @file runner.hpp
 * @brief Config-file driven runs that fill a ResultStore.
 *
 * Config schema (JSON):
 *   store         directory of the result store (required)
 *   defaults      scenario fields shared by every scenario (optional)
 *   scenarios     list of scenario objects, each overriding the defaults
 *   scenario_grid  {"d": [..]}: appends the 64-scenario enumeration per d
 *   estimators    list of {"type": "pdf"|"classical", "alpha", "beta", "N", "M", "M_int"};
 *                 defaults to a single rule-based PDF estimator
 * Scenario fields: model, correlation, noise, sampling, d, n_paths,
 * master_seed, eval_grid_minutes, grid, sim (see codec.hpp for the objects).
 */
#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "pdfcov/harness/experiments.hpp"

namespace pdfcov::harness {

struct RunConfig {
  std::filesystem::path store;
  std::vector<ScenarioConfig> scenarios;
  std::vector<EstimatorSpec> estimators{EstimatorSpec::pdf()};
};

inline EstimatorSpec decode_estimator(const json& j) {
  const std::string t = detail::type_of(j, "estimator");
  detail::check_keys(j, {"type", "alpha", "beta", "N", "M", "M_int"}, "estimator");
  EstimatorSpec e;
  if (t == "pdf") e.kind = EstimatorKind::kPdf;
  else if (t == "classical") e.kind = EstimatorKind::kClassical;
  else throw ConfigurationError("unknown estimator type '" + t + "'");
  detail::read(j, "alpha", e.freq.alpha);
  detail::read(j, "beta", e.freq.beta);
  detail::read(j, "N", e.freq.N);
  detail::read(j, "M", e.freq.M);
  detail::read(j, "M_int", e.M_int);
  if (e.kind == EstimatorKind::kPdf && e.M_int) throw ConfigurationError("M_int applies to the classical estimator only");
  return e;
}

inline RunConfig decode_run_config(const json& j, const std::filesystem::path& base_dir = {}) {
  detail::check_keys(j, {"store", "defaults", "scenarios", "scenario_grid", "estimators"}, "run config");
  if (!j.contains("store") || !j.at("store").is_string()) throw ConfigurationError("run config: 'store' path required");
  RunConfig rc;
  rc.store = j.at("store").get<std::string>();
  if (rc.store.is_relative() && !base_dir.empty()) rc.store = base_dir / rc.store;
  ScenarioConfig defaults;
  if (j.contains("defaults")) defaults = decode_scenario(j.at("defaults"));
  if (j.contains("scenarios")) {
    if (!j.at("scenarios").is_array()) throw ConfigurationError("run config: 'scenarios' must be a list");
    for (const auto& s : j.at("scenarios")) rc.scenarios.push_back(decode_scenario(s, defaults));
  }
  if (j.contains("scenario_grid")) {
    const auto& p = j.at("scenario_grid");
    detail::check_keys(p, {"d"}, "scenario_grid");
    std::vector<int> ds{defaults.d};
    detail::read(p, "d", ds);
    for (int d : ds) {
      ScenarioConfig base = defaults;
      base.d = d;
      base.validate();
      for (auto& c : enumerate_standard_scenarios(base)) rc.scenarios.push_back(std::move(c));
    }
  }
  if (j.contains("estimators")) {
    rc.estimators.clear();
    for (const auto& e : j.at("estimators")) rc.estimators.push_back(decode_estimator(e));
    if (rc.estimators.empty()) throw ConfigurationError("run config: 'estimators' must not be empty");
  }
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError(path.string(), 0, "cannot open config file");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw InputError(path.string(), 0, std::string("invalid JSON: ") + e.what());
  }
  try {
    return decode_run_config(j, path.parent_path());
  } catch (const ConfigurationError& e) {
    throw InputError(path.string(), 0, e.what());
  }
}

struct RunSummary {
  std::size_t computed = 0;
  std::size_t skipped = 0;
};

using ProgressFn = std::function<void(const Record&)>;

/// One record per (scenario, estimator). Scenarios whose records all exist
/// are skipped unless `force`.
inline RunSummary run_scenarios(const RunConfig& rc, bool force = false, unsigned workers = 0,
                                const ProgressFn& progress = {}) {
  ResultStore store(rc.store);
  RunSummary s;
  for (const auto& cfg : rc.scenarios) {
    const std::string h = scenario_hash(cfg);
    std::vector<EstimatorSpec> todo;
    for (const auto& e : rc.estimators)
      if (force || !store.contains(record_key(h, e.label()))) todo.push_back(e);
    s.skipped += rc.estimators.size() - todo.size();
    if (todo.empty()) continue;
    const BatchResult b = run_batch(cfg, todo, workers);
    for (std::size_t e = 0; e < todo.size(); ++e) {
      const Record r = make_record(cfg, todo[e], b, e);
      store.put(r, force);
      ++s.computed;
      if (progress) progress(r);
    }
  }
  return s;
}

}  // namespace pdfcov::harness
