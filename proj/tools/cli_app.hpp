// Command-line front end. Kept in a header so the tests can drive it
// in-process. Exit codes: 0 ok, 1 input or usage error, 2 internal error.
#pragma once

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pdfcov/harness/runner.hpp"

namespace pdfcov::cli {

using namespace pdfcov::harness;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitInternal = 2;

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

inline double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigurationError("cannot parse " + what + " value '" + s + "'");
}

/// "none", "rounding:R", "iid:RATIO", "ou:THETA[:RATIO]", "corr_ou:RHO[:THETA[:RATIO]]",
/// "hetero:SIGMA_BAR[:THETA[:RHO]]", or a JSON object.
inline NoiseSpec parse_noise(const std::string& s) {
  if (!s.empty() && s.front() == '{') return decode_noise(json::parse(s));
  const auto p = split(s, ':');
  const std::string& t = p.empty() ? s : p[0];
  auto arg = [&](std::size_t i, double dflt) { return p.size() > i ? to_double(p[i], t) : dflt; };
  if (t == "none") return NoNoise{};
  if (t == "rounding") return RoundingNoise{arg(1, 0.01)};
  if (t == "iid") return IidNoise{arg(1, 1.0)};
  if (t == "ou") return OuNoise{arg(1, 0.3), arg(2, 2.0)};
  if (t == "corr_ou") return CorrelatedOuNoise{arg(2, 0.3), arg(1, -0.3), arg(3, 2.0)};
  if (t == "hetero") return HeteroskedasticNoise{arg(1, 3.0), arg(2, 0.3), arg(3, -0.3)};
  throw ConfigurationError("unknown noise spec '" + s + "'");
}

/// "poisson:GAP", "regular:GAP", "shifted:N[:SHIFT]", or a JSON object.
inline SamplingSpec parse_sampling(const std::string& s) {
  if (!s.empty() && s.front() == '{') return decode_sampling(json::parse(s));
  const auto p = split(s, ':');
  const std::string& t = p.empty() ? s : p[0];
  auto arg = [&](std::size_t i, double dflt) { return p.size() > i ? to_double(p[i], t) : dflt; };
  if (t == "poisson") return PoissonSampling{arg(1, 10.0)};
  if (t == "regular") return RegularSampling{arg(1, 10.0)};
  if (t == "shifted") return ShiftedRegularSampling{static_cast<std::size_t>(arg(1, 500.0)), arg(2, 0.5)};
  throw ConfigurationError("unknown sampling spec '" + s + "'");
}

inline std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> v;
  for (const auto& x : split(s, ',')) v.push_back(to_double(x, what));
  if (v.empty()) throw ConfigurationError("empty " + what + " list");
  return v;
}

/// Parses "a/b" fractions as well as decimals.
inline double parse_fraction(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return to_double(s, "exponent");
  return to_double(s.substr(0, slash), "exponent") / to_double(s.substr(slash + 1), "exponent");
}

inline std::vector<double> parse_fractions(const std::string& s) {
  std::vector<double> v;
  for (const auto& x : split(s, ',')) v.push_back(parse_fraction(x));
  if (v.empty()) throw ConfigurationError("empty exponent list");
  return v;
}

struct ScenarioFlags {
  std::string scenario_file;
  std::string model = "heston";
  std::string noise = "none";
  std::string sampling = "poisson:10";
  int d = 2;
  std::size_t paths = 100;
  std::uint64_t seed = 42;
  std::optional<double> rho;
  double eval_minutes = 20.0;

  void add_to(CLI::App* app, bool with_paths = true) {
    app->add_option("--scenario", scenario_file, "JSON scenario file; flags given explicitly override it");
    app->add_option("--model", model, "heston | sv1f | sv2f | rough_heston");
    app->add_option("--noise", noise, "none | rounding:R | iid:RATIO | ou:THETA | corr_ou:RHO | hetero:SIGMA_BAR");
    app->add_option("--sampling", sampling, "poisson:GAP | regular:GAP | shifted:N[:SHIFT]");
    app->add_option("--d", d, "number of assets")->check(CLI::PositiveNumber);
    if (with_paths) app->add_option("--paths", paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "master seed");
    app->add_option("--rho", rho, "cross-asset price correlation");
    app->add_option("--eval-grid-minutes", eval_minutes, "evaluation grid spacing in minutes");
  }

  ScenarioConfig build(const CLI::App* app) const {
    ScenarioConfig c;
    if (!scenario_file.empty()) {
      std::ifstream is(scenario_file);
      if (!is) throw InputError(scenario_file, 0, "cannot open scenario file");
      try {
        c = decode_scenario(json::parse(is));
      } catch (const json::parse_error& e) {
        throw InputError(scenario_file, 0, e.what());
      }
    }
    auto given = [&](const char* name) { return scenario_file.empty() || app->count(name) > 0; };
    if (given("--model")) c.model = default_model(model);
    if (given("--noise")) c.noise = parse_noise(noise);
    if (given("--sampling")) c.sampling = parse_sampling(sampling);
    if (given("--d")) c.d = d;
    if (given("--paths")) c.n_paths = paths;
    if (given("--seed")) c.master_seed = seed;
    if (rho) c.corr.cross_asset_rho = *rho;
    if (given("--eval-grid-minutes")) c.eval_grid_minutes = eval_minutes;
    c.validate();
    return c;
  }
};

/// Opens `path` for writing, or returns the fallback stream for "-" / empty.
class OutFile {
 public:
  OutFile(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InputError(path, 0, "cannot open output file");
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spot covariance estimation from asynchronous prices, with a Monte Carlo harness"};
  app.require_subcommand(1);
  unsigned workers = 0;
  app.add_option("--workers", workers, "worker threads (default: PDFCOV_WORKERS or all cores)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate one path and write its observed ticks");
  detail::ScenarioFlags sim_flags;
  sim_flags.add_to(sim);
  std::size_t sim_path = 0;
  std::string sim_out, sim_truth, sim_all;
  std::size_t sim_all_paths = 0;
  sim->add_option("--path", sim_path, "path index within the scenario");
  sim->add_option("--out", sim_out, "tick CSV (asset,time_s,log_price); '-' for stdout");
  sim->add_option("--truth-out", sim_truth, "dense efficient prices and spot variances");
  sim->add_option("--all-paths-out", sim_all, "ticks of paths 0..N-1 (path,asset,time_s,log_price)");
  sim->add_option("--all-paths", sim_all_paths, "number of paths for --all-paths-out");

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate spot covariances from a tick CSV");
  std::string est_in, est_out = "-", est_noise = "auto", est_kind = "pdf", est_times;
  std::optional<int> est_N, est_Mint;
  std::optional<double> est_M, est_alpha, est_beta;
  double est_minutes = 20.0, est_scale = 1.0;
  est->add_option("--input", est_in, "tick CSV with header asset,time_s,log_price")->required();
  est->add_option("--out", est_out, "output CSV (time_s,j,jp,value,min_eig_at_t); '-' for stdout");
  est->add_option("--N", est_N, "cutting frequency (default: rule)");
  est->add_option("--M", est_M, "Gaussian localization (default: N^beta)");
  est->add_option("--alpha", est_alpha, "rule exponent for N = n^alpha / 2");
  est->add_option("--beta", est_beta, "rule exponent for M = N^beta");
  est->add_option("--noise", est_noise, "auto | yes | no; selects the default alpha")
      ->check(CLI::IsMember({"auto", "yes", "no"}));
  est->add_option("--estimator", est_kind, "pdf | classical")->check(CLI::IsMember({"pdf", "classical"}));
  est->add_option("--M-int", est_Mint, "Fejer order for the classical estimator (default floor(sqrt N))");
  est->add_option("--eval-grid-minutes", est_minutes, "evaluation spacing (input times in seconds)");
  est->add_option("--times", est_times, "comma-separated evaluation times, overriding the grid");
  est->add_option("--scale", est_scale, "multiply estimates by this factor (e.g. 23400 for per-day units)");

  // grid-search
  auto* gs = app.add_subcommand("grid-search", "MISE over the (alpha, beta) grid for d = 2");
  detail::ScenarioFlags gs_flags;
  gs_flags.add_to(gs);
  std::string gs_alphas = "1,5/6,3/4,2/3,1/2,1/3", gs_betas = "5/6,3/4,2/3,1/2,4/9", gs_out, gs_table = "-";
  gs->add_option("--alphas", gs_alphas, "comma-separated alpha values (fractions allowed)");
  gs->add_option("--betas", gs_betas, "comma-separated beta values (fractions allowed)");
  gs->add_option("--out", gs_out, "long-form CSV of every cell");
  gs->add_option("--table", gs_table, "covariance MISE table, alpha rows by beta columns");

  // sensitivity
  auto* sens = app.add_subcommand("sensitivity", "bias and MSE against N, synchronous vs shifted grids");
  std::string sens_rho = "0.2,0.3,-0.3,0.5,-0.5,0.7,-0.7,1,-1", sens_out = "-", sens_Ns;
  std::size_t sens_n = 500, sens_paths = 1000;
  std::uint64_t sens_seed = 42;
  sens->add_option("--rho", sens_rho, "comma-separated correlations");
  sens->add_option("--n", sens_n, "observations per asset");
  sens->add_option("--paths", sens_paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
  sens->add_option("--seed", sens_seed, "master seed");
  sens->add_option("--Ns", sens_Ns, "comma-separated N values (default 0..n)");
  sens->add_option("--out", sens_out, "curve CSV; '-' for stdout");

  // compare
  auto* cmp = app.add_subcommand("compare", "MISE and PSD rates per estimator and scenario");
  detail::ScenarioFlags cmp_flags;
  cmp_flags.add_to(cmp);
  std::string cmp_sweep = "none", cmp_ds = "2,5,10,15,20,25,30,40", cmp_gaps = "10,15,30,40", cmp_est = "pdf",
              cmp_ext, cmp_out = "-", cmp_store;
  std::vector<std::string> cmp_ext_names;
  std::optional<int> cmp_pin_N;
  cmp->add_option("--sweep", cmp_sweep, "none | dimension | gap")->check(CLI::IsMember({"none", "dimension", "gap"}));
  cmp->add_option("--ds", cmp_ds, "dimensions for the dimension sweep");
  cmp->add_option("--gaps", cmp_gaps, "mean Poisson gaps (s) for the gap sweep");
  cmp->add_option("--estimators", cmp_est, "comma-separated built-in estimators: pdf, classical");
  cmp->add_option("--pin-N", cmp_pin_N, "use this N for every path instead of the rule");
  cmp->add_option("--external", cmp_ext, "external estimates CSV (scenario,estimator,path,time_s,j,jp,value)");
  cmp->add_option("--external-estimator", cmp_ext_names, "external estimator names to score (default: all in file)");
  cmp->add_option("--store", cmp_store, "also record built-in results in this result store");
  cmp->add_option("--out", cmp_out, "comparison CSV; '-' for stdout");

  // report
  auto* rep = app.add_subcommand("report", "tables from a result store");
  std::string rep_store, rep_out = "-";
  rep->add_option("--store", rep_store, "result store directory")->required();
  rep->add_option("--out", rep_out, "comparison CSV; '-' for stdout");

  // run
  auto* run = app.add_subcommand("run", "run every scenario of a config file into its result store");
  std::string run_cfg;
  bool run_force = false;
  run->add_option("--config", run_cfg, "JSON run configuration")->required();
  run->add_flag("--force", run_force, "recompute records that already exist");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    app.exit(e, o, e2);
    err << e2.str() << o.str();
    return kExitInput;
  }

  try {
    if (*sim) {
      const ScenarioConfig c = sim_flags.build(sim);
      if (!sim_all.empty()) {
        ScenarioConfig all = c;
        if (sim_all_paths > 0) all.n_paths = sim_all_paths;
        detail::OutFile f(sim_all, out);
        write_scenario_ticks_csv(*f, all);
      }
      if (sim_all.empty() || !sim_out.empty()) {
        const PathData pd = simulate_path(c, sim_path);
        detail::OutFile f(sim_out, out);
        write_ticks_csv(*f, pd.ticks);
        if (!sim_truth.empty()) {
          detail::OutFile t(sim_truth, out);
          write_paths_csv(*t, pd.bundle);
        }
      }
      err << "scenario " << scenario_hash(c) << " " << scenario_label(c) << "\n";
      return kExitOk;
    }

    if (*est) {
      std::ifstream is(est_in);
      if (!is) throw InputError(est_in, 0, "cannot open tick file");
      const auto ticks = read_ticks_csv(is, est_in);
      const Window w = Window::of(ticks);
      std::vector<double> times;
      if (!est_times.empty()) times = detail::parse_doubles(est_times, "time");
      else times = eval_times(DenseGrid{w.t0, w.length(), 1}, est_minutes * 60.0);
      bool noisy = est_noise == "yes";
      if (est_noise == "auto") noisy = noise_suspected(ticks);
      double n = 0.0;
      for (const auto& ts : ticks) n += static_cast<double>(ts.n_increments());
      FreqRule rule;
      rule.alpha = est_alpha ? *est_alpha : (noisy ? kAlphaNoise : kAlphaNoNoise);
      rule.beta = est_beta;
      rule.N = est_N;
      rule.M = est_M;
      const FreqParams f = rule.resolve(rule_n(n / static_cast<double>(ticks.size())), !noisy);
      SpotCovEstimate e = est_kind == "pdf"
                              ? estimate_pdf(ticks, f, PsdWeight::gaussian(f.M), times)
                              : estimate_classical(ticks, f.N, est_Mint.value_or(default_fejer_order(f.N)), times);
      e = e.scaled(est_scale);
      detail::OutFile o(est_out, out);
      (*o).precision(17);
      *o << "time_s,j,jp,value,min_eig_at_t\n";
      for (std::size_t i = 0; i < e.eval_times.size(); ++i)
        for (int j = 0; j < e.d(); ++j)
          for (int jp = 0; jp < e.d(); ++jp)
            *o << e.eval_times[i] << ',' << j << ',' << jp << ',' << e.matrices[i](j, jp) << ','
               << e.diagnostics[i].min_eigenvalue << '\n';
      err << "N=" << f.N << " M=" << f.M << " noise=" << (noisy ? "yes" : "no") << "\n";
      return kExitOk;
    }

    if (*gs) {
      const ScenarioConfig c = gs_flags.build(gs);
      const auto g = run_grid_search(c, detail::parse_fractions(gs_alphas), detail::parse_fractions(gs_betas), workers);
      if (!gs_out.empty()) {
        detail::OutFile o(gs_out, out);
        write_grid_csv(*o, g);
      }
      detail::OutFile t(gs_table, out);
      write_grid_table(*t, g);
      err << "best alpha=" << g.cells[g.best].alpha << " beta=" << g.cells[g.best].beta << "\n";
      return kExitOk;
    }

    if (*sens) {
      SensitivityConfig sc;
      sc.rhos = detail::parse_doubles(sens_rho, "rho");
      sc.n = sens_n;
      sc.n_paths = sens_paths;
      sc.master_seed = sens_seed;
      if (!sens_Ns.empty())
        for (double x : detail::parse_doubles(sens_Ns, "N")) sc.Ns.push_back(static_cast<int>(x));
      const auto curves = run_sensitivity_study(sc, workers);
      detail::OutFile o(sens_out, out);
      write_sensitivity_csv(*o, curves);
      return kExitOk;
    }

    if (*cmp) {
      const ScenarioConfig base = cmp_flags.build(cmp);
      std::vector<ScenarioConfig> scenarios{base};
      if (cmp_sweep == "dimension") {
        std::vector<int> ds;
        for (double x : detail::parse_doubles(cmp_ds, "d")) ds.push_back(static_cast<int>(x));
        scenarios = dimension_sweep(base, ds);
      } else if (cmp_sweep == "gap") {
        scenarios = gap_sweep(base, detail::parse_doubles(cmp_gaps, "gap"));
      }
      std::vector<EstimatorSpec> specs;
      for (const auto& name : detail::split(cmp_est, ',')) {
        if (name.empty()) continue;
        EstimatorSpec s;
        if (name == "pdf") s = EstimatorSpec::pdf();
        else if (name == "classical") s = EstimatorSpec::classical();
        else throw ConfigurationError("unknown built-in estimator '" + name + "'");
        s.freq.N = cmp_pin_N;
        specs.push_back(s);
      }
      std::vector<ComparisonRow> rows;
      std::unique_ptr<ResultStore> store;
      if (!cmp_store.empty()) store = std::make_unique<ResultStore>(cmp_store);
      for (const auto& c : scenarios) {
        if (!specs.empty()) {
          const BatchResult b = run_batch(c, specs, workers);
          for (std::size_t e = 0; e < specs.size(); ++e) {
            const Record r = make_record(c, specs[e], b, e);
            if (store) store->put(r, true);
            rows.push_back(row_from_record(r));
          }
        }
      }
      if (!cmp_ext.empty()) {
        std::ifstream is(cmp_ext);
        if (!is) throw InputError(cmp_ext, 0, "cannot open external estimates");
        const ExternalEstimates ext = read_external_csv(is, cmp_ext);
        for (const auto& c : scenarios) {
          const std::string h = scenario_hash(c);
          for (const auto& [key, paths] : ext.data) {
            if (key.first != h && key.first != scenario_label(c)) continue;
            if (!cmp_ext_names.empty() &&
                std::find(cmp_ext_names.begin(), cmp_ext_names.end(), key.second) == cmp_ext_names.end())
              continue;
            rows.push_back(score_external(c, ext, key.first, key.second, workers));
          }
        }
      }
      detail::OutFile o(cmp_out, out);
      write_comparison_csv(*o, rows);
      return kExitOk;
    }

    if (*rep) {
      if (!std::filesystem::is_directory(rep_store)) throw InputError(rep_store, 0, "result store not found");
      const ResultStore store(rep_store);
      std::vector<ComparisonRow> rows;
      for (const auto& r : store.all()) rows.push_back(row_from_record(r));
      detail::OutFile o(rep_out, out);
      write_comparison_csv(*o, rows);
      return kExitOk;
    }

    if (*run) {
      const RunConfig rc = load_run_config(run_cfg);
      const RunSummary s = run_scenarios(rc, run_force, workers, [&](const Record& r) {
        err << r.key << " " << r.label << " " << r.estimator << " mise=" << r.report.mise
            << " psd=" << r.report.psd_rate << "\n";
      });
      out << "computed " << s.computed << ", skipped " << s.skipped << "\n";
      return kExitOk;
    }
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ConfigurationError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ArgumentError& e) {
    err << "argument error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace pdfcov::cli
