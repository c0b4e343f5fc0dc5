/**
 * @file sampling.hpp
 * @brief Irregular and asynchronous observation schemes on a dense grid,
 *        plus the tick CSV format shared with the estimator CLI.
 *
 * All schemes pick dense-grid points, so tick prices are exact grid values.
 * Both window endpoints are always observed.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pdfcov/errors.hpp"
#include "pdfcov/microstructure.hpp"
#include "pdfcov/path_sim.hpp"
#include "pdfcov/rng.hpp"

namespace pdfcov {

struct TickSeries {
  int asset_id = 0;
  std::vector<double> times;  ///< seconds, strictly increasing
  std::vector<double> log_prices;

  std::size_t size() const noexcept { return times.size(); }
  std::size_t n_increments() const noexcept { return times.empty() ? 0 : times.size() - 1; }

  void validate() const {
    if (times.size() != log_prices.size()) throw ArgumentError("tick series times and prices differ in length");
    if (times.size() < 2) throw ArgumentError("tick series needs at least two observations");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw ArgumentError("tick times must be strictly increasing (asset " + std::to_string(asset_id) + ")");
  }
};

struct PoissonSampling {
  double mean_gap = 10.0;
};
struct RegularSampling {
  double gap = 10.0;
};
struct ShiftedRegularSampling {
  std::size_t n = 500;
  double shift_fraction = 0.5;
};

using SamplingSpec = std::variant<PoissonSampling, RegularSampling, ShiftedRegularSampling>;

inline std::string sampling_name(const SamplingSpec& s) {
  std::ostringstream os;
  os.precision(10);
  if (const auto* p = std::get_if<PoissonSampling>(&s)) os << "poisson(gap=" << p->mean_gap << ")";
  else if (const auto* r = std::get_if<RegularSampling>(&s)) os << "regular(gap=" << r->gap << ")";
  else {
    const auto& sh = std::get<ShiftedRegularSampling>(s);
    os << "shifted(n=" << sh.n << ",shift=" << sh.shift_fraction << ")";
  }
  return os.str();
}

inline TickSeries ticks_from_indices(const NoisyPanel& panel, int asset, const std::vector<std::size_t>& idx) {
  TickSeries ts;
  ts.asset_id = asset;
  ts.times.reserve(idx.size());
  ts.log_prices.reserve(idx.size());
  for (std::size_t i : idx) {
    ts.times.push_back(panel.grid.time(i));
    ts.log_prices.push_back(panel.obs_log_prices(asset, static_cast<Eigen::Index>(i)));
  }
  return ts;
}

/// Poisson arrivals on the dense grid. Gaps are geometric in grid steps with
/// success probability step/mean_gap, the lattice analogue of exponential
/// gaps: mean gap is exactly mean_gap and no two events share a grid point.
inline std::vector<TickSeries> sample_poisson(const NoisyPanel& panel, double mean_gap, std::uint64_t seed) {
  const DenseGrid& g = panel.grid;
  if (!(mean_gap >= g.step * (1.0 - 1e-12))) throw ArgumentError("Poisson mean gap must be at least the grid step");
  const double p = std::min(1.0, g.step / mean_gap);
  std::vector<TickSeries> out;
  out.reserve(static_cast<std::size_t>(panel.d));
  for (int j = 0; j < panel.d; ++j) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(j)}));
    std::geometric_distribution<std::size_t> geo(p);
    std::vector<std::size_t> idx{0};
    std::size_t k = 0;
    while (true) {
      k += geo(rng) + 1;
      if (k >= g.n_steps) break;
      idx.push_back(k);
    }
    idx.push_back(g.n_steps);
    out.push_back(ticks_from_indices(panel, j, idx));
  }
  return out;
}

/// Two assets on the normalized day: asset 0 at i/n (i = 0..n), asset 1 at
/// (i + shift)/n (i = 1..n-1) with both endpoints pinned. Every time must
/// land on a dense-grid point.
inline std::pair<TickSeries, TickSeries> sample_shifted_pair(const NoisyPanel& panel, std::size_t n,
                                                             double shift_fraction = 0.5) {
  if (n < 2) throw ArgumentError("shifted-pair sampling needs n >= 2");
  if (panel.d < 2) throw ArgumentError("shifted-pair sampling needs two assets");
  if (!(shift_fraction >= 0.0 && shift_fraction < 1.0)) throw ArgumentError("shift fraction must lie in [0, 1)");
  const auto n_steps = static_cast<double>(panel.grid.n_steps);
  auto to_index = [&](double frac) {
    const double x = frac * n_steps;
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-7) throw ArgumentError("shifted-pair time does not fall on the dense grid");
    return static_cast<std::size_t>(r);
  };
  const double dn = static_cast<double>(n);
  std::vector<std::size_t> a, b;
  for (std::size_t i = 0; i <= n; ++i) a.push_back(to_index(static_cast<double>(i) / dn));
  b.push_back(0);
  for (std::size_t i = 1; i < n; ++i) b.push_back(to_index((static_cast<double>(i) + shift_fraction) / dn));
  b.push_back(panel.grid.n_steps);
  return {ticks_from_indices(panel, 0, a), ticks_from_indices(panel, 1, b)};
}

/// Every gap-th second on the dense grid, last point pinned.
inline std::vector<TickSeries> resample_regular(const NoisyPanel& panel, double gap) {
  const double ratio = gap / panel.grid.step;
  const auto every = static_cast<std::size_t>(std::llround(ratio));
  if (every == 0 || std::abs(ratio - static_cast<double>(every)) > 1e-9)
    throw ArgumentError("regular sampling gap must be a multiple of the grid step");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i <= panel.grid.n_steps; i += every) idx.push_back(i);
  if (idx.back() != panel.grid.n_steps) idx.push_back(panel.grid.n_steps);
  std::vector<TickSeries> out;
  for (int j = 0; j < panel.d; ++j) out.push_back(ticks_from_indices(panel, j, idx));
  return out;
}

inline std::vector<TickSeries> sample(const NoisyPanel& panel, const SamplingSpec& spec, std::uint64_t seed) {
  if (const auto* p = std::get_if<PoissonSampling>(&spec)) return sample_poisson(panel, p->mean_gap, seed);
  if (const auto* r = std::get_if<RegularSampling>(&spec)) return resample_regular(panel, r->gap);
  const auto& sh = std::get<ShiftedRegularSampling>(spec);
  auto [a, b] = sample_shifted_pair(panel, sh.n, sh.shift_fraction);
  return {std::move(a), std::move(b)};
}

/// Writes `asset,time_s,log_price`, sorted by asset then time.
inline void write_ticks_csv(std::ostream& os, const std::vector<TickSeries>& ticks) {
  os << "asset,time_s,log_price\n";
  os.precision(17);
  for (const auto& ts : ticks)
    for (std::size_t i = 0; i < ts.size(); ++i) os << ts.asset_id << ',' << ts.times[i] << ',' << ts.log_prices[i] << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const std::string& source, std::size_t row, const char* field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError(source, row, std::string("cannot parse ") + field + " '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw InputError(source, row, std::string("invalid ") + field + " '" + s + "'");
  return v;
}

inline long parse_int(const std::string& s, const std::string& source, std::size_t row, const char* field) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    throw InputError(source, row, std::string("cannot parse ") + field + " '" + s + "'");
  }
  if (used != s.size()) throw InputError(source, row, std::string("invalid ") + field + " '" + s + "'");
  return v;
}

}  // namespace detail

/// Reads the tick CSV. Assets are returned in increasing id order; each
/// asset's times must be strictly increasing.
inline std::vector<TickSeries> read_ticks_csv(std::istream& is, const std::string& source = "ticks") {
  std::string line;
  std::size_t row = 1;
  if (!std::getline(is, line)) throw InputError(source, 1, "empty tick file");
  if (detail::split_csv_line(line) != std::vector<std::string>{"asset", "time_s", "log_price"})
    throw InputError(source, 1, "expected header asset,time_s,log_price");
  std::map<long, TickSeries> by_asset;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 3) throw InputError(source, row, "expected 3 fields, got " + std::to_string(f.size()));
    const long a = detail::parse_int(f[0], source, row, "asset");
    if (a < 0) throw InputError(source, row, "negative asset id");
    const double t = detail::parse_double(f[1], source, row, "time_s");
    const double x = detail::parse_double(f[2], source, row, "log_price");
    auto& ts = by_asset[a];
    ts.asset_id = static_cast<int>(a);
    if (!ts.times.empty() && !(t > ts.times.back()))
      throw InputError(source, row, "times for asset " + std::to_string(a) + " not strictly increasing");
    ts.times.push_back(t);
    ts.log_prices.push_back(x);
  }
  std::vector<TickSeries> out;
  for (auto& [id, ts] : by_asset) {
    if (ts.size() < 2) throw InputError(source, row, "asset " + std::to_string(id) + " has fewer than two ticks");
    out.push_back(std::move(ts));
  }
  if (out.empty()) throw InputError(source, row, "no ticks");
  return out;
}

}  // namespace pdfcov
