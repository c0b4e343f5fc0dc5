/**
 * @file microstructure.hpp
 * @brief Additive microstructure noise on simulated log-price panels.
 *
 * Noise levels are expressed as noise-to-signal ratios relative to the
 * variance of the efficient price's 10-second log-returns, measured per asset
 * and per path. OU mean reversion speeds are per minute.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "pdfcov/errors.hpp"
#include "pdfcov/numeric.hpp"
#include "pdfcov/path_sim.hpp"
#include "pdfcov/rng.hpp"

namespace pdfcov {

struct NoNoise {};

struct RoundingNoise {
  double r = 0.01;  ///< tick size in price units
};

struct IidNoise {
  double ratio = 1.0;
};

/// Plain OU noise: dη = -θ η dt + σ dE with E independent of the price.
struct OuNoise {
  double theta = 0.3;
  double target_ratio = 2.0;
};

/// OU noise whose driver is correlated with the asset's price driver.
struct CorrelatedOuNoise {
  double theta = 0.3;
  double rho = -0.3;
  double target_ratio = 2.0;
};

/// OU noise with intraday U-shaped scale σ̄(½(cos 2πt + 1)·0.9 + 0.1).
struct HeteroskedasticNoise {
  double sigma_bar = 3.0;
  double theta = 0.3;
  double rho = -0.3;
};

using NoiseSpec = std::variant<NoNoise, RoundingNoise, IidNoise, OuNoise, CorrelatedOuNoise, HeteroskedasticNoise>;

/// Canonical text form; also used for scenario hashing.
inline std::string noise_name(const NoiseSpec& spec) {
  std::ostringstream os;
  os.precision(10);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NoNoise>) os << "none";
        else if constexpr (std::is_same_v<T, RoundingNoise>) os << "rounding(r=" << s.r << ")";
        else if constexpr (std::is_same_v<T, IidNoise>) os << "iid(ratio=" << s.ratio << ")";
        else if constexpr (std::is_same_v<T, OuNoise>) os << "ou(theta=" << s.theta << ",ratio=" << s.target_ratio << ")";
        else if constexpr (std::is_same_v<T, CorrelatedOuNoise>)
          os << "corr_ou(theta=" << s.theta << ",rho=" << s.rho << ",ratio=" << s.target_ratio << ")";
        else os << "hetero(sigma_bar=" << s.sigma_bar << ",theta=" << s.theta << ",rho=" << s.rho << ")";
      },
      spec);
  return os.str();
}

inline bool is_noise_free(const NoiseSpec& spec) { return std::holds_alternative<NoNoise>(spec); }

struct NoisyPanel {
  DenseGrid grid;
  int d = 0;
  PathMatrix obs_log_prices;  ///< d x (n_steps+1)
  PathMatrix noise_paths;     ///< obs - efficient
  NoiseSpec spec;
  const PanelBundle* base = nullptr;  ///< non-owning; must outlive the panel
};

/// Noise scale multiplier on the normalized day t in [0,1].
using NoiseProfile = std::function<double(double)>;

inline NoiseProfile flat_profile() {
  return [](double) { return 1.0; };
}

inline NoiseProfile u_shape_profile(double sigma_bar) {
  return [sigma_bar](double t) { return sigma_bar * (0.5 * (std::cos(2.0 * std::numbers::pi * t) + 1.0) * 0.9 + 0.1); };
}

inline NoisyPanel identity_panel(const PanelBundle& base) {
  NoisyPanel p;
  p.grid = base.grid;
  p.d = base.d;
  p.obs_log_prices = base.log_prices;
  p.noise_paths = PathMatrix::Zero(base.d, base.log_prices.cols());
  p.spec = NoNoise{};
  p.base = &base;
  return p;
}

/// Variance of the asset's log-returns sampled every `gap` seconds (n-1 denominator).
inline double sampled_return_variance(const PanelBundle& base, int asset, double gap = 10.0) {
  const double ratio = gap / base.grid.step;
  const auto every = static_cast<std::size_t>(std::llround(ratio));
  if (every == 0 || std::abs(ratio - static_cast<double>(every)) > 1e-9)
    throw ArgumentError("grid step must divide the " + std::to_string(gap) + " s sampling gap");
  std::vector<double> r;
  for (std::size_t i = every; i < base.grid.size(); i += every)
    r.push_back(base.log_prices(asset, static_cast<Eigen::Index>(i)) -
                base.log_prices(asset, static_cast<Eigen::Index>(i - every)));
  if (r.size() < 2) throw ArgumentError("fewer than two sampled returns for noise calibration");
  return sample_variance(r);
}

inline double round_log_price(double x, double r) {
  const double price = std::exp(x);
  if (!std::isfinite(price)) throw ConfigurationError("price level overflows before rounding");
  const double q = std::nearbyint(price / r);
  if (!(q > 0.0)) throw ConfigurationError("price rounds to zero; tick size too large for the price level");
  return std::log(q * r);
}

inline NoisyPanel apply_rounding(const PanelBundle& base, double r) {
  if (!(r > 0.0)) throw ArgumentError("rounding tick must be positive");
  NoisyPanel p = identity_panel(base);
  p.spec = RoundingNoise{r};
  for (Eigen::Index j = 0; j < p.obs_log_prices.rows(); ++j)
    for (Eigen::Index i = 0; i < p.obs_log_prices.cols(); ++i) {
      const double x = round_log_price(base.log_prices(j, i), r);
      p.obs_log_prices(j, i) = x;
      p.noise_paths(j, i) = x - base.log_prices(j, i);
    }
  return p;
}

inline NoisyPanel apply_iid_noise(const PanelBundle& base, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0)) throw ArgumentError("noise ratio must be non-negative");
  NoisyPanel p = identity_panel(base);
  p.spec = IidNoise{ratio};
  for (int j = 0; j < base.d; ++j) {
    const double sd = std::sqrt(sampled_return_variance(base, j) * ratio);
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(j)}));
    std::normal_distribution<double> nd;
    for (Eigen::Index i = 0; i < p.obs_log_prices.cols(); ++i) {
      const double eta = sd * nd(rng);
      p.noise_paths(j, i) = eta;
      p.obs_log_prices(j, i) = base.log_prices(j, i) + eta;
    }
  }
  return p;
}

/// Euler OU noise with stationary variance var10 · target_ratio · profile(t)²,
/// driver correlated with the price driver at rho. theta is per minute.
inline NoisyPanel apply_ou_noise(const PanelBundle& base, double theta, double target_ratio, double rho,
                                 const NoiseProfile& profile, std::uint64_t seed) {
  if (!(theta >= 0.0)) throw ArgumentError("OU mean reversion must be non-negative");
  if (!(target_ratio >= 0.0)) throw ArgumentError("noise ratio must be non-negative");
  if (!(rho > -1.0 && rho <= 0.0)) throw ArgumentError("noise-price correlation must lie in (-1, 0]");
  NoisyPanel p = identity_panel(base);
  p.spec = CorrelatedOuNoise{theta, rho, target_ratio};
  const double dt = base.grid.step / 60.0;
  const double sdt = std::sqrt(dt);
  const double span = base.grid.t_end() - base.grid.t0;
  const double rho_c = std::sqrt(1.0 - rho * rho);
  const Eigen::Index n = p.obs_log_prices.cols();
  for (int j = 0; j < base.d; ++j) {
    const double var10 = sampled_return_variance(base, j);
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(j)}));
    std::normal_distribution<double> nd;
    auto level = [&](Eigen::Index i) {
      const double s = profile((base.grid.time(static_cast<std::size_t>(i)) - base.grid.t0) / span);
      return var10 * (target_ratio * (s * s));
    };
    double eta = std::sqrt(level(0)) * nd(rng);
    p.noise_paths(j, 0) = eta;
    p.obs_log_prices(j, 0) = base.log_prices(j, 0) + eta;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double xi = nd(rng);
      const double dE = rho == 0.0 ? xi : rho * base.price_shocks(j, i) + rho_c * xi;
      eta += -theta * eta * dt + std::sqrt(2.0 * theta * level(i)) * sdt * dE;
      p.noise_paths(j, i + 1) = eta;
      p.obs_log_prices(j, i + 1) = base.log_prices(j, i + 1) + eta;
    }
  }
  return p;
}

inline NoisyPanel apply_noise(const PanelBundle& base, const NoiseSpec& spec, std::uint64_t seed) {
  NoisyPanel out = std::visit(
      [&](const auto& s) -> NoisyPanel {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NoNoise>) return identity_panel(base);
        else if constexpr (std::is_same_v<T, RoundingNoise>) return apply_rounding(base, s.r);
        else if constexpr (std::is_same_v<T, IidNoise>) return apply_iid_noise(base, s.ratio, seed);
        else if constexpr (std::is_same_v<T, OuNoise>)
          return apply_ou_noise(base, s.theta, s.target_ratio, 0.0, flat_profile(), seed);
        else if constexpr (std::is_same_v<T, CorrelatedOuNoise>)
          return apply_ou_noise(base, s.theta, s.target_ratio, s.rho, flat_profile(), seed);
        else return apply_ou_noise(base, s.theta, 1.0, s.rho, u_shape_profile(s.sigma_bar), seed);
      },
      spec);
  out.spec = spec;
  return out;
}

}  // namespace pdfcov
