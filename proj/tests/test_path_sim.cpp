#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pdfcov/numeric.hpp"
#include "pdfcov/path_sim.hpp"

using namespace pdfcov;

namespace {

DenseGrid day_grid(double step = 2.0) { return DenseGrid::trading_day(step); }

double integrated_variance(const PanelBundle& b, int j) {
  const double dt = b.grid.step / b.day_seconds;
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < b.spot_var.cols(); ++i) s += 0.5 * (b.spot_var(j, i) + b.spot_var(j, i + 1)) * dt;
  return s;
}

}  // namespace

TEST(DenseGrid, TradingDayDefaults) {
  const DenseGrid g = day_grid();
  EXPECT_EQ(g.n_steps, 11700u);
  EXPECT_DOUBLE_EQ(g.t_end(), 23400.0);
  EXPECT_THROW(DenseGrid::trading_day(0.0), ArgumentError);
  EXPECT_THROW(DenseGrid::trading_day(7.0), ArgumentError);
  EXPECT_EQ(g.nearest_index(2.9), 1u);
  EXPECT_THROW((void)g.nearest_index(23401.0), ArgumentError);
}

TEST(Heston, DeterministicVarianceWhenVolOfVolAndReversionVanish) {
  HestonParams p;
  p.nu = 0.0;
  p.gamma = 0.0;
  p.theta = 0.1;
  const auto b = simulate_heston(p, {}, day_grid(), 3, 7);
  EXPECT_TRUE((b.spot_var.array() == 0.1).all());
}

TEST(Heston, OffDiagonalTruthIsRhoSigmaSigma) {
  const auto b = simulate_heston({}, {}, day_grid(), 2, 11);
  for (std::size_t i = 0; i < b.grid.size(); i += 97) {
    const auto V = b.true_cov_at(i);
    const double s1 = std::sqrt(b.spot_var(0, static_cast<Eigen::Index>(i)));
    const double s2 = std::sqrt(b.spot_var(1, static_cast<Eigen::Index>(i)));
    EXPECT_NEAR(V(0, 1), 0.312 * s1 * s2, 1e-15);
    EXPECT_DOUBLE_EQ(V(0, 1), V(1, 0));
  }
}

TEST(Heston, StepMustBePositive) {
  DenseGrid g{0.0, 0.0, 10};
  EXPECT_THROW(simulate_heston({}, {}, g, 1, 1), ArgumentError);
  g.step = -1.0;
  EXPECT_THROW(simulate_heston({}, {}, g, 1, 1), ArgumentError);
}

TEST(Heston, NonPsdDriverCorrelationRejected) {
  CorrelationSpec c;
  c.cross_asset_rho = -0.9;
  EXPECT_THROW(simulate_heston({}, c, day_grid(), 3, 1), ConfigurationError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 1) = 0.5;
  c = {};
  c.full_matrix = bad;
  EXPECT_THROW(simulate_heston({}, c, day_grid(), 1, 1), ConfigurationError);
}

// Independent fine-step (0.1 s) Euler oracle for the mean daily integrated
// variance, compared with the production 2 s scheme and with θ·T.
TEST(Heston, MeanIntegratedVarianceMatchesFineStepOracle) {
  const HestonParams p;
  const int K = 100;
  std::vector<double> coarse;
  for (int k = 0; k < K; ++k) {
    const auto b = simulate_heston(p, {}, day_grid(), 1, derive_seed({1234, static_cast<std::uint64_t>(k)}));
    coarse.push_back(integrated_variance(b, 0));
  }
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  const int fine_paths = 20;
  const double dt = 0.1 / 23400.0;
  std::vector<double> fine;
  for (int k = 0; k < fine_paths; ++k) {
    double v = p.theta, iv = 0.0;
    for (int i = 0; i < 234000; ++i) {
      const double vp = std::max(v, 0.0);
      const double z1 = nd(rng), z2 = nd(rng);
      const double dz = p.lambda * z1 + std::sqrt(1 - p.lambda * p.lambda) * z2;
      const double vn = v + p.gamma * (p.theta - vp) * dt + p.nu * std::sqrt(vp * dt) * dz;
      iv += 0.5 * (vp + std::max(vn, 0.0)) * dt;
      v = vn;
    }
    fine.push_back(iv);
  }
  const double m = mean(coarse), se = standard_error(coarse);
  const double mf = mean(fine), sef = standard_error(fine);
  const double tol = 3.0 * std::sqrt(se * se + sef * sef) + 1e-12;
  EXPECT_NEAR(m, mf, tol);
  EXPECT_NEAR(m, p.theta * 1.0, 3.0 * se + 1e-12);
}

TEST(Sv1f, ConstantVolWhenFactorDecoupled) {
  Sv1fParams p;
  p.beta1 = 0.0;
  const auto b = simulate_sv1f(p, {}, day_grid(), 2, 3);
  const double s2 = std::exp(2 * p.beta0);
  EXPECT_TRUE(((b.spot_var.array() - s2).abs() < 1e-15).all());
}

TEST(Sv1f, DriftlessFactorHasBrownianVariance) {
  Sv1fParams p;
  p.alpha = 0.0;
  std::vector<double> end;
  for (int k = 0; k < 100; ++k) {
    const auto b = simulate_sv1f(p, {}, day_grid(), 5, derive_seed({77, static_cast<std::uint64_t>(k)}));
    for (int j = 0; j < 5; ++j) end.push_back(b.factors[0](j, b.factors[0].cols() - 1));
  }
  const double v = sample_variance(end);
  const double se = std::sqrt(2.0 / (end.size() - 1.0)) * 1.0;
  EXPECT_NEAR(v, 1.0, 3.0 * se);
}

TEST(Sv1f, LogVolVarianceMatchesOuClosedForm) {
  const Sv1fParams p;
  std::vector<double> logsig;
  for (int k = 0; k < 100; ++k) {
    const auto b = simulate_sv1f(p, {}, day_grid(), 5, derive_seed({78, static_cast<std::uint64_t>(k)}));
    for (int j = 0; j < 5; ++j) logsig.push_back(0.5 * std::log(b.spot_var(j, b.spot_var.cols() - 1)));
  }
  const double T = 1.0;
  const double expected = p.beta1 * p.beta1 * (std::exp(2 * p.alpha * T) - 1.0) / (2 * p.alpha);
  const double se = std::sqrt(2.0 / (logsig.size() - 1.0)) * expected;
  EXPECT_NEAR(sample_variance(logsig), expected, 3.0 * se);
}

TEST(Sv2f, SplicedExponential) {
  const double x0 = std::log(1.5);
  EXPECT_DOUBLE_EQ(sexp(x0, x0), std::exp(x0));
  EXPECT_NEAR(sexp(x0 + 1e-12, x0), std::exp(x0), 1e-10);
  const double x = x0 + 1.0;
  EXPECT_DOUBLE_EQ(sexp(x, x0), std::exp(x0) / std::sqrt(x0) * std::sqrt(x0 - x0 * x0 + x * x));
  EXPECT_DOUBLE_EQ(sexp(-2.0, x0), std::exp(-2.0));
}

TEST(Sv2f, ConstantVolWhenFactorsDecoupled) {
  Sv2fParams p;
  p.beta1 = 0.0;
  p.beta2 = 0.0;
  const auto b = simulate_sv2f(p, {}, day_grid(), 2, 5);
  const double s = sexp(p.beta0);
  EXPECT_TRUE(((b.spot_var.array() - s * s).abs() < 1e-15).all());
}

TEST(RoughHeston, ConstantVarianceWithoutForcing) {
  RoughHestonParams p;
  p.nu = 0.0;
  p.gamma = 0.0;
  p.theta = 0.0;
  p.sigma0_sq = 0.25;
  const auto b = simulate_rough_heston(p, {}, DenseGrid::trading_day(20.0), 2, 5);
  EXPECT_TRUE((b.spot_var.array() == 0.25).all());
}

TEST(RoughHeston, RejectsHurstOutsideRoughRange) {
  RoughHestonParams p;
  for (double H : {0.0, 0.5, 0.7, -0.1}) {
    p.H = H;
    EXPECT_THROW(simulate_rough_heston(p, {}, DenseGrid::trading_day(20.0), 1, 1), ArgumentError);
  }
}

TEST(RoughHeston, ConstantKernelReproducesHestonEuler) {
  const HestonParams h;
  RoughHestonParams r;
  r.gamma = h.gamma;
  r.theta = h.gamma * h.theta;
  r.nu = h.nu;
  r.lambda = h.lambda;
  r.mu = h.mu;
  r.sigma0_sq = h.theta;
  const DenseGrid g = DenseGrid::trading_day(4.0);
  const std::vector<double> ones(g.size(), 1.0);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto a = simulate_heston(h, {}, g, 3, seed);
    const auto b = simulate_volterra_heston(r, ones, {}, g, 3, seed);
    EXPECT_LT((a.log_prices - b.log_prices).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((a.spot_var - b.spot_var).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RoughHeston, DefaultParametersRarelyTruncate) {
  const RoughHestonParams p;
  int clean = 0;
  const int K = 100;
  for (int k = 0; k < K; ++k) {
    const auto b = simulate_rough_heston(p, {}, day_grid(), 1, derive_seed({4242, static_cast<std::uint64_t>(k)}));
    clean += b.truncations[0] == 0 ? 1 : 0;
  }
  EXPECT_GE(clean, 95);
}

TEST(TrueSpotCov, SingleAsset) {
  const auto b = simulate_heston({}, {}, day_grid(), 1, 3);
  const auto V = true_spot_cov(b, 1000.0);
  ASSERT_EQ(V.rows(), 1);
  EXPECT_DOUBLE_EQ(V(0, 0), b.spot_var(0, 500));
}

TEST(TrueSpotCov, PerfectCorrelationIsRankOne) {
  HestonParams p;
  p.nu = 0.0;
  p.gamma = 0.0;
  CorrelationSpec c;
  c.cross_asset_rho = 1.0;
  c.leverage_lambda = 0.0;
  const int d = 4;
  const auto b = simulate_heston(p, c, day_grid(), d, 9);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(true_spot_cov(b, 5000.0));
  EXPECT_NEAR(es.eigenvalues()(d - 1), d * p.theta, 1e-12);
  for (int i = 0; i + 1 < d; ++i) EXPECT_NEAR(es.eigenvalues()(i), 0.0, 1e-12);
}

TEST(TrueSpotCov, MatchesOuterProductFormula) {
  const auto b = simulate_heston({}, {}, day_grid(), 3, 21);
  for (double t : {0.0, 777.0, 12345.6, 23400.0}) {
    const std::size_t i = static_cast<std::size_t>(std::llround(t / 2.0));
    const auto V = true_spot_cov(b, t);
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) {
        const double rho = a == c ? 1.0 : 0.312;
        const double expected = rho * std::sqrt(b.spot_var(a, static_cast<Eigen::Index>(i)) *
                                                b.spot_var(c, static_cast<Eigen::Index>(i)));
        EXPECT_NEAR(V(a, c), expected, 1e-15);
      }
  }
  EXPECT_THROW(true_spot_cov(b, -5.0), ArgumentError);
  EXPECT_THROW(true_spot_cov(b, 23405.0), ArgumentError);
}

TEST(PathSimProperties, SameSeedIsBitIdentical) {
  for (const ModelParams& m : {ModelParams{HestonParams{}}, ModelParams{Sv1fParams{}}, ModelParams{Sv2fParams{}},
                               ModelParams{RoughHestonParams{}}}) {
    const DenseGrid g = DenseGrid::trading_day(20.0);
    const auto a = simulate(m, {}, g, 3, 555);
    const auto b = simulate(m, {}, g, 3, 555);
    EXPECT_TRUE(a.log_prices == b.log_prices) << model_name(m);
    EXPECT_TRUE(a.spot_var == b.spot_var) << model_name(m);
    const auto c = simulate(m, {}, g, 3, 556);
    EXPECT_FALSE(a.log_prices == c.log_prices) << model_name(m);
  }
}

TEST(PathSimProperties, TruthIsPsdAndVarianceNonNegative) {
  for (const ModelParams& m : {ModelParams{HestonParams{}}, ModelParams{Sv1fParams{}}, ModelParams{Sv2fParams{}},
                               ModelParams{RoughHestonParams{}}}) {
    const auto b = simulate(m, {}, DenseGrid::trading_day(10.0), 5, 8);
    EXPECT_GE(b.spot_var.minCoeff(), 0.0) << model_name(m);
    for (std::size_t i = 0; i < b.grid.size(); i += 50) {
      const auto V = b.true_cov_at(i);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V, Eigen::EigenvaluesOnly);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * V.trace()) << model_name(m);
    }
  }
}

TEST(PathSimProperties, HestonVarianceFloorUnderHeavyVolOfVol) {
  HestonParams p;
  p.nu = 3.0;
  const auto b = simulate_heston(p, {}, DenseGrid::trading_day(10.0), 3, 1);
  EXPECT_GE(b.spot_var.minCoeff(), 0.0);
  EXPECT_GT(b.truncations[0] + b.truncations[1] + b.truncations[2], 0u);
}

// With μ = 0 and no leverage the price is a martingale. Heston and rough
// Heston simulate log-prices with the -σ²/2 correction, so exp(ΔX) has mean
// one; the factor models have no correction and ΔX itself has mean zero.
TEST(PathSimProperties, MartingaleUnderZeroDriftAndLeverage) {
  const DenseGrid g = DenseGrid::trading_day(20.0);
  const int K = 1000;
  CorrelationSpec c;
  c.leverage_lambda = 0.0;
  HestonParams h;
  h.mu = 0.0;
  Sv1fParams s1;
  s1.mu = 0.0;
  Sv2fParams s2;
  s2.mu = 0.0;
  RoughHestonParams r;
  r.mu = 0.0;
  for (const ModelParams& m : {ModelParams{h}, ModelParams{s1}, ModelParams{s2}, ModelParams{r}}) {
    const bool exp_form = std::holds_alternative<HestonParams>(m) || std::holds_alternative<RoughHestonParams>(m);
    std::vector<double> x;
    for (int k = 0; k < K; ++k) {
      const auto b = simulate(m, c, g, 1, derive_seed({31337, static_cast<std::uint64_t>(k)}));
      const double dx = b.log_prices(0, b.log_prices.cols() - 1) - b.log_prices(0, 0);
      x.push_back(exp_form ? std::exp(dx) - 1.0 : dx);
    }
    EXPECT_NEAR(mean(x), 0.0, 4.0 * standard_error(x)) << model_name(m);
  }
}

TEST(Brownian, UnitVarianceAndCorrelation) {
  const DenseGrid g{0.0, 1.0 / 1000.0, 1000};
  std::vector<double> x1, x12;
  for (int k = 0; k < 2000; ++k) {
    const auto b = simulate_brownian(g, 2, 0.5, derive_seed({5, static_cast<std::uint64_t>(k)}));
    x1.push_back(b.log_prices(0, 1000) * b.log_prices(0, 1000));
    x12.push_back(b.log_prices(0, 1000) * b.log_prices(1, 1000));
  }
  EXPECT_NEAR(mean(x1), 1.0, 4.0 * standard_error(x1));
  EXPECT_NEAR(mean(x12), 0.5, 4.0 * standard_error(x12));
  EXPECT_THROW(simulate_brownian(g, 2, 1.5, 1), ArgumentError);
  EXPECT_NO_THROW(simulate_brownian(g, 2, 1.0, 1));
  EXPECT_NO_THROW(simulate_brownian(g, 2, -1.0, 1));
}
