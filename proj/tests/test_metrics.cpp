#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pdfcov/metrics.hpp"

using namespace pdfcov;

namespace {

SpotCovEstimate make_estimate(std::vector<double> times, MatrixPath ms) {
  SpotCovEstimate e;
  e.eval_times = std::move(times);
  for (const auto& m : ms) e.diagnostics.push_back(diagnose(m));
  e.matrices = std::move(ms);
  return e;
}

MatrixPath constant_path(std::size_t n, const Eigen::MatrixXd& m) { return MatrixPath(n, m); }

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = nd(rng);
  return A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace

TEST(Mise, IdenticalEstimateScoresZero) {
  std::mt19937_64 rng(1);
  const std::vector<double> t{0.0, 1.0, 2.5, 4.0};
  std::vector<SpotCovEstimate> est;
  std::vector<MatrixPath> truth;
  for (int k = 0; k < 5; ++k) {
    MatrixPath p;
    for (std::size_t i = 0; i < t.size(); ++i) p.push_back(random_spd(rng, 3));
    est.push_back(make_estimate(t, p));
    truth.push_back(p);
  }
  const auto r = mise(est, truth);
  EXPECT_EQ(r.mise, 0.0);
  EXPECT_EQ(r.rmise, 0.0);
  EXPECT_EQ(r.psd_rate, 1.0);
  EXPECT_EQ(r.n_paths, 5u);
  EXPECT_EQ(r.n_matrices, 20u);
}

TEST(Mise, ConstantOffsetScoresSquare) {
  const std::vector<double> t{0.0, 0.3, 1.0};
  const Eigen::MatrixXd V = Eigen::MatrixXd::Identity(2, 2);
  const double c = 0.25;
  const Eigen::MatrixXd W = V + Eigen::MatrixXd::Constant(2, 2, c);
  const auto r = mise({make_estimate(t, constant_path(3, W))}, {constant_path(3, V)});
  EXPECT_NEAR(r.mise, c * c, 1e-15);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) EXPECT_NEAR(r.per_entry_mise(a, b), c * c, 1e-15);
  // off-diagonal truth is zero and excluded from the relative score
  EXPECT_EQ(r.rmise_excluded, 6u);
  EXPECT_NEAR(r.rmise, 2 * c * c / 4.0, 1e-15);
}

// Independent trapezoid oracle on a non-uniform grid.
TEST(Mise, MatchesTrapezoidOracle) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  const std::vector<double> t{0.0, 0.1, 0.5, 0.6, 2.0};
  const int d = 3, K = 4;
  std::vector<SpotCovEstimate> est;
  std::vector<MatrixPath> truth;
  double oracle = 0.0;
  for (int k = 0; k < K; ++k) {
    MatrixPath e, v;
    for (std::size_t i = 0; i < t.size(); ++i) {
      v.push_back(random_spd(rng, d));
      Eigen::MatrixXd noise(d, d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) noise(a, b) = nd(rng);
      e.push_back(v.back() + noise);
    }
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      const double f0 = (e[i] - v[i]).squaredNorm(), f1 = (e[i + 1] - v[i + 1]).squaredNorm();
      integral += 0.5 * (f0 + f1) * (t[i + 1] - t[i]);
    }
    oracle += integral / (t.back() - t.front()) / (d * d) / K;
    est.push_back(make_estimate(t, e));
    truth.push_back(v);
  }
  EXPECT_NEAR(mise(est, truth).mise, oracle, 1e-12 * oracle);
}

TEST(Mise, ShapeErrors) {
  const std::vector<double> t{0.0, 1.0};
  const auto I2 = Eigen::MatrixXd::Identity(2, 2);
  const auto I3 = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(mise({}, {}), ArgumentError);
  EXPECT_THROW(mise({make_estimate(t, constant_path(2, I2))}, {}), ArgumentError);
  EXPECT_THROW(mise({make_estimate(t, constant_path(2, I2))}, {constant_path(2, I3)}), ArgumentError);
  EXPECT_THROW(mise({make_estimate(t, constant_path(2, I2))}, {constant_path(3, I2)}), ArgumentError);
}

TEST(Mise, SummationIsReproducible) {
  std::mt19937_64 rng(3);
  const std::vector<double> t{0.0, 1.0, 2.0};
  std::vector<SpotCovEstimate> est;
  std::vector<MatrixPath> truth;
  for (int k = 0; k < 200; ++k) {
    MatrixPath p, q;
    for (int i = 0; i < 3; ++i) {
      p.push_back(random_spd(rng, 2) * 1e-6);
      q.push_back(random_spd(rng, 2) * 1e-6);
    }
    est.push_back(make_estimate(t, p));
    truth.push_back(q);
  }
  const auto a = mise(est, truth), b = mise(est, truth);
  EXPECT_EQ(a.mise, b.mise);
  EXPECT_EQ(a.rmise, b.rmise);
}

TEST(PsdRate, InjectedIndefiniteMatrix) {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.45, 0.55, 0.55, 0.45;  // eigenvalues 1 and -0.1
  const auto I = Eigen::MatrixXd::Identity(2, 2);
  const auto e = make_estimate({0.0, 1.0}, {I, bad});
  EXPECT_NEAR(e.diagnostics[1].min_eigenvalue, -0.1, 1e-14);
  EXPECT_EQ(psd_rate({e}), 0.5);
  EXPECT_EQ(psd_path_rate({e, make_estimate({0.0, 1.0}, {I, I})}), 0.5);
}

TEST(PsdRate, AllPdfEstimatesArePsd) {
  std::mt19937_64 rng(4);
  std::vector<SpotCovEstimate> est;
  for (int k = 0; k < 20; ++k) {
    const auto b = simulate_heston({}, {}, DenseGrid{0.0, 2.0, 1800}, 4, derive_seed({4, static_cast<std::uint64_t>(k)}));
    const auto ticks = sample_poisson(identity_panel(b), 10.0, derive_seed({5, static_cast<std::uint64_t>(k)}));
    est.push_back(estimate_pdf(ticks, select_freq(360, false), {600.0, 1800.0, 3000.0}));
  }
  EXPECT_EQ(psd_rate(est), 1.0);
  EXPECT_EQ(psd_path_rate(est), 1.0);
}

TEST(PsdRate, ClassicalOnShiftedPairFallsBelowOne) {
  const DenseGrid g{0.0, 1.0 / 1000.0, 1000};
  const auto b = simulate_brownian(g, 2, 0.312, 2);  // seed recorded in the estimator tests
  const auto [x, y] = sample_shifted_pair(identity_panel(b), 500, 0.5);
  const std::vector<double> times{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  EXPECT_LT(psd_rate({estimate_classical({x, y}, 250, 250, times)}), 1.0);
  EXPECT_EQ(psd_rate({estimate_pdf({x, y}, select_freq(500, 1.0, 4.0 / 9.0), times)}), 1.0);
}

TEST(PsdRate, InvariantUnderPathPermutation) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<SpotCovEstimate> est;
  for (int k = 0; k < 30; ++k) {
    Eigen::MatrixXd m(2, 2);
    const double off = nd(rng);
    m << 1.0, off, off, 1.0;
    est.push_back(make_estimate({0.0}, {m}));
  }
  const double r = psd_rate(est);
  EXPECT_GT(r, 0.0);
  EXPECT_LT(r, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(est.begin(), est.end(), rng);
    EXPECT_EQ(psd_rate(est), r);
  }
}

TEST(WeightedSelection, Examples) {
  EXPECT_EQ(weighted_selection(0.0, 0.0), 0.0);
  EXPECT_NEAR(weighted_selection(1.0, 0.0), 0.1, 1e-15);
  EXPECT_NEAR(weighted_selection(0.5, 0.2), 0.23, 1e-15);
  EXPECT_THROW(weighted_selection(-1.0, 0.0), ArgumentError);
  EXPECT_THROW(weighted_selection(0.0, std::nan("")), ArgumentError);
}

TEST(WeightedSelection, MonotoneInBothArguments) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ud(0.0, 10.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const double a = ud(rng), b = ud(rng), da = ud(rng), db = ud(rng);
    EXPECT_LE(weighted_selection(a, b), weighted_selection(a + da, b));
    EXPECT_LE(weighted_selection(a, b), weighted_selection(a, b + db));
  }
}

TEST(BiasMse, RelativeAndAbsoluteCurves) {
  const auto c = bias_mse_curve({1, 2}, {{1.0, 3.0}, {2.0, 2.0}}, 2.0);
  EXPECT_FALSE(c.absolute);
  EXPECT_NEAR(c.bias[0], 0.0, 1e-15);
  EXPECT_NEAR(c.mse[0], 0.25, 1e-15);
  EXPECT_NEAR(c.bias[1], 0.0, 1e-15);
  EXPECT_NEAR(c.mse[1], 0.0, 1e-15);
  const auto z = bias_mse_curve({1}, {{-1.0, 3.0}}, 0.0);
  EXPECT_TRUE(z.absolute);
  EXPECT_NEAR(z.bias[0], 1.0, 1e-15);
  EXPECT_NEAR(z.mse[0], 5.0, 1e-15);
  EXPECT_THROW(bias_mse_curve({1, 2}, {{1.0}}, 1.0), ArgumentError);
}

// At N = 0 the estimator is ΔX¹ΔX²/L whose mean is ρ for correlated Brownian
// motion on [0,1]; the relative bias must vanish within sampling error.
TEST(BiasMse, ZeroFrequencyAgainstBrownianClosedForm) {
  const double rho = 0.312;
  const DenseGrid g{0.0, 1.0 / 1000.0, 1000};
  std::vector<double> vals;
  for (int k = 0; k < 2000; ++k) {
    const auto b = simulate_brownian(g, 2, rho, derive_seed({7, static_cast<std::uint64_t>(k)}));
    const auto [x, y] = sample_shifted_pair(identity_panel(b), 500, 0.5);
    FreqParams fp;
    fp.N = 0;
    vals.push_back(estimate_pdf({x, y}, fp, {0.5}).matrices[0](0, 1));
  }
  const auto c = bias_mse_curve({0}, {vals}, rho);
  EXPECT_LT(std::abs(c.bias[0]), 4.0 * c.bias_se[0]);
  // E[(ΔW¹ΔW²)²] = 1 + 2ρ², so relative MSE is (1 + ρ²)/ρ²
  EXPECT_NEAR(c.mse[0] / ((1 + rho * rho) / (rho * rho)), 1.0, 0.15);
}

TEST(ScoreReport, JsonRoundTrip) {
  ScoreReport r;
  r.mise = 1.5e-3;
  r.mise_se = 2e-4;
  r.rmise = 0.12;
  r.psd_rate = 0.97;
  r.psd_path_rate = 0.8;
  r.per_entry_mise = Eigen::MatrixXd::Constant(2, 2, 0.5);
  r.per_entry_mise(0, 1) = 0.25;
  r.rmise_excluded = 3;
  r.n_paths = 100;
  r.n_matrices = 1900;
  nlohmann::json j = r;
  const auto back = nlohmann::json::parse(j.dump()).get<ScoreReport>();
  EXPECT_EQ(back.mise, r.mise);
  EXPECT_EQ(back.mise_se, r.mise_se);
  EXPECT_EQ(back.rmise, r.rmise);
  EXPECT_EQ(back.psd_rate, r.psd_rate);
  EXPECT_EQ(back.psd_path_rate, r.psd_path_rate);
  EXPECT_TRUE(back.per_entry_mise == r.per_entry_mise);
  EXPECT_EQ(back.rmise_excluded, 3u);
  EXPECT_EQ(back.n_paths, 100u);
  EXPECT_EQ(back.n_matrices, 1900u);
}
