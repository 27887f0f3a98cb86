#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "test_support.hpp"

using namespace olvm;
using namespace olvm::testing;

namespace {

/// Best total component_dist over all bijections (k <= 6).
double exhaustive_total(const CPModel& est, const CPModel& truth) {
  std::vector<std::size_t> perm(truth.k());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < est.k(); ++i) s += component_dist(est, i, truth, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

CPModel permuted(const CPModel& m, const std::vector<Eigen::Index>& perm) {
  std::vector<double> w;
  std::vector<Matrix> f(m.factors().size());
  for (auto& x : f) x.resize(static_cast<Eigen::Index>(m.dim()), static_cast<Eigen::Index>(perm.size()));
  for (std::size_t c = 0; c < perm.size(); ++c) {
    w.push_back(m.signed_weight(perm[c]));
    for (std::size_t s = 0; s < f.size(); ++s) f[s].col(c) = m.factors()[s].col(perm[c]);
  }
  return CPModel(m.order(), w, f, m.symmetric());
}

RunReport report_for(const CPModel& est, std::vector<std::size_t> iterations = {}) {
  RunReport r = model_record(est);
  for (std::size_t it : iterations) r.trials.push_back({it, 1.0, true, TrialStatus::ok});
  return r;
}

}  // namespace

TEST(Dist, Examples) {
  const Vector u = Vector::Unit(3, 0);
  EXPECT_EQ(dist(u, u), 0.0);
  EXPECT_EQ(dist(u, -u), 0.0);
  EXPECT_NEAR(dist(3.0 * u, u), 0.0, 1e-15);
  EXPECT_LE(dist(Vector::Constant(3, 0.1), Vector::Constant(3, 7.0)), 1e-15);
  EXPECT_EQ(dist(Vector::Unit(3, 0), Vector::Unit(3, 1)), 1.0);
  Vector h(2);
  h << 1.0, 1.0;
  EXPECT_NEAR(dist(h / std::sqrt(2.0), Vector::Unit(2, 0)), std::sqrt(0.5), 1e-15);
  EXPECT_THROW(dist(Vector::Zero(3), u), std::invalid_argument);
  EXPECT_THROW(dist(Vector::Unit(2, 0), u), std::invalid_argument);
}

TEST(Dist, Identities) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 500; ++rep) {
    Vector u(6), v(6);
    for (int i = 0; i < 6; ++i) {
      u(i) = g(rng);
      v(i) = g(rng);
    }
    EXPECT_NEAR(dist(u, v), dist(v, u), 1e-12);
    const double c = u.dot(v) / (u.norm() * v.norm());
    EXPECT_NEAR(dist(u, v) * dist(u, v) + c * c, 1.0, 1e-12);
    const Vector a = u.normalized(), b = v.normalized();
    EXPECT_LE(std::min((a - b).norm(), (-a - b).norm()), std::sqrt(2.0) * dist(a, b) + 1e-12);
    EXPECT_GE(dist(u, v), 0.0);
    EXPECT_LE(dist(u, v), 1.0);
  }
}

TEST(Matching, PermutedTruthMatchesExactly) {
  std::mt19937_64 rng(2);
  const auto truth = random_model(rng, 10, 5);
  const auto est = permuted(truth, {3, 0, 4, 1, 2});
  const auto m = match_components(est, truth);
  EXPECT_EQ(m.recovered, 5u);
  EXPECT_EQ(m.recovery_rate, 1.0);
  std::vector<bool> seen(5, false);
  const std::vector<std::size_t> expected = {3, 0, 4, 1, 2};
  for (const auto& p : m.matches) {
    EXPECT_LE(p.dist, 1e-12);
    EXPECT_EQ(p.truth, expected[p.estimate]);
    EXPECT_FALSE(seen[p.truth]);
    seen[p.truth] = true;
  }
}

TEST(Matching, TwoModeSignFlipsAreTolerated) {
  std::mt19937_64 rng(3);
  const auto truth = random_model(rng, 8, 4);
  auto f = truth.factors();
  f[0] = -f[0];
  f[1] = -f[1];
  const CPModel est(3, truth.signed_weights(), f);
  const auto m = match_components(est, truth, 1e-12);
  EXPECT_EQ(m.recovered, 4u);
  for (const auto& p : m.matches) {
    EXPECT_EQ(p.estimate, p.truth);
    EXPECT_LE(p.dist, 1e-12);
  }
}

TEST(Matching, GreedyEqualsExhaustiveOnSeparatedInstances) {
  std::mt19937_64 rng(4);
  for (std::size_t k : {2, 3, 4, 5, 6}) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto truth = random_model(rng, 40, k);
      std::vector<Matrix> f = truth.factors();
      for (auto& m : f)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) = perturb(rng, m.col(j), 0.05);
      std::vector<Eigen::Index> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto est = permuted(CPModel(3, truth.signed_weights(), f), perm);
      const auto m = match_components(est, truth);
      double total = 0.0;
      for (const auto& p : m.matches) total += p.dist;
      EXPECT_NEAR(total, exhaustive_total(est, truth), 1e-12) << "k=" << k;
    }
  }
}

TEST(Matching, InvariantToEstimatePermutation) {
  std::mt19937_64 rng(5);
  const auto truth = random_model(rng, 6, 4);
  const auto est = random_model(rng, 6, 4);
  const auto a = match_components(est, truth, 0.9);
  const auto b = match_components(permuted(est, {2, 3, 1, 0}), truth, 0.9);
  EXPECT_EQ(a.recovered, b.recovered);
  std::vector<double> da, db;
  for (const auto& p : a.matches) da.push_back(p.dist);
  for (const auto& p : b.matches) db.push_back(p.dist);
  std::sort(da.begin(), da.end());
  std::sort(db.begin(), db.end());
  ASSERT_EQ(da.size(), db.size());
  for (std::size_t i = 0; i < da.size(); ++i) EXPECT_NEAR(da[i], db[i], 1e-15);
}

TEST(Matching, FewerEstimatesThanTruth) {
  std::mt19937_64 rng(6);
  const auto truth = random_model(rng, 9, 5);
  const auto est = permuted(truth, {4, 1});
  const auto m = match_components(est, truth);
  EXPECT_EQ(m.matches.size(), 2u);
  EXPECT_EQ(m.recovered, 2u);
  EXPECT_DOUBLE_EQ(m.recovery_rate, 0.4);
  EXPECT_EQ(match_components(CPModel{}, truth).recovered, 0u);
}

TEST(Matching, SymmetricModelsUseOneMode) {
  std::mt19937_64 rng(7);
  const Matrix a = random_orthonormal_columns(rng, 5, 3);
  const CPModel truth(4, {-2.0, -2.0, -2.0}, {a}, true);
  const CPModel est(4, {-1.9, -2.1, -2.0}, {Matrix(-a)}, true);
  EXPECT_EQ(match_components(est, truth).recovered, 3u);
}

TEST(DefaultThreshold, Floor) {
  EXPECT_EQ(default_recovery_threshold(1000, 1), 0.05);
  EXPECT_NEAR(default_recovery_threshold(100, 100), 0.3, 1e-15);
}

TEST(SquareError, HandComputed) {
  const double delta = 0.2;
  const Vector a = Vector::Unit(4, 0);
  Vector ah = a + delta * Vector::Unit(4, 2);
  ah.normalize();
  const CPModel truth(3, {1.0}, {a, a, a});
  const CPModel est(3, {1.0}, {ah, ah, ah});
  // |a - ah|^2 = 2 - 2 cos(theta) with tan(theta) = delta.
  const double expect = 2.0 - 2.0 / std::sqrt(1.0 + delta * delta);
  EXPECT_NEAR(square_error(est, 0, truth, 0), expect, 1e-15);
  const CPModel flipped(3, {1.0}, {Vector(-ah), Vector(-ah), ah});
  EXPECT_NEAR(square_error(flipped, 0, truth, 0), expect, 1e-15);
  const CPModel one_mode(3, {1.0}, {ah, a, a});
  EXPECT_NEAR(square_error(one_mode, 0, truth, 0), expect / 3.0, 1e-15);
}

TEST(TableRow, ExactEstimatesGiveZero) {
  std::mt19937_64 rng(8);
  const auto truth = random_model(rng, 10, 4);
  std::vector<RunEvaluation> runs;
  runs.push_back(evaluate_run(report_for(truth, {4, 6}), truth));
  runs.push_back(evaluate_run(report_for(permuted(truth, {1, 0, 3, 2}), {8}), truth));
  const auto row = table_row(runs);
  EXPECT_FALSE(row.empty);
  EXPECT_EQ(row.k, 4u);
  EXPECT_EQ(row.matched, 8u);
  EXPECT_NEAR(row.avg_square_error, 0.0, 1e-28);
  EXPECT_NEAR(row.avg_weight_error, 0.0, 1e-28);
  EXPECT_DOUBLE_EQ(row.avg_iterations, 6.0);
}

TEST(TableRow, WeightErrorAndNormalization) {
  const Vector a = Vector::Unit(3, 0), b = Vector::Unit(3, 1);
  const CPModel truth(3, {0.5, 0.5}, {Matrix((Matrix(3, 2) << a, b).finished()),
                                      Matrix((Matrix(3, 2) << a, b).finished()),
                                      Matrix((Matrix(3, 2) << a, b).finished())});
  const CPModel est(3, {0.6, 0.5}, truth.factors());
  const auto row = table_row({evaluate_run(report_for(est), truth)});
  EXPECT_NEAR(row.avg_weight_error, 0.5 * 0.04, 1e-15);
  EXPECT_NEAR(row.avg_weight_error_per_k, 0.5 * 0.04 / 2.0, 1e-15);
}

TEST(TableRow, NoMatchesIsFlagged) {
  const CPModel truth(3, {1.0}, {Matrix(Vector::Unit(3, 0)), Matrix(Vector::Unit(3, 0)),
                                 Matrix(Vector::Unit(3, 0))});
  const CPModel far(3, {1.0}, {Matrix(Vector::Unit(3, 1)), Matrix(Vector::Unit(3, 1)),
                               Matrix(Vector::Unit(3, 1))});
  const auto row = table_row({evaluate_run(report_for(far), truth)});
  EXPECT_TRUE(row.empty);
  EXPECT_THROW(table_row({}), std::invalid_argument);
}

TEST(TableRow, CsvColumns) {
  std::stringstream ss;
  write_table_header(ss);
  TableRow r;
  r.k = 10;
  r.avg_square_error = 1.5e-3;
  r.avg_iterations = 9.5;
  write_table_row(ss, r);
  std::string header, line;
  std::getline(ss, header);
  std::getline(ss, line);
  EXPECT_EQ(header, "k,avg_square_error,avg_weight_error,avg_iterations,avg_square_error/k,avg_weight_error/k");
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
  EXPECT_EQ(line.substr(0, 3), "10,");
}

TEST(RecoveryCurve, RankOneHitsOneAtFirstTrial) {
  std::mt19937_64 rng(9);
  const auto truth = random_model(rng, 8, 1);
  const MomentOracle t(cp_to_dense(truth));
  DecompositionConfig cfg;
  const auto curve = recovery_curve(t, truth, cfg, {1, 2, 5});
  for (const auto& p : curve) EXPECT_EQ(p.rate, 1.0);
  EXPECT_THROW(recovery_curve(t, truth, cfg, {}), std::invalid_argument);
  EXPECT_THROW(recovery_curve(t, truth, cfg, {3, 2}), std::invalid_argument);
}

TEST(RecoveryCurve, MonotoneInL) {
  std::mt19937_64 rng(10);
  const auto truth = random_model(rng, 20, 15);
  const MomentOracle t(cp_to_dense(truth));
  DecompositionConfig cfg;
  cfg.k_target = 15;
  cfg.seed = 5;
  const auto curve = recovery_curve(t, truth, cfg, {1, 2, 4, 8, 16, 32, 64, 128},
                                    default_recovery_threshold(20, 15));
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_GE(curve[i].rate, curve[i - 1].rate);
  EXPECT_GT(curve.back().rate, 0.0);
}
