#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "test_support.hpp"

using namespace olvm;
using namespace olvm::testing;

namespace {

InitTuple exact_tuple(const CPModel& m, std::size_t j) {
  InitTuple t;
  const int slots = m.symmetric() ? 1 : m.order();
  for (int s = 0; s < slots; ++s) t.push_back(m.factor(s).col(j));
  return t;
}

double tuple_dist(const std::vector<Vector>& v, const CPModel& m, std::size_t j) {
  double worst = 0.0;
  for (std::size_t s = 0; s < v.size(); ++s) worst = std::max(worst, dist(v[s], m.factor(s).col(j)));
  return worst;
}

DecompositionConfig fixed(std::size_t n_iter, std::size_t k = 1) {
  DecompositionConfig cfg;
  cfg.stopping = StoppingMode::fixed_iterations;
  cfg.max_iterations = n_iter;
  cfg.k_target = k;
  return cfg;
}

}  // namespace

TEST(PowerUpdate, OrthonormalComponentsAreFixedPoints) {
  std::mt19937_64 rng(1);
  std::vector<double> w = {1.0, 0.7, 2.5, 0.3, 1.1, 0.9};
  const auto model = orthonormal_model(rng, 9, 6, w);
  const MomentOracle t(cp_to_dense(model));
  for (std::size_t j = 0; j < 6; ++j) {
    std::vector<Matrix> cur;
    for (const auto& v : exact_tuple(model, j)) cur.push_back(one_column(v));
    std::vector<TrialStatus> st;
    const auto next = power_update(t, cur, st);
    for (int s = 0; s < 3; ++s) EXPECT_LE((next[s] - cur[s]).norm(), 1e-12);
  }
}

TEST(PowerTrial, OrthonormalExactInitIsStable) {
  std::mt19937_64 rng(2);
  std::vector<double> w(8);
  for (std::size_t j = 0; j < 8; ++j) w[j] = 0.5 + 0.1 * static_cast<double>(j);
  const auto model = orthonormal_model(rng, 8, 8, w);
  const MomentOracle t(cp_to_dense(model));
  for (std::size_t j = 0; j < 8; ++j) {
    const auto tr = power_trial(t, exact_tuple(model, j), fixed(20));
    ASSERT_TRUE(tr.ok());
    for (int s = 0; s < 3; ++s) EXPECT_LE((tr.vectors[s] - model.factor(s).col(j)).norm(), 1e-10);
    EXPECT_NEAR(tr.weight, w[j], 1e-10);
  }
}

TEST(PowerTrial, RankOneConvergesFast) {
  std::mt19937_64 rng(3);
  const Vector a = random_unit(rng, 7), b = random_unit(rng, 7), c = random_unit(rng, 7);
  const MomentOracle t(cp_to_dense(CPModel(3, {3.0}, {a, b, c})));
  DecompositionConfig cfg;
  cfg.max_iterations = 3;
  cfg.t2 = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto tr = power_trial(t, {random_unit(rng, 7), random_unit(rng, 7), random_unit(rng, 7)}, cfg);
    ASSERT_TRUE(tr.ok());
    EXPECT_LE(tr.iterations, 3u);
    EXPECT_NEAR(std::abs(tr.weight), 3.0, 1e-10);
    EXPECT_LE(dist(tr.vectors[0], a), 1e-10);
    EXPECT_LE(dist(tr.vectors[1], b), 1e-10);
    EXPECT_LE(dist(tr.vectors[2], c), 1e-10);
  }
}

TEST(PowerTrial, SymmetricFourthOrderNegativeWeight) {
  std::mt19937_64 rng(4);
  const Matrix a = random_orthonormal_columns(rng, 6, 3);
  const CPModel m(4, {-2.0, -1.0, 1.5}, {a}, true);
  const MomentOracle t(cp_to_dense(m));
  for (std::size_t j = 0; j < 3; ++j) {
    const auto tr = power_trial(t, {perturb(rng, a.col(j), 0.2)}, fixed(60));
    ASSERT_TRUE(tr.ok());
    EXPECT_LE(dist(tr.vectors[0], a.col(j)), 1e-10);
    EXPECT_NEAR(tr.weight, m.signed_weight(j), 1e-10);
  }
}

TEST(PowerTrial, IteratesStayUnitNorm) {
  std::mt19937_64 rng(5);
  const auto model = random_model(rng, 10, 15);
  const MomentOracle t(cp_to_dense(model));
  for (std::size_t n_iter : {1, 2, 5, 13}) {
    const auto tr = power_trial(t, {random_unit(rng, 10), random_unit(rng, 10), random_unit(rng, 10)},
                                fixed(n_iter));
    ASSERT_TRUE(tr.ok());
    EXPECT_EQ(tr.iterations, n_iter);
    for (const auto& v : tr.vectors) EXPECT_NEAR(v.norm(), 1.0, 1e-12);
  }
}

TEST(PowerTrial, ZeroContractionIsFlagged) {
  const MomentOracle zero(DenseTensor::zeros(3, 4));
  const Vector e = Vector::Unit(4, 0);
  const auto tr = power_trial(zero, {e, e, e}, fixed(5));
  EXPECT_EQ(tr.status, TrialStatus::degenerate);
  const auto z = power_trial(zero, {Vector::Zero(4), e, e}, fixed(5));
  EXPECT_EQ(z.status, TrialStatus::degenerate);
  Vector nan = e;
  nan(1) = std::numeric_limits<double>::quiet_NaN();
  const auto bad = power_trial(zero, {nan, e, e}, fixed(5));
  EXPECT_EQ(bad.status, TrialStatus::not_finite);
  EXPECT_THROW(power_trial(zero, {2.0 * e, e, e}, fixed(5)), std::invalid_argument);
  EXPECT_THROW(power_trial(zero, {e, e}, fixed(5)), std::invalid_argument);
}

TEST(PowerTrial, DecomposeThrowsWhenEveryTrialFails) {
  const MomentOracle zero(DenseTensor::zeros(3, 4));
  DecompositionConfig cfg;
  cfg.initializations = 5;
  EXPECT_THROW(decompose(zero, cfg), std::runtime_error);
}

TEST(StoppingThreshold, Formula) {
  DecompositionConfig cfg;
  cfg.k_target = 10;
  const double l2 = std::log(100.0) * std::log(100.0);
  EXPECT_NEAR(stopping_threshold(cfg, 100, std::nullopt), 1e-7 * l2 * std::sqrt(10.0) / 100.0, 1e-22);
  EXPECT_NEAR(stopping_threshold(cfg, 100, 1000),
              1e-8 * l2 * std::sqrt(10.0 / 1000.0) + 1e-7 * l2 * std::sqrt(10.0) / 100.0, 1e-22);
}

TEST(DecompositionConfig, Validation) {
  const MomentOracle t(DenseTensor::zeros(3, 3));
  auto expect_bad = [&](auto mutate) {
    DecompositionConfig cfg;
    mutate(cfg);
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
  };
  expect_bad([](DecompositionConfig& c) { c.initializations = 0; });
  expect_bad([](DecompositionConfig& c) { c.max_iterations = 0; });
  expect_bad([](DecompositionConfig& c) { c.cluster_epsilon = 0.0; });
  expect_bad([](DecompositionConfig& c) { c.cluster_epsilon = 1.0; });
  expect_bad([](DecompositionConfig& c) { c.t1 = -1.0; });
  expect_bad([](DecompositionConfig& c) { c.k_target = 0; });
  EXPECT_NO_THROW(DecompositionConfig{}.validate());
  EXPECT_THROW(parse_init_method("spectral"), std::invalid_argument);
  EXPECT_EQ(parse_init_method(to_string(InitMethod::svd_slice)), InitMethod::svd_slice);
}

TEST(SvdSliceInit, RankOneIsExact) {
  std::mt19937_64 rng(6);
  const Vector a = random_unit(rng, 6), b = random_unit(rng, 6), c = random_unit(rng, 6);
  const MomentOracle t(cp_to_dense(CPModel(3, {1.7}, {a, b, c})));
  for (int rep = 0; rep < 10; ++rep) {
    const auto init = svd_slice_init(t, rng);
    ASSERT_EQ(init.size(), 3u);
    EXPECT_LE(dist(init[0], a), 1e-12);
    EXPECT_LE(dist(init[1], b), 1e-12);
    EXPECT_LE(dist(init[2], c), 1e-12);
    for (const auto& v : init) EXPECT_NEAR(v.norm(), 1.0, 1e-12);
  }
}

TEST(SvdSliceInit, ZeroTensorFails) {
  std::mt19937_64 rng(7);
  const MomentOracle t(DenseTensor::zeros(3, 4));
  EXPECT_THROW(svd_slice_init(t, rng), std::runtime_error);
}

TEST(SvdSliceInit, OrthonormalModelLandsNearComponents) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> wd(0.5, 1.5);
  std::vector<double> w(8);
  for (auto& x : w) x = wd(rng);
  const auto model = orthonormal_model(rng, 8, 8, w);
  const MomentOracle t(cp_to_dense(model));
  int good = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto r = SeedStream(seed).engine();
    const auto init = svd_slice_init(t, r);
    double best = 1.0;
    for (std::size_t j = 0; j < 8; ++j)
      best = std::min(best, std::max(dist(init[0], model.factor(0).col(j)),
                                     dist(init[1], model.factor(1).col(j))));
    if (best <= 0.5) ++good;
  }
  EXPECT_GE(good, 990);
}

TEST(SvdSliceInit, FourthOrderUsesDoubleContraction) {
  std::mt19937_64 rng(9);
  const Vector u = random_unit(rng, 5);
  const MomentOracle t(cp_to_dense(CPModel(4, {-1.0}, {u}, true)));
  const auto init = svd_slice_init(t, rng);
  ASSERT_EQ(init.size(), 1u);
  EXPECT_LE(dist(init[0], u), 1e-12);
}

TEST(SemiSupervisedInit, NoiselessIsExact) {
  MultiviewSpec spec;
  spec.d = 12;
  spec.k = 4;
  spec.balanced = true;
  const auto data = gen_multiview(spec, 40, 1);
  const auto init = semi_supervised_init(data.samples, 4);
  ASSERT_EQ(init.size(), 4u);
  for (std::size_t j = 0; j < 4; ++j)
    for (int r = 0; r < 3; ++r)
      EXPECT_LE((init[j][r] - data.truth.factor(r).col(j)).norm(), 1e-12);
}

TEST(SemiSupervisedInit, SingleSampleIsNormalized) {
  std::mt19937_64 rng(10);
  SampleSet s;
  for (int r = 0; r < 3; ++r) s.views.push_back(Matrix::Random(5, 2));
  s.labels = std::vector<int>{1, 0};
  const auto init = semi_supervised_init(s, 2);
  for (int r = 0; r < 3; ++r) {
    EXPECT_LE((init[0][r] - s.views[r].col(1).normalized()).norm(), 1e-15);
    EXPECT_LE((init[1][r] - s.views[r].col(0).normalized()).norm(), 1e-15);
  }
}

TEST(SemiSupervisedInit, EmptyClassIsNamed) {
  SampleSet s;
  for (int r = 0; r < 3; ++r) s.views.push_back(Matrix::Ones(3, 3));
  s.labels = std::vector<int>{0, 0, 2};
  try {
    semi_supervised_init(s, 3);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("class 1"), std::string::npos);
  }
  s.labels.reset();
  EXPECT_THROW(semi_supervised_init(s, 3), std::invalid_argument);
}

TEST(SemiSupervisedInit, NoisyMeansConcentrate) {
  MultiviewSpec spec;
  spec.d = 100;
  spec.k = 5;
  spec.zeta = 0.1 / std::sqrt(100.0);
  spec.balanced = true;
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto data = gen_multiview(spec, 250, seed);
    const auto init = semi_supervised_init(data.samples, 5);
    bool all = true;
    for (std::size_t j = 0; j < 5; ++j)
      for (int r = 0; r < 3; ++r) all = all && dist(init[j][r], data.truth.factor(r).col(j)) <= 0.15;
    good += all ? 1 : 0;
  }
  EXPECT_GE(good, 95);
}

TEST(Clustering, DuplicatesOfOneTupleGiveOneCenter) {
  std::mt19937_64 rng(11);
  const auto model = random_model(rng, 6, 1);
  const MomentOracle t(cp_to_dense(model));
  const auto cfg = fixed(5);
  const auto one = power_trial(t, exact_tuple(model, 0), cfg);
  const auto res = cluster_candidates(t, std::vector<PowerTrial>(7, one), cfg);
  ASSERT_EQ(res.centers.size(), 1u);
  EXPECT_FALSE(res.shortfall);
  EXPECT_EQ(res.source_trials[0], 0u);
  EXPECT_LE(tuple_dist(res.centers[0].vectors, model, 0), 1e-12);
}

TEST(Clustering, DuplicatedOrthonormalPairGivesBothComponents) {
  std::mt19937_64 rng(12);
  const auto model = orthonormal_model(rng, 5, 2, {1.0, 0.6});
  const MomentOracle t(cp_to_dense(model));
  const auto cfg = fixed(10, 2);
  std::vector<PowerTrial> tuples;
  for (int rep = 0; rep < 10; ++rep)
    for (std::size_t j = 0; j < 2; ++j) tuples.push_back(power_trial(t, exact_tuple(model, j), cfg));
  const auto res = cluster_candidates(t, tuples, cfg);
  ASSERT_EQ(res.centers.size(), 2u);
  EXPECT_FALSE(res.shortfall);
  EXPECT_LE(tuple_dist(res.centers[0].vectors, model, 0), 1e-12);
  EXPECT_LE(tuple_dist(res.centers[1].vectors, model, 1), 1e-12);
  EXPECT_NEAR(res.centers[0].weight, 1.0, 1e-12);
  EXPECT_NEAR(res.centers[1].weight, 0.6, 1e-12);
}

TEST(Clustering, TiesGoToLowestIndexAndShortfallIsFlagged) {
  std::mt19937_64 rng(13);
  const auto model = orthonormal_model(rng, 4, 2, {1.0, 1.0});
  const MomentOracle t(cp_to_dense(model));
  const auto cfg = fixed(3, 3);
  std::vector<PowerTrial> tuples = {power_trial(t, exact_tuple(model, 1), cfg),
                                    power_trial(t, exact_tuple(model, 0), cfg)};
  tuples[1].weight = tuples[0].weight;
  const auto res = cluster_candidates(t, tuples, cfg);
  EXPECT_EQ(res.source_trials.front(), 0u);
  EXPECT_EQ(res.centers.size(), 2u);
  EXPECT_TRUE(res.shortfall);
  EXPECT_THROW(cluster_candidates(t, {}, cfg), std::invalid_argument);
}

TEST(Decompose, OrthonormalSvdInitRecoversEverything) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> wd(0.8, 1.2);
  std::vector<double> w(16);
  for (auto& x : w) x = wd(rng);
  const auto model = orthonormal_model(rng, 16, 16, w);
  const MomentOracle t(cp_to_dense(model));
  DecompositionConfig cfg;
  cfg.initializations = 200;
  cfg.k_target = 16;
  cfg.init = InitMethod::svd_slice;
  cfg.seed = 3;
  const auto rep = decompose(t, cfg);
  ASSERT_EQ(rep.estimates.k(), 16u);
  const auto match = match_components(rep.estimates, model, 1e-6);
  EXPECT_EQ(match.recovered, 16u);
  for (const auto& m : match.matches)
    EXPECT_NEAR(rep.estimates.weights()[m.estimate], w[m.truth], 1e-6);
  for (const auto& f : rep.estimates.factors())
    for (Eigen::Index j = 0; j < f.cols(); ++j) EXPECT_NEAR(f.col(j).norm(), 1.0, 1e-12);
}

TEST(Decompose, RankOneGivesOneCluster) {
  std::mt19937_64 rng(15);
  const auto model = random_model(rng, 9, 1);
  const MomentOracle t(cp_to_dense(model));
  DecompositionConfig cfg;
  cfg.initializations = 20;
  const auto rep = decompose(t, cfg);
  ASSERT_EQ(rep.estimates.k(), 1u);
  EXPECT_FALSE(rep.shortfall);
  EXPECT_LE(component_dist(rep.estimates, 0, model, 0), 1e-8);
  EXPECT_NEAR(rep.estimates.weights()[0], model.weights()[0], 1e-8);
}

TEST(Decompose, NegativeThirdOrderWeightIsReportedPositive) {
  std::mt19937_64 rng(16);
  const Vector a = random_unit(rng, 5), b = random_unit(rng, 5), c = random_unit(rng, 5);
  const MomentOracle t(cp_to_dense(CPModel(3, {-2.0}, {a, b, c})));
  DecompositionConfig cfg;
  cfg.initializations = 5;
  const auto rep = decompose(t, cfg);
  EXPECT_NEAR(rep.estimates.weights()[0], 2.0, 1e-10);
  EXPECT_GT(rep.estimates.weight_signs()[0], 0);
  const auto back = cp_to_dense(rep.estimates);
  EXPECT_LE(max_abs_diff(back, t.dense_tensor()), 1e-10);
}

TEST(Decompose, SignGaugeIsCanonical) {
  std::mt19937_64 rng(19);
  const Vector a = random_unit(rng, 6), b = random_unit(rng, 6), c = random_unit(rng, 6);
  DecompositionConfig cfg;
  cfg.initializations = 5;
  std::vector<Matrix> seen;
  for (double za : {1.0, -1.0})
    for (double zb : {1.0, -1.0}) {
      const MomentOracle t(cp_to_dense(CPModel(3, {za * zb * 1.5}, {za * a, zb * b, c})));
      const auto rep = decompose(t, cfg);
      for (int s = 0; s < 2; ++s) {
        Eigen::Index at = 0;
        rep.estimates.factor(s).col(0).cwiseAbs().maxCoeff(&at);
        EXPECT_GT(rep.estimates.factor(s)(at, 0), 0.0);
      }
      seen.push_back(rep.estimates.factor(2));
    }
  for (const auto& f : seen) EXPECT_LE((f - seen[0]).cwiseAbs().maxCoeff(), 1e-10);
  const Vector v = random_unit(rng, 4);
  const MomentOracle t4(cp_to_dense(CPModel(4, {-1.0}, {one_column(-v)}, true)));
  const auto rep4 = decompose(t4, cfg);
  Eigen::Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  EXPECT_NEAR(rep4.estimates.factor(0)(at, 0), std::abs(v(at)), 1e-10);
  EXPECT_NEAR(rep4.estimates.signed_weight(0), -1.0, 1e-10);
}

TEST(Decompose, DeterministicForSeed) {
  std::mt19937_64 rng(17);
  const MomentOracle t(cp_to_dense(random_model(rng, 12, 4)));
  DecompositionConfig cfg;
  cfg.initializations = 30;
  cfg.k_target = 4;
  cfg.seed = 99;
  const auto a = decompose(t, cfg), b = decompose(t, cfg);
  EXPECT_EQ(a.estimates.weights(), b.estimates.weights());
  for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(a.estimates.factor(s), b.estimates.factor(s));
  const auto ia = make_initializations(t, cfg), ib = make_initializations(t, cfg);
  for (std::size_t i = 0; i < ia.size(); ++i)
    for (int s = 0; s < 3; ++s) EXPECT_EQ(ia[i][s], ib[i][s]);
}

TEST(Decompose, TwoModeSignFlipsLeaveComponentsInvariant) {
  std::mt19937_64 rng(18);
  const auto model = random_model(rng, 15, 5);
  const MomentOracle t(cp_to_dense(model));
  DecompositionConfig cfg;
  cfg.initializations = 40;
  cfg.k_target = 5;
  cfg.seed = 4;
  const auto inits = make_initializations(t, cfg);
  auto flipped = inits;
  for (auto& tuple : flipped) {
    tuple[0] = -tuple[0];
    tuple[2] = -tuple[2];
  }
  cfg.init = InitMethod::semi_supervised;
  const auto a = decompose(t, cfg, &inits);
  const auto b = decompose(t, cfg, &flipped);
  ASSERT_EQ(a.estimates.k(), b.estimates.k());
  const auto m = match_components(a.estimates, b.estimates, 1e-9);
  EXPECT_EQ(m.recovered, a.estimates.k());
  for (const auto& p : m.matches)
    EXPECT_NEAR(a.estimates.weights()[p.estimate], b.estimates.weights()[p.truth], 1e-9);
}

TEST(Decompose, ImplicitAndDenseIteratesAgree) {
  MultiviewSpec spec;
  spec.d = 6;
  spec.k = 3;
  spec.zeta = 0.05;
  const auto data = gen_multiview(spec, 200, 5);
  const MomentOracle imp(moment_multiview(data.samples));
  const MomentOracle den(imp.densify());
  for (std::size_t n_iter : {1, 4, 25}) {
    DecompositionConfig cfg = fixed(n_iter, 3);
    cfg.initializations = 12;
    cfg.seed = 8;
    const auto ti = power_trials(imp, make_initializations(imp, cfg), cfg);
    const auto td = power_trials(den, make_initializations(den, cfg), cfg);
    for (std::size_t i = 0; i < ti.size(); ++i) {
      for (int s = 0; s < 3; ++s) EXPECT_LE((ti[i].vectors[s] - td[i].vectors[s]).norm(), 1e-10);
      EXPECT_NEAR(ti[i].weight, td[i].weight, 1e-10);
    }
  }
}

TEST(Decompose, IncoherentResidualScalesWithSqrtKOverD) {
  // Calibrate C on k = 100 and check it carries over to the overcomplete k = 200.
  const std::size_t d = 100;
  auto residuals = [&](std::size_t k, std::uint64_t first_seed) {
    std::vector<double> out;
    for (std::uint64_t seed = first_seed; seed < first_seed + 25; ++seed) {
      auto rng = SeedStream(seed).engine();
      const auto model = CPModel(3, std::vector<double>(k, 1.0 / static_cast<double>(k)),
                                 {unit_sphere_columns(rng, d, k), unit_sphere_columns(rng, d, k),
                                  unit_sphere_columns(rng, d, k)});
      const MomentOracle t(cp_to_dense(model));
      InitTuple init;
      for (int s = 0; s < 3; ++s) init.push_back(perturb(rng, model.factor(s).col(0), 0.3));
      const auto tr = power_trial(t, init, fixed(100));
      out.push_back(tuple_dist(tr.vectors, model, 0) * static_cast<double>(d) /
                    std::sqrt(static_cast<double>(k)));
    }
    return out;
  };
  const auto cal = residuals(100, 1000);
  const double c = *std::max_element(cal.begin(), cal.end());
  const auto test = residuals(200, 2000);
  EXPECT_LE(median(test), 1.5 * c);
  std::size_t within = 0;
  for (double r : test) within += r <= 2.0 * c ? 1 : 0;
  EXPECT_GE(within, 22u);
}

TEST(Decompose, IncoherentClusteringRecoversMostComponents) {
  const std::size_t d = 100, k = 50;
  std::vector<double> recovered;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto rng = SeedStream(seed).engine();
    const CPModel model(3, std::vector<double>(k, 1.0 / static_cast<double>(k)),
                        {unit_sphere_columns(rng, d, k), unit_sphere_columns(rng, d, k),
                         unit_sphere_columns(rng, d, k)});
    const MomentOracle t(cp_to_dense(model));
    DecompositionConfig cfg;
    cfg.initializations = 2000;
    cfg.k_target = k;
    cfg.seed = seed;
    const auto rep = decompose(t, cfg);
    recovered.push_back(static_cast<double>(
        match_components(rep.estimates, model, default_recovery_threshold(d, k)).recovered));
  }
  EXPECT_GE(median(recovered), 45.0);
}

TEST(RunReportIO, RoundTrip) {
  std::mt19937_64 rng(19);
  const MomentOracle t(cp_to_dense(random_model(rng, 7, 3)));
  DecompositionConfig cfg;
  cfg.initializations = 15;
  cfg.k_target = 3;
  const auto rep = decompose(t, cfg);
  std::stringstream ss;
  write_run_report(ss, rep);
  const auto back = read_run_report(ss);
  ASSERT_EQ(back.estimates.k(), rep.estimates.k());
  EXPECT_EQ(back.estimates.weights(), rep.estimates.weights());
  for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(back.estimates.factor(s), rep.estimates.factor(s));
  EXPECT_EQ(back.component_iterations, rep.component_iterations);
  EXPECT_EQ(back.shortfall, rep.shortfall);

  const CPModel sym(4, {-1.5, 0.5}, {random_orthonormal_columns(rng, 4, 2)}, true);
  std::stringstream s2;
  write_run_report(s2, model_record(sym));
  const auto b2 = read_run_report(s2);
  EXPECT_TRUE(b2.estimates.symmetric());
  EXPECT_EQ(b2.estimates.signed_weight(0), -1.5);
  EXPECT_EQ(b2.estimates.factor(0), sym.factor(0));

  std::stringstream bad("runreport order=3 d=2\n");
  EXPECT_THROW(read_run_report(bad), std::invalid_argument);
}
