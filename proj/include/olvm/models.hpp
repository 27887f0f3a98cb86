#pragma once

// Synthetic latent-variable models and their moment oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dense_tensor.hpp"
#include "implicit_moment.hpp"
#include "random.hpp"
#include "samples.hpp"

namespace olvm {

enum class FactorSource { uniform_sphere, user };

/// Multiview mixture: h ~ categorical(w), x_r | h = (factor_r)_h + zeta * N(0, I).
/// (zeta * sqrt(d) * eps with eps of covariance I/d.)
struct MultiviewSpec {
  std::size_t d = 0;
  std::size_t k = 0;
  std::vector<double> weights;  // empty = uniform 1/k
  double zeta = 0.0;
  bool balanced = false;
  FactorSource factor_source = FactorSource::uniform_sphere;
  std::vector<Matrix> user_factors;  // 3 (multiview) or 1 (spherical GMM) d x k matrices

  std::vector<double> resolved_weights() const {
    if (weights.empty()) return std::vector<double>(k, 1.0 / static_cast<double>(k));
    return weights;
  }

  void validate() const {
    detail::require(d >= 1 && k >= 1, "d and k must be positive");
    detail::require(std::isfinite(zeta) && zeta >= 0.0, "noise scale zeta must be >= 0");
    const auto w = resolved_weights();
    detail::require(w.size() == k, "weight count must equal k");
    double sum = 0.0;
    for (double x : w) {
      detail::require(x > 0.0, "mixture weights must be positive");
      sum += x;
    }
    detail::require(std::abs(sum - 1.0) <= 1e-9, "mixture weights must sum to 1");
  }
};

struct MultiviewData {
  SampleSet samples;
  CPModel truth;
};

namespace detail {

inline std::vector<int> draw_labels(std::size_t n, std::size_t k, const std::vector<double>& w,
                                    bool balanced, std::mt19937_64& rng) {
  std::vector<int> h(n);
  if (balanced) {
    require(n % k == 0, "balanced sampling needs k to divide n");
    for (std::size_t i = 0; i < n; ++i) h[i] = static_cast<int>(i % k);
    std::shuffle(h.begin(), h.end(), rng);
  } else {
    std::discrete_distribution<int> cat(w.begin(), w.end());
    for (auto& x : h) x = cat(rng);
  }
  return h;
}

inline SampleSet draw_mixture_views(const std::vector<Matrix>& factors, std::size_t n,
                                    const std::vector<double>& w, double zeta, bool balanced,
                                    const SeedStream& seeds) {
  const auto k = static_cast<std::size_t>(factors.front().cols());
  auto label_rng = seeds.child(streams::kLabels).engine();
  SampleSet s;
  s.labels = draw_labels(n, k, w, balanced, label_rng);
  for (std::size_t r = 0; r < factors.size(); ++r) {
    auto noise_rng = seeds.child(streams::kNoise).child(r).engine();
    std::normal_distribution<double> normal(0.0, zeta);
    Matrix x(factors[r].rows(), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      x.col(i) = factors[r].col((*s.labels)[i]);
      if (zeta > 0.0)
        for (Eigen::Index j = 0; j < x.rows(); ++j) x(j, i) += normal(noise_rng);
    }
    s.views.push_back(std::move(x));
  }
  return s;
}

inline std::vector<Matrix> resolve_factors(const MultiviewSpec& spec, std::size_t views,
                                           const SeedStream& seeds) {
  if (spec.factor_source == FactorSource::user) {
    require(spec.user_factors.size() == views, "wrong number of user factor matrices");
    for (const auto& f : spec.user_factors)
      require(f.rows() == static_cast<Eigen::Index>(spec.d) &&
                  f.cols() == static_cast<Eigen::Index>(spec.k),
              "user factor matrix must be d x k");
    return spec.user_factors;
  }
  std::vector<Matrix> out;
  for (std::size_t r = 0; r < views; ++r) {
    auto rng = seeds.child(streams::kFactors).child(r).engine();
    out.push_back(unit_sphere_columns(rng, static_cast<Eigen::Index>(spec.d),
                                      static_cast<Eigen::Index>(spec.k)));
  }
  return out;
}

}  // namespace detail

/// Samples from the multiview mixture together with the ground-truth
/// CPModel sum_j w_j a_j (x) b_j (x) c_j.
inline MultiviewData gen_multiview(const MultiviewSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  detail::require(n >= 1, "n must be >= 1");
  const SeedStream seeds(seed);
  auto factors = detail::resolve_factors(spec, 3, seeds);
  const auto w = spec.resolved_weights();
  MultiviewData out;
  out.samples = detail::draw_mixture_views(factors, n, w, spec.zeta, spec.balanced, seeds);
  out.truth = CPModel(3, w, std::move(factors), false);
  return out;
}

/// Spherical Gaussian mixture x = a_h + zeta * N(0, I), single view. The
/// truth is the symmetric model sum_j w_j a_j^(x)3.
inline MultiviewData gen_spherical_gmm(const MultiviewSpec& spec, std::size_t n,
                                       std::uint64_t seed) {
  spec.validate();
  detail::require(n >= 1, "n must be >= 1");
  const SeedStream seeds(seed);
  auto factors = detail::resolve_factors(spec, 1, seeds);
  const auto w = spec.resolved_weights();
  MultiviewData out;
  out.samples = detail::draw_mixture_views(factors, n, w, spec.zeta, spec.balanced, seeds);
  out.truth = CPModel(3, w, std::move(factors), true);
  return out;
}

inline ImplicitMoment moment_multiview(SampleSet samples) {
  return ImplicitMoment::multiview(std::make_shared<const SampleSet>(std::move(samples)));
}

inline ImplicitMoment moment_gmm3(SampleSet samples, double zeta2) {
  return ImplicitMoment::gmm3(std::make_shared<const SampleSet>(std::move(samples)), zeta2);
}

inline ImplicitMoment moment_ica4(SampleSet samples) {
  return ImplicitMoment::ica4(std::make_shared<const SampleSet>(std::move(samples)));
}

/// k-th largest eigenvalue of the empirical covariance; only meaningful in
/// the undercomplete regime, so k > d is refused.
inline double estimate_gmm_variance(const SampleSet& samples, std::size_t k) {
  samples.validate();
  detail::require(samples.view_count() == 1, "variance estimate expects one view");
  detail::require(k >= 1 && k <= samples.dim(), "variance estimate needs 1 <= k <= d");
  const Matrix& x = samples.views[0];
  const Vector mean = x.rowwise().mean();
  const Matrix centered = x.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(samples.n());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(static_cast<Eigen::Index>(samples.dim() - k));
}

// ---------------------------------------------------------------------------
// ICA

enum class SourceLaw { rademacher, uniform, bernoulli_gaussian, gaussian };
enum class MixingSource { uniform_sphere_columns, orthonormal_columns, user };

inline SourceLaw parse_source_law(const std::string& s) {
  if (s == "rademacher") return SourceLaw::rademacher;
  if (s == "uniform") return SourceLaw::uniform;
  if (s == "bernoulli-gaussian") return SourceLaw::bernoulli_gaussian;
  if (s == "gaussian") return SourceLaw::gaussian;
  throw std::invalid_argument("unknown source law '" + s + "'");
}

struct ICASpec {
  std::size_t d = 0;
  std::size_t k = 0;
  MixingSource mixing = MixingSource::uniform_sphere_columns;
  Matrix user_mixing;
  SourceLaw law = SourceLaw::rademacher;
  double sparsity = 1.0;  // expected support size s for bernoulli-gaussian
  /// Bernoulli-Gaussian only: g ~ N(0, k/s) so Var(h_j) = 1. When false,
  /// g ~ N(0, 1) and Var(h_j) = s/k.
  bool unit_variance = true;
  double noise_stddev = 0.0;  // optional additive Gaussian z

  void validate() const {
    detail::require(d >= 1 && k >= 1, "d and k must be positive");
    if (law == SourceLaw::bernoulli_gaussian)
      detail::require(sparsity > 0.0 && sparsity <= static_cast<double>(k),
                      "sparsity s must lie in (0, k]");
    if (mixing == MixingSource::orthonormal_columns)
      detail::require(k <= d, "orthonormal mixing needs k <= d");
    if (mixing == MixingSource::user)
      detail::require(user_mixing.rows() == static_cast<Eigen::Index>(d) &&
                          user_mixing.cols() == static_cast<Eigen::Index>(k),
                      "user mixing matrix must be d x k");
    detail::require(noise_stddev >= 0.0, "noise stddev must be >= 0");
  }

  /// E[h^4] - 3 E[h^2]^2 of one source.
  double kurtosis() const {
    switch (law) {
      case SourceLaw::rademacher: return -2.0;
      case SourceLaw::uniform: return -1.2;
      case SourceLaw::gaussian: return 0.0;
      case SourceLaw::bernoulli_gaussian: {
        const double p = sparsity / static_cast<double>(k);
        if (unit_variance) return 3.0 / p - 3.0;
        return 3.0 * p - 3.0 * p * p;
      }
    }
    return 0.0;
  }
};

struct IcaData {
  SampleSet samples;
  Matrix mixing;               // d x k
  std::vector<double> kappa;   // per-source fourth cumulant
  Matrix sources;              // k x n, kept for diagnostics
};

inline IcaData gen_ica(const ICASpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  detail::require(n >= 1, "n must be >= 1");
  const SeedStream seeds(seed);
  const auto d = static_cast<Eigen::Index>(spec.d);
  const auto k = static_cast<Eigen::Index>(spec.k);
  IcaData out;
  {
    auto rng = seeds.child(streams::kFactors).engine();
    switch (spec.mixing) {
      case MixingSource::uniform_sphere_columns: out.mixing = unit_sphere_columns(rng, d, k); break;
      case MixingSource::orthonormal_columns: out.mixing = random_orthonormal_columns(rng, d, k); break;
      case MixingSource::user: out.mixing = spec.user_mixing; break;
    }
  }
  out.kappa.assign(spec.k, spec.kurtosis());

  auto rng = seeds.child(streams::kSources).engine();
  Matrix h(k, static_cast<Eigen::Index>(n));
  std::uniform_real_distribution<double> unif(-std::sqrt(3.0), std::sqrt(3.0));
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal;
  const double p = spec.sparsity / static_cast<double>(spec.k);
  std::bernoulli_distribution active(std::min(1.0, p));
  const double g_scale = spec.unit_variance ? std::sqrt(1.0 / p) : 1.0;
  for (Eigen::Index i = 0; i < h.cols(); ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      switch (spec.law) {
        case SourceLaw::rademacher: h(j, i) = coin(rng) ? 1.0 : -1.0; break;
        case SourceLaw::uniform: h(j, i) = unif(rng); break;
        case SourceLaw::gaussian: h(j, i) = normal(rng); break;
        case SourceLaw::bernoulli_gaussian: {
          const bool on = active(rng);
          const double g = normal(rng);
          h(j, i) = on ? g_scale * g : 0.0;
          break;
        }
      }
    }
  Matrix x = out.mixing * h;
  if (spec.noise_stddev > 0.0) {
    auto zrng = seeds.child(streams::kNoise).engine();
    std::normal_distribution<double> z(0.0, spec.noise_stddev);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += z(zrng);
  }
  out.samples.views.push_back(std::move(x));
  out.sources = std::move(h);
  return out;
}

/// Population fourth cumulant tensor sum_j kappa_j a_j^(x)4 (zero kappa allowed).
inline DenseTensor ica_population_moment(const Matrix& mixing, const std::vector<double>& kappa) {
  detail::require(static_cast<std::size_t>(mixing.cols()) == kappa.size(),
                  "kappa count must match mixing columns");
  const auto d = static_cast<std::size_t>(mixing.rows());
  const Matrix kr = khatri_rao({&mixing, &mixing, &mixing, &mixing});
  const Vector flat = kr * Eigen::Map<const Vector>(kappa.data(), static_cast<Eigen::Index>(kappa.size()));
  return DenseTensor(4, d, std::vector<double>(flat.data(), flat.data() + flat.size()), false);
}

/// Ground-truth symmetric CP model of an ICA instance (requires nonzero kappa).
inline CPModel ica_truth_model(const IcaData& data) {
  return CPModel(4, data.kappa, {data.mixing}, true);
}

}  // namespace olvm
