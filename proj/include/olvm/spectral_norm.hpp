#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dense_tensor.hpp"
#include "random.hpp"

namespace olvm {

/// Batched contractions of a dense tensor: every mode unfolding is built once,
/// then T(..., I, ...) for B vector tuples is one GEMM against a Khatri-Rao
/// product.
class DenseContractor {
 public:
  explicit DenseContractor(const DenseTensor& t) : order_(t.order()), dim_(t.dim()) {
    const int distinct = t.symmetric() ? 1 : t.order();
    for (int m = 0; m < distinct; ++m) unfoldings_.push_back(t.unfolding(m));
  }

  int order() const { return order_; }
  std::size_t dim() const { return dim_; }

  /// `others[r]` is a d x B matrix for the r-th remaining mode (mode order).
  Matrix contract_mode(int mode, const std::vector<const Matrix*>& others) const {
    const Matrix& unf = unfoldings_[unfoldings_.size() == 1 ? 0 : mode];
    return unf * khatri_rao(others);
  }

 private:
  int order_;
  std::size_t dim_;
  std::vector<Matrix> unfoldings_;
};

struct SpectralNormEstimate {
  /// max over restarts of |T(u_1, ..., u_p)|; a lower bound on the spectral norm.
  double value = 0.0;
  double restart_mean = 0.0;
  double restart_stddev = 0.0;
  std::vector<double> restart_values;
};

struct SpectralNormOptions {
  std::size_t restarts = 64;
  std::size_t iterations = 100;
  double relative_tolerance = 1e-10;
  std::uint64_t seed = 0;
};

/// Alternating normalized contractions from random unit starts. Each update
/// sets one vector to the maximizer of |T| given the others, so the objective
/// never decreases along a restart. Restart r draws from stream r, so adding
/// restarts can only raise the estimate.
inline SpectralNormEstimate spectral_norm_estimate(const DenseTensor& t,
                                                   const SpectralNormOptions& opt = {}) {
  detail::require(opt.restarts >= 1, "spectral_norm_estimate needs at least one restart");
  const int p = t.order();
  const auto d = static_cast<Eigen::Index>(t.dim());
  const auto b = static_cast<Eigen::Index>(opt.restarts);
  const SeedStream root = SeedStream(opt.seed).child(streams::kSpectralRestarts);

  std::vector<Matrix> u(p, Matrix(d, b));
  for (Eigen::Index r = 0; r < b; ++r) {
    auto rng = root.child(static_cast<std::uint64_t>(r)).engine();
    for (int m = 0; m < p; ++m) u[m].col(r) = unit_sphere_vector(rng, d);
  }

  DenseContractor con(t);
  auto contract = [&](int mode) {
    std::vector<const Matrix*> others;
    for (int m = 0; m < p; ++m)
      if (m != mode) others.push_back(&u[m]);
    return con.contract_mode(mode, others);
  };

  // Each restart stops on its own relative change, so its trajectory does not
  // depend on which other restarts share the batch.
  Eigen::ArrayXd value = Eigen::ArrayXd::Zero(b);
  std::vector<bool> done(static_cast<std::size_t>(b), false);
  for (std::size_t it = 0; it < opt.iterations; ++it) {
    Eigen::ArrayXd next = value;
    for (int m = 0; m < p; ++m) {
      Matrix g = contract(m);
      for (Eigen::Index r = 0; r < b; ++r) {
        if (done[r]) continue;
        const double norm = g.col(r).norm();
        if (norm > 0.0) u[m].col(r) = g.col(r) / norm;
        next(r) = norm;
      }
    }
    bool all = true;
    for (Eigen::Index r = 0; r < b; ++r) {
      if (done[r]) continue;
      const double change = std::abs(next(r) - value(r)) / std::max(next(r), 1e-300);
      if (change <= opt.relative_tolerance) done[r] = true;
      all = all && done[r];
    }
    value = next;
    if (all) break;
  }

  // Final objective evaluated at the returned vectors.
  const Matrix g = contract(p - 1);
  SpectralNormEstimate est;
  est.restart_values.resize(b);
  for (Eigen::Index r = 0; r < b; ++r)
    est.restart_values[r] = std::abs(g.col(r).dot(u[p - 1].col(r)));
  est.value = *std::max_element(est.restart_values.begin(), est.restart_values.end());
  double mean = 0.0;
  for (double v : est.restart_values) mean += v;
  mean /= static_cast<double>(b);
  double var = 0.0;
  for (double v : est.restart_values) var += (v - mean) * (v - mean);
  est.restart_mean = mean;
  est.restart_stddev = b > 1 ? std::sqrt(var / static_cast<double>(b - 1)) : 0.0;
  return est;
}

}  // namespace olvm
