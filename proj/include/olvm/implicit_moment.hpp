#pragma once

#include <algorithm>

// Sample-backed moment tensors. Contractions are computed straight from the
// d x n view matrices, e.g. for the multiview third moment
//
//   T(I, b, c) = (1/n) X_1 ((X_2^T b) * (X_3^T c))      (* = Hadamard)
//
// so the d^3 (or d^4) tensor is never formed unless densify() is called.

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "dense_tensor.hpp"
#include "samples.hpp"

namespace olvm {

enum class MomentKind { multiview3, gmm3, ica4 };

inline std::string to_string(MomentKind k) {
  switch (k) {
    case MomentKind::multiview3: return "multiview-3";
    case MomentKind::gmm3: return "gmm-3-modified";
    case MomentKind::ica4: return "ica-4-modified";
  }
  return "?";
}

class ImplicitMoment {
 public:
  /// (1/n) sum_i x1^i (x) x2^i (x) x3^i.
  static ImplicitMoment multiview(std::shared_ptr<const SampleSet> samples) {
    check_samples(samples, 3);
    return ImplicitMoment(MomentKind::multiview3, std::move(samples));
  }

  /// Empirical third moment minus zeta^2 sum_i (M1 (x) e_i (x) e_i + two
  /// permutations), M1 the empirical mean.
  static ImplicitMoment gmm3(std::shared_ptr<const SampleSet> samples, double zeta2) {
    check_samples(samples, 1);
    detail::require(std::isfinite(zeta2) && zeta2 >= 0.0, "variance zeta^2 must be nonnegative");
    ImplicitMoment m(MomentKind::gmm3, std::move(samples));
    m.zeta2_ = zeta2;
    m.mean_ = m.x(0).rowwise().mean();
    return m;
  }

  /// Empirical fourth moment minus the Gaussian part built from the
  /// empirical second moment W = (1/n) sum x x^T.
  static ImplicitMoment ica4(std::shared_ptr<const SampleSet> samples) {
    check_samples(samples, 1);
    ImplicitMoment m(MomentKind::ica4, std::move(samples));
    const Matrix& x = m.x(0);
    m.cov_ = (x * x.transpose()) / static_cast<double>(m.n());
    return m;
  }

  MomentKind kind() const { return kind_; }
  int order() const { return kind_ == MomentKind::ica4 ? 4 : 3; }
  bool symmetric() const { return kind_ != MomentKind::multiview3; }
  std::size_t dim() const { return samples_->dim(); }
  std::size_t n() const { return samples_->n(); }
  const SampleSet& samples() const { return *samples_; }
  double zeta2() const { return zeta2_; }
  const Vector& mean() const { return mean_; }
  const Matrix& second_moment() const { return cov_; }

  /// Order 3: contraction of every mode but `mode`; p and q are d x B batches
  /// for the remaining modes in mode order.
  Matrix contract_mode(int mode, const Matrix& p, const Matrix& q) const {
    require_order(3);
    const double inv_n = 1.0 / static_cast<double>(n());
    if (kind_ == MomentKind::multiview3) {
      const int r0 = mode == 0 ? 1 : 0;
      const int r1 = mode == 2 ? 1 : 2;
      const Matrix pp = x(r0).transpose() * p;
      const Matrix qq = x(r1).transpose() * q;
      return (x(mode) * pp.cwiseProduct(qq)) * inv_n;
    }
    // gmm3 is symmetric, the mode is irrelevant.
    const Matrix& xs = x(0);
    const Matrix pp = xs.transpose() * p;
    const Matrix qq = xs.transpose() * q;
    Matrix out = (xs * pp.cwiseProduct(qq)) * inv_n;
    if (zeta2_ != 0.0) {
      const Eigen::RowVectorXd pq = p.cwiseProduct(q).colwise().sum();
      const Eigen::RowVectorXd mq = mean_.transpose() * q;
      const Eigen::RowVectorXd mp = mean_.transpose() * p;
      out -= zeta2_ * (mean_ * pq + p * mq.asDiagonal() + q * mp.asDiagonal());
    }
    return out;
  }

  /// Order 3: T(a_b, b_b, c_b) for every column b.
  Vector full(const Matrix& a, const Matrix& b, const Matrix& c) const {
    require_order(3);
    return contract_mode(2, a, b).cwiseProduct(c).colwise().sum().transpose();
  }

  /// Order 4 (symmetric): T(I, u, u, u) for every column u.
  Matrix contract_sym(const Matrix& u) const {
    require_order(4);
    const Matrix& xs = x(0);
    const double inv_n = 1.0 / static_cast<double>(n());
    const Matrix proj = xs.transpose() * u;
    const Matrix wu = cov_ * u;
    const Eigen::RowVectorXd uwu = u.cwiseProduct(wu).colwise().sum();
    return (xs * proj.array().cube().matrix()) * inv_n - 3.0 * wu * uwu.asDiagonal();
  }

  /// Order 4 (symmetric): T(u, u, u, u) for every column u.
  Vector full_sym(const Matrix& u) const {
    require_order(4);
    const double inv_n = 1.0 / static_cast<double>(n());
    const Matrix proj = x(0).transpose() * u;
    const Eigen::RowVectorXd fourth = proj.array().square().square().colwise().sum().matrix() * inv_n;
    const Eigen::RowVectorXd uwu = u.cwiseProduct(cov_ * u).colwise().sum();
    return (fourth - 3.0 * uwu.cwiseProduct(uwu)).transpose();
  }

  /// T(I, I, theta) for order 3, T(I, I, theta, theta) for order 4.
  Matrix slice(const Vector& theta) const {
    detail::require(static_cast<std::size_t>(theta.size()) == dim(), "theta length mismatch");
    const double inv_n = 1.0 / static_cast<double>(n());
    switch (kind_) {
      case MomentKind::multiview3: {
        const Vector s = x(2).transpose() * theta;
        return x(0) * s.asDiagonal() * x(1).transpose() * inv_n;
      }
      case MomentKind::gmm3: {
        const Matrix& xs = x(0);
        const Vector s = xs.transpose() * theta;
        Matrix out = xs * s.asDiagonal() * xs.transpose() * inv_n;
        out -= zeta2_ * (mean_ * theta.transpose() + theta * mean_.transpose() +
                         mean_.dot(theta) * Matrix::Identity(dim(), dim()));
        return out;
      }
      case MomentKind::ica4: {
        const Matrix& xs = x(0);
        const Vector s = (xs.transpose() * theta).array().square();
        const Vector wt = cov_ * theta;
        return xs * s.asDiagonal() * xs.transpose() * inv_n - cov_ * theta.dot(wt) -
               2.0 * wt * wt.transpose();
      }
    }
    return {};
  }

  /// Materializes the moment; O(n d^p) time and d^p memory.
  DenseTensor densify() const {
    const std::size_t d = dim();
    const int p = order();
    const auto dd = static_cast<Eigen::Index>(d);
    std::vector<double> entries(detail::ipow(d, p), 0.0);
    // Last-mode unfolding viewed column-major: element (i_last, rest).
    Eigen::Map<Matrix> last(entries.data(), dd, static_cast<Eigen::Index>(entries.size() / d));
    const double inv_n = 1.0 / static_cast<double>(n());
    constexpr Eigen::Index kBlock = 512;
    const Eigen::Index total = static_cast<Eigen::Index>(n());
    for (Eigen::Index start = 0; start < total; start += kBlock) {
      const Eigen::Index len = std::min(kBlock, total - start);
      if (kind_ == MomentKind::multiview3) {
        const Matrix a = x(0).middleCols(start, len);
        const Matrix b = x(1).middleCols(start, len);
        last.noalias() += x(2).middleCols(start, len) * khatri_rao({&a, &b}).transpose();
      } else {
        const Matrix a = x(0).middleCols(start, len);
        const Matrix kr = p == 3 ? khatri_rao({&a, &a}) : khatri_rao({&a, &a, &a});
        last.noalias() += a * kr.transpose();
      }
    }
    last *= inv_n;

    if (kind_ == MomentKind::gmm3 && zeta2_ != 0.0) {
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          // M1 (x) e_j (x) e_j and its two permutations.
          entries[(i * d + j) * d + j] -= zeta2_ * mean_(i);
          entries[(j * d + i) * d + j] -= zeta2_ * mean_(i);
          entries[(j * d + j) * d + i] -= zeta2_ * mean_(i);
        }
    }
    if (kind_ == MomentKind::ica4) {
      const Matrix& w = cov_;
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
          for (std::size_t c = 0; c < d; ++c)
            for (std::size_t e = 0; e < d; ++e)
              entries[((a * d + b) * d + c) * d + e] -=
                  w(a, b) * w(c, e) + w(a, c) * w(b, e) + w(a, e) * w(b, c);
      std::size_t idx[4];
      for (std::size_t off = 0; off < entries.size(); ++off) {
        detail::unravel(off, d, 4, idx);
        std::sort(idx, idx + 4);
        entries[off] = entries[((idx[0] * d + idx[1]) * d + idx[2]) * d + idx[3]];
      }
      return DenseTensor(p, d, std::move(entries), true);
    }
    return DenseTensor(p, d, std::move(entries), false);
  }

 private:
  ImplicitMoment(MomentKind kind, std::shared_ptr<const SampleSet> samples)
      : kind_(kind), samples_(std::move(samples)) {}

  static void check_samples(const std::shared_ptr<const SampleSet>& s, std::size_t views) {
    detail::require(s != nullptr, "null sample set");
    s->validate();
    detail::require(s->n() >= 1, "moment needs at least one sample");
    detail::require(s->view_count() == views,
                    "moment expects " + std::to_string(views) + " view(s)");
  }

  void require_order(int p) const {
    if (order() != p)
      throw std::invalid_argument("operation needs an order-" + std::to_string(p) + " moment");
  }

  const Matrix& x(int view) const { return samples_->views[view]; }

  MomentKind kind_;
  std::shared_ptr<const SampleSet> samples_;
  double zeta2_ = 0.0;
  Vector mean_;
  Matrix cov_;
};

}  // namespace olvm
