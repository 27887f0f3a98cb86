#pragma once

// Dense order-3 / order-4 tensors with equal mode sizes, CP models, and the
// multilinear contractions used by the power updates.
//
// Entry layout is canonical lexicographic with the last index fastest:
//   T(i0, i1, ..., ip-1) lives at ((i0 * d + i1) * d + ...) * d + ip-1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace olvm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

inline std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int e = 0; e < exp; ++e) r *= base;
  return r;
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Multi-index of a flat offset, most significant mode first.
inline void unravel(std::size_t offset, std::size_t d, int order, std::size_t* idx) {
  for (int m = order - 1; m >= 0; --m) {
    idx[m] = offset % d;
    offset /= d;
  }
}

}  // namespace detail

class DenseTensor {
 public:
  DenseTensor() = default;

  /// Takes ownership of `entries` in canonical order. Throws
  /// std::invalid_argument if the size is wrong, an entry is not finite, or
  /// `symmetric` is claimed but entries differ under some index permutation
  /// by more than 1e-12.
  DenseTensor(int order, std::size_t dim, std::vector<double> entries,
              bool symmetric = false)
      : order_(order), dim_(dim), entries_(std::move(entries)), symmetric_(symmetric) {
    detail::require(order == 3 || order == 4, "tensor order must be 3 or 4");
    detail::require(dim >= 1, "tensor dimension must be positive");
    detail::require(entries_.size() == detail::ipow(dim, order),
                    "entry count does not match dims");
    for (double v : entries_)
      detail::require(std::isfinite(v), "tensor entries must be finite");
    if (symmetric_) check_symmetry();
  }

  static DenseTensor zeros(int order, std::size_t dim, bool symmetric = false) {
    return DenseTensor(order, dim, std::vector<double>(detail::ipow(dim, order), 0.0),
                       symmetric);
  }

  int order() const { return order_; }
  std::size_t dim() const { return dim_; }
  std::vector<std::size_t> dims() const { return std::vector<std::size_t>(order_, dim_); }
  std::size_t size() const { return entries_.size(); }
  bool symmetric() const { return symmetric_; }
  const std::vector<double>& entries() const { return entries_; }

  double operator()(std::size_t i, std::size_t j, std::size_t l) const {
    return entries_[(i * dim_ + j) * dim_ + l];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t l, std::size_t m) const {
    return entries_[((i * dim_ + j) * dim_ + l) * dim_ + m];
  }

  /// Mode-`mode` unfolding: d x d^(p-1), column index runs over the remaining
  /// modes in increasing mode order, last fastest.
  Matrix unfolding(int mode) const {
    const std::size_t cols = detail::ipow(dim_, order_ - 1);
    Matrix out(dim_, cols);
    std::size_t idx[4];
    for (std::size_t off = 0; off < entries_.size(); ++off) {
      detail::unravel(off, dim_, order_, idx);
      std::size_t c = 0;
      for (int m = 0; m < order_; ++m)
        if (m != mode) c = c * dim_ + idx[m];
      out(idx[mode], c) = entries_[off];
    }
    return out;
  }

 private:
  void check_symmetry() const {
    std::size_t idx[4];
    std::size_t perm[4];
    for (std::size_t off = 0; off < entries_.size(); ++off) {
      detail::unravel(off, dim_, order_, idx);
      std::copy(idx, idx + order_, perm);
      std::sort(perm, perm + order_);
      do {
        std::size_t o = 0;
        for (int m = 0; m < order_; ++m) o = o * dim_ + perm[m];
        if (std::abs(entries_[o] - entries_[off]) > 1e-12)
          throw std::invalid_argument("tensor flagged symmetric is not symmetric");
      } while (std::next_permutation(perm, perm + order_));
    }
  }

  int order_ = 3;
  std::size_t dim_ = 0;
  std::vector<double> entries_;
  bool symmetric_ = false;
};

/// Weighted sum of rank-1 terms with unit-norm factor columns.
///
/// Weights are stored as positive magnitudes plus a +/-1 sign per component;
/// the sign is only ever negative for fourth-order cumulant models, where the
/// weight is a kurtosis. Symmetric models keep one shared factor matrix.
class CPModel {
 public:
  CPModel() = default;

  CPModel(int order, std::vector<double> signed_weights, std::vector<Matrix> factors,
          bool symmetric = false)
      : order_(order), symmetric_(symmetric), factors_(std::move(factors)) {
    detail::require(order == 3 || order == 4, "model order must be 3 or 4");
    detail::require(!factors_.empty(), "model needs factor matrices");
    detail::require(factors_.size() == (symmetric ? 1u : static_cast<std::size_t>(order)),
                    "factor matrix count does not match order/symmetry");
    const auto k = factors_.front().cols();
    const auto d = factors_.front().rows();
    detail::require(static_cast<std::size_t>(k) == signed_weights.size(),
                    "weight count does not match factor columns");
    for (const auto& f : factors_) {
      detail::require(f.cols() == k && f.rows() == d, "factor matrices must share shape");
      for (Eigen::Index j = 0; j < k; ++j)
        detail::require(std::abs(f.col(j).norm() - 1.0) <= 1e-12,
                        "factor columns must have unit norm");
    }
    weights_.reserve(k);
    signs_.reserve(k);
    for (double w : signed_weights) {
      detail::require(std::isfinite(w) && w != 0.0, "weights must be finite and nonzero");
      weights_.push_back(std::abs(w));
      signs_.push_back(w < 0.0 ? -1 : 1);
    }
  }

  /// Normalizes the columns of each factor and folds the norms into the weights.
  static CPModel from_unnormalized(int order, std::vector<double> weights,
                                   std::vector<Matrix> factors, bool symmetric = false) {
    for (auto& f : factors)
      for (Eigen::Index j = 0; j < f.cols(); ++j) {
        const double norm = f.col(j).norm();
        detail::require(norm > 0.0, "zero factor column");
        f.col(j) /= norm;
        weights[j] *= symmetric ? std::pow(norm, order) : norm;
      }
    return CPModel(order, std::move(weights), std::move(factors), symmetric);
  }

  int order() const { return order_; }
  bool symmetric() const { return symmetric_; }
  std::size_t k() const { return weights_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(factors_.front().rows()); }

  const Matrix& factor(int mode) const { return factors_[symmetric_ ? 0 : mode]; }
  const std::vector<Matrix>& factors() const { return factors_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<int>& weight_signs() const { return signs_; }
  double signed_weight(std::size_t i) const { return signs_[i] * weights_[i]; }

  std::vector<double> signed_weights() const {
    std::vector<double> out(k());
    for (std::size_t i = 0; i < k(); ++i) out[i] = signed_weight(i);
    return out;
  }

 private:
  int order_ = 3;
  bool symmetric_ = false;
  std::vector<double> weights_;
  std::vector<int> signs_;
  std::vector<Matrix> factors_;
};

/// Column-wise Khatri-Rao product of same-width matrices; row index runs over
/// the factors in order with the last factor fastest.
inline Matrix khatri_rao(const std::vector<const Matrix*>& factors) {
  detail::require(!factors.empty(), "khatri_rao needs at least one factor");
  const auto cols = factors.front()->cols();
  Matrix out = *factors.front();
  for (std::size_t f = 1; f < factors.size(); ++f) {
    const Matrix& next = *factors[f];
    detail::require(next.cols() == cols, "khatri_rao column mismatch");
    Matrix grown(out.rows() * next.rows(), cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index i = 0; i < out.rows(); ++i)
        grown.col(c).segment(i * next.rows(), next.rows()) = out(i, c) * next.col(c);
    out.swap(grown);
  }
  return out;
}

namespace detail {

inline void check_vectors(const DenseTensor& t, const std::vector<Vector>& vs,
                          std::size_t expected) {
  require(vs.size() == expected, "wrong number of contraction vectors");
  for (const auto& v : vs)
    require(static_cast<std::size_t>(v.size()) == t.dim(), "contraction vector length mismatch");
}

}  // namespace detail

/// T(v_0, ..., v_{p-1}): sum over all index tuples of the entry times the
/// product of the matching vector coordinates.
inline double contract_full(const DenseTensor& t, const std::vector<Vector>& vectors) {
  detail::check_vectors(t, vectors, t.order());
  const std::size_t d = t.dim();
  const auto& e = t.entries();
  // Contract from the last mode inward.
  std::vector<double> cur(e.begin(), e.end());
  for (int m = t.order() - 1; m >= 0; --m) {
    std::vector<double> next(cur.size() / d, 0.0);
    const Vector& v = vectors[m];
    for (std::size_t o = 0; o < next.size(); ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) acc += cur[o * d + i] * v(i);
      next[o] = acc;
    }
    cur.swap(next);
  }
  return cur[0];
}

/// Contraction of every mode except `mode`; `others` lists the vectors for the
/// remaining modes in increasing mode order. For mode 0 of an order-3 tensor
/// this is T(I, v, w).
inline Vector contract_mode(const DenseTensor& t, int mode, const std::vector<Vector>& others) {
  detail::require(mode >= 0 && mode < t.order(), "mode out of range");
  detail::check_vectors(t, others, t.order() - 1);
  const std::size_t d = t.dim();
  Vector out = Vector::Zero(d);
  std::size_t idx[4];
  const auto& e = t.entries();
  for (std::size_t off = 0; off < e.size(); ++off) {
    detail::unravel(off, d, t.order(), idx);
    double w = e[off];
    int r = 0;
    for (int m = 0; m < t.order(); ++m) {
      if (m == mode) continue;
      w *= others[r++](idx[m]);
    }
    out(idx[mode]) += w;
  }
  return out;
}

inline Vector contract_mode1(const DenseTensor& t, const Vector& v, const Vector& w) {
  detail::require(t.order() == 3, "contract_mode1 expects an order-3 tensor");
  return contract_mode(t, 0, {v, w});
}

/// T(I, I, theta) for order 3, T(I, I, theta, theta) for order 4.
inline Matrix slice_combination(const DenseTensor& t, const Vector& theta) {
  detail::require(static_cast<std::size_t>(theta.size()) == t.dim(), "theta length mismatch");
  const std::size_t d = t.dim();
  Vector tail = theta;
  if (t.order() == 4) {
    tail.resize(d * d);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) tail(a * d + b) = theta(a) * theta(b);
  }
  Eigen::Map<const RowMatrix> flat(t.entries().data(), d * d, tail.size());
  Vector s = flat * tail;
  return Eigen::Map<const RowMatrix>(s.data(), d, d);
}

inline DenseTensor cp_to_dense(const CPModel& model) {
  const int p = model.order();
  const std::size_t d = model.dim();
  std::vector<const Matrix*> fs;
  for (int m = 0; m < p; ++m) fs.push_back(&model.factor(m));
  const Matrix kr = khatri_rao(fs);  // d^p x k
  Vector w(model.k());
  for (std::size_t i = 0; i < model.k(); ++i) w(i) = model.signed_weight(i);
  Vector flat = kr * w;
  return DenseTensor(p, d, std::vector<double>(flat.data(), flat.data() + flat.size()),
                     model.symmetric());
}

inline double frobenius_norm(const DenseTensor& t) {
  double s = 0.0;
  for (double v : t.entries()) s += v * v;
  return std::sqrt(s);
}

inline DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
  detail::require(a.order() == b.order() && a.dim() == b.dim(), "tensor shape mismatch");
  std::vector<double> e(a.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = a.entries()[i] - b.entries()[i];
  return DenseTensor(a.order(), a.dim(), std::move(e), false);
}

// Text format:
//   line 1: "<order> <d1> ... <dp> ; symmetric:<0|1>"
//   then all entries, whitespace separated, canonical order.

inline void write_tensor(std::ostream& out, const DenseTensor& t) {
  out << t.order();
  for (auto d : t.dims()) out << ' ' << d;
  out << " ; symmetric:" << (t.symmetric() ? 1 : 0) << '\n';
  out.precision(17);
  const std::size_t d = t.dim();
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t.entries()[i];
    out << (((i + 1) % d == 0) ? '\n' : ' ');
  }
}

inline DenseTensor read_tensor(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("empty tensor stream");
  const auto semi = header.find(';');
  if (semi == std::string::npos) throw std::invalid_argument("tensor header missing ';'");
  std::istringstream dims_in(header.substr(0, semi));
  int order = 0;
  dims_in >> order;
  std::vector<std::size_t> dims;
  std::size_t dim;
  while (dims_in >> dim) dims.push_back(dim);
  detail::require(order == 3 || order == 4, "tensor order must be 3 or 4");
  detail::require(dims.size() == static_cast<std::size_t>(order), "tensor header dims/order mismatch");
  detail::require(std::all_of(dims.begin(), dims.end(), [&](auto x) { return x == dims[0]; }),
                  "only equal mode sizes are supported");
  const std::string tail = header.substr(semi + 1);
  const auto colon = tail.find("symmetric:");
  detail::require(colon != std::string::npos, "tensor header missing symmetric flag");
  const bool symmetric = std::stoi(tail.substr(colon + 10)) != 0;
  std::vector<double> entries(detail::ipow(dims[0], order));
  for (auto& v : entries)
    if (!(in >> v)) throw std::invalid_argument("tensor stream truncated");
  return DenseTensor(order, dims[0], std::move(entries), symmetric);
}

}  // namespace olvm
