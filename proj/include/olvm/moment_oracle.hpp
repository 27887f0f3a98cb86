#pragma once

#include <memory>
#include <optional>
#include <variant>

#include "dense_tensor.hpp"
#include "implicit_moment.hpp"
#include "spectral_norm.hpp"

namespace olvm {

/// The tensor seen by the decomposition: either a materialized DenseTensor or
/// a sample-backed ImplicitMoment. Both answer the same batched contractions.
class MomentOracle {
 public:
  explicit MomentOracle(DenseTensor t)
      : backing_(Dense{std::make_shared<const DenseTensor>(std::move(t)), nullptr}) {
    auto& dense = std::get<Dense>(backing_);
    detail::require(dense.tensor->order() == 3 || dense.tensor->symmetric(),
                    "order-4 dense oracles must be symmetric");
    dense.contractor = std::make_shared<const DenseContractor>(*dense.tensor);
  }

  explicit MomentOracle(ImplicitMoment m) : backing_(std::move(m)) {}

  bool is_dense() const { return std::holds_alternative<Dense>(backing_); }
  int order() const {
    return is_dense() ? dense().tensor->order() : implicit().order();
  }
  std::size_t dim() const { return is_dense() ? dense().tensor->dim() : implicit().dim(); }

  /// Sample count behind the moment; empty for a dense (population) tensor.
  std::optional<std::size_t> sample_count() const {
    if (is_dense()) return std::nullopt;
    return implicit().n();
  }

  const DenseTensor& dense_tensor() const { return *dense().tensor; }
  const ImplicitMoment& implicit_moment() const { return std::get<ImplicitMoment>(backing_); }

  /// Order 3: contract all modes except `mode` against the d x B batches p, q
  /// (remaining modes in increasing order).
  Matrix contract_mode(int mode, const Matrix& p, const Matrix& q) const {
    detail::require(order() == 3, "contract_mode needs an order-3 oracle");
    if (is_dense()) return dense().contractor->contract_mode(mode, {&p, &q});
    return implicit().contract_mode(mode, p, q);
  }

  Vector full(const Matrix& a, const Matrix& b, const Matrix& c) const {
    if (!is_dense()) return implicit().full(a, b, c);
    return contract_mode(2, a, b).cwiseProduct(c).colwise().sum().transpose();
  }

  /// Order 4 symmetric: T(I, u, u, u) per column.
  Matrix contract_sym(const Matrix& u) const {
    detail::require(order() == 4, "contract_sym needs an order-4 oracle");
    if (is_dense()) return dense().contractor->contract_mode(0, {&u, &u, &u});
    return implicit().contract_sym(u);
  }

  Vector full_sym(const Matrix& u) const {
    if (!is_dense()) return implicit().full_sym(u);
    return contract_sym(u).cwiseProduct(u).colwise().sum().transpose();
  }

  /// T(I, I, theta) or T(I, I, theta, theta).
  Matrix slice(const Vector& theta) const {
    if (is_dense()) return slice_combination(*dense().tensor, theta);
    return implicit().slice(theta);
  }

  DenseTensor densify() const { return is_dense() ? *dense().tensor : implicit().densify(); }

 private:
  struct Dense {
    std::shared_ptr<const DenseTensor> tensor;
    std::shared_ptr<const DenseContractor> contractor;
  };

  const Dense& dense() const { return std::get<Dense>(backing_); }
  const ImplicitMoment& implicit() const { return std::get<ImplicitMoment>(backing_); }

  std::variant<Dense, ImplicitMoment> backing_;
};

}  // namespace olvm
