#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dense_tensor.hpp"

namespace olvm {

/// Observations stored one d x n matrix per view (sample i is column i of
/// every view), plus the hidden labels when the generator knows them.
struct SampleSet {
  std::vector<Matrix> views;
  std::optional<std::vector<int>> labels;

  std::size_t n() const { return views.empty() ? 0 : static_cast<std::size_t>(views[0].cols()); }
  std::size_t dim() const { return views.empty() ? 0 : static_cast<std::size_t>(views[0].rows()); }
  std::size_t view_count() const { return views.size(); }

  void validate(std::optional<std::size_t> k = std::nullopt) const {
    detail::require(!views.empty(), "sample set has no views");
    for (const auto& v : views)
      detail::require(v.rows() == views[0].rows() && v.cols() == views[0].cols(),
                      "all views must share d and n");
    if (labels) {
      detail::require(labels->size() == n(), "label count must equal n");
      for (int h : *labels) {
        detail::require(h >= 0, "labels must be nonnegative");
        if (k) detail::require(static_cast<std::size_t>(h) < *k, "label out of range");
      }
    }
  }

  /// Samples with label `j`, one d x m_j matrix per view.
  SampleSet with_label(int j) const {
    detail::require(labels.has_value(), "sample set has no labels");
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < labels->size(); ++i)
      if ((*labels)[i] == j) keep.push_back(static_cast<Eigen::Index>(i));
    SampleSet out;
    for (const auto& v : views) {
      Matrix sub(v.rows(), static_cast<Eigen::Index>(keep.size()));
      for (std::size_t c = 0; c < keep.size(); ++c) sub.col(c) = v.col(keep[c]);
      out.views.push_back(std::move(sub));
    }
    out.labels = std::vector<int>(keep.size(), j);
    return out;
  }
};

// Text format:
//   line 1: "samples d=<d> n=<n> views=<v> labels=<0|1>"
//   then, per view, n lines of d values (sample columns, i.e. column-major);
//   then, when labels=1, one line of n integer labels.

inline void write_samples(std::ostream& out, const SampleSet& s) {
  s.validate();
  out << "samples d=" << s.dim() << " n=" << s.n() << " views=" << s.view_count()
      << " labels=" << (s.labels ? 1 : 0) << '\n';
  out.precision(17);
  for (const auto& v : s.views)
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
      for (Eigen::Index r = 0; r < v.rows(); ++r) out << (r ? " " : "") << v(r, i);
      out << '\n';
    }
  if (s.labels) {
    for (std::size_t i = 0; i < s.labels->size(); ++i) out << (i ? " " : "") << (*s.labels)[i];
    out << '\n';
  }
}

inline SampleSet read_samples(std::istream& in) {
  std::string tag;
  in >> tag;
  detail::require(tag == "samples", "sample stream must start with 'samples'");
  auto field = [&](const std::string& key) -> std::size_t {
    std::string kv;
    in >> kv;
    detail::require(kv.rfind(key + "=", 0) == 0, "sample header missing " + key);
    return static_cast<std::size_t>(std::stoull(kv.substr(key.size() + 1)));
  };
  const std::size_t d = field("d");
  const std::size_t n = field("n");
  const std::size_t views = field("views");
  const bool labels = field("labels") != 0;
  SampleSet s;
  for (std::size_t r = 0; r < views; ++r) {
    Matrix v(d, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (!(in >> v(j, i))) throw std::invalid_argument("sample stream truncated");
    s.views.push_back(std::move(v));
  }
  if (labels) {
    std::vector<int> h(n);
    for (auto& x : h)
      if (!(in >> x)) throw std::invalid_argument("label line truncated");
    s.labels = std::move(h);
  }
  s.validate();
  return s;
}

}  // namespace olvm
