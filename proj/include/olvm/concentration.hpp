#pragma once

// Empirical spectral-norm error of moment estimates versus sample size.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dense_tensor.hpp"
#include "implicit_moment.hpp"
#include "models.hpp"
#include "random.hpp"
#include "spectral_norm.hpp"

namespace olvm {

/// Densified T_hat - T_tilde, where T_tilde = sum_j w~_j a_j (x) b_j (x) c_j
/// uses the empirical label frequencies w~_j of the sample set. T_tilde is
/// accumulated over the per-sample truth columns along the same arithmetic
/// path as T_hat, so noiseless samples give an exactly zero tensor.
inline DenseTensor error_tensor_multiview(const SampleSet& samples, const CPModel& truth) {
  detail::require(samples.labels.has_value(),
                  "error_tensor_multiview needs hidden labels for the empirical frequencies");
  detail::require(samples.view_count() == 3, "error_tensor_multiview expects three views");
  samples.validate(truth.k());
  detail::require(samples.dim() == truth.dim(), "dimension mismatch between samples and truth");
  SampleSet means;
  for (int r = 0; r < 3; ++r) {
    Matrix m(samples.views[r].rows(), samples.views[r].cols());
    for (Eigen::Index i = 0; i < m.cols(); ++i) m.col(i) = truth.factor(r).col((*samples.labels)[i]);
    means.views.push_back(std::move(m));
  }
  const DenseTensor hat =
      ImplicitMoment::multiview(std::make_shared<const SampleSet>(samples)).densify();
  const DenseTensor tilde =
      ImplicitMoment::multiview(std::make_shared<const SampleSet>(std::move(means))).densify();
  return hat - tilde;
}

inline constexpr std::size_t kMaxDensifyDimOrder4 = 30;

/// Spectral-norm estimate of M4_hat - M4 with M4 = sum_j kappa_j a_j^(x)4.
/// Order-4 densification is refused for d > 30.
inline SpectralNormEstimate error_norm_ica(const SampleSet& samples, const Matrix& mixing,
                                           const std::vector<double>& kappa,
                                           const SpectralNormOptions& opt = {}) {
  if (samples.dim() > kMaxDensifyDimOrder4)
    throw std::invalid_argument(
        "error_norm_ica: d > 30 would densify a d^4 tensor; evaluate the error through "
        "contraction sampling (ImplicitMoment::full_sym) instead");
  const DenseTensor hat =
      ImplicitMoment::ica4(std::make_shared<const SampleSet>(samples)).densify();
  return spectral_norm_estimate(hat - ica_population_moment(mixing, kappa), opt);
}

struct ScalingPoint {
  double n = 0.0;
  std::uint64_t seed = 0;
  double error = 0.0;
};

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;         // log(error) at log(n) = 0
  double slope_stddev = 0.0;      // dispersion of per-seed slopes
  std::size_t used = 0;
  std::size_t excluded = 0;       // nonpositive or non-finite errors
  std::vector<std::string> warnings;
};

namespace detail {

inline std::pair<double, double> least_squares_line(const std::vector<double>& x,
                                                    const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  require(den != 0.0, "scaling fit needs at least two distinct n values");
  const double slope = (n * sxy - sx * sy) / den;
  return {slope, (sy - slope * sx) / n};
}

}  // namespace detail

/// Least-squares slope of log(error) against log(n) over all points.
inline ScalingFit fit_scaling(const std::vector<ScalingPoint>& points) {
  ScalingFit fit;
  std::vector<double> x, y;
  std::vector<double> distinct;
  for (const auto& p : points) {
    if (!(p.error > 0.0) || !std::isfinite(p.error) || !(p.n > 0.0)) {
      ++fit.excluded;
      continue;
    }
    x.push_back(std::log(p.n));
    y.push_back(std::log(p.error));
    if (std::find(distinct.begin(), distinct.end(), p.n) == distinct.end()) distinct.push_back(p.n);
  }
  if (fit.excluded > 0)
    fit.warnings.push_back(std::to_string(fit.excluded) + " nonpositive error value(s) excluded");
  detail::require(distinct.size() >= 3, "scaling fit needs at least 3 distinct n values");
  fit.used = x.size();
  std::tie(fit.slope, fit.intercept) = detail::least_squares_line(x, y);

  std::vector<std::uint64_t> seeds;
  for (const auto& p : points)
    if (std::find(seeds.begin(), seeds.end(), p.seed) == seeds.end()) seeds.push_back(p.seed);
  std::vector<double> slopes;
  for (auto s : seeds) {
    std::vector<double> xs, ys;
    for (const auto& p : points)
      if (p.seed == s && p.error > 0.0 && std::isfinite(p.error)) {
        xs.push_back(std::log(p.n));
        ys.push_back(std::log(p.error));
      }
    if (xs.size() >= 2) slopes.push_back(detail::least_squares_line(xs, ys).first);
  }
  if (slopes.size() > 1) {
    double m = 0.0;
    for (double s : slopes) m += s;
    m /= static_cast<double>(slopes.size());
    double v = 0.0;
    for (double s : slopes) v += (s - m) * (s - m);
    fit.slope_stddev = std::sqrt(v / static_cast<double>(slopes.size() - 1));
  }
  return fit;
}

enum class SweepModel { multiview, ica, sparse_ica };

inline std::string to_string(SweepModel m) {
  switch (m) {
    case SweepModel::multiview: return "multiview";
    case SweepModel::ica: return "ica";
    case SweepModel::sparse_ica: return "sparse-ica";
  }
  return "?";
}

inline SweepModel parse_sweep_model(const std::string& s) {
  if (s == "multiview") return SweepModel::multiview;
  if (s == "ica") return SweepModel::ica;
  if (s == "sparse-ica") return SweepModel::sparse_ica;
  throw std::invalid_argument("unknown sweep model '" + s + "'");
}

struct SweepSpec {
  SweepModel model = SweepModel::multiview;
  std::size_t d = 10;
  std::size_t k = 10;
  std::string regime = "low";   // label written to the CSV
  double zeta = 0.0;            // multiview noise scale
  SourceLaw law = SourceLaw::rademacher;  // ica
  double sparsity = 2.0;        // sparse-ica: expected support size s
  std::vector<std::size_t> n_grid;
  std::size_t seeds = 10;
  std::uint64_t root_seed = 0;
  SpectralNormOptions norm;

  void validate() const {
    detail::require(!n_grid.empty(), "n_grid must not be empty");
    detail::require(n_grid.size() >= 3, "n_grid needs at least 3 points for slope fitting");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
      detail::require(n_grid[i] > n_grid[i - 1], "n_grid must be increasing");
    detail::require(seeds >= 1, "seeds per cell must be >= 1");
    detail::require(d >= 1 && k >= 1, "d and k must be positive");
  }
};

struct SweepRow {
  std::string model;
  std::size_t d = 0;
  std::size_t k = 0;
  std::string regime;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double error_estimate = 0.0;
  double frobenius = 0.0;
};

/// Error estimate for one (n, seed) cell.
inline SweepRow sweep_cell(const SweepSpec& spec, std::size_t n, std::uint64_t seed) {
  SweepRow row{to_string(spec.model), spec.d, spec.k, spec.regime, n, seed, 0.0, 0.0};
  SpectralNormOptions opt = spec.norm;
  opt.seed = seed;
  if (spec.model == SweepModel::multiview) {
    MultiviewSpec mv;
    mv.d = spec.d;
    mv.k = spec.k;
    mv.zeta = spec.zeta;
    const auto data = gen_multiview(mv, n, seed);
    const DenseTensor err = error_tensor_multiview(data.samples, data.truth);
    row.error_estimate = spectral_norm_estimate(err, opt).value;
    row.frobenius = frobenius_norm(err);
    return row;
  }
  ICASpec ica;
  ica.d = spec.d;
  ica.k = spec.k;
  if (spec.model == SweepModel::ica) {
    ica.law = spec.law;
  } else {
    // Unit-variance g_j, the sparse concentration setting (Var h_j = s/k).
    ica.law = SourceLaw::bernoulli_gaussian;
    ica.sparsity = spec.sparsity;
    ica.unit_variance = false;
  }
  const auto data = gen_ica(ica, n, seed);
  const DenseTensor hat = moment_ica4(data.samples).densify();
  const DenseTensor err = hat - ica_population_moment(data.mixing, data.kappa);
  row.error_estimate = spectral_norm_estimate(err, opt).value;
  row.frobenius = frobenius_norm(err);
  return row;
}

/// Every (n, seed) cell of the sweep. Seed s of cell n is stream
/// (root / n / s), so cells are independent of grid order.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<SweepRow> rows;
  const SeedStream root(spec.root_seed);
  for (std::size_t n : spec.n_grid)
    for (std::size_t s = 0; s < spec.seeds; ++s)
      rows.push_back(sweep_cell(spec, n, root.child(n).child(s).key()));
  return rows;
}

/// Slope fit over a sweep; per-seed slopes pair the s-th seed of every n.
inline ScalingFit fit_sweep(const std::vector<SweepRow>& rows) {
  std::vector<ScalingPoint> grouped;
  for (const auto& r : rows) {
    std::uint64_t pos = 0;
    for (const auto& g : grouped)
      if (g.n == static_cast<double>(r.n)) ++pos;
    grouped.push_back({static_cast<double>(r.n), pos, r.error_estimate});
  }
  return fit_scaling(grouped);
}

inline void write_sweep_header(std::ostream& out) {
  out << "model,d,k,regime,n,seed,error_estimate\n";
}

inline void write_sweep_rows(std::ostream& out, const std::vector<SweepRow>& rows) {
  out.precision(10);
  for (const auto& r : rows)
    out << r.model << ',' << r.d << ',' << r.k << ',' << r.regime << ',' << r.n << ','
        << r.seed << ',' << r.error_estimate << '\n';
}

}  // namespace olvm
