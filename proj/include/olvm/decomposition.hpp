#pragma once

// CP decomposition by alternating rank-1 power updates.
//
// Order 3 (asymmetric updates, all three from the previous iterate):
//   a <- T(I, b, c) / |.|,  b <- T(a, I, c) / |.|,  c <- T(a, b, I) / |.|
// Order 4 (symmetric): u <- T(I, u, u, u) / |.|
//
// A run draws L initializations, iterates each one, estimates the weight
// T(a, b, c) of every result and then greedily clusters the L results into k
// components.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dense_tensor.hpp"
#include "moment_oracle.hpp"
#include "random.hpp"
#include "samples.hpp"

namespace olvm {

enum class StoppingMode { fixed_iterations, threshold };
enum class InitMethod { random_sphere, svd_slice, semi_supervised };

inline std::string to_string(InitMethod m) {
  switch (m) {
    case InitMethod::random_sphere: return "random-sphere";
    case InitMethod::svd_slice: return "svd-slice";
    case InitMethod::semi_supervised: return "semi-supervised";
  }
  return "?";
}

inline InitMethod parse_init_method(const std::string& s) {
  if (s == "random-sphere") return InitMethod::random_sphere;
  if (s == "svd-slice") return InitMethod::svd_slice;
  if (s == "semi-supervised") return InitMethod::semi_supervised;
  throw std::invalid_argument("unknown init method '" + s + "'");
}

struct DecompositionConfig {
  std::size_t initializations = 100;  // L
  std::size_t max_iterations = 100;   // N
  StoppingMode stopping = StoppingMode::threshold;
  double t1 = 1e-8;
  double t2 = 1e-7;
  double cluster_epsilon = 0.9;
  std::size_t k_target = 1;
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::random_sphere;

  void validate() const {
    detail::require(initializations >= 1, "number of initializations L must be >= 1");
    detail::require(max_iterations >= 1, "number of iterations N must be >= 1");
    detail::require(cluster_epsilon > 0.0 && cluster_epsilon < 1.0,
                    "cluster epsilon must lie in (0, 1)");
    detail::require(t1 >= 0.0 && t2 >= 0.0, "stopping constants must be nonnegative");
    detail::require(k_target >= 1, "k_target must be >= 1");
  }
};

/// t1 (log d)^2 sqrt(k/n) + t2 (log d)^2 sqrt(k)/d; the sample term is
/// dropped when the tensor is not sample-backed.
inline double stopping_threshold(const DecompositionConfig& cfg, std::size_t d,
                                 std::optional<std::size_t> n) {
  const double logd = std::log(static_cast<double>(d));
  const double k = static_cast<double>(cfg.k_target);
  double t = cfg.t2 * logd * logd * std::sqrt(k) / static_cast<double>(d);
  if (n) t += cfg.t1 * logd * logd * std::sqrt(k / static_cast<double>(*n));
  return t;
}

enum class TrialStatus { ok, degenerate, not_finite };

inline std::string to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::ok: return "ok";
    case TrialStatus::degenerate: return "degenerate";
    case TrialStatus::not_finite: return "not-finite";
  }
  return "?";
}

/// One vector per mode for order 3, a single vector for symmetric order 4.
using InitTuple = std::vector<Vector>;

struct PowerTrial {
  std::vector<Vector> vectors;
  double weight = 0.0;  // T(a, b, c) or T(u, u, u, u)
  std::size_t iterations = 0;
  bool converged = false;
  TrialStatus status = TrialStatus::ok;

  bool ok() const { return status == TrialStatus::ok; }
};

namespace detail {

inline constexpr double kDegenerateNorm = 1e-14;

inline int tuple_size(int order) { return order == 3 ? 3 : 1; }

// Normalizes every column; returns per-column status.
inline std::vector<TrialStatus> normalize_columns(Matrix& m) {
  std::vector<TrialStatus> st(m.cols(), TrialStatus::ok);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double norm = m.col(c).norm();
    if (!std::isfinite(norm)) {
      st[c] = TrialStatus::not_finite;
    } else if (norm <= kDegenerateNorm) {
      st[c] = TrialStatus::degenerate;
    } else {
      m.col(c) /= norm;
    }
  }
  return st;
}

inline Matrix select_columns(const Matrix& m, const std::vector<Eigen::Index>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(i) = m.col(cols[i]);
  return out;
}

}  // namespace detail

/// One power update applied to B tuples at once. `cur` holds one d x B matrix
/// per tuple slot. Columns that hit a zero or non-finite contraction are left
/// unnormalized and reported through `status`.
inline std::vector<Matrix> power_update(const MomentOracle& t, const std::vector<Matrix>& cur,
                                        std::vector<TrialStatus>& status) {
  std::vector<Matrix> next;
  if (t.order() == 3) {
    next = {t.contract_mode(0, cur[1], cur[2]), t.contract_mode(1, cur[0], cur[2]),
            t.contract_mode(2, cur[0], cur[1])};
  } else {
    next = {t.contract_sym(cur[0])};
  }
  status.assign(cur[0].cols(), TrialStatus::ok);
  for (auto& m : next) {
    const auto st = detail::normalize_columns(m);
    for (std::size_t c = 0; c < st.size(); ++c)
      if (st[c] != TrialStatus::ok && status[c] == TrialStatus::ok) status[c] = st[c];
  }
  if (t.order() == 4) {
    // Even order: u and -u are the same point; keep the iterate on the side of
    // the previous one so a negative weight does not flip it every step.
    for (Eigen::Index c = 0; c < next[0].cols(); ++c)
      if (next[0].col(c).dot(cur[0].col(c)) < 0.0) next[0].col(c) = -next[0].col(c);
  }
  return next;
}

/// T(a, b, c) (order 3) or T(u, u, u, u) (order 4) per column.
inline Vector objective(const MomentOracle& t, const std::vector<Matrix>& v) {
  return t.order() == 3 ? t.full(v[0], v[1], v[2]) : t.full_sym(v[0]);
}

/// Runs the power iterations for every initialization in `inits`. Each trial
/// stops independently: after N updates, or (threshold mode) as soon as the
/// largest squared change of any mode drops to the stopping threshold.
/// Batching does not change any trial's arithmetic path beyond GEMM rounding.
inline std::vector<PowerTrial> power_trials(const MomentOracle& t,
                                            const std::vector<InitTuple>& inits,
                                            const DecompositionConfig& cfg) {
  cfg.validate();
  const int slots = detail::tuple_size(t.order());
  const auto d = static_cast<Eigen::Index>(t.dim());
  const double tstop = stopping_threshold(cfg, t.dim(), t.sample_count());
  const bool use_threshold = cfg.stopping == StoppingMode::threshold;

  std::vector<PowerTrial> out(inits.size());
  std::vector<Eigen::Index> active;
  for (std::size_t i = 0; i < inits.size(); ++i) {
    const auto& init = inits[i];
    detail::require(init.size() == static_cast<std::size_t>(slots),
                    "initialization has the wrong number of vectors for the tensor order");
    for (const auto& v : init) {
      detail::require(v.size() == d, "initialization vector length mismatch");
      const double norm = v.norm();
      if (!std::isfinite(norm)) {
        out[i].status = TrialStatus::not_finite;
      } else if (norm <= detail::kDegenerateNorm) {
        out[i].status = TrialStatus::degenerate;
      } else {
        detail::require(std::abs(norm - 1.0) <= 1e-8, "initialization vectors must be unit norm");
      }
    }
    out[i].vectors = init;
    if (out[i].ok()) active.push_back(static_cast<Eigen::Index>(i));
  }

  std::vector<Matrix> cur(slots, Matrix(d, static_cast<Eigen::Index>(active.size())));
  for (std::size_t c = 0; c < active.size(); ++c)
    for (int s = 0; s < slots; ++s) cur[s].col(c) = inits[active[c]][s];

  std::vector<TrialStatus> status;
  for (std::size_t it = 0; it < cfg.max_iterations && !active.empty(); ++it) {
    std::vector<Matrix> next = power_update(t, cur, status);
    std::vector<Eigen::Index> keep;
    for (std::size_t c = 0; c < active.size(); ++c) {
      PowerTrial& trial = out[active[c]];
      trial.iterations = it + 1;
      if (status[c] != TrialStatus::ok) {
        trial.status = status[c];
        for (int s = 0; s < slots; ++s) trial.vectors[s] = cur[s].col(c);
        continue;
      }
      double step = 0.0;
      for (int s = 0; s < slots; ++s)
        step = std::max(step, (next[s].col(c) - cur[s].col(c)).squaredNorm());
      if (use_threshold && step <= tstop) {
        trial.converged = true;
        for (int s = 0; s < slots; ++s) trial.vectors[s] = next[s].col(c);
        continue;
      }
      keep.push_back(static_cast<Eigen::Index>(c));
    }
    if (keep.size() == active.size()) {
      cur.swap(next);
      continue;
    }
    std::vector<Eigen::Index> still;
    for (auto c : keep) still.push_back(active[c]);
    for (int s = 0; s < slots; ++s) cur[s] = detail::select_columns(next[s], keep);
    active.swap(still);
  }
  for (std::size_t c = 0; c < active.size(); ++c) {
    PowerTrial& trial = out[active[c]];
    trial.converged = !use_threshold;
    for (int s = 0; s < slots; ++s) trial.vectors[s] = cur[s].col(c);
  }

  // Weight estimation for every finished trial.
  std::vector<Eigen::Index> good;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].ok()) good.push_back(static_cast<Eigen::Index>(i));
  if (!good.empty()) {
    std::vector<Matrix> v(slots, Matrix(d, static_cast<Eigen::Index>(good.size())));
    for (std::size_t c = 0; c < good.size(); ++c)
      for (int s = 0; s < slots; ++s) v[s].col(c) = out[good[c]].vectors[s];
    const Vector w = objective(t, v);
    for (std::size_t c = 0; c < good.size(); ++c) {
      out[good[c]].weight = w(c);
      if (!std::isfinite(w(c))) out[good[c]].status = TrialStatus::not_finite;
    }
  }
  return out;
}

inline PowerTrial power_trial(const MomentOracle& t, const InitTuple& init,
                              const DecompositionConfig& cfg) {
  return power_trials(t, {init}, cfg).front();
}

/// Completes (a, b) with c = T(a, b, I) / |.| for every column; zero columns
/// stay zero and are flagged by the trial runner.
inline Matrix complete_third_mode(const MomentOracle& t, const Matrix& a, const Matrix& b) {
  Matrix c = t.contract_mode(2, a, b);
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    const double norm = c.col(j).norm();
    if (std::isfinite(norm) && norm > detail::kDegenerateNorm) c.col(j) /= norm;
    else c.col(j).setZero();
  }
  return c;
}

/// Random-sphere initializations: a, b uniform on the sphere, c from one
/// power update (order 4: u uniform). Trial i draws from stream i of `root`.
inline std::vector<InitTuple> random_sphere_inits(const MomentOracle& t, std::size_t count,
                                                  const SeedStream& root,
                                                  std::size_t first = 0) {
  const auto d = static_cast<Eigen::Index>(t.dim());
  const auto b = static_cast<Eigen::Index>(count);
  std::vector<InitTuple> out(count);
  if (t.order() == 4) {
    for (std::size_t i = 0; i < count; ++i) {
      auto rng = root.child(first + i).engine();
      out[i] = {unit_sphere_vector(rng, d)};
    }
    return out;
  }
  Matrix a(d, b), bb(d, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    auto rng = root.child(first + static_cast<std::size_t>(i)).engine();
    a.col(i) = unit_sphere_vector(rng, d);
    bb.col(i) = unit_sphere_vector(rng, d);
  }
  const Matrix c = complete_third_mode(t, a, bb);
  for (Eigen::Index i = 0; i < b; ++i) out[i] = {a.col(i), bb.col(i), c.col(i)};
  return out;
}

/// SVD-based initialization: top singular pair of the slice T(I, I, theta)
/// (order 4: T(I, I, theta, theta)) for Gaussian theta; c from one power
/// update. A numerically zero slice triggers a redraw, at most 16 times.
inline InitTuple svd_slice_init(const MomentOracle& t, std::mt19937_64& rng) {
  constexpr int kMaxDraws = 17;  // first draw plus 16 redraws
  const auto d = static_cast<Eigen::Index>(t.dim());
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    const Vector theta = gaussian_vector(rng, d);
    const Matrix s = t.slice(theta);
    if (!(s.norm() >= 1e-14)) continue;
    Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector u = svd.matrixU().col(0);
    const Vector v = svd.matrixV().col(0);
    if (t.order() == 4) return {u};
    const Matrix c = complete_third_mode(t, u, v);
    return {u, v, c.col(0)};
  }
  throw std::runtime_error("svd_slice_init: slice is numerically zero after 16 redraws");
}

/// Per label j and view r, the normalized mean of the view-r samples with
/// label j. Labels must cover 0..k-1.
inline std::vector<InitTuple> semi_supervised_init(const SampleSet& labeled, std::size_t k) {
  detail::require(labeled.labels.has_value(), "semi-supervised init needs labeled samples");
  labeled.validate(k);
  std::vector<InitTuple> out;
  for (std::size_t j = 0; j < k; ++j) {
    const SampleSet cls = labeled.with_label(static_cast<int>(j));
    if (cls.n() == 0)
      throw std::invalid_argument("label class " + std::to_string(j) + " has no labeled samples");
    InitTuple tuple;
    for (const auto& v : cls.views) {
      Vector mean = v.rowwise().mean();
      const double norm = mean.norm();
      if (!(norm > 0.0))
        throw std::invalid_argument("label class " + std::to_string(j) + " has a zero mean");
      tuple.push_back(mean / norm);
    }
    out.push_back(std::move(tuple));
  }
  return out;
}

struct ClusterResult {
  std::vector<PowerTrial> centers;
  std::vector<std::size_t> source_trials;  // index of the tuple each center grew from
  bool shortfall = false;
};

/// Greedy clustering of trial results into k centers: take the remaining tuple
/// with the largest |T(a, b, c)| (lowest index on ties), run N more updates
/// from it, emit the result, then drop every tuple whose largest per-mode
/// |<.,.>| with the center exceeds epsilon/2. The chosen tuple is always
/// dropped.
inline ClusterResult cluster_candidates(const MomentOracle& t,
                                        const std::vector<PowerTrial>& tuples,
                                        const DecompositionConfig& cfg) {
  cfg.validate();
  detail::require(!tuples.empty(), "cluster_candidates needs at least one tuple");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < tuples.size(); ++i)
    if (tuples[i].ok()) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(tuples[x].weight) > std::abs(tuples[y].weight);
  });
  std::vector<bool> removed(tuples.size(), false);
  ClusterResult res;
  const double cut = cfg.cluster_epsilon / 2.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < cfg.k_target; ++i) {
    while (pos < order.size() && removed[order[pos]]) ++pos;
    if (pos == order.size()) break;
    const std::size_t chosen = order[pos];
    removed[chosen] = true;
    PowerTrial center = power_trial(t, tuples[chosen].vectors, cfg);
    if (!center.ok()) continue;
    for (std::size_t j : order) {
      if (removed[j]) continue;
      double corr = 0.0;
      for (std::size_t s = 0; s < center.vectors.size(); ++s)
        corr = std::max(corr, std::abs(tuples[j].vectors[s].dot(center.vectors[s])));
      if (corr > cut) removed[j] = true;
    }
    res.centers.push_back(std::move(center));
    res.source_trials.push_back(chosen);
  }
  res.shortfall = res.centers.size() < cfg.k_target;
  return res;
}

struct TrialSummary {
  std::size_t iterations = 0;
  double objective = 0.0;  // |T(a, b, c)|
  bool converged = false;
  TrialStatus status = TrialStatus::ok;
};

struct RunReport {
  CPModel estimates;
  std::vector<std::size_t> component_iterations;
  std::vector<double> component_objectives;
  std::vector<TrialSummary> trials;
  std::size_t failed_trials = 0;
  bool shortfall = false;
  double stopping_threshold = 0.0;
  double wall_seconds = 0.0;

  /// Mean iteration count over trials that finished without a failure flag.
  double mean_trial_iterations() const {
    double s = 0.0;
    std::size_t c = 0;
    for (const auto& t : trials)
      if (t.status == TrialStatus::ok) {
        s += static_cast<double>(t.iterations);
        ++c;
      }
    return c ? s / static_cast<double>(c) : 0.0;
  }
};

/// Initializations for `cfg.init`. Semi-supervised initializations must be
/// passed in `provided` (see semi_supervised_init); they are cycled to fill L.
inline std::vector<InitTuple> make_initializations(const MomentOracle& t,
                                                   const DecompositionConfig& cfg,
                                                   const std::vector<InitTuple>* provided = nullptr) {
  const SeedStream root = SeedStream(cfg.seed).child(streams::kTrialInit);
  switch (cfg.init) {
    case InitMethod::random_sphere:
      return random_sphere_inits(t, cfg.initializations, root);
    case InitMethod::svd_slice: {
      std::vector<InitTuple> out;
      for (std::size_t i = 0; i < cfg.initializations; ++i) {
        auto rng = root.child(i).engine();
        out.push_back(svd_slice_init(t, rng));
      }
      return out;
    }
    case InitMethod::semi_supervised: {
      detail::require(provided != nullptr && !provided->empty(),
                      "semi-supervised init needs labeled initial vectors");
      const int slots = detail::tuple_size(t.order());
      std::vector<InitTuple> out;
      for (std::size_t i = 0; i < cfg.initializations; ++i) {
        InitTuple tuple = (*provided)[i % provided->size()];
        if (tuple.size() == 1 && slots == 3) tuple = {tuple[0], tuple[0], tuple[0]};
        out.push_back(std::move(tuple));
      }
      return out;
    }
  }
  return {};
}

namespace detail {

/// +1 or -1 so that the largest-magnitude entry (lowest index on ties) of
/// sign * v is positive.
inline double leading_sign(const Vector& v) {
  Eigen::Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  return v(at) < 0.0 ? -1.0 : 1.0;
}

}  // namespace detail

/// Turns cluster centers into a CPModel. Order-3 centers with a negative
/// weight get their third vector negated so the reported weight is positive;
/// order-4 weights keep their sign. Sign gauges are fixed so that the leading
/// entry of every vector except the third order-3 mode is positive.
inline RunReport assemble_report(const MomentOracle& t, const std::vector<PowerTrial>& trials,
                                 const ClusterResult& clusters, const DecompositionConfig& cfg) {
  RunReport rep;
  rep.stopping_threshold = stopping_threshold(cfg, t.dim(), t.sample_count());
  for (const auto& tr : trials) {
    rep.trials.push_back({tr.iterations, std::abs(tr.weight), tr.converged, tr.status});
    if (!tr.ok()) ++rep.failed_trials;
  }
  const int slots = detail::tuple_size(t.order());
  const auto d = static_cast<Eigen::Index>(t.dim());
  std::vector<double> weights;
  std::vector<Matrix> factors(slots);
  std::vector<std::vector<Vector>> cols(slots);
  for (const auto& c : clusters.centers) {
    if (c.weight == 0.0) continue;
    double w = c.weight;
    std::vector<Vector> v = c.vectors;
    if (t.order() == 3) {
      if (w < 0.0) {
        v[2] = -v[2];
        w = -w;
      }
      for (int s = 0; s < 2; ++s) {
        const double z = detail::leading_sign(v[s]);
        v[s] *= z;
        v[2] *= z;
      }
    } else {
      v[0] *= detail::leading_sign(v[0]);
    }
    weights.push_back(w);
    for (int s = 0; s < slots; ++s) cols[s].push_back(v[s]);
    rep.component_iterations.push_back(c.iterations);
    rep.component_objectives.push_back(std::abs(c.weight));
  }
  rep.shortfall = clusters.shortfall || weights.size() < cfg.k_target;
  if (weights.empty()) return rep;
  for (int s = 0; s < slots; ++s) {
    factors[s].resize(d, static_cast<Eigen::Index>(weights.size()));
    for (std::size_t j = 0; j < weights.size(); ++j) {
      // Renormalize to absorb rounding so the unit-norm invariant holds at 1e-12.
      factors[s].col(j) = cols[s][j] / cols[s][j].norm();
    }
  }
  rep.estimates = CPModel(t.order(), std::move(weights), std::move(factors), t.order() == 4);
  return rep;
}

/// L trials, weight estimation, clustering. Throws std::runtime_error only
/// when every trial fails.
inline RunReport decompose(const MomentOracle& t, const DecompositionConfig& cfg,
                           const std::vector<InitTuple>* provided_inits = nullptr) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto inits = make_initializations(t, cfg, provided_inits);
  const auto trials = power_trials(t, inits, cfg);
  if (std::none_of(trials.begin(), trials.end(), [](const PowerTrial& p) { return p.ok(); }))
    throw std::runtime_error("decompose: every trial failed");
  const ClusterResult clusters = cluster_candidates(t, trials, cfg);
  RunReport rep = assemble_report(t, trials, clusters, cfg);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// RunReport text record:
//   runreport order=<p> d=<d> k=<k> symmetric=<0|1>
//   trials=<L> failed=<f> shortfall=<0|1> stopping_threshold=<t> wall_seconds=<s>
//   then per component:
//   component <j> weight=<|w|> sign=<+1|-1> iterations=<it> objective=<|T|>
//   mode <m> <d values>          (p lines, or 1 line when symmetric)
//   end

inline void write_run_report(std::ostream& out, const RunReport& r) {
  const CPModel& m = r.estimates;
  const bool empty = m.factors().empty();
  out.precision(17);
  out << "runreport order=" << m.order() << " d=" << (empty ? 0 : m.dim())
      << " k=" << (empty ? 0 : m.k()) << " symmetric=" << (m.symmetric() ? 1 : 0) << '\n';
  out << "trials=" << r.trials.size() << " failed=" << r.failed_trials
      << " shortfall=" << (r.shortfall ? 1 : 0) << " stopping_threshold=" << r.stopping_threshold
      << " wall_seconds=" << r.wall_seconds << '\n';
  if (!empty) {
    for (std::size_t j = 0; j < m.k(); ++j) {
      out << "component " << j << " weight=" << m.weights()[j]
          << " sign=" << (m.weight_signs()[j] < 0 ? "-1" : "+1")
          << " iterations=" << r.component_iterations[j]
          << " objective=" << r.component_objectives[j] << '\n';
      for (std::size_t s = 0; s < m.factors().size(); ++s) {
        out << "mode " << s;
        for (Eigen::Index i = 0; i < m.factors()[s].rows(); ++i) out << ' ' << m.factors()[s](i, j);
        out << '\n';
      }
    }
  }
  out << "end\n";
}

/// A bare model wrapped as a run record, e.g. for writing ground truth.
inline RunReport model_record(const CPModel& m) {
  RunReport r;
  r.estimates = m;
  r.component_iterations.assign(m.k(), 0);
  for (std::size_t j = 0; j < m.k(); ++j) r.component_objectives.push_back(m.weights()[j]);
  return r;
}

namespace detail {

inline std::string kv_value(std::istream& in, const std::string& key) {
  std::string tok;
  in >> tok;
  require(tok.rfind(key + "=", 0) == 0, "run report: expected '" + key + "='");
  return tok.substr(key.size() + 1);
}

}  // namespace detail

/// Reads the estimates and per-component fields back; per-trial summaries are
/// not part of the record.
inline RunReport read_run_report(std::istream& in) {
  std::string tag;
  in >> tag;
  detail::require(tag == "runreport", "run report must start with 'runreport'");
  const int order = std::stoi(detail::kv_value(in, "order"));
  const auto d = static_cast<Eigen::Index>(std::stoll(detail::kv_value(in, "d")));
  const auto k = static_cast<std::size_t>(std::stoull(detail::kv_value(in, "k")));
  const bool symmetric = std::stoi(detail::kv_value(in, "symmetric")) != 0;
  RunReport r;
  detail::kv_value(in, "trials");
  r.failed_trials = std::stoull(detail::kv_value(in, "failed"));
  r.shortfall = std::stoi(detail::kv_value(in, "shortfall")) != 0;
  r.stopping_threshold = std::stod(detail::kv_value(in, "stopping_threshold"));
  r.wall_seconds = std::stod(detail::kv_value(in, "wall_seconds"));
  const int slots = symmetric ? 1 : order;
  std::vector<Matrix> factors(slots, Matrix(d, static_cast<Eigen::Index>(k)));
  std::vector<double> weights;
  for (std::size_t j = 0; j < k; ++j) {
    in >> tag;
    detail::require(tag == "component", "run report: expected 'component'");
    std::size_t idx;
    in >> idx;
    const double w = std::stod(detail::kv_value(in, "weight"));
    const int sign = std::stoi(detail::kv_value(in, "sign"));
    weights.push_back(sign < 0 ? -w : w);
    r.component_iterations.push_back(std::stoull(detail::kv_value(in, "iterations")));
    r.component_objectives.push_back(std::stod(detail::kv_value(in, "objective")));
    for (int s = 0; s < slots; ++s) {
      in >> tag;
      detail::require(tag == "mode", "run report: expected 'mode'");
      int mode;
      in >> mode;
      for (Eigen::Index i = 0; i < d; ++i) in >> factors[s](i, static_cast<Eigen::Index>(j));
    }
  }
  in >> tag;
  detail::require(tag == "end", "run report: missing 'end'");
  if (k > 0) {
    r.estimates = CPModel(order, std::move(weights), std::move(factors), symmetric);
  }
  return r;
}

}  // namespace olvm
