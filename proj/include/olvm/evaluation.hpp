#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "decomposition.hpp"
#include "dense_tensor.hpp"
#include "moment_oracle.hpp"

namespace olvm {

/// Sine of the angle between u and v: sup over z orthogonal to u of
/// <z, v> / (|z| |v|). Scale and sign invariant. Throws on a zero vector.
/// Evaluated as |u' - v'| |u' + v'| / 2 on the normalized vectors, which
/// equals sqrt(1 - cos^2) but keeps full relative accuracy near 0.
inline double dist(const Vector& u, const Vector& v) {
  detail::require(u.size() == v.size(), "dist: length mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  detail::require(nu > 0.0 && nv > 0.0, "dist: zero vector");
  const Vector a = u / nu;
  const Vector b = v / nv;
  return std::min(1.0, 0.5 * (a - b).norm() * (a + b).norm());
}

/// Largest per-mode dist between component i of `est` and component j of `truth`.
inline double component_dist(const CPModel& est, std::size_t i, const CPModel& truth,
                             std::size_t j) {
  const int modes = est.symmetric() && truth.symmetric() ? 1 : est.order();
  double worst = 0.0;
  for (int m = 0; m < modes; ++m)
    worst = std::max(worst, dist(est.factor(m).col(i), truth.factor(m).col(j)));
  return worst;
}

struct ComponentMatch {
  std::size_t estimate = 0;
  std::size_t truth = 0;
  double dist = 0.0;
  bool recovered = false;
};

struct MatchResult {
  std::vector<ComponentMatch> matches;  // in pick order
  std::size_t recovered = 0;
  double recovery_rate = 0.0;  // recovered / truth.k()
  double threshold = 0.0;
};

inline constexpr double kDefaultRecoveryThreshold = 0.05;

/// max(0.05, 3 sqrt(k) / d). Fixed points of the power update on incoherent
/// components sit about sqrt(k)/d away from the truth, so a fixed threshold
/// below that floor would call every component unrecovered once k grows.
inline double default_recovery_threshold(std::size_t d, std::size_t k) {
  return std::max(kDefaultRecoveryThreshold,
                  3.0 * std::sqrt(static_cast<double>(k)) / static_cast<double>(d));
}

/// Greedy matching: repeatedly pair the globally smallest component_dist among
/// unmatched (estimate, truth) pairs, ties broken by (estimate, truth) index.
/// A pair counts as recovered when its dist is at most `threshold`.
inline MatchResult match_components(const CPModel& est, const CPModel& truth,
                                    double threshold = kDefaultRecoveryThreshold) {
  MatchResult res;
  res.threshold = threshold;
  if (truth.factors().empty()) return res;
  if (est.factors().empty()) return res;
  detail::require(est.dim() == truth.dim(), "match_components: dimension mismatch");
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  pairs.reserve(est.k() * truth.k());
  for (std::size_t i = 0; i < est.k(); ++i)
    for (std::size_t j = 0; j < truth.k(); ++j)
      pairs.emplace_back(component_dist(est, i, truth, j), i, j);
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> est_used(est.k(), false), truth_used(truth.k(), false);
  for (const auto& [dv, i, j] : pairs) {
    if (est_used[i] || truth_used[j]) continue;
    est_used[i] = truth_used[j] = true;
    const bool ok = dv <= threshold;
    res.matches.push_back({i, j, dv, ok});
    if (ok) ++res.recovered;
  }
  res.recovery_rate = static_cast<double>(res.recovered) / static_cast<double>(truth.k());
  return res;
}

/// (1/modes) sum_m min_{z=+-1} |a_m - z a_hat_m|^2 for one matched pair.
inline double square_error(const CPModel& est, std::size_t i, const CPModel& truth,
                           std::size_t j) {
  const int modes = est.symmetric() && truth.symmetric() ? 1 : est.order();
  double s = 0.0;
  for (int m = 0; m < modes; ++m) {
    const Vector a = truth.factor(m).col(j);
    const Vector b = est.factor(m).col(i);
    s += std::min((a - b).squaredNorm(), (a + b).squaredNorm());
  }
  return s / modes;
}

struct RunEvaluation {
  RunReport report;
  CPModel truth;
  MatchResult match;
};

inline RunEvaluation evaluate_run(RunReport report, CPModel truth,
                                  double threshold = kDefaultRecoveryThreshold) {
  RunEvaluation ev{std::move(report), std::move(truth), {}};
  ev.match = match_components(ev.report.estimates, ev.truth, threshold);
  return ev;
}

struct TableRow {
  std::size_t k = 0;
  double avg_square_error = 0.0;
  double avg_weight_error = 0.0;
  double avg_iterations = 0.0;
  double avg_square_error_per_k = 0.0;
  double avg_weight_error_per_k = 0.0;
  std::size_t matched = 0;  // recovered components pooled over runs
  std::size_t runs = 0;
  bool empty = false;
};

/// Pools recovered components over runs: square error and squared relative
/// weight error averaged over every recovered (estimate, truth) pair; the
/// iteration column averages the per-trial counts of every successful trial.
inline TableRow table_row(const std::vector<RunEvaluation>& runs) {
  detail::require(!runs.empty(), "table_row needs at least one run");
  TableRow row;
  row.k = runs.front().truth.k();
  row.runs = runs.size();
  double se = 0.0, we = 0.0, it = 0.0;
  std::size_t trials = 0;
  for (const auto& r : runs) {
    for (const auto& m : r.match.matches) {
      if (!m.recovered) continue;
      se += square_error(r.report.estimates, m.estimate, r.truth, m.truth);
      const double w = r.truth.signed_weight(m.truth);
      const double wh = r.report.estimates.signed_weight(m.estimate);
      we += (wh - w) * (wh - w) / (w * w);
      ++row.matched;
    }
    for (const auto& t : r.report.trials)
      if (t.status == TrialStatus::ok) {
        it += static_cast<double>(t.iterations);
        ++trials;
      }
  }
  row.avg_iterations = trials ? it / static_cast<double>(trials) : 0.0;
  if (row.matched == 0) {
    row.empty = true;
    return row;
  }
  row.avg_square_error = se / static_cast<double>(row.matched);
  row.avg_weight_error = we / static_cast<double>(row.matched);
  row.avg_square_error_per_k = row.avg_square_error / static_cast<double>(row.k);
  row.avg_weight_error_per_k = row.avg_weight_error / static_cast<double>(row.k);
  return row;
}

inline void write_table_header(std::ostream& out) {
  out << "k,avg_square_error,avg_weight_error,avg_iterations,avg_square_error/k,avg_weight_error/k\n";
}

inline void write_table_row(std::ostream& out, const TableRow& r) {
  out.precision(6);
  out << std::scientific;
  out << r.k << ',' << r.avg_square_error << ',' << r.avg_weight_error << ',';
  out << std::defaultfloat << r.avg_iterations << ',' << std::scientific
      << r.avg_square_error_per_k << ',' << r.avg_weight_error_per_k << '\n';
  out << std::defaultfloat;
}

struct RecoveryPoint {
  std::size_t initializations = 0;
  double rate = 0.0;
};

/// Recovery rate against the number of initializations. The L_max trials are
/// run once; the point for L uses the first L of them (nested sets). A truth
/// component counts as recovered at L when some successful trial among the
/// first L lies within `threshold` of it (largest per-mode dist), so the
/// curve cannot decrease.
inline std::vector<RecoveryPoint> recovery_curve_from_trials(const std::vector<PowerTrial>& trials,
                                                            const CPModel& truth,
                                                            const std::vector<std::size_t>& grid,
                                                            double threshold) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    detail::require(grid[i] > grid[i - 1], "L grid must be increasing");
  const std::size_t k = truth.k();
  const int modes = truth.symmetric() ? 1 : truth.order();
  // First trial index at which each truth component is hit.
  std::vector<std::size_t> first_hit(k, std::numeric_limits<std::size_t>::max());
  for (std::size_t t = 0; t < trials.size(); ++t) {
    if (!trials[t].ok()) continue;
    for (std::size_t j = 0; j < k; ++j) {
      if (first_hit[j] <= t) continue;
      double worst = 0.0;
      for (int m = 0; m < modes && worst <= threshold; ++m)
        worst = std::max(worst, dist(trials[t].vectors[m], truth.factor(m).col(j)));
      if (worst <= threshold) first_hit[j] = t;
    }
  }
  std::vector<RecoveryPoint> out;
  for (std::size_t l : grid) {
    std::size_t hit = 0;
    for (auto f : first_hit)
      if (f < l) ++hit;
    out.push_back({l, static_cast<double>(hit) / static_cast<double>(k)});
  }
  return out;
}

inline std::vector<RecoveryPoint> recovery_curve(const MomentOracle& t, const CPModel& truth,
                                                 DecompositionConfig cfg,
                                                 const std::vector<std::size_t>& grid,
                                                 double threshold = kDefaultRecoveryThreshold) {
  detail::require(!grid.empty(), "L grid must be nonempty");
  cfg.initializations = grid.back();
  const auto inits = make_initializations(t, cfg);
  const auto trials = power_trials(t, inits, cfg);
  return recovery_curve_from_trials(trials, truth, grid, threshold);
}

}  // namespace olvm
