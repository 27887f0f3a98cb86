#pragma once

// Experiment drivers: flat key=value configuration, the multiview
// reproduction pipeline (table and recovery curves), and concentration sweeps.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "concentration.hpp"
#include "decomposition.hpp"
#include "evaluation.hpp"
#include "models.hpp"
#include "moment_oracle.hpp"
#include "random.hpp"

#ifndef OLVM_VERSION
#define OLVM_VERSION "0.1.0"
#endif

namespace olvm {

inline const char* version() { return OLVM_VERSION; }

/// Flat key=value configuration. Every key has a documented default; unknown
/// keys are rejected so typos never pass silently.
class ExperimentConfig {
 public:
  ExperimentConfig() : values_(defaults()) {}

  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        // shared
        {"seed", "0"},
        {"runs", "10"},
        // multiview reproduction
        {"d", "100"},
        {"n", "1000"},
        {"zeta_sqrt_d", "0.1"},
        {"k_grid", "10,20,50,100,200"},
        {"full_grid", "0"},
        {"L_per_k", "100"},
        {"L_cap", "20000"},
        {"max_iterations", "100"},
        {"stopping", "threshold"},
        {"t1", "1e-08"},
        {"t2", "1e-07"},
        {"cluster_epsilon", "0.9"},
        {"recovery_threshold", "auto"},
        {"L_grid", "auto"},
        // concentration sweeps
        {"preset", "default"},
        {"model", "multiview"},
        {"k", "auto"},
        {"regime", "low"},
        {"zeta", "auto"},
        {"law", "rademacher"},
        {"sparsity", "2"},
        {"s_grid", "2,4,8,16"},
        {"n_grid", "2000,8000,32000"},
        {"seeds", "10"},
        {"restarts", "32"},
        {"norm_iterations", "100"},
    };
    return d;
  }

  void set(const std::string& key, const std::string& value) {
    if (!defaults().count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
    values_[key] = value;
  }

  /// Applies one "key=value" assignment.
  void assign(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + kv + "'");
    set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }

  /// Reads "key = value" lines; '#' starts a comment.
  void load(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (!line.empty()) assign(line);
    }
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    load(in);
  }

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    return it->second;
  }

  double real(const std::string& key) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(str(key), &pos);
      if (pos != str(key).size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("config key '" + key + "' must be a number, got '" + str(key) + "'");
    }
  }

  std::uint64_t integer(const std::string& key) const {
    const double v = real(key);
    if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v)))
      throw std::invalid_argument("config key '" + key + "' must be a nonnegative integer");
    return static_cast<std::uint64_t>(v);
  }

  bool flag(const std::string& key) const { return integer(key) != 0; }
  bool is_auto(const std::string& key) const { return str(key) == "auto"; }

  std::vector<std::size_t> list(const std::string& key) const {
    std::vector<std::size_t> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        std::size_t pos = 0;
        const double v = std::stod(item, &pos);
        if (pos != item.size() || v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
          throw std::invalid_argument("");
        out.push_back(static_cast<std::size_t>(v));
      } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "' must be a list of integers");
      }
    }
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  /// "# olvm <version>" then one "# key=value" line per key, sorted.
  void write_header(std::ostream& out, const std::string& command) const {
    out << "# olvm " << version() << '\n';
    out << "# command=" << command << '\n';
    for (const auto& [k, v] : values_) out << "# " << k << '=' << v << '\n';
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
};

// Multiview reproduction ----------------------------------------------------

struct MultiviewExperiment {
  std::size_t d = 100;
  std::size_t n = 1000;
  double zeta = 0.01;
  std::vector<std::size_t> k_grid;
  std::size_t runs = 10;
  std::size_t L_per_k = 100;
  std::size_t L_cap = 20000;
  std::optional<std::vector<std::size_t>> L_grid;  // empty = per-k default
  std::optional<double> recovery_threshold;        // empty = default_recovery_threshold
  DecompositionConfig base;
  std::uint64_t seed = 0;

  std::size_t initializations(std::size_t k) const { return std::min(L_per_k * k, L_cap); }

  double threshold(std::size_t k) const {
    return recovery_threshold ? *recovery_threshold : default_recovery_threshold(d, k);
  }

  /// 1, 2, 5, 10, 20, 50, ... below L(k), then L(k) itself.
  std::vector<std::size_t> grid(std::size_t k) const {
    const std::size_t lmax = initializations(k);
    std::vector<std::size_t> g;
    if (L_grid) {
      for (auto l : *L_grid)
        if (l <= lmax) g.push_back(l);
      if (g.empty() || g.back() != lmax) g.push_back(lmax);
      return g;
    }
    for (std::size_t decade = 1; decade < lmax; decade *= 10)
      for (std::size_t m : {1, 2, 5})
        if (m * decade < lmax) g.push_back(m * decade);
    g.push_back(lmax);
    return g;
  }

  void validate() const {
    detail::require(d >= 2, "d must be >= 2");
    detail::require(n >= 1, "n must be >= 1");
    detail::require(!k_grid.empty(), "k_grid must not be empty");
    detail::require(runs >= 1, "runs must be >= 1");
    detail::require(L_per_k >= 1 && L_cap >= 1, "L_per_k and L_cap must be >= 1");
    for (auto k : k_grid) detail::require(k >= 1 && n % k == 0, "balanced labels need k | n");
    base.validate();
  }
};

inline MultiviewExperiment multiview_experiment(const ExperimentConfig& c) {
  MultiviewExperiment e;
  e.d = c.integer("d");
  e.n = c.integer("n");
  e.zeta = c.real("zeta_sqrt_d") / std::sqrt(static_cast<double>(e.d));
  e.k_grid = c.list("k_grid");
  if (c.flag("full_grid") && std::find(e.k_grid.begin(), e.k_grid.end(), 500) == e.k_grid.end())
    e.k_grid.push_back(500);
  e.runs = c.integer("runs");
  e.L_per_k = c.integer("L_per_k");
  e.L_cap = c.integer("L_cap");
  if (!c.is_auto("L_grid")) e.L_grid = c.list("L_grid");
  if (!c.is_auto("recovery_threshold")) e.recovery_threshold = c.real("recovery_threshold");
  e.base.max_iterations = c.integer("max_iterations");
  const std::string stop = c.str("stopping");
  if (stop == "threshold")
    e.base.stopping = StoppingMode::threshold;
  else if (stop == "fixed")
    e.base.stopping = StoppingMode::fixed_iterations;
  else
    throw std::invalid_argument("stopping must be 'threshold' or 'fixed'");
  e.base.t1 = c.real("t1");
  e.base.t2 = c.real("t2");
  e.base.cluster_epsilon = c.real("cluster_epsilon");
  e.base.init = InitMethod::random_sphere;
  e.seed = c.integer("seed");
  e.validate();
  return e;
}

struct MultiviewRun {
  std::size_t k = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  RunEvaluation evaluation;
  std::vector<RecoveryPoint> curve;
};

/// One run for one k: generate balanced data, build the implicit moment, run
/// L(k) random trials once, then cluster (table) and read the recovery curve
/// off the same trials.
inline MultiviewRun multiview_run(const MultiviewExperiment& e, std::size_t k, std::size_t run) {
  const SeedStream stream = SeedStream(e.seed).child(streams::kExperimentRun).child(k).child(run);
  MultiviewSpec spec;
  spec.d = e.d;
  spec.k = k;
  spec.zeta = e.zeta;
  spec.balanced = true;
  auto data = gen_multiview(spec, e.n, stream.child(0).key());
  const MomentOracle t(moment_multiview(std::move(data.samples)));

  DecompositionConfig cfg = e.base;
  cfg.k_target = k;
  cfg.initializations = e.initializations(k);
  cfg.seed = stream.child(1).key();
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto trials = power_trials(t, make_initializations(t, cfg), cfg);
  if (std::none_of(trials.begin(), trials.end(), [](const PowerTrial& p) { return p.ok(); }))
    throw std::runtime_error("every trial failed");
  RunReport rep = assemble_report(t, trials, cluster_candidates(t, trials, cfg), cfg);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  MultiviewRun out;
  out.k = k;
  out.run = run;
  out.seed = stream.key();
  out.curve = recovery_curve_from_trials(trials, data.truth, e.grid(k), e.threshold(k));
  out.evaluation = evaluate_run(std::move(rep), std::move(data.truth), e.threshold(k));
  return out;
}

struct KCell {
  std::size_t k = 0;
  std::vector<MultiviewRun> runs;
  std::vector<std::string> errors;  // one entry per failed run
};

inline std::vector<KCell> run_multiview_experiment(const MultiviewExperiment& e,
                                                   std::ostream* log = nullptr) {
  e.validate();
  std::vector<KCell> cells;
  for (std::size_t k : e.k_grid) {
    KCell cell;
    cell.k = k;
    for (std::size_t r = 0; r < e.runs; ++r) {
      try {
        cell.runs.push_back(multiview_run(e, k, r));
        if (log)
          *log << "k=" << k << " run=" << r << " recovered="
               << cell.runs.back().evaluation.match.recovered << '/' << k << " seconds="
               << cell.runs.back().evaluation.report.wall_seconds << '\n';
      } catch (const std::exception& ex) {
        cell.errors.push_back("run " + std::to_string(r) + ": " + ex.what());
        if (log) *log << "k=" << k << " run=" << r << " failed: " << ex.what() << '\n';
      }
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

inline std::vector<TableRow> table_rows(const std::vector<KCell>& cells) {
  std::vector<TableRow> rows;
  for (const auto& c : cells) {
    if (c.runs.empty()) continue;
    std::vector<RunEvaluation> evs;
    for (const auto& r : c.runs) evs.push_back(r.evaluation);
    rows.push_back(table_row(evs));
  }
  return rows;
}

struct CurvePoint {
  std::size_t k = 0;
  std::size_t initializations = 0;
  double median_rate = 0.0;
  double mean_rate = 0.0;
};

inline double median(std::vector<double> v) {
  detail::require(!v.empty(), "median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Per k and L: median and mean recovery rate over the successful runs.
inline std::vector<CurvePoint> curve_points(const std::vector<KCell>& cells) {
  std::vector<CurvePoint> out;
  for (const auto& c : cells) {
    if (c.runs.empty()) continue;
    const auto& grid = c.runs.front().curve;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      std::vector<double> rates;
      for (const auto& r : c.runs) rates.push_back(r.curve[g].rate);
      double mean = 0.0;
      for (double x : rates) mean += x;
      mean /= static_cast<double>(rates.size());
      out.push_back({c.k, grid[g].initializations, median(rates), mean});
    }
  }
  return out;
}

inline void write_cell_errors(std::ostream& out, const std::vector<KCell>& cells) {
  for (const auto& c : cells)
    for (const auto& e : c.errors) out << "# error k=" << c.k << ' ' << e << '\n';
}

/// Table-shaped CSV. Returns false when any cell failed.
inline bool write_table1(std::ostream& out, const ExperimentConfig& cfg,
                         const std::vector<KCell>& cells) {
  cfg.write_header(out, "experiment table1");
  write_cell_errors(out, cells);
  write_table_header(out);
  for (const auto& row : table_rows(cells)) write_table_row(out, row);
  return std::all_of(cells.begin(), cells.end(), [](const KCell& c) { return c.errors.empty(); });
}

inline bool write_fig3(std::ostream& out, const ExperimentConfig& cfg,
                       const std::vector<KCell>& cells) {
  cfg.write_header(out, "experiment fig3");
  write_cell_errors(out, cells);
  out << "k,L,rate,mean_rate\n";
  out.precision(6);
  for (const auto& p : curve_points(cells))
    out << p.k << ',' << p.initializations << ',' << p.median_rate << ',' << p.mean_rate << '\n';
  return std::all_of(cells.begin(), cells.end(), [](const KCell& c) { return c.errors.empty(); });
}

// Concentration sweeps ------------------------------------------------------

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRow> rows;
  std::optional<ScalingFit> fit;
  std::vector<std::string> errors;
};

/// Sweeps described by the config. preset=default runs the three slope
/// regimes (multiview low noise d=k=50, multiview high noise d=k=30, ICA
/// d=k=10); preset=custom runs one sweep from model/d/k/regime/zeta/law/n_grid,
/// or one sweep per s in s_grid for model=sparse-ica. Custom sweeps read d
/// from the shared d key and k from k (auto = d).
inline std::vector<SweepSpec> concentration_specs(const ExperimentConfig& c) {
  SpectralNormOptions norm;
  norm.restarts = c.integer("restarts");
  norm.iterations = c.integer("norm_iterations");
  const std::uint64_t seed = c.integer("seed");
  const std::size_t seeds = c.integer("seeds");
  const auto n_grid = c.list("n_grid");
  detail::require(!n_grid.empty(), "n_grid must not be empty");

  auto base = [&](SweepModel m, std::size_t d, std::size_t k, std::string regime) {
    SweepSpec s;
    s.model = m;
    s.d = d;
    s.k = k;
    s.regime = std::move(regime);
    s.n_grid = n_grid;
    s.seeds = seeds;
    s.norm = norm;
    s.root_seed = SeedStream(seed).child(static_cast<std::uint64_t>(m)).child(d).key();
    return s;
  };

  std::vector<SweepSpec> out;
  const std::string preset = c.str("preset");
  if (preset == "default") {
    auto low = base(SweepModel::multiview, 50, 50, "low");
    low.zeta = 1.0 / std::sqrt(50.0);
    auto high = base(SweepModel::multiview, 30, 30, "high");
    high.zeta = 1.0;
    high.root_seed = SeedStream(high.root_seed).child(1).key();
    auto ica = base(SweepModel::ica, 10, 10, "rademacher");
    ica.n_grid = {1000, 4000, 16000};
    out = {low, high, ica};
  } else if (preset == "custom") {
    const SweepModel m = parse_sweep_model(c.str("model"));
    const std::size_t d = c.integer("d");
    const std::size_t k = c.is_auto("k") ? d : c.integer("k");
    if (m == SweepModel::sparse_ica) {
      for (std::size_t s : c.list("s_grid")) {
        auto spec = base(m, d, k, "s=" + std::to_string(s));
        spec.sparsity = static_cast<double>(s);
        spec.root_seed = SeedStream(spec.root_seed).child(s).key();
        out.push_back(spec);
      }
    } else {
      auto spec = base(m, d, k, c.str("regime"));
      if (m == SweepModel::multiview) {
        const std::string r = c.str("regime");
        if (!c.is_auto("zeta"))
          spec.zeta = c.real("zeta");
        else if (r == "low")
          spec.zeta = 1.0 / std::sqrt(static_cast<double>(d));
        else if (r == "high")
          spec.zeta = 1.0;
        else
          throw std::invalid_argument("multiview regime must be low or high unless zeta is set");
      } else {
        spec.law = parse_source_law(c.str("law"));
        spec.regime = c.str("law");
      }
      out.push_back(spec);
    }
  } else {
    throw std::invalid_argument("preset must be 'default' or 'custom'");
  }
  for (const auto& s : out) s.validate();
  return out;
}

inline std::vector<SweepResult> run_concentration(const std::vector<SweepSpec>& specs,
                                                  std::ostream* log = nullptr) {
  std::vector<SweepResult> out;
  for (const auto& spec : specs) {
    SweepResult res;
    res.spec = spec;
    const SeedStream root(spec.root_seed);
    for (std::size_t n : spec.n_grid)
      for (std::size_t s = 0; s < spec.seeds; ++s) {
        try {
          res.rows.push_back(sweep_cell(spec, n, root.child(n).child(s).key()));
        } catch (const std::exception& ex) {
          res.errors.push_back("n=" + std::to_string(n) + " seed " + std::to_string(s) + ": " +
                               ex.what());
        }
      }
    try {
      res.fit = fit_sweep(res.rows);
    } catch (const std::exception& ex) {
      res.errors.push_back(std::string("slope fit: ") + ex.what());
    }
    if (log) {
      *log << to_string(spec.model) << " d=" << spec.d << " k=" << spec.k << " regime="
           << spec.regime;
      if (res.fit) *log << " slope=" << res.fit->slope << " intercept=" << res.fit->intercept;
      *log << " errors=" << res.errors.size() << '\n';
    }
    out.push_back(std::move(res));
  }
  return out;
}

inline bool write_concentration(std::ostream& raw, std::ostream& slopes,
                                const ExperimentConfig& cfg,
                                const std::vector<SweepResult>& results) {
  cfg.write_header(raw, "concentration");
  cfg.write_header(slopes, "concentration");
  bool ok = true;
  for (const auto& r : results)
    for (const auto& e : r.errors) {
      raw << "# error " << to_string(r.spec.model) << ' ' << r.spec.regime << ' ' << e << '\n';
      ok = false;
    }
  write_sweep_header(raw);
  for (const auto& r : results) write_sweep_rows(raw, r.rows);
  slopes << "model,d,k,regime,slope,intercept,slope_stddev,points,excluded\n";
  slopes.precision(6);
  for (const auto& r : results) {
    if (!r.fit) continue;
    slopes << to_string(r.spec.model) << ',' << r.spec.d << ',' << r.spec.k << ','
           << r.spec.regime << ',' << r.fit->slope << ',' << r.fit->intercept << ','
           << r.fit->slope_stddev << ',' << r.fit->used << ',' << r.fit->excluded << '\n';
  }
  return ok;
}

}  // namespace olvm
