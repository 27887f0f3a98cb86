// olvm command-line driver: gen, decompose, experiment, concentration.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "olvm/olvm.hpp"

namespace {

constexpr int kExitCellFailure = 1;
constexpr int kExitUsage = 2;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read '" + path + "'");
  return in;
}

struct GenOptions {
  std::string model = "multiview";
  std::size_t d = 20;
  std::size_t k = 5;
  std::size_t n = 1000;
  double zeta = 0.0;
  bool balanced = false;
  std::uint64_t seed = 0;
  std::string law = "rademacher";
  std::string mixing = "sphere";
  double sparsity = 1.0;
  bool raw_variance = false;
  std::string samples_out;
  std::string truth_out;
  std::string tensor_out;
};

int run_gen(const GenOptions& o) {
  using namespace olvm;
  SampleSet samples;
  std::optional<CPModel> truth;
  std::optional<DenseTensor> tensor;
  if (o.model == "multiview" || o.model == "gmm") {
    MultiviewSpec spec;
    spec.d = o.d;
    spec.k = o.k;
    spec.zeta = o.zeta;
    spec.balanced = o.balanced;
    auto data = o.model == "multiview" ? gen_multiview(spec, o.n, o.seed)
                                       : gen_spherical_gmm(spec, o.n, o.seed);
    samples = std::move(data.samples);
    truth = std::move(data.truth);
    if (!o.tensor_out.empty())
      tensor = o.model == "multiview" ? moment_multiview(samples).densify()
                                      : moment_gmm3(samples, o.zeta * o.zeta).densify();
  } else if (o.model == "ica") {
    ICASpec spec;
    spec.d = o.d;
    spec.k = o.k;
    spec.law = parse_source_law(o.law);
    spec.sparsity = o.sparsity;
    spec.unit_variance = !o.raw_variance;
    if (o.mixing == "sphere")
      spec.mixing = MixingSource::uniform_sphere_columns;
    else if (o.mixing == "orthonormal")
      spec.mixing = MixingSource::orthonormal_columns;
    else
      throw std::invalid_argument("mixing must be sphere or orthonormal");
    auto data = gen_ica(spec, o.n, o.seed);
    if (std::all_of(data.kappa.begin(), data.kappa.end(), [](double x) { return x != 0.0; }))
      truth = ica_truth_model(data);
    else if (!o.truth_out.empty())
      std::cerr << "warning: zero kurtosis has no CP truth model; --truth not written\n";
    samples = std::move(data.samples);
    if (!o.tensor_out.empty()) {
      if (o.d > kMaxDensifyDimOrder4)
        throw std::invalid_argument("refusing to densify an order-4 tensor with d > 30");
      tensor = moment_ica4(samples).densify();
    }
  } else {
    throw std::invalid_argument("model must be multiview, gmm or ica");
  }
  if (!o.samples_out.empty()) {
    auto out = open_out(o.samples_out);
    write_samples(out, samples);
  }
  if (!o.truth_out.empty() && truth) {
    auto out = open_out(o.truth_out);
    write_run_report(out, model_record(*truth));
  }
  if (tensor) {
    auto out = open_out(o.tensor_out);
    write_tensor(out, *tensor);
  }
  std::cerr << "generated " << samples.n() << " samples, d=" << samples.dim()
            << ", views=" << samples.view_count() << '\n';
  return 0;
}

struct DecomposeOptions {
  std::string samples;
  std::string tensor;
  std::string moment = "auto";
  std::optional<double> zeta2;
  std::size_t k = 1;
  std::size_t L = 100;
  std::size_t N = 100;
  std::string stopping = "threshold";
  double t1 = 1e-8;
  double t2 = 1e-7;
  double epsilon = 0.9;
  std::string init = "random-sphere";
  std::uint64_t seed = 0;
  std::string labeled;
  std::string out;
  std::string truth;
  std::optional<double> threshold;
};

int run_decompose(const DecomposeOptions& o) {
  using namespace olvm;
  std::optional<MomentOracle> oracle;
  if (!o.tensor.empty()) {
    auto in = open_in(o.tensor);
    oracle.emplace(read_tensor(in));
  } else {
    auto in = open_in(o.samples);
    SampleSet s = read_samples(in);
    std::string kind = o.moment;
    if (kind == "auto") kind = s.view_count() == 3 ? "multiview" : "ica4";
    if (kind == "multiview") {
      oracle.emplace(moment_multiview(std::move(s)));
    } else if (kind == "gmm3") {
      const double z2 = o.zeta2 ? *o.zeta2 : estimate_gmm_variance(s, o.k);
      std::cerr << "gmm noise variance " << z2 << (o.zeta2 ? "" : " (estimated)") << '\n';
      oracle.emplace(moment_gmm3(std::move(s), z2));
    } else if (kind == "ica4") {
      oracle.emplace(moment_ica4(std::move(s)));
    } else {
      throw std::invalid_argument("moment must be auto, multiview, gmm3 or ica4");
    }
  }

  DecompositionConfig cfg;
  cfg.k_target = o.k;
  cfg.initializations = o.L;
  cfg.max_iterations = o.N;
  if (o.stopping == "threshold")
    cfg.stopping = StoppingMode::threshold;
  else if (o.stopping == "fixed")
    cfg.stopping = StoppingMode::fixed_iterations;
  else
    throw std::invalid_argument("stopping must be threshold or fixed");
  cfg.t1 = o.t1;
  cfg.t2 = o.t2;
  cfg.cluster_epsilon = o.epsilon;
  cfg.init = parse_init_method(o.init);
  cfg.seed = o.seed;
  cfg.validate();

  std::vector<InitTuple> provided;
  if (cfg.init == InitMethod::semi_supervised) {
    if (o.labeled.empty()) throw std::invalid_argument("--init semi-supervised needs --labeled");
    auto in = open_in(o.labeled);
    provided = semi_supervised_init(read_samples(in), o.k);
  }
  const RunReport rep = decompose(*oracle, cfg, provided.empty() ? nullptr : &provided);
  if (o.out.empty()) {
    write_run_report(std::cout, rep);
  } else {
    auto out = open_out(o.out);
    write_run_report(out, rep);
  }
  std::cerr << "components=" << (rep.estimates.factors().empty() ? 0 : rep.estimates.k())
            << " failed_trials=" << rep.failed_trials << " shortfall=" << rep.shortfall
            << " mean_iterations=" << rep.mean_trial_iterations()
            << " seconds=" << rep.wall_seconds << '\n';
  if (!o.truth.empty()) {
    auto in = open_in(o.truth);
    const CPModel truth = read_run_report(in).estimates;
    const double thr = o.threshold ? *o.threshold : kDefaultRecoveryThreshold;
    const auto ev = evaluate_run(rep, truth, thr);
    std::cerr << "recovered=" << ev.match.recovered << '/' << truth.k()
              << " threshold=" << thr << '\n';
  }
  return rep.failed_trials == 0 ? 0 : kExitCellFailure;
}

struct SweepOptions {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::string curves;
  std::string slopes;
  bool quiet = false;
};

olvm::ExperimentConfig load_config(const SweepOptions& o) {
  olvm::ExperimentConfig cfg;
  if (!o.config.empty()) cfg.load_file(o.config);
  for (const auto& kv : o.sets) cfg.assign(kv);
  return cfg;
}

int run_experiment(const std::string& which, const SweepOptions& o) {
  using namespace olvm;
  const ExperimentConfig cfg = load_config(o);
  const MultiviewExperiment e = multiview_experiment(cfg);
  const auto cells = run_multiview_experiment(e, o.quiet ? nullptr : &std::cerr);
  bool ok = true;
  auto emit = [&](const std::string& path, auto writer) {
    if (path.empty()) {
      ok = writer(std::cout, cfg, cells) && ok;
    } else {
      auto out = open_out(path);
      ok = writer(out, cfg, cells) && ok;
    }
  };
  if (which == "table1" || which == "all") emit(o.out, write_table1);
  if (which == "fig3") emit(o.out, write_fig3);
  if (which == "all") {
    if (o.curves.empty()) throw std::invalid_argument("experiment all needs --curves");
    emit(o.curves, write_fig3);
  }
  return ok ? 0 : kExitCellFailure;
}

int run_concentration_cmd(const SweepOptions& o) {
  using namespace olvm;
  const ExperimentConfig cfg = load_config(o);
  const auto specs = concentration_specs(cfg);
  const auto results = run_concentration(specs, o.quiet ? nullptr : &std::cerr);
  if (o.out.empty() || o.slopes.empty())
    throw std::invalid_argument("concentration needs --out and --slopes");
  auto raw = open_out(o.out);
  auto slopes = open_out(o.slopes);
  return write_concentration(raw, slopes, cfg, results) ? 0 : kExitCellFailure;
}

void add_sweep_options(CLI::App* cmd, SweepOptions& o) {
  cmd->add_option("-c,--config", o.config, "key=value config file");
  cmd->add_option("--set", o.sets, "override one config key (key=value), repeatable");
  cmd->add_flag("-q,--quiet", o.quiet, "no progress log on stderr");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overcomplete latent variable models via tensor power updates"};
  app.set_version_flag("--version", std::string(olvm::version()));
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "draw samples from a synthetic model");
  g->add_option("--model", gen.model, "multiview | gmm | ica")->capture_default_str();
  g->add_option("--d", gen.d)->capture_default_str();
  g->add_option("--k", gen.k)->capture_default_str();
  g->add_option("--n", gen.n)->capture_default_str();
  g->add_option("--zeta", gen.zeta, "noise scale per coordinate")->capture_default_str();
  g->add_flag("--balanced", gen.balanced, "exactly n/k samples per label");
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--law", gen.law, "rademacher | uniform | bernoulli-gaussian | gaussian")
      ->capture_default_str();
  g->add_option("--mixing", gen.mixing, "sphere | orthonormal")->capture_default_str();
  g->add_option("--sparsity", gen.sparsity, "expected support size s")->capture_default_str();
  g->add_flag("--raw-variance", gen.raw_variance, "bernoulli-gaussian with g ~ N(0,1)");
  g->add_option("-o,--out", gen.samples_out, "samples file")->required();
  g->add_option("--truth", gen.truth_out, "ground-truth model record");
  g->add_option("--tensor", gen.tensor_out, "densified empirical moment tensor");

  DecomposeOptions dec;
  auto* d = app.add_subcommand("decompose", "recover components from samples or a tensor");
  auto* src = d->add_option_group("source");
  src->add_option("--samples", dec.samples, "samples file");
  src->add_option("--tensor", dec.tensor, "dense tensor file");
  src->require_option(1);
  d->add_option("--moment", dec.moment, "auto | multiview | gmm3 | ica4")->capture_default_str();
  d->add_option("--zeta2", dec.zeta2, "gmm noise variance (estimated when omitted)");
  d->add_option("--k", dec.k, "components to report")->capture_default_str();
  d->add_option("--L", dec.L, "initializations")->capture_default_str();
  d->add_option("--N", dec.N, "maximum iterations per trial")->capture_default_str();
  d->add_option("--stopping", dec.stopping, "threshold | fixed")->capture_default_str();
  d->add_option("--t1", dec.t1)->capture_default_str();
  d->add_option("--t2", dec.t2)->capture_default_str();
  d->add_option("--epsilon", dec.epsilon, "clustering correlation cut is epsilon/2")
      ->capture_default_str();
  d->add_option("--init", dec.init, "random-sphere | svd-slice | semi-supervised")
      ->capture_default_str();
  d->add_option("--seed", dec.seed)->capture_default_str();
  d->add_option("--labeled", dec.labeled, "labeled samples for semi-supervised init");
  d->add_option("-o,--out", dec.out, "run report (stdout when omitted)");
  d->add_option("--truth", dec.truth, "ground-truth record to score against");
  d->add_option("--threshold", dec.threshold, "recovery dist threshold");

  SweepOptions exp;
  std::string which;
  auto* e = app.add_subcommand("experiment", "multiview reproduction runs");
  e->add_option("which", which, "table1 | fig3 | all")
      ->required()
      ->check(CLI::IsMember({"table1", "fig3", "all"}));
  add_sweep_options(e, exp);
  e->add_option("-o,--out", exp.out, "CSV output (stdout when omitted)");
  e->add_option("--curves", exp.curves, "recovery-curve CSV for 'all'");

  SweepOptions conc;
  auto* c = app.add_subcommand("concentration", "error-norm sweeps over n");
  add_sweep_options(c, conc);
  c->add_option("-o,--out", conc.out, "raw CSV")->required();
  c->add_option("--slopes", conc.slopes, "slope summary CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) return run_gen(gen);
    if (*d) return run_decompose(dec);
    if (*e) return run_experiment(which, exp);
    if (*c) return run_concentration_cmd(conc);
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitCellFailure;
  }
  return kExitUsage;
}
