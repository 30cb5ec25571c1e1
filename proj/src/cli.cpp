#include "bmdp/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "bmdp/experiment.hpp"
#include "bmdp/improve.hpp"
#include "bmdp/misclassification.hpp"
#include "bmdp/spectral.hpp"

namespace bmdp {

namespace {

struct GenOptions {
  std::size_t n = 100, S = 3, A = 3, H = 20;
  std::uint64_t seed = 0;
  bool hard = false;
  double eps0 = 0.0, eps1 = 0.0, kappa = 0.5;
  double p_alpha = 1.0, q_alpha = 0.0;
  std::size_t grid = kDefaultCGridSize;
  std::string out;
};

struct RunOptions {
  std::string config;
  std::optional<std::size_t> n, S, A, H, K, runs, threads, checkpoint_every;
  std::optional<std::uint64_t> theta_clust, seed;
  std::optional<double> bonus_scale;
  std::vector<std::string> algos;
  std::optional<std::string> out, model;
};

struct BenchOptions {
  std::size_t n = 100, S = 3, A = 3, H = 20;
  std::uint64_t seed = 0;
  std::size_t seeds = 5;
  std::vector<std::uint64_t> T{100000, 200000, 400000};
};

Bmdp generate(const GenOptions& o) {
  if (o.hard) {
    HardInstanceSpec spec;
    spec.n = o.n;
    spec.S = o.S;
    spec.A = o.A;
    spec.H = o.H;
    spec.eps0 = o.eps0;
    spec.eps1 = o.eps1;
    spec.kappa = o.kappa;
    spec.seed = o.seed;
    return build_hard_bmdp(spec);
  }
  DirichletSpec spec;
  spec.n = o.n;
  spec.S = o.S;
  spec.A = o.A;
  spec.H = o.H;
  spec.p_alpha = o.p_alpha;
  spec.q_alpha = o.q_alpha;
  spec.seed = o.seed;
  return gen_dirichlet(spec);
}

int cmd_gen(const GenOptions& o, std::ostream& out) {
  const Bmdp model = generate(o);
  Json report = report_to_json(structure_report(model, o.grid));
  if (o.hard) report["eta_p_closed_form"] = hard_eta_closed_form(std::max(o.eps0, o.eps1), o.kappa);
  report["model_hash"] = model_hash(model);
  if (o.out.empty()) {
    out << Json{{"model", model_to_json(model)}, {"report", report}}.dump(1) << '\n';
  } else {
    const std::filesystem::path path(o.out);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_model(model, path);
    std::filesystem::path report_path = path;
    report_path.replace_extension(".report.json");
    write_json_file(report, report_path);
    out << "wrote " << path.string() << " and " << report_path.string() << '\n';
    out << report.dump(1) << '\n';
  }
  return 0;
}

int cmd_run(const RunOptions& o, std::ostream& out) {
  ExperimentSpec spec = o.config.empty() ? ExperimentSpec{} : read_config(o.config);
  if (o.model) {
    spec.instance = InstanceKind::file;
    spec.model_path = *o.model;
  }
  auto& d = spec.dirichlet;
  auto& h = spec.hard;
  const bool hard = spec.instance == InstanceKind::hard;
  if (o.n) (hard ? h.n : d.n) = *o.n;
  if (o.S) (hard ? h.S : d.S) = *o.S;
  if (o.A) (hard ? h.A : d.A) = *o.A;
  if (o.H) (hard ? h.H : d.H) = *o.H;
  if (o.seed) {
    spec.base_seed = *o.seed;
    (hard ? h.seed : d.seed) = *o.seed;
  }
  if (o.K) spec.episodes = *o.K;
  if (o.runs) spec.runs = *o.runs;
  if (o.threads) spec.threads = *o.threads;
  if (o.checkpoint_every) spec.checkpoint_every = *o.checkpoint_every;
  if (o.theta_clust) spec.theta_clust = *o.theta_clust;
  if (o.bonus_scale) spec.bonus_scale = *o.bonus_scale;
  if (!o.algos.empty()) {
    spec.algorithms.clear();
    for (const auto& a : o.algos) spec.algorithms.push_back(parse_algorithm(a));
  }
  if (o.out) spec.output_dir = *o.out;
  check_spec(spec);

  const ExperimentResult res = run_experiment(spec);
  out << "instance " << res.instance_hash << " eta " << format_double(res.structure.eta) << '\n';
  for (const auto& [algo, ar] : res.results) {
    if (ar.curve.mean_cum_regret.empty()) continue;
    std::size_t exact = 0;
    for (const auto& r : ar.runs) exact += r.clustering_exact ? 1 : 0;
    out << display_name(algo) << ": final mean cumulative regret " << format_double(ar.curve.mean_cum_regret.back())
        << " +- " << format_double(ar.curve.ci_halfwidth.back()) << " (" << ar.csv_path.string() << ")";
    if (algo == Algorithm::bucbvi) out << ", exact decoding in " << exact << "/" << ar.runs.size() << " runs";
    out << '\n';
  }
  return 0;
}

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  DirichletSpec spec;
  spec.n = o.n;
  spec.S = o.S;
  spec.A = o.A;
  spec.H = o.H;
  out << "T,seed,spectral_errors,improved_errors\n";
  for (std::size_t i = 0; i < o.seeds; ++i) {
    spec.seed = o.seed + i;
    const Bmdp model = gen_dirichlet(spec);
    const TabularPolicy uniform = TabularPolicy::uniform(model.horizon, model.n_contexts, model.n_actions);
    for (std::uint64_t T : o.T) {
      Rng rng = Rng::stream(spec.seed, T);
      TransitionCounts counts(model.n_contexts, model.n_actions);
      const std::uint64_t episodes = (T + model.horizon - 1) / model.horizon;
      for (std::uint64_t k = 0; k < episodes; ++k) counts.add_episode(sample_episode(model, uniform, rng));
      const std::uint64_t elapsed = episodes * model.horizon;
      const SpectralResult sp = spectral_cluster(counts, elapsed, model.n_states, rng.next_u64());
      const DecodingEstimate im = improve_clusters(counts, sp.estimate, model.n_states);
      out << elapsed << ',' << spec.seed << ','
          << misclassification(sp.estimate.labels, model.decoding, model.n_states).count << ','
          << misclassification(im.labels, model.decoding, model.n_states).count << '\n';
    }
  }
  return 0;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const Bmdp model = read_model(path);
  const auto violations = validate(model);
  if (violations.empty()) {
    out << path << ": ok\n";
    return 0;
  }
  for (const auto& v : violations) {
    err << v.field << " [";
    for (std::size_t i = 0; i < v.indices.size(); ++i) err << (i ? "," : "") << v.indices[i];
    err << "] magnitude " << format_double(v.magnitude) << ": " << v.message << '\n';
  }
  err << path << ": " << violations.size() << " violation(s)\n";
  return 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Block MDP toolkit: instance generation, clustering and regret experiments", "bmdp"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate an instance and print its structure report");
  g->add_option("--n", gen.n, "Number of contexts");
  g->add_option("--S", gen.S, "Number of latent states");
  g->add_option("--A", gen.A, "Number of actions");
  g->add_option("--H", gen.H, "Horizon");
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_flag("--hard", gen.hard, "Build a hard-class instance instead of a Dirichlet one");
  g->add_option("--eps0", gen.eps0, "Advantage of the optimal action from the non-rewarding half");
  g->add_option("--eps1", gen.eps1, "Advantage of the optimal action from the rewarding half");
  g->add_option("--kappa", gen.kappa, "Packing amplitude");
  g->add_option("--p-alpha", gen.p_alpha, "Dirichlet concentration of latent transitions");
  g->add_option("--q-alpha", gen.q_alpha, "Dirichlet concentration of emissions (0: sqrt(n))");
  g->add_option("--grid", gen.grid, "Size of the c grid for the psi bounds");
  g->add_option("--out", gen.out, "Model JSON path; the report goes next to it");

  RunOptions run;
  auto* r = app.add_subcommand("run", "Run a regret experiment");
  r->add_option("--config", run.config, "Flat key = value experiment file")->check(CLI::ExistingFile);
  r->add_option("--model", run.model, "Use a model JSON file as the instance");
  r->add_option("--n", run.n, "Number of contexts");
  r->add_option("--S", run.S, "Number of latent states");
  r->add_option("--A", run.A, "Number of actions");
  r->add_option("--H", run.H, "Horizon");
  r->add_option("--K", run.K, "Episodes per run");
  r->add_option("--theta-clust", run.theta_clust, "Exploration budget in transitions (default n S^3 A ln^2 n)");
  r->add_option("--algo", run.algos, "Comma-separated: bucbvi, ucbvi_ch, ucbvi_bf, uniform")->delimiter(',');
  r->add_option("--runs", run.runs, "Runs per algorithm");
  r->add_option("--seed", run.seed, "Instance seed and base run seed");
  r->add_option("--out", run.out, "Output directory");
  r->add_option("--threads", run.threads, "Worker threads (0: all cores)");
  r->add_option("--checkpoint-every", run.checkpoint_every, "Episodes between checkpoints (0: off)");
  r->add_option("--bonus-scale", run.bonus_scale, "Multiplier on every bonus");

  BenchOptions bench;
  auto* b = app.add_subcommand("cluster-bench", "Clustering error versus number of uniform transitions");
  b->add_option("--n", bench.n, "Number of contexts");
  b->add_option("--S", bench.S, "Number of latent states");
  b->add_option("--A", bench.A, "Number of actions");
  b->add_option("--H", bench.H, "Horizon");
  b->add_option("--seed", bench.seed, "First instance seed");
  b->add_option("--seeds", bench.seeds, "Number of instances");
  b->add_option("--T", bench.T, "Comma-separated transition budgets")->delimiter(',');

  std::string model_path;
  auto* v = app.add_subcommand("validate", "Check a model JSON file");
  v->add_option("model", model_path, "Model JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*g) return cmd_gen(gen, out);
    if (*r) return cmd_run(run, out);
    if (*b) return cmd_bench(bench, out);
    if (*v) return cmd_validate(model_path, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace bmdp
