#include "bmdp/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bmdp/model_io.hpp"

namespace bmdp {

namespace fs = std::filesystem;

void check_spec(const ExperimentSpec& spec) {
  if (spec.episodes == 0) throw std::invalid_argument("episodes must be at least 1");
  if (spec.runs == 0) throw std::invalid_argument("runs must be at least 1");
  if (spec.algorithms.empty()) throw std::invalid_argument("no algorithms given");
  if (spec.instance == InstanceKind::file && spec.model_path.empty()) throw std::invalid_argument("model_path is empty");
  if (spec.output_dir.empty()) throw std::invalid_argument("output_dir is empty");
  LearnerConfig probe;
  probe.bonus_scale = spec.bonus_scale;
  probe.bf_c1 = spec.bf_c1;
  probe.bf_c2 = spec.bf_c2;
  check_config(probe);
}

Bmdp make_instance(const ExperimentSpec& spec) {
  switch (spec.instance) {
    case InstanceKind::dirichlet: return gen_dirichlet(spec.dirichlet);
    case InstanceKind::hard: return build_hard_bmdp(spec.hard);
    case InstanceKind::file: {
      Bmdp m = read_model(spec.model_path);
      require_valid(m);
      return m;
    }
  }
  throw std::logic_error("unreachable");
}

LearnerConfig learner_config(const ExperimentSpec& spec, const Bmdp& m, Algorithm algorithm, std::size_t run) {
  LearnerConfig c;
  c.algorithm = algorithm;
  c.theta_clust = spec.theta_clust ? *spec.theta_clust
                                   : default_theta_clust(m.n_contexts, m.n_states, m.n_actions, m.horizon);
  c.bonus_scale = spec.bonus_scale;
  c.bf_c1 = spec.bf_c1;
  c.bf_c2 = spec.bf_c2;
  c.seed = spec.base_seed + run;
  return c;
}

std::string csv_name(Algorithm algorithm, const Bmdp& m, std::size_t K) {
  std::ostringstream s;
  s << display_name(algorithm) << "_n" << m.n_contexts << "_S" << m.n_states << "_A" << m.n_actions << "_h" << m.horizon
    << "_K" << K << ".csv";
  return s.str();
}

RegretCurve aggregate(const std::vector<std::vector<double>>& per_run, std::size_t H) {
  if (per_run.empty()) throw std::invalid_argument("aggregate: no runs");
  const std::size_t K = per_run.front().size();
  for (const auto& r : per_run) {
    if (r.size() != K) throw std::invalid_argument("aggregate: runs differ in length");
  }
  const double R = static_cast<double>(per_run.size());
  RegretCurve c;
  c.per_run = per_run;
  c.time.resize(K);
  c.mean_cum_regret.resize(K);
  c.ci_halfwidth.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    c.time[k] = (k + 1) * H;
    // Shifted by the first run so that identical runs give exactly zero spread.
    const double shift = per_run.front()[k];
    double sum = 0.0;
    for (const auto& r : per_run) sum += r[k] - shift;
    const double offset = sum / R;
    c.mean_cum_regret[k] = shift + offset;
    if (per_run.size() >= 2) {
      double ss = 0.0;
      for (const auto& r : per_run) ss += (r[k] - shift - offset) * (r[k] - shift - offset);
      c.ci_halfwidth[k] = 1.96 * std::sqrt(ss / (R - 1.0)) / std::sqrt(R);
    }
  }
  return c;
}

void write_csv(const RegretCurve& curve, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "Time,Regret,CiHalfwidth\n";
  for (std::size_t k = 0; k < curve.time.size(); ++k) {
    out << curve.time[k] << ',' << format_double(curve.mean_cum_regret[k]) << ',' << format_double(curve.ci_halfwidth[k])
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

RegretCurve read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "Time,Regret,CiHalfwidth") {
    throw std::invalid_argument(path.string() + ": unexpected header");
  }
  RegretCurve c;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw std::invalid_argument(path.string() + ": bad row");
    const std::string_view v(line);
    c.time.push_back(parse_uint(v.substr(0, c1)));
    c.mean_cum_regret.push_back(parse_double(v.substr(c1 + 1, c2 - c1 - 1)));
    c.ci_halfwidth.push_back(parse_double(v.substr(c2 + 1)));
  }
  return c;
}

namespace {

struct Job {
  Algorithm algorithm;
  std::size_t slot;  // index into algorithms
  std::size_t run;
};

struct JobOutput {
  RunSummary summary;
  std::vector<double> cumulative;
};

fs::path checkpoint_path(const ExperimentSpec& spec, Algorithm a, std::size_t run) {
  return fs::path(spec.output_dir) / "checkpoints" / (to_string(a) + "_run" + std::to_string(run) + ".json");
}

void save_checkpoint(const fs::path& path, const std::string& hash, const Learner& learner) {
  const fs::path tmp = path.string() + ".tmp";
  write_json_file(Json{{"instance_hash", hash}, {"learner", learner.checkpoint()}}, tmp);
  fs::rename(tmp, path);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const InterruptHook& interrupt) {
  check_spec(spec);
  const auto wall_start = std::chrono::steady_clock::now();
  const Bmdp model = make_instance(spec);
  require_valid(model);
  const ValueTable optimal = optimal_values(model).values;

  ExperimentResult result;
  result.instance_hash = model_hash(model);
  result.structure = structure_report(model);

  fs::create_directories(spec.output_dir);
  if (spec.checkpoint_every > 0) fs::create_directories(fs::path(spec.output_dir) / "checkpoints");

  std::vector<Job> jobs;
  for (std::size_t i = 0; i < spec.algorithms.size(); ++i) {
    for (std::size_t r = 0; r < spec.runs; ++r) jobs.push_back({spec.algorithms[i], i, r});
  }
  std::vector<JobOutput> outputs(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex log_mutex;
  const std::uint64_t K = spec.episodes;

  auto work = [&](const Job& job, JobOutput& out) {
    const auto start = std::chrono::steady_clock::now();
    const LearnerConfig config = learner_config(spec, model, job.algorithm, job.run);
    out.summary.run = job.run;
    out.summary.seed = config.seed;
    const fs::path ckpt = checkpoint_path(spec, job.algorithm, job.run);
    std::optional<Learner> learner;
    if (spec.checkpoint_every > 0 && fs::exists(ckpt)) {
      const Json doc = read_json_file(ckpt);
      if (doc.at("instance_hash").get<std::string>() != result.instance_hash) {
        throw std::runtime_error("checkpoint " + ckpt.string() + " belongs to a different instance");
      }
      learner.emplace(Learner::restore(model, optimal, doc.at("learner")));
      if (!(learner->config() == config)) {
        throw std::runtime_error("checkpoint " + ckpt.string() + " was written with a different config");
      }
    } else {
      learner.emplace(model, optimal, config);
    }
    while (learner->episode() < K) {
      if (stop.load()) return;
      learner->step();
      const std::uint64_t k = learner->episode();
      if (spec.checkpoint_every > 0 && (k % spec.checkpoint_every == 0 || k == K)) {
        save_checkpoint(ckpt, result.instance_hash, *learner);
        if (interrupt && interrupt(job.algorithm, job.run, k)) {
          stop.store(true);
          return;
        }
      }
    }
    out.cumulative.reserve(K);
    for (const auto& rec : learner->records()) out.cumulative.push_back(rec.cumulative);
    out.summary.ok = true;
    out.summary.clustering_exact = !learner->records().empty() && learner->records().back().clustering_exact;
    out.summary.optimism = learner->optimism();
    if (!learner->clustering_note().empty()) {
      std::lock_guard lock(log_mutex);
      std::cerr << "warning: " << display_name(job.algorithm) << " run " << job.run << ": " << learner->clustering_note()
                << '\n';
    }
    out.summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        work(jobs[i], outputs[i]);
      } catch (const std::exception& e) {
        outputs[i].summary.ok = false;
        outputs[i].summary.error = e.what();
        std::lock_guard lock(log_mutex);
        std::cerr << "warning: " << display_name(jobs[i].algorithm) << " run " << jobs[i].run << " failed: " << e.what()
                  << '\n';
      }
    }
  };

  std::size_t n_threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, jobs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (stop.load()) throw Interrupted("experiment interrupted; resume from " + spec.output_dir);

  Json meta;
  meta["instance_hash"] = result.instance_hash;
  meta["structure"] = report_to_json(result.structure);
  meta["config"] = spec_to_config(spec);
  meta["episodes"] = spec.episodes;
  meta["runs"] = spec.runs;
  meta["base_seed"] = spec.base_seed;
  Json algos = Json::array();
  for (std::size_t i = 0; i < spec.algorithms.size(); ++i) {
    const Algorithm a = spec.algorithms[i];
    AlgorithmResult ar;
    std::vector<std::vector<double>> ok_runs;
    Json runs = Json::array();
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].slot != i) continue;
      const auto& s = outputs[j].summary;
      ar.runs.push_back(s);
      if (s.ok) ok_runs.push_back(outputs[j].cumulative);
      runs.push_back(Json{{"run", s.run},
                          {"seed", s.seed},
                          {"ok", s.ok},
                          {"error", s.error},
                          {"wall_seconds", s.wall_seconds},
                          {"clustering_exact", s.clustering_exact},
                          {"optimism_checked", s.optimism.checked},
                          {"optimism_violations", s.optimism.violations}});
    }
    Json entry{{"algorithm", to_string(a)},
               {"config", config_to_json(learner_config(spec, model, a, 0))},
               {"runs", runs},
               {"runs_aggregated", ok_runs.size()}};
    if (!ok_runs.empty()) {
      ar.curve = aggregate(ok_runs, model.horizon);
      ar.csv_path = fs::path(spec.output_dir) / csv_name(a, model, spec.episodes);
      write_csv(ar.curve, ar.csv_path);
      entry["csv"] = ar.csv_path.filename().string();
    } else {
      std::cerr << "warning: every run of " << display_name(a) << " failed; no CSV written\n";
    }
    algos.push_back(entry);
    result.results.emplace(a, std::move(ar));
  }
  meta["algorithms"] = algos;
  meta["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  write_json_file(meta, fs::path(spec.output_dir) / "metadata.json");

  bool any_ok = false;
  for (const auto& o : outputs) any_ok = any_ok || o.summary.ok;
  if (!any_ok) throw std::runtime_error("every learner run failed");
  return result;
}

}  // namespace bmdp
