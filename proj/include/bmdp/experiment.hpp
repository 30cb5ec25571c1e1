#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bmdp/instance_gen.hpp"
#include "bmdp/learner.hpp"
#include "bmdp/structure.hpp"

namespace bmdp {

enum class InstanceKind { dirichlet, hard, file };

struct ExperimentSpec {
  InstanceKind instance = InstanceKind::dirichlet;
  DirichletSpec dirichlet;
  HardInstanceSpec hard;
  std::string model_path;

  std::vector<Algorithm> algorithms{Algorithm::bucbvi, Algorithm::ucbvi_ch};
  /// Unset means default_theta_clust for the instance.
  std::optional<std::uint64_t> theta_clust;
  double bonus_scale = 1.0;
  double bf_c1 = LearnerConfig{}.bf_c1;
  double bf_c2 = LearnerConfig{}.bf_c2;

  std::size_t episodes = 1000;
  std::size_t runs = 1;
  std::uint64_t base_seed = 0;
  std::string output_dir = "out";
  /// Episodes between checkpoint writes; 0 disables checkpoints.
  std::size_t checkpoint_every = 0;
  /// Worker threads; 0 means hardware concurrency.
  std::size_t threads = 0;

  bool operator==(const ExperimentSpec&) const = default;
};

/// Throws std::invalid_argument on an inconsistent spec.
void check_spec(const ExperimentSpec& spec);

/// Flat "key = value" text, one key per line in a fixed order.
std::string spec_to_config(const ExperimentSpec& spec);
/// Parses spec_to_config output (or a hand-written subset; missing keys keep
/// their defaults). Unknown keys and malformed values throw
/// std::invalid_argument naming the line.
ExperimentSpec spec_from_config(const std::string& text);
ExperimentSpec read_config(const std::filesystem::path& path);
void write_config(const ExperimentSpec& spec, const std::filesystem::path& path);

Bmdp make_instance(const ExperimentSpec& spec);
/// Config of run r: seed base_seed + r.
LearnerConfig learner_config(const ExperimentSpec& spec, const Bmdp& model, Algorithm algorithm, std::size_t run);

struct RegretCurve {
  std::vector<std::uint64_t> time;
  std::vector<double> mean_cum_regret;
  std::vector<double> ci_halfwidth;
  /// runs x K cumulative regret.
  std::vector<std::vector<double>> per_run;
};

/// Mean and 1.96 s / sqrt(runs) over runs (0 for a single run).
RegretCurve aggregate(const std::vector<std::vector<double>>& cumulative_per_run, std::size_t H);

void write_csv(const RegretCurve& curve, const std::filesystem::path& path);
/// Reads time, mean and halfwidth back; per_run stays empty.
RegretCurve read_csv(const std::filesystem::path& path);

struct RunSummary {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double wall_seconds = 0.0;
  bool clustering_exact = false;
  OptimismStats optimism;
};

struct AlgorithmResult {
  RegretCurve curve;
  std::vector<RunSummary> runs;
  std::filesystem::path csv_path;
};

struct ExperimentResult {
  std::string instance_hash;
  StructureReport structure;
  std::map<Algorithm, AlgorithmResult> results;
};

/// Test hook: called after each checkpoint write with (algorithm, run,
/// episode); returning true abandons the experiment with Interrupted.
using InterruptHook = std::function<bool(Algorithm, std::size_t, std::uint64_t)>;

class Interrupted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs every (algorithm, run) pair on one shared instance, resuming from
/// checkpoints in output_dir/checkpoints when present, and writes one CSV per
/// algorithm plus metadata.json.
ExperimentResult run_experiment(const ExperimentSpec& spec, const InterruptHook& interrupt = {});

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
/// Strict full-string parse; throws std::invalid_argument.
double parse_double(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

/// e.g. "BUCBVI_n100_S3_A3_h20_K20000.csv".
std::string csv_name(Algorithm algorithm, const Bmdp& model, std::size_t K);

}  // namespace bmdp
