#define BOOST_TEST_MODULE harness
#include <boost/test/unit_test.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bmdp/cli.hpp"
#include "bmdp/experiment.hpp"
#include "bmdp/model_io.hpp"

using namespace bmdp;
namespace fs = std::filesystem;
namespace tt = boost::test_tools;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bmdp_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bmdp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

ExperimentSpec small_spec(const fs::path& dir) {
  ExperimentSpec spec;
  spec.dirichlet.n = 15;
  spec.dirichlet.S = 3;
  spec.dirichlet.A = 2;
  spec.dirichlet.H = 5;
  spec.dirichlet.seed = 3;
  spec.theta_clust = 100;
  spec.episodes = 40;
  spec.runs = 2;
  spec.base_seed = 17;
  spec.output_dir = dir.string();
  return spec;
}

}  // namespace

BOOST_AUTO_TEST_SUITE(aggregation)

BOOST_AUTO_TEST_CASE(single_run_has_zero_halfwidth) {
  const auto c = aggregate({{1.0, 2.0, 4.0}}, 5);
  BOOST_TEST(c.time == std::vector<std::uint64_t>({5, 10, 15}), tt::per_element());
  BOOST_TEST(c.mean_cum_regret == std::vector<double>({1.0, 2.0, 4.0}), tt::per_element());
  for (double w : c.ci_halfwidth) BOOST_TEST(w == 0.0);
}

BOOST_AUTO_TEST_CASE(mean_and_normal_interval) {
  const std::vector<std::vector<double>> runs{{1.0, 3.0}, {2.0, 5.0}, {6.0, 7.0}};
  const auto c = aggregate(runs, 20);
  for (std::size_t k = 0; k < 2; ++k) {
    const double mean = (runs[0][k] + runs[1][k] + runs[2][k]) / 3.0;
    BOOST_TEST(std::abs(c.mean_cum_regret[k] - mean) <= 1e-12);
    double ss = 0.0;
    for (const auto& r : runs) ss += (r[k] - mean) * (r[k] - mean);
    BOOST_TEST(c.ci_halfwidth[k] == 1.96 * std::sqrt(ss / 2.0) / std::sqrt(3.0), tt::tolerance(1e-14));
  }
  BOOST_CHECK_THROW(aggregate({{1.0}, {1.0, 2.0}}, 1), std::invalid_argument);
  BOOST_CHECK_THROW(aggregate({}, 1), std::invalid_argument);
}

BOOST_AUTO_TEST_SUITE_END()

BOOST_AUTO_TEST_SUITE(csv)

BOOST_AUTO_TEST_CASE(two_episode_example) {
  const fs::path dir = scratch("csv");
  write_csv(aggregate({{1.5, 1.5 + 2.5}}, 20), dir / "c.csv");
  BOOST_TEST(slurp(dir / "c.csv") == "Time,Regret,CiHalfwidth\n20,1.5,0\n40,4,0\n");
}

BOOST_AUTO_TEST_CASE(round_trip) {
  const fs::path dir = scratch("csv_rt");
  Rng rng(1);
  std::vector<std::vector<double>> runs(4, std::vector<double>(50));
  for (auto& r : runs) {
    double acc = 0.0;
    for (double& v : r) v = acc += rng.uniform() * 3.0;
  }
  const auto c = aggregate(runs, 7);
  write_csv(c, dir / "r.csv");
  const auto back = read_csv(dir / "r.csv");
  BOOST_TEST(back.time == c.time, tt::per_element());
  for (std::size_t k = 0; k < 50; ++k) {
    BOOST_TEST(std::abs(back.mean_cum_regret[k] - c.mean_cum_regret[k]) <= 1e-9);
    BOOST_TEST(std::abs(back.ci_halfwidth[k] - c.ci_halfwidth[k]) <= 1e-9);
  }
  std::ofstream(dir / "bad.csv") << "time,regret\n";
  BOOST_CHECK_THROW(read_csv(dir / "bad.csv"), std::invalid_argument);
}

BOOST_AUTO_TEST_CASE(number_formatting) {
  BOOST_TEST(format_double(0.0) == "0");
  BOOST_TEST(format_double(4.0) == "4");
  BOOST_TEST(format_double(0.1) == "0.1");
  BOOST_TEST(format_double(12345678.5) == "12345678.5");
  for (double v : {1.0 / 3.0, 2.5e-17, 9.87654321e12}) BOOST_TEST(parse_double(format_double(v)) == v);
  BOOST_CHECK_THROW(parse_double("1.5x"), std::invalid_argument);
  BOOST_CHECK_THROW(parse_uint("-3"), std::invalid_argument);
}

BOOST_AUTO_TEST_SUITE_END()

BOOST_AUTO_TEST_SUITE(config_file)

BOOST_AUTO_TEST_CASE(round_trips_byte_identically) {
  ExperimentSpec d;
  d.dirichlet.n = 60;
  d.dirichlet.q_alpha = 2.5;
  d.algorithms = {Algorithm::ucbvi_bf, Algorithm::uniform};
  d.theta_clust = 12345;
  d.runs = 4;
  d.output_dir = "results/a";

  ExperimentSpec h;
  h.instance = InstanceKind::hard;
  h.hard = HardInstanceSpec{96, 8, 4, 10, 0.05, 0.1, 0.3, {0, 1, 2, 3, 0, 0, 0, 0}, 9};
  h.bonus_scale = 0.25;
  h.checkpoint_every = 100;

  ExperimentSpec f;
  f.instance = InstanceKind::file;
  f.model_path = "models/x.json";
  f.threads = 3;

  for (const auto& spec : {d, h, f, ExperimentSpec{}}) {
    const std::string text = spec_to_config(spec);
    const ExperimentSpec back = spec_from_config(text);
    BOOST_TEST((back == spec));
    BOOST_TEST(spec_to_config(back) == text);
  }
  const fs::path dir = scratch("config");
  write_config(h, dir / "h.conf");
  BOOST_TEST((read_config(dir / "h.conf") == h));
}

BOOST_AUTO_TEST_CASE(hand_written_subset) {
  const auto spec = spec_from_config("# comment\n\nn = 30\nalgorithms = bucbvi, uniform\nepisodes=50\n");
  BOOST_TEST(spec.dirichlet.n == 30u);
  BOOST_TEST(spec.episodes == 50u);
  BOOST_TEST(spec.algorithms.size() == 2u);
  BOOST_TEST(!spec.theta_clust.has_value());
}

BOOST_AUTO_TEST_CASE(rejects_bad_lines) {
  BOOST_CHECK_THROW(spec_from_config("colour = red\n"), std::invalid_argument);
  BOOST_CHECK_THROW(spec_from_config("n = 3\nn = 4\n"), std::invalid_argument);
  BOOST_CHECK_THROW(spec_from_config("n = three\n"), std::invalid_argument);
  BOOST_CHECK_THROW(spec_from_config("just text\n"), std::invalid_argument);
  BOOST_CHECK_THROW(spec_from_config("algorithms = ucrl\n"), std::invalid_argument);
  ExperimentSpec bad;
  bad.runs = 0;
  BOOST_CHECK_THROW(check_spec(bad), std::invalid_argument);
  bad = ExperimentSpec{};
  bad.episodes = 0;
  BOOST_CHECK_THROW(check_spec(bad), std::invalid_argument);
}

BOOST_AUTO_TEST_SUITE_END()

BOOST_AUTO_TEST_SUITE(experiments)

BOOST_AUTO_TEST_CASE(uniform_regret_is_exact) {
  const fs::path dir = scratch("uniform");
  ExperimentSpec spec = small_spec(dir);
  spec.algorithms = {Algorithm::uniform};
  spec.episodes = 100;
  spec.runs = 3;
  const auto res = run_experiment(spec);
  const Bmdp m = make_instance(spec);
  const double per = expected_regret_of(m, TabularPolicy::uniform(m.horizon, m.n_contexts, m.n_actions));
  const auto& c = res.results.at(Algorithm::uniform).curve;
  BOOST_REQUIRE(c.mean_cum_regret.size() == 100u);
  for (std::size_t k = 0; k < 100; ++k) {
    BOOST_TEST(std::abs(c.mean_cum_regret[k] - static_cast<double>(k + 1) * per) <= 1e-9);
    BOOST_TEST(c.ci_halfwidth[k] == 0.0);
    BOOST_TEST(c.time[k] == (k + 1) * m.horizon);
  }
  BOOST_TEST(fs::exists(dir / "Uniform_n15_S3_A2_h5_K100.csv"));
}

BOOST_AUTO_TEST_CASE(curves_and_metadata) {
  const fs::path dir = scratch("meta");
  ExperimentSpec spec = small_spec(dir);
  spec.algorithms = {Algorithm::bucbvi, Algorithm::ucbvi_ch, Algorithm::ucbvi_bf};
  spec.runs = 3;
  const auto res = run_experiment(spec);
  for (const auto& [algo, ar] : res.results) {
    const auto& c = ar.curve;
    for (std::size_t k = 1; k < c.time.size(); ++k) {
      BOOST_TEST(c.time[k] == c.time[k - 1] + 5);
      BOOST_TEST(c.mean_cum_regret[k] >= c.mean_cum_regret[k - 1] - 1e-9);
    }
    for (std::size_t k = 0; k < c.time.size(); ++k) {
      double sum = 0.0;
      for (const auto& r : c.per_run) sum += r[k];
      BOOST_TEST(std::abs(sum / static_cast<double>(c.per_run.size()) - c.mean_cum_regret[k]) <= 1e-12);
    }
    BOOST_TEST(ar.runs.size() == 3u);
    BOOST_TEST(ar.runs[2].seed == 19u);
  }
  const Json meta = read_json_file(dir / "metadata.json");
  BOOST_TEST(meta.at("instance_hash").get<std::string>() == res.instance_hash);
  BOOST_TEST(meta.at("algorithms").size() == 3u);
  BOOST_TEST(meta.at("algorithms")[0].at("runs")[0].contains("clustering_exact"));
  BOOST_TEST(meta.at("algorithms")[0].at("runs")[0].contains("wall_seconds"));
  BOOST_TEST((spec_from_config(meta.at("config").get<std::string>()) == spec));
  BOOST_TEST(meta.at("structure").contains("eta"));
}

BOOST_AUTO_TEST_CASE(thread_count_does_not_change_results) {
  const fs::path one = scratch("threads1"), many = scratch("threads4");
  ExperimentSpec spec = small_spec(one);
  spec.threads = 1;
  run_experiment(spec);
  spec.output_dir = many.string();
  spec.threads = 4;
  run_experiment(spec);
  for (const char* name : {"BUCBVI_n15_S3_A2_h5_K40.csv", "UCBVI-CH_n15_S3_A2_h5_K40.csv"})
    BOOST_TEST(slurp(one / name) == slurp(many / name));
}

BOOST_AUTO_TEST_CASE(resume_after_interrupt_is_bitwise_identical) {
  const fs::path ref = scratch("ref"), resumed = scratch("resumed");
  ExperimentSpec spec = small_spec(ref);
  spec.threads = 1;
  run_experiment(spec);

  spec.output_dir = resumed.string();
  spec.checkpoint_every = 7;
  bool fired = false;
  auto hook = [&](Algorithm a, std::size_t run, std::uint64_t k) {
    if (a == Algorithm::bucbvi && run == 1 && k == 14) fired = true;
    return fired;
  };
  BOOST_CHECK_THROW(run_experiment(spec, hook), Interrupted);
  BOOST_REQUIRE(fired);
  BOOST_TEST(fs::exists(resumed / "checkpoints" / "bucbvi_run1.json"));
  BOOST_TEST(!fs::exists(resumed / "BUCBVI_n15_S3_A2_h5_K40.csv"));
  run_experiment(spec);
  for (const char* name : {"BUCBVI_n15_S3_A2_h5_K40.csv", "UCBVI-CH_n15_S3_A2_h5_K40.csv"})
    BOOST_TEST(slurp(ref / name) == slurp(resumed / name));
}

BOOST_AUTO_TEST_CASE(checkpoint_from_another_instance_fails_the_run) {
  const fs::path dir = scratch("foreign");
  ExperimentSpec spec = small_spec(dir);
  spec.algorithms = {Algorithm::ucbvi_ch};
  spec.runs = 2;
  spec.checkpoint_every = 10;
  run_experiment(spec);
  Json doc = read_json_file(dir / "checkpoints" / "ucbvi_ch_run0.json");
  doc["instance_hash"] = "0000000000000000";
  write_json_file(doc, dir / "checkpoints" / "ucbvi_ch_run0.json");
  const auto res = run_experiment(spec);
  const auto& runs = res.results.at(Algorithm::ucbvi_ch).runs;
  BOOST_TEST(!runs[0].ok);
  BOOST_TEST(runs[1].ok);
  BOOST_TEST(read_json_file(dir / "metadata.json").at("algorithms")[0].at("runs_aggregated").get<int>() == 1);
}

BOOST_AUTO_TEST_SUITE_END()

BOOST_AUTO_TEST_SUITE(command_line)

BOOST_AUTO_TEST_CASE(run_writes_curves_and_metadata) {
  const fs::path dir = scratch("cli_run");
  const auto r = cli({"run", "--n", "100", "--S", "3", "--A", "3", "--H", "20", "--K", "1000", "--algo",
                      "bucbvi,ucbvi_ch", "--runs", "3", "--seed", "7", "--out", dir.string()});
  BOOST_TEST(r.code == 0);
  BOOST_TEST(fs::exists(dir / "BUCBVI_n100_S3_A3_h20_K1000.csv"));
  BOOST_TEST(fs::exists(dir / "UCBVI-CH_n100_S3_A3_h20_K1000.csv"));
  BOOST_TEST(fs::exists(dir / "metadata.json"));
}

BOOST_AUTO_TEST_CASE(run_from_config_file) {
  const fs::path dir = scratch("cli_config");
  ExperimentSpec spec = small_spec(dir / "out");
  spec.algorithms = {Algorithm::uniform};
  write_config(spec, dir / "e.conf");
  const auto r = cli({"run", "--config", (dir / "e.conf").string()});
  BOOST_TEST(r.code == 0);
  BOOST_TEST(fs::exists(dir / "out" / "Uniform_n15_S3_A2_h5_K40.csv"));
  std::ofstream(dir / "bad.conf") << "colour = red\n";
  BOOST_TEST(cli({"run", "--config", (dir / "bad.conf").string()}).code == 1);
  BOOST_TEST(cli({"run", "--config", (dir / "missing.conf").string()}).code == 1);
  BOOST_TEST(cli({"run", "--algo", "ucrl", "--out", dir.string()}).code == 1);
}

BOOST_AUTO_TEST_CASE(validate_reports_corruption) {
  const fs::path dir = scratch("cli_validate");
  BOOST_TEST(cli({"gen", "--n", "12", "--S", "3", "--A", "2", "--H", "4", "--out", (dir / "m.json").string()}).code == 0);
  BOOST_TEST(fs::exists(dir / "m.report.json"));
  const auto ok = cli({"validate", (dir / "m.json").string()});
  BOOST_TEST(ok.code == 0);
  Json doc = read_json_file(dir / "m.json");
  doc["p"][0][0][0] = doc["p"][0][0][0].get<double>() + 0.25;
  doc["f"][0] = (doc["f"][0].get<int>() + 1) % 3;
  write_json_file(doc, dir / "m.json");
  const auto bad = cli({"validate", (dir / "m.json").string()});
  BOOST_TEST(bad.code != 0);
  BOOST_TEST(bad.err.find("violation") != std::string::npos);
  BOOST_TEST(bad.err.find("p [") != std::string::npos);
  std::ofstream(dir / "broken.json") << "{\"n\": 3";
  BOOST_TEST(cli({"validate", (dir / "broken.json").string()}).code == 1);
}

BOOST_AUTO_TEST_CASE(usage_errors) {
  const auto r = cli({"run", "--frobnicate", "3"});
  BOOST_TEST(r.code == 1);
  BOOST_TEST(cli({}).code == 1);
  BOOST_TEST(cli({"--help"}).code == 0);
}

BOOST_AUTO_TEST_CASE(hard_instance_report) {
  const fs::path dir = scratch("cli_hard");
  const auto r = cli({"gen", "--hard", "--n", "192", "--S", "48", "--A", "24", "--H", "5", "--eps0", "0.05", "--eps1",
                      "0.1", "--kappa", "0.3", "--grid", "4", "--out", (dir / "h.json").string()});
  BOOST_REQUIRE(r.code == 0);
  const Json report = read_json_file(dir / "h.report.json");
  const double closed = report.at("eta_p_closed_form").get<double>();
  BOOST_TEST(closed == (1.2 * 1.3) / (0.8 * 0.7), tt::tolerance(1e-12));
  BOOST_TEST(std::abs(report.at("eta_p").get<double>() - closed) <= 1e-9);
  BOOST_TEST(report.at("model_hash").get<std::string>() == model_hash(read_model(dir / "h.json")));
  BOOST_TEST(cli({"gen", "--hard", "--n", "10", "--S", "3", "--A", "2"}).code == 1);
}

BOOST_AUTO_TEST_CASE(cluster_bench_table) {
  const auto r = cli({"cluster-bench", "--n", "30", "--S", "3", "--A", "2", "--H", "5", "--seeds", "2", "--T", "500,2000"});
  BOOST_TEST(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  BOOST_TEST(line == "T,seed,spectral_errors,improved_errors");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  BOOST_TEST(rows == 4u);
}

BOOST_AUTO_TEST_CASE(installed_binary_exit_codes) {
  const char* bin = std::getenv("BMDP_CLI");
  if (bin == nullptr) return;
  const std::string b = std::string("\"") + bin + "\"";
  BOOST_TEST(WEXITSTATUS(std::system((b + " run --frobnicate > /dev/null 2>&1").c_str())) == 1);
  BOOST_TEST(WEXITSTATUS(std::system((b + " --help > /dev/null 2>&1").c_str())) == 0);
}

BOOST_AUTO_TEST_SUITE_END()
