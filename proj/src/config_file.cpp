#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bmdp/experiment.hpp"

namespace bmdp {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a nonnegative integer: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.emplace_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string kind_name(InstanceKind k) {
  switch (k) {
    case InstanceKind::dirichlet: return "dirichlet";
    case InstanceKind::hard: return "hard";
    case InstanceKind::file: return "file";
  }
  return "?";
}

std::size_t to_size(std::string_view v) { return static_cast<std::size_t>(parse_uint(v)); }

}  // namespace

std::string spec_to_config(const ExperimentSpec& spec) {
  std::ostringstream out;
  auto line = [&out](std::string_view key, const std::string& value) { out << key << " = " << value << '\n'; };
  line("instance", kind_name(spec.instance));
  switch (spec.instance) {
    case InstanceKind::dirichlet: {
      const auto& d = spec.dirichlet;
      line("n", std::to_string(d.n));
      line("S", std::to_string(d.S));
      line("A", std::to_string(d.A));
      line("H", std::to_string(d.H));
      line("p_alpha", format_double(d.p_alpha));
      line("q_alpha", format_double(d.q_alpha));
      line("instance_seed", std::to_string(d.seed));
      break;
    }
    case InstanceKind::hard: {
      const auto& h = spec.hard;
      line("n", std::to_string(h.n));
      line("S", std::to_string(h.S));
      line("A", std::to_string(h.A));
      line("H", std::to_string(h.H));
      line("eps0", format_double(h.eps0));
      line("eps1", format_double(h.eps1));
      line("kappa", format_double(h.kappa));
      std::string actions;
      for (std::size_t i = 0; i < h.optimal_actions.size(); ++i) {
        actions += (i ? "," : "") + std::to_string(h.optimal_actions[i]);
      }
      line("optimal_actions", actions);
      line("instance_seed", std::to_string(h.seed));
      break;
    }
    case InstanceKind::file:
      line("model_path", spec.model_path);
      break;
  }
  std::string algos;
  for (std::size_t i = 0; i < spec.algorithms.size(); ++i) algos += (i ? "," : "") + to_string(spec.algorithms[i]);
  line("algorithms", algos);
  line("theta_clust", spec.theta_clust ? std::to_string(*spec.theta_clust) : "default");
  line("bonus_scale", format_double(spec.bonus_scale));
  line("bf_c1", format_double(spec.bf_c1));
  line("bf_c2", format_double(spec.bf_c2));
  line("episodes", std::to_string(spec.episodes));
  line("runs", std::to_string(spec.runs));
  line("base_seed", std::to_string(spec.base_seed));
  line("output_dir", spec.output_dir);
  line("checkpoint_every", std::to_string(spec.checkpoint_every));
  line("threads", std::to_string(spec.threads));
  return out.str();
}

ExperimentSpec spec_from_config(const std::string& text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    if (!kv.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }

  ExperimentSpec spec;
  auto take = [&kv](std::string_view key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = std::move(it->second);
    kv.erase(it);
    return v;
  };
  try {
    if (auto v = take("instance")) {
      if (*v == "dirichlet") {
        spec.instance = InstanceKind::dirichlet;
      } else if (*v == "hard") {
        spec.instance = InstanceKind::hard;
      } else if (*v == "file") {
        spec.instance = InstanceKind::file;
      } else {
        throw std::invalid_argument("unknown instance kind '" + *v + "'");
      }
    }
    auto& d = spec.dirichlet;
    auto& h = spec.hard;
    const bool hard = spec.instance == InstanceKind::hard;
    if (auto v = take("n")) (hard ? h.n : d.n) = to_size(*v);
    if (auto v = take("S")) (hard ? h.S : d.S) = to_size(*v);
    if (auto v = take("A")) (hard ? h.A : d.A) = to_size(*v);
    if (auto v = take("H")) (hard ? h.H : d.H) = to_size(*v);
    if (auto v = take("instance_seed")) (hard ? h.seed : d.seed) = parse_uint(*v);
    if (auto v = take("p_alpha")) d.p_alpha = parse_double(*v);
    if (auto v = take("q_alpha")) d.q_alpha = parse_double(*v);
    if (auto v = take("eps0")) h.eps0 = parse_double(*v);
    if (auto v = take("eps1")) h.eps1 = parse_double(*v);
    if (auto v = take("kappa")) h.kappa = parse_double(*v);
    if (auto v = take("optimal_actions")) {
      h.optimal_actions.clear();
      for (const auto& item : split_commas(*v)) h.optimal_actions.push_back(to_size(item));
    }
    if (auto v = take("model_path")) spec.model_path = *v;
    if (auto v = take("algorithms")) {
      spec.algorithms.clear();
      for (const auto& item : split_commas(*v)) spec.algorithms.push_back(parse_algorithm(item));
    }
    if (auto v = take("theta_clust")) {
      if (*v == "default") {
        spec.theta_clust.reset();
      } else {
        spec.theta_clust = parse_uint(*v);
      }
    }
    if (auto v = take("bonus_scale")) spec.bonus_scale = parse_double(*v);
    if (auto v = take("bf_c1")) spec.bf_c1 = parse_double(*v);
    if (auto v = take("bf_c2")) spec.bf_c2 = parse_double(*v);
    if (auto v = take("episodes")) spec.episodes = to_size(*v);
    if (auto v = take("runs")) spec.runs = to_size(*v);
    if (auto v = take("base_seed")) spec.base_seed = parse_uint(*v);
    if (auto v = take("output_dir")) spec.output_dir = *v;
    if (auto v = take("checkpoint_every")) spec.checkpoint_every = to_size(*v);
    if (auto v = take("threads")) spec.threads = to_size(*v);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!kv.empty()) throw std::invalid_argument("config: unknown key '" + kv.begin()->first + "'");
  check_spec(spec);
  return spec;
}

ExperimentSpec read_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return spec_from_config(buf.str());
}

void write_config(const ExperimentSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config " + path.string());
  out << spec_to_config(spec);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace bmdp
