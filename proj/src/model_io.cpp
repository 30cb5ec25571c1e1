#include "bmdp/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bmdp {

namespace {

Json nest3(const std::vector<double>& flat, std::size_t d0, std::size_t d1, std::size_t d2) {
  Json out = Json::array();
  for (std::size_t i = 0; i < d0; ++i) {
    Json mid = Json::array();
    for (std::size_t j = 0; j < d1; ++j) {
      auto first = flat.begin() + static_cast<std::ptrdiff_t>((i * d1 + j) * d2);
      mid.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(d2)));
    }
    out.push_back(std::move(mid));
  }
  return out;
}

Json nest2(const std::vector<double>& flat, std::size_t d0, std::size_t d1) {
  Json out = Json::array();
  for (std::size_t i = 0; i < d0; ++i) {
    auto first = flat.begin() + static_cast<std::ptrdiff_t>(i * d1);
    out.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(d1)));
  }
  return out;
}

void expect_size(const Json& node, std::size_t want, const char* what) {
  if (!node.is_array() || node.size() != want) {
    throw std::invalid_argument(std::string("model JSON: '") + what + "' has wrong shape");
  }
}

std::vector<double> flatten(const Json& node, std::initializer_list<std::size_t> dims, const char* what) {
  std::vector<double> out;
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  out.reserve(total);
  auto walk = [&](auto&& self, const Json& cur, const std::size_t* dim, std::size_t depth) -> void {
    expect_size(cur, *dim, what);
    for (const auto& child : cur) {
      if (depth + 1 == dims.size()) {
        if (!child.is_number()) throw std::invalid_argument(std::string("model JSON: non-numeric entry in ") + what);
        out.push_back(child.get<double>());
      } else {
        self(self, child, dim + 1, depth + 1);
      }
    }
  };
  walk(walk, node, dims.begin(), 0);
  return out;
}

}  // namespace

Json model_to_json(const Bmdp& m) {
  Json doc;
  doc["n"] = m.n_contexts;
  doc["S"] = m.n_states;
  doc["A"] = m.n_actions;
  doc["H"] = m.horizon;
  doc["f"] = m.decoding;
  doc["p"] = nest3(m.latent_kernel, m.n_states, m.n_actions, m.n_states);
  doc["q"] = nest2(m.emission, m.n_states, m.n_contexts);
  doc["mu"] = m.initial_dist;
  doc["r"] = nest3(m.rewards, m.horizon, m.n_contexts, m.n_actions);
  return doc;
}

Bmdp model_from_json(const Json& doc) {
  for (const char* key : {"n", "S", "A", "H", "f", "p", "q", "mu", "r"}) {
    if (!doc.contains(key)) throw std::invalid_argument(std::string("model JSON: missing field '") + key + "'");
  }
  Bmdp m;
  m.n_contexts = doc.at("n").get<std::size_t>();
  m.n_states = doc.at("S").get<std::size_t>();
  m.n_actions = doc.at("A").get<std::size_t>();
  m.horizon = doc.at("H").get<std::size_t>();
  expect_size(doc.at("f"), m.n_contexts, "f");
  m.decoding = doc.at("f").get<std::vector<std::size_t>>();
  m.latent_kernel = flatten(doc.at("p"), {m.n_states, m.n_actions, m.n_states}, "p");
  m.emission = flatten(doc.at("q"), {m.n_states, m.n_contexts}, "q");
  m.initial_dist = flatten(doc.at("mu"), {m.n_contexts}, "mu");
  m.rewards = flatten(doc.at("r"), {m.horizon, m.n_contexts, m.n_actions}, "r");
  return m;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const Json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_model(const Bmdp& model, const std::filesystem::path& path) {
  write_json_file(model_to_json(model), path);
}

Bmdp read_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

std::string model_hash(const Bmdp& model) {
  const std::string text = model_to_json(model).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bmdp
