#include <stdexcept>

#include "bmdp/learner.hpp"

namespace bmdp {

namespace {

Json records_to_json(const std::vector<EpisodeRecord>& records) {
  Json regret = Json::array(), cumulative = Json::array(), phase = Json::array(), exact = Json::array(),
       sampled = Json::array();
  for (const auto& r : records) {
    regret.push_back(r.regret);
    cumulative.push_back(r.cumulative);
    phase.push_back(r.phase == Phase::explore ? 0 : 1);
    exact.push_back(r.clustering_exact ? 1 : 0);
    sampled.push_back(r.sampled_return);
  }
  return Json{{"regret", regret}, {"cumulative", cumulative}, {"phase", phase}, {"exact", exact}, {"sampled", sampled}};
}

std::vector<EpisodeRecord> records_from_json(const Json& doc, std::size_t H) {
  const auto& regret = doc.at("regret");
  const std::size_t K = regret.size();
  if (doc.at("cumulative").size() != K || doc.at("phase").size() != K || doc.at("exact").size() != K ||
      doc.at("sampled").size() != K) {
    throw std::invalid_argument("checkpoint: record columns differ in length");
  }
  std::vector<EpisodeRecord> out(K);
  for (std::size_t i = 0; i < K; ++i) {
    auto& r = out[i];
    r.episode = i + 1;
    r.elapsed = (i + 1) * H;
    r.regret = regret[i].get<double>();
    r.cumulative = doc["cumulative"][i].get<double>();
    r.phase = doc["phase"][i].get<int>() == 0 ? Phase::explore : Phase::exploit;
    r.clustering_exact = doc["exact"][i].get<int>() != 0;
    r.sampled_return = doc["sampled"][i].get<double>();
  }
  return out;
}

}  // namespace

Json Learner::checkpoint() const {
  Json doc;
  doc["config"] = config_to_json(config_);
  doc["episode"] = k_;
  doc["rng"] = rng_.state();
  doc["counts"] = counts_.context().per_action();
  doc["decoding"] = decoding_ ? decoding_to_json(*decoding_) : Json(nullptr);
  doc["exact"] = exact_;
  doc["note"] = note_;
  doc["records"] = records_to_json(records_);
  doc["optimism"] = Json{{"checked", optimism_.checked}, {"violations", optimism_.violations}};
  return doc;
}

Learner Learner::restore(const Bmdp& model, const ValueTable& optimal, const Json& doc) {
  Learner l(model, optimal, config_from_json(doc.at("config")));
  l.k_ = doc.at("episode").get<std::uint64_t>();
  l.rng_ = Rng::from_state(doc.at("rng").get<Rng::State>());
  const auto per_action = doc.at("counts").get<std::vector<Count>>();
  const auto context = TransitionCounts::from_per_action(model.n_contexts, model.n_actions, per_action);
  for (std::size_t a = 0; a < model.n_actions; ++a) {
    for (std::size_t x = 0; x < model.n_contexts; ++x) {
      for (std::size_t y = 0; y < model.n_contexts; ++y) {
        for (Count c = context.pair(a, x, y); c > 0; --c) l.counts_.add(x, a, y);
      }
    }
  }
  if (!doc.at("decoding").is_null()) {
    l.decoding_ = decoding_from_json(doc["decoding"]);
    l.counts_.relabel(l.decoding_->labels, model.n_states);
  }
  l.exact_ = doc.at("exact").get<bool>();
  l.note_ = doc.at("note").get<std::string>();
  l.records_ = records_from_json(doc.at("records"), model.horizon);
  if (l.records_.size() != l.k_) throw std::invalid_argument("checkpoint: record count differs from episode index");
  l.optimism_.checked = doc.at("optimism").at("checked").get<std::uint64_t>();
  l.optimism_.violations = doc.at("optimism").at("violations").get<std::uint64_t>();
  return l;
}

}  // namespace bmdp
