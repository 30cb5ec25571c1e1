#include "bmdp/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bmdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ratio(double num, double den) { return den > 0.0 ? num / den : kInf; }

double max_over_min(double hi, double lo) { return lo > 0.0 ? hi / lo : kInf; }

// (1/(SA)) sum_{s,a} (p(s1|s,a)/p(s2|s,a) - c)^2
double incoming_deviation(const Bmdp& m, double c, std::size_t s1, std::size_t s2) {
  double sum = 0.0;
  for (std::size_t s = 0; s < m.n_states; ++s) {
    for (std::size_t a = 0; a < m.n_actions; ++a) {
      const double d = ratio(m.p(s, a, s1), m.p(s, a, s2)) - c;
      sum += d * d;
    }
  }
  return sum / static_cast<double>(m.n_states * m.n_actions);
}

// (1/(SA)) sum_{s,a} (p(s|s1,a)/p(s|s2,a) - 1)^2
double outgoing_deviation(const Bmdp& m, std::size_t s1, std::size_t s2) {
  double sum = 0.0;
  for (std::size_t s = 0; s < m.n_states; ++s) {
    for (std::size_t a = 0; a < m.n_actions; ++a) {
      const double d = ratio(m.p(s1, a, s), m.p(s2, a, s)) - 1.0;
      sum += d * d;
    }
  }
  return sum / static_cast<double>(m.n_states * m.n_actions);
}

Json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double parse_number(const Json& node) {
  if (node.is_string()) {
    const auto s = node.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::invalid_argument("structure report: unexpected string '" + s + "'");
  }
  return node.get<double>();
}

}  // namespace

StructureReport eta_of(const Bmdp& m) {
  StructureReport rep;
  const std::size_t S = m.n_states, A = m.n_actions, n = m.n_contexts;
  double eta_p = 1.0;
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t s = 0; s < S; ++s) {
      double row_hi = 0.0, row_lo = kInf, col_hi = 0.0, col_lo = kInf;
      for (std::size_t t = 0; t < S; ++t) {
        row_hi = std::max(row_hi, m.p(s, a, t));
        row_lo = std::min(row_lo, m.p(s, a, t));
        col_hi = std::max(col_hi, m.p(t, a, s));
        col_lo = std::min(col_lo, m.p(t, a, s));
      }
      eta_p = std::max({eta_p, max_over_min(row_hi, row_lo), max_over_min(col_hi, col_lo)});
    }
  }

  std::vector<double> q_hi(S, 0.0), q_lo(S, kInf);
  std::vector<std::size_t> size(S, 0);
  for (std::size_t y = 0; y < n; ++y) {
    const std::size_t s = m.decoding[y];
    q_hi[s] = std::max(q_hi[s], m.q_own(y));
    q_lo[s] = std::min(q_lo[s], m.q_own(y));
    ++size[s];
  }
  double eta_q = 1.0;
  for (std::size_t s = 0; s < S; ++s) {
    if (size[s] > 0) eta_q = std::max(eta_q, max_over_min(q_hi[s], q_lo[s]));
  }
  const auto [smallest, largest] = std::minmax_element(size.begin(), size.end());

  rep.eta_p = eta_p;
  rep.eta_q = eta_q;
  rep.eta_f = max_over_min(static_cast<double>(*largest), static_cast<double>(*smallest));
  rep.eta = std::max({rep.eta_p, rep.eta_q, rep.eta_f});
  return rep;
}

double psi1_in(const Bmdp& m, double eta, double c, std::size_t s1, std::size_t s2) {
  return 1.0 / (2.0 * std::pow(eta, 7) * std::max(c, eta)) * incoming_deviation(m, c, s1, s2);
}

double psi1_out(const Bmdp& m, double eta, double c, std::size_t s1, std::size_t s2) {
  return c / (2.0 * std::pow(eta, 8)) * outgoing_deviation(m, s1, s2);
}

double psi1(const Bmdp& m, double eta, double c, std::size_t s1, std::size_t s2) {
  return psi1_in(m, eta, c, s1, s2) + psi1_out(m, eta, c, s1, s2);
}

double psi2_in(const Bmdp& m, double eta, double c, std::size_t s1, std::size_t s2) {
  return std::max(1.0, 1.0 / (c * c)) * std::pow(eta, 8) * incoming_deviation(m, c, s1, s2);
}

double psi2_out(const Bmdp& m, double eta, double c, std::size_t s1, std::size_t s2) {
  return std::max(1.0, c * c) * std::pow(eta, 8) * outgoing_deviation(m, s1, s2);
}

double psi2(const Bmdp& m, double eta, double c, std::size_t s1, std::size_t s2) {
  return psi2_in(m, eta, c, s1, s2) + psi2_out(m, eta, c, s1, s2);
}

std::vector<double> c_grid(double eta, std::size_t grid_size) {
  if (!(eta >= 1.0) || std::isinf(eta)) throw std::invalid_argument("c_grid: eta must be finite and >= 1");
  if (eta == 1.0 || grid_size <= 1) return {1.0};
  std::vector<double> grid;
  grid.reserve(grid_size + 1);
  const double log_eta = std::log(eta);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double t = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(grid_size - 1);
    grid.push_back(std::exp(t * log_eta));
  }
  if (grid_size % 2 == 0) {
    grid.insert(grid.begin() + static_cast<std::ptrdiff_t>(grid_size / 2), 1.0);
  } else {
    grid[grid_size / 2] = 1.0;
  }
  return grid;
}

StructureReport psi_bounds(const Bmdp& m, StructureReport rep, std::size_t grid_size) {
  rep.c_grid_size = grid_size;
  rep.psi1_min = kInf;
  rep.psi2_min = kInf;
  if (std::isinf(rep.eta)) return rep;
  const auto grid = c_grid(rep.eta, grid_size);
  for (std::size_t s1 = 0; s1 < m.n_states; ++s1) {
    for (std::size_t s2 = 0; s2 < m.n_states; ++s2) {
      if (s1 == s2) continue;
      double inf1 = kInf, inf2 = kInf;
      for (double c : grid) {
        inf1 = std::min(inf1, psi1(m, rep.eta, c, s1, s2));
        inf2 = std::min(inf2, psi2(m, rep.eta, c, s1, s2));
      }
      rep.psi1_min = std::min(rep.psi1_min, inf1);
      rep.psi2_min = std::min(rep.psi2_min, inf2);
    }
  }
  return rep;
}

StructureReport structure_report(const Bmdp& m, std::size_t grid_size) {
  return psi_bounds(m, eta_of(m), grid_size);
}

Json report_to_json(const StructureReport& r) {
  Json doc;
  doc["eta_p"] = number_or_inf(r.eta_p);
  doc["eta_q"] = number_or_inf(r.eta_q);
  doc["eta_f"] = number_or_inf(r.eta_f);
  doc["eta"] = number_or_inf(r.eta);
  doc["psi1_min"] = number_or_inf(r.psi1_min);
  doc["psi2_min"] = number_or_inf(r.psi2_min);
  doc["c_grid_size"] = r.c_grid_size;
  return doc;
}

StructureReport report_from_json(const Json& doc) {
  StructureReport r;
  r.eta_p = parse_number(doc.at("eta_p"));
  r.eta_q = parse_number(doc.at("eta_q"));
  r.eta_f = parse_number(doc.at("eta_f"));
  r.eta = parse_number(doc.at("eta"));
  r.psi1_min = parse_number(doc.at("psi1_min"));
  r.psi2_min = parse_number(doc.at("psi2_min"));
  r.c_grid_size = doc.at("c_grid_size").get<std::size_t>();
  return r;
}

}  // namespace bmdp
