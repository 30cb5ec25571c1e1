#pragma once

#include <vector>

#include "bmdp/model.hpp"
#include "bmdp/model_io.hpp"

namespace bmdp {

/// Reachability ratios and the psi identifiability proxies of a model.
/// Infinite entries signal a zero probability somewhere in the ratio.
struct StructureReport {
  double eta_p = 1.0;
  double eta_q = 1.0;
  double eta_f = 1.0;
  double eta = 1.0;
  double psi1_min = 0.0;
  double psi2_min = 0.0;
  std::size_t c_grid_size = 0;
};

/// Fills the eta fields:
///   eta_p = max_a max_{s1,s2,s3} { p(s2|s1,a)/p(s3|s1,a), p(s1|s2,a)/p(s1|s3,a) }
///   eta_q = max_s max_{x,y in f^{-1}(s)} q(x|s)/q(y|s)
///   eta_f = max_{s1,s2} |f^{-1}(s1)| / |f^{-1}(s2)|
StructureReport eta_of(const Bmdp& model);

/// Lower proxy psi_1(c; s1, s2) for the separation of s1 from s2.
double psi1(const Bmdp& model, double eta, double c, std::size_t s1, std::size_t s2);
double psi1_in(const Bmdp& model, double eta, double c, std::size_t s1, std::size_t s2);
double psi1_out(const Bmdp& model, double eta, double c, std::size_t s1, std::size_t s2);
/// Upper proxy psi_2(c; s1, s2).
double psi2(const Bmdp& model, double eta, double c, std::size_t s1, std::size_t s2);
double psi2_in(const Bmdp& model, double eta, double c, std::size_t s1, std::size_t s2);
double psi2_out(const Bmdp& model, double eta, double c, std::size_t s1, std::size_t s2);

/// Geometric grid of grid_size points on [1/eta, eta], with c = 1 added when
/// the grid misses it. eta == 1 gives the single point {1}.
std::vector<double> c_grid(double eta, std::size_t grid_size);

inline constexpr std::size_t kDefaultCGridSize = 64;

/// Fills psi1_min / psi2_min: min over ordered pairs s1 != s2 of the grid
/// infimum. Takes a report whose eta fields are already set. With S == 1 both
/// are +inf (no pair to separate).
StructureReport psi_bounds(const Bmdp& model, StructureReport report, std::size_t grid_size = kDefaultCGridSize);

/// eta_of followed by psi_bounds.
StructureReport structure_report(const Bmdp& model, std::size_t grid_size = kDefaultCGridSize);

Json report_to_json(const StructureReport& report);
StructureReport report_from_json(const Json& doc);

}  // namespace bmdp
