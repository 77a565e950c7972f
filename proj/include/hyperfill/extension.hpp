#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hyperfill/distortion.hpp"
#include "hyperfill/filling.hpp"

namespace hyperfill {

enum class Provenance { built_from_map, loaded, promoted };
std::string to_string(Provenance p);

// Vertex map between two fillings.
struct FillingMap {
  FillingPtr source, target;
  std::vector<VertexId> assignment;
  // Vertices whose ball image is a single sample point above the finest level.
  std::vector<VertexId> collapsed;
  Provenance provenance = Provenance::built_from_map;
  std::string label;

  VertexId operator()(VertexId v) const { return assignment[v]; }
};

// phi(v) = deepest target vertex whose ball contains f(B_v), ties by smallest
// id. Serial and parallel runs give identical maps.
FillingMap fill_map(const MetricMap& f, FillingPtr source, FillingPtr target,
                    kernels::Exec exec = kernels::Exec::parallel);

// Centered geodesics at every finest-level center plus `fans` random fans.
std::vector<VerticalGeodesic> vqi_geodesic_sample(const Filling& f, std::size_t fans, std::uint64_t seed);

struct ParetoPoint {
  int beta = 0;
  double alpha = 1.0;  // +inf when some pair has D + beta = 0 < Delta
  bool vacuous = false;  // alpha above the search cap
};

struct VqiReport {
  std::vector<ParetoPoint> pareto;  // sorted by beta
  std::size_t geodesics_sampled = 0;
  std::size_t pairs_checked = 0;
  int reference_beta = 3;
  std::array<std::size_t, 3> worst_pair{0, 0, 0};  // geodesic, j, j' at the reference beta
  std::optional<int> eventual_cutoff;
  bool trivial = false;  // every sampled image is the target root

  double alpha_at(int beta) const;
  // Least beta on the grid whose alpha_min is at most `alpha`.
  std::optional<int> min_beta_for(double alpha) const;
};

inline constexpr double kAlphaCap = 8.0;

// alpha_min(beta) = max(1, max over pairs j < j' of max((D - beta)/Delta, Delta/(D + beta))).
// beta runs over 0..beta_max (default 2N). The eventual cutoff is the least J
// for which pairs with j, j' >= J give a non-vacuous alpha at the reference beta.
VqiReport estimate_vqi(const FillingMap& phi, const std::vector<VerticalGeodesic>& geodesics, int beta_max = -1,
                       int reference_beta = 3, kernels::Exec exec = kernels::Exec::parallel);

// Sampled pairs violating the (alpha, beta) quasigeodesic inequalities.
std::size_t vqi_violations(const FillingMap& phi, const std::vector<VerticalGeodesic>& geodesics, double alpha,
                           double beta);

struct LipschitzCheck {
  std::size_t edges = 0;
  std::size_t violations = 0;
  int max_jump = 0;
  double bound = 0.0;
};

// |phi(v) - phi(v')| <= 2(alpha + beta) on every source edge.
LipschitzCheck lipschitz_check(const FillingMap& phi, double alpha, double beta);

struct VqiPair {
  double alpha = 1.0;
  double beta = 0.0;
};

// Constants for psi.phi from the two pairs and the quasigeodesic stability
// constant H: alpha = a_psi a_phi and
// beta = 4 (a_psi + b_psi) H + a_psi (2H + b_phi) + b_psi.
VqiPair vqi_composition_bound(VqiPair phi, VqiPair psi, double H);

FillingMap compose(const FillingMap& phi, const FillingMap& psi);

struct MultiplicityReport {
  std::size_t N_phi = 0;
  VertexId argmax = 0;
  std::vector<std::size_t> per_level;  // max fiber over target vertices of each level
};

MultiplicityReport multiplicity(const FillingMap& phi);

// max over target vertices of the hop distance to the image of phi.
int cobounded_radius(const FillingMap& phi);

// Levels <= J go to the target root.
FillingMap promote_eventual(const FillingMap& phi, int J);

struct LevelDisplacement {
  std::vector<std::array<int, 2>> pairs;  // (l(v), l(phi(v)))
  double slope = 0.0;
  double intercept = 0.0;
  bool degenerate = false;  // image levels constant
};

LevelDisplacement level_displacement(const FillingMap& phi);

}  // namespace hyperfill
