#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hyperfill/distortion.hpp"
#include "hyperfill/extension.hpp"

namespace hyperfill {

struct HEstimate {
  double H_hat = 0.0;
  std::size_t geodesics = 0;
  std::size_t argmax = 0;
  bool degenerate = false;  // every image stays at the target root
};

// Largest Hausdorff distance (hops in the target) between phi.gamma and the
// target geodesic centered at the center of phi(gamma(N)).
HEstimate estimate_H(const FillingMap& phi, const std::vector<VerticalGeodesic>& geodesics);

struct TraceReport {
  std::vector<PointId> assignment;  // per source point
  std::vector<VertexId> terminal;   // phi(gamma_x(N))
  std::vector<double> residual;     // 3(A_t + 1) t^H t^-l(terminal) + rho_t
  double H_hat = 0.0;
  double residual_max = 0.0;
  std::optional<double> round_trip_error;
  FillingPtr source, target;
};

// Localization radius for a target vertex at level l.
double trace_residual(const Filling& target, double H, int level);

// Follows the centered geodesic of every source point to depth N and reads
// off the center of its image. Throws `degenerate` when H is flagged.
TraceReport trace(const FillingMap& phi, const HEstimate& H);

MetricMap trace_map(const TraceReport& rep);

// phi(v) = level-l(v) target vertex nearest f(c(v)), capped at the target
// depth: the level-matched filling of a map between dyadic-type fillings.
FillingMap matched_map(const MetricMap& f, FillingPtr source, FillingPtr target);

struct RoundTrip {
  double error = 0.0;          // max over finest-net x of d(trace(x), f(x))
  double residual_max = 0.0;
  std::size_t violations = 0;  // points with d(trace(x), f(x)) > residual(x)
  HEstimate H;
  TraceReport report;
};

RoundTrip round_trip(const MetricMap& f, FillingPtr source, FillingPtr target, std::size_t fans = 200,
                     std::uint64_t seed = 1);

struct TraceMultiplicity {
  std::size_t value = 0;
  PointId argmax = 0;  // target finest-net point
  double tolerance = 0.0;
};

// For each target finest-net point y, the number of single-linkage clusters at
// the tolerance in the fiber {x : trace(x) = y}; the maximum over y.
// tolerance <= 0 selects 4 s^-N_source.
TraceMultiplicity trace_multiplicity(const TraceReport& rep, double tolerance = 0.0);

// Continua are delta-connected subsets of the source net at the level the
// trace resolves (at least 3); delta is raised to twice the net resolution.
GaugeFit trace_bqs(const TraceReport& rep, double delta, std::size_t count, const std::string& generator,
                   std::uint64_t seed);

struct OpennessSample {
  PointId x = 0;
  double r = 0.0;
  double covered = 0.0;     // r': every finest-net point closer than this is near trace(B)
  double image_diam = 0.0;  // diam trace(B)
  double ratio = 0.0;
  double tolerance = 0.0;
};

struct OpennessReport {
  std::vector<OpennessSample> samples;
  double tolerance = 0.0;  // <= 0: chosen per ball
  double min_ratio = 0.0;
};

// tolerance <= 0 selects 2 t^-l per ball, l the terminal level of its center.
OpennessReport openness_probe(const TraceReport& rep, const std::vector<BallSample>& balls, double tolerance = 0.0);

// max over target finest-net points of the distance to the trace image.
double covering_deficiency(const TraceReport& rep, const Filling& target);

struct SurjectivityReport {
  std::vector<int> depths;
  std::vector<int> radii;
  std::vector<double> deficiency;
  std::vector<double> scale;  // t^-l per depth, l the coarsest terminal level over the finest net
  bool radius_stable = false;
  bool radius_growing = false;
  bool deficiency_small = false;
  bool deficiency_large = false;
  std::string verdict;  // consistent-surjective | consistent-non-surjective | inconsistent
};

struct DepthRun {
  FillingMap phi;
  TraceReport trace;
};

// stable: max - min radius <= 1. growing: radii non-decreasing and strictly
// larger at the deepest run. Deficiency at the deepest run is small when
// <= 2 t^-l and large when >= 8 t^-l, l the level the trace resolves.
SurjectivityReport surjectivity_vs_coboundedness(const std::vector<DepthRun>& runs);

struct DegreeCheck {
  std::size_t trace_multiplicity = 0;
  std::size_t N_phi = 0;
  std::size_t m = 0;  // target shadow bound
  VqiPair fit;        // (alpha_min(beta_ref), beta_ref)
  double bound = 0.0;  // N_phi m (alpha + beta)
  bool holds = false;
};

DegreeCheck degree_check(const FillingMap& phi, const TraceReport& rep, int beta_ref = 3, std::size_t fans = 100,
                         std::uint64_t seed = 1);

struct VqiCompositionCheck {
  VqiPair phi_fit, psi_fit, bound;
  double H = 0.0;
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double composite_alpha = 0.0;  // fitted alpha of psi.phi at the bound's beta
};

// Fits (alpha_min(beta_ref), beta_ref) for phi and psi, takes H from phi and
// checks psi.phi on geodesics of the source against the composition bound.
VqiCompositionCheck check_vqi_composition(const FillingMap& phi, const FillingMap& psi, int beta_ref = 3,
                                          std::size_t fans = 100, std::uint64_t seed = 1);

}  // namespace hyperfill
