#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hyperfill/space.hpp"

namespace hyperfill {

// A point-level map f: X -> Y given by its values on the sample.
struct MetricMap {
  SpacePtr source;
  SpacePtr target;
  std::vector<PointId> assignment;
  std::string label;
};

// Built-in maps: identity, inclusion, snowflake_identity, winding, folding,
// accordion, projection. Each analytic image is snapped to the nearest target
// sample point.
MetricMap builtin_map(const std::string& name, SpacePtr source, SpacePtr target);
std::vector<std::string> builtin_map_names();

// Analytic formulas on raw coordinates, exposed for oracles.
double folding_h(double t);
double accordion_g(double x);

// g after f. The target of f must be the source of g.
MetricMap compose(const MetricMap& f, const MetricMap& g);

double image_diameter(const MetricMap& f, std::span<const PointId> subset);

struct DistortionSample {
  double t = 0.0;  // diam E / diam E'
  double u = 0.0;  // diam fE / diam fE', +inf when diam fE' = 0
  bool degenerate = false;
};

// Samples are stored in both orientations: (t, u) and (1/t, 1/u).
struct DistortionProfile {
  std::vector<DistortionSample> samples;
  std::string generator;
  std::uint64_t seed = 0;
  double delta = 0.0;
  std::size_t degenerate_count = 0;
};

// generator: hull_pairs, chain_pairs or ball_pairs. count = 0 asks for the
// exhaustive family where one exists (chain_pairs: every anchored triple).
// max_diam > 0 keeps only continua of diameter at most max_diam.
DistortionProfile sample_continuum_pairs(const MetricMap& f, double delta, std::size_t count,
                                         const std::string& generator, std::uint64_t seed,
                                         double max_diam = 0.0);

struct PowerGauge {
  double C = 1.0;
  double q = 1.0;
  double operator()(double t) const;
};

struct GaugeFit {
  std::vector<double> q_grid;
  std::vector<double> C_of_q;
  std::optional<PowerGauge> best;  // empty when there is not-BQS evidence
  std::string verdict;             // "bqs" or "not-bqs-evidence"
};

std::vector<double> default_q_grid();

// C(q) = max(1, max u / max(t^q, t^(1/q))). best minimizes C, ties to the
// largest q.
GaugeFit fit_power_gauge(const DistortionProfile& profile, const std::vector<double>& q_grid = default_q_grid());

struct BallSample {
  PointId x = 0;
  double r = 0.0;
};

struct KoebeBall {
  PointId x = 0;
  double r = 0.0;
  double image_diam = 0.0;
  double required = 0.0;  // c0 diam(fB) - 2 rho_target
  double covered = 0.0;   // largest radius around f(x) fully covered by f(B)
  bool pass = false;
};

struct KoebeReport {
  double c0 = 0.0;
  double mesh = 0.0;  // covering radius of f(X) in Y
  std::vector<KoebeBall> balls;
  std::size_t passed = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double pass_fraction() const { return balls.empty() ? 1.0 : double(passed) / double(balls.size()); }
};

// c0 = 1 / (7 eta(2 lambda^2) eta(2) lambda).
double koebe_constant(const PowerGauge& eta, double lambda);

KoebeReport koebe_check(const MetricMap& f, const std::vector<BallSample>& balls, const PowerGauge& eta,
                        double lambda);

// Smallest delta-connected set around x that contains the closed ball
// B(x, r): the delta-component of x in B(x, R) for the least sample radius
// R >= r that swallows the ball.
std::vector<PointId> diametric_hull(const FiniteMetricSpace& X, PointId x, double r, double delta);

// max over balls of diam f(E_B) / diam f(B); balls with diam f(B) = 0 are
// skipped.
double hull_ball_ratio(const MetricMap& f, const std::vector<BallSample>& balls, double delta);

struct ComposeReport {
  GaugeFit f_fit, g_fit, gf_fit;
  double worst_ratio = 0.0;  // max over g.f samples of u / (eta_g o eta_f)(t)
  bool dominated = false;
};

// Fits gauges of f, g and g.f with one generator and seed and checks the
// g.f samples against eta_g o eta_f.
ComposeReport compose_check(const MetricMap& f, const MetricMap& g, double delta_x, double delta_y,
                            std::size_t count, const std::string& generator, std::uint64_t seed);

}  // namespace hyperfill
