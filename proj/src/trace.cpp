#include "hyperfill/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hyperfill {

namespace {

int hausdorff(const kernels::DistanceTable& T, std::span<const VertexId> a, std::span<const VertexId> b) {
  auto one_way = [&](std::span<const VertexId> p, std::span<const VertexId> q) {
    int worst = 0;
    for (VertexId u : p) {
      int best = std::numeric_limits<int>::max();
      for (VertexId w : q) best = std::min(best, static_cast<int>(T.at(u, w)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

std::vector<PointId> finest_centers(const Filling& f) {
  std::vector<PointId> out;
  for (VertexId v : f.level_vertices(f.depth())) out.push_back(f.center(v));
  return out;
}

// Coarsest terminal level over the source finest net: the scale at which the
// trace is resolved.
int resolved_level(const TraceReport& rep) {
  const auto& FX = *rep.source;
  int level = rep.target->depth();
  for (VertexId v : FX.level_vertices(FX.depth())) level = std::min(level, rep.target->level(rep.terminal[FX.center(v)]));
  return level;
}

}  // namespace

HEstimate estimate_H(const FillingMap& phi, const std::vector<VerticalGeodesic>& geodesics) {
  if (geodesics.empty()) throw Error(ErrorKind::invalid_argument, "estimate_H: empty geodesic sample");
  const auto& Y = *phi.target;
  const auto& T = Y.distances();
  std::vector<int> h(geodesics.size(), 0);
  std::vector<char> moved(geodesics.size(), 0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(geodesics.size()); ++i) {
    const auto& g = geodesics[i];
    std::vector<VertexId> img;
    for (VertexId v : g.path) img.push_back(phi(v));
    moved[i] = std::any_of(img.begin(), img.end(), [&](VertexId w) { return w != Y.root(); });
    auto sigma = centered_geodesic(Y, Y.center(img.back()));
    h[i] = hausdorff(T, img, sigma.path);
  }
  HEstimate est;
  est.geodesics = geodesics.size();
  auto it = std::max_element(h.begin(), h.end());
  est.H_hat = *it;
  est.argmax = static_cast<std::size_t>(it - h.begin());
  est.degenerate = std::none_of(moved.begin(), moved.end(), [](char c) { return c != 0; });
  return est;
}

double trace_residual(const Filling& target, double H, int level) {
  return 3.0 * (target.A_s() + 1.0) * std::pow(target.s(), H) * target.scale(level) + target.host().resolution();
}

TraceReport trace(const FillingMap& phi, const HEstimate& H) {
  if (H.degenerate) throw Error(ErrorKind::degenerate, "trace: filling map is not a vertical quasi-isometry");
  const auto& X = *phi.source;
  const auto& Y = *phi.target;
  const std::size_t n = X.host().size();
  TraceReport rep;
  rep.source = phi.source;
  rep.target = phi.target;
  rep.H_hat = H.H_hat;
  rep.assignment.resize(n);
  rep.terminal.resize(n);
  rep.residual.resize(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(n); ++p) {
    const auto g = centered_geodesic(X, static_cast<PointId>(p));
    const VertexId w = phi(g.path.back());
    rep.terminal[p] = w;
    rep.assignment[p] = Y.center(w);
    rep.residual[p] = trace_residual(Y, H.H_hat, Y.level(w));
  }
  rep.residual_max = *std::max_element(rep.residual.begin(), rep.residual.end());
  return rep;
}

MetricMap trace_map(const TraceReport& rep) {
  return {rep.source->host_ptr(), rep.target->host_ptr(), rep.assignment, "trace"};
}

FillingMap matched_map(const MetricMap& f, FillingPtr source, FillingPtr target) {
  if (source->host_ptr() != f.source || target->host_ptr() != f.target) {
    throw Error(ErrorKind::incompatible, "matched_map: fillings are not built on the map's spaces");
  }
  FillingMap phi{source, target, std::vector<VertexId>(source->num_vertices()), {}, Provenance::loaded,
                 "matched_" + f.label};
  for (VertexId v = 0; v < source->num_vertices(); ++v) {
    const int l = std::min(source->level(v), target->depth());
    phi.assignment[v] = target->nearest_center(f.assignment[source->center(v)], l);
  }
  return phi;
}

RoundTrip round_trip(const MetricMap& f, FillingPtr source, FillingPtr target, std::size_t fans,
                     std::uint64_t seed) {
  RoundTrip rt;
  auto phi = fill_map(f, source, target);
  rt.H = estimate_H(phi, vqi_geodesic_sample(*source, fans, seed));
  rt.report = trace(phi, rt.H);
  const auto& Y = target->host();
  for (PointId x : finest_centers(*source)) {
    const double e = Y.dist(rt.report.assignment[x], f.assignment[x]);
    rt.error = std::max(rt.error, e);
    rt.residual_max = std::max(rt.residual_max, rt.report.residual[x]);
    if (e > rt.report.residual[x]) ++rt.violations;
  }
  rt.report.round_trip_error = rt.error;
  return rt;
}

TraceMultiplicity trace_multiplicity(const TraceReport& rep, double tolerance) {
  const auto& X = rep.source->host();
  TraceMultiplicity out;
  out.tolerance = tolerance > 0.0 ? tolerance : 4.0 * rep.source->scale(rep.source->depth());
  std::vector<std::vector<PointId>> fibers(rep.target->host().size());
  for (PointId x = 0; x < rep.assignment.size(); ++x) fibers[rep.assignment[x]].push_back(x);
  for (PointId y : finest_centers(*rep.target)) {
    const auto& fiber = fibers[y];
    if (fiber.empty()) continue;
    // Single-linkage components of the fiber at the tolerance.
    std::vector<int> comp(fiber.size(), -1);
    std::size_t count = 0;
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < fiber.size(); ++i) {
      if (comp[i] >= 0) continue;
      comp[i] = static_cast<int>(count);
      stack.assign(1, i);
      while (!stack.empty()) {
        const std::size_t a = stack.back();
        stack.pop_back();
        for (std::size_t b = 0; b < fiber.size(); ++b) {
          if (comp[b] < 0 && X.dist(fiber[a], fiber[b]) <= out.tolerance) {
            comp[b] = static_cast<int>(count);
            stack.push_back(b);
          }
        }
      }
      ++count;
    }
    if (count > out.value) {
      out.value = count;
      out.argmax = y;
    }
  }
  return out;
}

GaugeFit trace_bqs(const TraceReport& rep, double delta, std::size_t count, const std::string& generator,
                   std::uint64_t seed) {
  const auto& X = rep.source->host();
  const auto& FX = *rep.source;
  // Source net at the coarsest terminal level, so the trace separates net points.
  const int level = std::max(std::min(resolved_level(rep), FX.depth()), 3);
  std::vector<PointId> net;
  for (VertexId v : FX.level_vertices(level)) net.push_back(FX.center(v));
  const std::size_t n = net.size();
  std::vector<double> matrix(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) matrix[i * n + j] = X.dist(net[i], net[j]);
  }
  auto space = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::from_matrix(
      "finest_net", n, std::move(matrix), FX.scale(level)));
  MetricMap f{space, rep.target->host_ptr(), {}, "trace"};
  for (PointId x : net) f.assignment.push_back(rep.assignment[x]);
  const double d = std::max(delta / X.diameter(net), 2.0 * space->resolution());
  return fit_power_gauge(sample_continuum_pairs(f, d, count, generator, seed));
}

OpennessReport openness_probe(const TraceReport& rep, const std::vector<BallSample>& balls, double tolerance) {
  const auto& X = rep.source->host();
  const auto& Y = rep.target->host();
  const auto& FY = *rep.target;
  OpennessReport out;
  out.tolerance = tolerance;
  const auto finest = finest_centers(FY);
  out.samples.resize(balls.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(balls.size()); ++i) {
    OpennessSample s{balls[i].x, balls[i].r};
    std::vector<PointId> B;
    X.points_within(s.x, s.r, true, B);
    std::vector<PointId> img;
    for (PointId p : B) img.push_back(rep.assignment[p]);
    std::sort(img.begin(), img.end());
    img.erase(std::unique(img.begin(), img.end()), img.end());
    s.tolerance = tolerance > 0.0 ? tolerance : 2.0 * FY.scale(FY.level(rep.terminal[s.x]));
    const double reach = s.tolerance * (1.0 + 1e-9);
    s.image_diam = Y.diameter(img);
    const PointId y0 = rep.assignment[s.x];
    s.covered = 1.0;
    for (PointId y : finest) {
      const double d = Y.dist(y0, y);
      if (d >= s.covered) continue;
      bool near = std::any_of(img.begin(), img.end(), [&](PointId q) { return Y.dist(y, q) <= reach; });
      if (!near) s.covered = d;
    }
    s.ratio = s.image_diam > 0.0 ? s.covered / s.image_diam : 0.0;
    out.samples[i] = s;
  }
  out.min_ratio = out.samples.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& s : out.samples) out.min_ratio = std::min(out.min_ratio, s.ratio);
  return out;
}

double covering_deficiency(const TraceReport& rep, const Filling& target) {
  const auto& Y = target.host();
  std::vector<PointId> img(rep.assignment);
  std::sort(img.begin(), img.end());
  img.erase(std::unique(img.begin(), img.end()), img.end());
  const auto finest = finest_centers(target);
  double worst = 0.0;
#pragma omp parallel for reduction(max : worst)
  for (std::size_t i = 0; i < finest.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (PointId q : img) best = std::min(best, Y.dist(finest[i], q));
    worst = std::max(worst, best);
  }
  return worst;
}

SurjectivityReport surjectivity_vs_coboundedness(const std::vector<DepthRun>& runs) {
  if (runs.empty()) throw Error(ErrorKind::invalid_argument, "surjectivity_vs_coboundedness: no runs");
  SurjectivityReport r;
  for (const auto& run : runs) {
    const auto& Y = *run.phi.target;
    r.depths.push_back(Y.depth());
    r.radii.push_back(cobounded_radius(run.phi));
    r.deficiency.push_back(covering_deficiency(run.trace, Y));
    r.scale.push_back(Y.scale(resolved_level(run.trace)));
  }
  const auto [lo, hi] = std::minmax_element(r.radii.begin(), r.radii.end());
  r.radius_stable = *hi - *lo <= 1;
  r.radius_growing = std::is_sorted(r.radii.begin(), r.radii.end()) && r.radii.back() > r.radii.front();
  r.deficiency_small = r.deficiency.back() <= 2.0 * r.scale.back();
  r.deficiency_large = r.deficiency.back() >= 8.0 * r.scale.back();
  if (r.radius_stable && !r.radius_growing && r.deficiency_small) {
    r.verdict = "consistent-surjective";
  } else if (r.radius_growing && r.deficiency_large) {
    r.verdict = "consistent-non-surjective";
  } else {
    r.verdict = "inconsistent";
  }
  return r;
}

DegreeCheck degree_check(const FillingMap& phi, const TraceReport& rep, int beta_ref, std::size_t fans,
                         std::uint64_t seed) {
  DegreeCheck c;
  c.trace_multiplicity = trace_multiplicity(rep).value;
  c.N_phi = multiplicity(phi).N_phi;
  const auto pts = finest_centers(*phi.target);
  c.m = shadow_bound(*phi.target, pts).m;
  const auto gs = vqi_geodesic_sample(*phi.source, fans, seed);
  c.fit = {estimate_vqi(phi, gs, -1, beta_ref).alpha_at(beta_ref), static_cast<double>(beta_ref)};
  c.bound = static_cast<double>(c.N_phi * c.m) * (c.fit.alpha + c.fit.beta);
  c.holds = static_cast<double>(c.trace_multiplicity) <= c.bound;
  return c;
}

VqiCompositionCheck check_vqi_composition(const FillingMap& phi, const FillingMap& psi, int beta_ref,
                                          std::size_t fans, std::uint64_t seed) {
  VqiCompositionCheck c;
  const auto gx = vqi_geodesic_sample(*phi.source, fans, seed);
  const auto gy = vqi_geodesic_sample(*psi.source, fans, seed);
  c.phi_fit = {estimate_vqi(phi, gx, -1, beta_ref).alpha_at(beta_ref), static_cast<double>(beta_ref)};
  c.psi_fit = {estimate_vqi(psi, gy, -1, beta_ref).alpha_at(beta_ref), static_cast<double>(beta_ref)};
  c.H = estimate_H(phi, gx).H_hat;
  c.bound = vqi_composition_bound(c.phi_fit, c.psi_fit, c.H);
  const auto omega = compose(phi, psi);
  for (const auto& g : gx) c.pairs += g.path.size() * (g.path.size() - 1) / 2;
  c.violations = vqi_violations(omega, gx, c.bound.alpha, c.bound.beta);
  c.composite_alpha = estimate_vqi(omega, gx, -1, beta_ref).alpha_at(beta_ref);
  return c;
}

}  // namespace hyperfill
