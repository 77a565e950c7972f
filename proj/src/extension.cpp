#include "hyperfill/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hyperfill {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::built_from_map: return "built-from-map";
    case Provenance::loaded: return "loaded";
    case Provenance::promoted: return "promoted";
  }
  return "unknown";
}

FillingMap fill_map(const MetricMap& f, FillingPtr source, FillingPtr target, kernels::Exec exec) {
  if (!source || !target) throw Error(ErrorKind::invalid_argument, "fill_map: null filling");
  if (source->host_ptr() != f.source || target->host_ptr() != f.target) {
    throw Error(ErrorKind::incompatible, "fill_map: fillings are not built on the map's spaces");
  }
  const std::size_t V = source->num_vertices();
  FillingMap phi{source, target, std::vector<VertexId>(V, 0), {}, Provenance::built_from_map, f.label};
  std::vector<char> collapsed(V, 0);

  auto one = [&](VertexId v, std::vector<PointId>& img) {
    img.clear();
    for (PointId p : source->ball(v)) img.push_back(f.assignment[p]);
    std::sort(img.begin(), img.end());
    img.erase(std::unique(img.begin(), img.end()), img.end());
    collapsed[v] = img.size() == 1 && source->level(v) < source->depth();
    phi.assignment[v] = max_enclosing_vertex(*target, img);
  };

  if (exec == kernels::Exec::serial) {
    std::vector<PointId> img;
    for (VertexId v = 0; v < V; ++v) one(v, img);
  } else {
#pragma omp parallel
    {
      std::vector<PointId> img;
#pragma omp for schedule(dynamic, 16)
      for (std::int64_t v = 0; v < static_cast<std::int64_t>(V); ++v) one(static_cast<VertexId>(v), img);
    }
  }
  for (VertexId v = 0; v < V; ++v) {
    if (collapsed[v]) phi.collapsed.push_back(v);
  }
  return phi;
}

std::vector<VerticalGeodesic> vqi_geodesic_sample(const Filling& f, std::size_t fans, std::uint64_t seed) {
  std::vector<VerticalGeodesic> out;
  for (VertexId v : f.level_vertices(f.depth())) out.push_back(centered_geodesic(f, f.center(v)));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(f.num_vertices() - 1));
  for (std::size_t i = 0; i < fans; ++i) {
    VertexId v = pick(rng);
    auto ball = f.ball(v);
    PointId z = ball[std::uniform_int_distribution<std::size_t>(0, ball.size() - 1)(rng)];
    out.push_back(geodesic_fan(f, v, z));
  }
  return out;
}

std::optional<int> VqiReport::min_beta_for(double alpha) const {
  for (const auto& p : pareto) {
    if (p.alpha <= alpha) return p.beta;
  }
  return std::nullopt;
}

double VqiReport::alpha_at(int beta) const {
  for (const auto& p : pareto) {
    if (p.beta == beta) return p.alpha;
  }
  throw Error(ErrorKind::invalid_argument, "beta outside the reported grid");
}

namespace {

double pair_alpha(int D, int delta, int beta) {
  const double up = static_cast<double>(D - beta) / delta;
  const double down = D + beta == 0 ? std::numeric_limits<double>::infinity()
                                     : static_cast<double>(delta) / (D + beta);
  return std::max(up, down);
}

struct PairScan {
  std::vector<double> alpha;  // per beta
  double ref_alpha = 0.0;
  std::array<std::size_t, 3> worst{0, 0, 0};
  std::vector<double> tail_alpha;  // per cutoff J, at the reference beta
  std::size_t pairs = 0;
};

void scan_geodesic(const FillingMap& phi, const VerticalGeodesic& g, std::size_t gid, int beta_max, int ref,
                   PairScan& acc) {
  const auto& T = phi.target->distances();
  const std::size_t L = g.path.size();
  for (std::size_t j = 0; j < L; ++j) {
    const VertexId a = phi(g.path[j]);
    for (std::size_t k = j + 1; k < L; ++k) {
      const int D = T.at(a, phi(g.path[k]));
      const int delta = static_cast<int>(k - j);
      ++acc.pairs;
      for (int b = 0; b <= beta_max; ++b) acc.alpha[b] = std::max(acc.alpha[b], pair_alpha(D, delta, b));
      const double r = pair_alpha(D, delta, ref);
      if (r > acc.ref_alpha) {
        acc.ref_alpha = r;
        acc.worst = {gid, j, k};
      }
      // The pair counts for every cutoff J <= j.
      for (std::size_t J = 0; J <= j; ++J) acc.tail_alpha[J] = std::max(acc.tail_alpha[J], r);
    }
  }
}

void merge(PairScan& into, const PairScan& from) {
  for (std::size_t b = 0; b < into.alpha.size(); ++b) into.alpha[b] = std::max(into.alpha[b], from.alpha[b]);
  for (std::size_t J = 0; J < into.tail_alpha.size(); ++J) {
    into.tail_alpha[J] = std::max(into.tail_alpha[J], from.tail_alpha[J]);
  }
  // Ties keep the lexicographically smallest witness so the result does not
  // depend on the thread schedule.
  if (from.ref_alpha > into.ref_alpha || (from.ref_alpha == into.ref_alpha && from.worst < into.worst)) {
    into.ref_alpha = from.ref_alpha;
    into.worst = from.worst;
  }
  into.pairs += from.pairs;
}

}  // namespace

VqiReport estimate_vqi(const FillingMap& phi, const std::vector<VerticalGeodesic>& geodesics, int beta_max,
                       int reference_beta, kernels::Exec exec) {
  if (geodesics.empty()) throw Error(ErrorKind::invalid_argument, "estimate_vqi: empty geodesic sample");
  const int N = phi.source->depth();
  if (beta_max < 0) beta_max = 2 * N;
  reference_beta = std::clamp(reference_beta, 0, beta_max);
  std::size_t L = 0;
  for (const auto& g : geodesics) L = std::max(L, g.path.size());
  phi.target->distances();

  auto fresh = [&] {
    PairScan s;
    s.alpha.assign(static_cast<std::size_t>(beta_max) + 1, 1.0);
    s.tail_alpha.assign(L, 1.0);
    s.worst = {0, 0, 0};
    s.ref_alpha = 0.0;
    return s;
  };
  PairScan total = fresh();
  if (exec == kernels::Exec::serial) {
    for (std::size_t i = 0; i < geodesics.size(); ++i) scan_geodesic(phi, geodesics[i], i, beta_max, reference_beta, total);
  } else {
#pragma omp parallel
    {
      PairScan local = fresh();
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(geodesics.size()); ++i) {
        scan_geodesic(phi, geodesics[i], static_cast<std::size_t>(i), beta_max, reference_beta, local);
      }
#pragma omp critical
      merge(total, local);
    }
  }

  VqiReport rep;
  rep.geodesics_sampled = geodesics.size();
  rep.pairs_checked = total.pairs;
  rep.reference_beta = reference_beta;
  rep.worst_pair = total.worst;
  for (int b = 0; b <= beta_max; ++b) {
    double a = total.alpha[b];
    rep.pareto.push_back({b, a, !(a <= kAlphaCap)});
  }
  for (std::size_t J = 0; J < L; ++J) {
    if (total.tail_alpha[J] <= kAlphaCap) {
      rep.eventual_cutoff = static_cast<int>(J);
      break;
    }
  }
  rep.trivial = true;
  for (const auto& g : geodesics) {
    for (VertexId v : g.path) rep.trivial = rep.trivial && phi(v) == phi.target->root();
  }
  return rep;
}

std::size_t vqi_violations(const FillingMap& phi, const std::vector<VerticalGeodesic>& geodesics, double alpha,
                           double beta) {
  const auto& T = phi.target->distances();
  std::size_t bad = 0;
  for (const auto& g : geodesics) {
    for (std::size_t j = 0; j < g.path.size(); ++j) {
      for (std::size_t k = j + 1; k < g.path.size(); ++k) {
        const double D = T.at(phi(g.path[j]), phi(g.path[k]));
        const double d = static_cast<double>(k - j);
        const double slack = 1e-9 * (1.0 + d);
        if (d / alpha - beta > D + slack || D > alpha * d + beta + slack) ++bad;
      }
    }
  }
  return bad;
}

LipschitzCheck lipschitz_check(const FillingMap& phi, double alpha, double beta) {
  LipschitzCheck c;
  c.bound = 2.0 * (alpha + beta);
  const auto& T = phi.target->distances();
  const auto& X = *phi.source;
  for (VertexId v = 0; v < X.num_vertices(); ++v) {
    for (VertexId w : X.neighbors(v)) {
      if (w < v) continue;
      ++c.edges;
      const int jump = T.at(phi(v), phi(w));
      c.max_jump = std::max(c.max_jump, jump);
      if (jump > c.bound) ++c.violations;
    }
  }
  return c;
}

VqiPair vqi_composition_bound(VqiPair phi, VqiPair psi, double H) {
  const double Hp = 2.0 * (psi.alpha + psi.beta) * H;
  return {psi.alpha * phi.alpha, 2.0 * Hp + psi.alpha * (2.0 * H + phi.beta) + psi.beta};
}

FillingMap compose(const FillingMap& phi, const FillingMap& psi) {
  if (phi.target != psi.source) throw Error(ErrorKind::incompatible, "compose: filling chain mismatch");
  FillingMap out{phi.source, psi.target, std::vector<VertexId>(phi.assignment.size()), {}, phi.provenance,
                 psi.label + "_o_" + phi.label};
  for (std::size_t v = 0; v < phi.assignment.size(); ++v) out.assignment[v] = psi(phi(static_cast<VertexId>(v)));
  return out;
}

MultiplicityReport multiplicity(const FillingMap& phi) {
  const auto& Y = *phi.target;
  std::vector<std::size_t> fiber(Y.num_vertices(), 0);
  for (VertexId w : phi.assignment) ++fiber[w];
  MultiplicityReport r;
  r.per_level.assign(static_cast<std::size_t>(Y.depth()) + 1, 0);
  for (VertexId w = 0; w < Y.num_vertices(); ++w) {
    if (fiber[w] > r.N_phi) {
      r.N_phi = fiber[w];
      r.argmax = w;
    }
    auto& lvl = r.per_level[static_cast<std::size_t>(Y.level(w))];
    lvl = std::max(lvl, fiber[w]);
  }
  return r;
}

int cobounded_radius(const FillingMap& phi) {
  std::vector<VertexId> image(phi.assignment);
  std::sort(image.begin(), image.end());
  image.erase(std::unique(image.begin(), image.end()), image.end());
  auto d = phi.target->bfs_from(image);
  return *std::max_element(d.begin(), d.end());
}

FillingMap promote_eventual(const FillingMap& phi, int J) {
  if (J < 0) throw Error(ErrorKind::invalid_argument, "promote_eventual: J must be non-negative");
  FillingMap out = phi;
  out.provenance = Provenance::promoted;
  out.label = phi.label + "_promoted";
  for (VertexId v = 0; v < out.assignment.size(); ++v) {
    if (phi.source->level(v) <= J) out.assignment[v] = phi.target->root();
  }
  out.collapsed.erase(std::remove_if(out.collapsed.begin(), out.collapsed.end(),
                                     [&](VertexId v) { return phi.source->level(v) <= J; }),
                      out.collapsed.end());
  return out;
}

LevelDisplacement level_displacement(const FillingMap& phi) {
  LevelDisplacement r;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (VertexId v = 0; v < phi.assignment.size(); ++v) {
    const int x = phi.source->level(v), y = phi.target->level(phi(v));
    r.pairs.push_back({x, y});
    sx += x;
    sy += y;
    sxx += double(x) * x;
    sxy += double(x) * y;
    syy += double(y) * y;
  }
  const double n = static_cast<double>(r.pairs.size());
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  r.degenerate = vy <= 1e-12 * std::max(1.0, syy);
  r.slope = vx > 0 ? (sxy - sx * sy / n) / vx : 0.0;
  if (r.degenerate) r.slope = 0.0;
  r.intercept = (sy - r.slope * sx) / n;
  return r;
}

}  // namespace hyperfill
