#include "hyperfill/filling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace hyperfill {

namespace {

constexpr double kDepthSlack = 1e-12;

}  // namespace

int max_depth(const FiniteMetricSpace& space, double s) {
  if (!(s > 1.0)) throw Error(ErrorKind::invalid_argument, "scale s must exceed 1");
  return static_cast<int>(std::floor(std::log(1.0 / (2.0 * space.resolution())) / std::log(s) + kDepthSlack));
}

double Filling::scale(int n) const { return std::pow(s_, -static_cast<double>(n)); }

std::shared_ptr<const Filling> Filling::build(SpacePtr space, double s, int depth, kernels::Exec exec) {
  if (!space) throw Error(ErrorKind::invalid_argument, "build_filling: null space");
  if (!(s > 1.0)) throw Error(ErrorKind::invalid_argument, "build_filling: s must exceed 1");
  if (depth < 1) throw Error(ErrorKind::invalid_argument, "build_filling: depth must be at least 1");
  if (std::pow(s, -static_cast<double>(depth)) < 2.0 * space->resolution() * (1.0 - kDepthSlack)) {
    throw Error(ErrorKind::too_deep, "build_filling: s^-N = " + std::to_string(std::pow(s, -depth)) +
                                         " is finer than twice the resolution " +
                                         std::to_string(2.0 * space->resolution()));
  }
  std::shared_ptr<Filling> f(new Filling());
  f->space_ = std::move(space);
  f->s_ = s;
  f->depth_ = depth;
  const FiniteMetricSpace& X = *f->space_;
  const std::size_t np = X.size();

  // Nested greedy nets.
  std::vector<char> is_center(np, 0);
  std::vector<PointId> current{0};
  std::vector<PointId> scratch;
  f->level_start_.push_back(0);
  f->levels_.push_back(0);
  f->centers_.push_back(0);
  for (int n = 1; n <= depth; ++n) {
    const double r = f->scale(n);
    std::fill(is_center.begin(), is_center.end(), 0);
    for (PointId c : current) is_center[c] = 1;
    std::vector<PointId> next = current;
    for (PointId p = 0; p < np; ++p) {
      if (is_center[p]) continue;
      X.points_within(p, r, true, scratch);
      const bool covered = std::any_of(scratch.begin(), scratch.end(), [&](PointId q) { return is_center[q]; });
      if (!covered) {
        is_center[p] = 1;
        next.push_back(p);
      }
    }
    f->level_start_.push_back(static_cast<VertexId>(f->centers_.size()));
    for (PointId c : next) {
      f->levels_.push_back(n);
      f->centers_.push_back(c);
    }
    current = std::move(next);
  }
  f->level_start_.push_back(static_cast<VertexId>(f->centers_.size()));
  const std::size_t nv = f->centers_.size();
  f->ids_.resize(nv);
  std::iota(f->ids_.begin(), f->ids_.end(), 0);

  // Balls, their extreme points and diameters.
  std::vector<std::vector<std::uint32_t>> balls(nv), extremes(nv);
  f->ball_diam_.resize(nv);
#pragma omp parallel for schedule(dynamic, 16) if (exec == kernels::Exec::parallel)
  for (std::int64_t v = 0; v < static_cast<std::int64_t>(nv); ++v) {
    X.points_within(f->centers_[v], f->radius(static_cast<VertexId>(v)), true, balls[v]);
    extremes[v] = X.extreme_points(balls[v]);
    f->ball_diam_[v] = X.diameter(extremes[v]);
  }
  std::vector<std::vector<std::uint32_t>> containing(np);
  for (VertexId v = 0; v < nv; ++v) {
    for (PointId p : balls[v]) containing[p].push_back(v);
  }
  f->balls_ = kernels::Csr::from_rows(balls);
  f->extremes_ = kernels::Csr::from_rows(extremes);
  f->containing_ = kernels::Csr::from_rows(containing);

  // Nearest centers per level.
  f->nearest_.assign(static_cast<std::size_t>(depth + 1) * np, kNoVertex);
  for (int n = 0; n <= depth; ++n) {
    const VertexId lo = f->level_start_[n], hi = f->level_start_[n + 1];
    for (PointId p = 0; p < np; ++p) {
      VertexId best = kNoVertex;
      double best_d = std::numeric_limits<double>::infinity();
      auto row = f->containing_.row(p);
      for (auto it = std::lower_bound(row.begin(), row.end(), lo); it != row.end() && *it < hi; ++it) {
        const double d = X.dist(p, f->centers_[*it]);
        if (d < best_d) {
          best_d = d;
          best = *it;
        }
      }
      if (best == kNoVertex) throw std::logic_error("build_filling: point outside every ball of its level");
      f->nearest_[static_cast<std::size_t>(n) * np + p] = best;
    }
  }

  f->adjacency_ = kernels::witness_edges(f->levels_, f->balls_, f->containing_, exec);
  return f;
}

std::span<const VertexId> Filling::level_vertices(int n) const {
  if (n < 0 || n > depth_) return {};
  return {ids_.data() + level_start_[n], level_start_[n + 1] - level_start_[n]};
}

std::vector<std::size_t> Filling::level_sizes() const {
  std::vector<std::size_t> out;
  for (int n = 0; n <= depth_; ++n) out.push_back(level_start_[n + 1] - level_start_[n]);
  return out;
}

bool Filling::in_ball(VertexId v, PointId p) const {
  auto row = containing_.row(p);
  return std::binary_search(row.begin(), row.end(), v);
}

bool Filling::adjacent(VertexId v, VertexId w) const {
  auto row = adjacency_.row(v);
  return std::binary_search(row.begin(), row.end(), w);
}

const kernels::DistanceTable& Filling::distances() const {
  std::call_once(distances_once_, [&] {
    distances_ = kernels::all_pairs_bfs(adjacency_, kernels::Exec::parallel);
  });
  return distances_;
}

int Filling::graph_dist(VertexId v, VertexId w) const { return distances().at(v, w); }

std::vector<int> Filling::bfs_from(std::span<const VertexId> sources) const {
  std::vector<int> dist(num_vertices(), -1);
  std::vector<VertexId> queue;
  for (VertexId s : sources) {
    if (dist[s] < 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const VertexId u = queue[head];
    for (VertexId w : neighbors(u)) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

double gromov_product(const Filling& f, VertexId v, VertexId w) {
  const auto& t = f.distances();
  return 0.5 * (t.at(f.root(), v) + t.at(f.root(), w) - t.at(v, w));
}

namespace {

double union_diameter(const Filling& f, VertexId v, VertexId w) {
  double d = std::max(f.ball_diameter(v), f.ball_diameter(w));
  if (v != w) d = std::max(d, f.host().cross_diameter(f.ball_extremes(v), f.ball_extremes(w)));
  return d;
}

}  // namespace

GromovComparison gromov_product_comparison(const Filling& f, std::uint64_t max_pairs, std::uint64_t seed) {
  const std::size_t nv = f.num_vertices();
  const auto& t = f.distances();
  GromovComparison out;
  out.ratio_min = std::numeric_limits<double>::infinity();
  out.ratio_max = 0.0;
  auto visit = [&](VertexId v, VertexId w) {
    const double diam = union_diameter(f, v, w);
    if (!(diam > 0.0)) return;
    const double g = 0.5 * (t.at(0, v) + t.at(0, w) - t.at(v, w));
    const double ratio = std::pow(f.s(), -g) / diam;
    out.ratio_min = std::min(out.ratio_min, ratio);
    out.ratio_max = std::max(out.ratio_max, ratio);
    ++out.pairs;
  };
  const std::uint64_t all = static_cast<std::uint64_t>(nv) * (nv + 1) / 2;
  if (all <= max_pairs) {
    for (VertexId v = 0; v < nv; ++v) {
      for (VertexId w = v; w < nv; ++w) visit(v, w);
    }
  } else {
    out.exhaustive = false;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(nv - 1));
    for (std::uint64_t i = 0; i < max_pairs; ++i) visit(pick(rng), pick(rng));
  }
  return out;
}

HyperbolicityReport hyperbolicity(const Filling& f, const std::string& mode, std::size_t max_exhaustive,
                                  std::uint64_t samples, std::uint64_t seed, kernels::Exec exec) {
  HyperbolicityReport r;
  r.mode = mode;
  const auto& t = f.distances();
  if (mode == "exhaustive") {
    if (f.num_vertices() > max_exhaustive) {
      throw Error(ErrorKind::invalid_argument, "hyperbolicity: exhaustive mode limited to " +
                                                   std::to_string(max_exhaustive) + " vertices");
    }
    const auto res = kernels::four_point_root(t, f.root(), exec);
    r.delta_hat = res.delta;
    r.triples_checked = res.triples;
    r.worst = res.worst;
    return r;
  }
  if (mode != "sampled") throw Error(ErrorKind::invalid_argument, "hyperbolicity: mode must be exhaustive or sampled");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(f.num_vertices() - 1));
  int best = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const VertexId v = pick(rng), w = pick(rng), u = pick(rng);
    const int dv = t.at(0, v), dw = t.at(0, w), du = t.at(0, u);
    const int gvw = dv + dw - t.at(v, w), gvu = dv + du - t.at(v, u), guw = du + dw - t.at(u, w);
    const int val = std::min(gvu, guw) - gvw;
    if (val > best) {
      best = val;
      r.worst = {v, w, u};
    }
  }
  r.delta_hat = best / 2.0;
  r.triples_checked = samples;
  return r;
}

VerticalGeodesic centered_geodesic(const Filling& f, PointId z) {
  VerticalGeodesic g;
  g.anchor = z;
  for (int k = 0; k <= f.depth(); ++k) g.path.push_back(f.nearest_center(z, k));
  return g;
}

VerticalGeodesic geodesic_fan(const Filling& f, VertexId v, PointId z) {
  if (!f.in_ball(v, z)) throw Error(ErrorKind::invalid_argument, "geodesic_fan: anchor outside B_v");
  VerticalGeodesic g;
  g.anchor = z;
  const int lv = f.level(v);
  for (int k = 0; k < lv; ++k) g.path.push_back(f.nearest_center(f.center(v), k));
  g.path.push_back(v);
  for (int k = lv + 1; k <= f.depth(); ++k) g.path.push_back(f.nearest_center(z, k));
  return g;
}

double shadow_radius(const Filling& f, int n) { return 2.0 * (f.A_s() + 1.0) * f.scale(n); }

std::vector<VertexId> shadow(const Filling& f, PointId z, int n) {
  std::vector<VertexId> out;
  const double r = shadow_radius(f, n);
  for (VertexId w : f.level_vertices(n)) {
    if (f.host().dist(z, f.center(w)) <= r) out.push_back(w);
  }
  return out;
}

ShadowBound shadow_bound(const Filling& f, std::span<const PointId> sample_points) {
  ShadowBound b;
  b.per_level.assign(static_cast<std::size_t>(f.depth()) + 1, 0);
  for (int n = 0; n <= f.depth(); ++n) {
    const double r = shadow_radius(f, n);
    const auto verts = f.level_vertices(n);
    std::size_t best = 0;
    PointId arg = sample_points.empty() ? 0 : sample_points[0];
#pragma omp parallel
    {
      std::size_t lbest = 0;
      PointId larg = arg;
#pragma omp for schedule(static) nowait
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(sample_points.size()); ++i) {
        const PointId z = sample_points[i];
        std::size_t count = 0;
        for (VertexId w : verts) count += f.host().dist(z, f.center(w)) <= r;
        if (count > lbest || (count == lbest && z < larg)) {
          lbest = count;
          larg = z;
        }
      }
#pragma omp critical
      if (lbest > best || (lbest == best && larg < arg)) {
        best = lbest;
        arg = larg;
      }
    }
    b.per_level[n] = best;
    if (best > b.m) {
      b.m = best;
      b.argmax_point = arg;
      b.argmax_level = n;
    }
  }
  return b;
}

VertexId max_enclosing_vertex(const Filling& f, std::span<const PointId> E) {
  if (E.empty()) throw Error(ErrorKind::invalid_argument, "max_enclosing_vertex: empty set");
  const auto ext = f.host().extreme_points(E);
  const auto cands = f.containing(E[0]);
  VertexId found = f.root();
  bool have = false;
  // Candidates ascend by id, hence by level; scan from the deepest.
  for (auto it = cands.rbegin(); it != cands.rend(); ++it) {
    const VertexId v = *it;
    if (have && f.level(v) < f.level(found)) break;
    const bool inside = std::all_of(ext.begin(), ext.end(), [&](PointId p) {
      return f.host().dist(p, f.center(v)) < f.radius(v);
    });
    if (inside) {
      found = v;
      have = true;
    }
  }
  const double diam = f.host().diameter(E);
  const int l = f.level(found);
  const bool upper = diam <= 4.0 * f.scale(l);
  const bool lower = l == f.depth() || diam >= f.scale(l + 1);
  if (!upper || !lower) {
    throw std::logic_error("max_enclosing_vertex: diameter " + std::to_string(diam) +
                           " outside the bounds for level " + std::to_string(l));
  }
  return found;
}

int split_m0(double s) {
  int m0 = 0;
  while (!(4.0 * std::pow(s, -static_cast<double>(m0)) < 1.0)) ++m0;
  return m0;
}

int split_bound(double s, int J) {
  return static_cast<int>(std::ceil(std::log(2.0 * J) / std::log(s) + 2.0 + split_m0(s) - 1e-12));
}

SeparatedGeodesics separated_geodesics(const Filling& f, const DeltaContinuum& E, int J) {
  if (J < 1) throw Error(ErrorKind::invalid_argument, "separated_geodesics: J must be positive");
  if (E.support.empty()) throw Error(ErrorKind::invalid_argument, "separated_geodesics: empty continuum");
  SeparatedGeodesics out;
  out.v = max_enclosing_vertex(f, E.support);
  out.k0_bound = split_bound(f.s(), J);
  const int lv = f.level(out.v);
  // Smallest n with s^(n - l(v) - 1) > 2J.
  int n = 0;
  while (!(std::pow(f.s(), n - lv - 1) > 2.0 * J)) ++n;
  out.anchor_level = n;
  const double sep = f.scale(n);
  for (PointId p : E.support) {
    if (static_cast<int>(out.anchors.size()) == J) break;
    const bool far = std::all_of(out.anchors.begin(), out.anchors.end(),
                                 [&](PointId a) { return f.host().dist(a, p) >= sep; });
    if (far) out.anchors.push_back(p);
  }
  if (static_cast<int>(out.anchors.size()) < J) {
    throw Error(ErrorKind::invalid_argument, "separated_geodesics: continuum too small for " +
                                                 std::to_string(J) + " separated anchors");
  }
  for (PointId z : out.anchors) out.geodesics.push_back(geodesic_fan(f, out.v, z));
  auto distinct_at = [&](int level) {
    std::vector<VertexId> at;
    for (const auto& g : out.geodesics) at.push_back(g.path[level]);
    std::sort(at.begin(), at.end());
    return std::adjacent_find(at.begin(), at.end()) == at.end();
  };
  if (J == 1) return out;
  if (!distinct_at(f.depth())) {
    throw Error(ErrorKind::too_deep, "separated_geodesics: geodesics still merged at the truncation depth");
  }
  int k = f.depth() - lv;
  while (k > 0 && distinct_at(lv + k - 1)) --k;
  out.k0 = k;
  return out;
}

}  // namespace hyperfill
