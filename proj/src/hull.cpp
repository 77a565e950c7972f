#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "hyperfill/space.hpp"

namespace hyperfill {

namespace {

// Grid spacings are exact in theory but not in floating point.
constexpr double kDeltaSlack = 1e-9;

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n), rank(n, 0) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank[a] < rank[b]) std::swap(a, b);
    parent[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
  }
  std::vector<std::size_t> parent;
  std::vector<std::uint8_t> rank;
};

template <typename F>
void for_each_neighbor(const FiniteMetricSpace& space, PointId p, double delta,
                       std::vector<PointId>& scratch, F&& fn) {
  space.points_within(p, delta * (1.0 + kDeltaSlack), false, scratch);
  for (PointId q : scratch) {
    if (q != p) fn(q);
  }
}

}  // namespace

std::vector<std::vector<PointId>> delta_components(const FiniteMetricSpace& space,
                                                   std::span<const PointId> subset,
                                                   double delta) {
  if (subset.empty()) throw Error(ErrorKind::invalid_argument, "delta_components: empty subset");
  if (!(delta > 0.0)) throw Error(ErrorKind::invalid_argument, "delta_components: delta must be positive");
  constexpr std::uint32_t absent = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> slot(space.size(), absent);
  for (std::size_t i = 0; i < subset.size(); ++i) slot[subset[i]] = static_cast<std::uint32_t>(i);

  UnionFind uf(subset.size());
  std::vector<PointId> scratch;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for_each_neighbor(space, subset[i], delta, scratch, [&](PointId q) {
      if (slot[q] != absent) uf.unite(i, slot[q]);
    });
  }
  std::vector<std::vector<PointId>> parts;
  std::vector<std::uint32_t> part_of(subset.size(), absent);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const std::size_t r = uf.find(i);
    if (part_of[r] == absent) {
      part_of[r] = static_cast<std::uint32_t>(parts.size());
      parts.emplace_back();
    }
    parts[part_of[r]].push_back(subset[i]);
  }
  for (auto& part : parts) {
    std::sort(part.begin(), part.end());
    part.erase(std::unique(part.begin(), part.end()), part.end());
  }
  std::sort(parts.begin(), parts.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return parts;
}

// Points enter in increasing order of m(z) = max(d(z,x), d(z,y)); the first
// radius D* at which x and y share a delta-component is the smallest D for
// which the bi-ball {m <= D} connects them. Every connecting delta-set of
// diameter D lies in that bi-ball, so D* <= d_M(x, y), and the component at
// D* has diameter at most 2 D*.
DeltaContinuum hull_between(const FiniteMetricSpace& space, PointId x, PointId y, double delta) {
  if (x == y) throw Error(ErrorKind::invalid_argument, "hull_between: x and y must differ");
  if (x >= space.size() || y >= space.size()) {
    throw Error(ErrorKind::invalid_argument, "hull_between: point id out of range");
  }
  if (delta < 2.0 * space.resolution() * (1.0 - kDeltaSlack)) {
    throw Error(ErrorKind::invalid_argument, "hull_between: delta must be at least twice the resolution");
  }
  const std::size_t n = space.size();
  std::vector<double> m(n);
  for (PointId z = 0; z < n; ++z) m[z] = std::max(space.dist(z, x), space.dist(z, y));
  std::vector<PointId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](PointId a, PointId b) {
    return m[a] != m[b] ? m[a] < m[b] : a < b;
  });

  UnionFind uf(n);
  std::vector<char> added(n, 0);
  std::vector<PointId> scratch;
  std::size_t k = 0;
  double critical = -1.0;
  while (k < n) {
    // Add a whole tie class at once so the result does not depend on ids.
    const double level = m[order[k]];
    const std::size_t begin = k;
    while (k < n && m[order[k]] == level) added[order[k++]] = 1;
    for (std::size_t i = begin; i < k; ++i) {
      const PointId z = order[i];
      for_each_neighbor(space, z, delta, scratch, [&](PointId q) {
        if (added[q]) uf.unite(z, q);
      });
    }
    if (added[x] && added[y] && uf.find(x) == uf.find(y)) {
      critical = level;
      break;
    }
  }
  if (critical < 0.0) {
    throw Error(ErrorKind::disconnected, "hull_between: points lie in different delta-components");
  }
  DeltaContinuum hull;
  hull.delta = delta;
  const std::size_t root = uf.find(x);
  for (std::size_t i = 0; i < k; ++i) {
    if (uf.find(order[i]) == root) hull.support.push_back(order[i]);
  }
  std::sort(hull.support.begin(), hull.support.end());
  hull.diam = space.diameter(hull.support);
  return hull;
}

double mazurkiewicz_dist(const FiniteMetricSpace& space, PointId x, PointId y, double delta) {
  if (x == y) return 0.0;
  return hull_between(space, x, y, delta).diam;
}

BoundedTurningEstimate estimate_bounded_turning(const FiniteMetricSpace& space, double delta,
                                                std::size_t num_pairs, std::uint64_t seed) {
  if (num_pairs == 0) throw Error(ErrorKind::invalid_argument, "estimate_bounded_turning: num_pairs must be >= 1");
  const std::size_t n = space.size();
  BoundedTurningEstimate est;
  auto visit = [&](PointId a, PointId b) {
    if (a == b) return;
    const double ratio = hull_between(space, a, b, delta).diam / space.dist(a, b);
    ++est.pairs_sampled;
    if (ratio > est.lambda_hat) {
      est.lambda_hat = ratio;
      est.worst_pair = {std::min(a, b), std::max(a, b)};
    }
  };
  if (num_pairs >= n * n) {
    for (PointId a = 0; a < n; ++a) {
      for (PointId b = a + 1; b < n; ++b) visit(a, b);
    }
  } else {
    // Uniform pairs are almost always far apart; pick the partner inside a
    // ball whose radius is log-uniform between delta and 1 instead.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<PointId> pick(0, static_cast<PointId>(n - 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<PointId> ball;
    const double log_lo = std::log(std::max(delta, 1e-12));
    for (std::size_t i = 0; i < num_pairs; ++i) {
      const PointId a = pick(rng);
      const double r = std::exp(log_lo + (0.0 - log_lo) * unit(rng));
      space.points_within(a, r, false, ball);
      const PointId b = ball[static_cast<std::size_t>(unit(rng) * static_cast<double>(ball.size())) % ball.size()];
      visit(a, b);
    }
  }
  est.unbounded_suspected = est.lambda_hat > 100.0;
  return est;
}

}  // namespace hyperfill
