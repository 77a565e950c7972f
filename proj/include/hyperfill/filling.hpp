#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyperfill/kernels.hpp"
#include "hyperfill/space.hpp"

namespace hyperfill {

// Structural constant 8s/(s-1).
inline double structure_constant(double s) { return 8.0 * s / (s - 1.0); }

// Truncated hyperbolic filling of a finite metric space.
//
// Level-n centers form a greedy s^-n net; nets are nested (level n+1 starts
// from the level-n centers). Vertex ids are level-major, so the root is 0 and
// every level occupies a contiguous id range. Balls are strict:
// B_v = {p : d(p, c(v)) < 2 s^-l(v)}.
class Filling {
 public:
  static std::shared_ptr<const Filling> build(SpacePtr space, double s, int depth,
                                              kernels::Exec exec = kernels::Exec::parallel);

  Filling(const Filling&) = delete;
  Filling& operator=(const Filling&) = delete;

  const FiniteMetricSpace& host() const { return *space_; }
  const SpacePtr& host_ptr() const { return space_; }
  double s() const { return s_; }
  int depth() const { return depth_; }
  double A_s() const { return structure_constant(s_); }
  VertexId root() const { return 0; }

  std::size_t num_vertices() const { return centers_.size(); }
  std::size_t num_edges() const { return adjacency_.items.size() / 2; }
  int level(VertexId v) const { return levels_[v]; }
  PointId center(VertexId v) const { return centers_[v]; }
  double scale(int n) const;  // s^-n
  double radius(VertexId v) const { return 2.0 * scale(levels_[v]); }

  // Vertex ids of level n, ascending.
  std::span<const VertexId> level_vertices(int n) const;
  std::vector<std::size_t> level_sizes() const;
  std::span<const int> levels() const { return levels_; }

  std::span<const PointId> ball(VertexId v) const { return balls_.row(v); }
  std::span<const PointId> ball_extremes(VertexId v) const { return extremes_.row(v); }
  double ball_diameter(VertexId v) const { return ball_diam_[v]; }
  // Vertices whose ball contains p, ascending.
  std::span<const VertexId> containing(PointId p) const { return containing_.row(p); }
  bool in_ball(VertexId v, PointId p) const;

  std::span<const VertexId> neighbors(VertexId v) const { return adjacency_.row(v); }
  bool adjacent(VertexId v, VertexId w) const;
  const kernels::Csr& adjacency() const { return adjacency_; }

  // Level-n vertex whose center is nearest p; ties by smallest id.
  VertexId nearest_center(PointId p, int n) const {
    return nearest_[static_cast<std::size_t>(n) * space_->size() + p];
  }

  // All-pairs hop counts, computed on first use.
  const kernels::DistanceTable& distances() const;
  int graph_dist(VertexId v, VertexId w) const;
  // Single-source BFS without materializing the full table.
  std::vector<int> bfs_from(std::span<const VertexId> sources) const;

 private:
  Filling() = default;

  SpacePtr space_;
  double s_ = 2.0;
  int depth_ = 0;
  std::vector<int> levels_;
  std::vector<PointId> centers_;
  std::vector<VertexId> level_start_;
  std::vector<VertexId> ids_;
  kernels::Csr balls_;
  kernels::Csr extremes_;
  kernels::Csr containing_;
  kernels::Csr adjacency_;
  std::vector<double> ball_diam_;
  std::vector<VertexId> nearest_;

  mutable std::once_flag distances_once_;
  mutable kernels::DistanceTable distances_;
};

using FillingPtr = std::shared_ptr<const Filling>;

// Largest N with s^-N >= 2 rho (within 1e-12).
int max_depth(const FiniteMetricSpace& space, double s);

// Gromov product based at the root: (l(v) + l(w) - |v - w|) / 2.
double gromov_product(const Filling& f, VertexId v, VertexId w);

struct GromovComparison {
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  std::uint64_t pairs = 0;
  bool exhaustive = true;
};

// Range of s^-(v|w) / diam(B_v u B_w). Exhaustive when the number of pairs
// is at most max_pairs, otherwise max_pairs random pairs.
GromovComparison gromov_product_comparison(const Filling& f, std::uint64_t max_pairs = 20'000'000,
                                           std::uint64_t seed = 1);

struct HyperbolicityReport {
  double delta_hat = 0.0;
  std::uint64_t triples_checked = 0;
  std::string mode;
  std::array<VertexId, 3> worst{0, 0, 0};
};

// Four-point condition with the root as base point. "exhaustive" needs at
// most max_exhaustive vertices; "sampled" draws `samples` random triples.
HyperbolicityReport hyperbolicity(const Filling& f, const std::string& mode,
                                  std::size_t max_exhaustive = 300, std::uint64_t samples = 1'000'000,
                                  std::uint64_t seed = 1,
                                  kernels::Exec exec = kernels::Exec::parallel);

struct VerticalGeodesic {
  std::vector<VertexId> path;  // path[k] has level k
  std::optional<PointId> anchor;
};

VerticalGeodesic centered_geodesic(const Filling& f, PointId z);
// Geodesic through v whose tail is centered at z. Requires z in B_v.
VerticalGeodesic geodesic_fan(const Filling& f, VertexId v, PointId z);

// Level-n vertices with center in the closed ball B(z, 2(A_s + 1) s^-n).
std::vector<VertexId> shadow(const Filling& f, PointId z, int n);
double shadow_radius(const Filling& f, int n);

struct ShadowBound {
  std::size_t m = 0;
  PointId argmax_point = 0;
  int argmax_level = 0;
  std::vector<std::size_t> per_level;  // max over sampled points, per level
};

ShadowBound shadow_bound(const Filling& f, std::span<const PointId> sample_points);

// Vertex of maximal level whose ball contains all of E; ties by smallest id.
// Throws std::logic_error if the two-sided diameter bound fails.
VertexId max_enclosing_vertex(const Filling& f, std::span<const PointId> E);

struct SeparatedGeodesics {
  VertexId v = 0;
  int anchor_level = 0;  // n in the construction
  std::vector<PointId> anchors;
  std::vector<VerticalGeodesic> geodesics;
  int k0 = 0;
  int k0_bound = 0;
};

// Smallest integer m0 >= 0 with 4 s^-m0 < 1.
int split_m0(double s);
// ceil(log_s(2J) + 2 + m0).
int split_bound(double s, int J);

SeparatedGeodesics separated_geodesics(const Filling& f, const DeltaContinuum& E, int J);

}  // namespace hyperfill
