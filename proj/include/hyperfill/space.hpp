#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperfill/types.hpp"

namespace hyperfill {

// Generator name plus parameters. Spaces are a pure function of this record.
struct SpaceSpec {
  std::string generator;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;

  bool operator==(const SpaceSpec&) const = default;
};

SpaceSpec parse_space_spec(const nlohmann::json& j);
nlohmann::json to_json(const SpaceSpec& spec);

// Bucket grid over raw coordinates (1-D or 2-D). Queries are in raw
// Euclidean units; the space converts metric radii before calling in.
class GridIndex {
 public:
  GridIndex() = default;
  GridIndex(int dim, std::span<const double> coords, double cell);

  template <typename F>
  void for_each_within(const double* pos, double radius, F&& fn) const;

  bool empty() const { return cells_.empty(); }

 private:
  int dim_ = 0;
  double cell_ = 1.0;
  std::array<double, 2> lo_{0.0, 0.0};
  std::array<std::int64_t, 2> extent_{1, 1};
  std::vector<std::uint32_t> start_;
  std::vector<PointId> cells_;
  std::span<const double> coords_;
};

// A finite sample of a compact metric space, normalized to diameter one.
//
// Coordinate-backed spaces store raw Euclidean coordinates and evaluate
// dist(p, q) = scale * |p - q|^power, which covers Euclidean, chordal and
// snowflaked metrics. Matrix-backed spaces hold an explicit distance table.
class FiniteMetricSpace {
 public:
  static FiniteMetricSpace from_coordinates(std::string label, int dim,
                                            std::vector<double> raw, double power,
                                            double raw_resolution);
  static FiniteMetricSpace from_matrix(std::string label, std::size_t n,
                                       std::vector<double> matrix, double resolution);

  FiniteMetricSpace(FiniteMetricSpace&&) = default;
  FiniteMetricSpace& operator=(FiniteMetricSpace&&) = default;
  FiniteMetricSpace(const FiniteMetricSpace&) = delete;
  FiniteMetricSpace& operator=(const FiniteMetricSpace&) = delete;

  std::size_t size() const { return n_; }
  const std::string& label() const { return label_; }
  double resolution() const { return rho_; }
  int dim() const { return dim_; }
  bool has_coordinates() const { return dim_ > 0; }
  double power() const { return power_; }

  const SpaceSpec& spec() const { return spec_; }
  void set_spec(SpaceSpec spec) { spec_ = std::move(spec); }

  double dist(PointId p, PointId q) const;
  // Distance from a sample point to an arbitrary raw position.
  double dist_to_raw(PointId p, const double* pos) const;
  std::span<const double> raw(PointId p) const {
    return {raw_.data() + static_cast<std::size_t>(p) * dim_, static_cast<std::size_t>(dim_)};
  }

  // Sample points with dist(center, p) < r (strict) or <= r.
  void points_within(PointId center, double r, bool strict, std::vector<PointId>& out) const;
  void points_within_raw(const double* pos, double r, bool strict,
                         std::vector<PointId>& out) const;
  PointId nearest_to_raw(const double* pos) const;

  double diameter(std::span<const PointId> subset) const;
  // Largest distance between a point of `a` and a point of `b`.
  double cross_diameter(std::span<const PointId> a, std::span<const PointId> b) const;
  // Points whose pairwise diameter equals diameter(subset): convex hull
  // vertices for coordinate spaces, the subset itself otherwise.
  std::vector<PointId> extreme_points(std::span<const PointId> subset) const;

 private:
  FiniteMetricSpace() = default;
  double raw_radius(double r) const;

  std::string label_;
  std::size_t n_ = 0;
  int dim_ = 0;
  double power_ = 1.0;
  double scale_ = 1.0;
  double rho_ = 0.0;
  std::vector<double> raw_;
  std::vector<double> matrix_;
  GridIndex index_;
  SpaceSpec spec_;
};

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

// Builds one of the built-in spaces: interval, square, circle, snowflake,
// parabola_union, strip, disk, cantor.
SpacePtr make_space(const SpaceSpec& spec);
SpacePtr make_space(const std::string& generator, const nlohmann::json& params);

// A delta-connected sample set standing in for a continuum.
struct DeltaContinuum {
  std::vector<PointId> support;
  double delta = 0.0;
  double diam = 0.0;
};

struct BoundedTurningEstimate {
  double lambda_hat = 1.0;
  std::size_t pairs_sampled = 0;
  std::array<PointId, 2> worst_pair{0, 0};
  bool unbounded_suspected = false;
};

// Components of the graph on `subset` with edges dist <= delta. Parts are
// sorted by their smallest member; members within a part are sorted.
std::vector<std::vector<PointId>> delta_components(const FiniteMetricSpace& space,
                                                   std::span<const PointId> subset,
                                                   double delta);

// A small delta-connected chain joining x and y. See hull.cpp for the
// construction; the result has diameter at most twice the optimal
// connecting-set diameter.
DeltaContinuum hull_between(const FiniteMetricSpace& space, PointId x, PointId y, double delta);

double mazurkiewicz_dist(const FiniteMetricSpace& space, PointId x, PointId y, double delta);

BoundedTurningEstimate estimate_bounded_turning(const FiniteMetricSpace& space, double delta,
                                                std::size_t num_pairs, std::uint64_t seed);

// Exhaustive metric axiom check for small spaces, `samples` random triples
// otherwise. Returns the first violation as text, or nullopt.
std::optional<std::string> check_metric_axioms(const FiniteMetricSpace& space,
                                               std::size_t samples, std::uint64_t seed);

template <typename F>
void GridIndex::for_each_within(const double* pos, double radius, F&& fn) const {
  if (cells_.empty()) return;
  std::array<std::int64_t, 2> lo{0, 0}, hi{0, 0};
  for (int d = 0; d < dim_; ++d) {
    auto a = static_cast<std::int64_t>(std::floor((pos[d] - radius - lo_[d]) / cell_));
    auto b = static_cast<std::int64_t>(std::floor((pos[d] + radius - lo_[d]) / cell_));
    lo[d] = std::max<std::int64_t>(a, 0);
    hi[d] = std::min<std::int64_t>(b, extent_[d] - 1);
    if (lo[d] > hi[d]) return;
  }
  const double r2 = radius * radius;
  for (std::int64_t cy = lo[1]; cy <= hi[1]; ++cy) {
    for (std::int64_t cx = lo[0]; cx <= hi[0]; ++cx) {
      const auto c = static_cast<std::size_t>(cy * extent_[0] + cx);
      for (std::uint32_t k = start_[c]; k < start_[c + 1]; ++k) {
        const PointId p = cells_[k];
        double d2 = 0.0;
        for (int d = 0; d < dim_; ++d) {
          const double t = coords_[static_cast<std::size_t>(p) * dim_ + d] - pos[d];
          d2 += t * t;
        }
        if (d2 <= r2) fn(p, d2);
      }
    }
  }
}

}  // namespace hyperfill
