#include "hyperfill/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace hyperfill {

namespace {

constexpr double kRawSlack = 1e-9;

double euclid(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double t = a[d] - b[d];
    s += t * t;
  }
  return std::sqrt(s);
}

double cross(const double* o, const double* a, const double* b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain over raw 2-D coordinates.
std::vector<PointId> convex_hull(std::span<const double> raw, std::span<const PointId> subset) {
  std::vector<PointId> pts(subset.begin(), subset.end());
  auto at = [&](PointId p) { return raw.data() + 2 * static_cast<std::size_t>(p); };
  std::sort(pts.begin(), pts.end(), [&](PointId a, PointId b) {
    const double* pa = at(a);
    const double* pb = at(b);
    if (pa[0] != pb[0]) return pa[0] < pb[0];
    if (pa[1] != pb[1]) return pa[1] < pb[1];
    return a < b;
  });
  if (pts.size() <= 2) return pts;
  std::vector<PointId> hull(2 * pts.size());
  std::size_t k = 0;
  for (PointId p : pts) {
    while (k >= 2 && cross(at(hull[k - 2]), at(hull[k - 1]), at(p)) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    const PointId p = pts[i];
    while (k >= t && cross(at(hull[k - 2]), at(hull[k - 1]), at(p)) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

double raw_euclid_diameter(int dim, std::span<const double> raw, std::span<const PointId> subset,
                           std::span<const PointId> extreme) {
  if (subset.size() < 2) return 0.0;
  double best = 0.0;
  if (dim == 1) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (PointId p : subset) {
      lo = std::min(lo, raw[p]);
      hi = std::max(hi, raw[p]);
    }
    return hi - lo;
  }
  for (std::size_t i = 0; i < extreme.size(); ++i) {
    for (std::size_t j = i + 1; j < extreme.size(); ++j) {
      best = std::max(best, euclid(raw.data() + 2 * static_cast<std::size_t>(extreme[i]),
                                   raw.data() + 2 * static_cast<std::size_t>(extreme[j]), 2));
    }
  }
  return best;
}

double param(const nlohmann::json& params, const char* key, double fallback) {
  if (params.contains(key)) return params.at(key).get<double>();
  return fallback;
}

long iparam(const nlohmann::json& params, const char* key, long fallback) {
  if (!params.contains(key)) return fallback;
  const double v = params.at(key).get<double>();
  if (v != std::floor(v)) {
    throw Error(ErrorKind::invalid_argument, std::string("parameter '") + key + "' must be an integer");
  }
  return static_cast<long>(v);
}

void require_points(long count, const std::string& generator) {
  if (count < 4) {
    throw Error(ErrorKind::invalid_argument,
                generator + ": size parameters produce fewer than 4 points");
  }
}

}  // namespace

SpaceSpec parse_space_spec(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("generator") || !j.at("generator").is_string()) {
    throw Error(ErrorKind::invalid_argument, "space spec: missing string field 'generator'");
  }
  SpaceSpec spec;
  spec.generator = j.at("generator").get<std::string>();
  if (j.contains("params")) {
    if (!j.at("params").is_object()) {
      throw Error(ErrorKind::invalid_argument, "space spec: 'params' must be an object");
    }
    spec.params = j.at("params");
  }
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

nlohmann::json to_json(const SpaceSpec& spec) {
  return {{"generator", spec.generator}, {"params", spec.params}, {"seed", spec.seed}};
}

GridIndex::GridIndex(int dim, std::span<const double> coords, double cell)
    : dim_(dim), cell_(cell), coords_(coords) {
  const std::size_t n = coords.size() / static_cast<std::size_t>(dim);
  std::array<double, 2> hi{0.0, 0.0};
  for (int d = 0; d < dim; ++d) {
    lo_[d] = std::numeric_limits<double>::infinity();
    hi[d] = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      lo_[d] = std::min(lo_[d], coords[i * dim + d]);
      hi[d] = std::max(hi[d], coords[i * dim + d]);
    }
    extent_[d] = static_cast<std::int64_t>(std::floor((hi[d] - lo_[d]) / cell_)) + 1;
  }
  const auto ncells = static_cast<std::size_t>(extent_[0] * extent_[1]);
  std::vector<std::size_t> owner(n);
  start_.assign(ncells + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::int64_t, 2> c{0, 0};
    for (int d = 0; d < dim; ++d) {
      c[d] = std::min<std::int64_t>(
          static_cast<std::int64_t>(std::floor((coords[i * dim + d] - lo_[d]) / cell_)),
          extent_[d] - 1);
    }
    owner[i] = static_cast<std::size_t>(c[1] * extent_[0] + c[0]);
    ++start_[owner[i] + 1];
  }
  std::partial_sum(start_.begin(), start_.end(), start_.begin());
  cells_.assign(n, 0);
  std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) cells_[fill[owner[i]]++] = static_cast<PointId>(i);
}

FiniteMetricSpace FiniteMetricSpace::from_coordinates(std::string label, int dim,
                                                      std::vector<double> raw, double power,
                                                      double raw_resolution) {
  if (dim != 1 && dim != 2) throw Error(ErrorKind::invalid_argument, "coordinates must be 1-D or 2-D");
  if (power <= 0.0 || power > 1.0) {
    throw Error(ErrorKind::invalid_argument, "metric exponent must lie in (0, 1]");
  }
  FiniteMetricSpace s;
  s.label_ = std::move(label);
  s.dim_ = dim;
  s.power_ = power;
  s.n_ = raw.size() / static_cast<std::size_t>(dim);
  s.raw_ = std::move(raw);
  if (s.n_ < 4) throw Error(ErrorKind::invalid_argument, "spaces need at least 4 points");

  std::vector<std::size_t> order(s.n_);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(s.raw_.begin() + a * dim, s.raw_.begin() + (a + 1) * dim,
                                        s.raw_.begin() + b * dim, s.raw_.begin() + (b + 1) * dim);
  });
  for (std::size_t i = 1; i < s.n_; ++i) {
    if (std::equal(s.raw_.begin() + order[i - 1] * dim, s.raw_.begin() + order[i - 1] * dim + dim,
                   s.raw_.begin() + order[i] * dim)) {
      throw Error(ErrorKind::invalid_argument, "duplicate points in sample");
    }
  }

  std::vector<PointId> all(s.n_);
  std::iota(all.begin(), all.end(), 0);
  std::vector<PointId> extreme;
  if (dim == 2) extreme = convex_hull(s.raw_, all);
  const double raw_diam = raw_euclid_diameter(dim, s.raw_, all, extreme);
  s.scale_ = 1.0 / std::pow(raw_diam, power);
  s.rho_ = s.scale_ * std::pow(raw_resolution, power);
  if (!(s.rho_ < 0.25)) {
    throw Error(ErrorKind::invalid_argument, "resolution must be finer than 1/4 of the diameter");
  }

  double cell = raw_diam / std::sqrt(static_cast<double>(s.n_));
  if (dim == 1) cell = raw_diam / static_cast<double>(s.n_) * 2.0;
  s.index_ = GridIndex(dim, s.raw_, std::max(cell, 1e-12));
  return s;
}

FiniteMetricSpace FiniteMetricSpace::from_matrix(std::string label, std::size_t n,
                                                 std::vector<double> matrix, double resolution) {
  if (n < 4) throw Error(ErrorKind::invalid_argument, "spaces need at least 4 points");
  if (matrix.size() != n * n) throw Error(ErrorKind::invalid_argument, "distance matrix must be n x n");
  double diam = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && !(matrix[i * n + j] > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "distinct points must have positive distance");
      }
      diam = std::max(diam, matrix[i * n + j]);
    }
  }
  FiniteMetricSpace s;
  s.label_ = std::move(label);
  s.n_ = n;
  for (double& d : matrix) d /= diam;
  s.matrix_ = std::move(matrix);
  s.rho_ = resolution / diam;
  if (!(s.rho_ > 0.0 && s.rho_ < 0.25)) {
    throw Error(ErrorKind::invalid_argument, "resolution must lie in (0, 1/4) after normalization");
  }
  return s;
}

double FiniteMetricSpace::dist(PointId p, PointId q) const {
  if (dim_ == 0) return matrix_[static_cast<std::size_t>(p) * n_ + q];
  if (p == q) return 0.0;
  const double e = euclid(raw_.data() + static_cast<std::size_t>(p) * dim_,
                          raw_.data() + static_cast<std::size_t>(q) * dim_, dim_);
  return power_ == 1.0 ? scale_ * e : scale_ * std::pow(e, power_);
}

double FiniteMetricSpace::dist_to_raw(PointId p, const double* pos) const {
  if (dim_ == 0) throw Error(ErrorKind::incompatible, "space has no coordinates");
  const double e = euclid(raw_.data() + static_cast<std::size_t>(p) * dim_, pos, dim_);
  return power_ == 1.0 ? scale_ * e : scale_ * std::pow(e, power_);
}

double FiniteMetricSpace::raw_radius(double r) const {
  if (r <= 0.0) return 0.0;
  const double base = r / scale_;
  return (power_ == 1.0 ? base : std::pow(base, 1.0 / power_)) * (1.0 + kRawSlack) + 1e-15;
}

void FiniteMetricSpace::points_within(PointId center, double r, bool strict,
                                      std::vector<PointId>& out) const {
  out.clear();
  if (dim_ == 0) {
    for (PointId q = 0; q < n_; ++q) {
      const double d = dist(center, q);
      if (strict ? d < r : d <= r) out.push_back(q);
    }
    return;
  }
  index_.for_each_within(raw(center).data(), raw_radius(r), [&](PointId q, double) {
    const double d = dist(center, q);
    if (strict ? d < r : d <= r) out.push_back(q);
  });
  std::sort(out.begin(), out.end());
}

void FiniteMetricSpace::points_within_raw(const double* pos, double r, bool strict,
                                          std::vector<PointId>& out) const {
  out.clear();
  index_.for_each_within(pos, raw_radius(r), [&](PointId q, double) {
    const double d = dist_to_raw(q, pos);
    if (strict ? d < r : d <= r) out.push_back(q);
  });
  std::sort(out.begin(), out.end());
}

PointId FiniteMetricSpace::nearest_to_raw(const double* pos) const {
  if (dim_ == 0) throw Error(ErrorKind::incompatible, "space has no coordinates");
  // Expand the search radius until something is found; ties go to the
  // smallest id.
  double radius = raw_radius(rho_ > 0.0 ? 2.0 * rho_ : 1e-3);
  for (;;) {
    PointId best = static_cast<PointId>(-1);
    double best_d2 = std::numeric_limits<double>::infinity();
    index_.for_each_within(pos, radius, [&](PointId q, double d2) {
      if (d2 < best_d2 || (d2 == best_d2 && q < best)) {
        best_d2 = d2;
        best = q;
      }
    });
    if (best != static_cast<PointId>(-1) && std::sqrt(best_d2) <= radius) return best;
    radius *= 2.0;
    if (radius > 1e6) throw Error(ErrorKind::invalid_argument, "nearest point search diverged");
  }
}

std::vector<PointId> FiniteMetricSpace::extreme_points(std::span<const PointId> subset) const {
  if (dim_ == 2) return convex_hull(raw_, subset);
  if (dim_ == 1 && !subset.empty()) {
    auto [lo, hi] = std::minmax_element(subset.begin(), subset.end(),
                                        [&](PointId a, PointId b) { return raw_[a] < raw_[b]; });
    if (*lo == *hi) return {*lo};
    return {std::min(*lo, *hi), std::max(*lo, *hi)};
  }
  return {subset.begin(), subset.end()};
}

double FiniteMetricSpace::diameter(std::span<const PointId> subset) const {
  if (subset.size() < 2) return 0.0;
  if (dim_ > 0) {
    std::vector<PointId> ext;
    if (dim_ == 2) ext = convex_hull(raw_, subset);
    const double e = raw_euclid_diameter(dim_, raw_, subset, ext);
    return power_ == 1.0 ? scale_ * e : scale_ * std::pow(e, power_);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for (std::size_t j = i + 1; j < subset.size(); ++j) best = std::max(best, dist(subset[i], subset[j]));
  }
  return best;
}

double FiniteMetricSpace::cross_diameter(std::span<const PointId> a,
                                         std::span<const PointId> b) const {
  double best = 0.0;
  for (PointId p : a) {
    for (PointId q : b) best = std::max(best, dist(p, q));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Generators

namespace {

std::vector<double> grid_1d(long n, double lo, double hi) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return x;
}

FiniteMetricSpace make_interval(const nlohmann::json& params) {
  const long n = iparam(params, "n", 65);
  require_points(n, "interval");
  const double lo = param(params, "lo", 0.0);
  const double hi = param(params, "hi", 1.0);
  if (!(hi > lo)) throw Error(ErrorKind::invalid_argument, "interval: need hi > lo");
  const double h = (hi - lo) / static_cast<double>(n - 1);
  return FiniteMetricSpace::from_coordinates("interval", 1, grid_1d(n, lo, hi), 1.0, h / 2.0);
}

FiniteMetricSpace make_snowflake(const nlohmann::json& params) {
  const long n = iparam(params, "n", 65);
  require_points(n, "snowflake");
  const double eps = param(params, "epsilon", 0.5);
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorKind::invalid_argument, "snowflake: epsilon must lie in (0, 1]");
  const double h = 1.0 / static_cast<double>(n - 1);
  return FiniteMetricSpace::from_coordinates("snowflake", 1, grid_1d(n, 0.0, 1.0), eps, h / 2.0);
}

FiniteMetricSpace make_rectangle(const std::string& label, long nx, long ny, double x0, double x1,
                                 double y0, double y1) {
  require_points(nx * ny, label);
  if (nx < 2 || ny < 2) throw Error(ErrorKind::invalid_argument, label + ": need at least 2 points per axis");
  std::vector<double> raw;
  raw.reserve(static_cast<std::size_t>(2 * nx * ny));
  const auto xs = grid_1d(nx, x0, x1);
  const auto ys = grid_1d(ny, y0, y1);
  for (long j = 0; j < ny; ++j) {
    for (long i = 0; i < nx; ++i) {
      raw.push_back(xs[i]);
      raw.push_back(ys[j]);
    }
  }
  const double hx = (x1 - x0) / static_cast<double>(nx - 1);
  const double hy = (y1 - y0) / static_cast<double>(ny - 1);
  return FiniteMetricSpace::from_coordinates(label, 2, std::move(raw), 1.0,
                                             0.5 * std::hypot(hx, hy));
}

FiniteMetricSpace make_square(const nlohmann::json& params) {
  const long n = iparam(params, "n", 33);
  return make_rectangle("square", n, n, 0.0, 1.0, 0.0, 1.0);
}

// [x0, x1] x [0, 1] with the same spacing on both axes; n points along y.
FiniteMetricSpace make_strip(const nlohmann::json& params) {
  const long n = iparam(params, "n", 33);
  const double x0 = param(params, "x0", -1.0);
  const double x1 = param(params, "x1", 1.0);
  if (n < 2 || !(x1 > x0)) throw Error(ErrorKind::invalid_argument, "strip: bad extent");
  const double h = 1.0 / static_cast<double>(n - 1);
  const double cols = (x1 - x0) / h;
  if (std::abs(cols - std::round(cols)) > 1e-9) {
    throw Error(ErrorKind::invalid_argument, "strip: width must be a multiple of the spacing");
  }
  return make_rectangle("strip", static_cast<long>(std::round(cols)) + 1, n, x0, x1, 0.0, 1.0);
}

FiniteMetricSpace make_circle(const nlohmann::json& params) {
  const long n = iparam(params, "n", 64);
  require_points(n, "circle");
  std::vector<double> raw;
  for (long i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    raw.push_back(std::cos(a));
    raw.push_back(std::sin(a));
  }
  return FiniteMetricSpace::from_coordinates(
      "circle", 2, std::move(raw), 1.0, 2.0 * std::sin(std::numbers::pi / (2.0 * static_cast<double>(n))));
}

// Grid points of [-1, 1]^2 inside the closed unit disk. The resolution is
// measured: interior cells give h*sqrt(2)/2, the boundary circle is probed
// directly.
FiniteMetricSpace make_disk(const nlohmann::json& params) {
  const long n = iparam(params, "n", 65);
  if (n < 3) throw Error(ErrorKind::invalid_argument, "disk: n too small");
  const auto xs = grid_1d(n, -1.0, 1.0);
  std::vector<double> raw;
  for (long j = 0; j < n; ++j) {
    for (long i = 0; i < n; ++i) {
      if (xs[i] * xs[i] + xs[j] * xs[j] <= 1.0 + 1e-12) {
        raw.push_back(xs[i]);
        raw.push_back(xs[j]);
      }
    }
  }
  require_points(static_cast<long>(raw.size() / 2), "disk");
  const double h = 2.0 / static_cast<double>(n - 1);
  double res = h * std::sqrt(2.0) / 2.0;
  const long probes = 32 * n;
  for (long k = 0; k < probes; ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(probes);
    const double px = std::cos(a), py = std::sin(a);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < raw.size(); i += 2) {
      if (std::abs(raw[i] - px) > 2 * h || std::abs(raw[i + 1] - py) > 2 * h) continue;
      best = std::min(best, std::hypot(raw[i] - px, raw[i + 1] - py));
    }
    res = std::max(res, best);
  }
  return FiniteMetricSpace::from_coordinates("disk", 2, std::move(raw), 1.0, res);
}

// ([0,1] x {0}) union {(x, x^2)}: two arcs meeting at the origin.
FiniteMetricSpace make_parabola_union(const nlohmann::json& params) {
  const long n = iparam(params, "n", 100);
  require_points(2 * n - 1, "parabola_union");
  if (n < 2) throw Error(ErrorKind::invalid_argument, "parabola_union: n too small");
  const auto xs = grid_1d(n, 0.0, 1.0);
  std::vector<double> raw;
  for (long i = 0; i < n; ++i) {
    raw.push_back(xs[i]);
    raw.push_back(0.0);
  }
  double gap = 0.0;
  for (long i = 1; i < n; ++i) {
    raw.push_back(xs[i]);
    raw.push_back(xs[i] * xs[i]);
    gap = std::max(gap, std::hypot(xs[i] - xs[i - 1], xs[i] * xs[i] - xs[i - 1] * xs[i - 1]));
  }
  return FiniteMetricSpace::from_coordinates("parabola_union", 2, std::move(raw), 1.0, gap / 2.0);
}

// Two-symbol Cantor set: sums of a_i (b - 1) b^{-i}, a_i in {0, 1}, i <= k.
FiniteMetricSpace make_cantor(const nlohmann::json& params) {
  const long k = iparam(params, "k", 5);
  const double b = param(params, "base", 10.0);
  if (k < 2 || k > 20 || b < 4.0) throw Error(ErrorKind::invalid_argument, "cantor: need 2 <= k <= 20, base >= 4");
  std::vector<double> raw;
  for (long mask = 0; mask < (1L << k); ++mask) {
    double x = 0.0;
    for (long i = 1; i <= k; ++i) {
      if (mask & (1L << (k - i))) x += (b - 1.0) * std::pow(b, -static_cast<double>(i));
    }
    raw.push_back(x);
  }
  return FiniteMetricSpace::from_coordinates("cantor", 1, std::move(raw), 1.0,
                                             std::pow(b, -static_cast<double>(k)) / 2.0);
}

}  // namespace

SpacePtr make_space(const SpaceSpec& spec) {
  FiniteMetricSpace space = [&] {
    const auto& g = spec.generator;
    const auto& p = spec.params;
    if (g == "interval") return make_interval(p);
    if (g == "snowflake") return make_snowflake(p);
    if (g == "square") return make_square(p);
    if (g == "strip") return make_strip(p);
    if (g == "circle") return make_circle(p);
    if (g == "disk") return make_disk(p);
    if (g == "parabola_union") return make_parabola_union(p);
    if (g == "cantor") return make_cantor(p);
    throw Error(ErrorKind::unknown_generator, "unknown generator '" + g + "'");
  }();
  space.set_spec(spec);
  return std::make_shared<const FiniteMetricSpace>(std::move(space));
}

SpacePtr make_space(const std::string& generator, const nlohmann::json& params) {
  SpaceSpec spec;
  spec.generator = generator;
  spec.params = params;
  return make_space(spec);
}

std::optional<std::string> check_metric_axioms(const FiniteMetricSpace& space, std::size_t samples,
                                               std::uint64_t seed) {
  constexpr double tol = 1e-12;
  const std::size_t n = space.size();
  auto check_triple = [&](PointId a, PointId b, PointId c) -> std::optional<std::string> {
    if (space.dist(a, c) > space.dist(a, b) + space.dist(b, c) + tol) {
      return "triangle inequality fails at (" + std::to_string(a) + "," + std::to_string(b) + "," +
             std::to_string(c) + ")";
    }
    return std::nullopt;
  };
  auto check_pair = [&](PointId a, PointId b) -> std::optional<std::string> {
    const double d = space.dist(a, b);
    if (std::abs(d - space.dist(b, a)) > tol) return "asymmetric distance";
    if (a == b && d != 0.0) return "nonzero self distance";
    if (a != b && !(d > 0.0)) return "non-positive distance between distinct points";
    if (d > 1.0 + tol) return "distance exceeds normalized diameter";
    return std::nullopt;
  };
  std::vector<PointId> all(n);
  std::iota(all.begin(), all.end(), 0);
  if (std::abs(space.diameter(all) - 1.0) > 1e-9) return "diameter is not 1";
  if (n <= 64) {
    for (PointId a = 0; a < n; ++a) {
      for (PointId b = 0; b < n; ++b) {
        if (auto e = check_pair(a, b)) return e;
        for (PointId c = 0; c < n; ++c) {
          if (auto e = check_triple(a, b, c)) return e;
        }
      }
    }
    return std::nullopt;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<PointId> pick(0, static_cast<PointId>(n - 1));
  for (std::size_t i = 0; i < samples; ++i) {
    const PointId a = pick(rng), b = pick(rng), c = pick(rng);
    if (auto e = check_pair(a, b)) return e;
    if (auto e = check_triple(a, b, c)) return e;
  }
  return std::nullopt;
}

}  // namespace hyperfill
