#include "hyperfill/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace hyperfill {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::string& generator_of(const FiniteMetricSpace& s) { return s.spec().generator; }

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::incompatible, what);
}

double raw_range(const FiniteMetricSpace& s, int axis, bool hi) {
  double v = hi ? -kInf : kInf;
  for (PointId p = 0; p < s.size(); ++p) {
    double c = s.raw(p)[axis];
    v = hi ? std::max(v, c) : std::min(v, c);
  }
  return v;
}

template <typename F>
std::vector<PointId> snap(const FiniteMetricSpace& src, const FiniteMetricSpace& tgt, F&& image) {
  std::vector<PointId> out(src.size());
  std::array<double, 2> pos{};
  for (PointId p = 0; p < src.size(); ++p) {
    image(src.raw(p), pos.data());
    out[p] = tgt.nearest_to_raw(pos.data());
  }
  return out;
}

}  // namespace

double folding_h(double t) {
  if (t <= -0.5) return 3.0 * (t + 1.0) - 1.0;
  if (t <= 0.5) return std::abs(t);
  return t;
}

double accordion_g(double x) {
  if (x <= 1.0) return 1.0 - x;
  if (x >= 3.0) return 0.0;
  // a_k = 3 - 2^(1-k) for k >= 1, a_0 = 1.
  double a = 1.0;
  for (int k = 0; k < 60; ++k) {
    double half = std::ldexp(1.0, -k - 1);
    double next = a + 2.0 * half;
    if (x <= next) return x <= a + half ? x - a : next - x;
    a = next;
  }
  return 0.0;
}

std::vector<std::string> builtin_map_names() {
  return {"identity", "inclusion", "snowflake_identity", "winding", "folding", "accordion", "projection"};
}

MetricMap builtin_map(const std::string& name, SpacePtr source, SpacePtr target) {
  if (!source || !target) throw Error(ErrorKind::invalid_argument, "builtin_map: null space");
  const auto& X = *source;
  const auto& Y = *target;
  require(X.has_coordinates() && Y.has_coordinates(), name + ": spaces need coordinates");
  MetricMap m{source, target, {}, name};
  if (name == "identity" || name == "inclusion" || name == "snowflake_identity") {
    require(X.dim() == Y.dim(), name + ": dimension mismatch");
    if (name == "snowflake_identity") require(generator_of(Y) == "snowflake", name + ": target must be a snowflake");
    if (name == "identity" && source == target) {
      m.assignment.resize(X.size());
      std::iota(m.assignment.begin(), m.assignment.end(), PointId{0});
      return m;
    }
    int d = X.dim();
    m.assignment = snap(X, Y, [d](std::span<const double> z, double* out) {
      for (int i = 0; i < d; ++i) out[i] = z[i];
    });
  } else if (name == "winding") {
    require(X.dim() == 2 && Y.dim() == 2, "winding: needs planar spaces");
    m.assignment = snap(X, Y, [](std::span<const double> z, double* out) {
      double r = std::hypot(z[0], z[1]);
      if (r == 0.0) {
        out[0] = out[1] = 0.0;
        return;
      }
      // z^2 / |z|
      out[0] = (z[0] * z[0] - z[1] * z[1]) / r;
      out[1] = 2.0 * z[0] * z[1] / r;
    });
  } else if (name == "folding") {
    require(generator_of(X) == "strip" && generator_of(Y) == "strip", "folding: needs strip -> strip");
    require(raw_range(X, 0, false) <= -1.0 + 1e-12 && raw_range(X, 0, true) >= 1.0 - 1e-12,
            "folding: source strip must span [-1, 1]");
    m.assignment = snap(X, Y, [](std::span<const double> z, double* out) {
      out[0] = folding_h(z[0]);
      out[1] = z[1];
    });
  } else if (name == "accordion") {
    require(generator_of(X) == "strip" && generator_of(Y) == "square", "accordion: needs strip -> square");
    require(std::abs(raw_range(X, 0, false)) < 1e-12 && std::abs(raw_range(X, 0, true) - 3.0) < 1e-12,
            "accordion: source strip must span [0, 3]");
    m.assignment = snap(X, Y, [](std::span<const double> z, double* out) {
      out[0] = accordion_g(z[0]);
      out[1] = z[1];
    });
  } else if (name == "projection") {
    require(generator_of(X) == "square" && Y.dim() == 1, "projection: needs square -> interval");
    m.assignment = snap(X, Y, [](std::span<const double> z, double* out) { out[0] = z[1]; });
  } else {
    throw Error(ErrorKind::unknown_generator, "unknown map: " + name);
  }
  return m;
}

MetricMap compose(const MetricMap& f, const MetricMap& g) {
  bool chained = f.target == g.source ||
                 (f.target && g.source && f.target->size() == g.source->size() &&
                  !f.target->spec().generator.empty() && f.target->spec() == g.source->spec());
  require(chained, "compose: target of f is not the source of g");
  MetricMap h{f.source, g.target, std::vector<PointId>(f.assignment.size()), g.label + "_o_" + f.label};
  for (std::size_t p = 0; p < f.assignment.size(); ++p) h.assignment[p] = g.assignment[f.assignment[p]];
  return h;
}

double image_diameter(const MetricMap& f, std::span<const PointId> subset) {
  std::vector<PointId> img(subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) img[i] = f.assignment[subset[i]];
  std::sort(img.begin(), img.end());
  img.erase(std::unique(img.begin(), img.end()), img.end());
  return f.target->diameter(img);
}

namespace {

struct Continuum {
  std::vector<PointId> pts;
  double diam = 0.0;
  double image_diam = 0.0;
};

// delta-component of x inside the closed ball B(x, r).
std::vector<PointId> anchored_component(const FiniteMetricSpace& X, PointId x, double r, double delta) {
  std::vector<PointId> ball;
  X.points_within(x, r, false, ball);
  std::sort(ball.begin(), ball.end());
  for (auto& part : delta_components(X, ball, delta)) {
    if (std::binary_search(part.begin(), part.end(), x)) return part;
  }
  return {x};
}

class PairSampler {
 public:
  PairSampler(const MetricMap& f, double delta, double max_diam)
      : f_(f), X_(*f.source), delta_(delta), max_diam_(max_diam) {}

  Continuum make(std::vector<PointId> pts) const {
    Continuum c;
    c.diam = X_.diameter(pts);
    c.image_diam = image_diameter(f_, pts);
    c.pts = std::move(pts);
    return c;
  }

  bool usable(const Continuum& c) const { return c.diam > 0.0 && (max_diam_ <= 0.0 || c.diam <= max_diam_); }

  const Continuum& chain(PointId a, PointId b) {
    auto key = std::minmax(a, b);
    auto it = cache_.find({key.first, key.second});
    if (it != cache_.end()) return it->second;
    auto hull = hull_between(X_, a, b, delta_);
    return cache_.emplace(std::pair{key.first, key.second}, make(std::move(hull.support))).first->second;
  }

 private:
  const MetricMap& f_;
  const FiniteMetricSpace& X_;
  double delta_;
  double max_diam_;
  std::map<std::pair<PointId, PointId>, Continuum> cache_;
};

void record(DistortionProfile& prof, const Continuum& E, const Continuum& Ep) {
  double t = E.diam / Ep.diam;
  DistortionSample s{t, 0.0, false}, r{Ep.diam / E.diam, 0.0, false};
  if (Ep.image_diam == 0.0 || E.image_diam == 0.0) {
    s.degenerate = r.degenerate = true;
    ++prof.degenerate_count;
  }
  s.u = Ep.image_diam == 0.0 ? kInf : E.image_diam / Ep.image_diam;
  r.u = E.image_diam == 0.0 ? kInf : Ep.image_diam / E.image_diam;
  prof.samples.push_back(s);
  prof.samples.push_back(r);
}

}  // namespace

DistortionProfile sample_continuum_pairs(const MetricMap& f, double delta, std::size_t count,
                                         const std::string& generator, std::uint64_t seed, double max_diam) {
  const auto& X = *f.source;
  if (f.assignment.size() != X.size()) throw Error(ErrorKind::invalid_argument, "map is not total on its source");
  if (!(delta >= 2.0 * X.resolution())) throw Error(ErrorKind::invalid_argument, "delta below twice the resolution");
  DistortionProfile prof;
  prof.generator = generator;
  prof.seed = seed;
  prof.delta = delta;
  PairSampler sampler(f, delta, max_diam);
  std::mt19937_64 rng(seed);
  const auto n = static_cast<PointId>(X.size());
  std::uniform_int_distribution<PointId> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto radius = [&] { return delta * std::pow(1.0 / delta, unit(rng)); };

  if (generator == "chain_pairs" && count == 0) {
    for (PointId a = 0; a < n; ++a) {
      for (PointId b = 0; b < n; ++b) {
        if (b == a) continue;
        const Continuum& E = sampler.chain(a, b);
        if (!sampler.usable(E)) continue;
        for (PointId c = b + 1; c < n; ++c) {
          if (c == a) continue;
          const Continuum& Ep = sampler.chain(a, c);
          if (sampler.usable(Ep)) record(prof, E, Ep);
        }
      }
    }
    return prof;
  }
  if (count == 0) throw Error(ErrorKind::invalid_argument, generator + ": count must be positive");

  // Bounded retries so unusable draws cannot spin forever.
  std::size_t attempts = 0, limit = 50 * count + 1000;
  std::size_t taken = 0;
  while (taken < count && attempts++ < limit) {
    if (generator == "hull_pairs") {
      PointId a = pick(rng);
      auto E = sampler.make(anchored_component(X, a, radius(), delta));
      auto Ep = sampler.make(anchored_component(X, a, radius(), delta));
      if (!sampler.usable(E) || !sampler.usable(Ep)) continue;
      record(prof, E, Ep);
    } else if (generator == "chain_pairs") {
      PointId a = pick(rng), b = pick(rng), c = pick(rng);
      if (a == b || a == c || b == c) continue;
      const Continuum& E = sampler.chain(a, b);
      const Continuum& Ep = sampler.chain(a, c);
      if (!sampler.usable(E) || !sampler.usable(Ep)) continue;
      record(prof, E, Ep);
    } else if (generator == "ball_pairs") {
      PointId a = pick(rng);
      std::vector<PointId> e;
      X.points_within(a, radius(), false, e);
      std::sort(e.begin(), e.end());
      PointId b = e[std::uniform_int_distribution<std::size_t>(0, e.size() - 1)(rng)];
      std::vector<PointId> ep;
      X.points_within(b, radius(), false, ep);
      std::sort(ep.begin(), ep.end());
      auto E = sampler.make(std::move(e));
      auto Ep = sampler.make(std::move(ep));
      if (!sampler.usable(E) || !sampler.usable(Ep)) continue;
      record(prof, E, Ep);
    } else {
      throw Error(ErrorKind::invalid_argument, "unknown pair generator: " + generator);
    }
    ++taken;
  }
  return prof;
}

double PowerGauge::operator()(double t) const { return C * std::max(std::pow(t, q), std::pow(t, 1.0 / q)); }

std::vector<double> default_q_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 20; ++i) g.push_back(0.05 * i);
  return g;
}

GaugeFit fit_power_gauge(const DistortionProfile& profile, const std::vector<double>& q_grid) {
  if (profile.samples.empty()) throw Error(ErrorKind::invalid_argument, "empty distortion profile");
  for (double q : q_grid) {
    if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorKind::invalid_argument, "q outside (0, 1]");
  }
  GaugeFit fit;
  fit.q_grid = q_grid;
  bool infinite = std::any_of(profile.samples.begin(), profile.samples.end(),
                              [](const DistortionSample& s) { return std::isinf(s.u); });
  for (double q : q_grid) {
    double C = 1.0;
    for (const auto& s : profile.samples) {
      if (std::isinf(s.u)) continue;
      C = std::max(C, s.u / std::max(std::pow(s.t, q), std::pow(s.t, 1.0 / q)));
    }
    fit.C_of_q.push_back(C);
  }
  if (infinite) {
    fit.verdict = "not-bqs-evidence";
    return fit;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < q_grid.size(); ++i) {
    // Relative 1e-12 absorbs pow() rounding so exact ties go to the larger q.
    double a = fit.C_of_q[i], b = fit.C_of_q[best];
    bool tie = std::abs(a - b) <= 1e-12 * b;
    if ((!tie && a < b) || (tie && q_grid[i] > q_grid[best])) best = i;
  }
  fit.best = PowerGauge{fit.C_of_q[best], q_grid[best]};
  fit.verdict = "bqs";
  return fit;
}

double koebe_constant(const PowerGauge& eta, double lambda) {
  if (eta.C < 1.0) throw Error(ErrorKind::invalid_argument, "gauge constant below one");
  if (!(lambda >= 1.0)) throw Error(ErrorKind::invalid_argument, "bounded turning constant below one");
  return 1.0 / (7.0 * eta(2.0 * lambda * lambda) * eta(2.0) * lambda);
}

KoebeReport koebe_check(const MetricMap& f, const std::vector<BallSample>& balls, const PowerGauge& eta,
                        double lambda) {
  const auto& X = *f.source;
  const auto& Y = *f.target;
  KoebeReport rep;
  rep.c0 = koebe_constant(eta, lambda);

  std::vector<char> in_image(Y.size(), 0);
  for (PointId y : f.assignment) in_image[y] = 1;
  std::vector<PointId> image;
  for (PointId y = 0; y < Y.size(); ++y) {
    if (in_image[y]) image.push_back(y);
  }
  double mesh = 0.0;
#pragma omp parallel for reduction(max : mesh) schedule(static)
  for (std::int64_t y = 0; y < static_cast<std::int64_t>(Y.size()); ++y) {
    double best = kInf;
    for (PointId i : image) best = std::min(best, Y.dist(static_cast<PointId>(y), i));
    mesh = std::max(mesh, best);
  }
  rep.mesh = mesh;
  const double reach = mesh * (1.0 + 1e-9);

  rep.balls.resize(balls.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const auto& b = balls[i];
    KoebeBall kb{b.x, b.r};
    std::vector<PointId> B;
    X.points_within(b.x, b.r, true, B);
    std::vector<char> hit(Y.size(), 0);
    for (PointId p : B) hit[f.assignment[p]] = 1;
    kb.image_diam = image_diameter(f, B);
    kb.required = rep.c0 * kb.image_diam - 2.0 * Y.resolution();
    PointId fx = f.assignment[b.x];
    // Nearest uncovered target point; everything strictly closer is covered.
    std::vector<std::pair<double, PointId>> order;
    order.reserve(Y.size());
    for (PointId y = 0; y < Y.size(); ++y) order.emplace_back(Y.dist(fx, y), y);
    std::sort(order.begin(), order.end());
    kb.covered = kInf;
    std::vector<PointId> near;
    for (auto [d, y] : order) {
      if (hit[y]) continue;
      near.clear();
      Y.points_within(y, reach, false, near);
      bool ok = std::any_of(near.begin(), near.end(), [&](PointId z) { return hit[z] != 0; });
      if (!ok) {
        kb.covered = d;
        break;
      }
    }
    kb.pass = kb.required <= 0.0 || kb.covered > kb.required;
    rep.balls[i] = kb;
  }
  for (const auto& kb : rep.balls) {
    rep.passed += kb.pass;
    rep.worst_margin = std::min(rep.worst_margin, kb.covered - kb.required);
  }
  return rep;
}

std::vector<PointId> diametric_hull(const FiniteMetricSpace& X, PointId x, double r, double delta) {
  std::vector<PointId> ball;
  X.points_within(x, r, false, ball);
  std::sort(ball.begin(), ball.end());
  std::vector<double> radii(X.size());
  for (PointId p = 0; p < X.size(); ++p) radii[p] = X.dist(x, p);
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  auto first = std::lower_bound(radii.begin(), radii.end(), r);
  auto contains_ball = [&](double R) {
    auto comp = anchored_component(X, x, R, delta);
    return std::includes(comp.begin(), comp.end(), ball.begin(), ball.end());
  };
  // The component only grows with R, so bisect over the sample radii.
  std::size_t lo = static_cast<std::size_t>(first - radii.begin()), hi = radii.size() - 1;
  if (lo > hi) lo = hi;
  if (!contains_ball(radii[hi])) throw Error(ErrorKind::disconnected, "ball is not delta-connected to its centre");
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (contains_ball(radii[mid])) hi = mid;
    else lo = mid + 1;
  }
  return anchored_component(X, x, std::max(r, radii[lo]), delta);
}

double hull_ball_ratio(const MetricMap& f, const std::vector<BallSample>& balls, double delta) {
  double worst = 0.0;
  std::vector<PointId> B;
  for (const auto& b : balls) {
    f.source->points_within(b.x, b.r, false, B);
    double db = image_diameter(f, B);
    if (db == 0.0) continue;
    worst = std::max(worst, image_diameter(f, diametric_hull(*f.source, b.x, b.r, delta)) / db);
  }
  return worst;
}

ComposeReport compose_check(const MetricMap& f, const MetricMap& g, double delta_x, double delta_y,
                            std::size_t count, const std::string& generator, std::uint64_t seed) {
  MetricMap gf = compose(f, g);
  ComposeReport rep;
  rep.f_fit = fit_power_gauge(sample_continuum_pairs(f, delta_x, count, generator, seed));
  rep.g_fit = fit_power_gauge(sample_continuum_pairs(g, delta_y, count, generator, seed));
  auto prof = sample_continuum_pairs(gf, delta_x, count, generator, seed);
  rep.gf_fit = fit_power_gauge(prof);
  if (!rep.f_fit.best || !rep.g_fit.best || !rep.gf_fit.best) return rep;
  for (const auto& s : prof.samples) {
    rep.worst_ratio = std::max(rep.worst_ratio, s.u / (*rep.g_fit.best)((*rep.f_fit.best)(s.t)));
  }
  rep.dominated = rep.worst_ratio <= 1.0 + 1e-9;
  return rep;
}

}  // namespace hyperfill
