#include "hyperfill/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>

#include "hyperfill/io.hpp"

namespace hyperfill {

namespace {

using nlohmann::json;

json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

// Spaces and fillings shared between checks; each is built once.
class Fixtures {
 public:
  SpacePtr space(const SpaceSpec& spec) {
    return get(spaces_, to_json(spec).dump(), [&] { return make_space(spec); });
  }
  SpacePtr space(const std::string& gen, json params) { return space(SpaceSpec{gen, std::move(params), 0}); }

  FillingPtr filling(const SpacePtr& sp, double s, int depth) {
    const std::string key = to_json(sp->spec()).dump() + "|" + format_double(s) + "|" + std::to_string(depth);
    return get(fillings_, key, [&] { return Filling::build(sp, s, depth); });
  }

 private:
  template <class T, class F>
  T get(std::map<std::string, std::shared_future<T>>& cache, const std::string& key, F&& make) {
    std::promise<T> p;
    std::shared_future<T> fut;
    bool owner = false;
    {
      std::lock_guard lock(mutex_);
      auto it = cache.find(key);
      if (it == cache.end()) {
        fut = p.get_future().share();
        cache.emplace(key, fut);
        owner = true;
      } else {
        fut = it->second;
      }
    }
    if (owner) {
      try {
        p.set_value(make());
      } catch (...) {
        p.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

  std::mutex mutex_;
  std::map<std::string, std::shared_future<SpacePtr>> spaces_;
  std::map<std::string, std::shared_future<FillingPtr>> fillings_;
};

struct CheckDef {
  std::string id;
  std::string module;
  int criterion = 0;
  std::string anchor;
  std::function<void(CheckRecord&)> body;
};

void set(CheckRecord& r, bool ok) { r.status = ok ? "pass" : "fail"; }
void evidence(CheckRecord& r, bool found) { r.status = found ? "evidence" : "fail"; }

std::vector<PointId> all_points(const FiniteMetricSpace& X) {
  std::vector<PointId> v(X.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// ---- generic property checks shared by module suites and acceptance ----

// Separation >= s^-n between level-n centers, strict covering by s^-n, single root.
std::size_t net_violations(const Filling& f) {
  const auto& X = f.host();
  std::size_t bad = f.level_vertices(0).size() == 1 ? 0 : 1;
  for (int n = 1; n <= f.depth(); ++n) {
    const double r = f.scale(n);
    const auto verts = f.level_vertices(n);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      for (std::size_t j = i + 1; j < verts.size(); ++j) bad += X.dist(f.center(verts[i]), f.center(verts[j])) < r;
    }
    for (PointId p = 0; p < X.size(); ++p) bad += !(X.dist(p, f.center(f.nearest_center(p, n))) < r);
  }
  return bad;
}

struct PairStats {
  std::uint64_t pairs = 0;
  std::uint64_t displacement = 0;  // d(c_v, c_w) > A_s s^(|v-w| - lmax)
  std::uint64_t comparison = 0;    // |v-w| > 2p + |l(v) - l(w)|
  double worst_displacement_ratio = 0.0;
};

PairStats vertex_pairs(const Filling& f) {
  const auto& X = f.host();
  const double s = f.s();
  const auto& T = f.distances();
  PairStats st;
  const auto n = static_cast<std::int64_t>(f.num_vertices());
  std::uint64_t disp = 0, comp = 0;
  double worst = 0.0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : disp, comp) reduction(max : worst)
  for (std::int64_t v = 0; v < n; ++v) {
    for (std::int64_t w = 0; w < n; ++w) {
      const int hop = T.at(static_cast<VertexId>(v), static_cast<VertexId>(w));
      const int lv = f.level(static_cast<VertexId>(v)), lw = f.level(static_cast<VertexId>(w));
      const double d = X.dist(f.center(static_cast<VertexId>(v)), f.center(static_cast<VertexId>(w)));
      const double bound = f.A_s() * std::pow(s, hop - std::max(lv, lw));
      worst = std::max(worst, d / bound);
      disp += d > bound + 1e-12;
      const int i = std::min(lv, lw);
      int p = 0;
      while (!(d < std::pow(s, p - i))) ++p;
      comp += hop > 2 * p + std::abs(lv - lw);
    }
  }
  st.pairs = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
  st.displacement = disp;
  st.comparison = comp;
  st.worst_displacement_ratio = worst;
  return st;
}

struct GeodesicStats {
  std::uint64_t geodesics = 0;
  std::uint64_t tail = 0;         // balls beyond n0 leaving B(c(gamma(n0)), (A_s + 1) 2 s^-n0)
  std::uint64_t convergence = 0;  // d(z, c(gamma(k))) > A_s s^-k
};

GeodesicStats geodesic_checks(const Filling& f) {
  const auto& X = f.host();
  GeodesicStats st;
  const auto n = static_cast<std::int64_t>(X.size());
  std::uint64_t tail = 0, conv = 0, count = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : tail, conv, count)
  for (std::int64_t zi = 0; zi < n; ++zi) {
    const auto z = static_cast<PointId>(zi);
    for (const auto& geo : {centered_geodesic(f, z), geodesic_fan(f, f.nearest_center(z, 1), z)}) {
      ++count;
      for (int n0 = 0; n0 <= f.depth(); ++n0) {
        const PointId c0 = f.center(geo.path[n0]);
        const double big = (f.A_s() + 1.0) * f.radius(geo.path[n0]);
        for (int k = n0; k <= f.depth(); ++k) {
          for (PointId p : f.ball(geo.path[k])) tail += !(X.dist(p, c0) < big);
        }
        conv += X.dist(z, c0) > f.A_s() * f.scale(n0) + 1e-12;
      }
    }
  }
  st.geodesics = count;
  st.tail = tail;
  st.convergence = conv;
  return st;
}

std::vector<BallSample> balls_at(const FiniteMetricSpace& X, const std::vector<std::array<double, 2>>& pts, double r) {
  std::vector<BallSample> out;
  for (const auto& p : pts) out.push_back({X.nearest_to_raw(p.data()), r});
  return out;
}

double alpha3(const FillingMap& phi) {
  return estimate_vqi(phi, vqi_geodesic_sample(*phi.source, 200, 1)).alpha_at(3);
}

// ---- config-driven module checks ----

struct ConfigFixture {
  SpacePtr X, Y;
  FillingPtr FX, FY;
  MetricMap f;
  double delta = 0.0;
};

ConfigFixture config_fixture(const RunConfig& c, Fixtures& fx) {
  ConfigFixture r;
  r.X = fx.space(c.source);
  r.Y = c.target ? fx.space(*c.target) : r.X;
  r.FX = fx.filling(r.X, c.s, c.depth);
  const int ny = c.target_depth >= 0 ? c.target_depth : std::min(c.depth, max_depth(*r.Y, c.t));
  r.FY = fx.filling(r.Y, c.t, ny);
  r.f = builtin_map(c.map, r.X, r.Y);
  r.delta = c.delta > 0.0 ? c.delta : 2.0 * r.X->resolution();
  return r;
}

void add_module_checks(std::vector<CheckDef>& defs, const RunConfig& c, Fixtures& fx) {
  auto cf = [&c, &fx] { return config_fixture(c, fx); };
  for (const char* side : {"source", "target"}) {
    const bool src = side == std::string("source");
    if (!src && !c.target && c.target_depth < 0 && c.t == c.s) continue;
    auto pick = [cf, src] { auto r = cf(); return src ? r.FX : r.FY; };
    defs.push_back({std::string("filling.net_axioms.") + side, "filling", 0, "greedy nets: separation, covering and a single root",
                    [pick](CheckRecord& r) {
                      auto f = pick();
                      const auto bad = net_violations(*f);
                      r.measured = {{"violations", bad}, {"vertices", f->num_vertices()}, {"depth", f->depth()}};
                      set(r, bad == 0);
                    }});
    defs.push_back({std::string("filling.vertex_comparison.") + side, "filling", 0,
                    "center displacement against hop distance and common-ancestor bound",
                    [pick](CheckRecord& r) {
                      auto f = pick();
                      auto st = vertex_pairs(*f);
                      r.measured = {{"pairs", st.pairs},
                                    {"displacement_violations", st.displacement},
                                    {"comparison_violations", st.comparison},
                                    {"worst_displacement_ratio", st.worst_displacement_ratio}};
                      r.bounds = {{"A_s", f->A_s()}};
                      set(r, st.displacement == 0 && st.comparison == 0);
                    }});
    defs.push_back({std::string("filling.geodesic_tails.") + side, "filling", 0,
                    "vertical geodesics: tail containment and convergence of centers",
                    [pick](CheckRecord& r) {
                      auto f = pick();
                      auto st = geodesic_checks(*f);
                      r.measured = {{"geodesics", st.geodesics}, {"tail_violations", st.tail}, {"convergence_violations", st.convergence}};
                      set(r, st.tail == 0 && st.convergence == 0);
                    }});
    defs.push_back({std::string("filling.hyperbolicity.") + side, "filling", 0, "four-point hyperbolicity constant",
                    [pick, seed = c.seed](CheckRecord& r) {
                      auto f = pick();
                      const bool ex = f->num_vertices() <= 300;
                      auto h = hyperbolicity(*f, ex ? "exhaustive" : "sampled", 300, 200000, seed);
                      r.measured = {{"delta_hat", h.delta_hat}, {"mode", h.mode}, {"triples", h.triples_checked}};
                      r.status = "evidence";
                    }});
    defs.push_back({std::string("filling.shadow_bound.") + side, "filling", 0, "uniformly finite shadows",
                    [pick](CheckRecord& r) {
                      auto f = pick();
                      auto b = shadow_bound(*f, all_points(f->host()));
                      r.measured = {{"m", b.m}, {"per_level", b.per_level}};
                      r.status = "evidence";
                    }});
  }
  defs.push_back({"distortion.gauge", "distortion", 0, "power gauge fitted to continuum pairs",
                  [cf, c](CheckRecord& r) {
                    auto x = cf();
                    auto prof = sample_continuum_pairs(x.f, x.delta, c.samples, "hull_pairs", c.seed);
                    auto fit = fit_power_gauge(prof);
                    r.measured = {{"fit", gauge_json(fit)}, {"samples", prof.samples.size()}, {"degenerate", prof.degenerate_count}};
                    r.bounds = {{"delta", x.delta}};
                    r.status = "evidence";
                  }});
  defs.push_back({"extension.vqi", "extension", 0, "filling map is a vertical quasi-isometry with Lipschitz edges",
                  [cf, c](CheckRecord& r) {
                    auto x = cf();
                    auto phi = fill_map(x.f, x.FX, x.FY);
                    auto rep = estimate_vqi(phi, vqi_geodesic_sample(*x.FX, c.fans, c.seed));
                    const double a = rep.alpha_at(3);
                    auto lip = lipschitz_check(phi, a, 3.0);
                    r.measured = {{"alpha_at_3", num(a)}, {"lipschitz_violations", lip.violations}, {"max_jump", lip.max_jump},
                                  {"collapsed", phi.collapsed.size()}};
                    r.bounds = {{"alpha_cap", kAlphaCap}, {"beta", 3}, {"edge_bound", num(lip.bound)}};
                    set(r, std::isfinite(a) && a <= kAlphaCap && lip.violations == 0);
                  }});
  defs.push_back({"extension.multiplicity", "extension", 0, "finite multiplicity and coboundedness of the filling map",
                  [cf](CheckRecord& r) {
                    auto x = cf();
                    auto phi = fill_map(x.f, x.FX, x.FY);
                    r.measured = {{"multiplicity", multiplicity_json(multiplicity(phi))}, {"cobounded_radius", cobounded_radius(phi)}};
                    r.status = "evidence";
                  }});
  defs.push_back({"trace.round_trip", "trace", 0, "trace of the filling map recovers the map within the residual",
                  [cf, c](CheckRecord& r) {
                    auto x = cf();
                    auto rt = round_trip(x.f, x.FX, x.FY, c.fans, c.seed);
                    r.measured = {{"error", rt.error}, {"residual_max", num(rt.residual_max)}, {"violations", rt.violations},
                                  {"H_hat", rt.H.H_hat}};
                    set(r, rt.violations == 0);
                  }});
  defs.push_back({"trace.degree", "trace", 0, "trace multiplicity against filling multiplicity and shadow size",
                  [cf, c](CheckRecord& r) {
                    auto x = cf();
                    auto phi = fill_map(x.f, x.FX, x.FY);
                    auto rt = round_trip(x.f, x.FX, x.FY, c.fans, c.seed);
                    auto d = degree_check(phi, rt.report, 3, c.fans, c.seed);
                    r.measured = {{"trace_multiplicity", d.trace_multiplicity}, {"N_phi", d.N_phi}, {"m", d.m},
                                  {"alpha", num(d.fit.alpha)}, {"deficiency", covering_deficiency(rt.report, *x.FY)}};
                    r.bounds = {{"bound", num(d.bound)}};
                    set(r, d.holds);
                  }});
}

// ---- acceptance criteria ----

void add_acceptance(std::vector<CheckDef>& defs, Fixtures& fx) {
  auto F = [&fx](const std::string& gen, json params, double s, int depth) {
    return fx.filling(fx.space(gen, std::move(params)), s, depth);
  };

  // 1. Filling axioms, exhaustive.
  for (auto [gen, n] : {std::pair{"interval", 65}, std::pair{"square", 33}}) {
    const std::string g = gen;
    auto pick = [F, g, n] { return F(g, {{"n", n}}, 2.0, 4); };
    defs.push_back({"c1.net_axioms." + g, "filling", 1, "greedy nets: separation, covering and a single root",
                    [pick](CheckRecord& r) {
                      auto f = pick();
                      const auto bad = net_violations(*f);
                      r.measured = {{"violations", bad}, {"level_sizes", f->level_sizes()}};
                      set(r, bad == 0);
                    }});
    defs.push_back({"c1.vertex_comparison." + g, "filling", 1,
                    "center displacement with A_s = 16 and common-ancestor hop bound",
                    [pick](CheckRecord& r) {
                      auto f = pick();
                      auto st = vertex_pairs(*f);
                      r.measured = {{"pairs", st.pairs},
                                    {"displacement_violations", st.displacement},
                                    {"comparison_violations", st.comparison},
                                    {"worst_displacement_ratio", st.worst_displacement_ratio}};
                      r.bounds = {{"A_s", f->A_s()}};
                      set(r, st.displacement == 0 && st.comparison == 0 && f->A_s() == 16.0);
                    }});
    defs.push_back({"c1.gromov_structure." + g, "filling", 1,
                    "s^-(v|w) comparable to the diameter of the union of the two balls",
                    [pick](CheckRecord& r) {
                      auto f = pick();
                      auto cmp = gromov_product_comparison(*f);
                      const double spread = cmp.ratio_max / cmp.ratio_min;
                      const double bound = 4.0 * f->s() * f->s();
                      r.measured = {{"ratio_min", cmp.ratio_min}, {"ratio_max", cmp.ratio_max}, {"pairs", cmp.pairs},
                                    {"exhaustive", cmp.exhaustive}};
                      r.bounds = {{"spread_max", bound}};
                      set(r, cmp.exhaustive && cmp.ratio_min > 0.0 && spread <= bound);
                    }});
    defs.push_back({"c1.geodesic_tails." + g, "filling", 1, "vertical geodesics: tail containment and convergence of centers",
                    [pick](CheckRecord& r) {
                      auto f = pick();
                      auto st = geodesic_checks(*f);
                      r.measured = {{"geodesics", st.geodesics}, {"tail_violations", st.tail}, {"convergence_violations", st.convergence}};
                      set(r, st.tail == 0 && st.convergence == 0);
                    }});
  }

  // 2. Hyperbolicity.
  defs.push_back({"c2.hyperbolicity.interval", "filling", 2, "four-point constant stable in depth",
                  [F](CheckRecord& r) {
                    std::vector<double> d;
                    for (int N : {3, 4, 5}) d.push_back(hyperbolicity(*F("interval", {{"n", 65}}, 2.0, N), "exhaustive").delta_hat);
                    const double spread = *std::max_element(d.begin(), d.end()) - *std::min_element(d.begin(), d.end());
                    r.measured = {{"delta_hat", d}, {"depths", {3, 4, 5}}};
                    r.bounds = {{"spread_max", 1.0}};
                    set(r, spread <= 1.0);
                  }});
  defs.push_back({"c2.hyperbolicity.tree", "filling", 2, "four-point constant of a tree-like filling",
                  [F](CheckRecord& r) {
                    const double d = hyperbolicity(*F("cantor", {{"k", 4}, {"base", 10}}, 9.5, 4), "exhaustive").delta_hat;
                    r.measured = {{"delta_hat", d}};
                    r.bounds = {{"delta_max", 1.0}};
                    set(r, d <= 1.0);
                  }});

  // 3. Shadow stability.
  for (auto [gen, n] : {std::pair{"interval", 129}, std::pair{"square", 65}}) {
    const std::string g = gen;
    defs.push_back({"c3.shadow." + g, "filling", 3, "shadow cardinality independent of depth",
                    [F, g, n](CheckRecord& r) {
                      auto a = F(g, {{"n", n}}, 2.0, 4), b = F(g, {{"n", n}}, 2.0, 6);
                      auto pts = all_points(a->host());
                      auto ma = shadow_bound(*a, pts), mb = shadow_bound(*b, pts);
                      r.measured = {{"m_depth4", ma.m}, {"m_depth6", mb.m}, {"per_level_depth6", mb.per_level}};
                      set(r, ma.m == mb.m);
                    }});
  }

  // 4. Geodesic separation.
  defs.push_back({"c4.separation.interval", "filling", 4, "separated vertical geodesics split within the bound",
                  [F](CheckRecord& r) {
                    auto f = F("interval", {{"n", 257}}, 2.0, 7);
                    const auto& X = f->host();
                    std::vector<PointId> half(129);
                    std::iota(half.begin(), half.end(), 0);
                    DeltaContinuum E{half, 2 * X.resolution(), X.diameter(half)};
                    json rows = json::array();
                    bool ok = true;
                    for (int J : {2, 3}) {
                      auto s = separated_geodesics(*f, E, J);
                      rows.push_back({{"J", J}, {"k0", s.k0}, {"bound", s.k0_bound}});
                      ok = ok && s.k0 <= s.k0_bound;
                    }
                    r.measured = {{"continua", rows}};
                    set(r, ok);
                  }});
  defs.push_back({"c4.separation.square", "filling", 4, "separated vertical geodesics split within the bound",
                  [F](CheckRecord& r) {
                    auto f = F("square", {{"n", 65}}, 2.0, 6);
                    const auto& X = f->host();
                    int worst_gap = std::numeric_limits<int>::max();
                    std::size_t tested = 0;
                    bool ok = true;
                    for (VertexId b : f->level_vertices(1)) {
                      std::vector<PointId> ball(f->ball(b).begin(), f->ball(b).end());
                      DeltaContinuum E{ball, 2 * X.resolution(), f->ball_diameter(b)};
                      for (int J : {2, 3}) {
                        auto s = separated_geodesics(*f, E, J);
                        ++tested;
                        worst_gap = std::min(worst_gap, s.k0_bound - s.k0);
                        ok = ok && s.k0 <= s.k0_bound;
                      }
                    }
                    r.measured = {{"continua", tested}, {"min_slack", worst_gap}};
                    set(r, ok);
                  }});

  // 5. Exponent recovery.
  defs.push_back({"c5.snowflake_exponent", "distortion", 5, "power exponent recovered from gauge and level displacement",
                  [F, &fx](CheckRecord& r) {
                    auto I = fx.space("interval", {{"n", 129}});
                    auto S = fx.space("snowflake", {{"n", 129}, {"epsilon", 0.5}});
                    auto fit = fit_power_gauge(sample_continuum_pairs(builtin_map("snowflake_identity", I, S),
                                                                      2 * I->resolution(), 0, "chain_pairs", 1));
                    auto I2 = fx.space("interval", {{"n", 257}});
                    auto S2 = fx.space("snowflake", {{"n", 257}, {"epsilon", 0.5}});
                    auto phi = fill_map(builtin_map("snowflake_identity", I2, S2), fx.filling(I2, 2.0, 6),
                                        fx.filling(S2, 2.0, max_depth(*S2, 2.0)));
                    auto ld = level_displacement(phi);
                    const double q = fit.best ? fit.best->q : 0.0;
                    r.measured = {{"q", q}, {"C", fit.best ? num(fit.best->C) : json(nullptr)}, {"slope", ld.slope},
                                  {"intercept", ld.intercept}};
                    r.bounds = {{"range", {0.4, 0.6}}};
                    set(r, fit.best && q >= 0.4 && q <= 0.6 && !ld.degenerate && ld.slope >= 0.4 && ld.slope <= 0.6);
                  }});

  // 6. VQI of fillings of BQS maps.
  struct Six {
    std::string name, src, tgt, map;
    json sp, tp;
  };
  const std::vector<Six> six = {
      {"identity", "interval", "interval", "identity", {{"n", 65}}, {{"n", 65}}},
      {"snowflake", "interval", "snowflake", "snowflake_identity", {{"n", 257}}, {{"n", 257}, {"epsilon", 0.5}}},
      {"winding", "disk", "disk", "winding", {{"n", 129}}, {{"n", 129}}},
      {"folding", "strip", "strip", "folding", {{"n", 65}}, {{"n", 65}}},
  };
  for (const auto& c : six) {
    defs.push_back({"c6.vqi." + c.name, "extension", 6, "alpha_min at beta = 3 finite and depth-stable within 20%",
                    [c, &fx](CheckRecord& r) {
                      auto X = fx.space(c.src, c.sp), Y = fx.space(c.tgt, c.tp);
                      std::vector<double> a;
                      std::vector<std::size_t> m;
                      for (int N : {4, 5}) {
                        auto phi = fill_map(builtin_map(c.map, X, Y), fx.filling(X, 2.0, N),
                                            fx.filling(Y, 2.0, std::min(N, max_depth(*Y, 2.0))));
                        a.push_back(alpha3(phi));
                        m.push_back(multiplicity(phi).N_phi);
                      }
                      const bool finite = std::isfinite(a[0]) && std::isfinite(a[1]);
                      const bool alpha_ok = finite && std::abs(a[1] - a[0]) <= 0.2 * a[0];
                      const double dm = std::abs(static_cast<double>(m[1]) - static_cast<double>(m[0]));
                      const bool mult_ok = c.name == "folding" || dm <= 0.2 * static_cast<double>(m[0]) + 1.0;
                      r.measured = {{"alpha_at_3", {num(a[0]), num(a[1])}}, {"N_phi", m}, {"depths", {4, 5}}};
                      r.bounds = {{"relative_window", 0.2}};
                      set(r, alpha_ok && mult_ok);
                    }});
  }

  // 7. Counterexamples.
  defs.push_back({"c7.projection.not_bqs", "counterexamples", 7, "projection is not a branched quasisymmetry",
                  [&fx](CheckRecord& r) {
                    auto X = fx.space("square", {{"n", 9}}), Y = fx.space("interval", {{"n", 9}});
                    auto prof = sample_continuum_pairs(builtin_map("projection", X, Y), 2 * X->resolution(), 0, "chain_pairs", 1);
                    auto fit = fit_power_gauge(prof);
                    r.measured = {{"verdict", fit.verdict}, {"degenerate_pairs", prof.degenerate_count}};
                    evidence(r, fit.verdict == "not-bqs-evidence");
                  }});
  defs.push_back({"c7.projection.fiber_growth", "counterexamples", 7, "projection filling map has unbounded multiplicity",
                  [&fx](CheckRecord& r) {
                    auto X = fx.space("square", {{"n", 65}}), Y = fx.space("interval", {{"n", 65}});
                    auto phi = fill_map(builtin_map("projection", X, Y), fx.filling(X, 2.0, 6), fx.filling(Y, 2.0, 5));
                    auto m = multiplicity(phi);
                    double worst = std::numeric_limits<double>::infinity();
                    for (int l = 2; l < 5; ++l) {
                      worst = std::min(worst, static_cast<double>(m.per_level[l + 1]) / static_cast<double>(m.per_level[l]));
                    }
                    r.measured = {{"per_level", m.per_level}, {"min_growth", worst}};
                    r.bounds = {{"growth_min", 1.5}, {"levels", {2, 5}}};
                    evidence(r, worst >= 1.5);
                  }});
  defs.push_back({"c7.folding.openness", "counterexamples", 7, "folding trace is not open at the fold",
                  [&fx](CheckRecord& r) {
                    auto X = fx.space("strip", {{"n", 65}});
                    auto f = builtin_map("folding", X, X);
                    std::vector<double> ratio;
                    for (int N : {3, 4, 5}) {
                      auto F = fx.filling(X, 2.0, N);
                      auto rt = round_trip(f, F, F);
                      ratio.push_back(openness_probe(rt.report, balls_at(*X, {{0.0, 0.5}}, 0.25)).min_ratio);
                    }
                    const double drop = ratio.back() > 0.0 ? ratio.front() / ratio.back() : std::numeric_limits<double>::infinity();
                    r.measured = {{"ratio", ratio}, {"depths", {3, 4, 5}}, {"drop", num(drop)}};
                    r.bounds = {{"drop_min", 2.0}};
                    evidence(r, drop >= 2.0);
                  }});
  defs.push_back({"c7.accordion.multiplicity", "counterexamples", 7, "accordion trace is not discrete",
                  [&fx](CheckRecord& r) {
                    std::vector<std::size_t> m;
                    for (int n : {9, 17, 33}) {
                      auto X = fx.space("strip", {{"n", n}, {"x0", 0.0}, {"x1", 3.0}});
                      auto Y = fx.space("square", {{"n", n}});
                      auto rt = round_trip(builtin_map("accordion", X, Y), fx.filling(X, 2.0, max_depth(*X, 2.0)),
                                           fx.filling(Y, 2.0, max_depth(*Y, 2.0)));
                      m.push_back(trace_multiplicity(rt.report).value);
                    }
                    r.measured = {{"trace_multiplicity", m}, {"n", {9, 17, 33}}};
                    evidence(r, m[0] < m[1] && m[1] < m[2]);
                  }});

  // 8. Round trip.
  for (const auto& c : six) {
    defs.push_back({"c8.round_trip." + c.name, "trace", 8, "trace recovers the map within the residual",
                    [c, &fx](CheckRecord& r) {
                      auto X = fx.space(c.src, c.sp), Y = fx.space(c.tgt, c.tp);
                      auto rt = round_trip(builtin_map(c.map, X, Y), fx.filling(X, 2.0, 5),
                                           fx.filling(Y, 2.0, std::min(5, max_depth(*Y, 2.0))));
                      const double cap = 64.0 * std::pow(2.0, -5);
                      r.measured = {{"error", rt.error}, {"residual_max", num(rt.residual_max)}, {"violations", rt.violations},
                                    {"H_hat", rt.H.H_hat}};
                      r.bounds = {{"residual_cap", cap}};
                      set(r, rt.violations == 0 && rt.error <= rt.residual_max && rt.residual_max <= cap);
                    }});
  }

  // 9. Koebe.
  defs.push_back({"c9.koebe.winding", "distortion", 9, "images of balls contain balls of comparable size",
                  [&fx](CheckRecord& r) {
                    auto D = fx.space("disk", {{"n", 65}});
                    auto f = builtin_map("winding", D, D);
                    auto fit = fit_power_gauge(sample_continuum_pairs(f, 2 * D->resolution(), 300, "hull_pairs", 1));
                    const double lambda = estimate_bounded_turning(*D, 2 * D->resolution(), 4000, 1).lambda_hat;
                    std::vector<BallSample> balls;
                    const double radii[] = {0.125, 0.1875, 0.25};
                    std::size_t k = 0;
                    for (PointId p = 0; p < D->size(); p += 53) {
                      auto z = D->raw(p);
                      if (std::hypot(z[0], z[1]) > 0.4) balls.push_back({p, radii[k++ % 3]});
                    }
                    if (!fit.best) {
                      r.measured = {{"fit", gauge_json(fit)}};
                      set(r, false);
                      return;
                    }
                    auto rep = koebe_check(f, balls, *fit.best, lambda);
                    r.measured = {{"balls", rep.balls.size()}, {"passed", rep.passed}, {"pass_fraction", rep.pass_fraction()},
                                  {"c0", rep.c0}, {"C", fit.best->C}, {"q", fit.best->q}, {"lambda", lambda}};
                    r.bounds = {{"pass_fraction_min", 0.95}};
                    set(r, rep.pass_fraction() >= 0.95);
                  }});

  // 10. Surjectivity and coboundedness.
  auto series = [&fx](const std::string& sg, json sp, const std::string& tg, json tp, const std::string& map,
                      std::vector<std::pair<int, int>> depths) {
    auto X = fx.space(sg, std::move(sp)), Y = fx.space(tg, std::move(tp));
    std::vector<DepthRun> runs;
    for (auto [nx, ny] : depths) {
      auto f = builtin_map(map, X, Y);
      auto FX = fx.filling(X, 2.0, nx), FY = fx.filling(Y, 2.0, ny);
      auto rt = round_trip(f, FX, FY);
      runs.push_back({fill_map(f, FX, FY), rt.report});
    }
    return surjectivity_vs_coboundedness(runs);
  };
  auto surj_json = [](const SurjectivityReport& s) {
    json d = json::array();
    for (double x : s.deficiency) d.push_back(x);
    return json{{"verdict", s.verdict}, {"radii", s.radii}, {"deficiency", d}, {"scale", s.scale}, {"depths", s.depths}};
  };
  for (auto [name, gen, n, map] : {std::tuple{"identity", "interval", 129, "identity"}, std::tuple{"winding", "disk", 129, "winding"}}) {
    const std::string nm = name, g = gen, m = map;
    const int nn = n;
    defs.push_back({"c10.surjective." + nm, "trace", 10, "cobounded filling map has a surjective trace",
                    [series, surj_json, g, nn, m](CheckRecord& r) {
                      auto s = series(g, {{"n", nn}}, g, {{"n", nn}}, m, {{3, 3}, {4, 4}, {5, 5}});
                      r.measured = surj_json(s);
                      set(r, s.verdict == "consistent-surjective");
                    }});
  }
  defs.push_back({"c10.non_surjective.sub_interval", "trace", 10, "non-cobounded filling map has a non-surjective trace",
                  [series, surj_json, &fx](CheckRecord& r) {
                    auto sub = fx.space("interval", {{"n", 33}, {"lo", 0.0}, {"hi", 0.25}});
                    const int cap = max_depth(*sub, 2.0);
                    auto s = series("interval", {{"n", 33}, {"lo", 0.0}, {"hi", 0.25}}, "interval", {{"n", 129}}, "inclusion",
                                    {{std::min(3, cap), 3}, {std::min(4, cap), 4}, {std::min(5, cap), 5}});
                    const bool strict = s.radii[0] < s.radii[1] && s.radii[1] < s.radii[2];
                    r.measured = surj_json(s);
                    r.measured["radius_strictly_increasing"] = strict;
                    set(r, s.verdict == "consistent-non-surjective" && strict);
                  }});

  // 11. Mazurkiewicz distance.
  defs.push_back({"c11.mazurkiewicz.interval", "filling", 11, "intrinsic diameter distance equals the metric on a segment",
                  [&fx](CheckRecord& r) {
                    auto I = fx.space("interval", {{"n", 33}});
                    const double delta = 2 * I->resolution();
                    std::size_t bad = 0;
                    for (PointId x = 0; x < I->size(); ++x) {
                      for (PointId y = 0; y < I->size(); ++y) bad += mazurkiewicz_dist(*I, x, y, delta) != I->dist(x, y);
                    }
                    r.measured = {{"pairs", I->size() * I->size()}, {"mismatches", bad}};
                    set(r, bad == 0);
                  }});
  defs.push_back({"c11.mazurkiewicz.parabola", "filling", 11, "intrinsic diameter distance blows up near a cusp",
                  [&fx](CheckRecord& r) {
                    auto P = fx.space("parabola_union", {{"n", 20001}});
                    const double delta = 2 * P->resolution();
                    json rows = json::array();
                    bool ok = true;
                    for (double t : {0.05, 0.04, 0.03}) {
                      std::array<double, 2> a{t, 0.0}, b{t, t * t};
                      const PointId x = P->nearest_to_raw(a.data()), y = P->nearest_to_raw(b.data());
                      const double ratio = mazurkiewicz_dist(*P, x, y, delta) / P->dist(x, y);
                      rows.push_back({{"t", t}, {"ratio", ratio}});
                      ok = ok && ratio > 10.0;
                    }
                    r.measured = {{"pairs", rows}};
                    r.bounds = {{"ratio_min", 10.0}};
                    set(r, ok);
                  }});
}

bool module_suite(const std::string& s) {
  return s == "filling" || s == "distortion" || s == "extension" || s == "trace";
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"all", "filling", "distortion", "extension", "trace", "counterexamples", "acceptance", "none"};
}

RunConfig config_from_json(const json& j) {
  auto fail = [](const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::invalid_argument, "config." + path + ": " + msg);
  };
  if (!j.is_object()) fail("", "must be an object");
  static const std::set<std::string> known = {"source", "target", "map", "s", "t", "depth", "target_depth", "delta",
                                              "seed", "samples", "fans", "suite", "skip", "out"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) fail(k, "unknown field");
  }
  RunConfig c;
  auto field = [&](const char* k, auto& dst) {
    if (!j.contains(k)) return;
    try {
      dst = j.at(k).get<std::decay_t<decltype(dst)>>();
    } catch (const json::exception&) {
      fail(k, "wrong type");
    }
  };
  auto space = [&](const char* k) {
    try {
      return parse_space_spec(j.at(k));
    } catch (const Error& e) {
      fail(k, e.what());
    }
    return SpaceSpec{};
  };
  if (j.contains("source")) c.source = space("source");
  if (j.contains("target")) c.target = space("target");
  field("map", c.map);
  field("s", c.s);
  field("t", c.t);
  field("depth", c.depth);
  field("target_depth", c.target_depth);
  field("delta", c.delta);
  field("seed", c.seed);
  field("samples", c.samples);
  field("fans", c.fans);
  field("suite", c.suite);
  field("skip", c.skip);
  field("out", c.out);
  return c;
}

json config_json(const RunConfig& c) {
  json j{{"source", to_json(c.source)}, {"map", c.map},     {"s", c.s},         {"t", c.t},
         {"depth", c.depth},           {"target_depth", c.target_depth},     {"delta", c.delta},
         {"seed", c.seed},             {"samples", c.samples}, {"fans", c.fans}, {"suite", c.suite},
         {"skip", c.skip}};
  if (c.target) j["target"] = to_json(*c.target);
  return j;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::invalid_argument, "config." + path + ": " + msg);
  };
  if (!(c.s > 1.0)) fail("s", "must exceed 1");
  if (!(c.t > 1.0)) fail("t", "must exceed 1");
  if (c.depth < 1) fail("depth", "must be at least 1");
  if (c.delta < 0.0) fail("delta", "must be non-negative");
  auto suites = suite_names();
  if (std::find(suites.begin(), suites.end(), c.suite) == suites.end()) fail("suite", "unknown suite '" + c.suite + "'");
  auto maps = builtin_map_names();
  if (std::find(maps.begin(), maps.end(), c.map) == maps.end()) fail("map", "unknown map '" + c.map + "'");
  if (c.samples == 0) fail("samples", "must be positive");
  SpacePtr X, Y;
  try {
    X = make_space(c.source);
  } catch (const Error& e) {
    fail("source", e.what());
  }
  try {
    Y = c.target ? make_space(*c.target) : X;
  } catch (const Error& e) {
    fail("target", e.what());
  }
  if (c.depth > max_depth(*X, c.s)) {
    fail("depth", "s^-N below twice the source resolution (max " + std::to_string(max_depth(*X, c.s)) + ")");
  }
  if (c.target_depth > max_depth(*Y, c.t)) {
    fail("target_depth", "t^-N below twice the target resolution (max " + std::to_string(max_depth(*Y, c.t)) + ")");
  }
  if (c.delta > 0.0 && c.delta < 2.0 * X->resolution()) fail("delta", "below twice the source resolution");
  try {
    builtin_map(c.map, X, Y);
  } catch (const Error& e) {
    fail("map", e.what());
  }
}

void apply_env_overrides(RunConfig& c) {
  const char* env = std::getenv("HYPERFILL_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw Error(ErrorKind::invalid_argument, "HYPERFILL_SEED: not an unsigned integer");
  c.seed = v;
}

bool VerifyReport::failed() const {
  return std::any_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.status == "fail"; });
}

std::string VerifyReport::verdict() const { return failed() ? "fail" : "pass"; }

json VerifyReport::to_json() const {
  json arr = json::array();
  std::map<std::string, std::size_t> tally{{"pass", 0}, {"fail", 0}, {"evidence", 0}};
  for (const auto& c : checks) {
    ++tally[c.status];
    json j{{"id", c.id}, {"module", c.module}, {"anchor", c.anchor}, {"status", c.status},
           {"measured", c.measured}, {"bounds", c.bounds}};
    if (c.criterion) j["criterion"] = c.criterion;
    arr.push_back(std::move(j));
  }
  return {{"schema", kSchemaVersion}, {"suite", suite}, {"seed", seed}, {"checks", arr},
          {"summary", tally},         {"verdict", verdict()}};
}

std::string VerifyReport::dump() const { return to_json().dump(2) + "\n"; }

VerifyReport run(const RunConfig& c) {
  validate(c);
  VerifyReport rep;
  rep.suite = c.suite;
  rep.seed = c.seed;
  if (c.suite == "none") return rep;

  Fixtures fx;
  std::vector<CheckDef> defs;
  if (c.suite == "all" || module_suite(c.suite)) add_module_checks(defs, c, fx);
  if (c.suite == "all" || c.suite == "acceptance" || c.suite == "counterexamples") add_acceptance(defs, fx);
  std::erase_if(defs, [&](const CheckDef& d) {
    if (module_suite(c.suite) && (d.criterion != 0 || d.module != c.suite)) return true;
    if (c.suite == "counterexamples" && d.module != "counterexamples") return true;
    return std::any_of(c.skip.begin(), c.skip.end(), [&](const std::string& p) { return d.id.rfind(p, 0) == 0; });
  });

  rep.checks.resize(defs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(defs.size()); ++i) {
    const auto& d = defs[i];
    CheckRecord r{d.id, d.module, d.criterion, d.anchor, "fail"};
    try {
      d.body(r);
    } catch (const std::exception& e) {
      r.status = "fail";
      r.measured["error"] = e.what();
    }
    rep.checks[i] = std::move(r);
  }
  return rep;
}

std::vector<CriterionResult> criteria(const VerifyReport& r) {
  std::vector<CriterionResult> out;
  for (int k = 1; k <= 11; ++k) {
    CriterionResult cr{k, true, {}};
    for (const auto& c : r.checks) {
      if (c.criterion != k) continue;
      cr.checks.push_back(&c);
      cr.pass = cr.pass && c.status != "fail";
    }
    if (cr.checks.empty()) cr.pass = false;
    out.push_back(std::move(cr));
  }
  return out;
}

}  // namespace hyperfill
