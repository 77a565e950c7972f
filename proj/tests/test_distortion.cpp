#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "hyperfill/distortion.hpp"

using namespace hyperfill;

namespace {

std::vector<BallSample> interior_balls(const FiniteMetricSpace& s, double r, std::size_t stride,
                                       double min_raw_norm = -1.0) {
  std::vector<BallSample> out;
  for (PointId p = 0; p < s.size(); p += static_cast<PointId>(stride)) {
    auto z = s.raw(p);
    double norm = s.dim() == 2 ? std::hypot(z[0], z[1]) : std::abs(z[0]);
    if (norm > min_raw_norm) out.push_back({p, r});
  }
  return out;
}

void expect_envelope(const DistortionProfile& prof, const GaugeFit& fit) {
  for (std::size_t i = 0; i < fit.q_grid.size(); ++i) {
    double q = fit.q_grid[i];
    for (const auto& s : prof.samples) {
      ASSERT_LE(s.u, fit.C_of_q[i] * std::max(std::pow(s.t, q), std::pow(s.t, 1.0 / q)) * (1 + 1e-12));
    }
  }
}

}  // namespace

TEST(BuiltinMaps, FoldingFormula) {
  EXPECT_DOUBLE_EQ(folding_h(-1.0), -1.0);
  EXPECT_DOUBLE_EQ(folding_h(-0.5), 0.5);
  EXPECT_DOUBLE_EQ(folding_h(0.0), 0.0);
  EXPECT_DOUBLE_EQ(folding_h(1.0), 1.0);
  EXPECT_DOUBLE_EQ(folding_h(-0.25), 0.25);
}

TEST(BuiltinMaps, AccordionFormula) {
  EXPECT_DOUBLE_EQ(accordion_g(0.0), 1.0);
  EXPECT_DOUBLE_EQ(accordion_g(1.0), 0.0);
  EXPECT_DOUBLE_EQ(accordion_g(1.5), 0.5);
  EXPECT_DOUBLE_EQ(accordion_g(2.0), 0.0);
  EXPECT_DOUBLE_EQ(accordion_g(2.25), 0.25);
  EXPECT_DOUBLE_EQ(accordion_g(2.5), 0.0);
  EXPECT_DOUBLE_EQ(accordion_g(2.625), 0.125);
  EXPECT_DOUBLE_EQ(accordion_g(3.0), 0.0);
  // 1-Lipschitz everywhere.
  for (double x = 0.0; x < 3.0; x += 0.001) EXPECT_LE(std::abs(accordion_g(x + 0.001) - accordion_g(x)), 0.001 + 1e-12);
}

TEST(BuiltinMaps, IdentityIsPermutationIdentity) {
  auto sp = make_space("interval", {{"n", 33}});
  auto m = builtin_map("identity", sp, sp);
  std::vector<PointId> id(sp->size());
  std::iota(id.begin(), id.end(), PointId{0});
  EXPECT_EQ(m.assignment, id);
  auto other = make_space("interval", {{"n", 33}});
  EXPECT_EQ(builtin_map("identity", sp, other).assignment, id);
}

TEST(BuiltinMaps, WindingDoublesAngle) {
  auto disk = make_space("disk", {{"n", 65}});
  auto m = builtin_map("winding", disk, disk);
  // Raw displacement bound: one target covering radius, converted to raw units.
  double raw_rho = 2.0 * disk->resolution();
  for (PointId p = 0; p < disk->size(); ++p) {
    auto z = disk->raw(p);
    double r = std::hypot(z[0], z[1]), th = std::atan2(z[1], z[0]);
    auto w = disk->raw(m.assignment[p]);
    EXPECT_LE(std::hypot(w[0] - r * std::cos(2 * th), w[1] - r * std::sin(2 * th)), raw_rho + 1e-12);
  }
}

TEST(BuiltinMaps, FoldingSnapsOntoGrid) {
  auto strip = make_space("strip", {{"n", 17}});
  auto m = builtin_map("folding", strip, strip);
  for (PointId p = 0; p < strip->size(); ++p) {
    auto z = strip->raw(p);
    auto w = strip->raw(m.assignment[p]);
    EXPECT_NEAR(w[0], folding_h(z[0]), 1.0 / 16 + 1e-12);
    EXPECT_DOUBLE_EQ(w[1], z[1]);
  }
}

TEST(BuiltinMaps, IncompatibleSpacesRejected) {
  auto sq = make_space("square", {{"n", 9}});
  auto iv = make_space("interval", {{"n", 9}});
  auto strip = make_space("strip", {{"n", 9}});
  auto check = [](auto&& fn) {
    try {
      fn();
      ADD_FAILURE() << "no throw";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::incompatible);
    }
  };
  check([&] { builtin_map("folding", sq, sq); });
  check([&] { builtin_map("winding", iv, iv); });
  check([&] { builtin_map("accordion", strip, sq); });  // strip spans [-1, 1]
  check([&] { builtin_map("projection", iv, iv); });
  check([&] { compose(builtin_map("identity", sq, sq), builtin_map("identity", iv, iv)); });
  EXPECT_THROW(builtin_map("nope", sq, sq), Error);
}

TEST(Profiles, IdentityGivesUEqualsT) {
  auto sq = make_space("square", {{"n", 17}});
  auto m = builtin_map("identity", sq, sq);
  double delta = 2 * sq->resolution();
  for (const char* g : {"hull_pairs", "chain_pairs", "ball_pairs"}) {
    auto prof = sample_continuum_pairs(m, delta, 200, g, 7);
    EXPECT_EQ(prof.samples.size(), 400u) << g;
    for (const auto& s : prof.samples) EXPECT_EQ(s.u, s.t) << g;
    auto fit = fit_power_gauge(prof);
    ASSERT_TRUE(fit.best);
    EXPECT_EQ(fit.best->C, 1.0);
    EXPECT_EQ(fit.best->q, 1.0);
    EXPECT_EQ(fit.C_of_q.back(), 1.0);
  }
}

TEST(Profiles, ClosedUnderSwap) {
  auto disk = make_space("disk", {{"n", 33}});
  auto m = builtin_map("winding", disk, disk);
  auto prof = sample_continuum_pairs(m, 2 * disk->resolution(), 100, "hull_pairs", 3);
  ASSERT_EQ(prof.samples.size() % 2, 0u);
  for (std::size_t i = 0; i < prof.samples.size(); i += 2) {
    const auto &a = prof.samples[i], &b = prof.samples[i + 1];
    EXPECT_DOUBLE_EQ(a.t * b.t, 1.0);
    if (std::isfinite(a.u) && std::isfinite(b.u)) EXPECT_DOUBLE_EQ(a.u * b.u, 1.0);
  }
  expect_envelope(prof, fit_power_gauge(prof));
}

TEST(Profiles, DeterministicInSeed) {
  auto sq = make_space("square", {{"n", 17}});
  auto m = builtin_map("identity", sq, sq);
  auto a = sample_continuum_pairs(m, 2 * sq->resolution(), 50, "chain_pairs", 11);
  auto b = sample_continuum_pairs(m, 2 * sq->resolution(), 50, "chain_pairs", 11);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i].t, b.samples[i].t);
}

TEST(Profiles, RejectsBadArguments) {
  auto sq = make_space("square", {{"n", 9}});
  auto m = builtin_map("identity", sq, sq);
  EXPECT_THROW(sample_continuum_pairs(m, 0.5 * sq->resolution(), 10, "hull_pairs", 1), Error);
  EXPECT_THROW(sample_continuum_pairs(m, 2 * sq->resolution(), 10, "zigzag", 1), Error);
  EXPECT_THROW(sample_continuum_pairs(m, 2 * sq->resolution(), 0, "hull_pairs", 1), Error);
  EXPECT_THROW(fit_power_gauge(DistortionProfile{}), Error);
}

TEST(PowerGaugeFit, SnowflakeExponentRecovered) {
  auto iv = make_space("interval", {{"n", 128}});
  auto sf = make_space("snowflake", {{"n", 128}, {"epsilon", 0.5}});
  auto m = builtin_map("snowflake_identity", iv, sf);
  auto prof = sample_continuum_pairs(m, 2 * iv->resolution(), 0, "chain_pairs", 0);
  // Nested or abutting segments from a shared endpoint: u = t^(1/2).
  for (std::size_t i = 0; i < prof.samples.size(); i += 997) {
    EXPECT_NEAR(prof.samples[i].u, std::sqrt(prof.samples[i].t), 1e-12 * prof.samples[i].u);
  }
  auto fit = fit_power_gauge(prof);
  ASSERT_TRUE(fit.best);
  EXPECT_GE(fit.best->q, 0.4);
  EXPECT_LE(fit.best->q, 0.6);
  EXPECT_LE(fit.best->C, 2.0);
  EXPECT_NEAR(fit.best->q, 0.5, 1e-12);
  expect_envelope(prof, fit);
}

TEST(PowerGaugeFit, ProjectionIsNotBqs) {
  auto sq = make_space("square", {{"n", 9}});
  auto iv = make_space("interval", {{"n", 9}});
  auto m = builtin_map("projection", sq, iv);
  auto prof = sample_continuum_pairs(m, 2 * sq->resolution(), 0, "chain_pairs", 0);
  EXPECT_GT(prof.degenerate_count, 0u);
  auto fit = fit_power_gauge(prof);
  EXPECT_EQ(fit.verdict, "not-bqs-evidence");
  EXPECT_FALSE(fit.best);
}

TEST(PowerGaugeFit, EtaAtOneIsAtLeastOne) {
  auto disk = make_space("disk", {{"n", 33}});
  auto m = builtin_map("winding", disk, disk);
  auto fit = fit_power_gauge(sample_continuum_pairs(m, 2 * disk->resolution(), 150, "ball_pairs", 5));
  for (double c : fit.C_of_q) EXPECT_GE(c, 1.0);
  if (fit.best) EXPECT_GE((*fit.best)(1.0), 1.0);
}

TEST(Koebe, ConstantArithmetic) {
  EXPECT_DOUBLE_EQ(koebe_constant(PowerGauge{2.0, 1.0}, 1.0), 1.0 / 112.0);
  // eta(t) = max(t^(1/2), t^2), lambda = 2: eta(8) = 64, eta(2) = 4.
  EXPECT_DOUBLE_EQ(koebe_constant(PowerGauge{1.0, 0.5}, 2.0), 1.0 / (7.0 * 64 * 4 * 2));
  EXPECT_THROW(koebe_constant(PowerGauge{0.5, 1.0}, 1.0), Error);
}

TEST(Koebe, IdentityPassesWithMargin) {
  auto sq = make_space("square", {{"n", 33}});
  auto m = builtin_map("identity", sq, sq);
  auto balls = interior_balls(*sq, 0.2, 37);
  auto rep = koebe_check(m, balls, PowerGauge{2.0, 1.0}, 1.0);
  EXPECT_EQ(rep.mesh, 0.0);
  EXPECT_EQ(rep.passed, balls.size());
  for (const auto& b : rep.balls) {
    // fB = B, so the covered radius is at least the nearest point outside B.
    EXPECT_GE(b.covered, 0.2 - 1e-12);
    EXPECT_GE(b.covered - b.required, 0.2 - rep.c0 * b.image_diam - 1e-12);
  }
}

TEST(Koebe, WindingPassesAwayFromOrigin) {
  auto disk = make_space("disk", {{"n", 65}});
  auto m = builtin_map("winding", disk, disk);
  auto fit = fit_power_gauge(sample_continuum_pairs(m, 2 * disk->resolution(), 300, "hull_pairs", 1));
  ASSERT_TRUE(fit.best);
  double lambda = estimate_bounded_turning(*disk, 2 * disk->resolution(), 4000, 1).lambda_hat;
  auto rep = koebe_check(m, interior_balls(*disk, 0.15, 53, 0.4), *fit.best, lambda);
  ASSERT_FALSE(rep.balls.empty());
  EXPECT_EQ(rep.passed, rep.balls.size());
  EXPECT_GT(rep.worst_margin, 0.0);
}

TEST(Compose, IdentityTriviallyDominated) {
  auto sq = make_space("square", {{"n", 17}});
  auto id = builtin_map("identity", sq, sq);
  double d = 2 * sq->resolution();
  auto rep = compose_check(id, id, d, d, 100, "hull_pairs", 2);
  EXPECT_TRUE(rep.dominated);
  EXPECT_NEAR(rep.worst_ratio, 1.0, 1e-12);
}

TEST(Compose, WindingThenIdentityKeepsProfile) {
  auto disk = make_space("disk", {{"n", 33}});
  auto w = builtin_map("winding", disk, disk);
  auto gf = compose(w, builtin_map("identity", disk, disk));
  EXPECT_EQ(gf.assignment, w.assignment);
  double d = 2 * disk->resolution();
  auto a = sample_continuum_pairs(w, d, 80, "chain_pairs", 4);
  auto b = sample_continuum_pairs(gf, d, 80, "chain_pairs", 4);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i].u, b.samples[i].u);
}

TEST(Compose, SnowflakesMultiplyExponents) {
  // The 1/4 snowflake needs n = 257 before its resolution drops below 1/4.
  auto iv = make_space("interval", {{"n", 257}});
  auto s1 = make_space("snowflake", {{"n", 257}, {"epsilon", 0.5}});
  auto s2 = make_space("snowflake", {{"n", 257}, {"epsilon", 0.25}});
  auto f = builtin_map("snowflake_identity", iv, s1);
  auto g = builtin_map("snowflake_identity", s1, s2);
  auto rep = compose_check(f, g, 2 * iv->resolution(), 2 * s1->resolution(), 20000, "chain_pairs", 9);
  ASSERT_TRUE(rep.gf_fit.best);
  EXPECT_GE(rep.gf_fit.best->q, 0.2);
  EXPECT_LE(rep.gf_fit.best->q, 0.3);
  EXPECT_TRUE(rep.dominated) << rep.worst_ratio;
}

TEST(HullBall, ComparabilityIsDepthStable) {
  double prev = 0.0;
  for (int n : {65, 129}) {
    auto iv = make_space("interval", {{"n", n}});
    auto sf = make_space("snowflake", {{"n", n}, {"epsilon", 0.5}});
    auto m = builtin_map("snowflake_identity", iv, sf);
    double r = hull_ball_ratio(m, interior_balls(*iv, 0.1, n / 8), 2 * iv->resolution());
    EXPECT_GE(r, 1.0);
    if (prev > 0.0) {
      EXPECT_LE(r, 2 * prev);
      EXPECT_GE(r, prev / 2);
    }
    prev = r;
  }
  auto disk = make_space("disk", {{"n", 33}});
  auto hull = diametric_hull(*disk, 0, 0.2, 2 * disk->resolution());
  std::vector<PointId> ball;
  disk->points_within(0, 0.2, false, ball);
  std::sort(ball.begin(), ball.end());
  EXPECT_TRUE(std::includes(hull.begin(), hull.end(), ball.begin(), ball.end()));
}
