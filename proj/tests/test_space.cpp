#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "hyperfill/space.hpp"

using namespace hyperfill;

namespace {

std::vector<PointId> all_points(const FiniteMetricSpace& s) {
  std::vector<PointId> v(s.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

PointId find_raw(const FiniteMetricSpace& s, std::initializer_list<double> pos) {
  std::vector<double> p(pos);
  for (PointId i = 0; i < s.size(); ++i) {
    auto r = s.raw(i);
    bool same = true;
    for (std::size_t d = 0; d < p.size(); ++d) same = same && std::abs(r[d] - p[d]) < 1e-12;
    if (same) return i;
  }
  ADD_FAILURE() << "point not in sample";
  return 0;
}

// Minimum diameter over all delta-connected subsets containing x and y, by
// enumerating bitmasks. Only usable for n <= ~22.
double brute_min_connecting_diam(const FiniteMetricSpace& s, PointId x, PointId y, double delta) {
  const std::size_t n = s.size();
  std::vector<std::uint32_t> adj(n, 0);
  for (PointId a = 0; a < n; ++a) {
    for (PointId b = 0; b < n; ++b) {
      if (a != b && s.dist(a, b) <= delta * (1 + 1e-9)) adj[a] |= 1u << b;
    }
  }
  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t must = (1u << x) | (1u << y);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if ((mask & must) != must) continue;
    std::uint32_t seen = 1u << x, frontier = seen;
    while (frontier) {
      std::uint32_t next = 0;
      for (std::uint32_t f = frontier; f; f &= f - 1) next |= adj[std::countr_zero(f)];
      next &= mask & ~seen;
      seen |= next;
      frontier = next;
    }
    if (seen != mask) continue;
    double d = 0;
    for (std::uint32_t a = mask; a; a &= a - 1) {
      for (std::uint32_t b = a & (a - 1); b; b &= b - 1) {
        d = std::max(d, s.dist(std::countr_zero(a), std::countr_zero(b)));
      }
    }
    best = std::min(best, d);
  }
  return best;
}

}  // namespace

TEST(MakeSpace, IntervalIsNormalizedGrid) {
  auto s = make_space("interval", {{"n", 5}});
  ASSERT_EQ(s->size(), 5u);
  EXPECT_DOUBLE_EQ(s->dist(0, 4), 1.0);
  EXPECT_DOUBLE_EQ(s->dist(1, 3), 0.5);
  EXPECT_DOUBLE_EQ(s->resolution(), 0.125);
}

TEST(MakeSpace, RejectsTinyAndUnknown) {
  // n = 3 would give {0, 1/2, 1}; fewer than 4 points is an error.
  try {
    make_space("interval", {{"n", 3}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
  }
  try {
    make_space("hilbert_cube", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unknown_generator);
  }
}

TEST(MakeSpace, RejectsDuplicates) {
  EXPECT_THROW(FiniteMetricSpace::from_coordinates("dup", 1, {0.0, 0.5, 0.5, 1.0}, 1.0, 0.1), Error);
}

TEST(MakeSpace, SnowflakeIsRenormalizedPower) {
  auto s = make_space("snowflake", {{"n", 17}, {"epsilon", 0.5}});
  EXPECT_DOUBLE_EQ(s->dist(0, 16), 1.0);
  EXPECT_NEAR(s->dist(0, 4), std::sqrt(0.25), 1e-15);
  EXPECT_NEAR(s->dist(4, 12), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(s->resolution(), std::sqrt(1.0 / 32.0), 1e-15);
  // With n = 5 the snowflaked resolution (1/8)^(1/2) is coarser than 1/4.
  EXPECT_THROW(make_space("snowflake", {{"n", 5}, {"epsilon", 0.5}}), Error);
}

TEST(MakeSpace, Deterministic) {
  auto a = make_space("disk", {{"n", 17}});
  auto b = make_space("disk", {{"n", 17}});
  ASSERT_EQ(a->size(), b->size());
  for (PointId p = 0; p < a->size(); ++p) EXPECT_EQ(a->raw(p)[0], b->raw(p)[0]);
  EXPECT_EQ(a->resolution(), b->resolution());
}

TEST(MakeSpace, MetricAxiomsOnEveryGenerator) {
  const std::vector<std::pair<std::string, nlohmann::json>> gens = {
      {"interval", {{"n", 40}}},          {"square", {{"n", 7}}},
      {"circle", {{"n", 50}}},            {"snowflake", {{"n", 60}, {"epsilon", 0.5}}},
      {"parabola_union", {{"n", 30}}},    {"strip", {{"n", 5}}},
      {"disk", {{"n", 9}}},               {"interval", {{"n", 513}}},
      {"square", {{"n", 33}}},            {"disk", {{"n", 33}}},
  };
  for (const auto& [g, p] : gens) {
    auto s = make_space(g, p);
    EXPECT_LT(s->resolution(), 0.25) << g;
    EXPECT_EQ(check_metric_axioms(*s, 100000, 7), std::nullopt) << g;
  }
}

TEST(MakeSpace, ResolutionIsACoveringRadius) {
  // Every point of the underlying set lies within rho of the sample; probe
  // the disk on a fine polar grid.
  auto s = make_space("disk", {{"n", 33}});
  const double scale = 0.5;  // raw diameter is 2
  for (int i = 0; i <= 200; ++i) {
    for (int k = 0; k < 64; ++k) {
      const double r = i / 200.0, a = 2 * M_PI * k / 64.0;
      const double pos[2] = {r * std::cos(a), r * std::sin(a)};
      const PointId q = s->nearest_to_raw(pos);
      EXPECT_LE(s->dist_to_raw(q, pos), s->resolution() + 1e-12);
      (void)scale;
    }
  }
}

TEST(PointsWithin, MatchesLinearScan) {
  for (const char* g : {"square", "circle", "snowflake"}) {
    auto s = make_space(g, {{"n", g == std::string("square") ? 21 : 200}});
    std::vector<PointId> got;
    for (PointId c = 0; c < s->size(); c += 17) {
      for (double r : {0.0, 0.03, 0.11, 0.5, 1.0}) {
        for (bool strict : {true, false}) {
          s->points_within(c, r, strict, got);
          std::vector<PointId> want;
          for (PointId q = 0; q < s->size(); ++q) {
            const double d = s->dist(c, q);
            if (strict ? d < r : d <= r) want.push_back(q);
          }
          EXPECT_EQ(got, want) << g << " c=" << c << " r=" << r;
        }
      }
    }
  }
}

TEST(Diameter, MatchesPairwiseScan) {
  auto s = make_space("disk", {{"n", 13}});
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PointId> sub;
    for (PointId p = 0; p < s->size(); ++p) {
      if (rng() % 5 == 0) sub.push_back(p);
    }
    double want = 0;
    for (PointId a : sub) {
      for (PointId b : sub) want = std::max(want, s->dist(a, b));
    }
    EXPECT_NEAR(s->diameter(sub), want, 1e-12);
  }
}

TEST(DeltaComponents, ChainIsConnected) {
  auto s = make_space("interval", {{"n", 11}});
  auto parts = delta_components(*s, all_points(*s), 0.1);
  EXPECT_EQ(parts.size(), 1u);
}

TEST(DeltaComponents, GapSplits) {
  auto s = make_space("interval", {{"n", 11}});
  const std::vector<PointId> sub = {0, 10};
  auto parts = delta_components(*s, sub, 0.5);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0], std::vector<PointId>{0});
}

TEST(DeltaComponents, OppositeCornerBlocksMatchUnionFindOracle) {
  auto s = make_space("square", {{"n", 8}});
  const double cell = s->dist(0, 1);
  std::vector<PointId> sub = {0, 1, 8, 9, 54, 55, 62, 63};
  auto parts = delta_components(*s, sub, cell);
  // Oracle: repeated relaxation of labels.
  std::vector<int> label(sub.size());
  std::iota(label.begin(), label.end(), 0);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < sub.size(); ++i) {
      for (std::size_t j = 0; j < sub.size(); ++j) {
        if (s->dist(sub[i], sub[j]) <= cell * (1 + 1e-9) && label[j] < label[i]) {
          label[i] = label[j];
          changed = true;
        }
      }
    }
  }
  std::sort(label.begin(), label.end());
  const auto distinct = std::unique(label.begin(), label.end()) - label.begin();
  EXPECT_EQ(static_cast<long>(parts.size()), distinct);
  EXPECT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0], (std::vector<PointId>{0, 1, 8, 9}));
}

TEST(DeltaComponents, EmptySubsetThrows) {
  auto s = make_space("interval", {{"n", 11}});
  EXPECT_THROW(delta_components(*s, {}, 0.1), Error);
}

TEST(HullBetween, IntervalSegment) {
  auto s = make_space("interval", {{"n", 11}});
  auto h = hull_between(*s, 2, 7, 2 * s->resolution());
  EXPECT_EQ(h.support, (std::vector<PointId>{2, 3, 4, 5, 6, 7}));
  EXPECT_NEAR(h.diam, 0.5, 1e-12);
}

TEST(HullBetween, ParabolaRoutesTowardOrigin) {
  // The branches merge where their gap x^2 drops below delta, so the hull
  // only has to reach x ~ sqrt(delta), not the origin itself.
  auto s = make_space("parabola_union", {{"n", 20001}});
  const double delta = 2 * s->resolution();
  const PointId x = find_raw(*s, {0.05, 0.0});
  const PointId y = find_raw(*s, {0.05, 0.0025});
  auto h = hull_between(*s, x, y, delta);
  double min_x = 1.0;
  for (PointId p : h.support) min_x = std::min(min_x, s->raw(p)[0]);
  EXPECT_LT(min_x, 0.05 - 0.02);
  EXPECT_GT(h.diam, 10 * s->dist(x, y));
}

TEST(HullBetween, SupportIsDeltaConnectedAndContainsEndpoints) {
  auto s = make_space("disk", {{"n", 15}});
  const double delta = 2 * s->resolution();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 60; ++i) {
    const PointId x = rng() % s->size(), y = rng() % s->size();
    if (x == y) continue;
    auto h = hull_between(*s, x, y, delta);
    EXPECT_TRUE(std::binary_search(h.support.begin(), h.support.end(), x));
    EXPECT_TRUE(std::binary_search(h.support.begin(), h.support.end(), y));
    EXPECT_EQ(delta_components(*s, h.support, delta).size(), 1u);
    EXPECT_GE(h.diam, s->dist(x, y) - 1e-15);
  }
}

TEST(HullBetween, FactorTwoOfBruteForceOnSmallGrid) {
  auto s = make_space("square", {{"n", 4}});
  const double delta = 2 * s->resolution();
  for (PointId x = 0; x < s->size(); ++x) {
    for (PointId y = x + 1; y < s->size(); ++y) {
      const double opt = brute_min_connecting_diam(*s, x, y, delta);
      const double got = mazurkiewicz_dist(*s, x, y, delta);
      EXPECT_GE(got, opt - 1e-12);
      EXPECT_LE(got, 2 * opt + 1e-12);
    }
  }
  // Adjacent corners: the side itself is optimal.
  EXPECT_NEAR(mazurkiewicz_dist(*s, 0, 3, delta), s->dist(0, 3), 1e-12);
}

TEST(Mazurkiewicz, CircleAntipodalMatchesBruteForce) {
  auto s = make_space("circle", {{"n", 12}});
  const double delta = 2 * s->resolution();
  const double opt = brute_min_connecting_diam(*s, 0, 6, delta);
  EXPECT_NEAR(opt, 1.0, 1e-12);
  const double got = mazurkiewicz_dist(*s, 0, 6, delta);
  EXPECT_GE(got, opt - 1e-12);
  EXPECT_LE(got, 2 * opt);
}

TEST(Mazurkiewicz, ParabolaCoarseBruteForce) {
  auto s = make_space("parabola_union", {{"n", 11}});
  const PointId x = find_raw(*s, {0.1, 0.0});
  const PointId y = find_raw(*s, {0.1, 0.01});
  const double delta = 2 * s->resolution();
  const double opt = brute_min_connecting_diam(*s, x, y, delta);
  const double got = mazurkiewicz_dist(*s, x, y, delta);
  EXPECT_GE(got, opt - 1e-12);
  EXPECT_LE(got, 2 * opt + 1e-12);
}

TEST(Mazurkiewicz, EqualsDistOnInterval) {
  auto s = make_space("interval", {{"n", 33}});
  const double delta = 2 * s->resolution();
  for (PointId x = 0; x < s->size(); ++x) {
    for (PointId y = 0; y < s->size(); ++y) {
      EXPECT_EQ(mazurkiewicz_dist(*s, x, y, delta), s->dist(x, y));
    }
  }
}

TEST(Mazurkiewicz, DisconnectedSpaceThrows) {
  auto s = make_space("cantor", {{"k", 3}, {"base", 10}});
  try {
    hull_between(*s, 0, 7, 2 * s->resolution());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::disconnected);
  }
}

TEST(BoundedTurning, IntervalAndSnowflakeAreOne) {
  auto iv = make_space("interval", {{"n", 32}});
  auto est = estimate_bounded_turning(*iv, 2 * iv->resolution(), 32 * 32, 1);
  EXPECT_EQ(est.pairs_sampled, 32u * 31u / 2u);
  EXPECT_NEAR(est.lambda_hat, 1.0, 1e-12);
  auto sf = make_space("snowflake", {{"n", 32}, {"epsilon", 0.5}});
  auto est2 = estimate_bounded_turning(*sf, 2 * sf->resolution(), 32 * 32, 1);
  EXPECT_NEAR(est2.lambda_hat, 1.0, 1e-12);
  EXPECT_FALSE(est2.unbounded_suspected);
}

TEST(BoundedTurning, ParabolaGrowsUnderRefinement) {
  // Branches closer than delta merge, so the estimate is capped near 1/sqrt(delta).
  double prev = 0.0;
  for (int n : {51, 201, 801, 3201}) {
    auto s = make_space("parabola_union", {{"n", n}});
    auto est = estimate_bounded_turning(*s, 2 * s->resolution(), 2000, 1);
    EXPECT_GT(est.lambda_hat, 1.5 * prev) << n;
    EXPECT_EQ(est.unbounded_suspected, est.lambda_hat > 100.0);
    prev = est.lambda_hat;
  }
  EXPECT_GT(prev, 10.0);
}

TEST(BoundedTurning, StableUnderDoubling) {
  for (const char* g : {"square", "circle"}) {
    const int n1 = g == std::string("square") ? 9 : 40;
    auto a = make_space(g, {{"n", n1}});
    auto b = make_space(g, {{"n", 2 * n1 - (g == std::string("square") ? 1 : 0)}});
    const double la = estimate_bounded_turning(*a, 2 * a->resolution(), 400, 5).lambda_hat;
    const double lb = estimate_bounded_turning(*b, 2 * b->resolution(), 400, 5).lambda_hat;
    EXPECT_LT(std::abs(la - lb) / la, 0.10) << g << " " << la << " " << lb;
  }
}
