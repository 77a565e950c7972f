#include <gtest/gtest.h>

#include <sys/wait.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <regex>
#include <set>
#include <sstream>

#include "hyperfill/io.hpp"
#include "hyperfill/report.hpp"

using namespace hyperfill;
using nlohmann::json;

namespace {

std::string config_error(const json& j) {
  try {
    validate(config_from_json(j));
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

int cli(const std::string& args) {
  const std::string cmd = std::string(HYPERFILL_CLI) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "hyperfill_test_report";
  std::filesystem::create_directories(dir);
  return dir / name;
}

const CheckRecord* find(const VerifyReport& r, const std::string& id) {
  for (const auto& c : r.checks) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

}  // namespace

TEST(Config, DefaultsValidate) {
  RunConfig c;
  EXPECT_NO_THROW(validate(c));
  auto back = config_from_json(config_json(c));
  EXPECT_EQ(config_json(back), config_json(c));
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(config_error({{"s", 1.0}}).rfind("config.s:", 0), 0u);
  EXPECT_EQ(config_error({{"t", 0.5}}).rfind("config.t:", 0), 0u);
  EXPECT_EQ(config_error({{"depth", 0}}).rfind("config.depth:", 0), 0u);
  EXPECT_EQ(config_error({{"depth", 9}}).rfind("config.depth:", 0), 0u);
  EXPECT_EQ(config_error({{"suite", "bogus"}}).rfind("config.suite:", 0), 0u);
  EXPECT_EQ(config_error({{"map", "bogus"}}).rfind("config.map:", 0), 0u);
  EXPECT_EQ(config_error({{"depth", "four"}}).rfind("config.depth:", 0), 0u);
  EXPECT_EQ(config_error({{"colour", 1}}).rfind("config.colour:", 0), 0u);
  EXPECT_EQ(config_error({{"source", {{"generator", "nope"}}}}).rfind("config.source:", 0), 0u);
  EXPECT_EQ(config_error({{"delta", 1e-6}}).rfind("config.delta:", 0), 0u);
}

TEST(Config, DepthResolutionConstraint) {
  RunConfig c;
  const int cap = max_depth(*make_space(c.source), c.s);
  EXPECT_EQ(cap, 6);
  EXPECT_EQ(config_error({{"depth", cap}}), "");
  EXPECT_EQ(config_error({{"depth", cap + 1}}).rfind("config.depth:", 0), 0u);
}

TEST(Config, SeedFromEnvironment) {
  RunConfig c;
  ::setenv("HYPERFILL_SEED", "42", 1);
  apply_env_overrides(c);
  EXPECT_EQ(c.seed, 42u);
  ::setenv("HYPERFILL_SEED", "x1", 1);
  EXPECT_THROW(apply_env_overrides(c), Error);
  ::unsetenv("HYPERFILL_SEED");
  RunConfig d;
  apply_env_overrides(d);
  EXPECT_EQ(d.seed, 1u);
}

TEST(Verify, EmptySuite) {
  RunConfig c;
  c.suite = "none";
  auto r = run(c);
  EXPECT_TRUE(r.checks.empty());
  EXPECT_FALSE(r.failed());
  auto j = json::parse(r.dump());
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_EQ(j["checks"].size(), 0u);
  for (const auto& cr : criteria(r)) EXPECT_FALSE(cr.pass);
}

TEST(Verify, FillingSuiteOnIntervalPasses) {
  RunConfig c;
  c.suite = "filling";
  auto r = run(c);
  ASSERT_FALSE(r.checks.empty());
  std::set<std::string> ids;
  for (const auto& k : r.checks) {
    EXPECT_EQ(k.module, "filling");
    EXPECT_EQ(k.criterion, 0);
    EXPECT_FALSE(k.anchor.empty());
    EXPECT_NE(k.status, "fail") << k.id << " " << k.measured.dump();
    EXPECT_TRUE(ids.insert(k.id).second) << k.id;
  }
  EXPECT_TRUE(find(r, "filling.net_axioms.source"));
  EXPECT_EQ(r.verdict(), "pass");
}

TEST(Verify, ReportIsByteStable) {
  RunConfig c;
  c.suite = "trace";
  c.fans = 50;
  auto a = run(c).dump(), b = run(c).dump();
  EXPECT_EQ(a, b);
  c.seed = 7;
  auto j = json::parse(run(c).dump());
  EXPECT_EQ(j["seed"], 7);
}

TEST(Verify, SkipByPrefix) {
  RunConfig c;
  c.suite = "filling";
  c.skip = {"filling.hyperbolicity", "filling.shadow"};
  auto r = run(c);
  for (const auto& k : r.checks) {
    EXPECT_NE(k.id.rfind("filling.hyperbolicity", 0), 0u);
    EXPECT_NE(k.id.rfind("filling.shadow", 0), 0u);
  }
  EXPECT_TRUE(find(r, "filling.vertex_comparison.source"));
}

TEST(Verify, CounterexampleSuite) {
  RunConfig c;
  c.suite = "counterexamples";
  auto r = run(c);
  ASSERT_EQ(r.checks.size(), 4u);
  for (const auto& k : r.checks) EXPECT_EQ(k.criterion, 7);
  EXPECT_EQ(find(r, "c7.projection.not_bqs")->status, "evidence");
  EXPECT_EQ(find(r, "c7.projection.fiber_growth")->status, "evidence");
  EXPECT_EQ(find(r, "c7.accordion.multiplicity")->status, "evidence");
  // The fold ratio falls with depth even where the drop misses the factor 2.
  const auto& ratio = find(r, "c7.folding.openness")->measured["ratio"];
  EXPECT_GT(ratio[0].get<double>(), ratio[2].get<double>());
}

TEST(Verify, FailingCheckMakesVerdictFail) {
  VerifyReport r;
  r.checks.push_back({"a", "filling", 0, "x", "pass"});
  r.checks.push_back({"b", "filling", 0, "x", "evidence"});
  EXPECT_EQ(r.verdict(), "pass");
  r.checks.push_back({"c", "filling", 0, "x", "fail"});
  EXPECT_EQ(r.verdict(), "fail");
  EXPECT_EQ(json::parse(r.dump())["summary"]["fail"], 1);
}

TEST(Export, DotHasOneRankedNodePerVertex) {
  auto f = Filling::build(make_space("interval", {{"n", 17}}), 2.0, 3);
  const std::string dot = filling_dot(*f);
  std::regex node(R"re(v(\d+) \[label="(\d+):(\d+)"\];)re");
  std::size_t nodes = 0;
  for (std::sregex_iterator it(dot.begin(), dot.end(), node), end; it != end; ++it) {
    const auto v = static_cast<VertexId>(std::stoul((*it)[1]));
    EXPECT_EQ(std::stoi((*it)[2]), f->level(v));
    EXPECT_EQ(std::stoul((*it)[3]), f->center(v));
    ++nodes;
  }
  EXPECT_EQ(nodes, f->num_vertices());
  std::size_t ranks = 0;
  for (auto pos = dot.find("rank=same"); pos != std::string::npos; pos = dot.find("rank=same", pos + 1)) ++ranks;
  EXPECT_EQ(ranks, static_cast<std::size_t>(f->depth()) + 1);
  std::size_t edges = 0;
  for (auto pos = dot.find(" -- "); pos != std::string::npos; pos = dot.find(" -- ", pos + 1)) ++edges;
  EXPECT_EQ(edges, f->num_edges());
  EXPECT_EQ(dot, filling_dot(*f));
}

TEST(Export, ProfileCsvHeader) {
  auto sp = make_space("interval", {{"n", 33}});
  auto prof = sample_continuum_pairs(builtin_map("identity", sp, sp), 2 * sp->resolution(), 20, "hull_pairs", 3);
  const std::string csv = profile_csv(prof);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,u,generator,seed");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), prof.samples.size() + 1);
}

TEST(Export, VqiParetoSortedByBeta) {
  auto sp = make_space("disk", {{"n", 33}});
  auto f = Filling::build(sp, 2.0, 3);
  auto phi = fill_map(builtin_map("winding", sp, sp), f, f);
  auto j = vqi_json(estimate_vqi(phi, vqi_geodesic_sample(*f, 50, 1)));
  ASSERT_FALSE(j["pareto"].empty());
  for (std::size_t i = 1; i < j["pareto"].size(); ++i) {
    EXPECT_LT(j["pareto"][i - 1]["beta"].get<double>(), j["pareto"][i]["beta"].get<double>());
  }
}

TEST(Export, FillingMapRoundTrip) {
  auto X = make_space("interval", {{"n", 33}});
  auto Y = make_space("snowflake", {{"n", 33}, {"epsilon", 0.5}});
  auto phi = fill_map(builtin_map("snowflake_identity", X, Y), Filling::build(X, 2.0, 4),
                      Filling::build(Y, 2.0, max_depth(*Y, 2.0)));
  const json j = filling_map_json(phi);
  auto back = filling_map_from_json(json::parse(j.dump()));
  EXPECT_EQ(back.assignment, phi.assignment);
  EXPECT_EQ(back.collapsed, phi.collapsed);
  EXPECT_EQ(back.provenance, Provenance::loaded);
  EXPECT_EQ(back.source->level_sizes(), phi.source->level_sizes());
  EXPECT_EQ(back.target->level_sizes(), phi.target->level_sizes());

  json bad = j;
  bad["assignment"].push_back(0);
  EXPECT_THROW(filling_map_from_json(bad), Error);
  bad = j;
  bad["schema"] = 2;
  EXPECT_THROW(filling_map_from_json(bad), Error);
}

TEST(Export, SameSidesShareOneFilling) {
  auto X = make_space("interval", {{"n", 17}});
  auto f = Filling::build(X, 2.0, 3);
  auto back = filling_map_from_json(filling_map_json(fill_map(builtin_map("identity", X, X), f, f)));
  EXPECT_EQ(back.source, back.target);
}

TEST(Export, DoublesRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12.5, -2.0}) {
    const std::string s = format_double(x);
    double y = 0;
    std::from_chars(s.data(), s.data() + s.size(), y);
    EXPECT_EQ(x, y) << s;
  }
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("verify --suite none"), 0);
  EXPECT_EQ(cli("verify --suite bogus"), 2);
  EXPECT_EQ(cli("verify --s 1"), 2);
  EXPECT_EQ(cli("build --depth 40"), 2);
  EXPECT_EQ(cli("export --format png"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("trace --fillmap /nonexistent.json"), 2);
}

TEST(Cli, ExtendThenTrace) {
  const auto phi = scratch("phi.json"), csv = scratch("trace.csv"), vqi = scratch("vqi.json");
  ASSERT_EQ(cli("extend --map winding --sx '{\"generator\":\"disk\",\"params\":{\"n\":33}}' --s 2 --depth 3 --fans 50 --out " +
                phi.string() + " --report " + vqi.string()),
            0);
  EXPECT_EQ(json::parse(read_text(vqi.string()))["kind"], "vqi_report");
  ASSERT_EQ(cli("trace --fillmap " + phi.string() + " --out " + csv.string()), 0);
  const std::string text = read_text(csv.string());
  EXPECT_EQ(text.substr(0, text.find('\n')), "source,target,residual");
  const std::size_t rows = make_space("disk", {{"n", 33}})->size();
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), rows + 1);
}

TEST(Cli, VerifyWritesStableReport) {
  const auto a = scratch("a.json"), b = scratch("b.json");
  ASSERT_EQ(cli("verify --suite filling --depth 3 --out " + a.string()), 0);
  ASSERT_EQ(cli("verify --suite filling --depth 3 --out " + b.string()), 0);
  EXPECT_EQ(read_text(a.string()), read_text(b.string()));
  EXPECT_EQ(json::parse(read_text(a.string()))["verdict"], "pass");
}

TEST(Cli, BuildReportFields) {
  const auto out = scratch("filling.json"), dot = scratch("filling.dot");
  ASSERT_EQ(cli("build --space '{\"generator\":\"interval\",\"params\":{\"n\":33}}' --s 2 --depth 4 --out " + out.string() +
                " --dot " + dot.string()),
            0);
  auto j = json::parse(read_text(out.string()));
  for (const char* k : {"s", "N", "level_sizes", "delta_hat", "A_s", "shadow_bound"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["A_s"], 16.0);
  EXPECT_EQ(read_text(dot.string()).rfind("graph filling {", 0), 0u);
}
