#include <cstdio>
#include <iostream>
#include <numeric>
#include <string>

#include <CLI11.hpp>

#include "hyperfill/io.hpp"
#include "hyperfill/report.hpp"

using namespace hyperfill;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

// Inline JSON when it starts with '{', otherwise a file path.
json load_json(const std::string& arg, const std::string& field) {
  try {
    return json::parse(!arg.empty() && arg.front() == '{' ? arg : read_text(arg));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_argument, field + ": " + e.what());
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

struct Common {
  std::string config;
  std::string sx, sy;
  std::string map;
  double s = 0, t = 0, delta = -1;
  int depth = 0, target_depth = -2;
  long long seed = -1;
  std::size_t samples = 0, fans = 0;

  void add_spaces(CLI::App* app, bool target) {
    app->add_option("--space,--sx", sx, "Source space spec (JSON file or inline object)");
    if (target) app->add_option("--sy", sy, "Target space spec (defaults to the source)");
  }
  void add_scales(CLI::App* app) {
    app->add_option("--s", s, "Source filling scale");
    app->add_option("--t", t, "Target filling scale");
    app->add_option("--depth", depth, "Source depth N");
    app->add_option("--target-depth", target_depth, "Target depth");
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : config_from_json(load_json(config, "config"));
    if (!sx.empty()) c.source = parse_space_spec(load_json(sx, "config.source"));
    if (!sy.empty()) c.target = parse_space_spec(load_json(sy, "config.target"));
    if (!map.empty()) c.map = map;
    if (s != 0) c.s = s;
    if (t != 0) c.t = t;
    else if (s != 0 && config.empty()) c.t = s;
    if (depth != 0) c.depth = depth;
    if (target_depth != -2) c.target_depth = target_depth;
    if (delta >= 0) c.delta = delta;
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    if (samples) c.samples = samples;
    if (fans) c.fans = fans;
    apply_env_overrides(c);
    validate(c);
    return c;
  }
};

struct Built {
  SpacePtr X, Y;
  FillingPtr FX, FY;
};

Built build_pair(const RunConfig& c) {
  Built b;
  b.X = make_space(c.source);
  b.Y = c.target ? make_space(*c.target) : b.X;
  b.FX = Filling::build(b.X, c.s, c.depth);
  const int ny = c.target_depth >= 0 ? c.target_depth : std::min(c.depth, max_depth(*b.Y, c.t));
  const bool same = !c.target && c.t == c.s && ny == c.depth;
  b.FY = same ? b.FX : Filling::build(b.Y, c.t, ny);
  return b;
}

json filling_summary(const Filling& f, std::uint64_t seed) {
  std::vector<PointId> pts(f.host().size());
  std::iota(pts.begin(), pts.end(), 0);
  const bool ex = f.num_vertices() <= 300;
  return {{"schema", kSchemaVersion},
          {"kind", "filling_report"},
          {"space", to_json(f.host().spec())},
          {"s", f.s()},
          {"N", f.depth()},
          {"level_sizes", f.level_sizes()},
          {"delta_hat", hyperbolicity(f, ex ? "exhaustive" : "sampled", 300, 200000, seed).delta_hat},
          {"A_s", f.A_s()},
          {"shadow_bound", shadow_bound(f, pts).m}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperbolic fillings of finite metric spaces, filling maps and their traces"};
  app.require_subcommand(1);
  Common o;
  std::string out, report, dot, fillmap, generator = "hull_pairs", format, suite;
  std::vector<std::string> skip;

  auto* build = app.add_subcommand("build", "Build a filling and report its structure");
  o.add_spaces(build, false);
  build->add_option("--s", o.s, "Filling scale");
  build->add_option("--depth", o.depth, "Depth N");
  build->add_option("--out", out, "Filling report JSON");
  build->add_option("--dot", dot, "Also write the graph as DOT");

  auto* extend = app.add_subcommand("extend", "Lift a map to a filling map and estimate its VQI constants");
  o.add_spaces(extend, true);
  o.add_scales(extend);
  extend->add_option("--map", o.map, "Builtin map name");
  extend->add_option("--fans", o.fans, "Geodesic fans sampled");
  extend->add_option("--seed", o.seed, "Sampling seed");
  extend->add_option("--out", out, "Filling map JSON");
  extend->add_option("--report", report, "VQI report JSON");

  auto* tr = app.add_subcommand("trace", "Compute the boundary trace of a saved filling map");
  tr->add_option("--fillmap", fillmap, "Filling map JSON from extend")->required();
  tr->add_option("--fans", o.fans, "Geodesic fans used to estimate H");
  tr->add_option("--seed", o.seed, "Sampling seed");
  tr->add_option("--out", out, "Trace CSV");
  tr->add_option("--report", report, "Trace JSON");

  auto* distort = app.add_subcommand("distort", "Sample the distortion profile of a map and fit a power gauge");
  o.add_spaces(distort, true);
  distort->add_option("--map", o.map, "Builtin map name");
  distort->add_option("--delta", o.delta, "Chain step (default twice the source resolution)");
  distort->add_option("--samples", o.samples, "Sample count");
  distort->add_option("--generator", generator, "hull_pairs | chain_pairs");
  distort->add_option("--seed", o.seed, "Sampling seed");
  distort->add_option("--out", out, "Profile CSV");
  distort->add_option("--report", report, "Gauge fit JSON");

  auto* verify = app.add_subcommand("verify", "Run a check suite and emit a JSON report");
  verify->add_option("--config", o.config, "RunConfig JSON");
  o.add_spaces(verify, true);
  o.add_scales(verify);
  verify->add_option("--map", o.map, "Builtin map name");
  verify->add_option("--suite", suite, "all | filling | distortion | extension | trace | counterexamples | acceptance | none");
  verify->add_option("--skip", skip, "Skip checks whose id starts with this prefix");
  verify->add_option("--seed", o.seed, "Seed");
  verify->add_option("--out", out, "Report JSON");

  auto* exp = app.add_subcommand("export", "Write a filling or a saved filling map in another format");
  o.add_spaces(exp, false);
  exp->add_option("--s", o.s, "Filling scale");
  exp->add_option("--depth", o.depth, "Depth N");
  exp->add_option("--fillmap", fillmap, "Filling map JSON to convert instead of a filling");
  exp->add_option("--format", format, "dot | json | csv")->required();
  exp->add_option("--out", out, "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (*build) {
      RunConfig c = o.resolve();
      auto f = Filling::build(make_space(c.source), c.s, c.depth);
      json j = filling_summary(*f, c.seed);
      j["filling"] = filling_json(*f);
      emit(out, j.dump(2) + "\n");
      if (!dot.empty()) write_text(dot, filling_dot(*f));
    } else if (*extend) {
      RunConfig c = o.resolve();
      auto b = build_pair(c);
      auto phi = fill_map(builtin_map(c.map, b.X, b.Y), b.FX, b.FY);
      auto vqi = estimate_vqi(phi, vqi_geodesic_sample(*b.FX, c.fans, c.seed));
      emit(out, filling_map_json(phi).dump(2) + "\n");
      if (!report.empty()) {
        json j = vqi_json(vqi);
        j["multiplicity"] = multiplicity_json(multiplicity(phi));
        j["cobounded_radius"] = cobounded_radius(phi);
        write_text(report, j.dump(2) + "\n");
      }
    } else if (*tr) {
      RunConfig c;
      if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
      if (o.fans) c.fans = o.fans;
      apply_env_overrides(c);
      auto phi = filling_map_from_json(load_json(fillmap, "fillmap"));
      auto rep = trace(phi, estimate_H(phi, vqi_geodesic_sample(*phi.source, c.fans, c.seed)));
      emit(out, trace_csv(rep));
      if (!report.empty()) write_text(report, trace_json(rep).dump(2) + "\n");
    } else if (*distort) {
      if (generator != "hull_pairs" && generator != "chain_pairs") {
        throw Error(ErrorKind::invalid_argument, "config.generator: unknown generator '" + generator + "'");
      }
      RunConfig c = o.resolve();
      auto X = make_space(c.source);
      auto Y = c.target ? make_space(*c.target) : X;
      const double delta = c.delta > 0 ? c.delta : 2 * X->resolution();
      auto prof = sample_continuum_pairs(builtin_map(c.map, X, Y), delta, c.samples, generator, c.seed);
      emit(out, profile_csv(prof));
      if (!report.empty()) write_text(report, gauge_json(fit_power_gauge(prof)).dump(2) + "\n");
    } else if (*verify) {
      RunConfig c = o.resolve();
      if (!suite.empty()) c.suite = suite;
      c.skip.insert(c.skip.end(), skip.begin(), skip.end());
      if (!out.empty()) c.out = out;
      validate(c);
      auto rep = run(c);
      emit(c.out, rep.dump());
      std::fprintf(stderr, "%zu checks, verdict %s\n", rep.checks.size(), rep.verdict().c_str());
      return rep.failed() ? kExitFail : kExitPass;
    } else if (*exp) {
      if (format != "dot" && format != "json" && format != "csv") {
        throw Error(ErrorKind::invalid_argument, "config.format: unknown format '" + format + "'");
      }
      if (!fillmap.empty()) {
        auto phi = filling_map_from_json(load_json(fillmap, "fillmap"));
        if (format == "json") {
          emit(out, filling_map_json(phi).dump(2) + "\n");
        } else if (format == "csv") {
          std::string csv = "source_vertex,target_vertex\n";
          for (VertexId v = 0; v < phi.assignment.size(); ++v) {
            csv += std::to_string(v) + "," + std::to_string(phi.assignment[v]) + "\n";
          }
          emit(out, csv);
        } else {
          throw Error(ErrorKind::invalid_argument, "config.format: filling maps export as json or csv");
        }
      } else {
        RunConfig c = o.resolve();
        auto f = Filling::build(make_space(c.source), c.s, c.depth);
        if (format == "dot") {
          emit(out, filling_dot(*f));
        } else if (format == "json") {
          emit(out, filling_json(*f).dump(2) + "\n");
        } else {
          throw Error(ErrorKind::invalid_argument, "config.format: fillings export as dot or json");
        }
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::degenerate ? kExitFail : kExitConfig;
  }
  return kExitPass;
}
