#include "hyperfill/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hyperfill {

namespace {

nlohmann::json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

std::vector<int> level_of_ids(const Filling& f) { return {f.levels().begin(), f.levels().end()}; }

}  // namespace

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

std::string filling_dot(const Filling& f) {
  std::ostringstream os;
  os << "graph filling {\n";
  for (int n = 0; n <= f.depth(); ++n) {
    os << "  { rank=same;";
    for (VertexId v : f.level_vertices(n)) os << " v" << v;
    os << "; }\n";
  }
  for (VertexId v = 0; v < f.num_vertices(); ++v) {
    os << "  v" << v << " [label=\"" << f.level(v) << ':' << f.center(v) << "\"];\n";
  }
  for (VertexId v = 0; v < f.num_vertices(); ++v) {
    for (VertexId w : f.neighbors(v)) {
      if (w > v) os << "  v" << v << " -- v" << w << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

nlohmann::json filling_json(const Filling& f) {
  std::vector<PointId> centers(f.num_vertices());
  for (VertexId v = 0; v < f.num_vertices(); ++v) centers[v] = f.center(v);
  return {{"schema", kSchemaVersion},
          {"kind", "filling"},
          {"space", to_json(f.host().spec())},
          {"s", f.s()},
          {"depth", f.depth()},
          {"A_s", f.A_s()},
          {"level_sizes", f.level_sizes()},
          {"levels", level_of_ids(f)},
          {"centers", centers},
          {"edges", f.num_edges()}};
}

nlohmann::json map_json(const MetricMap& f) {
  return {{"schema", kSchemaVersion},
          {"kind", "metric_map"},
          {"label", f.label},
          {"source", to_json(f.source->spec())},
          {"target", to_json(f.target->spec())},
          {"assignment", f.assignment}};
}

nlohmann::json filling_map_json(const FillingMap& phi) {
  return {{"schema", kSchemaVersion},
          {"kind", "filling_map"},
          {"label", phi.label},
          {"provenance", to_string(phi.provenance)},
          {"source", {{"space", to_json(phi.source->host().spec())}, {"s", phi.source->s()}, {"depth", phi.source->depth()}}},
          {"target", {{"space", to_json(phi.target->host().spec())}, {"s", phi.target->s()}, {"depth", phi.target->depth()}}},
          {"assignment", phi.assignment},
          {"collapsed", phi.collapsed}};
}

FillingMap filling_map_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<int>() != kSchemaVersion) throw Error(ErrorKind::io, "fill map: unsupported schema");
    if (j.at("kind").get<std::string>() != "filling_map") throw Error(ErrorKind::io, "fill map: wrong kind");
    auto side = [](const nlohmann::json& k) {
      return Filling::build(make_space(parse_space_spec(k.at("space"))), k.at("s").get<double>(), k.at("depth").get<int>());
    };
    auto source = side(j.at("source"));
    // Same spec, scale and depth on both sides means one shared filling.
    auto target = j.at("source") == j.at("target") ? source : side(j.at("target"));
    FillingMap phi{source, target, j.at("assignment").get<std::vector<VertexId>>(),
                   j.value("collapsed", std::vector<VertexId>{}), Provenance::loaded, j.value("label", "")};
    if (phi.assignment.size() != source->num_vertices()) throw Error(ErrorKind::io, "fill map: assignment size");
    for (VertexId w : phi.assignment) {
      if (w >= target->num_vertices()) throw Error(ErrorKind::io, "fill map: vertex out of range");
    }
    return phi;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, std::string("fill map: ") + e.what());
  }
}

nlohmann::json vqi_json(const VqiReport& r) {
  auto pareto = nlohmann::json::array();
  for (const auto& p : r.pareto) pareto.push_back({{"beta", p.beta}, {"alpha", num(p.alpha)}, {"vacuous", p.vacuous}});
  nlohmann::json j{{"schema", kSchemaVersion},
                   {"kind", "vqi_report"},
                   {"pareto", pareto},
                   {"geodesics_sampled", r.geodesics_sampled},
                   {"pairs_checked", r.pairs_checked},
                   {"reference_beta", r.reference_beta},
                   {"worst_pair", r.worst_pair},
                   {"trivial", r.trivial}};
  j["eventual_cutoff"] = r.eventual_cutoff ? nlohmann::json(*r.eventual_cutoff) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json gauge_json(const GaugeFit& fit) {
  nlohmann::json j{{"verdict", fit.verdict}};
  if (fit.best) j["best"] = {{"C", num(fit.best->C)}, {"q", fit.best->q}};
  auto curve = nlohmann::json::array();
  for (std::size_t i = 0; i < fit.q_grid.size(); ++i) curve.push_back({fit.q_grid[i], num(fit.C_of_q[i])});
  j["C_of_q"] = curve;
  return j;
}

nlohmann::json multiplicity_json(const MultiplicityReport& m) {
  return {{"N_phi", m.N_phi}, {"argmax", m.argmax}, {"per_level", m.per_level}};
}

nlohmann::json trace_json(const TraceReport& r) {
  auto res = nlohmann::json::array();
  for (double x : r.residual) res.push_back(num(x));
  nlohmann::json j{{"schema", kSchemaVersion},
                   {"kind", "trace"},
                   {"H_hat", r.H_hat},
                   {"residual_max", num(r.residual_max)},
                   {"assignment", r.assignment},
                   {"terminal", r.terminal},
                   {"residual", res}};
  j["round_trip_error"] = r.round_trip_error ? num(*r.round_trip_error) : nlohmann::json(nullptr);
  return j;
}

std::string profile_csv(const DistortionProfile& p) {
  std::ostringstream os;
  os << "t,u,generator,seed\n";
  for (const auto& s : p.samples) {
    os << format_double(s.t) << ',' << format_double(s.u) << ',' << p.generator << ',' << p.seed << '\n';
  }
  return os.str();
}

std::string trace_csv(const TraceReport& r) {
  std::ostringstream os;
  os << "source,target,residual\n";
  for (std::size_t x = 0; x < r.assignment.size(); ++x) {
    os << x << ',' << r.assignment[x] << ',' << format_double(r.residual[x]) << '\n';
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open for writing: " + path);
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hyperfill
