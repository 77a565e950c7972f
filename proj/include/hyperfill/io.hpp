#pragma once

#include <string>

#include <json.hpp>

#include "hyperfill/distortion.hpp"
#include "hyperfill/extension.hpp"
#include "hyperfill/filling.hpp"
#include "hyperfill/trace.hpp"

namespace hyperfill {

inline constexpr int kSchemaVersion = 1;

// One node per vertex with its level, grouped into rank=same blocks.
std::string filling_dot(const Filling& f);
nlohmann::json filling_json(const Filling& f);

nlohmann::json map_json(const MetricMap& f);
// Self-contained: carries both space specs, scales and depths so the
// fillings can be rebuilt on load.
nlohmann::json filling_map_json(const FillingMap& phi);
FillingMap filling_map_from_json(const nlohmann::json& j);

nlohmann::json vqi_json(const VqiReport& r);
nlohmann::json gauge_json(const GaugeFit& fit);
nlohmann::json multiplicity_json(const MultiplicityReport& m);
nlohmann::json trace_json(const TraceReport& r);

// Header "t,u,generator,seed".
std::string profile_csv(const DistortionProfile& p);
// Header "source,target,residual".
std::string trace_csv(const TraceReport& r);

// Shortest text that parses back to the same double; "inf" for infinity.
std::string format_double(double x);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace hyperfill
