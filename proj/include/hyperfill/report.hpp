#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperfill/space.hpp"

namespace hyperfill {

struct RunConfig {
  SpaceSpec source{"interval", {{"n", 65}}, 0};
  std::optional<SpaceSpec> target;  // defaults to the source
  std::string map = "identity";
  double s = 2.0;
  double t = 2.0;
  int depth = 4;
  int target_depth = -1;  // -1: same as depth, capped by the target resolution
  double delta = 0.0;     // 0: twice the source resolution
  std::uint64_t seed = 1;
  std::size_t samples = 200;
  std::size_t fans = 200;
  std::string suite = "all";
  std::vector<std::string> skip;  // check-id prefixes to leave out
  std::string out;
};

// Throws Error(invalid_argument) naming the offending field path, e.g.
// "config.s: must exceed 1".
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_json(const RunConfig& c);

// Scales above 1, known suite and map, and s^-N >= 2 rho on both spaces.
void validate(const RunConfig& c);

// HYPERFILL_SEED replaces the seed when set.
void apply_env_overrides(RunConfig& c);

struct CheckRecord {
  std::string id;
  std::string module;
  int criterion = 0;  // acceptance criterion, 0 for module checks
  std::string anchor;
  std::string status;  // pass | fail | evidence
  nlohmann::json measured = nlohmann::json::object();
  nlohmann::json bounds = nlohmann::json::object();
};

struct VerifyReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;

  bool failed() const;
  std::string verdict() const;  // pass | fail
  nlohmann::json to_json() const;
  std::string dump() const;  // byte-stable
};

std::vector<std::string> suite_names();

// Runs every check of the configured suite. Checks run concurrently; the
// report lists them in registration order.
VerifyReport run(const RunConfig& c);

struct CriterionResult {
  int criterion = 0;
  bool pass = false;
  std::vector<const CheckRecord*> checks;
};

// Groups acceptance checks by criterion, in order 1..11.
std::vector<CriterionResult> criteria(const VerifyReport& r);

}  // namespace hyperfill
