// Runs `verify --suite all` twice and prints one line per acceptance
// criterion. Exit status is nonzero when any criterion fails.
#include <chrono>
#include <cstdio>
#include <string>

#include "hyperfill/report.hpp"

using namespace hyperfill;

namespace {

const char* kTitles[] = {
    "",
    "filling axioms (exhaustive)",
    "hyperbolicity depth-stability",
    "shadow bounds stable in depth",
    "geodesic separation bound",
    "exponent recovery for the 1/2 snowflake",
    "vertical quasi-isometry of filling maps",
    "counterexample battery",
    "round trip within residual",
    "Koebe distortion",
    "surjectivity versus coboundedness",
    "intrinsic diameter distance",
    "reproducibility and runtime",
};

}  // namespace

int main() {
  RunConfig c;
  c.suite = "all";
  apply_env_overrides(c);

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const VerifyReport first = run(c);
  const auto t1 = clock::now();
  const VerifyReport second = run(c);
  const double minutes = std::chrono::duration<double>(t1 - t0).count() / 60.0;

  int failed = 0;
  for (const auto& cr : criteria(first)) {
    std::string bad;
    for (const CheckRecord* r : cr.checks) {
      if (r->status == "fail") bad += (bad.empty() ? "" : ", ") + r->id;
    }
    std::printf("criterion %2d %s: %s%s%s\n", cr.criterion, cr.pass ? "PASS" : "FAIL", kTitles[cr.criterion],
                bad.empty() ? "" : "; failing: ", bad.c_str());
    failed += !cr.pass;
  }

  const bool identical = first.dump() == second.dump();
  const bool fast = minutes < 15.0;
  std::printf("criterion 12 %s: %s; identical=%s, full suite %.2f min (limit 15)\n", identical && fast ? "PASS" : "FAIL",
              kTitles[12], identical ? "yes" : "no", minutes);
  failed += !(identical && fast);

  std::printf("%d of 12 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
