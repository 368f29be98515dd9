#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pstereo::selfcheck {

struct CheckResult {
    std::string name;
    bool passed = false;
    double max_error = 0.0;  // worst deviation the check observed
    double tolerance = 0.0;  // bound the deviation was held to
    std::string detail;      // short context, mainly for failures
};

struct Options {
    std::uint64_t seed = 0;
    double lambda_d = 1.0;
    double lambda_dep = 1.0;
    double lambda_kd = 1.0;
};

// Runs the full invariant suite on seeded synthetic data: convolution-path
// equivalence, kernel-backend equivalence, gradient checks, warp conservation,
// volume structure, softmax sanity, file round-trips, and loss composition.
// Deterministic for a given seed; needs no external data.
std::vector<CheckResult> run_all(const Options& opt = {});

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace pstereo::selfcheck
