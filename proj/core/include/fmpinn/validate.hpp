#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace fmpinn {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Injectable schedule hooks so the suite itself can be tested against
/// deliberately broken implementations.
struct ValidationHooks {
    std::function<double(std::int64_t, std::int64_t, double)> gamma_fn;
    std::function<double(std::int64_t, double, double)> lr_fn;
};

/// Fast invariant suite: derivative checks, schedule tables, exact-solution
/// plug-ins, oracle cross-checks, sampling sanity. Each check is named and
/// returns a one-line detail.
std::vector<CheckResult> run_validation_suite(const ValidationHooks& hooks = {});

/// Prints one pass/fail line per check; returns the number of failures.
int report_checks(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace fmpinn
