#pragma once

// Built-in verification suite run by `bsch check`: each item compares a
// library component against an independent small-instance computation.

#include <string>
#include <vector>

namespace bsch {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;   // worst deviation found
    double tolerance = 0.0;
    std::string detail;
};

std::vector<CheckResult> run_verification(bool quick);

}  // namespace bsch
