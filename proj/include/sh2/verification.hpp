#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sh2 {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string details;
};

// Named property suites shared by the `verify` command and the acceptance
// tests. Each suite is deterministic given the seed.
SuiteResult verify_lemma(std::uint64_t seed = 0, int checks = 100000);
SuiteResult verify_oracle_agreement(std::uint64_t seed = 0, int systems = 50);
SuiteResult verify_unbiasedness(std::uint64_t seed = 0, int repetitions = 10000);
SuiteResult verify_variance(std::uint64_t seed = 0, int repetitions = 10000);
SuiteResult verify_stability(std::uint64_t seed = 0, int runs = 1000);

std::vector<std::string> suite_names();
// Throws std::invalid_argument for unknown suite names.
SuiteResult run_suite(const std::string& name, std::uint64_t seed = 0);

}  // namespace sh2
