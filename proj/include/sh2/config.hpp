#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "sh2/benchmarks.hpp"
#include "sh2/optimizer.hpp"
#include "sh2/sampling.hpp"
#include "sh2/systems.hpp"

namespace sh2 {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat key=value configuration file. '#' starts a comment, blank lines are
// skipped, keys may appear once. Every key must be consumed by the reader;
// unknown keys are errors, not warnings.
class Config {
public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    Eigen::VectorXd get_vector(const std::string& key) const;  // comma-separated

    // Throws listing any key never consumed by a getter.
    void require_all_consumed() const;

    const std::string& origin() const { return origin_; }
    // Canonical digest of the raw contents, stored in run metadata.
    std::string digest() const;

private:
    std::string origin_;
    std::string raw_;
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

// A fully specified experiment assembled from a config file.
struct RunSetup {
    std::string problem_name;
    ParametrizedSystem ps;
    Eigen::VectorXd mu0;
    DistributionPtr dist;
    StepSizePolicy policy = StepSizePolicy::constant(0.0);
    int sample_count = 0;
    int iterations = 0;
    int trials = 1;
    std::uint64_t seed = 0;
    int checkpoint_every = 0;
    double divergence_bound = std::numeric_limits<double>::infinity();
    std::string out_dir;
    std::string config_digest;

    // Exact cost used for checkpoints and for the h2norm command; always set.
    std::function<double(const Eigen::VectorXd&)> cost;
    // Exact gradient when the problem admits a dense oracle.
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> exact_gradient_fn;
};

// Builds the experiment from the documented keys (see README). CLI overrides
// for seed/trials/out replace the config values when present.
RunSetup build_run_setup(const Config& cfg,
                         std::optional<std::uint64_t> seed_override = std::nullopt,
                         std::optional<int> trials_override = std::nullopt,
                         std::optional<std::string> out_override = std::nullopt);

}  // namespace sh2
