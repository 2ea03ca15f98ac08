#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sh2/estimator.hpp"
#include "sh2/oracle.hpp"
#include "sh2/sampling.hpp"
#include "sh2/systems.hpp"

namespace sh2 {

// Step size schedule alpha_k, k = 0, 1, ...
class StepSizePolicy {
public:
    enum class Kind { Constant, PowerLaw, Piecewise, Explicit, Custom };

    static StepSizePolicy constant(double alpha0);
    // alpha_k = alpha0 / (k + 1)^p
    static StepSizePolicy power_law(double alpha0, double p);
    // alpha for k < breakpoints[i].first is breakpoints[i].second (first match);
    // beyond the last breakpoint the last value is kept.
    static StepSizePolicy piecewise(std::vector<std::pair<int, double>> breakpoints);
    static StepSizePolicy explicit_list(std::vector<double> alphas);
    static StepSizePolicy custom(std::function<double(int)> rule, std::string description);
    // alpha0 halved every `period` iterations (the wave-benchmark schedule).
    static StepSizePolicy halving(double alpha0, int period);

    Kind kind() const { return kind_; }
    double at(int k) const;
    // Sum of alpha_k^2 over k < horizon (or an infinite-horizon value/bound
    // when horizon is absent; +inf when not l2 summable).
    double sum_squares(std::optional<long> horizon = std::nullopt) const;
    const std::string& describe() const { return description_; }

    // Optional cap L^{-1}; at() clamps to it.
    double alpha_cap = std::numeric_limits<double>::infinity();

private:
    StepSizePolicy() = default;
    Kind kind_ = Kind::Constant;
    double alpha0_ = 0.0;
    double p_ = 0.0;
    std::vector<std::pair<int, double>> breakpoints_;
    std::vector<double> explicit_;
    std::function<double(int)> custom_;
    std::string description_;
};

struct CheckpointEntry {
    int iteration = 0;
    double cost = 0.0;
};

// Full trajectory of one SGD run.
struct RunRecord {
    std::vector<Eigen::VectorXd> iterates;          // mu_0 .. mu_N
    std::vector<double> step_sizes;                 // alpha_0 .. alpha_{N-1}
    std::vector<Eigen::VectorXd> estimates;         // gradient estimate per step
    std::vector<double> estimate_norms;
    std::vector<bool> projection_active;            // box projection clamped the step
    std::vector<CheckpointEntry> checkpoints;
    std::vector<double> wall_seconds;               // per iteration
    std::uint64_t seed = 0;
    int sample_count = 0;
    std::string termination_reason;

    int iterations() const { return static_cast<int>(step_sizes.size()); }
    const Eigen::VectorXd& final_iterate() const { return iterates.back(); }
};

struct CheckpointConfig {
    int every = 0;  // 0 disables checkpoints
    std::function<double(const Eigen::VectorXd&)> cost;
    double divergence_bound = std::numeric_limits<double>::infinity();
};

// Algorithm loop: mu_{k+1} = mu_k - alpha_k * estimate_k, with optional
// projection onto the domain box and optional cost checkpoints. Deterministic
// given (seed, M): the per-iteration estimator seed is derived from them.
RunRecord sgd_run(const ParametrizedSystem& ps, const Eigen::VectorXd& mu0,
                  const StepSizePolicy& policy, const SamplingDistribution& dist, int sample_count,
                  int iteration_limit, std::uint64_t seed, const CheckpointConfig& checkpoints = {});

// Same loop with a plug-in gradient (e.g. the exact oracle gradient).
RunRecord sgd_run_exact(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
                        const ParameterBox& domain, const Eigen::VectorXd& mu0,
                        const StepSizePolicy& policy, int iteration_limit,
                        const CheckpointConfig& checkpoints = {});

struct StabilityBudget {
    double r_star = 0.0;       // K^2 s^2 + 2 L (K^2 + s^2)
    double sum_sq_budget = 0.0;  // delta * epsilon / R*
    double alpha_cap = 0.0;      // L^{-1}
};

StabilityBudget stability_budget(double lipschitz_K, double smoothness_L, double sigma,
                                 double delta, double epsilon);

struct PolicyReport {
    double sum_squares = 0.0;
    bool within_budget = false;
    bool within_cap = false;
    bool l2_summable = false;
    double decay_exponent = 0.0;  // fitted p in alpha_k ~ 1/k^p
    bool theta_compatible = false;  // p in (1/2, 1]
};

PolicyReport validate_policy(const StepSizePolicy& policy, const StabilityBudget& budget,
                             std::optional<long> horizon = std::nullopt);

struct LocalConstants {
    double lipschitz_K = 0.0;
    double smoothness_L = 0.0;
    double sigma = 0.0;
};

// Heuristic lower bounds for Theorem-style constants, probed from the oracle
// gradient and the empirical estimator variance at the probe points.
LocalConstants estimate_local_constants(const RealizableParametrizedSystem& oracle,
                                        const ParametrizedSystem& ps,
                                        const SamplingDistribution& dist,
                                        const std::vector<Eigen::VectorXd>& probe_points,
                                        int sample_count, int repetitions, std::uint64_t seed);

// CSV trajectory (k, alpha_k, mu components, estimate norm, checkpoint cost)
// plus a JSON metadata sidecar next to it (".meta.json" suffix).
void write_run_record(const RunRecord& record, const std::string& csv_path,
                      const std::string& config_digest = "");

}  // namespace sh2
