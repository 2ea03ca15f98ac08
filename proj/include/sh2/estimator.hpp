#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sh2/sampling.hpp"
#include "sh2/systems.hpp"

namespace sh2 {

struct SampleRecord {
    double omega = 0.0;
    double density = 0.0;
    Eigen::VectorXd re_f;  // Re f(mu; i*omega), length n_params
};

// M-sample Monte Carlo estimate of the gradient of (1/2)||G(mu)||^2.
struct GradientEstimate {
    Eigen::VectorXd estimate;
    std::vector<SampleRecord> samples;  // capped; see EstimatorOptions
    int sample_count = 0;
    std::uint64_t seed = 0;

    bool records_complete() const {
        return static_cast<int>(samples.size()) == sample_count;
    }
    // Recompute the estimate from the stored records (diagnostics only).
    Eigen::VectorXd recompute_from_samples() const;
};

struct EstimatorOptions {
    // Per-sample records above this count are dropped; only the running sum
    // is kept beyond it.
    std::size_t record_cap = 100000;
};

// f(mu; i*omega): component j is (1/2pi) * tr(G * conj(dG/dmu_j)^T).
Eigen::VectorXcd integrand(const ParametrizedSystem& ps, const Eigen::VectorXd& mu, double omega);

// (1/M) sum_m Re f(mu; i*omega_m) / p(omega_m) at seeded draws. The M sample
// evaluations run on the OpenMP worker pool; the reduction is performed in
// sample-index order, so the result is bit-identical for any thread count.
// Any failed frequency evaluation aborts the whole estimate (the error
// propagates); samples are never silently dropped.
GradientEstimate estimate_gradient(const ParametrizedSystem& ps, const Eigen::VectorXd& mu,
                                   const SamplingDistribution& dist, int sample_count,
                                   std::uint64_t seed, const EstimatorOptions& opts = {});

// Serial reference implementation, kept for testing and benchmarking against
// the parallel kernel. Identical contract and identical output.
GradientEstimate estimate_gradient_serial(const ParametrizedSystem& ps, const Eigen::VectorXd& mu,
                                          const SamplingDistribution& dist, int sample_count,
                                          std::uint64_t seed, const EstimatorOptions& opts = {});

struct BiasProbeResult {
    Eigen::VectorXd bias;            // mean(estimates) - oracle gradient
    Eigen::VectorXd standard_error;  // per component
    int repetitions = 0;
};

// Repeats the estimator R times with derived seeds and compares the empirical
// mean against a supplied oracle gradient.
BiasProbeResult estimator_bias_probe(const ParametrizedSystem& ps, const Eigen::VectorXd& mu,
                                     const SamplingDistribution& dist, int sample_count,
                                     int repetitions, const Eigen::VectorXd& oracle_gradient,
                                     std::uint64_t seed);

}  // namespace sh2
