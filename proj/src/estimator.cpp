#include "sh2/estimator.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

namespace sh2 {

Eigen::VectorXd GradientEstimate::recompute_from_samples() const {
    if (!records_complete())
        throw std::logic_error("recompute_from_samples: records were capped");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(estimate.size());
    for (const auto& s : samples) sum += s.re_f / s.density;
    return sum / static_cast<double>(sample_count);
}

Eigen::VectorXcd integrand(const ParametrizedSystem& ps, const Eigen::VectorXd& mu, double omega) {
    const JointEvaluation je = ps.evaluate_joint(mu, omega);
    Eigen::VectorXcd f(ps.n_params);
    const double scale = 1.0 / (2.0 * M_PI);
    for (int j = 0; j < ps.n_params; ++j) {
        // tr(G * conj(dG_j)^T) is the Frobenius inner product <dG_j, G>.
        f[j] = scale * (je.value.array() * je.gradients[j].array().conjugate()).sum();
    }
    return f;
}

namespace {

Eigen::VectorXd real_integrand(const ParametrizedSystem& ps, const Eigen::VectorXd& mu,
                               double omega) {
    // Only the real part is ever accumulated; imaginary parts are discarded
    // per sample, keeping the estimate exactly real.
    const JointEvaluation je = ps.evaluate_joint(mu, omega);
    Eigen::VectorXd f(ps.n_params);
    const double scale = 1.0 / (2.0 * M_PI);
    for (int j = 0; j < ps.n_params; ++j)
        f[j] = scale * (je.value.array() * je.gradients[j].array().conjugate()).sum().real();
    return f;
}

GradientEstimate run_estimate(const ParametrizedSystem& ps, const Eigen::VectorXd& mu,
                              const SamplingDistribution& dist, int sample_count,
                              std::uint64_t seed, const EstimatorOptions& opts, bool parallel) {
    if (sample_count < 1) throw std::invalid_argument("estimate_gradient: need M >= 1");
    ps.require_in_domain(mu);

    RngStream rng(seed);
    const std::vector<double> omegas = dist.draw(rng, sample_count);

    std::vector<double> densities(omegas.size());
    for (std::size_t m = 0; m < omegas.size(); ++m) {
        densities[m] = dist.density(omegas[m]);
        if (!(densities[m] > 0.0))
            throw std::logic_error("estimate_gradient: drawn sample has zero density");
    }

    std::vector<Eigen::VectorXd> terms(omegas.size());
    std::exception_ptr failure;
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (long m = 0; m < static_cast<long>(omegas.size()); ++m) {
            if (failure) continue;
            try {
                terms[static_cast<std::size_t>(m)] =
                    real_integrand(ps, mu, omegas[static_cast<std::size_t>(m)]);
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
    } else {
        for (std::size_t m = 0; m < omegas.size(); ++m)
            terms[m] = real_integrand(ps, mu, omegas[m]);
    }
    if (failure) std::rethrow_exception(failure);

    GradientEstimate result;
    result.sample_count = sample_count;
    result.seed = seed;
    result.estimate = Eigen::VectorXd::Zero(ps.n_params);
    // fixed-order reduction, independent of worker count
    for (std::size_t m = 0; m < terms.size(); ++m)
        result.estimate += terms[m] / densities[m];
    result.estimate /= static_cast<double>(sample_count);

    const std::size_t keep = std::min<std::size_t>(omegas.size(), opts.record_cap);
    result.samples.reserve(keep);
    for (std::size_t m = 0; m < keep; ++m)
        result.samples.push_back({omegas[m], densities[m], terms[m]});
    return result;
}

}  // namespace

GradientEstimate estimate_gradient(const ParametrizedSystem& ps, const Eigen::VectorXd& mu,
                                   const SamplingDistribution& dist, int sample_count,
                                   std::uint64_t seed, const EstimatorOptions& opts) {
    return run_estimate(ps, mu, dist, sample_count, seed, opts, true);
}

GradientEstimate estimate_gradient_serial(const ParametrizedSystem& ps, const Eigen::VectorXd& mu,
                                          const SamplingDistribution& dist, int sample_count,
                                          std::uint64_t seed, const EstimatorOptions& opts) {
    return run_estimate(ps, mu, dist, sample_count, seed, opts, false);
}

BiasProbeResult estimator_bias_probe(const ParametrizedSystem& ps, const Eigen::VectorXd& mu,
                                     const SamplingDistribution& dist, int sample_count,
                                     int repetitions, const Eigen::VectorXd& oracle_gradient,
                                     std::uint64_t seed) {
    if (repetitions < 2) throw std::invalid_argument("estimator_bias_probe: need R >= 2");
    EstimatorOptions opts;
    opts.record_cap = 0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(ps.n_params);
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(ps.n_params);
    for (int r = 0; r < repetitions; ++r) {
        const GradientEstimate est =
            estimate_gradient(ps, mu, dist, sample_count, derive_seed(seed, r), opts);
        const Eigen::VectorXd delta = est.estimate - mean;
        mean += delta / static_cast<double>(r + 1);
        m2 += delta.cwiseProduct(est.estimate - mean);
    }
    BiasProbeResult result;
    result.repetitions = repetitions;
    result.bias = mean - oracle_gradient;
    result.standard_error =
        (m2 / static_cast<double>(repetitions - 1) / static_cast<double>(repetitions))
            .cwiseSqrt();
    return result;
}

}  // namespace sh2
