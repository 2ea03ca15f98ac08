#include "sh2/verification.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sh2/benchmarks.hpp"
#include "sh2/estimator.hpp"
#include "sh2/optimizer.hpp"
#include "sh2/oracle.hpp"
#include "sh2/rng.hpp"
#include "sh2/sampling.hpp"

namespace sh2 {

namespace {

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

DenseRealization random_stable_system(RngStream& rng, int n) {
    DenseRealization r;
    r.A.resize(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) r.A(i, j) = rng.uniform(-1.0, 1.0) / std::sqrt(n);
    r.A -= (spectral_abscissa(r.A) + 0.5 + rng.uniform(0.0, 1.0)) *
           Eigen::MatrixXd::Identity(n, n);
    r.B.resize(n, 1);
    r.C.resize(1, n);
    for (int i = 0; i < n; ++i) {
        r.B(i, 0) = rng.uniform(-1.0, 1.0);
        r.C(0, i) = rng.uniform(-1.0, 1.0);
    }
    return r;
}

}  // namespace

SuiteResult verify_lemma(std::uint64_t seed, int checks) {
    RngStream rng(seed, 601);
    int failures = 0;
    for (int k = 0; k < checks; ++k) {
        const int dim = 1 + k % 8;
        Eigen::VectorXd x(dim), y(dim);
        for (int i = 0; i < dim; ++i) {
            x[i] = rng.uniform(-5.0, 5.0);
            y[i] = rng.uniform(-5.0, 5.0);
        }
        if (k % 100 == 7) x.setZero();  // boundary case
        if (k % 100 == 8) y.setZero();
        if (!lemma_norm_xi_check(x, y)) ++failures;
    }
    SuiteResult res{"lemma", failures == 0, ""};
    res.details = std::to_string(checks) + " randomized checks, " + std::to_string(failures) +
                  " violation(s)";
    return res;
}

SuiteResult verify_oracle_agreement(std::uint64_t seed, int systems) {
    RngStream rng(seed, 602);
    double worst_rel = 0.0;
    for (int k = 0; k < systems; ++k) {
        const int n = 2 + static_cast<int>(rng.uniform(0.0, 19.0));
        const DenseRealization sys = random_stable_system(rng, n);
        const double gram = h2_norm_squared(sys);
        AnalyticSystem wrapped(sys.outputs(), sys.inputs(),
                               [&sys](double omega) { return sys.evaluate(omega); });
        const QuadratureResult quad = h2_norm_squared_quadrature(wrapped, 1e5, 1e-7);
        const double rel =
            std::abs(quad.value + quad.truncation_tail - gram) / std::max(gram, 1e-300);
        worst_rel = std::max(worst_rel, rel);
    }
    // closed form: ||1/(s+1)||^2 = 1/2
    DenseRealization lag;
    lag.A = -Eigen::MatrixXd::Identity(1, 1);
    lag.B = Eigen::MatrixXd::Identity(1, 1);
    lag.C = Eigen::MatrixXd::Identity(1, 1);
    const double lag_err = std::abs(h2_norm_squared(lag) - 0.5);

    SuiteResult res;
    res.name = "oracle-agreement";
    res.passed = worst_rel < 1e-4 && lag_err < 1e-10;
    res.details = std::to_string(systems) +
                  " random systems, worst Gramian-vs-quadrature relative error " +
                  format_double(worst_rel) + "; first-order-lag norm error " +
                  format_double(lag_err);
    return res;
}

SuiteResult verify_unbiasedness(std::uint64_t seed, int repetitions) {
    const RandomAffineBenchmark bench = random_affine_benchmark(8, 3, derive_seed(seed, 77));
    Eigen::VectorXd mu(3);
    mu << 0.3, -0.5, 0.2;
    const Eigen::VectorXd exact = exact_gradient(bench.oracle, mu);
    const DistributionPtr dist = log_uniform(1e-3, 1e4);
    const BiasProbeResult probe =
        estimator_bias_probe(bench.ps, mu, *dist, 10, repetitions, exact, derive_seed(seed, 603));

    bool ok = true;
    double worst_sigmas = 0.0;
    for (Eigen::Index j = 0; j < probe.bias.size(); ++j) {
        const double sigmas = std::abs(probe.bias[j]) / std::max(probe.standard_error[j], 1e-300);
        worst_sigmas = std::max(worst_sigmas, sigmas);
        if (sigmas > 4.0) ok = false;
    }
    SuiteResult res;
    res.name = "unbiasedness";
    res.passed = ok;
    res.details = std::to_string(repetitions) + " estimates, worst component bias at " +
                  format_double(worst_sigmas) + " standard errors (limit 4)";
    return res;
}

SuiteResult verify_variance(std::uint64_t seed, int repetitions) {
    const RandomAffineBenchmark bench = random_affine_benchmark(8, 3, derive_seed(seed, 77));
    Eigen::VectorXd mu(3);
    mu << 0.3, -0.5, 0.2;
    const DistributionPtr dist = log_uniform(1e-3, 1e4);

    const auto total_variance = [&](int sample_count, std::uint64_t stream) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
        Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(3);
        for (int r = 0; r < repetitions; ++r) {
            const GradientEstimate est = estimate_gradient(
                bench.ps, mu, *dist, sample_count, derive_seed(seed, stream + r), {0});
            sum += est.estimate;
            sum_sq += est.estimate.cwiseAbs2();
        }
        const Eigen::VectorXd mean = sum / repetitions;
        return (sum_sq / repetitions - mean.cwiseAbs2()).sum();
    };
    const double var1 = total_variance(1, 10000);
    const double var10 = total_variance(10, 20000);
    const double ratio = var1 / var10;

    SuiteResult res;
    res.name = "variance";
    res.passed = ratio >= 8.0 && ratio <= 12.5;
    res.details = "Var[M=1]/Var[M=10] = " + format_double(ratio) + " over " +
                  std::to_string(repetitions) + " repetitions (expected ~10, accepted [8, 12.5])";
    return res;
}

SuiteResult verify_stability(std::uint64_t seed, int runs) {
    const ParametrizedSystem ps = scalar_gain_benchmark();
    const RealizableParametrizedSystem oracle = scalar_gain_realizable();
    const DistributionPtr dist = log_uniform(1e-3, 1e3);
    const Eigen::VectorXd mu0 = Eigen::VectorXd::Constant(1, 2.0);
    const double delta = 0.1, epsilon = 1.0;
    const int iterations = 50;
    const int sample_count = 10;

    const std::vector<Eigen::VectorXd> probes = {mu0, Eigen::VectorXd::Constant(1, 1.0),
                                                 Eigen::VectorXd::Constant(1, 3.0)};
    const LocalConstants consts = estimate_local_constants(oracle, ps, *dist, probes, sample_count,
                                                           200, derive_seed(seed, 604));
    const StabilityBudget budget =
        stability_budget(consts.lipschitz_K, consts.smoothness_L, consts.sigma, delta, epsilon);
    StepSizePolicy policy = StepSizePolicy::constant(
        std::min(budget.alpha_cap, std::sqrt(budget.sum_sq_budget / iterations)));
    policy.alpha_cap = budget.alpha_cap;

    const double c0 = h2_cost(oracle.realize(mu0));
    const double threshold = c0 + std::sqrt(epsilon) + epsilon;
    CheckpointConfig checkpoints;
    checkpoints.every = 1;
    checkpoints.cost = [&oracle](const Eigen::VectorXd& mu) { return h2_cost(oracle.realize(mu)); };

    int successes = 0;
    for (int r = 0; r < runs; ++r) {
        const RunRecord record = sgd_run(ps, mu0, policy, *dist, sample_count, iterations,
                                         derive_seed(seed, 700 + r), checkpoints);
        bool within = true;
        for (const CheckpointEntry& cp : record.checkpoints) {
            if (!(cp.cost <= threshold)) within = false;
        }
        if (within) ++successes;
    }
    const double fraction = static_cast<double>(successes) / runs;
    const double limit = (1.0 - delta) - 3.0 * std::sqrt((1.0 - delta) * delta / runs);

    SuiteResult res;
    res.name = "stability";
    res.passed = fraction >= limit;
    res.details = format_double(fraction * 100.0) + "% of " + std::to_string(runs) +
                  " runs stayed within the sublevel set (need >= " + format_double(limit * 100.0) +
                  "%); alpha = " + format_double(policy.at(0)) +
                  ", budget = " + format_double(budget.sum_sq_budget);
    return res;
}

std::vector<std::string> suite_names() {
    return {"unbiasedness", "variance", "stability", "lemma", "oracle-agreement"};
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
    if (name == "lemma") return verify_lemma(seed);
    if (name == "oracle-agreement") return verify_oracle_agreement(seed);
    if (name == "unbiasedness") return verify_unbiasedness(seed);
    if (name == "variance") return verify_variance(seed);
    if (name == "stability") return verify_stability(seed);
    throw std::invalid_argument("unknown verification suite '" + name +
                                "' (known: unbiasedness, variance, stability, lemma, "
                                "oracle-agreement)");
}

}  // namespace sh2
