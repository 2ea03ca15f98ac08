#include <doctest.h>

#include <cmath>

#include "sh2/benchmarks.hpp"
#include "sh2/estimator.hpp"
#include "sh2/oracle.hpp"
#include "sh2/rng.hpp"
#include "sh2/sampling.hpp"

using namespace sh2;

namespace {

ParametrizedSystem zero_system() {
    ParametrizedSystem ps;
    ps.n_params = 2;
    ps.domain = ParameterBox::unbounded(2);
    ps.joint = [](const Eigen::VectorXd&, double) {
        JointEvaluation je;
        je.value = TransferValue::Zero(1, 1);
        je.gradients = {TransferValue::Zero(1, 1), TransferValue::Zero(1, 1)};
        return je;
    };
    return ps;
}

}  // namespace

TEST_CASE("integrand closed form on the scalar benchmark") {
    // G = mu/(s+1): f(mu; i*omega) = (1/2pi) mu/(1+omega^2)
    const ParametrizedSystem ps = scalar_gain_benchmark();
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(1, 2.0);
    CHECK(integrand(ps, mu, 0.0)(0).real() == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
    CHECK(integrand(ps, mu, 0.0)(0).imag() == doctest::Approx(0.0));
    CHECK(integrand(ps, mu, 3.0)(0).real() ==
          doctest::Approx(2.0 / (2.0 * M_PI * 10.0)).epsilon(1e-12));
}

TEST_CASE("integrand conjugate symmetry") {
    const RandomAffineBenchmark bench = random_affine_benchmark(6, 2, 5);
    Eigen::VectorXd mu(2);
    mu << 0.4, -0.9;
    for (double omega : {0.1, 1.7, 42.0}) {
        const Eigen::VectorXcd plus = integrand(bench.ps, mu, omega);
        const Eigen::VectorXcd minus = integrand(bench.ps, mu, -omega);
        CHECK((minus - plus.conjugate()).norm() < 1e-13);
    }
}

TEST_CASE("zero system gives a zero estimate with zero variance") {
    const ParametrizedSystem ps = zero_system();
    const auto dist = log_uniform(1e-1, 1e2);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const GradientEstimate est =
            estimate_gradient(ps, Eigen::VectorXd::Zero(2), *dist, 16, seed);
        CHECK(est.estimate.norm() == 0.0);
    }
}

TEST_CASE("serial reference and OpenMP kernel are bit-identical") {
    const RandomAffineBenchmark bench = random_affine_benchmark(10, 3, 2);
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(3, 0.2);
    const auto dist = log_uniform(1e-2, 1e3);
    for (std::uint64_t seed : {0ULL, 42ULL, 1234567ULL}) {
        const GradientEstimate par = estimate_gradient(bench.ps, mu, *dist, 257, seed);
        const GradientEstimate ser = estimate_gradient_serial(bench.ps, mu, *dist, 257, seed);
        CHECK(par.estimate == ser.estimate);  // exact equality, not approximate
        REQUIRE(par.samples.size() == ser.samples.size());
        for (std::size_t i = 0; i < par.samples.size(); ++i) {
            CHECK(par.samples[i].omega == ser.samples[i].omega);
            CHECK(par.samples[i].re_f == ser.samples[i].re_f);
        }
    }
}

TEST_CASE("estimates are deterministic per seed") {
    const ParametrizedSystem ps = scalar_gain_benchmark();
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(1, 1.5);
    const auto dist = log_uniform(1e-3, 1e3);
    const GradientEstimate a = estimate_gradient(ps, mu, *dist, 64, 9);
    const GradientEstimate b = estimate_gradient(ps, mu, *dist, 64, 9);
    const GradientEstimate c = estimate_gradient(ps, mu, *dist, 64, 10);
    CHECK(a.estimate == b.estimate);
    CHECK(a.estimate != c.estimate);
}

TEST_CASE("sample records reconstruct the estimate") {
    const ParametrizedSystem ps = scalar_gain_benchmark();
    const auto dist = log_uniform(1e-2, 1e2);
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(1, 2.0);

    SUBCASE("M=1 record reproduces the estimate exactly") {
        const GradientEstimate est = estimate_gradient(ps, mu, *dist, 1, 31);
        REQUIRE(est.records_complete());
        CHECK(est.recompute_from_samples() == est.estimate);
    }
    SUBCASE("record cap truncates storage but not the estimate") {
        EstimatorOptions opts;
        opts.record_cap = 8;
        const GradientEstimate est = estimate_gradient(ps, mu, *dist, 32, 31, opts);
        CHECK(est.samples.size() == 8);
        CHECK_FALSE(est.records_complete());
        CHECK(est.estimate.size() == 1);
    }
}

TEST_CASE("estimator mean approaches the oracle gradient") {
    // c(mu) = mu^2/4, gradient mu/2 -> 1.0 at mu = 2
    const ParametrizedSystem ps = scalar_gain_benchmark();
    const auto dist = log_uniform(1e-3, 1e3);
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(1, 2.0);
    const Eigen::VectorXd exact = exact_gradient(scalar_gain_realizable(), mu);
    CHECK(exact(0) == doctest::Approx(1.0).epsilon(1e-10));

    const BiasProbeResult probe = estimator_bias_probe(ps, mu, *dist, 4, 20000, exact, 13);
    CHECK(std::abs(probe.bias(0)) < 3.0 * probe.standard_error(0) + 1e-3);
}

TEST_CASE("support excluding the energy band produces detectable bias") {
    const ParametrizedSystem ps = scalar_gain_benchmark();
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(1, 2.0);
    const Eigen::VectorXd exact = exact_gradient(scalar_gain_realizable(), mu);
    const auto off_band = log_uniform(1e4, 1e6);  // system bandwidth is ~1 rad/s
    const BiasProbeResult probe = estimator_bias_probe(ps, mu, *off_band, 8, 4000, exact, 13);
    CHECK(std::abs(probe.bias(0)) > 3.0 * probe.standard_error(0));
    CHECK(probe.bias(0) < 0.0);  // the whole in-band mass is missing
}
