#include <doctest.h>

#include <cmath>

#include "sh2/benchmarks.hpp"
#include "sh2/estimator.hpp"
#include "sh2/oracle.hpp"

using namespace sh2;

TEST_CASE("wave plant frequency response") {
    SUBCASE("phi = 0 guard (undamped, omega = 0)") {
        CHECK(wave_plant_value(0.0, 0.0) == Complex(1.0, 0.0));
    }
    SUBCASE("static compliance is exactly 1") {
        // tanh(phi)/phi -> 1 as omega -> 0 (phi(0) = 0 for the damped PDE too)
        CHECK(std::abs(wave_plant_value(0.0, 0.25) - 1.0) < 1e-12);
    }
    SUBCASE("independently computed reference values (arbitrary precision)") {
        const Complex p1 = wave_plant_value(1.0, 0.25);
        CHECK(p1.real() == doctest::Approx(1.5189491927509958).epsilon(1e-14));
        CHECK(p1.imag() == doctest::Approx(-0.22696392386173256).epsilon(1e-14));
        const Complex p5 = wave_plant_value(5.0, 0.25);
        CHECK(p5.real() == doctest::Approx(-0.55644827680498211).epsilon(1e-13));
        CHECK(p5.imag() == doctest::Approx(-0.27413022891222101).epsilon(1e-13));
    }
    SUBCASE("high-frequency decay") {
        CHECK(std::abs(wave_plant_value(1e4, 0.25)) ==
              doctest::Approx(3.4394509576697371e-5).epsilon(1e-10));
        CHECK(std::abs(wave_plant_value(1e4, 0.25)) < 1e-3);
    }
}

TEST_CASE("wave closed-loop joint evaluation") {
    WaveEquationProblem wave;
    const ParametrizedSystem ps = wave.parametrized();
    Eigen::VectorXd mu(2);
    mu << -1.0, -2.0;

    SUBCASE("value against an independent reference at omega = 3") {
        const JointEvaluation je = ps.joint(mu, 3.0);
        CHECK(je.value(0, 0).real() == doctest::Approx(-0.043591194452803305).epsilon(1e-13));
        CHECK(je.value(0, 0).imag() == doctest::Approx(-0.048037003411425079).epsilon(1e-13));
        CHECK(je.value(1, 0).real() == doctest::Approx(0.040789959509581746).epsilon(1e-13));
        CHECK(je.value(1, 0).imag() == doctest::Approx(0.050736512126889924).epsilon(1e-13));
    }
    SUBCASE("joint path equals the generic interconnection path") {
        const SystemPtr built = ps.build(mu);
        for (double omega : {0.05, 1.0, 20.0}) {
            CHECK((ps.joint(mu, omega).value - built->evaluate(omega)).norm() < 1e-13);
        }
    }
    SUBCASE("gradients match central differences") {
        CHECK(parameter_gradient_fd_check(ps, mu, 0.7, 1e-6) < 1e-7);
    }
}

TEST_CASE("finite-difference wave model") {
    const DenseRealization fd = wave_fd_discretize(400);

    SUBCASE("open-loop discretization is stable") {
        CHECK(spectral_abscissa(fd.A) < 0.0);
    }
    SUBCASE("frequency response matches the analytic plant") {
        for (double omega : {0.1, 1.0, 10.0}) {
            const Complex approx = fd.evaluate(omega)(0, 0);
            const Complex exact = wave_plant_value(omega, 0.25);
            CHECK(std::abs(approx - exact) / std::abs(exact) < 1e-2);
        }
    }
    SUBCASE("DC gain matches the static compliance") {
        CHECK(std::abs(fd.evaluate(0.0)(0, 0) - wave_plant_value(0.0, 0.25)) < 1e-2);
    }
    SUBCASE("dimension validation") {
        CHECK_THROWS(wave_fd_discretize(3));
        CHECK_THROWS(wave_fd_discretize(7));  // odd
    }
}

TEST_CASE("wave closed-loop realization") {
    const DenseRealization fd = wave_fd_discretize(80);
    SUBCASE("mu = 0 reproduces the open loop on the y channel") {
        const DenseRealization cl = wave_closed_loop(fd, Eigen::VectorXd::Zero(2));
        for (double omega : {0.0, 0.5, 7.0}) {
            CHECK(std::abs(cl.evaluate(omega)(0, 0) - fd.evaluate(omega)(0, 0)) < 1e-10);
            CHECK(std::abs(cl.evaluate(omega)(1, 0)) < 1e-10);  // u = 0
        }
    }
    SUBCASE("closed-loop transfer matches the analytic loop formula") {
        Eigen::VectorXd mu(2);
        mu << -0.8, -0.4;
        const DenseRealization cl = wave_closed_loop(fd, mu);
        WaveEquationProblem wave;
        for (double omega : {0.3, 2.0}) {
            const Complex phi_fd = fd.evaluate(omega)(0, 0);
            const Complex k = wave.controller(mu, omega);
            const Complex y_expected = phi_fd / (1.0 - phi_fd * k);
            CHECK(std::abs(cl.evaluate(omega)(0, 0) - y_expected) < 1e-9);
            CHECK(std::abs(cl.evaluate(omega)(1, 0) - k * y_expected) < 1e-9);
        }
    }
}

TEST_CASE("wave disturbance simulation") {
    const DenseRealization fd = wave_fd_discretize(40);
    Eigen::VectorXd mu(2);
    mu << -0.5, -0.3;
    const SimulationResult sim = simulate_wave_disturbance(wave_closed_loop(fd, mu), 2.0, 1e-3);
    REQUIRE(sim.t.size() == 2001);
    CHECK(sim.y.size() == sim.t.size());
    CHECK(sim.u.size() == sim.t.size());
    CHECK(sim.y.front() == 0.0);
    double peak = 0.0;
    for (const double y : sim.y) peak = std::max(peak, std::abs(y));
    CHECK(peak > 0.0);
    CHECK(peak < 100.0);  // damped response stays bounded
}

TEST_CASE("observer parameter packing") {
    ObserverMatrices k;
    k.A_q.resize(2, 2);
    k.A_q << 1, 2, 3, 4;
    k.B_q.resize(2, 2);
    k.B_q << 5, 6, 7, 8;
    k.C_q.resize(2);
    k.C_q << 9, 10;
    const Eigen::VectorXd mu = pack_observer(k);
    REQUIRE(mu.size() == 10);
    // column-major over [A_q B_q C_q^T]
    CHECK(mu(0) == 1);
    CHECK(mu(1) == 3);
    CHECK(mu(2) == 2);
    CHECK(mu(3) == 4);
    CHECK(mu(4) == 5);
    CHECK(mu(5) == 7);
    CHECK(mu(6) == 6);
    CHECK(mu(7) == 8);
    CHECK(mu(8) == 9);
    CHECK(mu(9) == 10);
    const ObserverMatrices back = unpack_observer(mu, 2);
    CHECK(back.A_q == k.A_q);
    CHECK(back.B_q == k.B_q);
    CHECK(back.C_q == k.C_q);
    CHECK_THROWS(unpack_observer(mu, 3));
}

TEST_CASE("observer problem at desk scale") {
    const ObserverProblem prob = build_observer_problem_synthetic(200, 2);
    CHECK(prob.n_params() == 10);

    SUBCASE("r=1 dimension count") {
        CHECK(build_observer_problem_synthetic(200, 1).n_params() == 4);
    }
    SUBCASE("normalization: trivial observer has unit error norm") {
        ObserverMatrices k;
        k.A_q = -1e-9 * Eigen::MatrixXd::Identity(2, 2);
        k.B_q = Eigen::MatrixXd::Zero(2, 2);
        k.C_q = Eigen::RowVectorXd::Zero(2);
        const double cost = prob.cost_quadrature(pack_observer(k));
        CHECK(std::sqrt(2.0 * cost) == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("zero observer output leaves only the z channels") {
        ObserverMatrices k;
        k.A_q = -Eigen::MatrixXd::Identity(2, 2);
        k.B_q = Eigen::MatrixXd::Ones(2, 2);
        k.C_q = Eigen::RowVectorXd::Zero(2);  // zhat = 0
        const JointEvaluation je = prob.parametrized().joint(pack_observer(k), 0.5);
        CHECK(std::abs(je.value(0, 0) - je.value(0, 1)) < 1e-14);  // w and u channels equal
        CHECK(std::abs(je.value(0, 2)) == 0.0);                    // v channel zero
    }
    SUBCASE("joint gradients match central differences") {
        const Eigen::VectorXd mu = initialize_observer(prob);
        CHECK(parameter_gradient_fd_check(prob.parametrized(), mu, 1.3, 1e-6) < 1e-6);
    }
    SUBCASE("dense oracle view agrees with the joint evaluator") {
        const Eigen::VectorXd mu = initialize_observer(prob);
        const RealizableParametrizedSystem oracle = prob.realizable();
        const ParametrizedSystem ps = prob.parametrized();
        for (double omega : {0.0, 0.2, 5.0}) {
            const JointEvaluation je = ps.joint(mu, omega);
            CHECK((oracle.realize(mu).evaluate(omega) - je.value).norm() < 1e-9);
            for (int j : {0, 4, 9}) {
                CHECK((oracle.realize_gradient(mu, j).evaluate(omega) -
                       je.gradients[static_cast<std::size_t>(j)])
                          .norm() < 1e-9);
            }
        }
    }
    SUBCASE("quadrature cost agrees with the Lyapunov cost") {
        const Eigen::VectorXd mu = initialize_observer(prob);
        const double quad = prob.cost_quadrature(mu, 1e-8);
        const double lyap = h2_cost(prob.realizable().realize(mu));
        CHECK(quad == doctest::Approx(lyap).epsilon(1e-4));
    }
    SUBCASE("oracle gradient agrees with the estimator's exact integrand structure") {
        const Eigen::VectorXd mu = initialize_observer(prob);
        const Eigen::VectorXd g = exact_gradient(prob.realizable(), mu);
        const double h = 1e-5;
        for (int j : {2, 5, 8}) {
            Eigen::VectorXd hi = mu, lo = mu;
            hi[j] += h;
            lo[j] -= h;
            const double fd = (h2_cost(prob.realizable().realize(hi)) -
                               h2_cost(prob.realizable().realize(lo))) /
                              (2.0 * h);
            CHECK(g(j) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("observer initialization") {
    const ObserverProblem prob = build_observer_problem_synthetic(200, 2);
    SUBCASE("surrogate design is stable and beats the trivial observer") {
        const Eigen::VectorXd mu0 = initialize_observer(prob);
        const ObserverMatrices k = unpack_observer(mu0, 2);
        CHECK(spectral_abscissa(k.A_q) < 0.0);
        const double norm0 = std::sqrt(2.0 * prob.cost_quadrature(mu0));
        CHECK(norm0 < 1.0);  // ||G(mu_0)|| < ||G(0)|| = 1
    }
    SUBCASE("r=0 rejected") {
        CHECK_THROWS((void)build_observer_problem_synthetic(200, 0));
    }
    SUBCASE("explicit mu_0 bypasses the design") {
        ObserverMatrices k;
        k.A_q = -2.0 * Eigen::MatrixXd::Identity(2, 2);
        k.B_q = Eigen::MatrixXd::Zero(2, 2);
        k.C_q = Eigen::RowVectorXd::Zero(2);
        const Eigen::VectorXd mu = pack_observer(k);
        CHECK(initialize_observer(prob, mu) == mu);
    }
    SUBCASE("unstable explicit mu_0 rejected") {
        ObserverMatrices k;
        k.A_q = Eigen::MatrixXd::Identity(2, 2);
        k.B_q = Eigen::MatrixXd::Zero(2, 2);
        k.C_q = Eigen::RowVectorXd::Zero(2);
        CHECK_THROWS((void)initialize_observer(prob, pack_observer(k)));
    }
}

TEST_CASE("scalar and random benchmarks") {
    SUBCASE("scalar benchmark closed forms") {
        const RealizableParametrizedSystem oracle = scalar_gain_realizable();
        CHECK(h2_cost(oracle.realize(Eigen::VectorXd::Constant(1, 2.0))) ==
              doctest::Approx(1.0).epsilon(1e-12));  // mu^2/4
        CHECK(exact_gradient(oracle, Eigen::VectorXd::Constant(1, 3.0))(0) ==
              doctest::Approx(1.5).epsilon(1e-10));  // mu/2
    }
    SUBCASE("random affine benchmark is internally consistent") {
        const RandomAffineBenchmark bench = random_affine_benchmark(8, 3, 4);
        Eigen::VectorXd mu(3);
        mu << 0.1, -0.4, 0.7;
        CHECK(parameter_gradient_fd_check(bench.ps, mu, 2.1, 1e-6) < 1e-8);
        for (double omega : {0.0, 1.1}) {
            CHECK((bench.oracle.realize(mu).evaluate(omega) - bench.ps.joint(mu, omega).value)
                      .norm() < 1e-11);
        }
        CHECK(bench.oracle.realize(mu).A == bench.oracle.realize(2.0 * mu).A);  // affine in C only
    }
}
