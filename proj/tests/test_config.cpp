#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sh2/config.hpp"
#include "sh2/matrix_market.hpp"

using namespace sh2;

TEST_CASE("config parsing") {
    const Config cfg = Config::from_string(
        "# experiment\n"
        "problem = scalar   # trailing comment\n"
        "samples= 25\n"
        "seed =7\n"
        "alpha = 1.5e-3\n"
        "mu0 = 1.0, -2.5 ,3\n");

    CHECK(cfg.get_string("problem") == "scalar");
    CHECK(cfg.get_int("samples") == 25);
    CHECK(cfg.get_u64("seed", 0) == 7);
    CHECK(cfg.get_double("alpha") == doctest::Approx(1.5e-3));
    const Eigen::VectorXd mu = cfg.get_vector("mu0");
    REQUIRE(mu.size() == 3);
    CHECK(mu(1) == -2.5);

    SUBCASE("missing keys fall back or throw") {
        CHECK(cfg.get_int("iterations", 42) == 42);
        CHECK_THROWS_AS((void)cfg.get_string("not-there"), ConfigError);
    }
}

TEST_CASE("config rejects malformed input") {
    CHECK_THROWS_AS((void)Config::from_string("no equals sign here\n"), ConfigError);
    CHECK_THROWS_AS((void)Config::from_string("a = 1\na = 2\n"), ConfigError);  // duplicate
    CHECK_THROWS_AS((void)Config::from_string("= 3\n"), ConfigError);           // empty key
    const Config cfg = Config::from_string("samples = ten\n");
    CHECK_THROWS_AS((void)cfg.get_int("samples"), ConfigError);
}

TEST_CASE("unknown keys are errors, not warnings") {
    const Config cfg = Config::from_string(
        "problem = scalar\niterations = 5\npolicy.kind = constant\npolicy.alpha0 = 0.1\n"
        "typo_key = 1\n");
    CHECK_THROWS_WITH_AS((void)build_run_setup(cfg), doctest::Contains("typo_key"), ConfigError);
}

TEST_CASE("run setup from a scalar config") {
    const Config cfg = Config::from_string(
        "problem = scalar\n"
        "iterations = 10\n"
        "trials = 3\n"
        "seed = 5\n"
        "samples = 4\n"
        "dist.kind = log-uniform\n"
        "dist.lo = 1e-3\n"
        "dist.hi = 1e3\n"
        "policy.kind = constant\n"
        "policy.alpha0 = 0.1\n"
        "out = /tmp/sh2_cfg_test\n");
    const RunSetup setup = build_run_setup(cfg);
    CHECK(setup.problem_name == "scalar");
    CHECK(setup.ps.n_params == 1);
    CHECK(setup.mu0(0) == 2.0);
    CHECK(setup.trials == 3);
    CHECK(setup.cost(setup.mu0) == doctest::Approx(1.0));  // mu^2/4 at mu = 2
    REQUIRE(setup.exact_gradient_fn);
    CHECK(setup.exact_gradient_fn(setup.mu0)(0) == doctest::Approx(1.0).epsilon(1e-10));

    SUBCASE("overrides replace config values") {
        const RunSetup o = build_run_setup(cfg, 99, 7, "/tmp/elsewhere");
        CHECK(o.seed == 99);
        CHECK(o.trials == 7);
        CHECK(o.out_dir == "/tmp/elsewhere");
    }
    SUBCASE("digest is stable and content-sensitive") {
        CHECK(cfg.digest() == Config::from_string(
                                  "problem = scalar\n"
                                  "iterations = 10\n"
                                  "trials = 3\n"
                                  "seed = 5\n"
                                  "samples = 4\n"
                                  "dist.kind = log-uniform\n"
                                  "dist.lo = 1e-3\n"
                                  "dist.hi = 1e3\n"
                                  "policy.kind = constant\n"
                                  "policy.alpha0 = 0.1\n"
                                  "out = /tmp/sh2_cfg_test\n")
                                  .digest());
        CHECK(cfg.digest() != Config::from_string("problem = scalar\n").digest());
    }
}

TEST_CASE("run setup validation errors") {
    CHECK_THROWS_AS((void)build_run_setup(Config::from_string(
                        "problem = unknown-problem\niterations = 1\n")),
                    ConfigError);
    CHECK_THROWS_AS((void)build_run_setup(Config::from_string(
                        "problem = scalar\niterations = 1\npolicy.kind = constant\n"
                        "policy.alpha0 = 0.1\nmu0 = 1,2\n")),  // wrong dimension
                    ConfigError);
    CHECK_THROWS_AS((void)build_run_setup(Config::from_string(
                        "problem = scalar\niterations = 1\npolicy.kind = warp\n")),
                    ConfigError);
    CHECK_THROWS_AS((void)build_run_setup(Config::from_string(
                        "problem = scalar\niterations = 1\npolicy.kind = constant\n"
                        "policy.alpha0 = 0.1\ndist.kind = normal\n")),
                    ConfigError);
}

TEST_CASE("tabulated distribution from a CSV table") {
    namespace fs = std::filesystem;
    const std::string table = (fs::temp_directory_path() / "sh2_dist_table.csv").string();
    {
        std::ofstream out(table);
        out << "# omega, weight\n0.0, 0.0\n1.0, 1.0\n2.0, 1.0\n3.0, 0.0\n";
    }
    const Config cfg = Config::from_string(
        "problem = scalar\niterations = 1\npolicy.kind = constant\npolicy.alpha0 = 0.1\n"
        "dist.kind = table\ndist.table = " +
        table + "\n");
    const RunSetup setup = build_run_setup(cfg);
    CHECK(setup.dist->bounded());
    CHECK(setup.dist->magnitude_support().hi == doctest::Approx(3.0));
    fs::remove(table);
}

TEST_CASE("observer config loads Matrix Market plants") {
    namespace fs = std::filesystem;
    const auto p = [](const std::string& n) {
        return (fs::temp_directory_path() / n).string();
    };
    const int n = 40;
    Eigen::SparseMatrix<double> E(n, n), A(n, n);
    E.setIdentity();
    for (int i = 0; i < n; ++i) {
        A.insert(i, i) = -2.0 * n * n * 1e-2;
        if (i > 0) A.insert(i, i - 1) = n * n * 1e-2;
        if (i + 1 < n) A.insert(i, i + 1) = n * n * 1e-2;
    }
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, 1);
    B(n / 3, 0) = 1.0;
    Eigen::MatrixXd Cz = Eigen::MatrixXd::Zero(1, n), Cy = Eigen::MatrixXd::Zero(1, n);
    Cz(0, 9 * n / 10) = 1.0;
    Cy(0, 7 * n / 10) = 1.0;
    write_matrix_market(E, p("sh2_E.mtx"));
    write_matrix_market(A, p("sh2_A.mtx"));
    write_matrix_market(B, p("sh2_B.mtx"));
    write_matrix_market(Cz, p("sh2_Cz.mtx"));
    write_matrix_market(Cy, p("sh2_Cy.mtx"));

    const Config cfg = Config::from_string(
        "problem = observer\nobserver.order = 2\n"
        "observer.e_file = " + p("sh2_E.mtx") + "\n" +
        "observer.a_file = " + p("sh2_A.mtx") + "\n" +
        "observer.b_file = " + p("sh2_B.mtx") + "\n" +
        "observer.cz_file = " + p("sh2_Cz.mtx") + "\n" +
        "observer.cy_file = " + p("sh2_Cy.mtx") + "\n" +
        "iterations = 1\npolicy.kind = observer\n");
    const RunSetup setup = build_run_setup(cfg);
    CHECK(setup.ps.n_params == 10);
    CHECK(std::isfinite(setup.cost(setup.mu0)));
    for (const auto& f : {"sh2_E.mtx", "sh2_A.mtx", "sh2_B.mtx", "sh2_Cz.mtx", "sh2_Cy.mtx"})
        fs::remove(p(f));
}
