// sh2opt: stochastic H2-norm optimization for parametrized LTI systems.
//
// Subcommands: optimize, bode, verify, h2norm, grad-check. Runs are fully
// determined by (config file, seed); see README for the config keys.

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "sh2/config.hpp"
#include "sh2/estimator.hpp"
#include "sh2/optimizer.hpp"
#include "sh2/rng.hpp"
#include "sh2/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "sh2opt 0.1.0";

void apply_threads(std::optional<int> threads_flag) {
    if (threads_flag) {
        omp_set_num_threads(*threads_flag);
        return;
    }
    if (const char* env = std::getenv("SH2OPT_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
}

struct TrialOutcome {
    sh2::RunRecord record;
    std::string error;  // empty on success
    bool ok() const { return error.empty(); }
};

int cmd_optimize(const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::optional<int> trials, std::optional<std::string> out) {
    const sh2::Config cfg = sh2::Config::from_file(config_path);
    const sh2::RunSetup setup = sh2::build_run_setup(cfg, seed, trials, out);

    fs::create_directories(setup.out_dir);
    {  // artifact completeness: config copy travels with the results
        std::ifstream src(config_path, std::ios::binary);
        std::ofstream dst(fs::path(setup.out_dir) / "config.txt", std::ios::binary);
        dst << src.rdbuf();
    }

    sh2::CheckpointConfig checkpoints;
    checkpoints.every = setup.checkpoint_every;
    checkpoints.cost = setup.cost;
    checkpoints.divergence_bound = setup.divergence_bound;

    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(setup.trials));
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < setup.trials; ++t) {
        try {
            outcomes[static_cast<std::size_t>(t)].record =
                sh2::sgd_run(setup.ps, setup.mu0, setup.policy, *setup.dist, setup.sample_count,
                             setup.iterations, sh2::derive_seed(setup.seed, t), checkpoints);
        } catch (const std::exception& e) {
            outcomes[static_cast<std::size_t>(t)].error = e.what();
        }
    }

    // per-trial trajectories + checkpoint-cost summary across trials
    std::map<int, std::vector<double>> costs_by_iteration;
    json trial_meta = json::array();
    for (int t = 0; t < setup.trials; ++t) {
        const TrialOutcome& outcome = outcomes[static_cast<std::size_t>(t)];
        char name[64];
        std::snprintf(name, sizeof(name), "trial_%03d.csv", t);
        json entry{{"trial", t}, {"file", name}, {"seed", sh2::derive_seed(setup.seed, t)}};
        if (outcome.ok()) {
            sh2::write_run_record(outcome.record, (fs::path(setup.out_dir) / name).string(),
                                  setup.config_digest);
            for (const sh2::CheckpointEntry& cp : outcome.record.checkpoints)
                costs_by_iteration[cp.iteration].push_back(cp.cost);
            entry["termination"] = outcome.record.termination_reason;
        } else {
            entry["error"] = outcome.error;
            std::cerr << "trial " << t << " failed: " << outcome.error << "\n";
        }
        trial_meta.push_back(entry);
    }

    {
        std::ofstream summary(fs::path(setup.out_dir) / "summary.csv");
        summary.precision(17);
        summary << "iteration,trials,mean_cost,min_cost,max_cost\n";
        for (const auto& [iteration, costs] : costs_by_iteration) {
            double sum = 0.0, lo = costs.front(), hi = costs.front();
            for (const double c : costs) {
                sum += c;
                lo = std::min(lo, c);
                hi = std::max(hi, c);
            }
            summary << iteration << "," << costs.size() << "," << sum / costs.size() << "," << lo
                    << "," << hi << "\n";
        }
    }

    json meta{{"version", kVersion},
              {"problem", setup.problem_name},
              {"config", "config.txt"},
              {"config_digest", setup.config_digest},
              {"seed", setup.seed},
              {"trials", setup.trials},
              {"samples", setup.sample_count},
              {"iterations", setup.iterations},
              {"distribution", setup.dist->describe()},
              {"policy", setup.policy.describe()},
              {"summary", "summary.csv"},
              {"trial_runs", trial_meta}};
    std::ofstream(fs::path(setup.out_dir) / "run.meta.json") << meta.dump(2) << "\n";

    int failed = 0;
    for (const TrialOutcome& outcome : outcomes)
        if (!outcome.ok()) ++failed;
    std::cout << setup.trials - failed << "/" << setup.trials << " trials completed; artifacts in "
              << setup.out_dir << "\n";
    return failed == setup.trials && setup.trials > 0 ? 1 : 0;
}

int cmd_bode(const std::string& config_path, double wmin, double wmax, int points,
             std::optional<std::string> out) {
    const sh2::Config cfg = sh2::Config::from_file(config_path);
    const sh2::RunSetup setup = sh2::build_run_setup(cfg, std::nullopt, std::nullopt, out);

    const sh2::JointEvaluation probe = setup.ps.evaluate_joint(setup.mu0, wmin);
    const Eigen::Index ny = probe.value.rows(), nu = probe.value.cols();

    fs::create_directories(setup.out_dir);
    std::ofstream csv(fs::path(setup.out_dir) / "bode.csv");
    csv.precision(17);
    csv << "omega";
    for (Eigen::Index i = 0; i < ny; ++i)
        for (Eigen::Index j = 0; j < nu; ++j) csv << ",mag_" << i + 1 << "_" << j + 1;
    csv << "\n";

    int failures = 0;
    for (int k = 0; k < points; ++k) {
        const double t = points > 1 ? static_cast<double>(k) / (points - 1) : 0.0;
        const double omega = wmin * std::pow(wmax / wmin, t);
        csv << omega;
        try {
            const sh2::JointEvaluation je = setup.ps.evaluate_joint(setup.mu0, omega);
            double peak = 0.0;
            for (Eigen::Index i = 0; i < ny; ++i)
                for (Eigen::Index j = 0; j < nu; ++j) {
                    const double mag = std::abs(je.value(i, j));
                    peak = std::max(peak, mag);
                    csv << "," << mag;
                }
            if (peak > 1e8)
                std::cerr << "warning: near-singular response |G| = " << peak
                          << " at omega = " << omega << " (resonance?)\n";
        } catch (const std::exception& e) {
            ++failures;
            for (Eigen::Index c = 0; c < ny * nu; ++c) csv << ",nan";
            std::cerr << "evaluation failed at omega = " << omega << ": " << e.what() << "\n";
        }
        csv << "\n";
    }
    std::cout << "wrote " << (fs::path(setup.out_dir) / "bode.csv").string() << " (" << points
              << " points, " << failures << " failures)\n";
    return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
    std::vector<std::string> selected;
    if (suite == "all")
        selected = sh2::suite_names();
    else
        selected.push_back(suite);

    bool all_passed = true;
    for (const std::string& name : selected) {
        const sh2::SuiteResult res = sh2::run_suite(name, seed);
        std::cout << (res.passed ? "PASS" : "FAIL") << " " << res.name << ": " << res.details
                  << "\n";
        all_passed = all_passed && res.passed;
    }
    return all_passed ? 0 : 1;
}

Eigen::VectorXd resolve_mu(const sh2::RunSetup& setup, const std::string& mu_flag) {
    if (mu_flag.empty()) return setup.mu0;
    const sh2::Config inline_cfg = sh2::Config::from_string("mu=" + mu_flag, "--mu");
    Eigen::VectorXd mu = inline_cfg.get_vector("mu");
    if (mu.size() != setup.ps.n_params)
        throw std::runtime_error("--mu must have " + std::to_string(setup.ps.n_params) +
                                 " entries");
    return mu;
}

int cmd_h2norm(const std::string& config_path, const std::string& mu_flag) {
    const sh2::Config cfg = sh2::Config::from_file(config_path);
    const sh2::RunSetup setup = sh2::build_run_setup(cfg);
    const Eigen::VectorXd mu = resolve_mu(setup, mu_flag);
    const double cost = setup.cost(mu);
    std::cout.precision(12);
    std::cout << "cost c(mu) = " << cost << "\n";
    std::cout << "||G(mu)||_H2 = " << std::sqrt(2.0 * cost) << "\n";
    return std::isfinite(cost) ? 0 : 2;
}

int cmd_grad_check(const std::string& config_path, const std::string& mu_flag,
                   std::optional<std::uint64_t> seed, int repetitions) {
    const sh2::Config cfg = sh2::Config::from_file(config_path);
    const sh2::RunSetup setup = sh2::build_run_setup(cfg, seed);
    const Eigen::VectorXd mu = resolve_mu(setup, mu_flag);

    Eigen::VectorXd reference(setup.ps.n_params);
    std::string reference_kind;
    if (setup.exact_gradient_fn) {
        reference = setup.exact_gradient_fn(mu);
        reference_kind = "oracle gradient";
    } else {  // central differences on the exact cost
        const double h = 1e-6;
        for (int j = 0; j < setup.ps.n_params; ++j) {
            Eigen::VectorXd lo = mu, hi = mu;
            hi[j] += h;
            lo[j] -= h;
            reference[j] = (setup.cost(hi) - setup.cost(lo)) / (2.0 * h);
        }
        reference_kind = "finite-difference gradient of the exact cost";
    }

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(setup.ps.n_params);
    for (int r = 0; r < repetitions; ++r) {
        mean += sh2::estimate_gradient(setup.ps, mu, *setup.dist, setup.sample_count,
                                       sh2::derive_seed(setup.seed, r), {0})
                    .estimate;
    }
    mean /= repetitions;

    std::cout.precision(12);
    std::cout << "reference (" << reference_kind << "): " << reference.transpose() << "\n";
    std::cout << "estimator mean (" << repetitions << " x M=" << setup.sample_count
              << "): " << mean.transpose() << "\n";
    const double rel = (mean - reference).norm() / std::max(reference.norm(), 1e-300);
    std::cout << "relative deviation: " << rel << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kVersion) +
                 " - stochastic H2 optimization of parametrized LTI systems"};
    app.require_subcommand(1);

    std::string config_path, out_flag, mu_flag, suite = "all";
    std::optional<std::uint64_t> seed_flag;
    std::optional<int> trials_flag, threads_flag;
    std::uint64_t verify_seed = 0;
    double wmin = 1e-2, wmax = 1e4;
    int points = 20, repetitions = 1000;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "run configuration file");
        if (needs_config) opt->required();
        cmd->add_option("--threads", threads_flag,
                        "worker thread count (default: SH2OPT_THREADS or all cores)");
    };

    auto* optimize = app.add_subcommand("optimize", "run seeded SGD trials from a config");
    add_common(optimize, true);
    optimize->add_option("--seed", seed_flag, "override the config seed");
    optimize->add_option("--trials", trials_flag, "override the config trial count");
    optimize->add_option("--out", out_flag, "override the output directory");

    auto* bode = app.add_subcommand("bode", "sweep |G(mu_0; i*omega)| for support selection");
    add_common(bode, true);
    bode->add_option("--wmin", wmin, "lowest frequency (rad/s)");
    bode->add_option("--wmax", wmax, "highest frequency (rad/s)");
    bode->add_option("--points", points, "number of log-spaced points");
    bode->add_option("--out", out_flag, "output directory");

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite,
                       "unbiasedness | variance | stability | lemma | oracle-agreement | all");
    verify->add_option("--seed", verify_seed, "suite seed");
    add_common(verify, false);

    auto* h2norm = app.add_subcommand("h2norm", "exact H2 norm of the config's system at mu");
    add_common(h2norm, true);
    h2norm->add_option("--mu", mu_flag, "comma-separated parameter vector (default mu_0)");

    auto* gradcheck = app.add_subcommand("grad-check", "estimator mean vs exact gradient at mu");
    add_common(gradcheck, true);
    gradcheck->add_option("--mu", mu_flag, "comma-separated parameter vector (default mu_0)");
    gradcheck->add_option("--seed", seed_flag, "override the config seed");
    gradcheck->add_option("--repetitions", repetitions, "number of averaged estimates");

    CLI11_PARSE(app, argc, argv);
    apply_threads(threads_flag);

    try {
        if (optimize->parsed()) {
            return cmd_optimize(config_path, seed_flag, trials_flag,
                                out_flag.empty() ? std::nullopt : std::optional(out_flag));
        }
        if (bode->parsed()) {
            return cmd_bode(config_path, wmin, wmax, points,
                            out_flag.empty() ? std::nullopt : std::optional(out_flag));
        }
        if (verify->parsed()) return cmd_verify(suite, verify_seed);
        if (h2norm->parsed()) return cmd_h2norm(config_path, mu_flag);
        if (gradcheck->parsed())
            return cmd_grad_check(config_path, mu_flag, seed_flag, repetitions);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
