#include "sh2/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sh2 {

StepSizePolicy StepSizePolicy::constant(double alpha0) {
    if (!(alpha0 >= 0.0)) throw std::invalid_argument("step size must be nonnegative");
    StepSizePolicy p;
    p.kind_ = Kind::Constant;
    p.alpha0_ = alpha0;
    p.description_ = "constant " + std::to_string(alpha0);
    return p;
}

StepSizePolicy StepSizePolicy::power_law(double alpha0, double exponent) {
    if (!(alpha0 >= 0.0) || !(exponent > 0.0))
        throw std::invalid_argument("power_law: need alpha0 >= 0 and p > 0");
    StepSizePolicy p;
    p.kind_ = Kind::PowerLaw;
    p.alpha0_ = alpha0;
    p.p_ = exponent;
    p.description_ = "power-law " + std::to_string(alpha0) + "/(k+1)^" + std::to_string(exponent);
    return p;
}

StepSizePolicy StepSizePolicy::piecewise(std::vector<std::pair<int, double>> breakpoints) {
    if (breakpoints.empty()) throw std::invalid_argument("piecewise: empty breakpoint list");
    StepSizePolicy p;
    p.kind_ = Kind::Piecewise;
    p.breakpoints_ = std::move(breakpoints);
    p.description_ = "piecewise (" + std::to_string(p.breakpoints_.size()) + " segments)";
    return p;
}

StepSizePolicy StepSizePolicy::explicit_list(std::vector<double> alphas) {
    if (alphas.empty()) throw std::invalid_argument("explicit_list: empty");
    StepSizePolicy p;
    p.kind_ = Kind::Explicit;
    p.explicit_ = std::move(alphas);
    p.description_ = "explicit list (" + std::to_string(p.explicit_.size()) + " entries)";
    return p;
}

StepSizePolicy StepSizePolicy::custom(std::function<double(int)> rule, std::string description) {
    if (!rule) throw std::invalid_argument("custom: missing rule");
    StepSizePolicy p;
    p.kind_ = Kind::Custom;
    p.custom_ = std::move(rule);
    p.description_ = std::move(description);
    return p;
}

StepSizePolicy StepSizePolicy::halving(double alpha0, int period) {
    if (period < 1) throw std::invalid_argument("halving: period must be >= 1");
    StepSizePolicy p = custom(
        [alpha0, period](int k) { return alpha0 * std::pow(0.5, k / period); },
        "alpha0 " + std::to_string(alpha0) + " halved every " + std::to_string(period));
    return p;
}

double StepSizePolicy::at(int k) const {
    if (k < 0) throw std::invalid_argument("step index must be nonnegative");
    double a = 0.0;
    switch (kind_) {
        case Kind::Constant:
            a = alpha0_;
            break;
        case Kind::PowerLaw:
            a = alpha0_ / std::pow(static_cast<double>(k + 1), p_);
            break;
        case Kind::Piecewise: {
            a = breakpoints_.back().second;
            for (const auto& [upto, value] : breakpoints_) {
                if (k < upto) {
                    a = value;
                    break;
                }
            }
            break;
        }
        case Kind::Explicit:
            a = k < static_cast<int>(explicit_.size()) ? explicit_[static_cast<std::size_t>(k)]
                                                       : 0.0;
            break;
        case Kind::Custom:
            a = custom_(k);
            break;
    }
    if (a < 0.0) throw std::logic_error("step size policy produced a negative step");
    return std::min(a, alpha_cap);
}

double StepSizePolicy::sum_squares(std::optional<long> horizon) const {
    const double inf = std::numeric_limits<double>::infinity();
    if (horizon) {
        double s = 0.0;
        for (long k = 0; k < *horizon; ++k) {
            const double a = at(static_cast<int>(k));
            s += a * a;
        }
        return s;
    }
    switch (kind_) {
        case Kind::Constant:
            return alpha0_ == 0.0 ? 0.0 : inf;
        case Kind::Piecewise:
            return breakpoints_.back().second == 0.0 ? sum_squares(long{breakpoints_.back().first})
                                                     : inf;
        case Kind::Explicit: {
            double s = 0.0;
            for (double a : explicit_) s += a * a;
            return s;
        }
        case Kind::PowerLaw: {
            if (p_ <= 0.5) return inf;
            // partial sum plus integral tail bound for sum_{k>K} k^{-2p}
            const long cutoff = 200000;
            double s = 0.0;
            for (long k = 0; k < cutoff; ++k)
                s += std::pow(static_cast<double>(k + 1), -2.0 * p_);
            s += std::pow(static_cast<double>(cutoff), 1.0 - 2.0 * p_) / (2.0 * p_ - 1.0);
            return alpha0_ * alpha0_ * s;
        }
        case Kind::Custom: {
            // numeric partial sum; tail estimated from the last term assuming
            // alpha_k ~ c/k decay
            const long cutoff = 1000000;
            double s = 0.0;
            for (long k = 0; k < cutoff; ++k) {
                const double a = at(static_cast<int>(k));
                s += a * a;
            }
            const double last = at(static_cast<int>(cutoff - 1));
            s += last * last * static_cast<double>(cutoff);
            return s;
        }
    }
    return inf;
}

namespace {

RunRecord run_loop(const std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>& gradient,
                   const ParameterBox& domain, const Eigen::VectorXd& mu0,
                   const StepSizePolicy& policy, int iteration_limit,
                   const CheckpointConfig& ckpt, std::uint64_t seed, int sample_count) {
    if (iteration_limit < 0) throw std::invalid_argument("sgd_run: negative iteration limit");
    RunRecord record;
    record.seed = seed;
    record.sample_count = sample_count;
    record.iterates.push_back(mu0);
    record.termination_reason = "iteration limit";

    auto checkpoint = [&](int k, const Eigen::VectorXd& mu) -> bool {
        if (ckpt.every <= 0 || !ckpt.cost) return true;
        if (k % ckpt.every != 0 && k != iteration_limit) return true;
        const double cost = ckpt.cost(mu);
        record.checkpoints.push_back({k, cost});
        return cost <= ckpt.divergence_bound;
    };
    if (!checkpoint(0, mu0)) {
        record.termination_reason = "checkpoint cost exceeded divergence bound at k=0";
        return record;
    }

    Eigen::VectorXd mu = mu0;
    for (int k = 0; k < iteration_limit; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Eigen::VectorXd grad;
        try {
            grad = gradient(mu, k);
        } catch (const std::exception& e) {
            record.termination_reason = std::string("evaluation failure at k=") +
                                        std::to_string(k) + ": " + e.what();
            return record;
        }
        const double alpha = policy.at(k);
        Eigen::VectorXd next = mu - alpha * grad;
        bool projected = false;
        if (domain.dimension() > 0 && domain.is_proper() && !domain.contains(next)) {
            next = domain.project(next);
            projected = true;
        }
        record.step_sizes.push_back(alpha);
        record.estimates.push_back(grad);
        record.estimate_norms.push_back(grad.norm());
        record.projection_active.push_back(projected);
        record.iterates.push_back(next);
        record.wall_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        mu = next;
        if (!checkpoint(k + 1, mu)) {
            record.termination_reason =
                "checkpoint cost exceeded divergence bound at k=" + std::to_string(k + 1);
            return record;
        }
    }
    return record;
}

}  // namespace

RunRecord sgd_run(const ParametrizedSystem& ps, const Eigen::VectorXd& mu0,
                  const StepSizePolicy& policy, const SamplingDistribution& dist, int sample_count,
                  int iteration_limit, std::uint64_t seed, const CheckpointConfig& checkpoints) {
    ps.require_in_domain(mu0);
    EstimatorOptions opts;
    opts.record_cap = 0;  // the RunRecord stores the per-iteration estimate itself
    auto gradient = [&](const Eigen::VectorXd& mu, int k) {
        return estimate_gradient(ps, mu, dist, sample_count, derive_seed(seed, k), opts).estimate;
    };
    return run_loop(gradient, ps.domain, mu0, policy, iteration_limit, checkpoints, seed,
                    sample_count);
}

RunRecord sgd_run_exact(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
                        const ParameterBox& domain, const Eigen::VectorXd& mu0,
                        const StepSizePolicy& policy, int iteration_limit,
                        const CheckpointConfig& checkpoints) {
    auto wrapped = [&](const Eigen::VectorXd& mu, int) { return gradient(mu); };
    return run_loop(wrapped, domain, mu0, policy, iteration_limit, checkpoints, 0, 0);
}

StabilityBudget stability_budget(double lipschitz_K, double smoothness_L, double sigma,
                                 double delta, double epsilon) {
    if (!(lipschitz_K > 0.0) || !(smoothness_L > 0.0) || !(sigma >= 0.0) || !(delta > 0.0) ||
        !(epsilon > 0.0))
        throw std::invalid_argument("stability_budget: inputs must be positive (sigma >= 0)");
    if (!std::isfinite(lipschitz_K) || !std::isfinite(smoothness_L) || !std::isfinite(sigma))
        throw std::invalid_argument("stability_budget: inputs must be finite");
    StabilityBudget budget;
    budget.r_star = lipschitz_K * lipschitz_K * sigma * sigma +
                    2.0 * smoothness_L * (lipschitz_K * lipschitz_K + sigma * sigma);
    budget.sum_sq_budget = delta * epsilon / budget.r_star;
    budget.alpha_cap = 1.0 / smoothness_L;
    return budget;
}

PolicyReport validate_policy(const StepSizePolicy& policy, const StabilityBudget& budget,
                             std::optional<long> horizon) {
    PolicyReport report;
    report.sum_squares = policy.sum_squares(horizon);
    report.l2_summable = std::isfinite(policy.sum_squares());
    report.within_budget = report.sum_squares <= budget.sum_sq_budget;
    report.within_cap = true;
    const long cap_scan = horizon.value_or(10000);
    for (long k = 0; k < cap_scan; ++k) {
        if (policy.at(static_cast<int>(k)) > budget.alpha_cap) {
            report.within_cap = false;
            break;
        }
    }
    // decay exponent from a log-log fit over the schedule tail
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = 100; k <= 10000; k += 100) {
        const double a = policy.at(k);
        if (a <= 0.0) continue;
        const double x = std::log(static_cast<double>(k));
        const double y = std::log(a);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n >= 2) {
        report.decay_exponent = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
        report.theta_compatible = report.decay_exponent > 0.45 && report.decay_exponent <= 1.05;
    }
    return report;
}

LocalConstants estimate_local_constants(const RealizableParametrizedSystem& oracle,
                                        const ParametrizedSystem& ps,
                                        const SamplingDistribution& dist,
                                        const std::vector<Eigen::VectorXd>& probe_points,
                                        int sample_count, int repetitions, std::uint64_t seed) {
    if (probe_points.size() < 2)
        throw std::invalid_argument("estimate_local_constants: need at least 2 probe points");
    LocalConstants constants;
    std::vector<Eigen::VectorXd> grads;
    grads.reserve(probe_points.size());
    for (const auto& mu : probe_points) {
        grads.push_back(exact_gradient(oracle, mu));
        constants.lipschitz_K = std::max(constants.lipschitz_K, grads.back().norm());
    }
    for (std::size_t i = 0; i < probe_points.size(); ++i) {
        for (std::size_t j = i + 1; j < probe_points.size(); ++j) {
            const double dmu = (probe_points[i] - probe_points[j]).norm();
            if (dmu < 1e-12) continue;
            constants.smoothness_L =
                std::max(constants.smoothness_L, (grads[i] - grads[j]).norm() / dmu);
        }
    }
    double worst_var = 0.0;
    for (std::size_t i = 0; i < probe_points.size(); ++i) {
        double acc = 0.0;
        for (int r = 0; r < repetitions; ++r) {
            const auto est = estimate_gradient(ps, probe_points[i], dist, sample_count,
                                               derive_seed(seed, i * 7919 + r));
            acc += (est.estimate - grads[i]).squaredNorm();
        }
        worst_var = std::max(worst_var, acc / static_cast<double>(repetitions));
    }
    constants.sigma = std::sqrt(worst_var);
    return constants;
}

void write_run_record(const RunRecord& record, const std::string& csv_path,
                      const std::string& config_digest) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open " + csv_path);
    const int n_mu = static_cast<int>(record.iterates.front().size());
    csv << "k,alpha";
    for (int j = 0; j < n_mu; ++j) csv << ",mu" << j;
    csv << ",estimate_norm,checkpoint_cost,projected\n";
    csv << std::setprecision(17);
    auto checkpoint_at = [&](int k) -> std::string {
        for (const auto& c : record.checkpoints)
            if (c.iteration == k) {
                std::ostringstream os;
                os << std::setprecision(17) << c.cost;
                return os.str();
            }
        return "";
    };
    for (std::size_t k = 0; k < record.iterates.size(); ++k) {
        csv << k;
        csv << "," << (k < record.step_sizes.size() ? std::to_string(record.step_sizes[k]) : "");
        for (int j = 0; j < n_mu; ++j) csv << "," << record.iterates[k][j];
        csv << ","
            << (k < record.estimate_norms.size() ? std::to_string(record.estimate_norms[k]) : "");
        csv << "," << checkpoint_at(static_cast<int>(k));
        csv << ","
            << (k < record.projection_active.size() ? (record.projection_active[k] ? "1" : "0")
                                                    : "");
        csv << "\n";
    }

    nlohmann::json meta;
    meta["seed"] = record.seed;
    meta["sample_count"] = record.sample_count;
    meta["iterations"] = record.iterations();
    meta["termination_reason"] = record.termination_reason;
    meta["config_digest"] = config_digest;
    double total = 0.0;
    for (double t : record.wall_seconds) total += t;
    meta["wall_seconds_total"] = total;
    std::ofstream sidecar(csv_path + ".meta.json");
    sidecar << meta.dump(2) << "\n";
}

}  // namespace sh2
