#include "sh2/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sh2 {

bool SamplingDistribution::bounded() const {
    return std::isfinite(magnitude_support().hi);
}

std::vector<double> SamplingDistribution::draw(RngStream& rng, int count) const {
    if (count < 1) throw std::invalid_argument("draw: count must be >= 1");
    std::vector<double> samples(static_cast<std::size_t>(count));
    for (auto& s : samples) s = draw_one(rng);
    return samples;
}

namespace {

class LogUniformDistribution final : public SamplingDistribution {
public:
    LogUniformDistribution(double w_min, double w_max)
        : w_min_(w_min), w_max_(w_max), a_(std::log10(w_min)), b_(std::log10(w_max)) {
        if (!(w_min > 0.0) || !(w_max > w_min) || !std::isfinite(w_max))
            throw std::invalid_argument("log_uniform: need 0 < w_min < w_max < inf");
    }

    double density(double omega) const override {
        const double m = std::abs(omega);
        if (m < w_min_ || m > w_max_) return 0.0;
        return 1.0 / (2.0 * m * std::log(10.0) * (b_ - a_));
    }

    double draw_one(RngStream& rng) const override {
        const double mag = std::pow(10.0, a_ + rng.uniform01() * (b_ - a_));
        return rng.sign() * mag;
    }

    SupportBand magnitude_support() const override { return {w_min_, w_max_}; }

    std::string describe() const override {
        return "log-uniform +-[" + std::to_string(w_min_) + ", " + std::to_string(w_max_) + "]";
    }

private:
    double w_min_, w_max_, a_, b_;
};

class UniformBandDistribution final : public SamplingDistribution {
public:
    UniformBandDistribution(double w_min, double w_max) : w_min_(w_min), w_max_(w_max) {
        if (!(w_min >= 0.0) || !(w_max > w_min) || !std::isfinite(w_max))
            throw std::invalid_argument("uniform_band: need 0 <= w_min < w_max < inf");
    }

    double density(double omega) const override {
        const double m = std::abs(omega);
        if (m < w_min_ || m > w_max_) return 0.0;
        return 1.0 / (2.0 * (w_max_ - w_min_));
    }

    double draw_one(RngStream& rng) const override {
        return rng.sign() * rng.uniform(w_min_, w_max_);
    }

    SupportBand magnitude_support() const override { return {w_min_, w_max_}; }

    std::string describe() const override {
        return "uniform +-[" + std::to_string(w_min_) + ", " + std::to_string(w_max_) + "]";
    }

private:
    double w_min_, w_max_;
};

class InverseCdfDistribution final : public SamplingDistribution {
public:
    explicit InverseCdfDistribution(std::vector<double> mags) : m_(std::move(mags)) {
        if (m_.size() < 3)
            throw std::invalid_argument("inverse_cdf_sampler: table needs at least 3 knots");
        if (m_.front() < 0.0)
            throw std::invalid_argument("inverse_cdf_sampler: magnitudes must be nonnegative");
        for (std::size_t i = 1; i < m_.size(); ++i)
            if (!(m_[i] > m_[i - 1]))
                throw std::invalid_argument("inverse_cdf_sampler: table must be strictly monotone");
    }

    double density(double omega) const override {
        const double m = std::abs(omega);
        if (m < m_.front() || m > m_.back()) return 0.0;
        const auto it = std::upper_bound(m_.begin(), m_.end(), m);
        std::size_t i = static_cast<std::size_t>(it - m_.begin());
        i = std::clamp<std::size_t>(i, 1, m_.size() - 1) - 1;
        const double du = 1.0 / static_cast<double>(m_.size() - 1);
        // one-sided density by differencing the table, halved for two sides
        return 0.5 * du / (m_[i + 1] - m_[i]);
    }

    double draw_one(RngStream& rng) const override {
        const double t = rng.uniform01() * static_cast<double>(m_.size() - 1);
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), m_.size() - 2);
        const double frac = t - static_cast<double>(i);
        const double mag = m_[i] + frac * (m_[i + 1] - m_[i]);
        return rng.sign() * mag;
    }

    SupportBand magnitude_support() const override { return {m_.front(), m_.back()}; }

    std::string describe() const override {
        return "inverse-CDF table (" + std::to_string(m_.size()) + " knots)";
    }

private:
    std::vector<double> m_;
};

// Piecewise-linear one-sided density with piecewise-quadratic CDF inversion.
class TabulatedMagnitudeDistribution final : public SamplingDistribution {
public:
    TabulatedMagnitudeDistribution(std::vector<double> omegas, std::vector<double> weights)
        : w_(std::move(omegas)), q_(std::move(weights)) {
        if (w_.size() != q_.size() || w_.size() < 2)
            throw std::invalid_argument("proportional_to_magnitude: need >= 2 (omega, weight) rows");
        if (w_.front() < 0.0)
            throw std::invalid_argument("proportional_to_magnitude: omegas must be nonnegative");
        double total = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) {
            if (i > 0 && !(w_[i] > w_[i - 1]))
                throw std::invalid_argument("proportional_to_magnitude: omegas must increase");
            if (q_[i] < 0.0)
                throw std::invalid_argument("proportional_to_magnitude: negative weight");
        }
        // trapezoidal normalizer tau
        cdf_.assign(w_.size(), 0.0);
        for (std::size_t i = 1; i < w_.size(); ++i) {
            total += 0.5 * (q_[i] + q_[i - 1]) * (w_[i] - w_[i - 1]);
            cdf_[i] = total;
        }
        if (!(total > 0.0))
            throw std::invalid_argument("proportional_to_magnitude: all weights are zero");
        for (auto& v : q_) v /= total;
        for (auto& v : cdf_) v /= total;
    }

    double density(double omega) const override {
        const double m = std::abs(omega);
        if (m < w_.front() || m > w_.back()) return 0.0;
        const std::size_t i = segment(m);
        const double t = (m - w_[i]) / (w_[i + 1] - w_[i]);
        return 0.5 * (q_[i] + t * (q_[i + 1] - q_[i]));
    }

    double draw_one(RngStream& rng) const override {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
        i = std::clamp<std::size_t>(i, 1, cdf_.size() - 1) - 1;
        const double h = w_[i + 1] - w_[i];
        const double q0 = q_[i], q1 = q_[i + 1];
        const double rest = u - cdf_[i];
        // Solve q0*x + (q1-q0)/(2h) * x^2 = rest for x in [0, h].
        double x;
        const double slope = (q1 - q0) / h;
        if (std::abs(slope) * h < 1e-14 * std::max(q0, 1e-300)) {
            x = rest / std::max(q0, 1e-300);
        } else {
            const double disc = q0 * q0 + 2.0 * slope * rest;
            x = (std::sqrt(std::max(disc, 0.0)) - q0) / slope;
        }
        return rng.sign() * (w_[i] + std::clamp(x, 0.0, h));
    }

    SupportBand magnitude_support() const override { return {w_.front(), w_.back()}; }

    std::string describe() const override {
        return "tabulated magnitude profile (" + std::to_string(w_.size()) + " rows)";
    }

private:
    std::size_t segment(double m) const {
        const auto it = std::upper_bound(w_.begin(), w_.end(), m);
        std::size_t i = static_cast<std::size_t>(it - w_.begin());
        return std::clamp<std::size_t>(i, 1, w_.size() - 1) - 1;
    }

    std::vector<double> w_, q_, cdf_;
};

class CustomDistribution final : public SamplingDistribution {
public:
    CustomDistribution(std::function<double(double)> density, std::function<double(RngStream&)> draw,
                       SupportBand support, std::string name)
        : density_(std::move(density)),
          draw_(std::move(draw)),
          support_(support),
          name_(std::move(name)) {}

    double density(double omega) const override { return density_(omega); }
    double draw_one(RngStream& rng) const override { return draw_(rng); }
    SupportBand magnitude_support() const override { return support_; }
    std::string describe() const override { return name_; }

private:
    std::function<double(double)> density_;
    std::function<double(RngStream&)> draw_;
    SupportBand support_;
    std::string name_;
};

}  // namespace

DistributionPtr log_uniform(double w_min, double w_max) {
    return std::make_shared<LogUniformDistribution>(w_min, w_max);
}

DistributionPtr uniform_band(double w_min, double w_max) {
    return std::make_shared<UniformBandDistribution>(w_min, w_max);
}

DistributionPtr inverse_cdf_sampler(std::vector<double> magnitudes) {
    return std::make_shared<InverseCdfDistribution>(std::move(magnitudes));
}

DistributionPtr proportional_to_magnitude(std::vector<double> omegas, std::vector<double> weights) {
    return std::make_shared<TabulatedMagnitudeDistribution>(std::move(omegas), std::move(weights));
}

DistributionPtr custom_distribution(std::function<double(double)> density,
                                    std::function<double(RngStream&)> draw_one, SupportBand support,
                                    std::string name) {
    return std::make_shared<CustomDistribution>(std::move(density), std::move(draw_one), support,
                                                std::move(name));
}

VarianceConditionReport check_variance_condition(const SamplingDistribution& dist,
                                                 const std::function<double(double)>& f_magnitude,
                                                 const std::vector<double>& omega_grid) {
    VarianceConditionReport report;
    std::vector<std::pair<double, double>> ratios;  // (|omega|, ratio)
    for (double w : omega_grid) {
        const double p = dist.density(w);
        if (p <= 0.0) continue;
        const double r = f_magnitude(w) / std::sqrt(p) * (std::abs(w) + 1.0);
        report.worst_ratio = std::max(report.worst_ratio, r);
        ratios.emplace_back(std::abs(w), r);
    }
    if (dist.bounded()) {
        report.bounded = true;
        report.note = "support is bounded; condition trivially satisfied";
        return report;
    }
    if (report.worst_ratio == 0.0) {
        report.bounded = true;
        report.note = "integrand vanishes on the grid";
        return report;
    }
    // Unbounded support: least-squares slope of log(ratio) vs log(1 + |omega|)
    // over the outer half of the grid. Nonpositive slope means the ratio stays
    // bounded at the grid scale.
    std::sort(ratios.begin(), ratios.end());
    const std::size_t start = ratios.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = start; i < ratios.size(); ++i) {
        if (ratios[i].second <= 0.0) continue;
        const double x = std::log(1.0 + ratios[i].first);
        const double y = std::log(ratios[i].second);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) {
        report.bounded = true;
        report.note = "too few grid points with positive density to detect growth";
        return report;
    }
    const double slope = (static_cast<double>(n) * sxy - sx * sy) /
                         (static_cast<double>(n) * sxx - sx * sx);
    report.bounded = slope <= 0.1;
    report.note = "grid heuristic, tail slope " + std::to_string(slope);
    return report;
}

}  // namespace sh2
