#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sh2/rng.hpp"

namespace sh2 {

// Magnitude band [lo, hi] of a symmetric two-sided support +-[lo, hi].
struct SupportBand {
    double lo = 0.0;
    double hi = 0.0;
};

// Symmetric PDF p(omega) over R. Symmetry p(omega) = p(-omega) holds by
// construction: draws combine a uniform random sign with a magnitude drawn
// from the one-sided density; density() reports the true two-sided density.
class SamplingDistribution {
public:
    virtual ~SamplingDistribution() = default;

    // Two-sided density; zero outside the support.
    virtual double density(double omega) const = 0;
    virtual double draw_one(RngStream& rng) const = 0;
    virtual SupportBand magnitude_support() const = 0;
    virtual std::string describe() const = 0;

    bool bounded() const;
    std::vector<double> draw(RngStream& rng, int count) const;
};

using DistributionPtr = std::shared_ptr<const SamplingDistribution>;

// Log-uniform over +-[w_min, w_max], 0 < w_min < w_max.
DistributionPtr log_uniform(double w_min, double w_max);

// Uniform magnitudes over +-[w_min, w_max], w_min < w_max (w_min may be 0).
DistributionPtr uniform_band(double w_min, double w_max);

// Inversion sampler from a tabulated inverse CDF: magnitudes[i] is the
// one-sided inverse CDF at u = i / (K - 1). Strictly increasing, K >= 3.
DistributionPtr inverse_cdf_sampler(std::vector<double> magnitudes);

// Distribution approximately proportional to a tabulated magnitude profile:
// points (omega_i, weight_i) on omega >= 0, normalized by trapezoidal
// quadrature and sampled through the inversion machinery.
DistributionPtr proportional_to_magnitude(std::vector<double> omegas, std::vector<double> weights);

// Escape hatch for distributions given directly by a (two-sided) density and
// a sampler, e.g. heavy-tailed densities over all of R.
DistributionPtr custom_distribution(std::function<double(double)> density,
                                    std::function<double(RngStream&)> draw_one, SupportBand support,
                                    std::string name);

struct VarianceConditionReport {
    bool bounded = false;
    double worst_ratio = 0.0;  // max over grid of |f| / sqrt(p) * (|omega| + 1)
    std::string note;
};

// Grid heuristic for the variance-boundedness condition: checks whether
// ||Re f(omega)|| / sqrt(p(omega)) decays like 1/(|omega| + 1) on the grid.
// Bounded-support distributions satisfy it unconditionally.
VarianceConditionReport check_variance_condition(const SamplingDistribution& dist,
                                                 const std::function<double(double)>& f_magnitude,
                                                 const std::vector<double>& omega_grid);

}  // namespace sh2
