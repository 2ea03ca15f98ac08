#pragma once

#include <functional>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "sh2/systems.hpp"

namespace sh2 {

// Dense (A, B, C) realization with E = I, used for exact small-scale truth.
struct DenseRealization {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;

    Eigen::Index order() const { return A.rows(); }
    Eigen::Index outputs() const { return C.rows(); }
    Eigen::Index inputs() const { return B.cols(); }

    TransferValue evaluate(double omega) const;
};

// Default cap on the state dimension accepted by the dense solvers.
inline constexpr Eigen::Index kDefaultRealizationCap = 2000;

// Converts a descriptor realization to E = I form; rejects singular E.
DenseRealization to_dense_realization(const DescriptorStateSpace& sys,
                                      Eigen::Index cap = kDefaultRealizationCap);

// Max real part of the (generalized) eigenvalues.
double spectral_abscissa(const Eigen::MatrixXd& A);
double spectral_abscissa(const Eigen::MatrixXd& A, const Eigen::MatrixXd& E);

// Solves A X + X B = C by Bartels-Stewart (complex Schur on both factors).
Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                const Eigen::MatrixXd& C);

// H2 inner product via the Sylvester Gramian identity. Returns +inf when
// either system is unstable (a legitimate cost value, not an error).
double h2_inner(const DenseRealization& sys_a, const DenseRealization& sys_b);

// ||G||^2 = <G, G>; +inf when unstable.
double h2_norm_squared(const DenseRealization& sys);

// Cost c = (1/2) ||G||^2; +inf when unstable.
inline double h2_cost(const DenseRealization& sys) { return 0.5 * h2_norm_squared(sys); }

// Parametrized system whose members admit dense realizations (oracle scale).
struct RealizableParametrizedSystem {
    int n_params = 0;
    std::function<DenseRealization(const Eigen::VectorXd&)> realize;
    std::function<DenseRealization(const Eigen::VectorXd&, int)> realize_gradient;
};

// Component j is <G(mu), dG/dmu_j(mu)>. Throws if G(mu) is unstable.
Eigen::VectorXd exact_gradient(const RealizableParametrizedSystem& ps, const Eigen::VectorXd& mu);

struct QuadratureResult {
    double value = 0.0;
    double truncation_tail = 0.0;  // estimated mass beyond the truncation point
    int evaluations = 0;
};

// ||G||^2 by adaptive quadrature of the Frobenius-squared frequency response
// over [0, omega_max], doubled by conjugate symmetry, times 1/(2 pi).
QuadratureResult h2_norm_squared_quadrature(const FrequencyEvaluableSystem& sys, double omega_max,
                                            double rel_tolerance = 1e-8);

// Exact evaluation of max_{xi in [0,1]} ||x|| ||xi x + y||; the maximizer sits
// at an endpoint since the norm is convex in xi.
bool lemma_norm_xi_check(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace sh2
