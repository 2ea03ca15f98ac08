#pragma once

#include <memory>
#include <optional>
#include <string>

#include "sh2/optimizer.hpp"
#include "sh2/oracle.hpp"
#include "sh2/systems.hpp"

namespace sh2 {

// ---------------------------------------------------------------------------
// PD tuning on the damped wave equation (analytic, infinite-dimensional plant)
// ---------------------------------------------------------------------------

// phi(omega) = sqrt(i*c*omega - omega^2), principal branch (the frequency-
// domain wavenumber of xi_tt + c xi_t - xi_xx = 0).
Complex wave_phi(double omega, double damping);

// Plant value Phi(omega) = tanh(phi)/phi, with the removable singularity at
// phi = 0 evaluated by its limit 1.
Complex wave_plant_value(double omega, double damping);

struct WaveEquationProblem {
    double damping = 0.25;   // 1/s
    double t_filter = 1e-2;  // s, derivative filter time constant

    Complex plant(double omega) const { return wave_plant_value(omega, damping); }
    // Filtered derivative T_F s / (T_F s + 1) at s = i*omega.
    Complex derivative_term(double omega) const {
        const Complex tfs(0.0, t_filter * omega);
        return tfs / (tfs + 1.0);
    }
    // PD controller K(mu; s) = mu_1 + mu_2 * T_F s / (T_F s + 1) at s = i*omega.
    Complex controller(const Eigen::VectorXd& mu, double omega) const;

    SystemPtr plant_system() const;
    SystemPtr controller_system(const Eigen::VectorXd& mu) const;

    // Closed loop G(mu) = [1; K] Phi / (1 - Phi K), with analytic parameter
    // gradients, over the box mu <= 0.
    ParametrizedSystem parametrized() const;
};

// Finite-difference model of the damped wave equation on [0, 1]: clamped at
// x = 0, force input and displacement output at x = 1, n states (n/2 grid
// points for positions and velocities). n even, n >= 4.
DenseRealization wave_fd_discretize(int n, double damping = 0.25);

// Joint realization of the FD plant in closed loop with the PD controller:
// d -> (y, u), n + 1 states.
DenseRealization wave_closed_loop(const DenseRealization& fd_plant, const Eigen::VectorXd& mu,
                                  double t_filter = 1e-2);

struct SimulationResult {
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> u;
};

// Fixed-step disturbance response of the closed loop, RK4 with dt = 1e-3,
// d(t) = sin(2 pi t) + sin(0.2 pi t), t in [0, t_end].
SimulationResult simulate_wave_disturbance(const DenseRealization& closed_loop,
                                           double t_end = 10.0, double dt = 1e-3);

// ---------------------------------------------------------------------------
// Fixed-order observer design
// ---------------------------------------------------------------------------

struct ObserverMatrices {
    Eigen::MatrixXd A_q;      // r x r
    Eigen::MatrixXd B_q;      // r x 2, inputs (u, y~)
    Eigen::RowVectorXd C_q;   // 1 x r
};

// vec[A_q  B_q  C_q^T] = mu, column-major over the r x (r+3) block.
ObserverMatrices unpack_observer(const Eigen::VectorXd& mu, int order);
Eigen::VectorXd pack_observer(const ObserverMatrices& k);

struct ObserverProblem {
    // Plant u -> (z, y); output row 0 is z (already rescaled), row 1 is y.
    std::shared_ptr<const DescriptorStateSpace> plant;
    int observer_order = 0;
    double cz_scale = 1.0;          // factor applied to C_z for ||G(0)|| = 1
    double bandwidth = 0.0;         // quadrature truncation frequency, rad/s

    int n_params() const { return observer_order * (observer_order + 3); }

    // Error map G(mu): (w, u, v) -> e = z - zhat, fused joint evaluation
    // sharing one plant solve per frequency.
    ParametrizedSystem parametrized() const;

    // ||G(mu)||^2 by quadrature over the problem bandwidth (works at any n).
    double cost_quadrature(const Eigen::VectorXd& mu, double rel_tol = 1e-6) const;

    // Dense-oracle view (plant order must be within the oracle cap).
    RealizableParametrizedSystem realizable() const;
};

// Synthetic 1-D diffusion plant (sparse tridiagonal), SISO u, y, z taps.
std::shared_ptr<const DescriptorStateSpace> synthetic_diffusion_plant(int n);

// Builds the problem and rescales C_z so that ||G(0)|| = 1 (+- 1e-3).
ObserverProblem build_observer_problem(std::shared_ptr<const DescriptorStateSpace> plant,
                                       int observer_order);
ObserverProblem build_observer_problem_synthetic(int n, int observer_order);
// Matrix Market files for E, A, B, C_z, C_y.
ObserverProblem build_observer_problem_from_files(const std::string& e_path,
                                                  const std::string& a_path,
                                                  const std::string& b_path,
                                                  const std::string& cz_path,
                                                  const std::string& cy_path, int observer_order);

// mu_0 from an order-r estimator designed on a modal-truncation surrogate of
// the plant; supplying explicit_mu0 bypasses the design. The result is
// verified stable, otherwise an error advises a manual mu_0.
Eigen::VectorXd initialize_observer(const ObserverProblem& problem,
                                    std::optional<Eigen::VectorXd> explicit_mu0 = std::nullopt);

// Step schedule of the observer case study: 1e-4, then halved twice in blocks
// of 20 iterations, then a ~1/k tail.
StepSizePolicy observer_step_schedule();

// ---------------------------------------------------------------------------
// Small closed-form benchmarks
// ---------------------------------------------------------------------------

// G(mu; s) = mu / (s + 1): cost mu^2/4, gradient mu/2, minimizer 0.
ParametrizedSystem scalar_gain_benchmark();
RealizableParametrizedSystem scalar_gain_realizable();

// G(mu; s) = 2 mu / (s + mu): cost mu for mu >= 0, infinite for mu < 0.
RealizableParametrizedSystem pole_example_realizable();

// Random stable system with parameter-affine output map:
// G(mu) = (C_0 + sum_j mu_j C_j)(sI - A)^{-1} B.
struct RandomAffineBenchmark {
    ParametrizedSystem ps;
    RealizableParametrizedSystem oracle;
};
RandomAffineBenchmark random_affine_benchmark(int n_states, int n_params, std::uint64_t seed);

}  // namespace sh2
