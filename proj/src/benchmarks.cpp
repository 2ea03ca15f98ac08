#include "sh2/benchmarks.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sh2/matrix_market.hpp"
#include "sh2/rng.hpp"

namespace sh2 {

// ---------------------------------------------------------------------------
// Damped wave equation
// ---------------------------------------------------------------------------

Complex wave_phi(double omega, double damping) {
    return std::sqrt(Complex(-omega * omega, damping * omega));
}

Complex wave_plant_value(double omega, double damping) {
    const Complex phi = wave_phi(omega, damping);
    if (std::abs(phi) < 1e-8) return 1.0 - phi * phi / 3.0;  // tanh(phi)/phi -> 1
    return std::tanh(phi) / phi;
}

Complex WaveEquationProblem::controller(const Eigen::VectorXd& mu, double omega) const {
    const Complex d = derivative_term(omega);
    return mu[0] + mu[1] * d;
}

SystemPtr WaveEquationProblem::plant_system() const {
    const double c = damping;
    return std::make_shared<AnalyticSystem>(1, 1, [c](double omega) {
        TransferValue v(1, 1);
        v(0, 0) = wave_plant_value(omega, c);
        return v;
    });
}

SystemPtr WaveEquationProblem::controller_system(const Eigen::VectorXd& mu) const {
    if (mu.size() != 2) throw std::invalid_argument("wave controller: mu must have 2 entries");
    const WaveEquationProblem self = *this;
    const Eigen::VectorXd mu_copy = mu;
    return std::make_shared<AnalyticSystem>(1, 1, [self, mu_copy](double omega) {
        TransferValue v(1, 1);
        v(0, 0) = self.controller(mu_copy, omega);
        return v;
    });
}

ParametrizedSystem WaveEquationProblem::parametrized() const {
    const WaveEquationProblem self = *this;
    ParametrizedSystem ps;
    ps.n_params = 2;
    ps.domain = ParameterBox::nonpositive(2);
    ps.joint = [self](const Eigen::VectorXd& mu, double omega) {
        const Complex phi_val = wave_plant_value(omega, self.damping);
        const Complex d = self.derivative_term(omega);
        const Complex k = mu[0] + mu[1] * d;
        const Complex den = 1.0 - phi_val * k;
        if (std::abs(den) < 1e-300) throw IllPosedInterconnection(omega);
        const Complex sens = 1.0 / den;

        JointEvaluation je;
        je.value.resize(2, 1);
        je.value(0, 0) = phi_val * sens;
        je.value(1, 0) = k * phi_val * sens;
        const Complex phi2s2 = phi_val * phi_val * sens * sens;
        for (int j = 0; j < 2; ++j) {
            const Complex dk = (j == 0) ? Complex(1.0) : d;
            TransferValue g(2, 1);
            g(0, 0) = phi2s2 * dk;
            g(1, 0) = dk * phi_val * sens + k * phi2s2 * dk;
            je.gradients.push_back(std::move(g));
        }
        return je;
    };
    ps.build = [self](const Eigen::VectorXd& mu) -> SystemPtr {
        return feedback_interconnect(self.plant_system(), self.controller_system(mu),
                                     FeedbackTopology::SisoFeedback);
    };
    const ParametrizedSystem ps_for_grad = [&] {
        ParametrizedSystem copy;
        copy.n_params = 2;
        copy.joint = ps.joint;
        copy.domain = ps.domain;
        return copy;
    }();
    ps.build_gradient = [ps_for_grad](const Eigen::VectorXd& mu, int j) -> SystemPtr {
        return std::make_shared<AnalyticSystem>(2, 1, [ps_for_grad, mu, j](double omega) {
            return ps_for_grad.joint(mu, omega).gradients[static_cast<std::size_t>(j)];
        });
    };
    return ps;
}

DenseRealization wave_fd_discretize(int n, double damping) {
    if (n < 4 || n % 2 != 0)
        throw std::invalid_argument("wave_fd_discretize: n must be even and >= 4");
    const int grid = n / 2;
    const double h = 1.0 / grid;  // nodes at x = h, 2h, ..., 1; clamped end at x = 0
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(grid, grid);
    for (int j = 0; j < grid; ++j) {
        lap(j, j) = -2.0 / (h * h);
        if (j > 0) lap(j, j - 1) = 1.0 / (h * h);
        if (j + 1 < grid) lap(j, j + 1) = 1.0 / (h * h);
    }
    // free end: mirror ghost node carrying the boundary force
    lap(grid - 1, grid - 1) = -2.0 / (h * h);
    lap(grid - 1, grid - 2) = 2.0 / (h * h);

    DenseRealization r;
    r.A = Eigen::MatrixXd::Zero(n, n);
    r.A.topRightCorner(grid, grid).setIdentity();
    r.A.bottomLeftCorner(grid, grid) = lap;
    r.A.bottomRightCorner(grid, grid) = -damping * Eigen::MatrixXd::Identity(grid, grid);
    r.B = Eigen::MatrixXd::Zero(n, 1);
    r.B(n - 1, 0) = 2.0 / h;
    r.C = Eigen::MatrixXd::Zero(1, n);
    r.C(0, grid - 1) = 1.0;
    return r;
}

DenseRealization wave_closed_loop(const DenseRealization& fd_plant, const Eigen::VectorXd& mu,
                                  double t_filter) {
    if (mu.size() != 2) throw std::invalid_argument("wave_closed_loop: mu must have 2 entries");
    const Eigen::Index n = fd_plant.order();
    // K(s) = (mu1 + mu2) - (mu2/T_F) / (s + 1/T_F); positive feedback u = K y.
    const double dk = mu[0] + mu[1];
    const double ak = -1.0 / t_filter;
    const double ck = -mu[1] / t_filter;

    DenseRealization cl;
    cl.A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    cl.A.topLeftCorner(n, n) = fd_plant.A + fd_plant.B * (dk * fd_plant.C);
    cl.A.topRightCorner(n, 1) = fd_plant.B * ck;
    cl.A.bottomLeftCorner(1, n) = fd_plant.C;  // B_k = 1
    cl.A(n, n) = ak;
    cl.B = Eigen::MatrixXd::Zero(n + 1, 1);
    cl.B.topRows(n) = fd_plant.B;
    cl.C = Eigen::MatrixXd::Zero(2, n + 1);
    cl.C.block(0, 0, 1, n) = fd_plant.C;              // y
    cl.C.block(1, 0, 1, n) = dk * fd_plant.C;         // u = D_k y + C_k x_k
    cl.C(1, n) = ck;
    return cl;
}

SimulationResult simulate_wave_disturbance(const DenseRealization& closed_loop, double t_end,
                                           double dt) {
    const auto input = [](double t) {
        return std::sin(2.0 * M_PI * t) + std::sin(0.2 * M_PI * t);
    };
    const Eigen::Index n = closed_loop.order();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    SimulationResult out;
    const int steps = static_cast<int>(std::round(t_end / dt));
    out.t.reserve(steps + 1);
    out.y.reserve(steps + 1);
    out.u.reserve(steps + 1);
    const auto record = [&](double t) {
        const Eigen::VectorXd y = closed_loop.C * x;
        out.t.push_back(t);
        out.y.push_back(y[0]);
        out.u.push_back(y[1]);
    };
    const auto rhs = [&](const Eigen::VectorXd& state, double t) -> Eigen::VectorXd {
        return closed_loop.A * state + closed_loop.B * input(t);
    };
    record(0.0);
    for (int k = 0; k < steps; ++k) {
        const double t = k * dt;
        const Eigen::VectorXd k1 = rhs(x, t);
        const Eigen::VectorXd k2 = rhs(x + 0.5 * dt * k1, t + 0.5 * dt);
        const Eigen::VectorXd k3 = rhs(x + 0.5 * dt * k2, t + 0.5 * dt);
        const Eigen::VectorXd k4 = rhs(x + dt * k3, t + dt);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        record(t + dt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Observer design
// ---------------------------------------------------------------------------

ObserverMatrices unpack_observer(const Eigen::VectorXd& mu, int order) {
    const int r = order;
    if (mu.size() != r * (r + 3))
        throw std::invalid_argument("unpack_observer: mu must have r*(r+3) entries");
    ObserverMatrices k;
    k.A_q.resize(r, r);
    k.B_q.resize(r, 2);
    k.C_q.resize(r);
    int p = 0;
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < r; ++i) k.A_q(i, j) = mu[p++];
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < r; ++i) k.B_q(i, j) = mu[p++];
    for (int i = 0; i < r; ++i) k.C_q(i) = mu[p++];
    return k;
}

Eigen::VectorXd pack_observer(const ObserverMatrices& k) {
    const int r = static_cast<int>(k.A_q.rows());
    Eigen::VectorXd mu(r * (r + 3));
    int p = 0;
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < r; ++i) mu[p++] = k.A_q(i, j);
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < r; ++i) mu[p++] = k.B_q(i, j);
    for (int i = 0; i < r; ++i) mu[p++] = k.C_q(i);
    return mu;
}

namespace {

struct ObserverFrequencyData {
    Complex pz, py;            // plant channels u -> z, u -> y
    Eigen::RowVector2cd gain;  // K = [K_u, K_y]
    Eigen::RowVectorXcd left;  // C_q R
    Eigen::MatrixXcd right;    // R B_q (r x 2)
};

ObserverFrequencyData observer_frequency_data(const DescriptorStateSpace& plant,
                                              const ObserverMatrices& k, double omega) {
    ObserverFrequencyData d;
    const Eigen::MatrixXcd x = plant.solve_shifted(omega);  // (i w E - A)^{-1} B, n x 1
    const Eigen::MatrixXcd cz_cy = plant.C().cast<Complex>() * x;  // 2 x 1
    d.pz = cz_cy(0, 0);
    d.py = cz_cy(1, 0);

    const int r = static_cast<int>(k.A_q.rows());
    Eigen::MatrixXcd pencil = (-k.A_q).cast<Complex>();
    pencil.diagonal().array() += Complex(0.0, omega);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(pencil);
    const Eigen::MatrixXcd resolvent = lu.solve(Eigen::MatrixXcd::Identity(r, r));
    d.left = k.C_q.cast<Complex>() * resolvent;
    d.right = resolvent * k.B_q.cast<Complex>();
    d.gain = d.left * k.B_q.cast<Complex>();
    return d;
}

TransferValue observer_error_row(const ObserverFrequencyData& d, const Eigen::RowVector2cd& k) {
    TransferValue g(1, 3);
    g(0, 0) = d.pz - k(1) * d.py;
    g(0, 1) = d.pz - k(0) - k(1) * d.py;
    g(0, 2) = -k(1);
    return g;
}

// dG for a perturbation dK of the observer gain only (plant fixed).
TransferValue observer_error_row_gradient(const ObserverFrequencyData& d,
                                          const Eigen::RowVector2cd& dk) {
    TransferValue g(1, 3);
    g(0, 0) = -dk(1) * d.py;
    g(0, 1) = -dk(0) - dk(1) * d.py;
    g(0, 2) = -dk(1);
    return g;
}

}  // namespace

ParametrizedSystem ObserverProblem::parametrized() const {
    const auto plant_ptr = plant;
    const int r = observer_order;
    ParametrizedSystem ps;
    ps.n_params = n_params();
    ps.domain = ParameterBox::unbounded(ps.n_params);
    ps.joint = [plant_ptr, r](const Eigen::VectorXd& mu, double omega) {
        const ObserverMatrices k = unpack_observer(mu, r);
        const ObserverFrequencyData d = observer_frequency_data(*plant_ptr, k, omega);
        JointEvaluation je;
        je.value = observer_error_row(d, d.gain);
        je.gradients.reserve(static_cast<std::size_t>(mu.size()));
        for (int p = 0; p < mu.size(); ++p) {
            const int i = p % r;
            const int j = p / r;
            Eigen::RowVector2cd dk;
            if (j < r) {
                dk = d.left(i) * d.right.row(j);
            } else if (j < r + 2) {
                dk.setZero();
                dk(j - r) = d.left(i);
            } else {
                dk = d.right.row(i);
            }
            je.gradients.push_back(observer_error_row_gradient(d, dk));
        }
        return je;
    };
    ps.build = [plant_ptr, r](const Eigen::VectorXd& mu) -> SystemPtr {
        const ObserverMatrices k = unpack_observer(mu, r);
        return std::make_shared<AnalyticSystem>(1, 3, [plant_ptr, k](double omega) {
            const ObserverFrequencyData d = observer_frequency_data(*plant_ptr, k, omega);
            return observer_error_row(d, d.gain);
        });
    };
    const auto joint = ps.joint;
    ps.build_gradient = [joint](const Eigen::VectorXd& mu, int j) -> SystemPtr {
        return std::make_shared<AnalyticSystem>(1, 3, [joint, mu, j](double omega) {
            return joint(mu, omega).gradients[static_cast<std::size_t>(j)];
        });
    };
    return ps;
}

double ObserverProblem::cost_quadrature(const Eigen::VectorXd& mu, double rel_tol) const {
    const ObserverMatrices k = unpack_observer(mu, observer_order);
    const auto plant_ptr = plant;
    AnalyticSystem g(1, 3, [plant_ptr, k](double omega) {
        const ObserverFrequencyData d = observer_frequency_data(*plant_ptr, k, omega);
        return observer_error_row(d, d.gain);
    });
    return 0.5 * h2_norm_squared_quadrature(g, bandwidth, rel_tol).value;
}

RealizableParametrizedSystem ObserverProblem::realizable() const {
    const DenseRealization p = to_dense_realization(*plant);
    const Eigen::Index n = p.order();
    const int r = observer_order;
    const Eigen::MatrixXd ap = p.A;
    const Eigen::MatrixXd bp = p.B;                 // n x 1
    const Eigen::RowVectorXd cz = p.C.row(0);
    const Eigen::RowVectorXd cy = p.C.row(1);

    RealizableParametrizedSystem rps;
    rps.n_params = n_params();
    rps.realize = [=](const Eigen::VectorXd& mu) {
        const ObserverMatrices k = unpack_observer(mu, r);
        DenseRealization g;
        g.A = Eigen::MatrixXd::Zero(n + r, n + r);
        g.A.topLeftCorner(n, n) = ap;
        g.A.bottomLeftCorner(r, n) = k.B_q.col(1) * cy;
        g.A.bottomRightCorner(r, r) = k.A_q;
        g.B = Eigen::MatrixXd::Zero(n + r, 3);
        g.B.block(0, 0, n, 1) = bp;  // w
        g.B.block(0, 1, n, 1) = bp;  // u
        g.B.block(n, 1, r, 1) = k.B_q.col(0);
        g.B.block(n, 2, r, 1) = k.B_q.col(1);  // v
        g.C = Eigen::MatrixXd::Zero(1, n + r);
        g.C.block(0, 0, 1, n) = cz;
        g.C.block(0, n, 1, r) = -k.C_q;
        return g;
    };
    rps.realize_gradient = [=](const Eigen::VectorXd& mu, int param) {
        const ObserverMatrices k = unpack_observer(mu, r);
        ObserverMatrices dk;
        dk.A_q = Eigen::MatrixXd::Zero(r, r);
        dk.B_q = Eigen::MatrixXd::Zero(r, 2);
        dk.C_q = Eigen::RowVectorXd::Zero(r);
        const int i = param % r;
        const int j = param / r;
        if (j < r)
            dk.A_q(i, j) = 1.0;
        else if (j < r + 2)
            dk.B_q(i, j - r) = 1.0;
        else
            dk.C_q(i) = 1.0;
        // sensitivity states s = d q / d mu_p appended after (x, q)
        DenseRealization g;
        g.A = Eigen::MatrixXd::Zero(n + 2 * r, n + 2 * r);
        g.A.topLeftCorner(n, n) = ap;
        g.A.block(n, 0, r, n) = k.B_q.col(1) * cy;
        g.A.block(n, n, r, r) = k.A_q;
        g.A.block(n + r, 0, r, n) = dk.B_q.col(1) * cy;
        g.A.block(n + r, n, r, r) = dk.A_q;
        g.A.block(n + r, n + r, r, r) = k.A_q;
        g.B = Eigen::MatrixXd::Zero(n + 2 * r, 3);
        g.B.block(0, 0, n, 1) = bp;
        g.B.block(0, 1, n, 1) = bp;
        g.B.block(n, 1, r, 1) = k.B_q.col(0);
        g.B.block(n, 2, r, 1) = k.B_q.col(1);
        g.B.block(n + r, 1, r, 1) = dk.B_q.col(0);
        g.B.block(n + r, 2, r, 1) = dk.B_q.col(1);
        g.C = Eigen::MatrixXd::Zero(1, n + 2 * r);
        g.C.block(0, n, 1, r) = -dk.C_q;
        g.C.block(0, n + r, 1, r) = -k.C_q;
        return g;
    };
    return rps;
}

std::shared_ptr<const DescriptorStateSpace> synthetic_diffusion_plant(int n) {
    if (n < 10) throw std::invalid_argument("synthetic_diffusion_plant: n too small");
    const double kappa = 1e-2;
    const double h = 1.0 / (n + 1);
    std::vector<Eigen::Triplet<double>> a_triplets, e_triplets;
    for (int i = 0; i < n; ++i) {
        e_triplets.emplace_back(i, i, 1.0);
        a_triplets.emplace_back(i, i, -2.0 * kappa / (h * h));
        if (i > 0) a_triplets.emplace_back(i, i - 1, kappa / (h * h));
        if (i + 1 < n) a_triplets.emplace_back(i, i + 1, kappa / (h * h));
    }
    Eigen::SparseMatrix<double> A(n, n), E(n, n);
    A.setFromTriplets(a_triplets.begin(), a_triplets.end());
    E.setFromTriplets(e_triplets.begin(), e_triplets.end());
    // heat input at x ~ 0.3, target z at x ~ 0.9, measurement y at x ~ 0.7
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, 1);
    B(static_cast<int>(0.3 * n), 0) = 1.0;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2, n);
    C(0, static_cast<int>(0.9 * n)) = 1.0;  // z
    C(1, static_cast<int>(0.7 * n)) = 1.0;  // y
    return std::make_shared<DescriptorStateSpace>(std::move(E), std::move(A), std::move(B),
                                                  std::move(C));
}

namespace {

// Stable-subspace solution of the filter Riccati equation
// A P + P A^T - P C^T C P + B B^T = 0 through the Hamiltonian pencil.
Eigen::MatrixXd filter_riccati(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                               const Eigen::MatrixXd& B) {
    const Eigen::Index r = A.rows();
    Eigen::MatrixXd H(2 * r, 2 * r);
    H.topLeftCorner(r, r) = A.transpose();
    H.topRightCorner(r, r) = -C.transpose() * C;
    H.bottomLeftCorner(r, r) = -B * B.transpose();
    H.bottomRightCorner(r, r) = -A;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H.cast<Complex>());
    if (es.info() != Eigen::Success) throw std::runtime_error("filter_riccati: eigensolver failed");
    Eigen::MatrixXcd basis(2 * r, r);
    Eigen::Index found = 0;
    for (Eigen::Index i = 0; i < 2 * r && found < r; ++i) {
        if (es.eigenvalues()[i].real() < 0.0) basis.col(found++) = es.eigenvectors().col(i);
    }
    if (found != r) throw std::runtime_error("filter_riccati: no stabilizing solution");
    const Eigen::MatrixXcd x1 = basis.topRows(r);
    const Eigen::MatrixXcd x2 = basis.bottomRows(r);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(x1.transpose());
    if (!lu.isInvertible()) throw std::runtime_error("filter_riccati: singular subspace basis");
    // P = X2 X1^{-1} = (X1^{-T} X2^T)^T
    Eigen::MatrixXd P = lu.solve(x2.transpose()).transpose().real();
    return 0.5 * (P + P.transpose());
}

struct ModalSurrogate {
    Eigen::MatrixXd Ar;       // r x r
    Eigen::MatrixXd Br;       // r x 1
    Eigen::RowVectorXd Czr;
    Eigen::RowVectorXd Cyr;
    double plant_abscissa = 0.0;
};

// Modal truncation keeping the r slowest stable modes. Symmetric pairs go
// through the generalized self-adjoint solver at any n; general pairs use the
// dense solver and are capped.
ModalSurrogate modal_truncation(const DescriptorStateSpace& plant, int r) {
    const Eigen::MatrixXd A = plant.dense_A();
    const Eigen::MatrixXd E = plant.dense_E();
    const Eigen::Index n = A.rows();
    const bool symmetric = (A - A.transpose()).cwiseAbs().maxCoeff() < 1e-10 * A.cwiseAbs().maxCoeff() &&
                           (E - E.transpose()).cwiseAbs().maxCoeff() < 1e-10 * E.cwiseAbs().maxCoeff();
    ModalSurrogate s;
    if (symmetric) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, E);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("modal_truncation: eigensolver failed");
        s.plant_abscissa = es.eigenvalues().maxCoeff();
        // eigenvalues ascend; the slowest stable modes sit at the top end
        const Eigen::MatrixXd V = es.eigenvectors().rightCols(r);  // V^T E V = I
        s.Ar = es.eigenvalues().tail(r).asDiagonal();
        s.Br = V.transpose() * plant.B();
        s.Czr = plant.C().row(0) * V;
        s.Cyr = plant.C().row(1) * V;
        return s;
    }
    if (n > 600)
        throw std::invalid_argument(
            "modal_truncation: nonsymmetric plant too large for the dense path; supply mu_0 "
            "explicitly");
    const Eigen::MatrixXd W = E.fullPivLu().solve(A);
    Eigen::EigenSolver<Eigen::MatrixXd> es(W);
    if (es.info() != Eigen::Success) throw std::runtime_error("modal_truncation: eigensolver failed");
    s.plant_abscissa = es.eigenvalues().real().maxCoeff();
    // order modes by real part, keep the r slowest, realify
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return es.eigenvalues()[a].real() > es.eigenvalues()[b].real();
    });
    Eigen::MatrixXd basis(n, r);
    int col = 0;
    for (std::size_t t = 0; t < idx.size() && col < r; ++t) {
        const Eigen::VectorXcd v = es.eigenvectors().col(idx[t]);
        if (std::abs(es.eigenvalues()[idx[t]].imag()) < 1e-12) {
            basis.col(col++) = v.real();
        } else {
            basis.col(col++) = v.real();
            if (col < r) basis.col(col++) = v.imag();
        }
    }
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(basis).householderQ() *
                              Eigen::MatrixXd::Identity(n, r);
    const Eigen::MatrixXd QtE = Q.transpose() * E;
    const Eigen::MatrixXd M = (QtE * Q).fullPivLu().solve(Eigen::MatrixXd::Identity(r, r));
    s.Ar = M * (Q.transpose() * A * Q);
    s.Br = M * (Q.transpose() * plant.B());
    s.Czr = plant.C().row(0) * Q;
    s.Cyr = plant.C().row(1) * Q;
    return s;
}

double gershgorin_radius(const DescriptorStateSpace& plant) {
    const Eigen::MatrixXd A = plant.dense_A();
    const Eigen::MatrixXd E = plant.dense_E();
    double radius = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double scale = std::max(std::abs(E(i, i)), 1e-12);
        radius = std::max(radius, A.row(i).cwiseAbs().sum() / scale);
    }
    return radius;
}

}  // namespace

ObserverProblem build_observer_problem(std::shared_ptr<const DescriptorStateSpace> plant,
                                       int observer_order) {
    if (observer_order < 1)
        throw std::invalid_argument("build_observer_problem: observer order must be >= 1");
    if (plant->outputs() != 2 || plant->inputs() != 1)
        throw std::invalid_argument("build_observer_problem: plant must be u -> (z, y)");

    ObserverProblem problem;
    problem.observer_order = observer_order;
    problem.bandwidth = std::max(100.0, 10.0 * gershgorin_radius(*plant));

    // ||G(0)||^2 = 2 ||P_z||^2 (zhat = 0 leaves the w and u channels both
    // equal to the z response, v channel zero).
    AnalyticSystem z_channel(1, 1, [plant](double omega) {
        const Eigen::MatrixXcd x = plant->solve_shifted(omega);
        TransferValue v(1, 1);
        v(0, 0) = (plant->C().row(0).cast<Complex>() * x)(0, 0);
        return v;
    });
    const double pz_sq = h2_norm_squared_quadrature(z_channel, problem.bandwidth, 1e-8).value;
    if (!(pz_sq > 0.0) || !std::isfinite(pz_sq))
        throw std::runtime_error("build_observer_problem: z-channel norm is degenerate");
    problem.cz_scale = 1.0 / std::sqrt(2.0 * pz_sq);

    Eigen::MatrixXd C = plant->C();
    C.row(0) *= problem.cz_scale;
    if (plant->storage() == DescriptorStateSpace::Storage::Sparse) {
        Eigen::SparseMatrix<double> E(plant->dense_E().sparseView());
        Eigen::SparseMatrix<double> A(plant->dense_A().sparseView());
        problem.plant = std::make_shared<DescriptorStateSpace>(std::move(E), std::move(A),
                                                               plant->B(), std::move(C));
    } else {
        problem.plant = std::make_shared<DescriptorStateSpace>(plant->dense_E(), plant->dense_A(),
                                                               plant->B(), std::move(C));
    }
    return problem;
}

ObserverProblem build_observer_problem_synthetic(int n, int observer_order) {
    return build_observer_problem(synthetic_diffusion_plant(n), observer_order);
}

ObserverProblem build_observer_problem_from_files(const std::string& e_path,
                                                  const std::string& a_path,
                                                  const std::string& b_path,
                                                  const std::string& cz_path,
                                                  const std::string& cy_path, int observer_order) {
    Eigen::SparseMatrix<double> E = read_matrix_market_sparse(e_path);
    Eigen::SparseMatrix<double> A = read_matrix_market_sparse(a_path);
    Eigen::MatrixXd B = read_matrix_market_dense(b_path);
    const Eigen::MatrixXd cz = read_matrix_market_dense(cz_path);
    const Eigen::MatrixXd cy = read_matrix_market_dense(cy_path);
    if (cz.rows() != 1 || cy.rows() != 1 || B.cols() != 1)
        throw std::invalid_argument("observer plant files must describe SISO u, y, z channels");
    Eigen::MatrixXd C(2, cz.cols());
    C.row(0) = cz;
    C.row(1) = cy;
    auto plant = std::make_shared<DescriptorStateSpace>(std::move(E), std::move(A), std::move(B),
                                                        std::move(C));
    return build_observer_problem(plant, observer_order);
}

Eigen::VectorXd initialize_observer(const ObserverProblem& problem,
                                    std::optional<Eigen::VectorXd> explicit_mu0) {
    const int r = problem.observer_order;
    if (explicit_mu0) {
        const ObserverMatrices k = unpack_observer(*explicit_mu0, r);
        if (spectral_abscissa(k.A_q) >= 0.0)
            throw std::runtime_error("initialize_observer: supplied mu_0 has an unstable observer");
        return *explicit_mu0;
    }
    const ModalSurrogate s = modal_truncation(*problem.plant, r);
    if (s.plant_abscissa >= 0.0)
        throw std::runtime_error("initialize_observer: plant is not asymptotically stable");

    const Eigen::MatrixXd P = filter_riccati(s.Ar, Eigen::MatrixXd(s.Cyr), s.Br);
    const Eigen::VectorXd L = P * s.Cyr.transpose();

    ObserverMatrices k;
    k.A_q = s.Ar - L * s.Cyr;
    k.B_q.resize(r, 2);
    k.B_q.col(0) = s.Br;
    k.B_q.col(1) = L;
    k.C_q = s.Czr;
    if (spectral_abscissa(k.A_q) >= 0.0)
        throw std::runtime_error(
            "initialize_observer: surrogate design failed to stabilize; supply mu_0 explicitly");
    return pack_observer(k);
}

StepSizePolicy observer_step_schedule() {
    return StepSizePolicy::custom(
        [](int k) {
            if (k <= 20) return 1e-4;
            if (k <= 40) return 0.5e-4;
            if (k <= 60) return 0.25e-4;
            return (61.0 / k) * 0.125e-4;
        },
        "observer case-study schedule (1e-4 with halvings, ~1/k tail)");
}

// ---------------------------------------------------------------------------
// Small closed-form benchmarks
// ---------------------------------------------------------------------------

ParametrizedSystem scalar_gain_benchmark() {
    ParametrizedSystem ps;
    ps.n_params = 1;
    ps.domain = ParameterBox::unbounded(1);
    ps.joint = [](const Eigen::VectorXd& mu, double omega) {
        const Complex lag = 1.0 / Complex(1.0, omega);
        JointEvaluation je;
        je.value.resize(1, 1);
        je.value(0, 0) = mu[0] * lag;
        TransferValue g(1, 1);
        g(0, 0) = lag;
        je.gradients.push_back(std::move(g));
        return je;
    };
    ps.build = [](const Eigen::VectorXd& mu) -> SystemPtr {
        const double gain = mu[0];
        return std::make_shared<AnalyticSystem>(1, 1, [gain](double omega) {
            TransferValue v(1, 1);
            v(0, 0) = gain / Complex(1.0, omega);
            return v;
        });
    };
    ps.build_gradient = [](const Eigen::VectorXd&, int) -> SystemPtr {
        return std::make_shared<AnalyticSystem>(1, 1, [](double omega) {
            TransferValue v(1, 1);
            v(0, 0) = 1.0 / Complex(1.0, omega);
            return v;
        });
    };
    return ps;
}

RealizableParametrizedSystem scalar_gain_realizable() {
    RealizableParametrizedSystem rps;
    rps.n_params = 1;
    rps.realize = [](const Eigen::VectorXd& mu) {
        DenseRealization g;
        g.A = -Eigen::MatrixXd::Identity(1, 1);
        g.B = Eigen::MatrixXd::Identity(1, 1);
        g.C = mu[0] * Eigen::MatrixXd::Identity(1, 1);
        return g;
    };
    rps.realize_gradient = [](const Eigen::VectorXd&, int) {
        DenseRealization g;
        g.A = -Eigen::MatrixXd::Identity(1, 1);
        g.B = Eigen::MatrixXd::Identity(1, 1);
        g.C = Eigen::MatrixXd::Identity(1, 1);
        return g;
    };
    return rps;
}

RealizableParametrizedSystem pole_example_realizable() {
    RealizableParametrizedSystem rps;
    rps.n_params = 1;
    rps.realize = [](const Eigen::VectorXd& mu) {
        DenseRealization g;
        g.A = Eigen::MatrixXd::Constant(1, 1, -mu[0]);
        g.B = Eigen::MatrixXd::Identity(1, 1);
        g.C = Eigen::MatrixXd::Constant(1, 1, 2.0 * mu[0]);
        return g;
    };
    rps.realize_gradient = [](const Eigen::VectorXd& mu, int) {
        // sensitivity realization of d/dmu [2 mu / (s + mu)]
        DenseRealization g;
        g.A.resize(2, 2);
        g.A << -mu[0], 0.0, -1.0, -mu[0];
        g.B.resize(2, 1);
        g.B << 1.0, 0.0;
        g.C.resize(1, 2);
        g.C << 2.0, 2.0 * mu[0];
        return g;
    };
    return rps;
}

RandomAffineBenchmark random_affine_benchmark(int n_states, int n_params, std::uint64_t seed) {
    RngStream rng(seed);
    auto randm = [&rng](Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
        return m;
    };
    Eigen::MatrixXd A = randm(n_states, n_states) / std::sqrt(static_cast<double>(n_states));
    A -= (spectral_abscissa(A) + 0.5) * Eigen::MatrixXd::Identity(n_states, n_states);
    const Eigen::MatrixXd B = randm(n_states, 1);
    std::vector<Eigen::MatrixXd> C(static_cast<std::size_t>(n_params) + 1);
    for (auto& c : C) c = randm(1, n_states);

    auto shared_A = std::make_shared<Eigen::MatrixXd>(std::move(A));
    auto shared_B = std::make_shared<Eigen::MatrixXd>(B);
    auto shared_C = std::make_shared<std::vector<Eigen::MatrixXd>>(std::move(C));

    RandomAffineBenchmark bench;
    bench.ps.n_params = n_params;
    bench.ps.domain = ParameterBox::unbounded(n_params);
    bench.ps.joint = [shared_A, shared_B, shared_C, n_params](const Eigen::VectorXd& mu,
                                                              double omega) {
        Eigen::MatrixXcd pencil = (-*shared_A).cast<Complex>();
        pencil.diagonal().array() += Complex(0.0, omega);
        const Eigen::VectorXcd x = pencil.partialPivLu().solve(shared_B->cast<Complex>());
        JointEvaluation je;
        Eigen::RowVectorXd c_total = (*shared_C)[0];
        for (int j = 0; j < n_params; ++j) c_total += mu[j] * (*shared_C)[static_cast<std::size_t>(j) + 1];
        je.value.resize(1, 1);
        je.value(0, 0) = (c_total.cast<Complex>() * x)(0);
        for (int j = 0; j < n_params; ++j) {
            TransferValue g(1, 1);
            g(0, 0) = ((*shared_C)[static_cast<std::size_t>(j) + 1].cast<Complex>() * x)(0);
            je.gradients.push_back(std::move(g));
        }
        return je;
    };
    const auto joint = bench.ps.joint;
    bench.ps.build = [joint, n_params](const Eigen::VectorXd& mu) -> SystemPtr {
        return std::make_shared<AnalyticSystem>(
            1, 1, [joint, mu](double omega) { return joint(mu, omega).value; });
    };
    bench.ps.build_gradient = [joint](const Eigen::VectorXd& mu, int j) -> SystemPtr {
        return std::make_shared<AnalyticSystem>(1, 1, [joint, mu, j](double omega) {
            return joint(mu, omega).gradients[static_cast<std::size_t>(j)];
        });
    };

    bench.oracle.n_params = n_params;
    bench.oracle.realize = [shared_A, shared_B, shared_C, n_params](const Eigen::VectorXd& mu) {
        DenseRealization g;
        g.A = *shared_A;
        g.B = *shared_B;
        g.C = (*shared_C)[0];
        for (int j = 0; j < n_params; ++j) g.C += mu[j] * (*shared_C)[static_cast<std::size_t>(j) + 1];
        return g;
    };
    bench.oracle.realize_gradient = [shared_A, shared_B, shared_C](const Eigen::VectorXd&, int j) {
        DenseRealization g;
        g.A = *shared_A;
        g.B = *shared_B;
        g.C = (*shared_C)[static_cast<std::size_t>(j) + 1];
        return g;
    };
    return bench;
}

}  // namespace sh2
