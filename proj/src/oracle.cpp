#include "sh2/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace sh2 {

TransferValue DenseRealization::evaluate(double omega) const {
    const Complex s(0.0, omega);
    Eigen::MatrixXcd pencil = -A.cast<Complex>();
    pencil.diagonal().array() += s;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(pencil);
    return C.cast<Complex>() * lu.solve(B.cast<Complex>());
}

DenseRealization to_dense_realization(const DescriptorStateSpace& sys, Eigen::Index cap) {
    if (sys.order() > cap)
        throw std::invalid_argument("to_dense_realization: state dimension exceeds oracle cap " +
                                    std::to_string(cap));
    const Eigen::MatrixXd E = sys.dense_E();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(E);
    if (!lu.isInvertible())
        throw std::invalid_argument("to_dense_realization: singular E is not supported");
    DenseRealization r;
    r.A = lu.solve(sys.dense_A());
    r.B = lu.solve(sys.B());
    r.C = sys.C();
    return r;
}

double spectral_abscissa(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("spectral_abscissa: eigensolver failed");
    return es.eigenvalues().real().maxCoeff();
}

double spectral_abscissa(const Eigen::MatrixXd& A, const Eigen::MatrixXd& E) {
    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> es(A, E, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("spectral_abscissa: eigensolver failed");
    double worst = -std::numeric_limits<double>::infinity();
    const auto alphas = es.alphas();
    const auto betas = es.betas();
    for (Eigen::Index i = 0; i < alphas.size(); ++i) {
        if (betas[i] == 0.0) continue;  // infinite eigenvalue of the pencil
        worst = std::max(worst, (alphas[i] / betas[i]).real());
    }
    return worst;
}

Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                const Eigen::MatrixXd& C) {
    // Bartels-Stewart: A = U Ta U^H, B = V Tb V^H, then solve the triangular
    // system Ta Y + Y Tb = U^H C V column by column.
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur_a(A.cast<Complex>());
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur_b(B.cast<Complex>());
    if (schur_a.info() != Eigen::Success || schur_b.info() != Eigen::Success)
        throw std::runtime_error("solve_sylvester: Schur decomposition failed");
    const Eigen::MatrixXcd& U = schur_a.matrixU();
    const Eigen::MatrixXcd& Ta = schur_a.matrixT();
    const Eigen::MatrixXcd& V = schur_b.matrixU();
    const Eigen::MatrixXcd& Tb = schur_b.matrixT();

    const Eigen::MatrixXcd F = U.adjoint() * C.cast<Complex>() * V;
    const Eigen::Index n = Ta.rows(), m = Tb.rows();
    Eigen::MatrixXcd Y(n, m);
    Eigen::MatrixXcd shifted = Ta;
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::VectorXcd rhs = F.col(j);
        if (j > 0) rhs -= Y.leftCols(j) * Tb.block(0, j, j, 1);
        shifted.diagonal() = Ta.diagonal().array() + Tb(j, j);
        Y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    return (U * Y * V.adjoint()).real();
}

double h2_inner(const DenseRealization& sys_a, const DenseRealization& sys_b) {
    if (sys_a.outputs() != sys_b.outputs() || sys_a.inputs() != sys_b.inputs())
        throw std::invalid_argument("h2_inner: input/output dimensions differ");
    const double inf = std::numeric_limits<double>::infinity();
    if (spectral_abscissa(sys_a.A) >= 0.0 || spectral_abscissa(sys_b.A) >= 0.0) return inf;
    // Cross-Gramian X: A_a X + X A_b^T + B_a B_b^T = 0, inner = tr(C_a X C_b^T).
    const Eigen::MatrixXd X = solve_sylvester(sys_a.A, sys_b.A.transpose(),
                                              -(sys_a.B * sys_b.B.transpose()));
    return (sys_a.C * X * sys_b.C.transpose()).trace();
}

double h2_norm_squared(const DenseRealization& sys) { return h2_inner(sys, sys); }

Eigen::VectorXd exact_gradient(const RealizableParametrizedSystem& ps, const Eigen::VectorXd& mu) {
    const DenseRealization g = ps.realize(mu);
    if (spectral_abscissa(g.A) >= 0.0)
        throw std::domain_error("exact_gradient: G(mu) is not asymptotically stable (infinite cost)");
    Eigen::VectorXd grad(ps.n_params);
    for (int j = 0; j < ps.n_params; ++j) grad[j] = h2_inner(g, ps.realize_gradient(mu, j));
    return grad;
}

namespace {

struct AdaptiveSimpson {
    const std::function<double(double)>& f;
    double rel_tol;
    int evaluations = 0;
    int max_depth = 40;

    double recurse(double a, double b, double fa, double fm, double fb, double whole, int depth,
                   double scale) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = f(lm), frm = f(rm);
        evaluations += 2;
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double err = left + right - whole;
        if (std::abs(err) <= 15.0 * rel_tol * std::max(scale, std::abs(left + right)))
            return left + right + err / 15.0;
        if (depth >= max_depth)
            throw std::runtime_error("h2_norm_squared_quadrature: refinement did not converge on [" +
                                     std::to_string(a) + ", " + std::to_string(b) + "]");
        return recurse(a, m, fa, flm, fm, left, depth + 1, scale) +
               recurse(m, b, fm, frm, fb, right, depth + 1, scale);
    }

    double integrate(double a, double b, double scale) {
        const double m = 0.5 * (a + b);
        const double fa = f(a), fm = f(m), fb = f(b);
        evaluations += 3;
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        return recurse(a, b, fa, fm, fb, whole, 0, scale);
    }
};

}  // namespace

QuadratureResult h2_norm_squared_quadrature(const FrequencyEvaluableSystem& sys, double omega_max,
                                            double rel_tolerance) {
    if (!(omega_max > 0.0) || !std::isfinite(omega_max))
        throw std::invalid_argument("h2_norm_squared_quadrature: need finite omega_max > 0");
    const std::function<double(double)> g = [&sys](double omega) {
        return sys.evaluate(omega).squaredNorm();
    };
    // Integrate omega >= 0 only and double: valid by conjugate symmetry.
    // Panels follow decades so the adaptive rule is not fed 6+ orders of
    // magnitude at once.
    std::vector<double> edges{0.0};
    double edge = std::min(1.0, omega_max);
    while (edge < omega_max) {
        edges.push_back(edge);
        edge *= 10.0;
    }
    edges.push_back(omega_max);

    AdaptiveSimpson simpson{g, rel_tolerance};
    // crude scale so relative tolerance is meant w.r.t. the whole integral
    double scale = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double mid = 0.5 * (edges[i] + edges[i + 1]);
        scale = std::max(scale, g(mid) * (edges[i + 1] - edges[i]));
        ++simpson.evaluations;
    }
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        integral += simpson.integrate(edges[i], edges[i + 1], scale);

    QuadratureResult result;
    // tail estimate assuming ~1/omega^2 decay of the response energy
    result.truncation_tail = g(omega_max) * omega_max / M_PI;
    result.value = 2.0 * integral / (2.0 * M_PI);
    result.evaluations = simpson.evaluations + 1;
    return result;
}

bool lemma_norm_xi_check(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double nx = x.norm();
    const double lhs = nx * std::max(y.norm(), (x + y).norm());
    const double rhs = 2.0 * (x.squaredNorm() + y.squaredNorm());
    return lhs <= rhs * (1.0 + 1e-12);
}

}  // namespace sh2
