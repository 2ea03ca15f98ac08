#include "sh2/systems.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

namespace sh2 {

DescriptorStateSpace::DescriptorStateSpace(Eigen::MatrixXd E, Eigen::MatrixXd A, Eigen::MatrixXd B,
                                           Eigen::MatrixXd C)
    : storage_(Storage::Dense),
      n_(E.rows()),
      Ed_(std::move(E)),
      Ad_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)) {
    if (Ed_.rows() != Ed_.cols() || Ad_.rows() != Ad_.cols() || Ed_.rows() != Ad_.rows())
        throw std::invalid_argument("DescriptorStateSpace: E, A must be square and equal size");
    if (B_.rows() != n_ || C_.cols() != n_)
        throw std::invalid_argument("DescriptorStateSpace: B/C dimensions do not match state size");
}

DescriptorStateSpace::DescriptorStateSpace(Eigen::SparseMatrix<double> E,
                                           Eigen::SparseMatrix<double> A, Eigen::MatrixXd B,
                                           Eigen::MatrixXd C)
    : storage_(Storage::Sparse),
      n_(E.rows()),
      Es_(std::move(E)),
      As_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)) {
    if (Es_.rows() != Es_.cols() || As_.rows() != As_.cols() || Es_.rows() != As_.rows())
        throw std::invalid_argument("DescriptorStateSpace: E, A must be square and equal size");
    if (B_.rows() != n_ || C_.cols() != n_)
        throw std::invalid_argument("DescriptorStateSpace: B/C dimensions do not match state size");
    Es_.makeCompressed();
    As_.makeCompressed();
}

Eigen::MatrixXd DescriptorStateSpace::dense_E() const {
    return storage_ == Storage::Dense ? Ed_ : Eigen::MatrixXd(Es_);
}

Eigen::MatrixXd DescriptorStateSpace::dense_A() const {
    return storage_ == Storage::Dense ? Ad_ : Eigen::MatrixXd(As_);
}

Eigen::MatrixXcd DescriptorStateSpace::solve_shifted(double omega) const {
    const Complex s(0.0, omega);
    if (storage_ == Storage::Dense) {
        Eigen::MatrixXcd pencil = s * Ed_.cast<Complex>() - Ad_.cast<Complex>();
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(pencil);
        if (!lu.isInvertible()) throw SingularShiftError(omega);
        return lu.solve(B_.cast<Complex>());
    }
    Eigen::SparseMatrix<Complex> pencil =
        (s * Es_.cast<Complex>() - As_.cast<Complex>()).pruned();
    pencil.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
    lu.compute(pencil);
    if (lu.info() != Eigen::Success) throw SingularShiftError(omega);
    Eigen::MatrixXcd x = lu.solve(B_.cast<Complex>());
    if (lu.info() != Eigen::Success) throw SingularShiftError(omega);
    return x;
}

TransferValue DescriptorStateSpace::evaluate(double omega) const {
    return C_.cast<Complex>() * solve_shifted(omega);
}

TransferValue AnalyticSystem::evaluate(double omega) const {
    TransferValue v = rule_(omega);
    if (v.rows() != ny_ || v.cols() != nu_)
        throw std::logic_error("AnalyticSystem: rule returned wrong dimensions");
    return v;
}

ParameterBox ParameterBox::unbounded(int n) {
    const double inf = std::numeric_limits<double>::infinity();
    ParameterBox box;
    box.lower = Eigen::VectorXd::Constant(n, -inf);
    box.upper = Eigen::VectorXd::Constant(n, inf);
    return box;
}

ParameterBox ParameterBox::nonpositive(int n) {
    ParameterBox box = unbounded(n);
    box.upper.setZero();
    return box;
}

bool ParameterBox::contains(const Eigen::VectorXd& mu) const {
    if (mu.size() != lower.size()) return false;
    return (mu.array() >= lower.array()).all() && (mu.array() <= upper.array()).all();
}

Eigen::VectorXd ParameterBox::project(const Eigen::VectorXd& mu) const {
    return mu.cwiseMax(lower).cwiseMin(upper);
}

bool ParameterBox::is_proper() const {
    return lower.array().isFinite().any() || upper.array().isFinite().any();
}

void ParametrizedSystem::require_in_domain(const Eigen::VectorXd& mu) const {
    if (mu.size() != n_params)
        throw std::invalid_argument("parameter vector has wrong dimension");
    if (!domain.contains(mu)) throw std::domain_error("parameter outside domain box");
}

JointEvaluation ParametrizedSystem::evaluate_joint(const Eigen::VectorXd& mu, double omega) const {
    require_in_domain(mu);
    if (joint) return joint(mu, omega);
    JointEvaluation je;
    je.value = build(mu)->evaluate(omega);
    je.gradients.reserve(n_params);
    for (int j = 0; j < n_params; ++j)
        je.gradients.push_back(build_gradient(mu, j)->evaluate(omega));
    return je;
}

namespace {

class SisoFeedbackSystem final : public FrequencyEvaluableSystem {
public:
    SisoFeedbackSystem(SystemPtr plant, SystemPtr controller)
        : plant_(std::move(plant)), controller_(std::move(controller)) {
        if (plant_->outputs() != 1 || plant_->inputs() != 1 || controller_->outputs() != 1 ||
            controller_->inputs() != 1)
            throw std::invalid_argument("SisoFeedback: plant and controller must be SISO");
    }

    Eigen::Index outputs() const override { return 2; }
    Eigen::Index inputs() const override { return 1; }

    TransferValue evaluate(double omega) const override {
        const Complex phi = plant_->evaluate(omega)(0, 0);
        const Complex k = controller_->evaluate(omega)(0, 0);
        const Complex den = 1.0 - phi * k;
        if (std::abs(den) < 1e-300) throw IllPosedInterconnection(omega);
        TransferValue g(2, 1);
        g(0, 0) = phi / den;
        g(1, 0) = k * phi / den;
        return g;
    }

private:
    SystemPtr plant_;
    SystemPtr controller_;
};

// Error map (w, u, v) -> e = z - zhat. Plant P: u -> (z, y) with the plant
// input driven by u + w; observer K: (u, y + v) -> zhat. Open cascade, so
// no loop inversion is needed here.
class ObserverErrorSystem final : public FrequencyEvaluableSystem {
public:
    ObserverErrorSystem(SystemPtr plant, SystemPtr observer)
        : plant_(std::move(plant)), observer_(std::move(observer)) {
        if (plant_->outputs() != 2 || plant_->inputs() != 1)
            throw std::invalid_argument("ObserverError: plant must map u -> (z, y)");
        if (observer_->outputs() != 1 || observer_->inputs() != 2)
            throw std::invalid_argument("ObserverError: observer must map (u, y~) -> zhat");
    }

    Eigen::Index outputs() const override { return 1; }
    Eigen::Index inputs() const override { return 3; }

    TransferValue evaluate(double omega) const override {
        const TransferValue p = plant_->evaluate(omega);   // [Pz; Py]
        const TransferValue k = observer_->evaluate(omega); // [Ku, Ky]
        const Complex pz = p(0, 0), py = p(1, 0);
        const Complex ku = k(0, 0), ky = k(0, 1);
        TransferValue g(1, 3);
        g(0, 0) = pz - ky * py;         // w -> e
        g(0, 1) = pz - ku - ky * py;    // u -> e
        g(0, 2) = -ky;                  // v -> e
        return g;
    }

private:
    SystemPtr plant_;
    SystemPtr observer_;
};

}  // namespace

SystemPtr feedback_interconnect(SystemPtr plant, SystemPtr controller, FeedbackTopology topology) {
    switch (topology) {
        case FeedbackTopology::SisoFeedback:
            return std::make_shared<SisoFeedbackSystem>(std::move(plant), std::move(controller));
        case FeedbackTopology::ObserverError:
            return std::make_shared<ObserverErrorSystem>(std::move(plant), std::move(controller));
    }
    throw std::logic_error("unknown topology");
}

double parameter_gradient_fd_check(const ParametrizedSystem& ps, const Eigen::VectorXd& mu,
                                   double omega, double h) {
    const JointEvaluation at_mu = ps.evaluate_joint(mu, omega);
    double worst = 0.0;
    for (int j = 0; j < ps.n_params; ++j) {
        Eigen::VectorXd up = mu, dn = mu;
        up[j] += h;
        dn[j] -= h;
        const TransferValue fd =
            (ps.evaluate_joint(up, omega).value - ps.evaluate_joint(dn, omega).value) / (2.0 * h);
        worst = std::max(worst, (fd - at_mu.gradients[j]).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace sh2
