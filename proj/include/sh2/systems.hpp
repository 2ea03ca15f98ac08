#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace sh2 {

using Complex = std::complex<double>;

// Complex transfer-matrix value at s = i*omega (n_outputs x n_inputs).
using TransferValue = Eigen::MatrixXcd;

// Raised when the shifted pencil (i*omega*E - A) cannot be factored,
// i.e. i*omega is an eigenvalue of (A, E).
class SingularShiftError : public std::runtime_error {
public:
    explicit SingularShiftError(double omega)
        : std::runtime_error("singular shift: i*omega is an eigenvalue of the pencil at omega = " +
                             std::to_string(omega)),
          omega_(omega) {}
    double omega() const { return omega_; }

private:
    double omega_;
};

// Raised when a feedback interconnection is singular at the requested frequency.
class IllPosedInterconnection : public std::runtime_error {
public:
    explicit IllPosedInterconnection(double omega)
        : std::runtime_error("ill-posed interconnection at omega = " + std::to_string(omega)) {}
};

// Anything that returns a complex transfer-matrix value at s = i*omega.
// Implementations are immutable after construction; evaluate must be safe
// to call concurrently from multiple workers on the same system.
class FrequencyEvaluableSystem {
public:
    virtual ~FrequencyEvaluableSystem() = default;

    virtual Eigen::Index outputs() const = 0;
    virtual Eigen::Index inputs() const = 0;
    virtual TransferValue evaluate(double omega) const = 0;
};

using SystemPtr = std::shared_ptr<const FrequencyEvaluableSystem>;

// (E, A, B, C) realization with transfer value C (i*omega*E - A)^{-1} B.
// E and A are held either dense or sparse; B, C are always dense.
class DescriptorStateSpace final : public FrequencyEvaluableSystem {
public:
    enum class Storage { Dense, Sparse };

    DescriptorStateSpace(Eigen::MatrixXd E, Eigen::MatrixXd A, Eigen::MatrixXd B,
                         Eigen::MatrixXd C);
    DescriptorStateSpace(Eigen::SparseMatrix<double> E, Eigen::SparseMatrix<double> A,
                         Eigen::MatrixXd B, Eigen::MatrixXd C);

    Storage storage() const { return storage_; }
    Eigen::Index order() const { return n_; }
    Eigen::Index outputs() const override { return C_.rows(); }
    Eigen::Index inputs() const override { return B_.cols(); }

    // Dense copies of E and A regardless of storage kind.
    Eigen::MatrixXd dense_E() const;
    Eigen::MatrixXd dense_A() const;
    const Eigen::MatrixXd& B() const { return B_; }
    const Eigen::MatrixXd& C() const { return C_; }

    TransferValue evaluate(double omega) const override;

    // Solves (i*omega*E - A) x = B_ * rhs-free form: returns (i*omega*E - A)^{-1} B.
    Eigen::MatrixXcd solve_shifted(double omega) const;

private:
    Storage storage_;
    Eigen::Index n_;
    Eigen::MatrixXd Ed_, Ad_;                  // dense storage
    Eigen::SparseMatrix<double> Es_, As_;      // sparse storage
    Eigen::MatrixXd B_, C_;
};

// Closed-form transfer evaluation rule, for systems without a realization
// (e.g. solutions of PDEs in the frequency domain).
class AnalyticSystem final : public FrequencyEvaluableSystem {
public:
    AnalyticSystem(Eigen::Index n_outputs, Eigen::Index n_inputs,
                   std::function<TransferValue(double)> rule)
        : ny_(n_outputs), nu_(n_inputs), rule_(std::move(rule)) {
        if (ny_ < 1 || nu_ < 1) throw std::invalid_argument("AnalyticSystem: empty dimensions");
        if (!rule_) throw std::invalid_argument("AnalyticSystem: missing evaluation rule");
    }

    Eigen::Index outputs() const override { return ny_; }
    Eigen::Index inputs() const override { return nu_; }
    TransferValue evaluate(double omega) const override;

private:
    Eigen::Index ny_, nu_;
    std::function<TransferValue(double)> rule_;
};

// Axis-aligned parameter box, possibly unbounded on any side.
struct ParameterBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static ParameterBox unbounded(int n);
    static ParameterBox nonpositive(int n);

    int dimension() const { return static_cast<int>(lower.size()); }
    bool contains(const Eigen::VectorXd& mu) const;
    Eigen::VectorXd project(const Eigen::VectorXd& mu) const;
    // True when at least one bound is finite (projection can be active).
    bool is_proper() const;
};

// G(mu; i*omega) together with all gradient values dG/dmu_j(mu; i*omega).
struct JointEvaluation {
    TransferValue value;
    std::vector<TransferValue> gradients;
};

// G(mu) plus its parameter-gradient systems dG/dmu_j, evaluable jointly at a
// frequency. `joint`, when set, fuses the evaluation (sharing plant solves);
// otherwise build/build_gradient are composed.
struct ParametrizedSystem {
    int n_params = 0;
    ParameterBox domain;
    std::function<SystemPtr(const Eigen::VectorXd&)> build;
    std::function<SystemPtr(const Eigen::VectorXd&, int)> build_gradient;
    std::function<JointEvaluation(const Eigen::VectorXd&, double)> joint;

    void require_in_domain(const Eigen::VectorXd& mu) const;
    JointEvaluation evaluate_joint(const Eigen::VectorXd& mu, double omega) const;
};

enum class FeedbackTopology {
    // SISO plant Phi under u = K y: closed loop d -> (y, u) is
    // [1; K] * Phi / (1 - Phi K).
    SisoFeedback,
    // Plant (u) -> (z, y), observer (u, y + v) -> zhat: error map
    // (w, u, v) -> e = z - zhat, with plant driven by u + w.
    ObserverError,
};

// Frequency-pointwise interconnection; no joint realization is formed.
SystemPtr feedback_interconnect(SystemPtr plant, SystemPtr controller, FeedbackTopology topology);

// Max over j and matrix entries of |central difference - dG/dmu_j| at (mu, omega).
double parameter_gradient_fd_check(const ParametrizedSystem& ps, const Eigen::VectorXd& mu,
                                   double omega, double h);

}  // namespace sh2
