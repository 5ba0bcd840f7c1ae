#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "dcap/errors.hpp"
#include "dcap/expression.hpp"
#include "dcap/regularization.hpp"

namespace dcap {

/// 1-D mesh with piecewise-linear hat functions. Each end node is either Dirichlet
/// (basis function removed) or Neumann.
struct Mesh1D {
    std::vector<double> nodes;
    bool dirichlet_left = true;
    bool dirichlet_right = false;
    int quad_order = 5; ///< Gauss points per element

    static Mesh1D uniform(double lo, double hi, int elements, bool dirichlet_left,
                          bool dirichlet_right, int quad_order = 5);

    int elements() const { return static_cast<int>(nodes.size()) - 1; }
    int node_count() const { return static_cast<int>(nodes.size()); }
    double length() const { return nodes.back() - nodes.front(); }
    std::vector<int> dirichlet_nodes() const;
    std::vector<int> neumann_nodes() const;

    /// Throws MeshError on fewer than two nodes, non-increasing coordinates, no
    /// Dirichlet end, or a non-positive quadrature order.
    void validate() const;
};

/// Extra right-hand side used only for manufactured-solution runs: the load vector
/// gains ∫ f0 e_l + ∫ f1 e_l' with (f0, f1) = source(x, t).
using WeakSource = std::function<std::pair<double, double>(double x, double t)>;

struct ProblemData {
    SpaceTimeField s_d;                          ///< lift / boundary saturation S_D(x, t)
    std::function<double(double)> s_i;           ///< initial saturation
    std::function<double(double, double)> r0;   ///< Neumann flux factor R₀(x, t)
    FluxCutoff sigma;                            ///< flux cutoff σ(s)
    double horizon = 1.0;
    WeakSource source;                           ///< empty unless verifying
};

/// γ(t) over the free basis functions, plus nodal caches.
struct GalerkinState {
    double t = 0.0;
    Eigen::VectorXd gamma;
    Eigen::VectorXd saturation; ///< S at every mesh node
    Eigen::VectorXd beta;       ///< β_ε(S) at every mesh node
};

/// A γ' = B γ + F at a given (γ, t). A is SPD, B symmetric negative semidefinite.
struct AssembledSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::SparseMatrix<double> B;
    Eigen::VectorXd F;
};

/// Initial projection: the Galerkin L² projector, or its mass-lumped form, which keeps
/// every nodal value inside the range of the projected function.
enum class InitialProjection { l2, lumped };

struct StepperOptions {
    int picard_max = 50;
    int newton_max = 30;
    double tol = 1e-10;      ///< relative nonlinear residual
    double dt_min = 1e-9;
    bool implicit_b = true;  ///< treat Bγ implicitly inside the fixed-point loop
};

struct StepStats {
    int picard_iterations = 0;
    int newton_iterations = 0;
    int halvings = 0;
    bool used_newton = false;
    double residual = 0.0;
};

/// Nonlinear step did not converge within the iteration caps.
class StepFailure : public NumericError {
public:
    using NumericError::NumericError;
};

/// One quadrature point of the mesh with the two local hat functions.
struct QuadPoint {
    int element = 0;
    double x = 0.0;
    double weight = 0.0;
    double phi[2] = {0.0, 0.0};
    double dphi[2] = {0.0, 0.0};
};

class GalerkinSystem {
public:
    GalerkinSystem(Mesh1D mesh, ProblemData data, RegularizedModel model,
                   StepperOptions options = {});

    const Mesh1D& mesh() const { return mesh_; }
    const ProblemData& data() const { return data_; }
    const RegularizedModel& model() const { return model_; }
    const StepperOptions& options() const { return options_; }
    int dofs() const { return dofs_; }
    /// Free-function index of a mesh node, or −1 on a Dirichlet node.
    int dof(int node) const { return dof_of_node_[node]; }
    const std::vector<QuadPoint>& quadrature() const { return quad_; }

    /// Projection of β_ε(S_i) − β_ε(S_D(·, 0)) onto the free hat functions.
    GalerkinState project_initial(InitialProjection kind = InitialProjection::l2) const;

    /// State with the given coefficients and nodal caches filled in.
    GalerkinState make_state(Eigen::VectorXd gamma, double t) const;

    AssembledSystem assemble(const Eigen::VectorXd& gamma, double t) const;

    /// Backward-Euler residual A(γ)(γ − γ_prev) − dt (B(γ)γ + F(γ, t_next)).
    Eigen::VectorXd residual(const Eigen::VectorXd& gamma, const Eigen::VectorXd& gamma_prev,
                             double t_next, double dt) const;

    /// w = β_ε(S_D(x, t)) + Σ γ_j e_j(x) and its x-derivative.
    std::pair<double, double> lifted_beta(const Eigen::VectorXd& gamma, double t, double x) const;
    double recover_saturation(const GalerkinState& state, double x) const;

    /// One backward-Euler step. Throws StepFailure when both the fixed-point loop and
    /// the Newton fallback miss the tolerance.
    GalerkinState step(const GalerkinState& state, double dt, StepStats* stats = nullptr) const;

    /// step() with recursive halving on failure, down to options().dt_min.
    GalerkinState advance(const GalerkinState& state, double dt, StepStats* stats = nullptr) const;

    /// Σ γ_j e_j restricted to one element at local hat values (phi0, phi1).
    double expansion(const Eigen::VectorXd& gamma, int element, double phi0, double phi1) const;

private:
    double gamma_at(const Eigen::VectorXd& gamma, int node) const
    {
        const int d = dof_of_node_[node];
        return d < 0 ? 0.0 : gamma[d];
    }
    int locate(double x) const;
    double residual_norm(const AssembledSystem& sys, const Eigen::VectorXd& gamma,
                         const Eigen::VectorXd& gamma_prev, double dt,
                         Eigen::VectorXd* r) const;
    Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& gamma,
                                         const Eigen::VectorXd& gamma_prev, double t_next,
                                         double dt, const Eigen::VectorXd& r0) const;

    Mesh1D mesh_;
    ProblemData data_;
    RegularizedModel model_;
    StepperOptions options_;
    std::vector<int> dof_of_node_;
    int dofs_ = 0;
    int neumann_node_left_ = -1;
    int neumann_node_right_ = -1;
    std::vector<QuadPoint> quad_;
};

} // namespace dcap
