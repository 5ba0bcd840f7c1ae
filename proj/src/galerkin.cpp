#include "dcap/galerkin.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace dcap {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

Mesh1D Mesh1D::uniform(double lo, double hi, int elements, bool dirichlet_left,
                       bool dirichlet_right, int quad_order)
{
    if (elements < 1)
        throw MeshError("Mesh1D::uniform: need at least one element");
    Mesh1D m;
    m.nodes.resize(elements + 1);
    for (int k = 0; k <= elements; ++k)
        m.nodes[k] = lo + (hi - lo) * k / elements;
    m.nodes.back() = hi;
    m.dirichlet_left = dirichlet_left;
    m.dirichlet_right = dirichlet_right;
    m.quad_order = quad_order;
    return m;
}

std::vector<int> Mesh1D::dirichlet_nodes() const
{
    std::vector<int> out;
    if (dirichlet_left)
        out.push_back(0);
    if (dirichlet_right)
        out.push_back(node_count() - 1);
    return out;
}

std::vector<int> Mesh1D::neumann_nodes() const
{
    std::vector<int> out;
    if (!dirichlet_left)
        out.push_back(0);
    if (!dirichlet_right)
        out.push_back(node_count() - 1);
    return out;
}

void Mesh1D::validate() const
{
    if (nodes.size() < 2)
        throw MeshError("mesh needs at least two nodes");
    for (std::size_t k = 1; k < nodes.size(); ++k)
        if (!(nodes[k] > nodes[k - 1]))
            throw MeshError("mesh nodes must be strictly increasing");
    if (!dirichlet_left && !dirichlet_right)
        throw MeshError("mesh needs at least one Dirichlet end");
    if (quad_order < 1)
        throw MeshError("quadrature order must be positive");
}

GalerkinSystem::GalerkinSystem(Mesh1D mesh, ProblemData data, RegularizedModel model,
                               StepperOptions options)
    : mesh_(std::move(mesh)), data_(std::move(data)), model_(std::move(model)), options_(options)
{
    mesh_.validate();
    if (!data_.s_d || !data_.s_i)
        throw ParameterError("problem data needs S_D and S_i");
    if (!data_.r0)
        data_.r0 = [](double, double) { return 0.0; };

    const int n = mesh_.node_count();
    dof_of_node_.assign(n, -1);
    for (int k = 0; k < n; ++k) {
        const bool fixed = (k == 0 && mesh_.dirichlet_left) || (k == n - 1 && mesh_.dirichlet_right);
        if (!fixed)
            dof_of_node_[k] = dofs_++;
    }
    if (!mesh_.dirichlet_left)
        neumann_node_left_ = 0;
    if (!mesh_.dirichlet_right)
        neumann_node_right_ = n - 1;

    const GaussRule& rule = gauss_legendre(mesh_.quad_order);
    for (int e = 0; e < mesh_.elements(); ++e) {
        const double xa = mesh_.nodes[e];
        const double xb = mesh_.nodes[e + 1];
        const double h = xb - xa;
        for (int q = 0; q < rule.order(); ++q) {
            QuadPoint p;
            p.element = e;
            const double r = 0.5 * (rule.nodes[q] + 1.0);
            p.x = xa + h * r;
            p.weight = 0.5 * h * rule.weights[q];
            p.phi[0] = 1.0 - r;
            p.phi[1] = r;
            p.dphi[0] = -1.0 / h;
            p.dphi[1] = 1.0 / h;
            quad_.push_back(p);
        }
    }
}

int GalerkinSystem::locate(double x) const
{
    const auto& nodes = mesh_.nodes;
    if (x < nodes.front() || x > nodes.back())
        throw DomainError("coordinate outside the mesh");
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    const int e = static_cast<int>(it - nodes.begin()) - 1;
    return std::min(e, mesh_.elements() - 1);
}

double GalerkinSystem::expansion(const VectorXd& gamma, int element, double phi0, double phi1) const
{
    return gamma_at(gamma, element) * phi0 + gamma_at(gamma, element + 1) * phi1;
}

std::pair<double, double> GalerkinSystem::lifted_beta(const VectorXd& gamma, double t, double x) const
{
    const int e = locate(x);
    const double xa = mesh_.nodes[e];
    const double h = mesh_.nodes[e + 1] - xa;
    const double r = (x - xa) / h;
    const FieldValue sd = data_.s_d(x, t);
    const double g0 = gamma_at(gamma, e);
    const double g1 = gamma_at(gamma, e + 1);
    const double w = model_.beta(sd.value) + g0 * (1.0 - r) + g1 * r;
    const double dw = model_.tau(sd.value) * sd.dx + (g1 - g0) / h;
    return {w, dw};
}

double GalerkinSystem::recover_saturation(const GalerkinState& state, double x) const
{
    return model_.beta_inverse(lifted_beta(state.gamma, state.t, x).first);
}

GalerkinState GalerkinSystem::make_state(VectorXd gamma, double t) const
{
    if (gamma.size() != dofs_)
        throw ParameterError("state vector has the wrong length");
    GalerkinState st;
    st.t = t;
    st.gamma = std::move(gamma);
    const int n = mesh_.node_count();
    st.saturation.resize(n);
    st.beta.resize(n);
    for (int k = 0; k < n; ++k) {
        const double sd = data_.s_d(mesh_.nodes[k], t).value;
        if (dof_of_node_[k] < 0) {
            // hat functions vanish here: S is the boundary datum itself
            st.saturation[k] = sd;
            st.beta[k] = model_.beta(sd);
        } else {
            st.beta[k] = model_.beta(sd) + st.gamma[dof_of_node_[k]];
            st.saturation[k] = model_.beta_inverse(st.beta[k]);
        }
    }
    return st;
}

GalerkinState GalerkinSystem::project_initial(InitialProjection kind) const
{
    std::vector<Triplet> mass;
    VectorXd rhs = VectorXd::Zero(dofs_);
    VectorXd lumped = VectorXd::Zero(dofs_);
    for (const QuadPoint& p : quad_) {
        const double target = model_.beta(data_.s_i(p.x)) - model_.beta(data_.s_d(p.x, 0.0).value);
        for (int i = 0; i < 2; ++i) {
            const int di = dof_of_node_[p.element + i];
            if (di < 0)
                continue;
            rhs[di] += p.weight * target * p.phi[i];
            lumped[di] += p.weight * p.phi[i];
            for (int j = 0; j < 2; ++j) {
                const int dj = dof_of_node_[p.element + j];
                if (dj >= 0)
                    mass.emplace_back(di, dj, p.weight * p.phi[i] * p.phi[j]);
            }
        }
    }
    if (kind == InitialProjection::lumped)
        return make_state(rhs.cwiseQuotient(lumped), 0.0);
    SpMat M(dofs_, dofs_);
    M.setFromTriplets(mass.begin(), mass.end());
    Eigen::SimplicialLDLT<SpMat> solver(M);
    if (solver.info() != Eigen::Success)
        throw MeshError("mass matrix factorization failed");
    VectorXd gamma = solver.solve(rhs);
    return make_state(std::move(gamma), 0.0);
}

AssembledSystem GalerkinSystem::assemble(const VectorXd& gamma, double t) const
{
    std::vector<Triplet> ta;
    std::vector<Triplet> tb;
    ta.reserve(quad_.size() * 4);
    tb.reserve(quad_.size() * 4);
    VectorXd F = VectorXd::Zero(dofs_);

    for (const QuadPoint& p : quad_) {
        const FieldValue sd = data_.s_d(p.x, t);
        const double w = model_.beta(sd.value) + expansion(gamma, p.element, p.phi[0], p.phi[1]);
        const double s = model_.beta_inverse(w);
        const double a = model_.a(s);
        const double tau = model_.tau(s);
        if (!(tau >= model_.m_tau() * (1.0 - 1e-12)))
            throw NumericError("assemble: tau_eps fell below its lower bound");
        const double apt = model_.a_pc_over_tau(s);
        const double tau_d = model_.tau(sd.value);
        // ∂x∂t β_ε(S_D)
        const double dxdt_beta_d = model_.tau_slope(sd.value) * sd.dx * sd.dt + tau_d * sd.dxdt;
        double f0 = -(tau_d / tau) * sd.dt;
        double f1 = -a * dxdt_beta_d + apt * tau_d * sd.dx;
        if (data_.source) {
            const auto [g0, g1] = data_.source(p.x, t);
            f0 += g0;
            f1 += g1;
        }
        for (int i = 0; i < 2; ++i) {
            const int di = dof_of_node_[p.element + i];
            if (di < 0)
                continue;
            F[di] += p.weight * (f0 * p.phi[i] + f1 * p.dphi[i]);
            for (int j = 0; j < 2; ++j) {
                const int dj = dof_of_node_[p.element + j];
                if (dj < 0)
                    continue;
                ta.emplace_back(di, dj,
                                p.weight * (a * p.dphi[i] * p.dphi[j] + p.phi[i] * p.phi[j] / tau));
                tb.emplace_back(di, dj, p.weight * apt * p.dphi[i] * p.dphi[j]);
            }
        }
    }

    for (int node : {neumann_node_left_, neumann_node_right_}) {
        if (node < 0 || !data_.sigma.active || !data_.r0)
            continue;
        const double x = mesh_.nodes[node];
        const double w = model_.beta(data_.s_d(x, t).value) + gamma_at(gamma, node);
        const double s = model_.beta_inverse(w);
        F[dof_of_node_[node]] -= data_.r0(x, t) * data_.sigma(s);
    }

    AssembledSystem sys;
    sys.A.resize(dofs_, dofs_);
    sys.B.resize(dofs_, dofs_);
    sys.A.setFromTriplets(ta.begin(), ta.end());
    sys.B.setFromTriplets(tb.begin(), tb.end());
    sys.F = std::move(F);
    return sys;
}

double GalerkinSystem::residual_norm(const AssembledSystem& sys, const VectorXd& gamma,
                                     const VectorXd& gamma_prev, double dt, VectorXd* r) const
{
    const VectorXd diff = gamma - gamma_prev;
    *r = sys.A * diff - dt * (sys.B * gamma) - dt * sys.F;
    // term magnitudes before cancellation, so the tolerance sits above roundoff
    const VectorXd magnitude = sys.A.cwiseAbs() * diff.cwiseAbs()
        + dt * (sys.B.cwiseAbs() * gamma.cwiseAbs()) + dt * sys.F.cwiseAbs();
    const double scale = magnitude.lpNorm<Eigen::Infinity>();
    if (!r->allFinite())
        return HUGE_VAL;
    const double norm = r->lpNorm<Eigen::Infinity>();
    return norm == 0.0 ? 0.0 : norm / scale;
}

VectorXd GalerkinSystem::residual(const VectorXd& gamma, const VectorXd& gamma_prev, double t_next,
                                  double dt) const
{
    const AssembledSystem sys = assemble(gamma, t_next);
    VectorXd r;
    residual_norm(sys, gamma, gamma_prev, dt, &r);
    return r;
}

SpMat GalerkinSystem::jacobian(const VectorXd& gamma, const VectorXd& gamma_prev, double t_next,
                               double dt, const VectorXd& r0) const
{
    // R_l couples only γ_{l-1}, γ_l, γ_{l+1}: three colours recover the tridiagonal.
    std::vector<Triplet> trips;
    trips.reserve(3 * dofs_);
    for (int colour = 0; colour < 3; ++colour) {
        VectorXd pert = gamma;
        VectorXd step = VectorXd::Zero(dofs_);
        for (int j = colour; j < dofs_; j += 3) {
            step[j] = 1e-7 * std::max(1.0, std::abs(gamma[j]));
            pert[j] += step[j];
        }
        const VectorXd r1 = residual(pert, gamma_prev, t_next, dt);
        for (int j = colour; j < dofs_; j += 3) {
            for (int i = std::max(0, j - 1); i <= std::min(dofs_ - 1, j + 1); ++i)
                trips.emplace_back(i, j, (r1[i] - r0[i]) / step[j]);
        }
    }
    SpMat J(dofs_, dofs_);
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
}

GalerkinState GalerkinSystem::step(const GalerkinState& state, double dt, StepStats* stats) const
{
    if (!(dt > 0.0))
        throw ParameterError("step: dt must be positive");
    StepStats local;
    StepStats& st = stats ? *stats : local;
    const double t_next = state.t + dt;
    const VectorXd& gn = state.gamma;
    if (dofs_ == 0)
        return make_state(gn, t_next);

    VectorXd g = gn;
    VectorXd best = gn;
    double best_res = HUGE_VAL;
    VectorXd r;
    int stalls = 0;
    for (int k = 0; k < options_.picard_max; ++k) {
        const AssembledSystem sys = assemble(g, t_next);
        const double res = residual_norm(sys, g, gn, dt, &r);
        if (res <= options_.tol) {
            st.picard_iterations = k;
            st.residual = res;
            return make_state(std::move(g), t_next);
        }
        if (res < best_res) {
            stalls = res < 0.5 * best_res ? 0 : stalls + 1;
            best_res = res;
            best = g;
        } else {
            ++stalls;
        }
        if (stalls >= 4)
            break;

        VectorXd next;
        if (options_.implicit_b) {
            const SpMat K = sys.A - dt * sys.B;
            Eigen::SimplicialLDLT<SpMat> solver(K);
            if (solver.info() != Eigen::Success)
                throw NumericError("step: SPD factorization failed");
            next = solver.solve(sys.A * gn + dt * sys.F);
        } else {
            Eigen::SimplicialLDLT<SpMat> solver(sys.A);
            if (solver.info() != Eigen::Success)
                throw NumericError("step: SPD factorization failed");
            next = gn + solver.solve(dt * (sys.B * g + sys.F));
        }
        st.picard_iterations = k + 1;
        if (!next.allFinite())
            break;
        g = std::move(next);
    }

    // Newton on R(γ) = 0 from the best fixed-point iterate
    st.used_newton = true;
    g = best;
    AssembledSystem sys = assemble(g, t_next);
    double res = residual_norm(sys, g, gn, dt, &r);
    for (int k = 0; k < options_.newton_max; ++k) {
        if (res <= options_.tol) {
            st.residual = res;
            return make_state(std::move(g), t_next);
        }
        ++st.newton_iterations;
        const SpMat J = jacobian(g, gn, t_next, dt, r);
        Eigen::SparseLU<SpMat> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            break;
        const VectorXd delta = lu.solve(-r);
        if (!delta.allFinite())
            break;
        // backtracking on the scaled residual
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 12; ++ls) {
            VectorXd trial = g + lambda * delta;
            VectorXd rt;
            AssembledSystem st_sys = assemble(trial, t_next);
            const double rest = residual_norm(st_sys, trial, gn, dt, &rt);
            if (rest < res) {
                g = std::move(trial);
                r = std::move(rt);
                res = rest;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted)
            break;
    }
    st.residual = res;
    if (res <= options_.tol)
        return make_state(std::move(g), t_next);
    throw StepFailure("step: nonlinear solve did not converge");
}

GalerkinState GalerkinSystem::advance(const GalerkinState& state, double dt, StepStats* stats) const
{
    try {
        return step(state, dt, stats);
    } catch (const StepFailure&) {
        if (0.5 * dt < options_.dt_min)
            throw StepFailure("advance: step size fell below dt_min");
        if (stats)
            ++stats->halvings;
        const GalerkinState half = advance(state, 0.5 * dt, stats);
        return advance(half, 0.5 * dt, stats);
    }
}

} // namespace dcap
