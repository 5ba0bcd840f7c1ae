#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"

#include "dcap/galerkin.hpp"

using namespace dcap;

namespace {

ProblemData step_problem(double s_d, double s_i)
{
    ProblemData d;
    d.s_d = constant_field(s_d);
    d.s_i = [s_i](double) { return s_i; };
    d.horizon = 0.5;
    return d;
}

GalerkinSystem make_system(double s_d, double s_i, int elements = 16, double eps = 0.05)
{
    return GalerkinSystem(Mesh1D::uniform(0.0, 1.0, elements, true, false),
                          step_problem(s_d, s_i), RegularizedModel(ModelParams{}, eps));
}

} // namespace

TEST_SUITE("galerkin") {

TEST_CASE("mesh construction and validation")
{
    const Mesh1D m = Mesh1D::uniform(0.0, 2.0, 8, true, false);
    CHECK(m.elements() == 8);
    CHECK(m.node_count() == 9);
    CHECK(m.length() == doctest::Approx(2.0));
    CHECK(m.dirichlet_nodes() == std::vector<int>{0});
    CHECK(m.neumann_nodes() == std::vector<int>{8});
    CHECK_NOTHROW(m.validate());

    Mesh1D bad = m;
    bad.dirichlet_left = false;
    CHECK_THROWS_AS(bad.validate(), MeshError);
    bad = m;
    bad.nodes[3] = bad.nodes[2];
    CHECK_THROWS_AS(bad.validate(), MeshError);
    bad = m;
    bad.quad_order = 0;
    CHECK_THROWS_AS(bad.validate(), MeshError);
    bad.nodes = {0.0};
    CHECK_THROWS_AS(bad.validate(), MeshError);
}

TEST_CASE("free basis functions skip Dirichlet nodes")
{
    const GalerkinSystem sys = make_system(0.9, 0.3, 10);
    CHECK(sys.dofs() == 10);
    CHECK(sys.dof(0) == -1);
    CHECK(sys.dof(1) == 0);
    CHECK(sys.dof(10) == 9);
    const GalerkinSystem both(Mesh1D::uniform(0.0, 1.0, 10, true, true), step_problem(0.9, 0.3),
                              RegularizedModel(ModelParams{}, 0.05));
    CHECK(both.dofs() == 9);
}

TEST_CASE("A is SPD and B symmetric negative semidefinite")
{
    const GalerkinSystem sys = make_system(0.9, 0.3, 12);
    std::mt19937 rng(7);
    std::normal_distribution<double> n(0.0, 0.3);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd g(sys.dofs());
        for (int k = 0; k < g.size(); ++k)
            g[k] = n(rng);
        const AssembledSystem as = sys.assemble(g, 0.1);
        const Eigen::MatrixXd A(as.A);
        const Eigen::MatrixXd B(as.B);
        CHECK((A - A.transpose()).norm() == 0.0);
        CHECK((B - B.transpose()).norm() == 0.0);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(A);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(B);
        CHECK(ea.eigenvalues().minCoeff() > 0.0);
        CHECK(eb.eigenvalues().maxCoeff() <= 1e-12 * eb.eigenvalues().cwiseAbs().maxCoeff());
    }
}

TEST_CASE("state caches and saturation recovery")
{
    const GalerkinSystem sys = make_system(0.9, 0.3, 8);
    Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(sys.dofs(), -0.2, 0.1);
    const GalerkinState st = sys.make_state(g, 0.0);
    const RegularizedModel& m = sys.model();
    CHECK(st.saturation[0] == doctest::Approx(0.9).epsilon(1e-12));
    for (int node = 0; node < sys.mesh().node_count(); ++node) {
        const int d = sys.dof(node);
        const double w = m.beta(0.9) + (d < 0 ? 0.0 : g[d]);
        CHECK(st.beta[node] == doctest::Approx(w).epsilon(1e-13));
        CHECK(m.beta(st.saturation[node]) == doctest::Approx(w).epsilon(1e-12));
        CHECK(sys.recover_saturation(st, sys.mesh().nodes[node])
              == doctest::Approx(st.saturation[node]).epsilon(1e-12));
    }
}

TEST_CASE("lumped projection reproduces constant data exactly")
{
    const GalerkinSystem sys = make_system(0.9, 0.3, 16);
    const GalerkinState st = sys.project_initial(InitialProjection::lumped);
    for (int node = 1; node < sys.mesh().node_count(); ++node)
        CHECK(st.saturation[node] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(st.saturation.minCoeff() >= 0.3 - 1e-12);
}

TEST_CASE("L2 projection of a jump overshoots below zero")
{
    // The boundary layer at the Dirichlet node makes the consistent projection oscillate.
    const GalerkinSystem sys = make_system(0.9, 0.3, 64, 0.01);
    const GalerkinState st = sys.project_initial(InitialProjection::l2);
    CHECK(st.saturation[1] < 0.0);
    for (int node = 24; node < sys.mesh().node_count(); ++node)
        CHECK(st.saturation[node] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("equilibrium is a fixed point of the stepper")
{
    const GalerkinSystem sys = make_system(0.6, 0.6, 16);
    GalerkinState st = sys.project_initial();
    CHECK(st.gamma.cwiseAbs().maxCoeff() <= 1e-15);
    for (int k = 0; k < 5; ++k)
        st = sys.step(st, 0.01);
    CHECK(st.gamma.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(st.t == doctest::Approx(0.05));
}

TEST_CASE("a step satisfies its backward-Euler residual")
{
    const GalerkinSystem sys = make_system(0.9, 0.3, 16);
    const GalerkinState st0 = sys.project_initial(InitialProjection::lumped);
    StepStats stats;
    const GalerkinState st1 = sys.step(st0, 0.005, &stats);
    const Eigen::VectorXd r = sys.residual(st1.gamma, st0.gamma, st1.t, 0.005);
    const AssembledSystem as = sys.assemble(st1.gamma, st1.t);
    const double scale = (as.A * (st1.gamma - st0.gamma)).norm() + 0.005 * (as.B * st1.gamma).norm()
        + 0.005 * as.F.norm();
    CHECK(r.norm() <= 1e-8 * scale);
    CHECK(stats.picard_iterations + stats.newton_iterations > 0);
    // imbibition from the wet left end raises the saturation near it
    CHECK(st1.saturation[1] > st0.saturation[1]);
}

TEST_CASE("advance reaches the requested time")
{
    const GalerkinSystem sys = make_system(0.9, 0.3, 16);
    const GalerkinState st0 = sys.project_initial(InitialProjection::lumped);
    StepStats stats;
    const GalerkinState st1 = sys.advance(st0, 0.05, &stats);
    CHECK(st1.t == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(st1.saturation.allFinite());
}

TEST_CASE("lifted beta on an element")
{
    const GalerkinSystem sys = make_system(0.9, 0.3, 4);
    Eigen::VectorXd g(4);
    g << 0.1, 0.2, 0.3, 0.4;
    const double b = sys.model().beta(0.9);
    const auto [w, dw] = sys.lifted_beta(g, 0.0, 0.125);
    CHECK(w == doctest::Approx(b + 0.05).epsilon(1e-14));
    CHECK(dw == doctest::Approx(0.4).epsilon(1e-13));
    CHECK(sys.expansion(g, 2, 0.5, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
}

} // TEST_SUITE
