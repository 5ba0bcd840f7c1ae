// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "dcap/config.hpp"
#include "dcap/diagnostics.hpp"
#include "dcap/entropy.hpp"
#include "dcap/galerkin.hpp"
#include "dcap/model.hpp"
#include "dcap/quadrature.hpp"
#include "dcap/regularization.hpp"
#include "dcap/scenario.hpp"

#ifndef DCAP_SOURCE_DIR
#define DCAP_SOURCE_DIR "."
#endif
#ifndef DCAP_BINARY_DIR
#define DCAP_BINARY_DIR "."
#endif

using namespace dcap;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail)
{
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

std::string format(const char* fmt, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig load(const char* name)
{
    return load_config(fs::path(DCAP_SOURCE_DIR) / "configs" / name);
}

void criteria_1_2()
{
    const auto t0 = std::chrono::steady_clock::now();
    const EntropyVerification v = verify_entropy(ModelParams{});
    const double secs = seconds_since(t0);
    report(1, v.points == 1800 && v.max_rel_error < 1e-8 && secs < 10.0,
           format("%d points, max rel error %.3e, %.2f s", v.points, v.max_rel_error, secs));
    std::string cd;
    for (const auto& c : v.cases)
        cd += format(" (%.3g,%.3g): C=%.4g D=%.4g", c.gamma, c.lambda, c.C, c.D);
    report(2, v.bound_violations == 0,
           format("%ld violations;%s", v.bound_violations, cd.c_str()));
}

void criterion_3()
{
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> s_dist(-1.0, 2.0);
    std::uniform_real_distribution<double> log_eps(std::log(1e-3), std::log(0.45));
    std::vector<RegularizedModel> models;
    for (int k = 0; k < 24; ++k)
        models.emplace_back(ModelParams{}, std::exp(log_eps(rng)));
    std::uniform_int_distribution<std::size_t> pick(0, models.size() - 1);
    long violations = 0;
    double worst = HUGE_VAL;
    const int trials = 100000;
    for (int k = 0; k < trials; ++k) {
        const RegularizedModel& m = models[pick(rng)];
        const double s = s_dist(rng);
        const double sd = s_dist(rng);
        const double gap = m.beta(s) - m.beta(sd) - m.tau(sd) * (s - sd);
        worst = std::min(worst, gap);
        if (gap < -1e-12)
            ++violations;
    }
    report(3, violations == 0,
           format("%d triples, %ld violations, smallest gap %.3e", trials, violations, worst));
}

// Entries of A, B, F by adaptive quadrature of the defining integrals, element by element.
struct OracleSystem {
    Eigen::MatrixXd A, B;
    Eigen::VectorXd F;
};

OracleSystem assembly_oracle(const GalerkinSystem& sys, const Eigen::VectorXd& gamma, double t)
{
    const Mesh1D& mesh = sys.mesh();
    const RegularizedModel& m = sys.model();
    const ProblemData& d = sys.data();
    const int n = sys.dofs();
    const auto& x = mesh.nodes;
    auto hat = [&](int node, double y) {
        if (node > 0 && y >= x[node - 1] && y <= x[node])
            return (y - x[node - 1]) / (x[node] - x[node - 1]);
        if (node + 1 < mesh.node_count() && y >= x[node] && y <= x[node + 1])
            return (x[node + 1] - y) / (x[node + 1] - x[node]);
        return 0.0;
    };
    auto dhat = [&](int node, int element) {
        const double h = x[element + 1] - x[element];
        if (node == element)
            return -1.0 / h;
        if (node == element + 1)
            return 1.0 / h;
        return 0.0;
    };
    auto coef = [&](int node) {
        const int k = sys.dof(node);
        return k < 0 ? 0.0 : gamma[k];
    };
    auto saturation = [&](double y) {
        double w = m.beta(d.s_d(y, t).value);
        for (int node = 0; node < mesh.node_count(); ++node)
            w += coef(node) * hat(node, y);
        return m.beta_inverse(w);
    };
    auto integrate = [](const std::function<double(double)>& f, double lo, double hi) {
        return adaptive_integrate(f, lo, hi, 1e-14, 1e-300, 20000).value;
    };

    OracleSystem o;
    o.A = Eigen::MatrixXd::Zero(n, n);
    o.B = Eigen::MatrixXd::Zero(n, n);
    o.F = Eigen::VectorXd::Zero(n);
    for (int e = 0; e < mesh.elements(); ++e) {
        for (int li : {e, e + 1}) {
            const int l = sys.dof(li);
            if (l < 0)
                continue;
            auto f_load = [&](double y) {
                const FieldValue sd = d.s_d(y, t);
                const double s = saturation(y);
                const double a = m.a(s);
                const double tau = m.tau(s);
                const double tau_d = m.tau(sd.value);
                const double f0 = -tau_d / tau * sd.dt;
                const double f1 = -a * (m.tau_slope(sd.value) * sd.dx * sd.dt + tau_d * sd.dxdt)
                    + a * m.pc_prime(s) / tau * tau_d * sd.dx;
                return f0 * hat(li, y) + f1 * dhat(li, e);
            };
            o.F[l] += integrate(f_load, x[e], x[e + 1]);
            for (int ii : {e, e + 1}) {
                const int i = sys.dof(ii);
                if (i < 0)
                    continue;
                auto fa = [&](double y) {
                    const double s = saturation(y);
                    return m.a(s) * dhat(li, e) * dhat(ii, e) + hat(li, y) * hat(ii, y) / m.tau(s);
                };
                auto fb = [&](double y) {
                    const double s = saturation(y);
                    return m.a(s) * m.pc_prime(s) / m.tau(s) * dhat(li, e) * dhat(ii, e);
                };
                o.A(l, i) += integrate(fa, x[e], x[e + 1]);
                o.B(l, i) += integrate(fb, x[e], x[e + 1]);
            }
        }
    }
    for (int node : mesh.neumann_nodes()) {
        const double y = x[node];
        o.F[sys.dof(node)] -= d.r0(y, t) * d.sigma(saturation(y));
    }
    return o;
}

void criterion_4()
{
    ProblemData data;
    data.s_d = make_field(parse_polynomial("0.5 + 0.1*x + 0.05*t - 0.04*x*t"));
    data.s_i = [](double) { return 0.5; };
    const Polynomial2 r0 = parse_polynomial("0.3 + 0.1*t");
    data.r0 = [r0](double x, double t) { return r0(x, t); };
    data.sigma = parse_cutoff("bump(0.5, 0.45, 1)");
    // high Gauss order so the assembly rule resolves the integrands to the oracle level
    const GalerkinSystem sys(Mesh1D::uniform(0.0, 1.0, 4, true, false, 40), data,
                             RegularizedModel(ModelParams{}, 0.1));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> s_dist(0.2, 0.8);
    std::uniform_real_distribution<double> t_dist(0.0, 1.0);
    const RegularizedModel& m = sys.model();
    auto random_state = [&](double t) {
        Eigen::VectorXd gamma(sys.dofs());
        for (int node = 0; node < sys.mesh().node_count(); ++node) {
            const int k = sys.dof(node);
            if (k >= 0)
                gamma[k] = m.beta(s_dist(rng)) - m.beta(data.s_d(sys.mesh().nodes[node], t).value);
        }
        return gamma;
    };

    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const double t = t_dist(rng);
        const Eigen::VectorXd gamma = random_state(t);
        const AssembledSystem as = sys.assemble(gamma, t);
        const OracleSystem o = assembly_oracle(sys, gamma, t);
        const Eigen::MatrixXd A(as.A);
        const Eigen::MatrixXd B(as.B);
        auto rel = [](double got, double want) {
            return std::abs(got - want) / std::max(std::abs(want), 1e-300);
        };
        for (int i = 0; i < sys.dofs(); ++i) {
            worst = std::max(worst, rel(as.F[i], o.F[i]));
            for (int j = 0; j < sys.dofs(); ++j) {
                if (o.A(i, j) == 0.0 && A(i, j) == 0.0)
                    continue;
                worst = std::max({worst, rel(A(i, j), o.A(i, j)), rel(B(i, j), o.B(i, j))});
            }
        }
    }

    // SPD certificate at random admissible states, on the default rule
    const GalerkinSystem coarse(Mesh1D::uniform(0.0, 1.0, 4, true, false), data,
                                RegularizedModel(ModelParams{}, 0.1));
    int spd_failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double t = t_dist(rng);
        std::uniform_real_distribution<double> wide(0.0, 1.0);
        Eigen::VectorXd gamma(coarse.dofs());
        for (int node = 0; node < coarse.mesh().node_count(); ++node) {
            const int k = coarse.dof(node);
            if (k >= 0)
                gamma[k] = m.beta(wide(rng)) - m.beta(data.s_d(coarse.mesh().nodes[node], t).value);
        }
        const Eigen::MatrixXd A(coarse.assemble(gamma, t).A);
        const Eigen::LLT<Eigen::MatrixXd> llt(A);
        const bool symmetric = (A - A.transpose()).cwiseAbs().maxCoeff() == 0.0;
        if (llt.info() != Eigen::Success || !symmetric)
            ++spd_failures;
    }
    report(4, worst < 1e-10 && spd_failures == 0,
           format("max entry rel error %.3e over 3 states; %d/100 SPD failures", worst,
                  spd_failures));
}

void criterion_5()
{
    const RunConfig cfg = load("equilibrium.ini");
    const RunOutcome run = run_simulation(cfg, cfg.epsilon.front());
    const double drift = (run.final_state.saturation.array() - 0.6).abs().maxCoeff();
    const auto& r = run.report->last();
    const double acc = std::max({r.ae7, r.ae2, r.ae4, r.mixed});
    report(5, run.completed && run.steps >= 1000 && drift <= 1e-12 && acc <= 1e-12,
           format("%d steps, |S(T)-S_i| = %.3e, max dissipation accumulator %.3e", run.steps,
                  drift, acc));
}

void criterion_6()
{
    const RunConfig cfg = load("mms.ini");
    const auto t0 = std::chrono::steady_clock::now();
    const MmsReport rep = mms_study(cfg);
    const double secs = seconds_since(t0);
    const bool halvings = rep.spatial.size() == 5 && rep.temporal.size() == 6;
    const bool space_ok = rep.spatial_fit.applicable && std::abs(rep.spatial_fit.slope - 2.0) <= 0.3;
    const bool time_ok = rep.temporal_fit.applicable && std::abs(rep.temporal_fit.slope - 1.0) <= 0.15;
    std::string pairs;
    for (const auto& r : rep.spatial)
        if (r.order)
            pairs += format(" %.3f", *r.order);
    pairs += " |";
    for (const auto& r : rep.temporal)
        if (r.order)
            pairs += format(" %.3f", *r.order);
    report(6, halvings && space_ok && time_ok && secs < 120.0,
           format("spatial order %.3f, temporal order %.3f (pairwise%s), %.1f s",
                  rep.spatial_fit.slope, rep.temporal_fit.slope, pairs.c_str(), secs));
}

void criterion_7()
{
    const RunConfig cfg = load("reference.ini");
    const std::vector<double> eps{0.05, 0.02, 0.01, 0.005};
    const auto t0 = std::chrono::steady_clock::now();
    const ScalingReport rep = epsilon_scaling_study(cfg, eps, 1);
    const double secs = seconds_since(t0);
    const fs::path dir = fs::path(DCAP_BINARY_DIR) / "acceptance_sweep";
    write_scaling_artifacts(rep, dir);
    bool bounded = rep.all_completed;
    std::string ratios;
    for (int q = 0; q < 5; ++q) {
        bounded = bounded && rep.bounded[q];
        ratios += format(" %s=%.3g", ScalingReport::ae_names[q], rep.ratio[q]);
    }
    const bool emitted = fs::exists(dir / "sweep.json") && fs::exists(dir / "sweep.csv");
    report(7, bounded && emitted && secs < 300.0,
           format("last/first:%s; %.1f s", ratios.c_str(), secs));

    // same scenario with the consistent-mass initial projection, for the record
    RunConfig l2 = cfg;
    l2.problem.initial = InitialProjection::l2;
    const ScalingReport alt = epsilon_scaling_study(l2, eps, 1);
    std::string alt_ratios;
    for (int q = 0; q < 5; ++q)
        alt_ratios += format(" %s=%.3g", ScalingReport::ae_names[q], alt.ratio[q]);
    std::printf("      note: with the L2 initial projection last/first:%s\n", alt_ratios.c_str());
}

void criterion_8()
{
    const std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5};
    ModelParams p;
    p.gamma = 3.0;
    p.lambda = 3.0;
    p.mu = 3.5;
    p.beta1 = 3.0;
    p.beta2 = 3.0;
    const PlateauStudy a = synthetic_plateau_study(p, eps);
    const PlateauStudy b = synthetic_plateau_study(ModelParams{}, eps);
    const bool ok_a = a.fit.applicable && std::abs(a.fit.slope - a.expected_slope) <= 0.2;
    const bool ok_b = b.fit.applicable && std::abs(b.fit.slope - b.expected_slope) <= 0.2;
    report(8, ok_a && ok_b,
           format("gamma=3: slope %.4f (expected %.1f); gamma=5.6: slope %.4f (expected %.1f)",
                  a.fit.slope, a.expected_slope, b.fit.slope, b.expected_slope));
}

double margin_of(const HypothesisReport& r, const std::string& hyp, const std::string& text)
{
    for (const auto& c : r.checks)
        if (c.hypothesis == hyp && c.inequality == text)
            return c.margin;
    return NAN;
}

void criterion_9()
{
    const ModelParams base;
    const HypothesisReport pass3 = check_hypotheses(base, 3);
    const double m_mu = margin_of(pass3, "Add.1", "mu < 5/6 gamma + (beta1 - 10/3)/2");
    const double m_la = margin_of(pass3, "Add.1", "lambda < 3 beta2 - 10");
    const bool ex1 = pass3.overall_pass && std::abs(m_mu - 0.05) < 1e-12 && std::abs(m_la - 0.5) < 1e-12;

    ModelParams p2 = base;
    p2.mu = 5.8;
    const HypothesisReport fail3 = check_hypotheses(p2, 3);
    const double m_fail = margin_of(fail3, "Add.1", "mu < 5/6 gamma + (beta1 - 10/3)/2");
    const bool ex2 = !fail3.overall_pass && std::abs(m_fail + 0.05) < 1e-12;

    ModelParams p3 = base;
    p3.beta1 = 4.5;
    p3.gamma = 4.6;
    p3.mu = 4.7;
    const HypothesisReport n1 = check_hypotheses(p3, 1);
    const double m_n1 = margin_of(n1, "Add.3", "mu < gamma + (beta1 - 4)/2");
    const bool ex3 = n1.passes("Add.3") && std::abs(m_n1 - 0.15) < 1e-12;

    // Hölder domination on every stored trajectory
    int trajectories = 0;
    int violations = 0;
    auto audit = [&](const RunConfig& cfg, double eps) {
        const RunOutcome run = run_simulation(cfg, eps, RunSettings{true});
        for (double m0 : {effective_m0(cfg), 1.25, 1.5, 1.9}) {
            const MixedNormResult r = mixed_norm(*run.system, run.trajectory, m0);
            ++trajectories;
            if (!r.dominated)
                ++violations;
        }
        if (!run.report->holder_holds())
            ++violations;
    };
    const RunConfig ref = load("reference.ini");
    for (double eps : ref.epsilon)
        audit(ref, eps);
    audit(load("equilibrium.ini"), 0.05);

    report(9, ex1 && ex2 && ex3 && violations == 0,
           format("margins %.4g/%.4g, %.4g, %.4g; Holder checked on %d (trajectory, m0) pairs, %d violations",
                  m_mu, m_la, m_fail, m_n1, trajectories, violations));
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_10()
{
    RunConfig cfg = load("reference.ini");
    const fs::path root = fs::path(DCAP_BINARY_DIR) / "acceptance_determinism";
    for (const char* tag : {"a", "b"}) {
        const RunOutcome run = run_simulation(cfg, cfg.epsilon.front());
        write_run_artifacts(cfg, run, root / tag);
    }
    bool same = true;
    std::size_t bytes = 0;
    for (const char* file : {"timeseries.csv", "profiles.csv", "summary.json"}) {
        const std::string a = slurp(root / "a" / file);
        const std::string b = slurp(root / "b" / file);
        same = same && !a.empty() && a == b;
        bytes += a.size();
    }
    report(10, same, format("%zu bytes compared across two runs", bytes));
}

} // namespace

int main()
{
    const auto t0 = std::chrono::steady_clock::now();
    criteria_1_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%d criteria failed, %.1f s total\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
