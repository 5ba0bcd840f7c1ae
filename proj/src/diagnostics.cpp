#include "dcap/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include <Eigen/Dense>

namespace dcap {

DiagnosticsReport::DiagnosticsReport(const GalerkinSystem& system, DiagnosticsOptions options)
    : system_(&system), options_(options)
{
    if (!(options_.m0 > 1.0 && options_.m0 < 2.0))
        throw ParameterError("diagnostics: m0 must lie in (1, 2)");
}

Snapshot DiagnosticsReport::sample(const GalerkinState& state) const
{
    const RegularizedModel& model = system_->model();
    const ProblemData& data = system_->data();
    const auto& quad = system_->quadrature();
    Snapshot snap;
    snap.t = state.t;
    const std::size_t n = quad.size();
    for (auto* v : {&snap.w, &snap.dw, &snap.s, &snap.a, &snap.tau, &snap.entropy, &snap.sd,
                    &snap.sd_dx, &snap.sd_dt})
        v->resize(n);
    for (std::size_t q = 0; q < n; ++q) {
        const QuadPoint& p = quad[q];
        const FieldValue sd = data.s_d(p.x, state.t);
        const double g0 = system_->expansion(state.gamma, p.element, 1.0, 0.0);
        const double g1 = system_->expansion(state.gamma, p.element, 0.0, 1.0);
        snap.w[q] = model.beta(sd.value) + g0 * p.phi[0] + g1 * p.phi[1];
        snap.dw[q] = model.tau(sd.value) * sd.dx + g0 * p.dphi[0] + g1 * p.dphi[1];
        snap.s[q] = model.beta_inverse(snap.w[q]);
        snap.a[q] = model.a(snap.s[q]);
        snap.tau[q] = model.tau(snap.s[q]);
        snap.sd[q] = sd.value;
        snap.sd_dx[q] = sd.dx;
        snap.sd_dt[q] = sd.dt;
        snap.entropy[q] = options_.entropy
            ? EntropyEvaluator(model, sd.value).closed_form(snap.s[q]).total
            : 0.0;
    }
    for (int node : system_->mesh().neumann_nodes()) {
        const double x = system_->mesh().nodes[node];
        const double r0 = data.r0 ? data.r0(x, state.t) : 0.0;
        snap.r0_max = std::max(snap.r0_max, std::abs(r0));
        if (!data.sigma.active || r0 == 0.0 || !options_.entropy)
            continue;
        const double s = state.saturation[node];
        const double phi = EntropyEvaluator(model, data.s_d(x, state.t).value).phi(s);
        snap.flux_integrand += r0 * data.sigma(s) * phi;
    }
    return snap;
}

namespace {

void fill_instantaneous(DiagnosticsRecord& rec, const Snapshot& snap, const GalerkinState& state,
                        const GalerkinSystem& system, const DiagnosticsOptions& options)
{
    const RegularizedModel& model = system.model();
    const auto& quad = system.quadrature();
    const auto& nodes = system.mesh().nodes;
    double mass = 0.0, grad = 0.0, ent = 0.0, neg = 0.0, pos = 0.0;
    double ent_min = HUGE_VAL;
    long violations = 0;
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const double wq = quad[q].weight;
        const double s = snap.s[q];
        mass += wq * s;
        grad += wq * snap.dw[q] * snap.dw[q];
        ent += wq * snap.entropy[q];
        ent_min = std::min(ent_min, snap.entropy[q]);
        neg += wq * std::pow(std::min(s, 0.0), 2);
        pos += wq * std::pow(std::max(s - 1.0, 0.0), 2);
        // β_ε(S) − β_ε(S_D) ≥ τ_ε(S_D)(S − S_D)
        const double sd = snap.sd[q];
        const double gap = snap.w[q] - model.beta(sd) - model.tau(sd) * (s - sd);
        if (gap < -options.ineq1_slack)
            ++violations;
    }
    // level sets from the nodal β values, linear inside each element
    const double beta_one = model.beta_at_one();
    double meas_neg = 0.0, meas_pos = 0.0;
    auto below = [](double w0, double w1, double level, double h) {
        if (w0 <= level && w1 <= level)
            return h;
        if (w0 > level && w1 > level)
            return 0.0;
        const double frac = (level - std::min(w0, w1)) / std::abs(w1 - w0);
        return h * frac;
    };
    for (int e = 0; e + 1 < static_cast<int>(nodes.size()); ++e) {
        const double h = nodes[e + 1] - nodes[e];
        const double w0 = state.beta[e];
        const double w1 = state.beta[e + 1];
        meas_neg += below(w0, w1, 0.0, h);
        meas_pos += below(-w0, -w1, -beta_one, h);
    }
    int nn = 0, np = 0;
    for (int k = 0; k < state.saturation.size(); ++k) {
        nn += state.saturation[k] <= 0.0;
        np += state.saturation[k] >= 1.0;
    }
    rec.t = state.t;
    rec.mass = mass;
    rec.ae3 = std::sqrt(grad);
    rec.entropy = ent;
    rec.entropy_min = ent_min;
    rec.neg_l2 = std::sqrt(neg);
    rec.pos_l2 = std::sqrt(pos);
    rec.meas_neg = meas_neg;
    rec.meas_pos = meas_pos;
    rec.node_frac_neg = static_cast<double>(nn) / state.saturation.size();
    rec.node_frac_pos = static_cast<double>(np) / state.saturation.size();
    rec.ineq1_violations += violations;
    (void)model;
}

} // namespace

namespace {

// ∫ (S − S_D) h_ε(S_D) ∂_t S_D
double j1_integrand(const Snapshot& snap, const GalerkinSystem& system)
{
    const RegularizedModel& model = system.model();
    const auto& quad = system.quadrature();
    double sum = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q)
        sum += quad[q].weight * (snap.s[q] - snap.sd[q]) * model.tau_over_a(snap.sd[q])
            * snap.sd_dt[q];
    return sum;
}

// ∫ (a(S)/a(S_D)) (−P'(S)) τ(S_D) ∂_x S ∂_x S_D
double j2_integrand(const Snapshot& snap, const GalerkinSystem& system)
{
    const RegularizedModel& model = system.model();
    const auto& quad = system.quadrature();
    double sum = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const double ratio = snap.a[q] / model.a(snap.sd[q]);
        const double dxs = snap.dw[q] / snap.tau[q];
        sum += quad[q].weight * ratio * (-model.pc_prime(snap.s[q])) * model.tau(snap.sd[q])
            * dxs * snap.sd_dx[q];
    }
    return sum;
}

// ∫ (−P'(S)) (∂_x β)² / τ(S), the dissipation rate
double dissipation_integrand(const Snapshot& snap, const GalerkinSystem& system)
{
    const RegularizedModel& model = system.model();
    const auto& quad = system.quadrature();
    double sum = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q)
        sum += quad[q].weight * (-model.pc_prime(snap.s[q])) * snap.dw[q] * snap.dw[q]
            / snap.tau[q];
    return sum;
}

double j3_weight(const Snapshot& snap, const GalerkinSystem& system, std::size_t q)
{
    const RegularizedModel& model = system.model();
    return snap.a[q] / model.a(snap.sd[q]) * model.tau(snap.sd[q]) * snap.sd_dx[q];
}

void require_finite(const DiagnosticsRecord& r)
{
    const double values[] = {r.mass, r.ae7, r.ae2, r.ae3, r.ae4, r.entropy, r.mixed,
                             r.holder_weight, r.neg_l2, r.pos_l2, r.flux, r.balance_lhs,
                             r.balance_rhs};
    for (double v : values)
        if (!std::isfinite(v))
            throw NumericError("diagnostics: non-finite monitor value at t = " + std::to_string(r.t));
}

} // namespace

void DiagnosticsReport::record_initial(const GalerkinState& state)
{
    records_.clear();
    j_sum_ = 0.0;
    flux_r0_max_ = 0.0;
    previous_ = sample(state);
    DiagnosticsRecord rec;
    fill_instantaneous(rec, previous_, state, *system_, options_);
    rec.ae3_sup = rec.ae3;
    rec.entropy_sup = rec.entropy;
    rec.neg_l2_sup = rec.neg_l2;
    rec.pos_l2_sup = rec.pos_l2;
    rec.meas_neg_sup = rec.meas_neg;
    rec.meas_pos_sup = rec.meas_pos;
    balance_initial_ = rec.entropy + 0.5 * rec.ae3 * rec.ae3;
    rec.balance_lhs = balance_initial_;
    rec.balance_rhs = balance_initial_;
    require_finite(rec);
    records_.push_back(rec);
}

void DiagnosticsReport::record_step(const GalerkinState& prev, const GalerkinState& next,
                                    const StepStats* stats)
{
    if (records_.empty())
        record_initial(prev);
    if (previous_.t != prev.t)
        previous_ = sample(prev);
    const Snapshot& s0 = previous_;
    Snapshot s1 = sample(next);
    const double dt = next.t - prev.t;
    if (!(dt > 0.0))
        throw ParameterError("diagnostics: steps must advance in time");

    DiagnosticsRecord rec = records_.back();
    rec.dt = dt;
    const auto& quad = system_->quadrature();
    const double m0 = options_.m0;
    double ae7 = 0.0, ae2 = 0.0, mixed = 0.0, weight = 0.0, j3 = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const double wq = quad[q].weight;
        const double dtw = (s1.w[q] - s0.w[q]) / dt;
        const double dxdt = (s1.dw[q] - s0.dw[q]) / dt;
        const double a_mid = 0.5 * (s0.a[q] + s1.a[q]);
        ae7 += wq * dtw * dtw;
        ae2 += wq * a_mid * dxdt * dxdt;
        mixed += wq * std::pow(std::abs(dxdt), m0);
        weight += wq * std::pow(a_mid, -m0 / (2.0 - m0));
        j3 += wq * 0.5 * (j3_weight(s0, *system_, q) + j3_weight(s1, *system_, q)) * dxdt;
    }
    rec.ae7 += dt * ae7;
    rec.ae2 += dt * ae2;
    rec.mixed += dt * mixed;
    rec.holder_weight += dt * weight;
    rec.dissipation_increment = 0.5 * dt
        * (dissipation_integrand(s0, *system_) + dissipation_integrand(s1, *system_));
    rec.ae4 += rec.dissipation_increment;
    rec.flux += 0.5 * dt * (s0.flux_integrand + s1.flux_integrand);

    if (options_.entropy) {
        const double j1 = 0.5 * (j1_integrand(s0, *system_) + j1_integrand(s1, *system_));
        const double j2 = 0.5 * (j2_integrand(s0, *system_) + j2_integrand(s1, *system_));
        j_sum_ += dt * (-j1 + j2 + j3);
    }

    fill_instantaneous(rec, s1, next, *system_, options_);
    rec.ae3_sup = std::max(rec.ae3_sup, rec.ae3);
    rec.entropy_sup = std::max(rec.entropy_sup, rec.entropy);
    rec.neg_l2_sup = std::max(rec.neg_l2_sup, rec.neg_l2);
    rec.pos_l2_sup = std::max(rec.pos_l2_sup, rec.pos_l2);
    rec.meas_neg_sup = std::max(rec.meas_neg_sup, rec.meas_neg);
    rec.meas_pos_sup = std::max(rec.meas_pos_sup, rec.meas_pos);

    // |R φ_ε| ≤ |R₀| max σ max_A τ_ε/a_ε on each Neumann node
    const RegularizedModel& model = system_->model();
    const ProblemData& data = system_->data();
    const double sigma_max = data.sigma.active ? std::abs(data.sigma.bump.amplitude) : 0.0;
    const double ratio_max = std::max(model.tau_over_a(options_.range_lo),
                                      model.tau_over_a(options_.range_hi));
    const double r0_max = std::max({s0.r0_max, s1.r0_max, flux_r0_max_});
    flux_r0_max_ = r0_max;
    rec.flux_bound = next.t * static_cast<double>(system_->mesh().neumann_nodes().size()) * r0_max
        * sigma_max * ratio_max;

    rec.balance_lhs = rec.entropy + 0.5 * rec.ae3 * rec.ae3 + rec.ae4 + rec.flux;
    rec.balance_rhs = balance_initial_ + j_sum_;
    rec.balance_residual = rec.balance_lhs - rec.balance_rhs;
    if (stats) {
        rec.picard = stats->picard_iterations;
        rec.newton = stats->newton_iterations;
    }
    require_finite(rec);
    records_.push_back(rec);
    previous_ = std::move(s1);
}

double DiagnosticsReport::holder_bound() const
{
    if (records_.empty())
        return 0.0;
    const double m0 = options_.m0;
    const auto& r = records_.back();
    return std::pow(r.ae2, 0.5 * m0) * std::pow(r.holder_weight, 1.0 - 0.5 * m0);
}

bool DiagnosticsReport::holder_holds() const
{
    if (records_.empty())
        return true;
    return records_.back().mixed <= holder_bound() * (1.0 + 1e-12);
}

const std::vector<std::string>& DiagnosticsReport::csv_columns()
{
    static const std::vector<std::string> cols{
        "t", "dt", "mass", "ae7", "ae2", "ae3", "ae3_sup", "ae4", "entropy", "entropy_sup",
        "entropy_min", "mixed", "holder_weight", "neg_l2", "neg_l2_sup", "pos_l2", "pos_l2_sup",
        "meas_neg", "meas_neg_sup", "meas_pos", "meas_pos_sup", "node_frac_neg", "node_frac_pos",
        "ineq1_violations", "flux", "flux_bound", "balance_lhs", "balance_rhs",
        "balance_residual", "picard", "newton"};
    return cols;
}

void DiagnosticsReport::write_csv(std::ostream& os) const
{
    const auto& cols = csv_columns();
    for (std::size_t k = 0; k < cols.size(); ++k)
        os << (k ? "," : "") << cols[k];
    os << '\n';
    char buf[64];
    for (const auto& r : records_) {
        const double values[] = {r.t, r.dt, r.mass, r.ae7, r.ae2, r.ae3, r.ae3_sup, r.ae4,
                                 r.entropy, r.entropy_sup, r.entropy_min, r.mixed,
                                 r.holder_weight, r.neg_l2, r.neg_l2_sup, r.pos_l2, r.pos_l2_sup,
                                 r.meas_neg, r.meas_neg_sup, r.meas_pos, r.meas_pos_sup,
                                 r.node_frac_neg, r.node_frac_pos};
        bool first = true;
        for (double v : values) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << (first ? "" : ",") << buf;
            first = false;
        }
        os << ',' << r.ineq1_violations;
        for (double v : {r.flux, r.flux_bound, r.balance_lhs, r.balance_rhs, r.balance_residual}) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << ',' << buf;
        }
        os << ',' << r.picard << ',' << r.newton << '\n';
    }
}

DiagnosticsReport diagnose(const GalerkinSystem& system, const Trajectory& trajectory,
                           DiagnosticsOptions options)
{
    DiagnosticsReport report(system, options);
    if (trajectory.empty())
        return report;
    report.record_initial(trajectory.front());
    for (std::size_t k = 1; k < trajectory.size(); ++k)
        report.record_step(trajectory[k - 1], trajectory[k]);
    return report;
}

std::vector<double> entropy_balance_residual(const GalerkinSystem& system,
                                             const Trajectory& trajectory,
                                             DiagnosticsOptions options)
{
    options.entropy = true;
    const DiagnosticsReport report = diagnose(system, trajectory, options);
    std::vector<double> out;
    out.reserve(report.records().size());
    for (const auto& r : report.records())
        out.push_back(r.balance_residual);
    return out;
}

MixedNormResult mixed_norm(const GalerkinSystem& system, const Trajectory& trajectory, double m0)
{
    if (!(m0 > 1.0 && m0 < 2.0))
        throw ParameterError("mixed norm: m0 must lie in (1, 2)");
    DiagnosticsOptions options;
    options.m0 = m0;
    options.entropy = false;
    const DiagnosticsReport report = diagnose(system, trajectory, options);
    MixedNormResult res;
    if (report.records().empty())
        return res;
    const auto& r = report.last();
    res.norm = std::pow(r.mixed, 1.0 / m0);
    res.factor_a2 = std::pow(r.ae2, 0.5 * m0);
    res.factor_a = std::pow(r.holder_weight, 1.0 - 0.5 * m0);
    res.dominated = report.holder_holds();
    return res;
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y)
{
    LogLogFit fit;
    if (x.size() != y.size() || x.size() < 2)
        return fit;
    for (std::size_t k = 0; k < x.size(); ++k)
        if (!(x[k] > 0.0 && y[k] > 0.0 && std::isfinite(x[k]) && std::isfinite(y[k])))
            return fit;
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += std::log(x[k]);
        my += std::log(y[k]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = std::log(x[k]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[k]) - my);
    }
    if (sxx == 0.0)
        return fit;
    fit.applicable = true;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double ssr = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double e = std::log(y[k]) - fit.intercept - fit.slope * std::log(x[k]);
            ssr += e * e;
        }
        fit.slope_stderr = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

PlateauStudy synthetic_plateau_study(const ModelParams& params, std::span<const double> eps_list,
                                     double s_d, int nodes)
{
    if (nodes < 8)
        throw ParameterError("plateau study needs at least 8 nodes");
    PlateauStudy study;
    study.expected_slope = 2.0 - params.gamma;
    // dips to −0.4 in the middle of [0, 1]
    std::vector<double> field;
    for (int k = 0; k < nodes; ++k) {
        const double x = static_cast<double>(k) / (nodes - 1);
        const double s = 0.5 - 0.9 * std::pow(std::sin(std::numbers::pi * x), 2);
        if (s < 0.0)
            field.push_back(s);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(field.size());
    if (m < 3)
        throw NumericError("plateau study: too few negative nodes");
    for (double eps : eps_list) {
        const RegularizedModel model(params, eps);
        const EntropyEvaluator ev(model, s_d);
        Eigen::MatrixXd V(m, 3);
        Eigen::VectorXd e(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const double s = field[k];
            V(k, 0) = 1.0;
            V(k, 1) = s;
            V(k, 2) = s * s;
            e[k] = ev.closed_form(s).total;
        }
        const Eigen::VectorXd c = V.colPivHouseholderQr().solve(e);
        study.eps.push_back(eps);
        study.plateau.push_back(c[0]);
    }
    study.fit = fit_loglog(study.eps, study.plateau);
    return study;
}

} // namespace dcap
