#include "dcap/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace dcap {

using nlohmann::json;

namespace {

json record_json(const DiagnosticsRecord& r)
{
    return json{{"t", r.t},
                {"mass", r.mass},
                {"ae7", r.ae7},
                {"ae2", r.ae2},
                {"ae3", r.ae3},
                {"ae3_sup", r.ae3_sup},
                {"ae4", r.ae4},
                {"entropy", r.entropy},
                {"entropy_sup", r.entropy_sup},
                {"entropy_min", r.entropy_min},
                {"mixed", r.mixed},
                {"holder_weight", r.holder_weight},
                {"neg_l2_sup", r.neg_l2_sup},
                {"pos_l2_sup", r.pos_l2_sup},
                {"meas_neg_sup", r.meas_neg_sup},
                {"meas_pos_sup", r.meas_pos_sup},
                {"ineq1_violations", r.ineq1_violations},
                {"flux", r.flux},
                {"flux_bound", r.flux_bound},
                {"balance_residual", r.balance_residual}};
}

void write_text(const std::filesystem::path& file, const std::string& text)
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + file.string());
    out << text;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json fit_json(const LogLogFit& f)
{
    if (!f.applicable)
        return json{{"slope", "n/a"}};
    return json{{"slope", f.slope}, {"stderr", f.slope_stderr}, {"intercept", f.intercept}};
}

} // namespace

RunOutcome run_simulation(const RunConfig& config, double epsilon, RunSettings settings)
{
    RunOutcome run;
    run.epsilon = epsilon;
    run.system = std::make_unique<GalerkinSystem>(make_mesh(config), make_problem(config),
                                                  RegularizedModel(config.model, epsilon),
                                                  make_stepper(config));
    run.report = std::make_unique<DiagnosticsReport>(*run.system, make_diagnostics_options(config));

    GalerkinState state = run.system->project_initial(config.problem.initial);
    run.report->record_initial(state);
    run.profiles.push_back(state);
    if (settings.keep_trajectory)
        run.trajectory.push_back(state);

    const double horizon = config.problem.horizon;
    const int steps = std::max(1, static_cast<int>(std::llround(horizon / config.stepper.dt)));
    const double dt = horizon / steps;
    for (int n = 0; n < steps; ++n) {
        StepStats stats;
        try {
            GalerkinState next = run.system->advance(state, dt, &stats);
            run.report->record_step(state, next, &stats);
            state = std::move(next);
        } catch (const std::exception& e) {
            run.failure = "step " + std::to_string(n + 1) + " at t = " + fmt(state.t) + ": " + e.what();
            break;
        }
        run.steps = n + 1;
        if (settings.keep_trajectory)
            run.trajectory.push_back(state);
        if ((n + 1) % config.output.stride == 0 || n + 1 == steps)
            run.profiles.push_back(state);
    }
    if (run.failure.empty())
        run.completed = true;
    else if (run.profiles.back().t != state.t)
        run.profiles.push_back(state);
    run.final_state = state;
    return run;
}

json run_summary(const RunConfig& config, const RunOutcome& run)
{
    const DiagnosticsReport& rep = *run.report;
    const auto& recs = rep.records();
    bool mass_monotone = true;
    for (std::size_t k = 1; k < recs.size(); ++k)
        mass_monotone = mass_monotone && recs[k].mass >= recs[k - 1].mass - 1e-12;
    const Eigen::VectorXd& s0 = run.profiles.front().saturation;
    const double drift = (run.final_state.saturation - s0).lpNorm<Eigen::Infinity>();
    const HypothesisReport hyp = config_hypotheses(config);

    json j;
    j["epsilon"] = run.epsilon;
    j["completed"] = run.completed;
    if (!run.completed)
        j["failure"] = run.failure;
    j["steps"] = run.steps;
    j["t_final"] = run.final_state.t;
    j["m0"] = rep.options().m0;
    j["m0_interval"] = hyp.m0_empty ? json("empty") : json::array({hyp.m0_lo, hyp.m0_hi});
    j["final"] = record_json(rep.last());
    j["holder_bound"] = rep.holder_bound();
    j["holder_holds"] = rep.holder_holds();
    j["mass_nondecreasing"] = mass_monotone;
    j["max_nodal_change"] = drift;
    j["config"] = serialize_config(config);
    return j;
}

void write_run_artifacts(const RunConfig& config, const RunOutcome& run,
                         const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    std::ostringstream ts;
    run.report->write_csv(ts);
    write_text(dir / "timeseries.csv", ts.str());

    std::ostringstream prof;
    prof << "t,x,saturation,beta\n";
    const auto& nodes = run.system->mesh().nodes;
    for (const auto& st : run.profiles)
        for (int k = 0; k < st.saturation.size(); ++k)
            prof << fmt(st.t) << ',' << fmt(nodes[k]) << ',' << fmt(st.saturation[k]) << ','
                 << fmt(st.beta[k]) << '\n';
    write_text(dir / "profiles.csv", prof.str());
    write_text(dir / "summary.json", run_summary(config, run).dump(2) + "\n");
}

ScalingReport epsilon_scaling_study(const RunConfig& config, const std::vector<double>& eps_list,
                                    int threads)
{
    if (eps_list.empty())
        throw ConfigError("epsilon list is empty");
    ScalingReport report;
    report.entries.resize(eps_list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k = next++; k < eps_list.size(); k = next++) {
            ScalingEntry& e = report.entries[k];
            e.epsilon = eps_list[k];
            try {
                RunOutcome run = run_simulation(config, e.epsilon);
                e.completed = run.completed;
                e.failure = run.failure;
                const DiagnosticsRecord& r = run.report->last();
                e.ae[0] = std::sqrt(r.ae7);
                e.ae[1] = std::sqrt(r.ae2);
                e.ae[2] = r.ae3_sup;
                e.ae[3] = std::sqrt(r.ae4);
                e.ae[4] = r.entropy_sup;
                e.neg_l2_sup = r.neg_l2_sup;
                e.meas_neg_sup = r.meas_neg_sup;
                e.pos_l2_sup = r.pos_l2_sup;
                e.meas_pos_sup = r.meas_pos_sup;
                e.mass_final = r.mass;
                e.holder_holds = run.report->holder_holds();
                e.ineq1_violations = r.ineq1_violations;
                std::ostringstream os;
                run.report->write_csv(os);
                e.timeseries_csv = os.str();
            } catch (const std::exception& ex) {
                e.completed = false;
                e.failure = ex.what();
            }
        }
    };
    const int n = std::clamp(threads, 1, static_cast<int>(eps_list.size()));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    std::vector<const ScalingEntry*> done;
    for (const auto& e : report.entries) {
        report.all_completed = report.all_completed && e.completed;
        if (e.completed)
            done.push_back(&e);
    }
    if (!done.empty()) {
        for (int q = 0; q < 5; ++q) {
            const double first = done.front()->ae[q];
            const double last = done.back()->ae[q];
            double lo = HUGE_VAL, hi = 0.0;
            for (const auto* e : done) {
                lo = std::min(lo, e->ae[q]);
                hi = std::max(hi, e->ae[q]);
            }
            report.ratio[q] = first > 0.0 ? last / first : (last > 0.0 ? HUGE_VAL : 1.0);
            report.spread[q] = lo > 0.0 ? hi / lo : (hi > 0.0 ? HUGE_VAL : 1.0);
            report.bounded[q] = report.ratio[q] < 10.0;
        }
        std::vector<double> eps;
        std::vector<double> vals[4];
        for (const auto* e : done) {
            eps.push_back(e->epsilon);
            vals[0].push_back(e->neg_l2_sup);
            vals[1].push_back(e->meas_neg_sup);
            vals[2].push_back(e->pos_l2_sup);
            vals[3].push_back(e->meas_pos_sup);
        }
        for (int q = 0; q < 4; ++q)
            report.slopes[q] = fit_loglog(eps, vals[q]);
    }
    const std::vector<double> plateau_eps{1e-2, 1e-3, 1e-4, 1e-5};
    if (config.model.gamma > 2.0 && config.model.lambda > 2.0)
        report.plateau = synthetic_plateau_study(config.model, plateau_eps);
    return report;
}

json scaling_json(const ScalingReport& report)
{
    json j;
    j["all_completed"] = report.all_completed;
    json runs = json::array();
    for (const auto& e : report.entries) {
        json r{{"epsilon", e.epsilon}, {"completed", e.completed}};
        if (!e.completed) {
            r["failure"] = e.failure;
        } else {
            for (int q = 0; q < 5; ++q)
                r[ScalingReport::ae_names[q]] = e.ae[q];
            r["neg_l2_sup"] = e.neg_l2_sup;
            r["meas_neg_sup"] = e.meas_neg_sup;
            r["pos_l2_sup"] = e.pos_l2_sup;
            r["meas_pos_sup"] = e.meas_pos_sup;
            r["mass_final"] = e.mass_final;
            r["holder_holds"] = e.holder_holds;
            r["ineq1_violations"] = e.ineq1_violations;
        }
        runs.push_back(r);
    }
    j["runs"] = runs;
    json bounded;
    for (int q = 0; q < 5; ++q)
        bounded[ScalingReport::ae_names[q]] = json{{"last_over_first", report.ratio[q]},
                                                   {"max_over_min", report.spread[q]},
                                                   {"bounded", report.bounded[q]}};
    j["uniformity"] = bounded;
    json slopes;
    for (int q = 0; q < 4; ++q)
        slopes[ScalingReport::slope_names[q]] = fit_json(report.slopes[q]);
    j["slopes"] = slopes;
    if (!report.plateau.eps.empty())
        j["plateau"] = json{{"epsilon", report.plateau.eps},
                            {"plateau", report.plateau.plateau},
                            {"fit", fit_json(report.plateau.fit)},
                            {"expected_slope", report.plateau.expected_slope}};
    return j;
}

void write_scaling_artifacts(const ScalingReport& report, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    std::ostringstream os;
    os << "epsilon,completed,ae7,ae2,ae3_sup,ae4,entropy_sup,neg_l2_sup,meas_neg_sup,"
          "pos_l2_sup,meas_pos_sup,mass_final,holder_holds,ineq1_violations\n";
    for (std::size_t k = 0; k < report.entries.size(); ++k) {
        const auto& e = report.entries[k];
        os << fmt(e.epsilon) << ',' << (e.completed ? 1 : 0);
        for (double v : e.ae)
            os << ',' << fmt(v);
        for (double v : {e.neg_l2_sup, e.meas_neg_sup, e.pos_l2_sup, e.meas_pos_sup, e.mass_final})
            os << ',' << fmt(v);
        os << ',' << (e.holder_holds ? 1 : 0) << ',' << e.ineq1_violations << '\n';
        if (!e.timeseries_csv.empty())
            write_text(dir / ("timeseries_eps" + std::to_string(k) + ".csv"), e.timeseries_csv);
    }
    write_text(dir / "sweep.csv", os.str());
    write_text(dir / "sweep.json", scaling_json(report).dump(2) + "\n");
}

WeakSource mms_source(const RegularizedModel& model, const Polynomial2& target)
{
    const Polynomial2 sx = target.derivative_u();
    const Polynomial2 st = target.derivative_v();
    const Polynomial2 sxt = sx.derivative_v();
    return [model, target, sx, st, sxt](double x, double t) {
        const double s = target(x, t);
        const double dx = sx(x, t);
        const double dt = st(x, t);
        const double a = model.a(s);
        // ∂x∂t β_ε(S*) = τ_ε'(S*) ∂xS* ∂tS* + τ_ε(S*) ∂x∂tS*
        const double dxdt_beta = model.tau_slope(s) * dx * dt + model.tau(s) * sxt(x, t);
        return std::pair<double, double>{dt, a * dxdt_beta - a * model.pc_prime(s) * dx};
    };
}

MmsRow mms_solve(const RunConfig& config, int elements, int steps)
{
    const MmsConfig& m = config.mms;
    const RegularizedModel model(config.model, m.epsilon);
    const double lo = config.mesh.lo;
    const double hi = config.mesh.hi;
    const double len = hi - lo;
    const Polynomial2 target = m.target;
    const Polynomial2 tt = target.derivative_v();

    ProblemData data;
    // linear lift through the target's boundary values
    data.s_d = [target, tt, lo, hi, len](double x, double t) {
        const double l = target(lo, t);
        const double r = target(hi, t);
        const double lt = tt(lo, t);
        const double rt = tt(hi, t);
        const double wl = (hi - x) / len;
        const double wr = (x - lo) / len;
        return FieldValue{wl * l + wr * r, (r - l) / len, wl * lt + wr * rt, (rt - lt) / len};
    };
    data.s_i = [target](double x) { return target(x, 0.0); };
    data.horizon = m.horizon;
    data.source = mms_source(model, target);

    StepperOptions opts = make_stepper(config);
    const GalerkinSystem sys(Mesh1D::uniform(lo, hi, elements, true, true, m.quad_order), data,
                             model, opts);
    GalerkinState state = sys.project_initial();
    const double dt = m.horizon / steps;
    for (int n = 0; n < steps; ++n) {
        GalerkinState next = sys.advance(state, dt);
        state = std::move(next);
    }
    double err = 0.0;
    for (const QuadPoint& q : sys.quadrature()) {
        const double w = sys.lifted_beta(state.gamma, state.t, q.x).first;
        const double d = model.beta_inverse(w) - target(q.x, state.t);
        err += q.weight * d * d;
    }
    MmsRow row;
    row.elements = elements;
    row.h = len / elements;
    row.dt = dt;
    row.steps = steps;
    row.error = std::sqrt(err);
    return row;
}

MmsReport mms_study(const RunConfig& config)
{
    const MmsConfig& m = config.mms;
    MmsReport rep;
    const double len = config.mesh.hi - config.mesh.lo;
    for (int k = 0; k < m.spatial_levels; ++k) {
        const int n = m.base_elements << k;
        const double h = len / n;
        const int steps = std::max(1, static_cast<int>(std::ceil(m.horizon / (m.dt_factor * h * h) - 1e-9)));
        MmsRow row = mms_solve(config, n, steps);
        if (!rep.spatial.empty() && row.error > 0.0 && rep.spatial.back().error > 0.0)
            row.order = std::log(rep.spatial.back().error / row.error)
                / std::log(rep.spatial.back().h / row.h);
        rep.spatial.push_back(row);
    }
    for (int k = 0; k < m.temporal_levels; ++k) {
        MmsRow row = mms_solve(config, m.temporal_elements, 1 << (4 + k));
        if (!rep.temporal.empty() && row.error > 0.0 && rep.temporal.back().error > 0.0)
            row.order = std::log(rep.temporal.back().error / row.error)
                / std::log(rep.temporal.back().dt / row.dt);
        rep.temporal.push_back(row);
    }
    std::vector<double> h, eh, dt, et;
    for (const auto& r : rep.spatial) {
        h.push_back(r.h);
        eh.push_back(r.error);
    }
    for (const auto& r : rep.temporal) {
        dt.push_back(r.dt);
        et.push_back(r.error);
    }
    rep.spatial_fit = fit_loglog(h, eh);
    rep.temporal_fit = fit_loglog(dt, et);
    return rep;
}

json mms_json(const MmsReport& report)
{
    auto rows = [](const std::vector<MmsRow>& v) {
        json a = json::array();
        for (const auto& r : v)
            a.push_back(json{{"elements", r.elements},
                             {"h", r.h},
                             {"dt", r.dt},
                             {"steps", r.steps},
                             {"error", r.error},
                             {"order", r.order ? json(*r.order) : json("n/a")}});
        return a;
    };
    return json{{"spatial", rows(report.spatial)},
                {"temporal", rows(report.temporal)},
                {"spatial_order", fit_json(report.spatial_fit)},
                {"temporal_order", fit_json(report.temporal_fit)}};
}

EntropyVerification verify_entropy(const ModelParams& base, double s_d)
{
    const auto start = std::chrono::steady_clock::now();
    const std::vector<double> eps_list{0.1, 0.01, 0.001};
    const std::pair<double, double> exponents[] = {{3.0, 3.0}, {5.6, 6.0}, {8.0, 8.0}};
    EntropyVerification out;
    for (const auto& [g, l] : exponents) {
        ModelParams p = base;
        p.gamma = g;
        p.lambda = l;
        // μ does not enter ℰ_ε; keep the ordering μ > γ valid
        p.mu = std::max(p.mu, g + 0.1);
        p.beta1 = std::min(p.beta1, g);
        p.beta2 = std::min(p.beta2, l);
        const EntropyLowerBound bound = construct_entropy_lower_bound(p, s_d, eps_list);
        out.cases.push_back({g, l, bound.C, bound.D});
        for (double eps : eps_list) {
            const RegularizedModel model(p, eps);
            const EntropyEvaluator ev(model, s_d);
            for (int k = 0; k < 200; ++k) {
                const double s = -1.0 + 3.0 * k / 199.0;
                const double closed = ev.closed_form(s).total;
                const double oracle = entropy_quadrature_oracle(ev, s).total;
                const double scale = std::max(std::abs(oracle), 1e-300);
                out.max_rel_error = std::max(out.max_rel_error, std::abs(closed - oracle) / scale);
                if (closed < bound(model, s))
                    ++out.bound_violations;
                ++out.points;
            }
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

json entropy_json(const EntropyVerification& v)
{
    json cases = json::array();
    for (const auto& c : v.cases)
        cases.push_back(json{{"gamma", c.gamma}, {"lambda", c.lambda}, {"C", c.C}, {"D", c.D}});
    return json{{"points", v.points},
                {"max_rel_error", v.max_rel_error},
                {"bound_violations", v.bound_violations},
                {"cases", cases}};
}

} // namespace dcap
