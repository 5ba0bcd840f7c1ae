// Command-line runner: check | run | sweep | mms | entropy-verify.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcap/config.hpp"
#include "dcap/scenario.hpp"

namespace {

enum Exit { ok = 0, runtime_failure = 1, config_failure = 2 };

struct Flags {
    std::string config;
    std::string out;
    bool json = false;
    int threads = 1;
};

void add_flags(CLI::App* cmd, Flags& f, bool config_required)
{
    auto* opt = cmd->add_option("--config", f.config, "run configuration file");
    if (config_required)
        opt->required();
    cmd->add_option("--out", f.out, "output directory (default: [output] directory)");
    cmd->add_flag("--json", f.json, "print JSON instead of a table");
    cmd->add_option("--threads", f.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
}

std::filesystem::path out_dir(const Flags& f, const dcap::RunConfig& c)
{
    return f.out.empty() ? std::filesystem::path(c.output.directory) : std::filesystem::path(f.out);
}

int cmd_check(const Flags& f)
{
    const dcap::RunConfig cfg = dcap::load_config(f.config);
    const dcap::HypothesisReport r = dcap::config_hypotheses(cfg);
    if (f.json) {
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& c : r.checks)
            checks.push_back({{"hypothesis", c.hypothesis},
                              {"inequality", c.inequality},
                              {"margin", c.margin},
                              {"pass", c.pass}});
        nlohmann::json j{{"dimension", r.dimension},
                         {"checks", checks},
                         {"overall_pass", r.overall_pass},
                         {"delta_max", r.delta_max}};
        j["m0_interval"] = r.m0_empty ? nlohmann::json("empty")
                                      : nlohmann::json::array({r.m0_lo, r.m0_hi});
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("%-6s %-44s %14s  %s\n", "hyp", "inequality", "margin", "status");
        for (const auto& c : r.checks)
            std::printf("%-6s %-44s %14.6g  %s\n", c.hypothesis.c_str(), c.inequality.c_str(),
                        c.margin, c.pass ? "pass" : "FAIL");
        if (r.m0_empty)
            std::printf("m0 interval: empty\n");
        else
            std::printf("m0 interval: (%.6g, %.6g), default %.6g\n", r.m0_lo, r.m0_hi, r.m0_default);
        std::printf("overall: %s\n", r.overall_pass ? "pass" : "FAIL");
    }
    return r.overall_pass ? ok : config_failure;
}

int cmd_run(const Flags& f)
{
    const dcap::RunConfig cfg = dcap::load_config(f.config);
    dcap::require_solvable(cfg);
    const double eps = cfg.epsilon.front();
    const dcap::RunOutcome run = dcap::run_simulation(cfg, eps);
    const auto dir = out_dir(f, cfg);
    dcap::write_run_artifacts(cfg, run, dir);
    const auto summary = dcap::run_summary(cfg, run);
    if (f.json) {
        std::cout << summary.dump(2) << "\n";
    } else {
        const auto& r = run.report->last();
        std::printf("epsilon %.6g, %d steps to t = %.6g\n", eps, run.steps, r.t);
        std::printf("mass %.10g  ae3_sup %.6g  entropy_sup %.6g  holder %s\n", r.mass, r.ae3_sup,
                    r.entropy_sup, run.report->holder_holds() ? "ok" : "VIOLATED");
        std::printf("artifacts in %s\n", dir.string().c_str());
    }
    if (!run.completed) {
        std::fprintf(stderr, "run failed: %s\n", run.failure.c_str());
        return runtime_failure;
    }
    return ok;
}

int cmd_sweep(const Flags& f)
{
    const dcap::RunConfig cfg = dcap::load_config(f.config);
    dcap::require_solvable(cfg);
    const dcap::ScalingReport rep = dcap::epsilon_scaling_study(cfg, cfg.epsilon, f.threads);
    const auto dir = out_dir(f, cfg);
    dcap::write_scaling_artifacts(rep, dir);
    if (f.json) {
        std::cout << dcap::scaling_json(rep).dump(2) << "\n";
    } else {
        std::printf("%10s %12s %12s %12s %12s %12s %12s\n", "epsilon", "ae7", "ae2", "ae3_sup",
                    "ae4", "entropy_sup", "neg_l2_sup");
        for (const auto& e : rep.entries) {
            if (!e.completed) {
                std::printf("%10.4g  failed: %s\n", e.epsilon, e.failure.c_str());
                continue;
            }
            std::printf("%10.4g %12.6g %12.6g %12.6g %12.6g %12.6g %12.6g\n", e.epsilon, e.ae[0],
                        e.ae[1], e.ae[2], e.ae[3], e.ae[4], e.neg_l2_sup);
        }
        for (int q = 0; q < 5; ++q)
            std::printf("%-12s last/first %.4g %s\n", dcap::ScalingReport::ae_names[q],
                        rep.ratio[q], rep.bounded[q] ? "" : "(growth flagged)");
        for (int q = 0; q < 4; ++q) {
            const auto& s = rep.slopes[q];
            if (s.applicable)
                std::printf("%-12s slope %.4g +- %.2g\n", dcap::ScalingReport::slope_names[q],
                            s.slope, s.slope_stderr);
            else
                std::printf("%-12s slope n/a\n", dcap::ScalingReport::slope_names[q]);
        }
        if (rep.plateau.fit.applicable)
            std::printf("entropy plateau slope %.4g (expected %.4g)\n", rep.plateau.fit.slope,
                        rep.plateau.expected_slope);
    }
    return rep.all_completed ? ok : runtime_failure;
}

int cmd_mms(const Flags& f)
{
    const dcap::RunConfig cfg = dcap::load_config(f.config);
    dcap::require_solvable(cfg);
    const dcap::MmsReport rep = dcap::mms_study(cfg);
    const auto dir = out_dir(f, cfg);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "mms.json") << dcap::mms_json(rep).dump(2) << "\n";
    if (f.json) {
        std::cout << dcap::mms_json(rep).dump(2) << "\n";
        return ok;
    }
    auto table = [](const char* title, const std::vector<dcap::MmsRow>& rows) {
        std::printf("%s\n%9s %12s %12s %7s %14s %8s\n", title, "elements", "h", "dt", "steps",
                    "L2 error", "order");
        for (const auto& r : rows) {
            char order[32] = "n/a";
            if (r.order)
                std::snprintf(order, sizeof order, "%.3f", *r.order);
            std::printf("%9d %12.6g %12.6g %7d %14.6e %8s\n", r.elements, r.h, r.dt, r.steps,
                        r.error, order);
        }
    };
    table("spatial ladder", rep.spatial);
    table("temporal ladder", rep.temporal);
    auto fit = [](const char* name, const dcap::LogLogFit& s) {
        if (s.applicable)
            std::printf("%s order %.3f +- %.2g\n", name, s.slope, s.slope_stderr);
        else
            std::printf("%s order n/a\n", name);
    };
    fit("spatial", rep.spatial_fit);
    fit("temporal", rep.temporal_fit);
    return ok;
}

int cmd_entropy(const Flags& f)
{
    dcap::ModelParams base;
    if (!f.config.empty())
        base = dcap::load_config(f.config).model;
    const dcap::EntropyVerification v = dcap::verify_entropy(base);
    if (f.json) {
        std::cout << dcap::entropy_json(v).dump(2) << "\n";
    } else {
        std::printf("%d points, max relative error %.3e, lower-bound violations %ld\n", v.points,
                    v.max_rel_error, v.bound_violations);
        for (const auto& c : v.cases)
            std::printf("gamma %.3g lambda %.3g: C = %.6g, D = %.6g\n", c.gamma, c.lambda, c.C, c.D);
    }
    return v.max_rel_error < 1e-8 && v.bound_violations == 0 ? ok : runtime_failure;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Regularized Galerkin solver and estimate diagnostics for the degenerate "
                 "pseudoparabolic saturation equation"};
    app.require_subcommand(1);
    Flags flags;
    auto* check = app.add_subcommand("check", "evaluate the hypotheses for a configuration");
    auto* run = app.add_subcommand("run", "single run with diagnostics");
    auto* sweep = app.add_subcommand("sweep", "epsilon scaling study over the configured list");
    auto* mms = app.add_subcommand("mms", "manufactured-solution convergence ladder");
    auto* entropy = app.add_subcommand("entropy-verify", "closed-form entropy against quadrature");
    for (auto* cmd : {check, run, sweep, mms})
        add_flags(cmd, flags, true);
    add_flags(entropy, flags, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_failure;
    }

    try {
        if (*check)
            return cmd_check(flags);
        if (*run)
            return cmd_run(flags);
        if (*sweep)
            return cmd_sweep(flags);
        if (*mms)
            return cmd_mms(flags);
        return cmd_entropy(flags);
    } catch (const dcap::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return config_failure;
    } catch (const dcap::ParameterError& e) {
        std::fprintf(stderr, "parameter error: %s\n", e.what());
        return config_failure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return runtime_failure;
    }
}
