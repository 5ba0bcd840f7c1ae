#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcap/config.hpp"
#include "dcap/diagnostics.hpp"
#include "dcap/galerkin.hpp"

namespace dcap {

/// One solver run at a fixed ε. Owns the system the report points into.
struct RunOutcome {
    double epsilon = 0.0;
    std::unique_ptr<GalerkinSystem> system;
    std::unique_ptr<DiagnosticsReport> report;
    Trajectory trajectory;            ///< every accepted state when kept, else empty
    std::vector<GalerkinState> profiles; ///< states at the output stride, first and last included
    GalerkinState final_state;
    int steps = 0;
    bool completed = false;
    std::string failure;
};

struct RunSettings {
    bool keep_trajectory = false;
};

/// project_initial, then horizon/dt backward-Euler steps with diagnostics. A step
/// failure stops the run and is recorded in the outcome instead of thrown.
RunOutcome run_simulation(const RunConfig& config, double epsilon, RunSettings settings = {});

/// Writes timeseries.csv, profiles.csv and summary.json into dir.
void write_run_artifacts(const RunConfig& config, const RunOutcome& run,
                         const std::filesystem::path& dir);

nlohmann::json run_summary(const RunConfig& config, const RunOutcome& run);

struct ScalingEntry {
    double epsilon = 0.0;
    bool completed = false;
    std::string failure;
    /// √AE.7, √AE.2, sup AE.3, √AE.4, sup ∫ℰ
    double ae[5] = {0, 0, 0, 0, 0};
    double neg_l2_sup = 0.0;
    double meas_neg_sup = 0.0;
    double pos_l2_sup = 0.0;
    double meas_pos_sup = 0.0;
    double mass_final = 0.0;
    bool holder_holds = true;
    long ineq1_violations = 0;
    std::string timeseries_csv;
};

struct ScalingReport {
    std::vector<ScalingEntry> entries;
    static constexpr const char* ae_names[5] = {"ae7", "ae2", "ae3_sup", "ae4", "entropy_sup"};
    double ratio[5] = {1, 1, 1, 1, 1};     ///< last/first over completed runs
    double spread[5] = {1, 1, 1, 1, 1};    ///< max/min over completed runs
    bool bounded[5] = {true, true, true, true, true}; ///< ratio < 10
    /// ‖S⁻‖, |{S≤0}|, ‖(S−1)⁺‖, |{S≥1}| against ε
    LogLogFit slopes[4];
    static constexpr const char* slope_names[4] = {"neg_l2_sup", "meas_neg_sup", "pos_l2_sup",
                                                   "meas_pos_sup"};
    PlateauStudy plateau;
    bool all_completed = true;
};

/// One run per ε, spread over `threads` workers; failed runs keep their message and
/// drop out of the fits.
ScalingReport epsilon_scaling_study(const RunConfig& config, const std::vector<double>& eps_list,
                                    int threads = 1);

nlohmann::json scaling_json(const ScalingReport& report);
void write_scaling_artifacts(const ScalingReport& report, const std::filesystem::path& dir);

struct MmsRow {
    int elements = 0;
    double h = 0.0;
    double dt = 0.0;
    int steps = 0;
    double error = 0.0;                ///< L² error of S at the horizon
    std::optional<double> order;       ///< against the previous row
};

struct MmsReport {
    std::vector<MmsRow> spatial;
    std::vector<MmsRow> temporal;
    LogLogFit spatial_fit;  ///< error against h
    LogLogFit temporal_fit; ///< error against dt
};

/// Source terms making the target an exact solution of the regularized problem with
/// Dirichlet data on both ends taken from the target.
WeakSource mms_source(const RegularizedModel& model, const Polynomial2& target);

/// L² error at the horizon for one (elements, steps) pair.
MmsRow mms_solve(const RunConfig& config, int elements, int steps);

MmsReport mms_study(const RunConfig& config);
nlohmann::json mms_json(const MmsReport& report);

struct EntropyCase {
    double gamma = 0.0;
    double lambda = 0.0;
    double C = 0.0;
    double D = 0.0;
};

struct EntropyVerification {
    std::vector<EntropyCase> cases;
    int points = 0;
    double max_rel_error = 0.0;
    long bound_violations = 0;
    double seconds = 0.0;
};

/// Closed form against the quadrature oracle, and the lower bound, on
/// s ∈ [−1, 2] (200 points) × ε ∈ {0.1, 0.01, 0.001} × (γ, λ) ∈ {(3,3), (5.6,6), (8,8)}.
EntropyVerification verify_entropy(const ModelParams& base, double s_d = 0.5);
nlohmann::json entropy_json(const EntropyVerification& v);

} // namespace dcap
