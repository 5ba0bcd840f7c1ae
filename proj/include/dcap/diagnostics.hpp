#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcap/entropy.hpp"
#include "dcap/galerkin.hpp"

namespace dcap {

using Trajectory = std::vector<GalerkinState>;

struct DiagnosticsOptions {
    double m0 = 1.5;              ///< exponent of the mixed-derivative norm, in (1, 2)
    bool entropy = true;          ///< needs γ, λ ∉ {1, 2}
    /// Range set A ⊂ (0, 1) bounding S_D and supp σ, for the boundary-flux bound.
    double range_lo = 0.05;
    double range_hi = 0.95;
    double ineq1_slack = 1e-12;
};

/// Values at one recorded time. Accumulators are time integrals from 0 to t.
struct DiagnosticsRecord {
    double t = 0.0;
    double dt = 0.0;
    double mass = 0.0;              ///< ∫ S
    double ae7 = 0.0;               ///< ∫∫ (∂_t β_ε(S))²
    double ae2 = 0.0;               ///< ∫∫ a_ε |∂_x ∂_t β_ε(S)|²
    double ae3 = 0.0;               ///< ‖∂_x β_ε(S)‖ at t
    double ae3_sup = 0.0;
    double ae4 = 0.0;               ///< ∫∫ τ_ε |∂_x G_ε(S)|²
    double entropy = 0.0;           ///< ∫ ℰ_ε(S) at t
    double entropy_sup = 0.0;
    double entropy_min = 0.0;       ///< smallest pointwise ℰ_ε seen at t
    double mixed = 0.0;             ///< ∫∫ |∂_x ∂_t β_ε(S)|^{m0}
    double holder_weight = 0.0;     ///< ∫∫ a_ε^{−m0/(2−m0)}
    double neg_l2 = 0.0;            ///< ‖S⁻‖ at t
    double neg_l2_sup = 0.0;
    double pos_l2 = 0.0;            ///< ‖(S − 1)⁺‖ at t
    double pos_l2_sup = 0.0;
    double meas_neg = 0.0;          ///< |{S ≤ 0}| at t
    double meas_neg_sup = 0.0;
    double meas_pos = 0.0;          ///< |{S ≥ 1}| at t
    double meas_pos_sup = 0.0;
    double node_frac_neg = 0.0;
    double node_frac_pos = 0.0;
    long ineq1_violations = 0;      ///< cumulative count over quadrature points
    double flux = 0.0;              ///< ∫∫_{Γ_N} R φ_ε(S)
    double flux_bound = 0.0;
    double balance_lhs = 0.0;
    double balance_rhs = 0.0;
    double balance_residual = 0.0;
    double dissipation_increment = 0.0;
    int picard = 0;
    int newton = 0;
};

/// Sampled fields of one state at the quadrature points of the mesh.
struct Snapshot {
    double t = 0.0;
    std::vector<double> w, dw, s, a, tau, entropy;
    std::vector<double> sd, sd_dx, sd_dt;
    double flux_integrand = 0.0; ///< Σ_{Γ_N} R φ_ε(S)
    double r0_max = 0.0;
};

/// Time series of the a priori monitors along one trajectory.
class DiagnosticsReport {
public:
    DiagnosticsReport(const GalerkinSystem& system, DiagnosticsOptions options);

    void record_initial(const GalerkinState& state);
    /// Adds the interval [prev.t, next.t]. Time derivatives are backward differences
    /// of β_ε(S); time integrals of instantaneous quantities use the trapezoid rule.
    /// Throws NumericError on a non-finite monitor value.
    void record_step(const GalerkinState& prev, const GalerkinState& next,
                     const StepStats* stats = nullptr);

    const std::vector<DiagnosticsRecord>& records() const { return records_; }
    const DiagnosticsRecord& last() const { return records_.back(); }
    const DiagnosticsOptions& options() const { return options_; }

    /// Hölder bound (∫∫a g²)^{m0/2} (∫∫a^{−m0/(2−m0)})^{1−m0/2} for the mixed norm.
    double holder_bound() const;
    bool holder_holds() const;

    static const std::vector<std::string>& csv_columns();
    void write_csv(std::ostream& os) const;

private:
    Snapshot sample(const GalerkinState& state) const;

    const GalerkinSystem* system_;
    DiagnosticsOptions options_;
    std::vector<DiagnosticsRecord> records_;
    Snapshot previous_;
    double balance_initial_ = 0.0;
    double j_sum_ = 0.0; // −J1 + J2 + J3 so far
    double flux_r0_max_ = 0.0;
};

/// Replays a stored trajectory through a fresh report.
DiagnosticsReport diagnose(const GalerkinSystem& system, const Trajectory& trajectory,
                           DiagnosticsOptions options);

/// Signed residual of the entropy balance at every stored time.
std::vector<double> entropy_balance_residual(const GalerkinSystem& system,
                                             const Trajectory& trajectory,
                                             DiagnosticsOptions options);

struct MixedNormResult {
    double norm = 0.0;       ///< ‖∂_x ∂_t β_ε‖_{L^{m0}(Q_T)}
    double factor_a2 = 0.0;  ///< (∫∫ a |∂_x∂_tβ|²)^{m0/2}
    double factor_a = 0.0;   ///< (∫∫ a^{−m0/(2−m0)})^{1−m0/2}
    bool dominated = true;   ///< norm^{m0} ≤ factor_a2 · factor_a
};

/// Throws ParameterError unless 1 < m0 < 2.
MixedNormResult mixed_norm(const GalerkinSystem& system, const Trajectory& trajectory, double m0);

/// Least-squares line through (log x, log y).
struct LogLogFit {
    bool applicable = false;
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
};

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Constant term of ℰ_ε on s < 0, recovered by fitting ℰ_ε(S(x)) over the negative
/// nodes of a synthetic field on {1, S, S²}, for each ε.
struct PlateauStudy {
    std::vector<double> eps;
    std::vector<double> plateau;
    LogLogFit fit;
    double expected_slope = 0.0;
};

PlateauStudy synthetic_plateau_study(const ModelParams& params, std::span<const double> eps_list,
                                     double s_d = 0.5, int nodes = 401);

} // namespace dcap
