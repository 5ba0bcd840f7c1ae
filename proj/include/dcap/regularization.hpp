#pragma once

#include <vector>

#include "dcap/model.hpp"
#include "dcap/quadrature.hpp"

namespace dcap {

/// Clamp of s to [0, 1].
inline double cut_z(double s)
{
    return s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
}

/// ModelParams with a fixed regularization level ε ∈ (0, 1/2).
///
/// Every coefficient is composed with Z_ε(s) = (1 − 2ε)·cut_z(s) + ε, which maps ℝ
/// onto [ε, 1 − ε]. β_ε(s) = ∫₀^s τ_ε is tabulated on [0, 1] with quintic Hermite
/// pieces (values, τ_ε and τ_ε' at each knot); outside [0, 1] it is affine.
/// Immutable after construction.
class RegularizedModel {
public:
    RegularizedModel(const ModelParams& params, double epsilon);

    const ModelParams& params() const { return params_; }
    double epsilon() const { return eps_; }
    /// 1 − 2ε, the slope of Z_ε on [0, 1].
    double squash() const { return c_; }

    double z(double s) const { return c_ * cut_z(s) + eps_; }

    double a(double s) const { return eval_a(params_, z(s)); }
    double tau(double s) const { return eval_tau(params_, z(s)); }
    /// dτ_ε/ds; zero outside [0, 1], one-sided interior value at the corners.
    double tau_slope(double s) const;
    double pc_prime(double s) const { return eval_pc_prime(params_, z(s)); }
    /// τ_ε/a_ε = Z^{−γ} + T_M (1 − Z)^{−λ}.
    double tau_over_a(double s) const;
    /// a_ε P'_ε / τ_ε, written without the cancelling singular powers.
    double a_pc_over_tau(double s) const;

    double m_a() const { return m_a_; }
    double m_tau() const { return m_tau_; }
    double m_ap() const { return m_ap_; }
    /// sup of a over [0, 1] (grid estimate).
    double a_max() const { return a_max_; }

    /// Table-backed β_ε.
    double beta(double s) const;
    /// d/ds of the table interpolant (agrees with τ_ε to table accuracy).
    double beta_slope(double s) const;
    /// β_ε by adaptive quadrature, independent of the table.
    double beta_quadrature(double s) const;
    /// Inverse of the table-backed β_ε; a bijection of ℝ.
    double beta_inverse(double v) const;
    double beta_at_one() const { return values_.back(); }

    /// G_ε(s) = ∫₀^s √(−P'_ε).
    double kirchhoff(double s) const;

    std::size_t table_size() const { return knots_.size(); }

private:
    double hermite(std::size_t k, double s, double* slope) const;

    ModelParams params_;
    double eps_;
    double c_;
    double m_a_ = 0.0;
    double m_tau_ = 0.0;
    double m_ap_ = 0.0;
    double a_max_ = 0.0;
    double tau_hi_ = 0.0; // τ(1 − ε)

    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<double> slopes_;
    std::vector<double> curvatures_;

    PrefixIntegral kirchhoff_;
    double sqrt_pc_lo_ = 0.0;
    double sqrt_pc_hi_ = 0.0;
};

inline double z_eps(const RegularizedModel& m, double s) { return m.z(s); }
inline double a_eps(const RegularizedModel& m, double s) { return m.a(s); }
inline double tau_eps(const RegularizedModel& m, double s) { return m.tau(s); }
inline double pc_prime_eps(const RegularizedModel& m, double s) { return m.pc_prime(s); }
inline double beta_eps(const RegularizedModel& m, double s) { return m.beta(s); }
inline double beta_eps_inverse(const RegularizedModel& m, double v) { return m.beta_inverse(v); }
inline double kirchhoff_eps(const RegularizedModel& m, double s) { return m.kirchhoff(s); }

/// Minimum of f over [lo, hi]: both endpoints, a uniform grid, then golden-section
/// refinement around the best grid point.
double refined_grid_min(const std::function<double(double)>& f, double lo, double hi, int grid);

} // namespace dcap
