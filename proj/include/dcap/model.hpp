#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "dcap/errors.hpp"
#include "dcap/expression.hpp"
#include "dcap/quadrature.hpp"

namespace dcap {

/// Exponents and shape functions of the imbibition model.
///
///   a(s)     = s^μ (1-s)^λ / (s^μ + (1-s)^λ)
///   τ(s)     = s^μ / (s^μ + (1-s)^λ) · [T_M + (1-s)^λ / s^γ]
///   -P_c'(s) = g(s)/s^β₁ + h(s)/(1-s)^β₂
///
/// g and h are polynomials in `s`, strictly positive on [0, 1].
struct ModelParams {
    double mu = 5.7;
    double lambda = 6.0;
    double gamma = 5.6;
    double t_m = 2.0;
    double beta1 = 5.5;
    double beta2 = 5.5;
    Polynomial2 g{1.0};
    Polynomial2 h{1.0};

    /// Throws ParameterError unless μ > γ ≥ 0, λ > 0, T_M > 1, β₁, β₂ > 0.
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

namespace detail {

inline void require_unit_interval(double s, const char* who)
{
    if (!(s >= 0.0 && s <= 1.0))
        throw DomainError(std::string(who) + ": saturation outside [0, 1]");
}

} // namespace detail

/// Capillary diffusivity a(s) on [0, 1]; zero at both ends.
template <class Scalar>
Scalar eval_a(const ModelParams& p, Scalar s)
{
    using std::pow;
    detail::require_unit_interval(static_cast<double>(s), "eval_a");
    const Scalar sm = pow(s, p.mu);
    const Scalar ql = pow(Scalar(1) - s, p.lambda);
    return sm * ql / (sm + ql);
}

/// Relaxation parameter τ(s), extended by 0 below 0 and by T_M above 1.
template <class Scalar>
Scalar eval_tau(const ModelParams& p, Scalar s)
{
    using std::pow;
    if (s <= Scalar(0))
        return Scalar(0);
    if (s >= Scalar(1))
        return Scalar(p.t_m);
    const Scalar sm = pow(s, p.mu);
    const Scalar ql = pow(Scalar(1) - s, p.lambda);
    return (p.t_m * sm + pow(s, p.mu - p.gamma) * ql) / (sm + ql);
}

/// τ'(s) for s in (0, 1), via the logarithmic derivative of numerator and denominator.
template <class Scalar>
Scalar eval_tau_slope(const ModelParams& p, Scalar s)
{
    using std::pow;
    if (!(s > Scalar(0) && s < Scalar(1)))
        throw DomainError("eval_tau_slope: s must lie in (0, 1)");
    const Scalar q = Scalar(1) - s;
    const Scalar sg = pow(s, p.gamma);
    const Scalar ql = pow(q, p.lambda);
    const Scalar sm = pow(s, p.mu);
    // N = s^(μ-γ) [T_M s^γ + q^λ],  D = s^μ + q^λ
    const Scalar log_num = (p.mu - p.gamma) / s
        + (p.gamma * p.t_m * sg / s - p.lambda * ql / q) / (p.t_m * sg + ql);
    const Scalar log_den = (p.mu * sm / s - p.lambda * ql / q) / (sm + ql);
    return eval_tau(p, s) * (log_num - log_den);
}

/// a(s)/τ(s) = s^γ (1-s)^λ / (T_M s^γ + (1-s)^λ), finite on [0, 1].
template <class Scalar>
Scalar eval_a_over_tau(const ModelParams& p, Scalar s)
{
    using std::pow;
    detail::require_unit_interval(static_cast<double>(s), "eval_a_over_tau");
    const Scalar sg = pow(s, p.gamma);
    const Scalar ql = pow(Scalar(1) - s, p.lambda);
    return sg * ql / (p.t_m * sg + ql);
}

/// Static capillary pressure slope P_c'(s) < 0 on the open interval (0, 1).
template <class Scalar>
Scalar eval_pc_prime(const ModelParams& p, Scalar s)
{
    using std::pow;
    if (s == Scalar(0) || s == Scalar(1))
        throw SingularityError("eval_pc_prime: P_c' is unbounded at s = 0 and s = 1");
    if (!(s > Scalar(0) && s < Scalar(1)))
        throw DomainError("eval_pc_prime: saturation outside (0, 1)");
    return -(p.g(s) / pow(s, p.beta1) + p.h(s) / pow(Scalar(1) - s, p.beta2));
}

/// β(s) = ∫₀^s τ, extended by 0 below 0 and affinely (slope T_M) above 1.
/// On [0, 1] the integral uses composite 16-point Gauss-Legendre over 64 uniform
/// panels, with extra panels halving toward both ends (the integrand behaves like
/// s^(μ-γ) at 0). Panel sums are computed once at construction.
class BetaTransform {
public:
    explicit BetaTransform(const ModelParams& params);

    double operator()(double s) const;
    double at_one() const { return integral_.total(); }

private:
    ModelParams params_;
    PrefixIntegral integral_;
};

/// Convenience wrapper; builds a BetaTransform per call. Prefer BetaTransform in loops.
double eval_beta(const ModelParams& params, double s);

/// One inequality of the hypothesis chain. margin > 0 means satisfied with room;
/// non-strict inequalities also pass at margin == 0.
struct HypothesisCheck {
    std::string hypothesis; ///< "H1", "H2", "H3", "H6", "Add.1", "Add.2", "Add.3"
    std::string inequality;
    double margin = 0.0;
    bool strict = true;
    bool pass = false;
};

struct HypothesisReport {
    int dimension = 1;
    double holder_p = 0.0; ///< only meaningful for n = 2
    bool entropy_diagnostics = true;
    std::vector<HypothesisCheck> checks;
    /// Admissible open interval (m0_lo, m0_hi) ⊂ (1, 2) for the mixed-derivative exponent.
    double m0_lo = 1.0;
    double m0_hi = 1.0;
    bool m0_empty = true;
    double m0_default = 1.0;
    /// Largest δ = m/(2-m) for which the Hölder splitting closes.
    double delta_max = 0.0;
    bool overall_pass = false;

    bool passes(std::string_view hypothesis) const;
    const HypothesisCheck* find(std::string_view inequality) const;
};

/// Evaluates the structural hypotheses on the exponents and the dimension-dependent
/// chain that makes ∇∂_tβ_ε bounded in L^{m0}. Failures are reported, never thrown.
HypothesisReport check_hypotheses(const ModelParams& params, int dimension, double holder_p = 4.0,
                                  bool entropy_diagnostics = true);

/// Numerical sup-norm estimates of the coefficient combinations used by the
/// a priori bounds, over (0, 1).
struct SupNorms {
    double a_pc_over_tau = 0.0;       ///< ‖a P_c'/τ‖
    double a_pc = 0.0;                ///< ‖a P_c'‖
    double a_over_tau = 0.0;          ///< ‖a/τ‖
    double a_tau_slope_over_tau = 0.0;///< ‖a τ'/τ‖
    double a_tau_squared = 0.0;       ///< ‖a τ²‖
    double sqrt_a_tau_slope_over_tau = 0.0; ///< ‖√a τ'/τ‖
    int grid_size = 0;
};

/// Dense-grid maximization followed by one golden-section refinement around each
/// grid maximizer. Throws NumericError on a non-finite intermediate value.
SupNorms coefficient_sup_norms(const ModelParams& params, int grid_size = 10000);

/// max of |f| over [lo, hi]: grid of `grid` interior points, then golden-section
/// refinement in the bracket around the best grid point.
double refined_grid_max(const std::function<double(double)>& f, double lo, double hi, int grid);

} // namespace dcap
