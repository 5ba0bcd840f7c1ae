#pragma once

#include <span>

#include "dcap/regularization.hpp"

namespace dcap {

/// The two pieces of the regularized entropy, built on
/// τ_ε/a_ε = Z_ε^{−γ} + T_M (1 − Z_ε)^{−λ}.
struct EntropyParts {
    double gamma_part = 0.0;  ///< from Z_ε^{−γ}
    double lambda_part = 0.0; ///< from (1 − Z_ε)^{−λ}, before the T_M factor
    double total = 0.0;       ///< gamma_part + T_M·lambda_part
};

/// Entropy ℰ_ε(s) = ∫_{s_d}^{s} (s − ξ) τ_ε(ξ)/a_ε(ξ) dξ relative to a pointwise
/// reference value s_d ∈ (0, 1). Holds a reference to the model, which must outlive it.
///
/// The closed form is evaluated as a Taylor remainder about s_d inside [0, 1], then
/// continued quadratically through the corners s = 0 and s = 1, so the result never
/// forms differences of the large antiderivative values.
class EntropyEvaluator {
public:
    EntropyEvaluator(const RegularizedModel& model, double s_d);

    const RegularizedModel& model() const { return *model_; }
    double s_d() const { return s_d_; }

    EntropyParts closed_form(double s) const;
    /// φ_ε(s) = ℰ_ε'(s) = ∫_{s_d}^{s} τ_ε/a_ε.
    double phi(double s) const;

private:
    EntropyParts inner(double s) const;          // s ∈ [0, 1]
    void inner_slope(double s, double& g1, double& g2) const;

    const RegularizedModel* model_;
    double s_d_;
    double zd_;
    double gamma_;
    double lambda_;
    double t_m_;
    double c_;
};

/// Closed-form ℰ_ε(s). Throws ParameterError when γ or λ is 1 or 2.
double entropy_closed_form(const EntropyEvaluator& ev, double s);

/// Adaptive Gauss-Kronrod evaluation of both entropy integrals, split at the corners
/// of Z_ε. Independent of the closed form. Throws NumericError on non-convergence.
EntropyParts entropy_quadrature_oracle(const EntropyEvaluator& ev, double s);

double test_function_phi(const EntropyEvaluator& ev, double s);

/// ℰ⁰(s) = C [Z_ε(s)^{2−γ} + (1 − Z_ε(s))^{2−λ}] − D.
struct EntropyLowerBound {
    double C = 0.0;
    double D = 0.0;

    double operator()(const RegularizedModel& model, double s) const;
};

/// C = min(1/((γ−1)(γ−2)), T_M/((λ−1)(λ−2))); D is the largest deficit
/// C[...] − ℰ_ε over s ∈ [0, 1] and the given ε values, found on a grid and refined by
/// golden section around each local maximum, then rounded up by 1e-12 relative.
/// Outside [0, 1] Z_ε is frozen while ℰ_ε keeps growing, so the bound extends to ℝ.
/// Throws ParameterError unless γ > 2 and λ > 2.
EntropyLowerBound construct_entropy_lower_bound(const ModelParams& params, double s_d,
                                                std::span<const double> eps_list,
                                                int grid = 4000);

double entropy_lower_bound(const EntropyLowerBound& bound, const EntropyEvaluator& ev, double s);

/// Coefficient of the ε-dependent constant in the s < 0 branch:
/// ε^{2−γ} / ((γ−1)(γ−2)(1−2ε)²).
double case2_plateau_coefficient(const RegularizedModel& model);

/// (1 + u)^p − 1 − p·u without cancellation for small |u|.
double binomial_remainder(double p, double u);

} // namespace dcap
