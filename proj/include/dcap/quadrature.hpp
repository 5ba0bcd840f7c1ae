#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace dcap {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;

    int order() const { return static_cast<int>(nodes.size()); }
};

/// Returns the n-point Gauss-Legendre rule (cached; thread-safe).
const GaussRule& gauss_legendre(int n);

/// Integrates f over [lo, hi] with a single Gauss-Legendre panel.
template <class F>
double gauss_integrate(const F& f, double lo, double hi, const GaussRule& rule)
{
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (int q = 0; q < rule.order(); ++q)
        sum += rule.weights[q] * f(mid + half * rule.nodes[q]);
    return sum * half;
}

template <class F>
double gauss_integrate(const F& f, double lo, double hi, int n = 16)
{
    return gauss_integrate(f, lo, hi, gauss_legendre(n));
}

struct AdaptiveResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int intervals = 0;
};

/// Adaptive Gauss-Kronrod (G10/K21) quadrature with global bisection.
/// Throws NumericError when the tolerance cannot be met within `max_intervals`.
AdaptiveResult adaptive_integrate(const std::function<double(double)>& f, double lo, double hi,
                                  double rel_tol = 1e-13, double abs_tol = 0.0,
                                  int max_intervals = 4000);

/// Breakpoints on [lo, hi] ⊂ [0, 1]: uniform panels of width 1/uniform_panels,
/// refined geometrically (ratio 2) toward 0 and toward 1 so that integrands behaving
/// like powers of z or (1 - z) are resolved panel by panel.
std::vector<double> graded_breakpoints(double lo, double hi, int uniform_panels = 64,
                                       double floor = 1e-30);

/// Cumulative integral F(x) = ∫_{lo}^{x} f over a fixed breakpoint set.
/// Panel sums are cached; an evaluation costs one Gauss panel.
class PrefixIntegral {
public:
    PrefixIntegral() = default;
    PrefixIntegral(std::function<double(double)> f, std::vector<double> breakpoints,
                   int order = 16);

    double lo() const { return breaks_.front(); }
    double hi() const { return breaks_.back(); }
    double total() const { return cumulative_.back(); }
    std::span<const double> breakpoints() const { return breaks_; }

    /// ∫_{lo}^{x} f for x in [lo, hi]; x is clamped to the range.
    double operator()(double x) const;

private:
    std::function<double(double)> f_;
    std::vector<double> breaks_;
    std::vector<double> cumulative_;
    const GaussRule* rule_ = nullptr;
};

} // namespace dcap
