#include "dcap/regularization.hpp"

#include <algorithm>
#include <cmath>

namespace dcap {

double refined_grid_min(const std::function<double(double)>& f, double lo, double hi, int grid)
{
    const double step = (hi - lo) / grid;
    double best = std::min(f(lo), f(hi));
    int best_k = -1;
    for (int k = 1; k < grid; ++k) {
        const double v = f(lo + k * step);
        if (v < best) {
            best = v;
            best_k = k;
        }
    }
    if (best_k < 0)
        return best;
    double a = lo + (best_k - 1) * step;
    double b = lo + (best_k + 1) * step;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 80 && (b - a) > 1e-15; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    return std::min({best, fc, fd});
}

namespace {

// Knots on [0, 1]: the graded panel set, each panel split evenly again. The
// nearest singularity of τ∘Z_ε sits at s = −ε/(1 − 2ε), so grading stops well
// short of that scale.
std::vector<double> table_knots(double eps)
{
    const auto coarse = graded_breakpoints(0.0, 1.0, 64, 1e-3 * eps);
    std::vector<double> knots;
    for (std::size_t k = 0; k + 1 < coarse.size(); ++k) {
        const double lo = coarse[k];
        const double hi = coarse[k + 1];
        const int parts = 16;
        for (int j = 0; j < parts; ++j)
            knots.push_back(lo + (hi - lo) * j / parts);
    }
    knots.push_back(1.0);
    return knots;
}

} // namespace

RegularizedModel::RegularizedModel(const ModelParams& params, double epsilon)
    : params_(params), eps_(epsilon), c_(1.0 - 2.0 * epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw ParameterError("RegularizedModel: epsilon must lie in (0, 1/2)");
    params_.validate();

    m_tau_ = eval_tau(params_, eps_);
    tau_hi_ = eval_tau(params_, 1.0 - eps_);

    const auto& p = params_;
    m_a_ = refined_grid_min([&p](double z) { return eval_a(p, z); }, eps_, 1.0 - eps_, 4096);
    m_ap_ = refined_grid_min([&p](double z) { return -eval_a(p, z) * eval_pc_prime(p, z); }, eps_,
                             1.0 - eps_, 4096);
    a_max_ = refined_grid_max([&p](double z) { return eval_a(p, z); }, 0.0, 1.0, 4096);

    knots_ = table_knots(eps_);
    const std::size_t n = knots_.size();
    values_.resize(n);
    slopes_.resize(n);
    curvatures_.resize(n);
    const GaussRule& rule = gauss_legendre(16);
    auto tau_s = [this](double s) { return tau(s); };
    values_[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0)
            values_[k] = values_[k - 1] + gauss_integrate(tau_s, knots_[k - 1], knots_[k], rule);
        const double zk = z(knots_[k]);
        slopes_[k] = eval_tau(p, zk);
        curvatures_[k] = c_ * eval_tau_slope(p, zk);
    }

    sqrt_pc_lo_ = std::sqrt(-eval_pc_prime(p, eps_));
    sqrt_pc_hi_ = std::sqrt(-eval_pc_prime(p, 1.0 - eps_));
    // captures by value so copies of the model stay self-contained
    kirchhoff_ = PrefixIntegral(
        [p = params_, e = eps_, c = c_](double s) {
            return std::sqrt(-eval_pc_prime(p, c * cut_z(s) + e));
        },
        knots_);
}

double RegularizedModel::tau_slope(double s) const
{
    if (s < 0.0 || s > 1.0)
        return 0.0;
    return c_ * eval_tau_slope(params_, z(s));
}

double RegularizedModel::tau_over_a(double s) const
{
    const double zz = z(s);
    return std::pow(zz, -params_.gamma) + params_.t_m * std::pow(1.0 - zz, -params_.lambda);
}

double RegularizedModel::a_pc_over_tau(double s) const
{
    using std::pow;
    const auto& p = params_;
    const double zz = z(s);
    const double q = 1.0 - zz;
    const double den = p.t_m * pow(zz, p.gamma) + pow(q, p.lambda);
    return -(p.g(zz) * pow(zz, p.gamma - p.beta1) * pow(q, p.lambda)
             + p.h(zz) * pow(zz, p.gamma) * pow(q, p.lambda - p.beta2))
        / den;
}

double RegularizedModel::hermite(std::size_t k, double s, double* slope) const
{
    const double x0 = knots_[k];
    const double h = knots_[k + 1] - x0;
    const double t = (s - x0) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double t4 = t3 * t;
    const double t5 = t4 * t;
    const double f0 = values_[k];
    const double f1 = values_[k + 1];
    const double d0 = slopes_[k] * h;
    const double d1 = slopes_[k + 1] * h;
    const double c0 = curvatures_[k] * h * h;
    const double c1 = curvatures_[k + 1] * h * h;

    const double value = f0 * (1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5)
        + d0 * (t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5)
        + c0 * (0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5)
        + c1 * (0.5 * t3 - t4 + 0.5 * t5)
        + d1 * (-4.0 * t3 + 7.0 * t4 - 3.0 * t5)
        + f1 * (10.0 * t3 - 15.0 * t4 + 6.0 * t5);
    if (slope) {
        const double dt = (f1 - f0) * (30.0 * t2 - 60.0 * t3 + 30.0 * t4)
            + d0 * (1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4)
            + c0 * (t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4)
            + c1 * (1.5 * t2 - 4.0 * t3 + 2.5 * t4)
            + d1 * (-12.0 * t2 + 28.0 * t3 - 15.0 * t4);
        *slope = dt / h;
    }
    return value;
}

double RegularizedModel::beta(double s) const
{
    if (s <= 0.0)
        return m_tau_ * s;
    if (s >= 1.0)
        return values_.back() + tau_hi_ * (s - 1.0);
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - knots_.begin()) - 1;
    return hermite(k, s, nullptr);
}

double RegularizedModel::beta_slope(double s) const
{
    if (s < 0.0)
        return m_tau_;
    if (s > 1.0)
        return tau_hi_;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
    std::size_t k = static_cast<std::size_t>(it - knots_.begin());
    k = std::min(k, knots_.size() - 1) - 1;
    double slope = 0.0;
    hermite(k, s, &slope);
    return slope;
}

double RegularizedModel::beta_quadrature(double s) const
{
    auto integrand = [this](double x) { return tau(x); };
    if (s <= 0.0)
        return m_tau_ * s;
    if (s >= 1.0)
        return adaptive_integrate(integrand, 0.0, 1.0, 1e-14).value + tau_hi_ * (s - 1.0);
    return adaptive_integrate(integrand, 0.0, s, 1e-14).value;
}

double RegularizedModel::beta_inverse(double v) const
{
    if (!std::isfinite(v))
        throw NumericError("beta_inverse: non-finite argument");
    if (v <= 0.0)
        return v / m_tau_;
    if (v >= values_.back())
        return 1.0 + (v - values_.back()) / tau_hi_;

    const auto it = std::upper_bound(values_.begin(), values_.end(), v);
    const std::size_t k = static_cast<std::size_t>(it - values_.begin()) - 1;
    double lo = knots_[k];
    double hi = knots_[k + 1];
    // linear guess inside the bracketing panel
    double s = lo + (hi - lo) * (v - values_[k]) / (values_[k + 1] - values_[k]);
    for (int it_count = 0; it_count < 100; ++it_count) {
        double slope = 0.0;
        const double r = hermite(k, s, &slope) - v;
        if (r == 0.0)
            return s;
        if (r > 0.0)
            hi = s;
        else
            lo = s;
        double next = s - r / slope;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 2e-16 * std::max(1.0, std::abs(s)) || hi - lo <= 1e-300)
            return next;
        s = next;
    }
    throw NumericError("beta_inverse: iteration cap reached");
}

double RegularizedModel::kirchhoff(double s) const
{
    if (s <= 0.0)
        return s * sqrt_pc_lo_;
    if (s >= 1.0)
        return kirchhoff_.total() + (s - 1.0) * sqrt_pc_hi_;
    return kirchhoff_(s);
}

} // namespace dcap
