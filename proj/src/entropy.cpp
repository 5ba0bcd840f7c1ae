#include "dcap/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dcap {

double binomial_remainder(double p, double u)
{
    if (std::abs(u) < 0.25) {
        // Σ_{k≥2} C(p, k) u^k
        double term = 0.5 * p * (p - 1.0) * u * u;
        double sum = term;
        for (int k = 2; k < 400 && term != 0.0; ++k) {
            term *= (p - k) / (k + 1.0) * u;
            sum += term;
            if (std::abs(term) <= 1e-18 * std::abs(sum))
                break;
        }
        return sum;
    }
    return std::pow(1.0 + u, p) - 1.0 - p * u;
}

EntropyEvaluator::EntropyEvaluator(const RegularizedModel& model, double s_d)
    : model_(&model),
      s_d_(s_d),
      zd_(model.z(s_d)),
      gamma_(model.params().gamma),
      lambda_(model.params().lambda),
      t_m_(model.params().t_m),
      c_(model.squash())
{
}

EntropyParts EntropyEvaluator::inner(double s) const
{
    const double z = c_ * s + model_->epsilon();
    const double u = (z - zd_) / zd_;
    const double yd = 1.0 - zd_;
    const double v = ((1.0 - z) - yd) / yd;
    const double c2 = c_ * c_;
    EntropyParts e;
    e.gamma_part = std::pow(zd_, 2.0 - gamma_) * binomial_remainder(2.0 - gamma_, u)
        / ((gamma_ - 1.0) * (gamma_ - 2.0) * c2);
    e.lambda_part = std::pow(yd, 2.0 - lambda_) * binomial_remainder(2.0 - lambda_, v)
        / ((lambda_ - 1.0) * (lambda_ - 2.0) * c2);
    return e;
}

void EntropyEvaluator::inner_slope(double s, double& g1, double& g2) const
{
    const double z = c_ * s + model_->epsilon();
    const double u = (z - zd_) / zd_;
    const double yd = 1.0 - zd_;
    const double v = ((1.0 - z) - yd) / yd;
    g1 = std::pow(zd_, 1.0 - gamma_) * std::expm1((1.0 - gamma_) * std::log1p(u))
        / ((1.0 - gamma_) * c_);
    g2 = std::pow(yd, 1.0 - lambda_) * std::expm1((1.0 - lambda_) * std::log1p(v))
        / ((lambda_ - 1.0) * c_);
}

EntropyParts EntropyEvaluator::closed_form(double s) const
{
    if (gamma_ == 1.0 || gamma_ == 2.0 || lambda_ == 1.0 || lambda_ == 2.0)
        throw ParameterError("entropy closed form: gamma and lambda must differ from 1 and 2");
    const double sc = cut_z(s);
    EntropyParts e = inner(sc);
    if (s != sc) {
        // beyond a corner τ_ε/a_ε is frozen, so ℰ continues as a parabola
        double g1 = 0.0;
        double g2 = 0.0;
        inner_slope(sc, g1, g2);
        const double zc = model_->z(sc);
        const double d = s - sc;
        e.gamma_part += g1 * d + 0.5 * std::pow(zc, -gamma_) * d * d;
        e.lambda_part += g2 * d + 0.5 * std::pow(1.0 - zc, -lambda_) * d * d;
    }
    e.total = e.gamma_part + t_m_ * e.lambda_part;
    return e;
}

double EntropyEvaluator::phi(double s) const
{
    if (gamma_ == 1.0 || lambda_ == 1.0)
        throw ParameterError("entropy test function: gamma and lambda must differ from 1");
    const double sc = cut_z(s);
    double g1 = 0.0;
    double g2 = 0.0;
    inner_slope(sc, g1, g2);
    if (s != sc) {
        const double zc = model_->z(sc);
        g1 += std::pow(zc, -gamma_) * (s - sc);
        g2 += std::pow(1.0 - zc, -lambda_) * (s - sc);
    }
    return g1 + t_m_ * g2;
}

double entropy_closed_form(const EntropyEvaluator& ev, double s)
{
    return ev.closed_form(s).total;
}

double test_function_phi(const EntropyEvaluator& ev, double s)
{
    return ev.phi(s);
}

EntropyParts entropy_quadrature_oracle(const EntropyEvaluator& ev, double s)
{
    const RegularizedModel& m = ev.model();
    const double gamma = m.params().gamma;
    const double lambda = m.params().lambda;
    const double lo = std::min(s, ev.s_d());
    const double hi = std::max(s, ev.s_d());
    EntropyParts e;
    if (lo == hi)
        return e;

    std::vector<double> pts{lo};
    for (double corner : {0.0, 1.0})
        if (corner > lo && corner < hi)
            pts.push_back(corner);
    pts.push_back(hi);

    auto h1 = [&](double x) { return std::abs(s - x) * std::pow(m.z(x), -gamma); };
    auto h2 = [&](double x) { return std::abs(s - x) * std::pow(1.0 - m.z(x), -lambda); };
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        e.gamma_part += adaptive_integrate(h1, pts[k], pts[k + 1], 1e-13, 0.0, 20000).value;
        e.lambda_part += adaptive_integrate(h2, pts[k], pts[k + 1], 1e-13, 0.0, 20000).value;
    }
    e.total = e.gamma_part + m.params().t_m * e.lambda_part;
    return e;
}

double EntropyLowerBound::operator()(const RegularizedModel& model, double s) const
{
    const auto& p = model.params();
    const double z = model.z(s);
    return C * (std::pow(z, 2.0 - p.gamma) + std::pow(1.0 - z, 2.0 - p.lambda)) - D;
}

EntropyLowerBound construct_entropy_lower_bound(const ModelParams& params, double s_d,
                                                std::span<const double> eps_list, int grid)
{
    if (!(params.gamma > 2.0 && params.lambda > 2.0))
        throw ParameterError("entropy lower bound needs gamma > 2 and lambda > 2");
    if (eps_list.empty())
        throw ParameterError("entropy lower bound needs at least one epsilon");

    EntropyLowerBound bound;
    const double g = params.gamma;
    const double l = params.lambda;
    bound.C = std::min(1.0 / ((g - 1.0) * (g - 2.0)), params.t_m / ((l - 1.0) * (l - 2.0)));

    double deficit_max = -HUGE_VAL;
    for (double eps : eps_list) {
        const RegularizedModel model(params, eps);
        const EntropyEvaluator ev(model, s_d);
        EntropyLowerBound probe{bound.C, 0.0};
        auto deficit = [&](double s) { return probe(model, s) - ev.closed_form(s).total; };

        std::vector<double> f(grid + 1);
        for (int k = 0; k <= grid; ++k)
            f[k] = deficit(static_cast<double>(k) / grid);
        for (int k = 0; k <= grid; ++k) {
            const bool left = k == 0 || f[k] >= f[k - 1];
            const bool right = k == grid || f[k] >= f[k + 1];
            if (!(left && right))
                continue;
            deficit_max = std::max(deficit_max, f[k]);
            if (k == 0 || k == grid)
                continue;
            // golden-section ascent on the bracket of this local maximum
            double a = static_cast<double>(k - 1) / grid;
            double b = static_cast<double>(k + 1) / grid;
            const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
            double c = b - ratio * (b - a);
            double d = a + ratio * (b - a);
            double fc = deficit(c);
            double fd = deficit(d);
            for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
                if (fc > fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - ratio * (b - a);
                    fc = deficit(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + ratio * (b - a);
                    fd = deficit(d);
                }
            }
            deficit_max = std::max({deficit_max, fc, fd});
        }
    }
    bound.D = deficit_max + 1e-12 * std::abs(deficit_max);
    return bound;
}

double entropy_lower_bound(const EntropyLowerBound& bound, const EntropyEvaluator& ev, double s)
{
    return bound(ev.model(), s);
}

double case2_plateau_coefficient(const RegularizedModel& model)
{
    const double g = model.params().gamma;
    const double c = model.squash();
    return std::pow(model.epsilon(), 2.0 - g) / ((g - 1.0) * (g - 2.0) * c * c);
}

} // namespace dcap
