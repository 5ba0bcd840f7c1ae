#include "dcap/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dcap {

void ModelParams::validate() const
{
    std::ostringstream os;
    if (!(mu > 0.0 && lambda > 0.0))
        os << "mu and lambda must be positive; ";
    if (!(gamma >= 0.0 && mu > gamma))
        os << "need mu > gamma >= 0; ";
    if (!(t_m > 1.0))
        os << "need t_m > 1; ";
    if (!(beta1 > 0.0 && beta2 > 0.0))
        os << "beta1 and beta2 must be positive; ";
    const std::string msg = os.str();
    if (!msg.empty())
        throw ParameterError("ModelParams: " + msg.substr(0, msg.size() - 2));
}

BetaTransform::BetaTransform(const ModelParams& params)
    : params_(params),
      integral_([p = params](double s) { return eval_tau(p, s); }, graded_breakpoints(0.0, 1.0))
{
}

double BetaTransform::operator()(double s) const
{
    if (s <= 0.0)
        return 0.0;
    if (s >= 1.0)
        return integral_.total() + params_.t_m * (s - 1.0);
    return integral_(s);
}

double eval_beta(const ModelParams& params, double s)
{
    return BetaTransform(params)(s);
}

bool HypothesisReport::passes(std::string_view hypothesis) const
{
    bool any = false;
    for (const auto& c : checks) {
        if (c.hypothesis != hypothesis)
            continue;
        any = true;
        if (!c.pass)
            return false;
    }
    return any;
}

const HypothesisCheck* HypothesisReport::find(std::string_view inequality) const
{
    for (const auto& c : checks)
        if (c.inequality == inequality)
            return &c;
    return nullptr;
}

namespace {

double min_on_unit_interval(const Polynomial2& f)
{
    double m = f(0.0);
    for (int k = 1; k <= 1000; ++k)
        m = std::min(m, f(k / 1000.0));
    return m;
}

} // namespace

HypothesisReport check_hypotheses(const ModelParams& p, int dimension, double holder_p,
                                  bool entropy_diagnostics)
{
    if (dimension < 1 || dimension > 3)
        throw ParameterError("check_hypotheses: dimension must be 1, 2 or 3");

    HypothesisReport r;
    r.dimension = dimension;
    r.holder_p = holder_p;
    r.entropy_diagnostics = entropy_diagnostics;

    // lhs < rhs (strict) or lhs <= rhs, margin = rhs - lhs
    auto add = [&r](std::string hyp, std::string text, double lhs, double rhs, bool strict) {
        const double margin = rhs - lhs;
        const bool pass = strict ? margin > 0.0 : margin >= 0.0;
        r.checks.push_back({std::move(hyp), std::move(text), margin, strict, pass});
    };

    add("H1", "0 < mu", 0.0, p.mu, true);
    add("H1", "0 < lambda", 0.0, p.lambda, true);
    add("H2", "0 <= gamma", 0.0, p.gamma, false);
    add("H2", "gamma < mu", p.gamma, p.mu, true);
    add("H2", "1 < t_m", 1.0, p.t_m, true);
    add("H3", "0 < beta1", 0.0, p.beta1, true);
    add("H3", "beta1 <= gamma", p.beta1, p.gamma, false);
    add("H3", "0 < beta2", 0.0, p.beta2, true);
    add("H3", "beta2 <= lambda", p.beta2, p.lambda, false);
    add("H3", "0 < min g on [0,1]", 0.0, min_on_unit_interval(p.g), true);
    add("H3", "0 < min h on [0,1]", 0.0, min_on_unit_interval(p.h), true);
    if (entropy_diagnostics) {
        add("H6", "2 < gamma", 2.0, p.gamma, true);
        add("H6", "2 < lambda", 2.0, p.lambda, true);
    }

    // Exponent chain closing the Hölder splitting of ∫ a_ε^{-δ}.
    double delta_lo = 0.0; // from the s -> 0 side
    double delta_hi = 0.0; // from the s -> 1 side
    if (dimension == 3) {
        const std::string tag = "Add.1";
        add(tag, "5 < beta1", 5.0, p.beta1, true);
        add(tag, "beta1 <= gamma", p.beta1, p.gamma, false);
        add(tag, "gamma < mu", p.gamma, p.mu, true);
        add(tag, "mu < 5/6 gamma + (beta1 - 10/3)/2", p.mu,
            5.0 / 6.0 * p.gamma + 0.5 * (p.beta1 - 10.0 / 3.0), true);
        add(tag, "5 < beta2", 5.0, p.beta2, true);
        add(tag, "beta2 <= lambda", p.beta2, p.lambda, false);
        add(tag, "lambda < 3 beta2 - 10", p.lambda, 3.0 * p.beta2 - 10.0, true);
        delta_lo = -(10.0 / 3.0 + p.mu - 5.0 / 3.0 * p.gamma - p.beta1) / p.mu;
        delta_hi = (p.beta2 + 2.0 / 3.0 * p.lambda - 10.0 / 3.0) / p.lambda;
    } else if (dimension == 2) {
        const std::string tag = "Add.2";
        add(tag, "2 < p", 2.0, holder_p, true);
        const double sigma = (holder_p - 1.0) / holder_p;
        const double theta1 = 1.0 - 2.0 / holder_p;
        add(tag, "4 < beta1", 4.0, p.beta1, true);
        add(tag, "beta1 <= gamma", p.beta1, p.gamma, false);
        add(tag, "gamma < mu", p.gamma, p.mu, true);
        add(tag, "mu < sigma gamma + (beta1 - 4 sigma)/2", p.mu,
            sigma * p.gamma + 0.5 * (p.beta1 - 4.0 * sigma), true);
        add(tag, "4 < beta2", 4.0, p.beta2, true);
        add(tag, "beta2 <= lambda", p.beta2, p.lambda, false);
        delta_lo = -(2.0 + p.mu - p.gamma - p.beta1 + (2.0 - p.gamma) * theta1) / p.mu;
        delta_hi = -(2.0 - p.beta2 + (2.0 - p.lambda) * theta1) / p.lambda;
    } else {
        const std::string tag = "Add.3";
        add(tag, "4 < beta1", 4.0, p.beta1, true);
        add(tag, "beta1 <= gamma", p.beta1, p.gamma, false);
        add(tag, "gamma < mu", p.gamma, p.mu, true);
        add(tag, "mu < gamma + (beta1 - 4)/2", p.mu, p.gamma + 0.5 * (p.beta1 - 4.0), true);
        add(tag, "4 < beta2", 4.0, p.beta2, true);
        add(tag, "beta2 <= lambda", p.beta2, p.lambda, false);
        delta_lo = -(4.0 + p.mu - 2.0 * p.gamma - p.beta1) / p.mu;
        delta_hi = (p.beta2 + p.lambda - 4.0) / p.lambda;
    }

    // δ = m/(2-m) must exceed 1 and stay below both closure limits.
    r.delta_max = std::min(delta_lo, delta_hi);
    add("ThirdOrder", "1 < delta_max", 1.0, r.delta_max, true);
    if (r.delta_max > 1.0) {
        r.m0_empty = false;
        r.m0_lo = 1.0;
        r.m0_hi = 2.0 * r.delta_max / (1.0 + r.delta_max);
        r.m0_default = 0.5 * (r.m0_lo + r.m0_hi);
    }

    r.overall_pass = std::all_of(r.checks.begin(), r.checks.end(),
                                 [](const HypothesisCheck& c) { return c.pass; });
    return r;
}

double refined_grid_max(const std::function<double(double)>& f, double lo, double hi, int grid)
{
    const double step = (hi - lo) / (grid + 1);
    auto eval = [&f](double s) {
        const double v = std::abs(f(s));
        if (!std::isfinite(v))
            throw NumericError("coefficient evaluation produced a non-finite value");
        return v;
    };
    double best = -1.0;
    int best_k = 1;
    for (int k = 1; k <= grid; ++k) {
        const double v = eval(lo + k * step);
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    // golden section on the bracket around the grid maximizer
    double a = lo + (best_k - 1) * step;
    double b = lo + (best_k + 1) * step;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    for (int it = 0; it < 80 && (b - a) > 1e-15; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = eval(d);
        }
    }
    return std::max({best, fc, fd});
}

SupNorms coefficient_sup_norms(const ModelParams& p, int grid_size)
{
    using std::pow;
    // Closed forms with the singular powers already cancelled against a's zeros.
    auto a_over_tau = [&p](double s) { return eval_a_over_tau(p, s); };
    auto a_pc_over_tau = [&p](double s) {
        const double q = 1.0 - s;
        const double den = p.t_m * pow(s, p.gamma) + pow(q, p.lambda);
        return (p.g(s) * pow(s, p.gamma - p.beta1) * pow(q, p.lambda)
                + p.h(s) * pow(s, p.gamma) * pow(q, p.lambda - p.beta2))
            / den;
    };
    auto a_pc = [&p](double s) {
        const double q = 1.0 - s;
        const double den = pow(s, p.mu) + pow(q, p.lambda);
        return (p.g(s) * pow(s, p.mu - p.beta1) * pow(q, p.lambda)
                + p.h(s) * pow(s, p.mu) * pow(q, p.lambda - p.beta2))
            / den;
    };
    auto a_dtau_over_tau = [&p](double s) {
        return eval_a(p, s) * eval_tau_slope(p, s) / eval_tau(p, s);
    };
    auto a_tau2 = [&p](double s) {
        const double t = eval_tau(p, s);
        return eval_a(p, s) * t * t;
    };
    auto sqrt_a_dtau_over_tau = [&p](double s) {
        return std::sqrt(eval_a(p, s)) * eval_tau_slope(p, s) / eval_tau(p, s);
    };

    SupNorms n;
    n.grid_size = grid_size;
    n.a_pc_over_tau = refined_grid_max(a_pc_over_tau, 0.0, 1.0, grid_size);
    n.a_pc = refined_grid_max(a_pc, 0.0, 1.0, grid_size);
    n.a_over_tau = refined_grid_max(a_over_tau, 0.0, 1.0, grid_size);
    n.a_tau_slope_over_tau = refined_grid_max(a_dtau_over_tau, 0.0, 1.0, grid_size);
    n.a_tau_squared = refined_grid_max(a_tau2, 0.0, 1.0, grid_size);
    n.sqrt_a_tau_slope_over_tau = refined_grid_max(sqrt_a_dtau_over_tau, 0.0, 1.0, grid_size);
    return n;
}

} // namespace dcap
