#include "dcap/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>

#include "dcap/errors.hpp"

namespace dcap {

namespace {

GaussRule compute_gauss_legendre(int n)
{
    GaussRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 2.0;
        return rule;
    }
    // Legendre P_n and its derivative by the three-term recurrence
    auto legendre = [n](double x) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
    };
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        const double dp = legendre(x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    return rule;
}

// QUADPACK qk21 abscissae/weights; odd indices are the embedded 10-point Gauss nodes.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
    double lo, hi, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod21(const std::function<double(double)>& f, double lo, double hi)
{
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    const double fc = f(mid);
    double kron = kWgk[10] * fc;
    double gauss = 0.0;
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kXgk[j];
        const double fsum = f(mid - dx) + f(mid + dx);
        kron += kWgk[j] * fsum;
        if (j % 2 == 1)
            gauss += kWg[j / 2] * fsum;
    }
    kron *= half;
    gauss *= half;
    return {lo, hi, kron, std::abs(kron - gauss)};
}

} // namespace

const GaussRule& gauss_legendre(int n)
{
    if (n < 1)
        throw ParameterError("gauss_legendre: order must be >= 1");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot)
        slot = std::make_unique<GaussRule>(compute_gauss_legendre(n));
    return *slot;
}

AdaptiveResult adaptive_integrate(const std::function<double(double)>& f, double lo, double hi,
                                  double rel_tol, double abs_tol, int max_intervals)
{
    if (lo == hi)
        return {};
    std::priority_queue<Panel> heap;
    Panel first = kronrod21(f, lo, hi);
    double total = first.value;
    double error = first.error;
    heap.push(first);
    int count = 1;
    while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (count >= max_intervals)
            throw NumericError("adaptive_integrate: tolerance not reached");
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        Panel left = kronrod21(f, worst.lo, mid);
        Panel right = kronrod21(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
        // roundoff floor: panels narrower than a few ulps cannot improve
        if (std::abs(worst.hi - worst.lo) < 1e-14 * std::max(1.0, std::abs(mid)))
            break;
    }
    // re-sum to shed accumulated cancellation in the running totals
    double value = 0.0;
    double err = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    if (!std::isfinite(value))
        throw NumericError("adaptive_integrate: non-finite integral");
    return {value, err, count};
}

std::vector<double> graded_breakpoints(double lo, double hi, int uniform_panels, double floor)
{
    if (!(lo < hi) || lo < 0.0 || hi > 1.0)
        throw ParameterError("graded_breakpoints: need 0 <= lo < hi <= 1");
    const double width = 1.0 / uniform_panels;
    std::vector<double> pts{lo, hi};
    for (int k = 1; k < uniform_panels; ++k) {
        const double x = k * width;
        if (x > lo && x < hi)
            pts.push_back(x);
    }
    for (double d = 0.5 * width; d > floor; d *= 0.5) {
        if (d > lo && d < hi)
            pts.push_back(d);
        if (1.0 - d > lo && 1.0 - d < hi)
            pts.push_back(1.0 - d);
        if (d < lo && 1.0 - d > hi)
            break;
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

PrefixIntegral::PrefixIntegral(std::function<double(double)> f, std::vector<double> breakpoints,
                               int order)
    : f_(std::move(f)), breaks_(std::move(breakpoints)), rule_(&gauss_legendre(order))
{
    if (breaks_.size() < 2)
        throw ParameterError("PrefixIntegral: need at least two breakpoints");
    cumulative_.resize(breaks_.size());
    cumulative_[0] = 0.0;
    for (std::size_t k = 1; k < breaks_.size(); ++k)
        cumulative_[k] = cumulative_[k - 1] + gauss_integrate(f_, breaks_[k - 1], breaks_[k], *rule_);
}

double PrefixIntegral::operator()(double x) const
{
    if (x <= breaks_.front())
        return 0.0;
    if (x >= breaks_.back())
        return cumulative_.back();
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - breaks_.begin()) - 1;
    if (x == breaks_[k])
        return cumulative_[k];
    return cumulative_[k] + gauss_integrate(f_, breaks_[k], x, *rule_);
}

} // namespace dcap
