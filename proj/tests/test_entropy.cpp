#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "dcap/entropy.hpp"

using namespace dcap;

namespace {

// ∫_{s_d}^{s} (s − ξ) τ_ε(ξ)/a_ε(ξ) dξ from the raw powers, split where Z_ε has corners
double entropy_oracle(const ModelParams& p, double eps, double s_d, double s)
{
    const double c = 1.0 - 2.0 * eps;
    auto ratio = [&](double xi) {
        const double z = c * std::clamp(xi, 0.0, 1.0) + eps;
        return std::pow(z, -p.gamma) + p.t_m * std::pow(1.0 - z, -p.lambda);
    };
    std::vector<double> cuts{s_d};
    for (double corner : {0.0, 1.0})
        if ((corner - s_d) * (corner - s) < 0.0)
            cuts.push_back(corner);
    cuts.push_back(s);
    if (s < s_d)
        std::sort(cuts.begin(), cuts.end(), std::greater<>());
    else
        std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        sum += adaptive_integrate([&](double xi) { return (s - xi) * ratio(xi); }, cuts[k],
                                  cuts[k + 1], 1e-13)
                   .value;
    return sum;
}

} // namespace

TEST_SUITE("entropy") {

TEST_CASE("closed form against an independent quadrature")
{
    const ModelParams p;
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    for (double eps : {0.1, 1e-2, 1e-3}) {
        const RegularizedModel m(p, eps);
        for (double s_d : {0.2, 0.5, 0.85}) {
            const EntropyEvaluator ev(m, s_d);
            for (int k = 0; k < 40; ++k) {
                const double s = u(rng);
                const double oracle = entropy_oracle(p, eps, s_d, s);
                const double cf = entropy_closed_form(ev, s);
                CHECK(std::abs(cf - oracle) <= 1e-9 * std::abs(oracle) + 1e-300);
            }
        }
    }
}

TEST_CASE("closed form parts sum with the T_M weight")
{
    const RegularizedModel m(ModelParams{}, 0.01);
    const EntropyEvaluator ev(m, 0.4);
    for (double s : {-0.5, 0.1, 0.7, 1.3}) {
        const EntropyParts e = ev.closed_form(s);
        CHECK(e.total == doctest::Approx(e.gamma_part + 2.0 * e.lambda_part).epsilon(1e-14));
        const EntropyParts q = entropy_quadrature_oracle(ev, s);
        CHECK(e.gamma_part == doctest::Approx(q.gamma_part).epsilon(1e-9));
        CHECK(e.lambda_part == doctest::Approx(q.lambda_part).epsilon(1e-9));
    }
}

TEST_CASE("entropy vanishes at the reference and is nonnegative")
{
    const RegularizedModel m(ModelParams{}, 0.02);
    const EntropyEvaluator ev(m, 0.6);
    CHECK(entropy_closed_form(ev, 0.6) == 0.0);
    CHECK(ev.phi(0.6) == 0.0);
    for (int k = 0; k <= 300; ++k) {
        const double s = -1.0 + 3.0 * k / 300.0;
        CHECK(entropy_closed_form(ev, s) >= 0.0);
    }
}

TEST_CASE("phi is the derivative of the entropy")
{
    const RegularizedModel m(ModelParams{}, 0.05);
    const EntropyEvaluator ev(m, 0.5);
    for (double s : {-0.6, 0.05, 0.3, 0.8, 0.97, 1.5}) {
        const double eta = 1e-6;
        const double fd = (entropy_closed_form(ev, s + eta) - entropy_closed_form(ev, s - eta)) / (2 * eta);
        CHECK(test_function_phi(ev, s) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("entropy is quadratic beyond the corners")
{
    const RegularizedModel m(ModelParams{}, 0.05);
    const EntropyEvaluator ev(m, 0.5);
    const double r0 = m.tau_over_a(0.0);
    // second difference of a parabola with curvature τ_ε/a_ε at Z = ε
    const double h = 0.1;
    const double d2 = (entropy_closed_form(ev, -0.5 + h) - 2 * entropy_closed_form(ev, -0.5)
                       + entropy_closed_form(ev, -0.5 - h)) / (h * h);
    CHECK(d2 == doctest::Approx(r0).epsilon(1e-8));
}

TEST_CASE("lower bound holds and has the closed-form constant")
{
    const ModelParams p;
    const std::vector<double> eps{0.05, 0.01, 0.002};
    const EntropyLowerBound lb = construct_entropy_lower_bound(p, 0.5, eps);
    const double expected_c = std::min(1.0 / (4.6 * 3.6), 2.0 / (5.0 * 4.0));
    CHECK(lb.C == doctest::Approx(expected_c).epsilon(1e-15));
    CHECK(lb.D > 0.0);
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    for (double e : eps) {
        const RegularizedModel m(p, e);
        const EntropyEvaluator ev(m, 0.5);
        for (int k = 0; k < 2000; ++k) {
            const double s = u(rng);
            CHECK(entropy_lower_bound(lb, ev, s) <= entropy_closed_form(ev, s));
        }
    }
    ModelParams bad = p;
    bad.gamma = 2.0;
    bad.beta1 = 2.0;
    CHECK_THROWS_AS(construct_entropy_lower_bound(bad, 0.5, eps), ParameterError);
}

TEST_CASE("excluded exponents")
{
    ModelParams p;
    p.gamma = 2.0;
    p.beta1 = 2.0;
    const RegularizedModel m(p, 0.1);
    const EntropyEvaluator ev(m, 0.5);
    CHECK_THROWS_AS(entropy_closed_form(ev, 0.3), ParameterError);
}

TEST_CASE("binomial remainder")
{
    for (double p : {-3.6, -0.5, 0.4, 2.5}) {
        for (double u : {-0.6, -0.2, 0.1, 0.9, 3.0}) {
            const double direct = std::pow(1.0 + u, p) - 1.0 - p * u;
            CHECK(binomial_remainder(p, u) == doctest::Approx(direct).epsilon(1e-12));
        }
        // leading term dominates for tiny u, where the direct form cancels
        const double u = 1e-9;
        CHECK(binomial_remainder(p, u) == doctest::Approx(0.5 * p * (p - 1) * u * u).epsilon(1e-8));
    }
}

TEST_CASE("plateau coefficient")
{
    const RegularizedModel m(ModelParams{}, 0.01);
    const double expected = std::pow(0.01, -3.6) / (4.6 * 3.6 * 0.98 * 0.98);
    CHECK(case2_plateau_coefficient(m) == doctest::Approx(expected).epsilon(1e-14));
}

} // TEST_SUITE
