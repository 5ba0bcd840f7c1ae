#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "dcap/regularization.hpp"

using namespace dcap;

namespace {

const std::vector<double> eps_ladder{1e-1, 5e-2, 2.5e-2, 1e-2, 5e-3, 2.5e-3, 1e-3, 1e-4};

// max over the sample set of |β_ε − β| / (ε (|s⁻| + 1 + |(s−1)⁺|))
double proximity_ratio(const ModelParams& p, double eps, const std::vector<double>& samples)
{
    const RegularizedModel m(p, eps);
    const BetaTransform beta(p);
    double worst = 0.0;
    for (double s : samples) {
        const double weight = std::max(-s, 0.0) + 1.0 + std::max(s - 1.0, 0.0);
        worst = std::max(worst, std::abs(m.beta(s) - beta(s)) / (eps * weight));
    }
    return worst;
}

std::vector<double> linspace(double lo, double hi, int n)
{
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k)
        v[k] = lo + (hi - lo) * k / (n - 1);
    return v;
}

} // namespace

TEST_SUITE("regularization") {

TEST_CASE("Z maps the real line onto [eps, 1 - eps]")
{
    const RegularizedModel m(ModelParams{}, 0.05);
    CHECK(m.z(0.0) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(m.z(1.0) == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(m.z(-7.0) == m.z(0.0));
    CHECK(m.z(3.0) == m.z(1.0));
    CHECK(m.z(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.squash() == doctest::Approx(0.9).epsilon(1e-15));
    CHECK_THROWS_AS(RegularizedModel(ModelParams{}, 0.5), ParameterError);
    CHECK_THROWS_AS(RegularizedModel(ModelParams{}, 0.0), ParameterError);
}

TEST_CASE("coefficients are bounded below uniformly on the real line")
{
    for (double eps : {0.1, 0.01, 0.001}) {
        const RegularizedModel m(ModelParams{}, eps);
        CHECK(m.m_a() > 0.0);
        CHECK(m.m_tau() > 0.0);
        CHECK(m.m_ap() > 0.0);
        for (double s : linspace(-2.0, 3.0, 2001)) {
            CHECK(m.a(s) >= m.m_a() * (1 - 1e-12));
            CHECK(m.a(s) <= m.a_max() * (1 + 1e-12));
            CHECK(m.tau(s) >= m.m_tau() * (1 - 1e-12));
            CHECK(-m.a(s) * m.pc_prime(s) >= m.m_ap() * (1 - 1e-9));
        }
    }
}

TEST_CASE("regularized coefficients are the model composed with Z")
{
    const ModelParams p;
    const RegularizedModel m(p, 0.02);
    for (double s : {-1.0, 0.0, 0.3, 0.7, 1.0, 2.0}) {
        const double zz = 0.96 * std::clamp(s, 0.0, 1.0) + 0.02;
        CHECK(m.a(s) == eval_a(p, zz));
        CHECK(m.tau(s) == eval_tau(p, zz));
        CHECK(m.pc_prime(s) == eval_pc_prime(p, zz));
        CHECK(m.tau_over_a(s) == doctest::Approx(eval_tau(p, zz) / eval_a(p, zz)).epsilon(1e-12));
        const double direct = eval_a(p, zz) * eval_pc_prime(p, zz) / eval_tau(p, zz);
        CHECK(m.a_pc_over_tau(s) == doctest::Approx(direct).epsilon(1e-12));
    }
    CHECK(m.tau_slope(-0.5) == 0.0);
    CHECK(m.tau_slope(1.5) == 0.0);
    CHECK(m.tau_slope(0.4) == doctest::Approx(0.96 * eval_tau_slope(p, m.z(0.4))).epsilon(1e-15));
}

TEST_CASE("beta table against adaptive quadrature")
{
    for (double eps : {0.1, 0.01, 1e-3, 1e-5}) {
        const RegularizedModel m(ModelParams{}, eps);
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> u(-0.5, 1.5);
        for (int k = 0; k < 60; ++k) {
            const double s = u(rng);
            const double oracle = m.beta_quadrature(s);
            CHECK(std::abs(m.beta(s) - oracle) <= 1e-11 * std::max(1.0, std::abs(oracle)));
        }
        CHECK(m.beta(0.0) == 0.0);
        CHECK(m.beta(-2.0) == doctest::Approx(-2.0 * m.tau(-1.0)).epsilon(1e-15));
        CHECK(m.beta(1.5) == doctest::Approx(m.beta_at_one() + 0.5 * m.tau(2.0)).epsilon(1e-15));
    }
}

TEST_CASE("beta slope follows tau")
{
    const RegularizedModel m(ModelParams{}, 0.01);
    for (double s : linspace(-0.5, 1.5, 801))
        CHECK(m.beta_slope(s) == doctest::Approx(m.tau(s)).epsilon(1e-8));
}

TEST_CASE("beta is strictly increasing and its inverse round-trips")
{
    for (double eps : {0.1, 1e-3}) {
        const RegularizedModel m(ModelParams{}, eps);
        double prev = m.beta(-3.0);
        for (double s : linspace(-3.0, 3.0, 6001)) {
            if (s == -3.0)
                continue;
            const double v = m.beta(s);
            CHECK(v > prev);
            prev = v;
        }
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(-2.0, 3.0);
        for (int k = 0; k < 500; ++k) {
            const double s = u(rng);
            CHECK(m.beta_inverse(m.beta(s)) == doctest::Approx(s).epsilon(1e-12).scale(1.0));
        }
        CHECK_THROWS_AS(m.beta_inverse(std::nan("")), NumericError);
    }
}

TEST_CASE("beta proximity is O(eps) on [0, 1]")
{
    // Near s = 0 the constant approaches its limit like ε^{μ−γ}, so it creeps upward
    // with shrinking steps per decade.
    const ModelParams p;
    const auto samples = linspace(0.0, 1.0, 401);
    std::vector<double> ratios;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6})
        ratios.push_back(proximity_ratio(p, eps, samples));
    MESSAGE("ratio at eps = 1e-1: " << ratios.front() << ", at 1e-6: " << ratios.back());
    CHECK(*std::max_element(ratios.begin(), ratios.end()) < 1.0);
    // per-decade increments shrink geometrically by 10^{−(μ−γ)}, so the sequence converges
    const double q = std::pow(10.0, -(p.mu - p.gamma));
    for (std::size_t k = 3; k < ratios.size(); ++k) {
        const double step = (ratios[k] - ratios[k - 1]) / (ratios[k - 1] - ratios[k - 2]);
        CHECK(step == doctest::Approx(q).epsilon(0.05));
    }
    const double last_step = ratios.back() - ratios[ratios.size() - 2];
    CHECK(ratios.back() + last_step * q / (1.0 - q) < 1.0);
}

TEST_CASE("beta proximity is O(eps) on the real line when mu - gamma >= 1")
{
    ModelParams p;
    p.mu = 6.6;
    const auto samples = linspace(-2.0, 3.0, 1001);
    std::vector<double> ratios;
    for (double eps : eps_ladder)
        ratios.push_back(proximity_ratio(p, eps, samples));
    MESSAGE("ratio at eps = 1e-1: " << ratios.front() << ", at 1e-4: " << ratios.back());
    CHECK(*std::max_element(ratios.begin(), ratios.end()) < 10.0);
    CHECK(ratios.back() <= 2.0 * ratios.front());
}

TEST_CASE("beta proximity on the negative axis scales like tau(eps)/eps")
{
    // β = 0 and β_ε(s) = τ(ε)s for s < 0, so the weighted ratio tends to τ(ε)/ε, which
    // grows like ε^{μ−γ−1} once μ − γ < 1. The bounded-ratio form does not hold there.
    const ModelParams p;
    const std::vector<double> samples{-2.0, -1.0, -0.25};
    double prev = 0.0;
    for (double eps : eps_ladder) {
        const double ratio = proximity_ratio(p, eps, samples);
        const double predicted = eval_tau(p, eps) / eps * (2.0 / 3.0);
        CHECK(ratio == doctest::Approx(predicted).epsilon(1e-12));
        CHECK(ratio > prev);
        prev = ratio;
    }
    const double growth = proximity_ratio(p, 1e-4, samples) / proximity_ratio(p, 1e-1, samples);
    MESSAGE("negative-axis ratio growth from eps = 1e-1 to 1e-4: " << growth);
    CHECK(growth > 100.0);
}

TEST_CASE("Kirchhoff transform")
{
    const RegularizedModel m(ModelParams{}, 0.01);
    CHECK(m.kirchhoff(0.0) == 0.0);
    for (double s : {-0.7, 0.1, 0.5, 0.93, 1.4}) {
        const double eta = 1e-6;
        const double fd = (m.kirchhoff(s + eta) - m.kirchhoff(s - eta)) / (2 * eta);
        CHECK(fd == doctest::Approx(std::sqrt(-m.pc_prime(s))).epsilon(1e-6));
    }
    double prev = m.kirchhoff(-1.0);
    for (double s : linspace(-1.0, 2.0, 301)) {
        if (s == -1.0)
            continue;
        CHECK(m.kirchhoff(s) > prev);
        prev = m.kirchhoff(s);
    }
}

TEST_CASE("free wrappers forward to the model")
{
    const RegularizedModel m(ModelParams{}, 0.03);
    CHECK(z_eps(m, 0.4) == m.z(0.4));
    CHECK(a_eps(m, 0.4) == m.a(0.4));
    CHECK(tau_eps(m, 0.4) == m.tau(0.4));
    CHECK(pc_prime_eps(m, 0.4) == m.pc_prime(0.4));
    CHECK(beta_eps(m, 0.4) == m.beta(0.4));
    CHECK(beta_eps_inverse(m, m.beta(0.4)) == doctest::Approx(0.4).epsilon(1e-13));
    CHECK(kirchhoff_eps(m, 0.4) == m.kirchhoff(0.4));
}

} // TEST_SUITE
