#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>

namespace dcap {

/// Polynomial in two variables, Σ c_ij u^i v^j. Keeps the text it was parsed from
/// so configurations serialize back verbatim.
class Polynomial2 {
public:
    using Exponents = std::pair<int, int>;

    Polynomial2() = default;
    explicit Polynomial2(double constant);
    Polynomial2(std::map<Exponents, double> terms, std::string source = {});

    template <class Scalar>
    Scalar operator()(Scalar u, Scalar v = Scalar(0)) const
    {
        Scalar sum(0);
        for (const auto& [e, c] : terms_)
            sum += c * ipow(u, e.first) * ipow(v, e.second);
        return sum;
    }

    Polynomial2 derivative_u() const;
    Polynomial2 derivative_v() const;

    bool is_constant() const;
    double constant_term() const;
    const std::map<Exponents, double>& terms() const { return terms_; }
    const std::string& source() const { return source_; }

    Polynomial2 operator+(const Polynomial2& o) const;
    Polynomial2 operator*(const Polynomial2& o) const;
    Polynomial2 operator-() const;

    friend bool operator==(const Polynomial2& a, const Polynomial2& b)
    {
        return a.terms_ == b.terms_;
    }

private:
    template <class Scalar>
    static Scalar ipow(Scalar x, int n)
    {
        Scalar r(1);
        for (int k = 0; k < n; ++k)
            r *= x;
        return r;
    }

    void prune();

    std::map<Exponents, double> terms_;
    std::string source_;
};

/// Parses sums/products of numbers and the two named variables, with integer powers
/// and parentheses, e.g. "0.4 + 0.2*x - 0.4*x^2*(1 + t)". Throws ConfigError.
Polynomial2 parse_polynomial(std::string_view text, char var_u = 'x', char var_v = 't');

/// Value of a space-time field with the derivatives the Galerkin load vector needs.
struct FieldValue {
    double value = 0.0;
    double dx = 0.0;
    double dt = 0.0;
    double dxdt = 0.0;
};

using SpaceTimeField = std::function<FieldValue(double x, double t)>;

/// Field S(x, t) backed by a polynomial in (x, t).
SpaceTimeField make_field(const Polynomial2& poly);

SpaceTimeField constant_field(double value);

/// C_c^∞ bump: amplitude·exp(1 − 1/(1 − r²)) with r = (s − center)/halfwidth, zero for |r| ≥ 1.
struct Bump {
    double center = 0.5;
    double halfwidth = 0.25;
    double amplitude = 1.0;

    double operator()(double s) const
    {
        const double r = (s - center) / halfwidth;
        if (std::abs(r) >= 1.0)
            return 0.0;
        return amplitude * std::exp(1.0 - 1.0 / (1.0 - r * r));
    }

    friend bool operator==(const Bump&, const Bump&) = default;

    double support_lo() const { return center - halfwidth; }
    double support_hi() const { return center + halfwidth; }
    double max_value() const { return std::abs(amplitude); }
};

/// Flux cutoff σ(s): either identically zero or a bump. Source text retained.
struct FluxCutoff {
    bool active = false;
    Bump bump;
    std::string source = "0";

    double operator()(double s) const { return active ? bump(s) : 0.0; }

    friend bool operator==(const FluxCutoff&, const FluxCutoff&) = default;
};

/// Parses "0" or "bump(center, halfwidth, amplitude)". Throws ConfigError.
FluxCutoff parse_cutoff(std::string_view text);

} // namespace dcap
