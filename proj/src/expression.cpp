#include "dcap/expression.hpp"

#include <cctype>
#include <charconv>
#include <sstream>
#include <vector>

#include "dcap/errors.hpp"

namespace dcap {

Polynomial2::Polynomial2(double constant)
    : terms_{{{0, 0}, constant}}, source_()
{
    std::ostringstream os;
    os.precision(17);
    os << constant;
    source_ = os.str();
    prune();
}

Polynomial2::Polynomial2(std::map<Exponents, double> terms, std::string source)
    : terms_(std::move(terms)), source_(std::move(source))
{
    prune();
}

void Polynomial2::prune()
{
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (it->second == 0.0)
            it = terms_.erase(it);
        else
            ++it;
    }
}

Polynomial2 Polynomial2::derivative_u() const
{
    std::map<Exponents, double> d;
    for (const auto& [e, c] : terms_)
        if (e.first > 0)
            d[{e.first - 1, e.second}] += c * e.first;
    return Polynomial2(std::move(d));
}

Polynomial2 Polynomial2::derivative_v() const
{
    std::map<Exponents, double> d;
    for (const auto& [e, c] : terms_)
        if (e.second > 0)
            d[{e.first, e.second - 1}] += c * e.second;
    return Polynomial2(std::move(d));
}

bool Polynomial2::is_constant() const
{
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Exponents{0, 0});
}

double Polynomial2::constant_term() const
{
    const auto it = terms_.find({0, 0});
    return it == terms_.end() ? 0.0 : it->second;
}

Polynomial2 Polynomial2::operator+(const Polynomial2& o) const
{
    auto t = terms_;
    for (const auto& [e, c] : o.terms_)
        t[e] += c;
    return Polynomial2(std::move(t));
}

Polynomial2 Polynomial2::operator*(const Polynomial2& o) const
{
    std::map<Exponents, double> t;
    for (const auto& [e1, c1] : terms_)
        for (const auto& [e2, c2] : o.terms_)
            t[{e1.first + e2.first, e1.second + e2.second}] += c1 * c2;
    return Polynomial2(std::move(t));
}

Polynomial2 Polynomial2::operator-() const
{
    auto t = terms_;
    for (auto& [e, c] : t)
        c = -c;
    return Polynomial2(std::move(t));
}

namespace {

class PolyParser {
public:
    PolyParser(std::string_view text, char u, char v) : text_(text), u_(u), v_(v) {}

    Polynomial2 parse()
    {
        Polynomial2 p = expression();
        skip();
        if (pos_ != text_.size())
            fail("unexpected character");
        return p;
    }

private:
    Polynomial2 expression()
    {
        Polynomial2 acc = term();
        for (;;) {
            skip();
            if (peek() == '+') {
                ++pos_;
                acc = acc + term();
            } else if (peek() == '-') {
                ++pos_;
                acc = acc + (-term());
            } else {
                return acc;
            }
        }
    }

    Polynomial2 term()
    {
        Polynomial2 acc = unary();
        for (;;) {
            skip();
            if (peek() != '*')
                return acc;
            ++pos_;
            acc = acc * unary();
        }
    }

    Polynomial2 unary()
    {
        skip();
        if (peek() == '-') {
            ++pos_;
            return -unary();
        }
        if (peek() == '+') {
            ++pos_;
            return unary();
        }
        return power();
    }

    Polynomial2 power()
    {
        Polynomial2 base = primary();
        skip();
        if (peek() != '^')
            return base;
        ++pos_;
        skip();
        int n = 0;
        const auto* begin = text_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), n);
        if (ec != std::errc() || n < 0)
            fail("expected non-negative integer exponent");
        pos_ += static_cast<std::size_t>(ptr - begin);
        Polynomial2 r(std::map<Polynomial2::Exponents, double>{{{0, 0}, 1.0}});
        for (int k = 0; k < n; ++k)
            r = r * base;
        return r;
    }

    Polynomial2 primary()
    {
        skip();
        const char c = peek();
        if (c == '(') {
            ++pos_;
            Polynomial2 inner = expression();
            skip();
            if (peek() != ')')
                fail("expected ')'");
            ++pos_;
            return inner;
        }
        if (c == u_) {
            ++pos_;
            return Polynomial2(std::map<Polynomial2::Exponents, double>{{{1, 0}, 1.0}});
        }
        if (c == v_) {
            ++pos_;
            return Polynomial2(std::map<Polynomial2::Exponents, double>{{{0, 1}, 1.0}});
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            // strtod handles exponents like 1e-3
            const std::string rest(text_.substr(pos_));
            char* end = nullptr;
            const double value = std::strtod(rest.c_str(), &end);
            if (end == rest.c_str())
                fail("malformed number");
            pos_ += static_cast<std::size_t>(end - rest.c_str());
            return Polynomial2(std::map<Polynomial2::Exponents, double>{{{0, 0}, value}});
        }
        fail(c == '\0' ? "unexpected end of expression" : "unexpected character");
    }

    [[noreturn]] void fail(const char* what) const
    {
        std::ostringstream os;
        os << what << " at column " << pos_ + 1 << " in '" << text_ << "'";
        throw ConfigError(os.str());
    }

    void skip()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    std::string_view text_;
    char u_;
    char v_;
    std::size_t pos_ = 0;
};

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

Polynomial2 parse_polynomial(std::string_view text, char var_u, char var_v)
{
    Polynomial2 p = PolyParser(text, var_u, var_v).parse();
    return Polynomial2(p.terms(), trim(text));
}

SpaceTimeField make_field(const Polynomial2& poly)
{
    const Polynomial2 px = poly.derivative_u();
    const Polynomial2 pt = poly.derivative_v();
    const Polynomial2 pxt = px.derivative_v();
    return [poly, px, pt, pxt](double x, double t) {
        return FieldValue{poly(x, t), px(x, t), pt(x, t), pxt(x, t)};
    };
}

SpaceTimeField constant_field(double value)
{
    return [value](double, double) { return FieldValue{value, 0.0, 0.0, 0.0}; };
}

FluxCutoff parse_cutoff(std::string_view text)
{
    const std::string s = trim(text);
    FluxCutoff cut;
    cut.source = s;
    if (s.rfind("bump", 0) == 0) {
        const auto open = s.find('(');
        const auto close = s.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open)
            throw ConfigError("malformed bump(...) in '" + s + "'");
        std::vector<double> args;
        std::stringstream ss(s.substr(open + 1, close - open - 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            char* end = nullptr;
            const double v = std::strtod(t.c_str(), &end);
            if (t.empty() || *end != '\0')
                throw ConfigError("bump argument '" + t + "' is not a number");
            args.push_back(v);
        }
        if (args.size() != 3)
            throw ConfigError("bump(center, halfwidth, amplitude) needs three arguments");
        cut.active = true;
        cut.bump = Bump{args[0], args[1], args[2]};
        if (cut.bump.halfwidth <= 0.0)
            throw ConfigError("bump halfwidth must be positive");
        return cut;
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || v != 0.0)
        throw ConfigError("flux cutoff must be 0 or bump(center, halfwidth, amplitude), got '" + s + "'");
    return cut;
}

} // namespace dcap
