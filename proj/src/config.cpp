#include "dcap/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace dcap {

namespace {

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

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& v)
{
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("'" + v + "' is not a number");
    return out;
}

int to_int(const std::string& v)
{
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("'" + v + "' is not an integer");
    return out;
}

bool to_bool(const std::string& v)
{
    if (v == "true" || v == "yes" || v == "on" || v == "1")
        return true;
    if (v == "false" || v == "no" || v == "off" || v == "0")
        return false;
    throw ConfigError("'" + v + "' is not a boolean");
}

bool to_dirichlet(const std::string& v)
{
    if (v == "dirichlet")
        return true;
    if (v == "neumann")
        return false;
    throw ConfigError("boundary role must be 'dirichlet' or 'neumann', got '" + v + "'");
}

InitialProjection to_projection(const std::string& v)
{
    if (v == "l2")
        return InitialProjection::l2;
    if (v == "lumped")
        return InitialProjection::lumped;
    throw ConfigError("initial projection must be 'l2' or 'lumped', got '" + v + "'");
}

std::vector<double> to_list(const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(to_double(trim(item)));
    if (out.empty())
        throw ConfigError("empty list");
    return out;
}

Polynomial2 to_poly_s(const std::string& v) { return parse_polynomial(v, 's', 't'); }
Polynomial2 to_poly_xt(const std::string& v) { return parse_polynomial(v, 'x', 't'); }

Polynomial2 to_poly_x(const std::string& v)
{
    Polynomial2 p = parse_polynomial(v, 'x', 't');
    for (const auto& [e, c] : p.terms())
        if (e.second != 0 && c != 0.0)
            throw ConfigError("'" + v + "' must not depend on t");
    return p;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters()
{
    static const std::map<std::string, std::map<std::string, Setter>> table{
        {"model",
         {{"mu", [](RunConfig& c, const std::string& v) { c.model.mu = to_double(v); }},
          {"lambda", [](RunConfig& c, const std::string& v) { c.model.lambda = to_double(v); }},
          {"gamma", [](RunConfig& c, const std::string& v) { c.model.gamma = to_double(v); }},
          {"t_m", [](RunConfig& c, const std::string& v) { c.model.t_m = to_double(v); }},
          {"beta1", [](RunConfig& c, const std::string& v) { c.model.beta1 = to_double(v); }},
          {"beta2", [](RunConfig& c, const std::string& v) { c.model.beta2 = to_double(v); }},
          {"g", [](RunConfig& c, const std::string& v) { c.model.g = to_poly_s(v); }},
          {"h", [](RunConfig& c, const std::string& v) { c.model.h = to_poly_s(v); }}}},
        {"regularization",
         {{"epsilon", [](RunConfig& c, const std::string& v) { c.epsilon = to_list(v); }}}},
        {"mesh",
         {{"lo", [](RunConfig& c, const std::string& v) { c.mesh.lo = to_double(v); }},
          {"hi", [](RunConfig& c, const std::string& v) { c.mesh.hi = to_double(v); }},
          {"elements", [](RunConfig& c, const std::string& v) { c.mesh.elements = to_int(v); }},
          {"left", [](RunConfig& c, const std::string& v) { c.mesh.dirichlet_left = to_dirichlet(v); }},
          {"right", [](RunConfig& c, const std::string& v) { c.mesh.dirichlet_right = to_dirichlet(v); }},
          {"quad_order", [](RunConfig& c, const std::string& v) { c.mesh.quad_order = to_int(v); }}}},
        {"problem",
         {{"s_d", [](RunConfig& c, const std::string& v) { c.problem.s_d = to_poly_xt(v); }},
          {"s_i", [](RunConfig& c, const std::string& v) { c.problem.s_i = to_poly_x(v); }},
          {"r0", [](RunConfig& c, const std::string& v) { c.problem.r0 = to_poly_xt(v); }},
          {"sigma", [](RunConfig& c, const std::string& v) { c.problem.sigma = parse_cutoff(v); }},
          {"initial", [](RunConfig& c, const std::string& v) { c.problem.initial = to_projection(v); }},
          {"horizon", [](RunConfig& c, const std::string& v) { c.problem.horizon = to_double(v); }},
          {"range_lo", [](RunConfig& c, const std::string& v) { c.problem.range_lo = to_double(v); }},
          {"range_hi", [](RunConfig& c, const std::string& v) { c.problem.range_hi = to_double(v); }}}},
        {"stepper",
         {{"dt", [](RunConfig& c, const std::string& v) { c.stepper.dt = to_double(v); }},
          {"dt_min", [](RunConfig& c, const std::string& v) { c.stepper.dt_min = to_double(v); }},
          {"tol", [](RunConfig& c, const std::string& v) { c.stepper.tol = to_double(v); }},
          {"picard_max", [](RunConfig& c, const std::string& v) { c.stepper.picard_max = to_int(v); }},
          {"newton_max", [](RunConfig& c, const std::string& v) { c.stepper.newton_max = to_int(v); }},
          {"implicit_b", [](RunConfig& c, const std::string& v) { c.stepper.implicit_b = to_bool(v); }}}},
        {"output",
         {{"directory", [](RunConfig& c, const std::string& v) { c.output.directory = v; }},
          {"stride", [](RunConfig& c, const std::string& v) { c.output.stride = to_int(v); }},
          {"entropy", [](RunConfig& c, const std::string& v) { c.output.entropy = to_bool(v); }},
          {"m0", [](RunConfig& c, const std::string& v) { c.output.m0 = to_double(v); }},
          {"dimension", [](RunConfig& c, const std::string& v) { c.output.dimension = to_int(v); }},
          {"holder_p", [](RunConfig& c, const std::string& v) { c.output.holder_p = to_double(v); }}}},
        {"mms",
         {{"target", [](RunConfig& c, const std::string& v) { c.mms.target = to_poly_xt(v); }},
          {"epsilon", [](RunConfig& c, const std::string& v) { c.mms.epsilon = to_double(v); }},
          {"horizon", [](RunConfig& c, const std::string& v) { c.mms.horizon = to_double(v); }},
          {"base_elements", [](RunConfig& c, const std::string& v) { c.mms.base_elements = to_int(v); }},
          {"spatial_levels", [](RunConfig& c, const std::string& v) { c.mms.spatial_levels = to_int(v); }},
          {"dt_factor", [](RunConfig& c, const std::string& v) { c.mms.dt_factor = to_double(v); }},
          {"temporal_elements", [](RunConfig& c, const std::string& v) { c.mms.temporal_elements = to_int(v); }},
          {"temporal_levels", [](RunConfig& c, const std::string& v) { c.mms.temporal_levels = to_int(v); }},
          {"quad_order", [](RunConfig& c, const std::string& v) { c.mms.quad_order = to_int(v); }}}},
    };
    return table;
}

void fail(const std::string& where, const std::string& what)
{
    throw ConfigError(where + ": " + what);
}

} // namespace

RunConfig parse_config(std::string_view text, const std::string& origin)
{
    RunConfig cfg;
    const auto& table = setters();
    std::string section;
    std::set<std::pair<std::string, std::string>> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        std::string line = raw;
        if (const auto hash = line.find_first_of("#;"); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(where, "unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!table.count(section))
                fail(where, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(where, "expected 'key = value'");
        if (section.empty())
            fail(where, "key outside of any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const auto& keys = table.at(section);
        const auto it = keys.find(key);
        if (it == keys.end())
            fail(where, "unknown key '" + key + "' in [" + section + "]");
        if (!seen.insert({section, key}).second)
            fail(where, "duplicate key '" + key + "' in [" + section + "]");
        if (value.empty())
            fail(where, "empty value for '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            fail(where, section + "." + key + ": " + e.what());
        }
    }
    try {
        validate_config(cfg);
    } catch (const ConfigError& e) {
        fail(origin, e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path.string() + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::string serialize_config(const RunConfig& c)
{
    std::ostringstream os;
    auto b = [](bool v) { return v ? "true" : "false"; };
    auto role = [](bool d) { return d ? "dirichlet" : "neumann"; };
    os << "[model]\n"
       << "mu = " << fmt(c.model.mu) << "\n"
       << "lambda = " << fmt(c.model.lambda) << "\n"
       << "gamma = " << fmt(c.model.gamma) << "\n"
       << "t_m = " << fmt(c.model.t_m) << "\n"
       << "beta1 = " << fmt(c.model.beta1) << "\n"
       << "beta2 = " << fmt(c.model.beta2) << "\n"
       << "g = " << (c.model.g.source().empty() ? fmt(c.model.g.constant_term()) : c.model.g.source()) << "\n"
       << "h = " << (c.model.h.source().empty() ? fmt(c.model.h.constant_term()) : c.model.h.source()) << "\n\n";
    os << "[regularization]\nepsilon = ";
    for (std::size_t k = 0; k < c.epsilon.size(); ++k)
        os << (k ? ", " : "") << fmt(c.epsilon[k]);
    os << "\n\n[mesh]\n"
       << "lo = " << fmt(c.mesh.lo) << "\n"
       << "hi = " << fmt(c.mesh.hi) << "\n"
       << "elements = " << c.mesh.elements << "\n"
       << "left = " << role(c.mesh.dirichlet_left) << "\n"
       << "right = " << role(c.mesh.dirichlet_right) << "\n"
       << "quad_order = " << c.mesh.quad_order << "\n\n";
    os << "[problem]\n"
       << "s_d = " << c.problem.s_d.source() << "\n"
       << "s_i = " << c.problem.s_i.source() << "\n"
       << "r0 = " << c.problem.r0.source() << "\n"
       << "sigma = " << c.problem.sigma.source << "\n"
       << "initial = " << (c.problem.initial == InitialProjection::l2 ? "l2" : "lumped") << "\n"
       << "horizon = " << fmt(c.problem.horizon) << "\n"
       << "range_lo = " << fmt(c.problem.range_lo) << "\n"
       << "range_hi = " << fmt(c.problem.range_hi) << "\n\n";
    os << "[stepper]\n"
       << "dt = " << fmt(c.stepper.dt) << "\n"
       << "dt_min = " << fmt(c.stepper.dt_min) << "\n"
       << "tol = " << fmt(c.stepper.tol) << "\n"
       << "picard_max = " << c.stepper.picard_max << "\n"
       << "newton_max = " << c.stepper.newton_max << "\n"
       << "implicit_b = " << b(c.stepper.implicit_b) << "\n\n";
    os << "[output]\n"
       << "directory = " << c.output.directory << "\n"
       << "stride = " << c.output.stride << "\n"
       << "entropy = " << b(c.output.entropy) << "\n"
       << "m0 = " << fmt(c.output.m0) << "\n"
       << "dimension = " << c.output.dimension << "\n"
       << "holder_p = " << fmt(c.output.holder_p) << "\n\n";
    os << "[mms]\n"
       << "target = " << c.mms.target.source() << "\n"
       << "epsilon = " << fmt(c.mms.epsilon) << "\n"
       << "horizon = " << fmt(c.mms.horizon) << "\n"
       << "base_elements = " << c.mms.base_elements << "\n"
       << "spatial_levels = " << c.mms.spatial_levels << "\n"
       << "dt_factor = " << fmt(c.mms.dt_factor) << "\n"
       << "temporal_elements = " << c.mms.temporal_elements << "\n"
       << "temporal_levels = " << c.mms.temporal_levels << "\n"
       << "quad_order = " << c.mms.quad_order << "\n";
    return os.str();
}

void validate_config(const RunConfig& c)
{
    try {
        c.model.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("[model] ") + e.what());
    }
    if (c.epsilon.empty())
        throw ConfigError("[regularization] epsilon list is empty");
    for (double e : c.epsilon)
        if (!(e > 0.0 && e < 0.5))
            throw ConfigError("[regularization] epsilon " + fmt(e) + " outside (0, 1/2)");
    for (std::size_t k = 1; k < c.epsilon.size(); ++k)
        if (!(c.epsilon[k] < c.epsilon[k - 1]))
            throw ConfigError("[regularization] epsilon list must be strictly decreasing");

    if (!(c.mesh.hi > c.mesh.lo))
        throw ConfigError("[mesh] hi must exceed lo");
    if (c.mesh.elements < 1)
        throw ConfigError("[mesh] elements must be positive");
    if (c.mesh.quad_order < 1 || c.mesh.quad_order > 64)
        throw ConfigError("[mesh] quad_order must lie in 1..64");
    if (!c.mesh.dirichlet_left && !c.mesh.dirichlet_right)
        throw ConfigError("[mesh] at least one end must be dirichlet");

    const auto& p = c.problem;
    if (!(p.horizon > 0.0))
        throw ConfigError("[problem] horizon must be positive");
    if (!(p.range_lo > 0.0 && p.range_lo < p.range_hi && p.range_hi < 1.0))
        throw ConfigError("[problem] need 0 < range_lo < range_hi < 1");
    // (H4) on a sampling grid of Q_T
    const int nx = 201;
    const int nt = 51;
    for (int i = 0; i < nx; ++i) {
        const double x = c.mesh.lo + (c.mesh.hi - c.mesh.lo) * i / (nx - 1);
        const double si = p.s_i(x);
        if (!(si >= 0.0 && si <= 1.0))
            throw ConfigError("[problem] s_i leaves [0, 1] at x = " + fmt(x));
        for (int j = 0; j < nt; ++j) {
            const double t = p.horizon * j / (nt - 1);
            const double sd = p.s_d(x, t);
            if (!(sd > 0.0 && sd < 1.0))
                throw ConfigError("[problem] s_d leaves (0, 1) at (x, t) = (" + fmt(x) + ", "
                                  + fmt(t) + ")");
        }
    }
    if (p.sigma.active) {
        const Bump& bump = p.sigma.bump;
        if (!(bump.center - bump.halfwidth > 0.0 && bump.center + bump.halfwidth < 1.0))
            throw ConfigError("[problem] sigma support must lie inside (0, 1)");
    }

    const auto& s = c.stepper;
    if (!(s.dt > 0.0))
        throw ConfigError("[stepper] dt must be positive");
    if (!(s.dt_min > 0.0 && s.dt_min <= s.dt))
        throw ConfigError("[stepper] need 0 < dt_min <= dt");
    if (!(s.tol > 0.0))
        throw ConfigError("[stepper] tol must be positive");
    if (s.picard_max < 1 || s.newton_max < 0)
        throw ConfigError("[stepper] iteration caps must be positive");

    const auto& o = c.output;
    if (o.stride < 1)
        throw ConfigError("[output] stride must be positive");
    if (o.m0 != 0.0 && !(o.m0 > 1.0 && o.m0 < 2.0))
        throw ConfigError("[output] m0 must be 0 (automatic) or lie in (1, 2)");
    if (o.dimension < 1 || o.dimension > 3)
        throw ConfigError("[output] dimension must be 1, 2 or 3");

    const auto& m = c.mms;
    if (!(m.epsilon > 0.0 && m.epsilon < 0.5))
        throw ConfigError("[mms] epsilon outside (0, 1/2)");
    if (!(m.horizon > 0.0) || m.base_elements < 1 || m.spatial_levels < 1
        || m.temporal_levels < 1 || m.temporal_elements < 1 || !(m.dt_factor > 0.0)
        || m.quad_order < 1 || m.quad_order > 64)
        throw ConfigError("[mms] ladder settings must be positive");
}

HypothesisReport config_hypotheses(const RunConfig& c)
{
    return check_hypotheses(c.model, c.output.dimension, c.output.holder_p, c.output.entropy);
}

void require_solvable(const RunConfig& c)
{
    const HypothesisReport r = config_hypotheses(c);
    for (const auto& check : r.checks) {
        const bool blocking = check.hypothesis == "H1" || check.hypothesis == "H2"
            || check.hypothesis == "H3" || check.hypothesis == "H6";
        if (blocking && !check.pass)
            throw ConfigError("hypothesis " + check.hypothesis + " fails: " + check.inequality
                              + " (margin " + fmt(check.margin) + ")");
    }
}

double effective_m0(const RunConfig& c)
{
    if (c.output.m0 != 0.0)
        return c.output.m0;
    const HypothesisReport r = config_hypotheses(c);
    return r.m0_empty ? 1.5 : r.m0_default;
}

Mesh1D make_mesh(const RunConfig& c)
{
    return Mesh1D::uniform(c.mesh.lo, c.mesh.hi, c.mesh.elements, c.mesh.dirichlet_left,
                           c.mesh.dirichlet_right, c.mesh.quad_order);
}

ProblemData make_problem(const RunConfig& c)
{
    ProblemData d;
    d.s_d = make_field(c.problem.s_d);
    const Polynomial2 si = c.problem.s_i;
    d.s_i = [si](double x) { return si(x); };
    if (!(c.problem.r0.is_constant() && c.problem.r0.constant_term() == 0.0)) {
        const Polynomial2 r0 = c.problem.r0;
        d.r0 = [r0](double x, double t) { return r0(x, t); };
    }
    d.sigma = c.problem.sigma;
    d.horizon = c.problem.horizon;
    return d;
}

StepperOptions make_stepper(const RunConfig& c)
{
    StepperOptions o;
    o.picard_max = c.stepper.picard_max;
    o.newton_max = c.stepper.newton_max;
    o.tol = c.stepper.tol;
    o.dt_min = c.stepper.dt_min;
    o.implicit_b = c.stepper.implicit_b;
    return o;
}

DiagnosticsOptions make_diagnostics_options(const RunConfig& c)
{
    DiagnosticsOptions o;
    o.m0 = effective_m0(c);
    o.entropy = c.output.entropy;
    o.range_lo = c.problem.range_lo;
    o.range_hi = c.problem.range_hi;
    return o;
}

} // namespace dcap
