#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dcap/diagnostics.hpp"
#include "dcap/expression.hpp"
#include "dcap/galerkin.hpp"
#include "dcap/model.hpp"

namespace dcap {

struct MeshConfig {
    double lo = 0.0;
    double hi = 1.0;
    int elements = 64;
    bool dirichlet_left = true;
    bool dirichlet_right = false;
    int quad_order = 5;

    friend bool operator==(const MeshConfig&, const MeshConfig&) = default;
};

struct ProblemConfig {
    Polynomial2 s_d = parse_polynomial("0.9");   ///< in (x, t)
    Polynomial2 s_i = parse_polynomial("0.3");   ///< in x
    Polynomial2 r0 = parse_polynomial("0");      ///< in (x, t)
    FluxCutoff sigma = parse_cutoff("0");
    InitialProjection initial = InitialProjection::l2;
    double horizon = 0.5;
    /// Range set A of the boundary-flux bound.
    double range_lo = 0.05;
    double range_hi = 0.95;

    friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

struct StepperConfig {
    double dt = 0.005;
    double dt_min = 1e-9;
    double tol = 1e-10;
    int picard_max = 50;
    int newton_max = 30;
    bool implicit_b = true;

    friend bool operator==(const StepperConfig&, const StepperConfig&) = default;
};

struct OutputConfig {
    std::string directory = "out";
    int stride = 10;          ///< profile every `stride` steps
    bool entropy = true;
    double m0 = 0.0;          ///< 0 selects the midpoint of the admissible interval
    int dimension = 3;        ///< n for the exponent conditions
    double holder_p = 4.0;    ///< p for n = 2

    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct MmsConfig {
    Polynomial2 target = parse_polynomial("0.4 + 0.2*x + 0.4*x*(1 - x)*(1 + t - 0.5*t^2)");
    double epsilon = 0.1;
    double horizon = 0.5;
    int base_elements = 4;
    int spatial_levels = 5;   ///< base·2^k elements, k < levels
    double dt_factor = 2.0;   ///< dt = dt_factor·h² on the spatial ladder
    int temporal_elements = 512;
    int temporal_levels = 6;  ///< dt = horizon·2^{−(4+k)}, k < levels
    int quad_order = 8;

    friend bool operator==(const MmsConfig&, const MmsConfig&) = default;
};

struct RunConfig {
    ModelParams model;
    std::vector<double> epsilon{0.05};
    MeshConfig mesh;
    ProblemConfig problem;
    StepperConfig stepper;
    OutputConfig output;
    MmsConfig mms;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses sectioned key = value text. Unknown sections or keys, malformed values and
/// structural violations throw ConfigError as "origin:line: message".
RunConfig parse_config(std::string_view text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Every field, in a form parse_config reads back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

/// Structural checks: mesh, time step, ε range, (H4) ranges of S_D and S_i, (H5) support
/// of σ. Throws ConfigError.
void validate_config(const RunConfig& config);

HypothesisReport config_hypotheses(const RunConfig& config);

/// Throws ConfigError naming the first failed check among H1, H2, H3 and, with entropy
/// diagnostics on, H6. The exponent conditions do not block a run.
void require_solvable(const RunConfig& config);

/// m0 used by the diagnostics: the configured value, else the admissible midpoint,
/// else 1.5 when the interval is empty.
double effective_m0(const RunConfig& config);

Mesh1D make_mesh(const RunConfig& config);
ProblemData make_problem(const RunConfig& config);
StepperOptions make_stepper(const RunConfig& config);
DiagnosticsOptions make_diagnostics_options(const RunConfig& config);

} // namespace dcap
