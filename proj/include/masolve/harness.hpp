#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "masolve/solver.hpp"
#include "masolve/visc_analysis.hpp"

namespace masolve {

/// Bad flags, config or problem key. Maps to exit code 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kSchemaVersion = 1;

struct SolverSettings {
    std::optional<double> dt;
    std::optional<double> tol;
    std::optional<long> max_iters;

    /// Unset fields fall back to the dimension's default tolerance and 10^6 iterations.
    SolveParams to_params(int dim, int stencil_width) const;
};

struct RunConfig {
    std::string problem;
    std::optional<int> n_per_axis;
    /// Level l means n = 2^l intervals per axis.
    std::vector<int> levels;
    int stencil_width = 1;
    SolverSettings solver;
    std::uint64_t seed = 42;
    std::string out;
    std::string csv;
    std::string counterexample_case;

    /// Throws UsageError describing the first invalid field.
    void validate_problem() const;
    void validate_levels() const;
};

/// Parses a JSON config document. Keys: problem, levels, stencil_width,
/// solver {dt, tol, max_iters}, seed, out. Unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Parses "a..b" (inclusive) or a single level.
std::vector<int> parse_level_range(const std::string& text);

/// Shortest decimal string that reads back to the same double.
std::string format_number(double value);

/// Unknown key message, listing the registry.
std::string unknown_problem_message(const std::string& key);

// ---- solving and convergence ----

struct SolveOutcome {
    GridFunction u;
    SolveReport report;
};

SolveOutcome solve_problem(const PDEProblem& problem, int n_per_axis, int stencil_width,
                           const SolverSettings& settings);

/// Max nodal error against the exact solution.
double max_nodal_error(const PDEProblem& problem, const GridFunction& u);
/// Error at the problem's probe point (evaluated at the nearest node).
double probe_error(const PDEProblem& problem, const GridFunction& u);
/// True iff u equals g exactly at every boundary node.
bool boundary_matches_data(const PDEProblem& problem, const GridFunction& u);
/// Smallest width-1 directional second difference over interior nodes.
double min_width1_second_difference(const GridFunction& u);

struct ConvergenceRow {
    int level = 0;
    double h = 0.0;
    std::size_t n_nodes = 0;
    double err_inf = 0.0;
    double err_probe = 0.0;
    long iterations = 0;
    double runtime_ms = 0.0;
    bool converged = false;
};

struct ConvergenceTable {
    std::string problem;
    int stencil_width = 1;
    Point probe{0.0, 0.0};
    std::vector<ConvergenceRow> rows;
};

inline constexpr const char* kConvergenceHeader = "level,h,n_nodes,err_inf,err_probe,iterations,runtime_ms";

ConvergenceRow convergence_row(const PDEProblem& problem, int level, const SolveOutcome& outcome);
ConvergenceTable run_convergence(const PDEProblem& problem, const std::vector<int>& levels, int stencil_width,
                                 const SolverSettings& settings);
std::string convergence_csv(const ConvergenceTable& table);
/// Solution dump: node, coordinates, value.
std::string solution_csv(const GridFunction& u);

// ---- scheme verification ----

struct MonotonicityWitness {
    int n_per_axis = 0;
    int stencil_width = 1;
    NodeIndex node = 0;
    NodeIndex neighbor = 0;
    double delta = 0.0;
    /// "neighbor" (F must not increase) or "self" (F must not decrease).
    std::string check;
    double before = 0.0;
    double after = 0.0;
};

struct MonotonicityResult {
    std::size_t trials = 0;
    std::size_t passed = 0;
    std::optional<MonotonicityWitness> witness;
    bool pass() const { return passed == trials; }
};

/// Seeded (u, node, neighbor, delta) trials on random grid functions. The neighbor is a
/// stencil foot of the node. Raising a neighbor must not raise F at the node; raising the
/// node itself must raise it (weakly when f may decrease in u at interior nodes).
MonotonicityResult monotonicity_trials(const PDEProblem& problem, std::size_t trials, std::uint64_t seed);

struct ConsistencyRow {
    std::string phi;
    int level = 0;
    int stencil_width = 1;
    double gap = 0.0;
};

struct ConsistencyResult {
    std::vector<ConsistencyRow> rows;
    /// Largest gap for phi = |x|^2 / 2 (or x^2 / 2 in 1-D).
    double identity_gap = 0.0;
    /// Anisotropic gap by width 1, 2, 3 (2-D only).
    std::vector<double> anisotropic_gap_by_width;
    bool pass = true;
};

/// Compares scheme values on sampled quadratics against -det+(D^2 phi) + f at fixed nodes.
ConsistencyResult consistency_study(const PDEProblem& problem, const std::vector<int>& levels,
                                    std::uint64_t seed);

/// Largest |min over width pairs of directional curvature products - det A| for the
/// 30-degree anisotropic Hessian with eigenvalues 1 and 4 (closed-form oracle).
double anisotropic_pair_gap(int stencil_width);

struct StabilityRow {
    int level = 0;
    double sup_norm = 0.0;
    bool converged = false;
};

struct StabilityResult {
    std::vector<StabilityRow> rows;
    double bound = 0.0;
    double max_sup_norm = 0.0;
    bool pass = true;
};

/// Bound is 2 * (coarsest sup-norm) + 1.
StabilityResult stability_from_rows(std::vector<StabilityRow> rows);

struct SchemeReport {
    std::string problem;
    std::uint64_t seed = 0;
    MonotonicityResult monotonicity;
    ConsistencyResult consistency;
    StabilityResult stability;
    bool pass() const { return monotonicity.pass() && consistency.pass && stability.pass; }
};

SchemeReport run_verify(const PDEProblem& problem, const std::vector<int>& levels, int stencil_width,
                        const SolverSettings& settings, std::uint64_t seed);

// ---- JSON ----

nlohmann::json to_json(const SolveReport& report);
nlohmann::json to_json(const ConvergenceTable& table);
nlohmann::json to_json(const SchemeReport& report);
nlohmann::json to_json(const FlatBoundaryReport& report);
nlohmann::json to_json(const GradientBlowupReport& report);
nlohmann::json to_json(const QuadraticTestFn& phi);

// ---- commands ----

/// Each command writes its outputs, prints diagnostics to `err`, and returns an exit code.
int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_converge(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_counterexample(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command line (args[0] is the program name). Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace masolve
