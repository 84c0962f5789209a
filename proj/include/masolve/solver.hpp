#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "masolve/kernels.hpp"
#include "masolve/operators.hpp"

namespace masolve {

/// Default residual tolerance: 1e-8 in 1-D, 1e-6 in 2-D.
double default_tolerance(int dim);

struct SolveParams {
    /// Fixed pseudo-time step; empty means estimate from the iterate every step.
    std::optional<double> dt;
    double tol = 1e-6;
    long max_iters = 1'000'000;
    /// Gauss-Seidel sweeps instead of Jacobi updates. Sequential.
    bool accelerate = false;
    int stencil_width = 1;
    Execution execution = Execution::parallel;
    /// Keep the residual sup-norm of every accepted iterate.
    bool record_history = false;

    void validate() const;
};

struct SolveReport {
    long iterations = 0;
    long rejected_steps = 0;
    double final_residual = 0.0;
    /// Realized stability bound max |u^h|.
    double sup_norm = 0.0;
    double wall_time_ms = 0.0;
    double last_dt = 0.0;
    /// Largest rounding allowance used by the acceptance test (see residual_noise_floor).
    double noise_floor = 0.0;
    bool converged = false;
    std::string diagnostic;
    std::vector<double> residual_history;
};

/// Raised when an iterate becomes non-finite.
class SolverDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by discrete_comparison_check when F[u] <= 0 <= F[v] does not hold.
class PreconditionViolated : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Stable pseudo-time step h^2/K for the Euler map, capped at 1, where
/// K = 2 (S (1 + P) + h B) >= 4 with S the densest-pair direction weight,
/// P the largest positive second difference of the iterate and B a bound on |df/dp|.
double estimate_dt(const Scheme& scheme, const ResidualStats& stats);
double estimate_dt(const Scheme& scheme, std::span<const double> u);

/// Bound on the rounding error of one residual evaluation. A step is accepted when the
/// residual sup-norm does not grow by more than this amount.
double residual_noise_floor(const Scheme& scheme, const ResidualStats& stats, double u_sup);

/// Initial iterate: the constant min g over boundary nodes.
GridFunction initial_iterate(const PDEProblem& problem, std::shared_ptr<const Grid> grid);

/// Damped explicit iteration u <- u - dt F^h[u]. Boundary rows are imposed first
/// (a unit step on u - g). A step that increases the residual sup-norm beyond the
/// rounding floor is rejected and retried with half the step. Non-convergence is
/// reported, not thrown.
std::pair<GridFunction, SolveReport> euler_solve(const PDEProblem& problem, const GridFunction& u0,
                                                 const SolveParams& params);

/// True iff u <= v at every node. Requires F[u] <= 0 <= F[v] componentwise.
bool discrete_comparison_check(const PDEProblem& problem, const GridFunction& u, const GridFunction& v,
                               int stencil_width = 1);

struct ComparisonTrial {
    GridFunction sub;
    GridFunction super;
};

/// Seeded sub/supersolution pair around a discrete solution, for problems whose f
/// does not depend on the gradient. Perturbations are shrunk until the residual
/// sign conditions hold exactly.
ComparisonTrial make_comparison_trial(const PDEProblem& problem, const GridFunction& solution,
                                      std::uint64_t seed, int stencil_width = 1);

} // namespace masolve
