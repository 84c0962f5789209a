#include "masolve/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace masolve {

double default_tolerance(int dim) { return dim == 1 ? 1e-8 : 1e-6; }

void SolveParams::validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (dt && !(*dt > 0.0)) throw std::invalid_argument("dt must be positive or auto");
}

double estimate_dt(const Scheme& scheme, const ResidualStats& stats) {
    const Grid& grid = scheme.grid();
    const double h = grid.h();
    // Products of second differences only occur in 2-D.
    const double positive_factor = grid.dim() == 2 ? stats.max_positive_delta : 0.0;
    double k = 2.0 * scheme.direction_weight() * (1.0 + positive_factor);
    const auto& problem = scheme.problem();
    if (problem.depends_on_p && problem.df_dp_bound) {
        k += 2.0 * h * problem.df_dp_bound(stats.max_gradient);
    }
    k = std::max(k, 4.0);
    return std::min(h * h / k, 1.0);
}

double estimate_dt(const Scheme& scheme, std::span<const double> u) {
    std::vector<double> r(u.size());
    return estimate_dt(scheme, residual_serial(scheme, u, r));
}

double residual_noise_floor(const Scheme& scheme, const ResidualStats& stats, double u_sup) {
    const double h = scheme.grid().h();
    const double p = stats.max_positive_delta;
    const double magnitude = u_sup * 2.0 * scheme.direction_weight() / (h * h) * (1.0 + p) + p * p +
                             stats.max_abs_f;
    return 64.0 * std::numeric_limits<double>::epsilon() * magnitude;
}

GridFunction initial_iterate(const PDEProblem& problem, std::shared_ptr<const Grid> grid) {
    double gmin = std::numeric_limits<double>::infinity();
    for (NodeIndex k = 0; k < grid->size(); ++k) {
        if (grid->is_boundary(k)) gmin = std::min(gmin, problem.g(grid->point(k)));
    }
    return GridFunction(std::move(grid), gmin);
}

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

std::pair<GridFunction, SolveReport> euler_solve(const PDEProblem& problem, const GridFunction& u0,
                                                 const SolveParams& params) {
    params.validate();
    if (!u0.all_finite()) throw std::invalid_argument("initial iterate is not finite");

    const auto start = std::chrono::steady_clock::now();
    const Scheme scheme(problem, u0.grid_ptr(), params.stencil_width);
    const std::size_t n = u0.size();

    // Boundary rows are u - g, so a unit step solves them exactly. They are imposed
    // before the monotone iteration and never change afterwards.
    GridFunction u = u0;
    for (NodeIndex k = 0; k < n; ++k) {
        if (scheme.grid().is_boundary(k)) u[k] = problem.g(scheme.grid().point(k));
    }
    std::vector<double> r(n);
    std::vector<double> trial(n);
    std::vector<double> r_trial(n);
    ResidualStats stats = compute_residual(scheme, u.values(), r, params.execution);
    if (!all_finite(r)) throw SolverDiverged("residual of the initial iterate is not finite");

    SolveReport report;
    if (params.record_history) report.residual_history.push_back(stats.sup_norm);

    constexpr double min_backoff = 0x1p-40;
    double backoff = 1.0;
    while (stats.sup_norm > params.tol && report.iterations < params.max_iters) {
        const double dt = (params.dt ? *params.dt : estimate_dt(scheme, stats)) * backoff;
        if (params.accelerate) {
            std::copy(u.values().begin(), u.values().end(), trial.begin());
            gauss_seidel_sweep(scheme, trial, dt);
        } else {
            euler_update(u.values(), r, dt, trial, params.execution);
        }
        const ResidualStats trial_stats = compute_residual(scheme, trial, r_trial, params.execution);
        if (!all_finite(trial) || !all_finite(r_trial)) {
            std::ostringstream msg;
            msg << "non-finite iterate in '" << problem.name << "' after " << report.iterations
                << " iterations (dt = " << dt << ")";
            throw SolverDiverged(msg.str());
        }
        const double floor = residual_noise_floor(scheme, trial_stats, max_abs(trial));
        if (trial_stats.sup_norm > stats.sup_norm + floor) {
            ++report.rejected_steps;
            backoff *= 0.5;
            if (backoff < min_backoff) {
                report.diagnostic = "step size underflow: residual cannot be decreased";
                break;
            }
            continue;
        }
        std::copy(trial.begin(), trial.end(), u.values().begin());
        std::swap(r, r_trial);
        stats = trial_stats;
        report.last_dt = dt;
        report.noise_floor = std::max(report.noise_floor, floor);
        backoff = std::min(1.0, 2.0 * backoff);
        ++report.iterations;
        if (params.record_history) report.residual_history.push_back(stats.sup_norm);
    }

    report.final_residual = stats.sup_norm;
    report.converged = stats.sup_norm <= params.tol;
    if (!report.converged && report.diagnostic.empty()) {
        report.diagnostic = "max_iters reached";
    }
    report.sup_norm = u.sup_norm();
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return {std::move(u), std::move(report)};
}

bool discrete_comparison_check(const PDEProblem& problem, const GridFunction& u, const GridFunction& v,
                               int stencil_width) {
    if (u.size() != v.size()) throw std::invalid_argument("grid functions live on different grids");
    const SchemeParams sp{stencil_width};
    const GridFunction fu = scheme_residual(problem, u, sp);
    const GridFunction fv = scheme_residual(problem, v, sp);
    for (NodeIndex k = 0; k < u.size(); ++k) {
        if (fu[k] > 0.0) {
            throw PreconditionViolated("F[u] > 0 at node " + std::to_string(k));
        }
        if (fv[k] < 0.0) {
            throw PreconditionViolated("F[v] < 0 at node " + std::to_string(k));
        }
    }
    for (NodeIndex k = 0; k < u.size(); ++k) {
        if (u[k] > v[k]) return false;
    }
    return true;
}

namespace {

/// Random convex quadratic 0.5 (x - c)^T A (x - c) with eigenvalues in [0.5, 2].
ScalarFn random_convex_quadratic(const Domain& domain, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> eig(0.5, 2.0);
    std::uniform_real_distribution<double> angle(0.0, 3.141592653589793);
    std::uniform_real_distribution<double> cx(domain.lower(0), domain.upper(0));
    std::uniform_real_distribution<double> cy(domain.lower(1), domain.upper(1));
    const double l1 = eig(rng);
    const double l2 = eig(rng);
    const double t = angle(rng);
    const double c = std::cos(t);
    const double s = std::sin(t);
    const SymmetricMatrix2 A{l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
    const Point center{cx(rng), domain.dim() == 2 ? cy(rng) : 0.0};
    const bool one_d = domain.dim() == 1;
    return [A, center, one_d](const Point& x) {
        const Point d{x[0] - center[0], one_d ? 0.0 : x[1] - center[1]};
        return 0.5 * (one_d ? A.a11 * d[0] * d[0] : A.quadratic_form(d));
    };
}

} // namespace

ComparisonTrial make_comparison_trial(const PDEProblem& problem, const GridFunction& solution,
                                      std::uint64_t seed, int stencil_width) {
    if (problem.depends_on_p) {
        throw std::invalid_argument("comparison trials require f independent of the gradient");
    }
    const auto& grid_ptr = solution.grid_ptr();
    const Grid& grid = *grid_ptr;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> eps_dist(0.05, 0.5);
    std::uniform_real_distribution<double> shift_dist(0.0, 0.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const ScalarFn psi_sub = random_convex_quadratic(problem.domain, rng);
    const ScalarFn psi_super = random_convex_quadratic(problem.domain, rng);
    const double eps_sub = eps_dist(rng);
    const double eps_super = eps_dist(rng);
    const double c_sub = shift_dist(rng);
    const double c_super = shift_dist(rng);

    double psi_sub_max = -std::numeric_limits<double>::infinity();
    double psi_super_max = -std::numeric_limits<double>::infinity();
    double bc_excess = 0.0;
    double bc_deficit = 0.0;
    for (NodeIndex k = 0; k < grid.size(); ++k) {
        if (!grid.is_boundary(k)) continue;
        const Point x = grid.point(k);
        psi_sub_max = std::max(psi_sub_max, psi_sub(x));
        psi_super_max = std::max(psi_super_max, psi_super(x));
        const double gap = solution[k] - problem.g(x);
        bc_excess = std::max(bc_excess, gap);
        bc_deficit = std::max(bc_deficit, -gap);
    }

    // Scattered nodes pushed further toward -inf (sub) or +inf (super).
    std::vector<double> push_sub(grid.size(), 0.0);
    std::vector<double> push_super(grid.size(), 0.0);
    for (NodeIndex k = 0; k < grid.size(); ++k) {
        if (unit(rng) < 0.15) push_sub[k] = unit(rng);
        if (unit(rng) < 0.15) push_super[k] = unit(rng);
    }

    const double h2 = grid.h() * grid.h();
    double amplitude = h2;
    const SchemeParams sp{stencil_width};
    for (int attempt = 0; attempt < 60; ++attempt) {
        GridFunction sub(grid_ptr);
        GridFunction super(grid_ptr);
        for (NodeIndex k = 0; k < grid.size(); ++k) {
            const Point x = grid.point(k);
            sub[k] = solution[k] + eps_sub * (psi_sub(x) - psi_sub_max) - c_sub - bc_excess -
                     amplitude * push_sub[k];
            super[k] = solution[k] - eps_super * (psi_super(x) - psi_super_max) + c_super + bc_deficit +
                       amplitude * push_super[k];
        }
        const GridFunction fs = scheme_residual(problem, sub, sp);
        const GridFunction fp = scheme_residual(problem, super, sp);
        bool ok = true;
        for (NodeIndex k = 0; k < grid.size() && ok; ++k) ok = fs[k] <= 0.0 && fp[k] >= 0.0;
        if (ok) return {std::move(sub), std::move(super)};
        amplitude = attempt < 50 ? amplitude * 0.5 : 0.0;
    }
    throw std::runtime_error("could not build a comparison trial for '" + problem.name + "'");
}

} // namespace masolve
