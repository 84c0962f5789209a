#include "masolve/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "masolve/problems.hpp"

namespace masolve {

using nlohmann::json;

SolveParams SolverSettings::to_params(int dim, int stencil_width) const {
    SolveParams p;
    p.dt = dt;
    p.tol = tol.value_or(default_tolerance(dim));
    p.max_iters = max_iters.value_or(1'000'000);
    p.stencil_width = stencil_width;
    return p;
}

std::string unknown_problem_message(const std::string& key) {
    std::string msg = "unknown problem '" + key + "'; registered problems:";
    for (const auto& k : registry_keys()) msg += " " + k;
    return msg;
}

void RunConfig::validate_problem() const {
    if (problem.empty()) throw UsageError("no problem given (use --problem KEY)");
    if (!has_problem(problem)) throw UsageError(unknown_problem_message(problem));
    if (stencil_width < 1 || stencil_width > 3) throw UsageError("stencil width must be 1, 2 or 3");
    if (n_per_axis && *n_per_axis < 2) throw UsageError("--n must be at least 2");
}

void RunConfig::validate_levels() const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 1 || levels[i] > 20) throw UsageError("levels must lie in 1..20");
        if (i > 0 && levels[i] <= levels[i - 1]) throw UsageError("levels must be strictly increasing");
    }
}

std::vector<int> parse_level_range(const std::string& text) {
    auto to_int = [&](std::string_view s) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw UsageError("invalid level range '" + text + "' (expected a..b)");
        }
        return v;
    };
    const auto dots = text.find("..");
    std::vector<int> levels;
    if (dots == std::string::npos) {
        levels.push_back(to_int(text));
        return levels;
    }
    const int a = to_int(std::string_view(text).substr(0, dots));
    const int b = to_int(std::string_view(text).substr(dots + 2));
    if (b < a) throw UsageError("empty level range '" + text + "'");
    for (int l = a; l <= b; ++l) levels.push_back(l);
    return levels;
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw UsageError("unknown config key '" + where + key + "'");
        }
    }
}

template <typename T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
    }
}

} // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw UsageError("config must be a JSON object");
    reject_unknown_keys(doc, {"problem", "levels", "stencil_width", "solver", "seed", "out"}, "");

    RunConfig cfg;
    if (doc.contains("problem")) cfg.problem = get_as<std::string>(doc["problem"], "problem");
    if (doc.contains("levels")) {
        const auto& lv = doc["levels"];
        if (lv.is_string()) {
            cfg.levels = parse_level_range(lv.get<std::string>());
        } else {
            cfg.levels = get_as<std::vector<int>>(lv, "levels");
        }
    }
    if (doc.contains("stencil_width")) cfg.stencil_width = get_as<int>(doc["stencil_width"], "stencil_width");
    if (doc.contains("seed")) cfg.seed = get_as<std::uint64_t>(doc["seed"], "seed");
    if (doc.contains("out")) cfg.out = get_as<std::string>(doc["out"], "out");
    if (doc.contains("solver")) {
        const auto& s = doc["solver"];
        if (!s.is_object()) throw UsageError("config key 'solver' must be an object");
        reject_unknown_keys(s, {"dt", "tol", "max_iters"}, "solver.");
        if (s.contains("dt") && !s["dt"].is_null() && !(s["dt"].is_string() && s["dt"] == "auto")) {
            const double dt = get_as<double>(s["dt"], "solver.dt");
            if (!(dt > 0.0)) throw UsageError("solver.dt must be positive or \"auto\"");
            cfg.solver.dt = dt;
        }
        if (s.contains("tol")) {
            const double tol = get_as<double>(s["tol"], "solver.tol");
            if (!(tol > 0.0)) throw UsageError("solver.tol must be positive");
            cfg.solver.tol = tol;
        }
        if (s.contains("max_iters")) {
            const long m = get_as<long>(s["max_iters"], "solver.max_iters");
            if (m < 1) throw UsageError("solver.max_iters must be >= 1");
            cfg.solver.max_iters = m;
        }
    }
    cfg.validate_levels();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

SolveOutcome solve_problem(const PDEProblem& problem, int n_per_axis, int stencil_width,
                           const SolverSettings& settings) {
    auto grid = std::make_shared<const Grid>(build_grid(problem.domain, n_per_axis));
    auto [u, report] = euler_solve(problem, initial_iterate(problem, grid),
                                   settings.to_params(problem.dim(), stencil_width));
    return {std::move(u), std::move(report)};
}

double max_nodal_error(const PDEProblem& problem, const GridFunction& u) {
    if (!problem.has_exact()) throw std::invalid_argument("problem has no exact solution");
    double err = 0.0;
    for (NodeIndex k = 0; k < u.size(); ++k) {
        err = std::max(err, std::abs(u[k] - problem.exact_solution(u.grid().point(k))));
    }
    return err;
}

double probe_error(const PDEProblem& problem, const GridFunction& u) {
    if (!problem.has_exact()) throw std::invalid_argument("problem has no exact solution");
    const Point x = probe_point(problem);
    const NodeIndex k = u.grid().nearest(x);
    return std::abs(u[k] - problem.exact_solution(u.grid().point(k)));
}

bool boundary_matches_data(const PDEProblem& problem, const GridFunction& u) {
    const Grid& grid = u.grid();
    for (NodeIndex k = 0; k < u.size(); ++k) {
        if (grid.is_boundary(k) && u[k] != problem.g(grid.point(k))) return false;
    }
    return true;
}

double min_width1_second_difference(const GridFunction& u) {
    const Grid& grid = u.grid();
    const auto pairs = grid.dim() == 2 ? stencil_pairs(1) : stencil_pairs_1d();
    double lowest = std::numeric_limits<double>::infinity();
    for (NodeIndex k = 0; k < u.size(); ++k) {
        if (grid.is_boundary(k)) continue;
        for (const auto& pr : pairs) {
            for (const Offset& d : {pr.v, pr.w}) {
                if (d == Offset{0, 0}) continue;
                if (neighbors_in_domain(grid, k, d) != StencilFit::both_in) continue;
                lowest = std::min(lowest, delta2(u, k, d));
            }
        }
    }
    return lowest;
}

ConvergenceRow convergence_row(const PDEProblem& problem, int level, const SolveOutcome& outcome) {
    ConvergenceRow row;
    row.level = level;
    row.h = outcome.u.grid().h();
    row.n_nodes = outcome.u.size();
    row.err_inf = max_nodal_error(problem, outcome.u);
    row.err_probe = probe_error(problem, outcome.u);
    row.iterations = outcome.report.iterations;
    row.runtime_ms = outcome.report.wall_time_ms;
    row.converged = outcome.report.converged;
    return row;
}

ConvergenceTable run_convergence(const PDEProblem& problem, const std::vector<int>& levels, int stencil_width,
                                 const SolverSettings& settings) {
    if (!problem.has_exact()) {
        throw UsageError("problem '" + problem.name + "' has no exact solution; convergence tables need one");
    }
    ConvergenceTable table;
    table.problem = problem.name;
    table.stencil_width = stencil_width;
    table.probe = probe_point(problem);
    for (int level : levels) {
        const SolveOutcome outcome = solve_problem(problem, 1 << level, stencil_width, settings);
        table.rows.push_back(convergence_row(problem, level, outcome));
    }
    return table;
}

std::string convergence_csv(const ConvergenceTable& table) {
    std::string s = kConvergenceHeader;
    s += '\n';
    for (const auto& r : table.rows) {
        s += std::to_string(r.level) + ',' + format_number(r.h) + ',' + std::to_string(r.n_nodes) + ',' +
             format_number(r.err_inf) + ',' + format_number(r.err_probe) + ',' + std::to_string(r.iterations) +
             ',' + format_number(r.runtime_ms) + '\n';
    }
    return s;
}

std::string solution_csv(const GridFunction& u) {
    const Grid& grid = u.grid();
    std::string s = grid.dim() == 2 ? "node,x,y,value\n" : "node,x,value\n";
    for (NodeIndex k = 0; k < u.size(); ++k) {
        const Point x = grid.point(k);
        s += std::to_string(k) + ',' + format_number(x[0]) + ',';
        if (grid.dim() == 2) s += format_number(x[1]) + ',';
        s += format_number(u[k]) + '\n';
    }
    return s;
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

} // namespace

MonotonicityResult monotonicity_trials(const PDEProblem& problem, std::size_t trials, std::uint64_t seed) {
    const int dim = problem.dim();
    std::map<std::pair<int, int>, std::unique_ptr<Scheme>> schemes;
    auto scheme_for = [&](int n, int width) -> const Scheme& {
        auto& slot = schemes[{n, width}];
        if (!slot) {
            slot = std::make_unique<Scheme>(problem, std::make_shared<const Grid>(build_grid(problem.domain, n)),
                                            width);
        }
        return *slot;
    };

    std::mt19937_64 rng(seed);
    MonotonicityResult result;
    result.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        const int n = dim == 2 ? (uniform01(rng) < 0.5 ? 8 : 16) : (uniform01(rng) < 0.5 ? 16 : 32);
        const int width = dim == 2 ? 1 + static_cast<int>(pick(rng, 3)) : 1;
        const Scheme& scheme = scheme_for(n, width);
        const Grid& grid = scheme.grid();

        // Random grid function: scaled bowl plus noise of random amplitude.
        const double a = 4.0 * uniform01(rng) - 1.0;
        const Point c{uniform01(rng), uniform01(rng)};
        const double noise = std::array{0.0, 0.01, 0.5}[pick(rng, 3)];
        std::vector<double> u(grid.size());
        for (NodeIndex k = 0; k < grid.size(); ++k) {
            const Point x = grid.point(k);
            const double r2 = (x[0] - c[0]) * (x[0] - c[0]) + (dim == 2 ? (x[1] - c[1]) * (x[1] - c[1]) : 0.0);
            u[k] = 0.5 * a * r2 + noise * (2.0 * uniform01(rng) - 1.0);
        }

        const bool at_boundary = uniform01(rng) < 0.2;
        NodeIndex node = 0;
        do {
            node = pick(rng, grid.size());
        } while (grid.is_boundary(node) != at_boundary);

        NodeIndex neighbor = 0;
        if (at_boundary) {
            do {
                neighbor = pick(rng, grid.size());
            } while (neighbor == node);
        } else {
            std::vector<NodeIndex> feet;
            const Offset ij = grid.lattice(node);
            for (const auto& pr : scheme.pairs()) {
                for (const Offset& d : {pr.v, pr.w}) {
                    if (d == Offset{0, 0} || neighbors_in_domain(grid, node, d) != StencilFit::both_in) continue;
                    feet.push_back(grid.index({ij[0] + d[0], ij[1] + d[1]}));
                    feet.push_back(grid.index({ij[0] - d[0], ij[1] - d[1]}));
                }
            }
            neighbor = feet[pick(rng, feet.size())];
        }
        const double delta = std::pow(10.0, -6.0 + 6.0 * uniform01(rng));

        const double base = scheme.node_residual(u, node);
        std::vector<double> raised = u;
        raised[neighbor] += delta;
        const double after_neighbor = scheme.node_residual(raised, node);
        raised = u;
        raised[node] += delta;
        const double after_self = scheme.node_residual(raised, node);

        const bool neighbor_ok = after_neighbor <= base;
        const bool strict = at_boundary || problem.nondecreasing_in_u;
        const bool self_ok = strict ? after_self > base : after_self >= base;
        if (neighbor_ok && self_ok) {
            ++result.passed;
        } else if (!result.witness) {
            result.witness = MonotonicityWitness{n,
                                                 width,
                                                 node,
                                                 neighbor,
                                                 delta,
                                                 neighbor_ok ? "self" : "neighbor",
                                                 base,
                                                 neighbor_ok ? after_self : after_neighbor};
        }
    }
    return result;
}

namespace {

struct QuadraticFamilyMember {
    std::string name;
    SymmetricMatrix2 A;
    Point center;
};

SymmetricMatrix2 rotated(double l1, double l2, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
}

const SymmetricMatrix2 kAnisotropic = rotated(1.0, 4.0, std::numbers::pi / 6.0);

} // namespace

double anisotropic_pair_gap(int stencil_width) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& pr : stencil_pairs(stencil_width)) {
        const auto curv = [](const Offset& d, int norm2) {
            return kAnisotropic.quadratic_form({static_cast<double>(d[0]), static_cast<double>(d[1])}) / norm2;
        };
        best = std::min(best, stencil_pair_value(curv(pr.v, pr.v_norm2), curv(pr.w, pr.w_norm2)));
    }
    return std::abs(best - 4.0);
}

ConsistencyResult consistency_study(const PDEProblem& problem, const std::vector<int>& levels,
                                    std::uint64_t seed) {
    const int dim = problem.dim();
    std::vector<QuadraticFamilyMember> family;
    if (dim == 2) {
        family.push_back({"identity", SymmetricMatrix2::diag(1.0, 1.0), {0.0, 0.0}});
        family.push_back({"anisotropic_1_4_30deg", kAnisotropic, {0.5, 0.5}});
    } else {
        family.push_back({"identity", SymmetricMatrix2::scalar(1.0), {0.0, 0.0}});
    }
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 3; ++i) {
        const double l1 = 0.5 + 3.5 * uniform01(rng);
        const double l2 = 0.5 + 3.5 * uniform01(rng);
        const double angle = std::numbers::pi * uniform01(rng);
        const Point center{uniform01(rng), uniform01(rng)};
        family.push_back({"seeded_" + std::to_string(i),
                          dim == 2 ? rotated(l1, l2, angle) : SymmetricMatrix2::scalar(l1),
                          {center[0], dim == 2 ? center[1] : 0.0}});
    }

    const std::vector<Point> anchors = dim == 2 ? std::vector<Point>{{0.5, 0.5}, {0.375, 0.625}, {0.625, 0.375}}
                                                : std::vector<Point>{{0.5, 0.0}, {0.375, 0.0}, {0.625, 0.0}};
    const std::vector<int> widths = dim == 2 ? std::vector<int>{1, 2, 3} : std::vector<int>{1};

    ConsistencyResult result;
    if (dim == 2) result.anisotropic_gap_by_width.assign(3, 0.0);
    for (const auto& member : family) {
        const auto phi = [&](const Point& x) {
            const Point d{x[0] - member.center[0], dim == 2 ? x[1] - member.center[1] : 0.0};
            return 0.5 * member.A.quadratic_form(d);
        };
        const auto grad = [&](const Point& x) {
            const Point d{x[0] - member.center[0], dim == 2 ? x[1] - member.center[1] : 0.0};
            return Point{member.A.a11 * d[0] + member.A.a12 * d[1], member.A.a12 * d[0] + member.A.a22 * d[1]};
        };
        const double target_det = dim == 2 ? det_plus(member.A) : det_plus(member.A.a11);
        for (int level : levels) {
            auto grid = std::make_shared<const Grid>(build_grid(problem.domain, 1 << level));
            const GridFunction sampled = GridFunction::sample(grid, phi);
            std::vector<double> by_width;
            for (int w : widths) {
                const Scheme scheme(problem, grid, w);
                double gap = 0.0;
                for (const Point& a : anchors) {
                    const NodeIndex k = grid->nearest(a);
                    const Point x = grid->point(k);
                    const double continuum = -target_det + problem.f(x, phi(x), grad(x));
                    gap = std::max(gap, std::abs(scheme.node_residual(sampled.values(), k) - continuum));
                }
                result.rows.push_back({member.name, level, w, gap});
                by_width.push_back(gap);
                if (member.name == "identity") result.identity_gap = std::max(result.identity_gap, gap);
            }
            if (member.name == "anisotropic_1_4_30deg") {
                for (std::size_t i = 0; i < by_width.size(); ++i) {
                    result.anisotropic_gap_by_width[i] = std::max(result.anisotropic_gap_by_width[i], by_width[i]);
                }
                constexpr double slack = 1e-9;
                const bool nonincreasing = by_width[1] <= by_width[0] + slack && by_width[2] <= by_width[1] + slack;
                if (!nonincreasing || !(by_width[2] < by_width[0])) result.pass = false;
            }
        }
    }
    // Exact on quadratics unless f reads the (upwinded) gradient.
    if (!problem.depends_on_p && result.identity_gap > 1e-9) result.pass = false;
    return result;
}

StabilityResult stability_from_rows(std::vector<StabilityRow> rows) {
    StabilityResult result;
    result.rows = std::move(rows);
    if (result.rows.empty()) return result;
    result.bound = 2.0 * result.rows.front().sup_norm + 1.0;
    for (const auto& r : result.rows) result.max_sup_norm = std::max(result.max_sup_norm, r.sup_norm);
    result.pass = result.max_sup_norm <= result.bound;
    return result;
}

SchemeReport run_verify(const PDEProblem& problem, const std::vector<int>& levels, int stencil_width,
                        const SolverSettings& settings, std::uint64_t seed) {
    SchemeReport report;
    report.problem = problem.name;
    report.seed = seed;
    report.monotonicity = monotonicity_trials(problem, 1000, seed);
    report.consistency = consistency_study(problem, levels, seed);
    std::vector<StabilityRow> rows;
    for (int level : levels) {
        const SolveOutcome outcome = solve_problem(problem, 1 << level, stencil_width, settings);
        rows.push_back({level, outcome.report.sup_norm, outcome.report.converged});
    }
    report.stability = stability_from_rows(std::move(rows));
    return report;
}

// ---- JSON ----

json to_json(const SolveReport& r) {
    return {{"iterations", r.iterations},
            {"rejected_steps", r.rejected_steps},
            {"final_residual", r.final_residual},
            {"sup_norm", r.sup_norm},
            {"wall_time_ms", r.wall_time_ms},
            {"last_dt", r.last_dt},
            {"noise_floor", r.noise_floor},
            {"converged", r.converged},
            {"diagnostic", r.diagnostic}};
}

json to_json(const ConvergenceTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        rows.push_back({{"level", r.level},
                        {"h", r.h},
                        {"n_nodes", r.n_nodes},
                        {"err_inf", r.err_inf},
                        {"err_probe", r.err_probe},
                        {"iterations", r.iterations},
                        {"runtime_ms", r.runtime_ms},
                        {"converged", r.converged}});
    }
    return {{"schema_version", kSchemaVersion},
            {"command", "converge"},
            {"problem", t.problem},
            {"stencil_width", t.stencil_width},
            {"probe_point", t.probe},
            {"rows", rows}};
}

json to_json(const QuadraticTestFn& phi) {
    return {{"x0", phi.x0},
            {"c0", phi.c0},
            {"p", phi.p},
            {"X", {{"a11", phi.X.a11}, {"a12", phi.X.a12}, {"a22", phi.X.a22}}},
            {"dim", phi.dim}};
}

json to_json(const SchemeReport& r) {
    json mono{{"trials", r.monotonicity.trials}, {"passed", r.monotonicity.passed}, {"pass", r.monotonicity.pass()}};
    if (const auto& w = r.monotonicity.witness) {
        mono["witness"] = {{"n_per_axis", w->n_per_axis}, {"stencil_width", w->stencil_width},
                           {"node", w->node},             {"neighbor", w->neighbor},
                           {"delta", w->delta},           {"check", w->check},
                           {"before", w->before},         {"after", w->after}};
    }
    json cons_rows = json::array();
    for (const auto& row : r.consistency.rows) {
        cons_rows.push_back(
            {{"phi", row.phi}, {"level", row.level}, {"stencil_width", row.stencil_width}, {"gap", row.gap}});
    }
    json cons{{"rows", cons_rows}, {"identity_gap", r.consistency.identity_gap}, {"pass", r.consistency.pass}};
    if (!r.consistency.anisotropic_gap_by_width.empty()) {
        cons["anisotropic_gap_by_width"] = r.consistency.anisotropic_gap_by_width;
    }
    json stab_rows = json::array();
    for (const auto& row : r.stability.rows) {
        stab_rows.push_back({{"level", row.level}, {"sup_norm", row.sup_norm}, {"converged", row.converged}});
    }
    return {{"schema_version", kSchemaVersion},
            {"command", "verify"},
            {"problem", r.problem},
            {"seed", r.seed},
            {"monotonicity", mono},
            {"consistency", cons},
            {"stability",
             {{"rows", stab_rows},
              {"bound", r.stability.bound},
              {"max_sup_norm", r.stability.max_sup_norm},
              {"pass", r.stability.pass}}},
            {"pass", r.pass()}};
}

namespace {

constexpr const char* kEvidenceNote =
    "pass verdicts mean no violating quadratic test function was found in the seeded family; "
    "they are evidence, not proof";

json verdict_json(const PointVerdict& pv) {
    const auto& v = pv.verdict;
    json j{{"x", pv.x},
           {"role", pv.role},
           {"kind", pv.kind},
           {"pass", v.pass},
           {"drawn", v.drawn},
           {"retained", v.retained},
           {"boundary_point", v.boundary_point},
           {"extreme_value", v.extreme_value ? json(*v.extreme_value) : json(nullptr)}};
    if (v.witness) {
        j["witness"] = to_json(*v.witness);
        j["witness_value"] = v.witness_value;
    }
    return j;
}

json subgradient_json(const SubgradientResult& s) {
    return {{"status", s.status == SubgradientResult::Status::found ? "found" : "empty"},
            {"p", s.p},
            {"max_violation_at_best_p", s.max_violation_at_best_p},
            {"tol_sg", s.tol_sg},
            {"lattice_points", s.lattice_points}};
}

} // namespace

json to_json(const FlatBoundaryReport& r) {
    json probes = json::array();
    for (const auto& p : r.probes) probes.push_back(verdict_json(p));
    json corners = json::array();
    for (const auto& p : r.corner_probes) corners.push_back(verdict_json(p));
    return {{"schema_version", kSchemaVersion},
            {"command", "counterexample"},
            {"case", "ex1"},
            {"evidence", kEvidenceNote},
            {"subsolution_pass", r.subsolution_pass},
            {"supersolution_pass", r.supersolution_pass},
            {"max_boundary_gap", r.max_boundary_gap},
            {"max_tangential_curvature", r.max_tangential_curvature},
            {"edge_points", r.edge_points},
            {"subsolution_below_data", r.subsolution_below_data},
            {"probes", probes},
            {"corner_probes_unasserted", corners},
            {"all_pass", r.all_pass}};
}

json to_json(const GradientBlowupReport& r) {
    json probes = json::array();
    for (const auto& p : r.probes) probes.push_back(verdict_json(p));
    json rows = json::array();
    for (const auto& row : r.interior_errors) {
        rows.push_back({{"level", row.level},
                        {"h", row.h},
                        {"error_at_half", row.error_at_half},
                        {"error_left_half", row.error_left_half},
                        {"iterations", row.iterations},
                        {"converged", row.converged}});
    }
    return {{"schema_version", kSchemaVersion},
            {"command", "counterexample"},
            {"case", "ex2"},
            {"evidence", kEvidenceNote},
            {"subsolution_pass", r.subsolution_pass},
            {"supersolution_pass", r.supersolution_pass},
            {"classical_residual", r.classical_residual},
            {"touching_at_1", r.touching_at_1},
            {"subgradient_at_1", subgradient_json(r.subgradient_at_1)},
            {"gap_at_1", r.gap_at_1},
            {"subsolution_below_data", r.subsolution_below_data},
            {"probes", probes},
            {"interior_errors", rows},
            {"interior_error_decreasing", r.interior_error_decreasing},
            {"all_pass", r.all_pass}};
}

// ---- commands ----

namespace {

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty() || path == "-") {
        fallback << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + path + "'");
    f << text;
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

PDEProblem problem_from(const RunConfig& config) {
    config.validate_problem();
    return make_problem(config.problem);
}

std::vector<int> levels_or(const RunConfig& config, std::vector<int> fallback) {
    config.validate_levels();
    return config.levels.empty() ? fallback : config.levels;
}

} // namespace

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const PDEProblem problem = problem_from(config);
    config.validate_levels();
    const int n = config.n_per_axis ? *config.n_per_axis : (config.levels.empty() ? 16 : 1 << config.levels.back());
    const SolveOutcome outcome = solve_problem(problem, n, config.stencil_width, config.solver);

    const std::string csv_path =
        config.csv.empty() ? problem.name + "_n" + std::to_string(n) + ".csv" : config.csv;
    write_text(csv_path, solution_csv(outcome.u), out);

    const SolveParams params = config.solver.to_params(problem.dim(), config.stencil_width);
    json report{{"schema_version", kSchemaVersion},
                {"command", "solve"},
                {"problem", problem.name},
                {"n_per_axis", n},
                {"h", outcome.u.grid().h()},
                {"n_nodes", outcome.u.size()},
                {"stencil_width", problem.dim() == 2 ? config.stencil_width : 1},
                {"solver",
                 {{"dt", params.dt ? json(*params.dt) : json("auto")},
                  {"tol", params.tol},
                  {"max_iters", params.max_iters}}},
                {"report", to_json(outcome.report)},
                {"boundary_matches_data", boundary_matches_data(problem, outcome.u)},
                {"solution_csv", csv_path}};
    if (problem.has_exact()) {
        report["err_inf"] = max_nodal_error(problem, outcome.u);
        report["err_probe"] = probe_error(problem, outcome.u);
    }
    write_text(config.out, dump(report), out);
    if (!outcome.report.converged) {
        err << "solve did not converge: " << outcome.report.diagnostic << " (residual "
            << outcome.report.final_residual << ")\n";
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_converge(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const PDEProblem problem = problem_from(config);
    std::vector<int> levels = levels_or(config, {3, 4, 5, 6});
    if (config.n_per_axis) {
        const int n = *config.n_per_axis;
        if ((n & (n - 1)) != 0) throw UsageError("converge needs --levels or a power-of-two --n");
        levels = {static_cast<int>(std::lround(std::log2(n)))};
    }
    if (!problem.has_exact()) {
        throw UsageError("problem '" + problem.name + "' has no exact solution; convergence tables need one");
    }
    const ConvergenceTable table = run_convergence(problem, levels, config.stencil_width, config.solver);
    write_text(config.csv, convergence_csv(table), out);
    if (!config.out.empty()) write_text(config.out, dump(to_json(table)), out);
    for (const auto& row : table.rows) {
        if (!row.converged) {
            err << "level " << row.level << " did not converge\n";
            return kExitFailure;
        }
    }
    return kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const PDEProblem problem = problem_from(config);
    const std::vector<int> levels = levels_or(config, {3, 4, 5, 6});
    const SchemeReport report = run_verify(problem, levels, config.stencil_width, config.solver, config.seed);
    write_text(config.out, dump(to_json(report)), out);
    if (!report.pass()) {
        err << "scheme verification failed for '" << problem.name << "'\n";
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_counterexample(const RunConfig& config, std::ostream& out, std::ostream& err) {
    CounterexampleOptions probing;
    probing.seed = config.seed;
    bool pass = false;
    if (config.counterexample_case == "ex1") {
        const FlatBoundaryReport r = counterexample_ex1(probing);
        write_text(config.out, dump(to_json(r)), out);
        pass = r.all_pass;
    } else if (config.counterexample_case == "ex2") {
        GradientBlowupOptions opts;
        opts.probing = probing;
        const std::vector<int> levels = levels_or(config, {4, 5, 6, 7});
        opts.first_level = levels.front();
        opts.last_level = levels.back();
        if (config.solver.max_iters) opts.max_iters = *config.solver.max_iters;
        const GradientBlowupReport r = counterexample_ex2(opts);
        write_text(config.out, dump(to_json(r)), out);
        pass = r.all_pass;
    } else {
        throw UsageError("counterexample case must be ex1 or ex2");
    }
    if (!pass) {
        err << "counterexample " << config.counterexample_case << ": an assertion failed (see report)\n";
        return kExitFailure;
    }
    return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monotone wide-stencil Monge-Ampere solver and viscosity-solution probes", "masolve"};
    std::string command;
    std::string case_positional;
    std::string case_option;
    std::string config_path;
    std::string problem;
    std::string levels_text;
    std::optional<int> n;
    std::optional<int> width;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::string csv_path;

    app.add_option("command", command, "solve | converge | verify | counterexample")
        ->required()
        ->check(CLI::IsMember({"solve", "converge", "verify", "counterexample"}));
    app.add_option("which", case_positional, "counterexample case: ex1 | ex2");
    app.add_option("--case", case_option, "counterexample case: ex1 | ex2");
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--problem", problem, "problem key");
    auto* n_opt = app.add_option("--n", n, "intervals per axis");
    auto* levels_opt = app.add_option("--levels", levels_text, "level range a..b (n = 2^level)");
    n_opt->excludes(levels_opt);
    app.add_option("--width", width, "stencil width")->check(CLI::Range(1, 3));
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out_path, "report path (default: stdout)");
    app.add_option("--csv", csv_path, "CSV path");

    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "masolve: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!problem.empty()) config.problem = problem;
        if (!levels_text.empty()) config.levels = parse_level_range(levels_text);
        if (n) {
            config.n_per_axis = *n;
            if (levels_text.empty()) config.levels.clear();
        }
        if (width) config.stencil_width = *width;
        if (seed) config.seed = *seed;
        if (!out_path.empty()) config.out = out_path;
        if (!csv_path.empty()) config.csv = csv_path;
        if (!case_positional.empty() && !case_option.empty() && case_positional != case_option) {
            throw UsageError("conflicting counterexample cases");
        }
        config.counterexample_case = case_option.empty() ? case_positional : case_option;
        if (command != "counterexample" && !config.counterexample_case.empty()) {
            throw UsageError("unexpected argument '" + config.counterexample_case + "'");
        }

        if (command == "solve") return cmd_solve(config, out, err);
        if (command == "converge") return cmd_converge(config, out, err);
        if (command == "verify") return cmd_verify(config, out, err);
        return cmd_counterexample(config, out, err);
    } catch (const UsageError& e) {
        err << "masolve: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "masolve: " << e.what() << "\n";
        return kExitFailure;
    }
}

} // namespace masolve
