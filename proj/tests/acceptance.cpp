#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "masolve/harness.hpp"
#include "masolve/problems.hpp"

using namespace masolve;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CachedSolve {
    SolveOutcome outcome;
    double seconds = 0.0;
};

/// Solves keyed by (problem, level, width), reused across criteria.
class SolveCache {
public:
    const CachedSolve& get(const std::string& key, int n, int width) {
        const auto id = std::make_tuple(key, n, width);
        auto it = cache_.find(id);
        if (it != cache_.end()) return it->second;
        const auto t0 = Clock::now();
        CachedSolve s{solve_problem(make_problem(key), n, width, {}), 0.0};
        s.seconds = seconds_since(t0);
        return cache_.emplace(id, std::move(s)).first->second;
    }

private:
    std::map<std::tuple<std::string, int, int>, CachedSolve> cache_;
};

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) { return format_number(v); }

constexpr int kFirstLevel = 3;
constexpr int kLastLevel = 6;
constexpr int kConvergenceWidth = 3;

int width_for(const std::string& key) { return (key == "exp2d" || key == "cone2d") ? kConvergenceWidth : 1; }

void quadratic_exactness(SolveCache& cache) {
    bool pass = true;
    std::ostringstream d;
    for (const auto& [key, n] : std::vector<std::pair<std::string, int>>{{"quad2d", 8}, {"quad2d", 16}, {"ma1d", 8}}) {
        const PDEProblem p = make_problem(key);
        const CachedSolve& s = cache.get(key, n, 1);
        const double err = max_nodal_error(p, s.outcome.u);
        const double tol = default_tolerance(p.dim());
        const bool ok = s.outcome.report.converged && err <= 10.0 * tol && s.seconds < 5.0;
        pass = pass && ok;
        d << key << " n=" << n << " err=" << fmt(err) << " t=" << fmt(s.seconds) << "s; ";
    }
    report(1, pass, d.str());
}

void convergence(SolveCache& cache) {
    bool pass = true;
    double total = 0.0;
    std::ostringstream d;
    for (const std::string key : {"exp2d", "cone2d"}) {
        const PDEProblem p = make_problem(key);
        std::vector<double> err_inf, err_probe;
        for (int l = kFirstLevel; l <= kLastLevel; ++l) {
            const CachedSolve& s = cache.get(key, 1 << l, kConvergenceWidth);
            total += s.seconds;
            pass = pass && s.outcome.report.converged;
            err_inf.push_back(max_nodal_error(p, s.outcome.u));
            err_probe.push_back(probe_error(p, s.outcome.u));
        }
        bool decreasing = true;
        for (std::size_t i = 1; i < err_inf.size(); ++i) decreasing = decreasing && err_inf[i] < err_inf[i - 1];
        const bool probe_halved = err_probe.back() < 0.5 * err_probe.front();
        pass = pass && decreasing && probe_halved;
        d << key << " err_inf=[";
        for (std::size_t i = 0; i < err_inf.size(); ++i) d << (i ? "," : "") << fmt(err_inf[i]);
        d << "] err_probe " << fmt(err_probe.front()) << "->" << fmt(err_probe.back())
          << (decreasing ? "" : " (err_inf not strictly decreasing)") << (probe_halved ? "" : " (probe not halved)")
          << "; ";
    }
    pass = pass && total < 300.0;
    d << "width=" << kConvergenceWidth << " t=" << fmt(total) << "s";
    report(2, pass, d.str());
}

void monotonicity() {
    bool pass = true;
    std::ostringstream d;
    for (const auto& key : registry_keys()) {
        const auto t0 = Clock::now();
        const MonotonicityResult r = monotonicity_trials(make_problem(key), 1000, 7);
        const double t = seconds_since(t0);
        pass = pass && r.pass() && t < 30.0;
        d << key << " " << r.passed << "/" << r.trials << " t=" << fmt(t) << "s; ";
    }
    report(3, pass, d.str());
}

void stability(SolveCache& cache) {
    bool pass = true;
    std::ostringstream d;
    for (const auto& key : registry_keys()) {
        std::vector<StabilityRow> rows;
        for (int l = kFirstLevel; l <= kLastLevel; ++l) {
            const int n = 1 << l;
            const CachedSolve& s = cache.get(key, n, width_for(key));
            rows.push_back({l, s.outcome.report.sup_norm, s.outcome.report.converged});
        }
        const StabilityResult r = stability_from_rows(std::move(rows));
        pass = pass && r.pass;
        d << key << " max=" << fmt(r.max_sup_norm) << " bound=" << fmt(r.bound) << "; ";
    }
    report(4, pass, d.str());
}

/// Checks F[sub] <= 0 <= F[super] and sub <= super node by node.
bool brute_force_ordered(const PDEProblem& p, const ComparisonTrial& t) {
    const GridFunction rs = scheme_residual(p, t.sub);
    const GridFunction rv = scheme_residual(p, t.super);
    for (NodeIndex k = 0; k < t.sub.size(); ++k) {
        if (!(rs[k] <= 0.0 && rv[k] >= 0.0)) return false;
        if (!(t.sub[k] <= t.super[k])) return false;
    }
    return true;
}

void comparison(SolveCache& cache) {
    std::size_t passed = 0, total = 0;
    std::ostringstream d;
    for (const std::string key : {"quad2d", "exp2d", "cone2d", "ma1d"}) {
        const PDEProblem p = make_problem(key);
        const CachedSolve& s = cache.get(key, 8, 1);
        std::size_t ok = 0;
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            const ComparisonTrial t = make_comparison_trial(p, s.outcome.u, 1000 + seed);
            bool check = false;
            try {
                check = discrete_comparison_check(p, t.sub, t.super);
            } catch (const PreconditionViolated&) {
                check = false;
            }
            if (check && brute_force_ordered(p, t)) ++ok;
        }
        passed += ok;
        total += 25;
        d << key << " " << ok << "/25; ";
    }
    report(5, passed == total && total == 100, d.str());
}

struct CounterexampleResults {
    FlatBoundaryReport ex1;
    GradientBlowupReport ex2;
};

void flat_boundary(CounterexampleResults& out) {
    const auto t0 = Clock::now();
    out.ex1 = counterexample_ex1();
    const double t = seconds_since(t0);
    const FlatBoundaryReport& r = out.ex1;
    const bool pass = r.subsolution_pass && r.supersolution_pass && r.edge_points >= 8 &&
                      r.max_boundary_gap == 1.0 && t < 60.0;
    std::ostringstream d;
    d << "sub=" << r.subsolution_pass << " super=" << r.supersolution_pass << " edge_points=" << r.edge_points
      << " gap=" << fmt(r.max_boundary_gap) << " t=" << fmt(t) << "s";
    report(6, pass, d.str());
}

void gradient_blowup(CounterexampleResults& out) {
    const auto t0 = Clock::now();
    out.ex2 = counterexample_ex2();
    const double t = seconds_since(t0);
    const GradientBlowupReport& r = out.ex2;
    const SubgradientResult& sg = r.subgradient_at_1;
    const bool empty = sg.status == SubgradientResult::Status::empty && sg.max_violation_at_best_p > 10.0 * sg.tol_sg;
    const bool pass = empty && r.gap_at_1 == 1.0 && r.interior_error_decreasing;
    std::ostringstream d;
    d << "subgradient " << (sg.status == SubgradientResult::Status::empty ? "empty" : "found")
      << " violation=" << fmt(sg.max_violation_at_best_p) << " tol_sg=" << fmt(sg.tol_sg) << " gap=" << fmt(r.gap_at_1)
      << " error@0.5=[";
    for (std::size_t i = 0; i < r.interior_errors.size(); ++i) d << (i ? "," : "") << fmt(r.interior_errors[i].error_at_half);
    d << "] t=" << fmt(t) << "s";
    report(7, pass, d.str());
}

void convexity(SolveCache& cache) {
    bool pass = true;
    std::ostringstream d;
    for (const std::string key : {"quad2d", "exp2d", "cone2d"}) {
        const CachedSolve& s = cache.get(key, 1 << kLastLevel, width_for(key));
        const double m = min_width1_second_difference(s.outcome.u);
        const bool ok = s.outcome.report.converged && m >= -10.0 * default_tolerance(2);
        pass = pass && ok;
        d << key << " min_delta2=" << fmt(m) << "; ";
    }
    report(8, pass, d.str());
}

void boundary(SolveCache& cache, const CounterexampleResults& cx) {
    bool pass = true;
    std::size_t checked = 0;
    for (const auto& key : registry_keys()) {
        const PDEProblem p = make_problem(key);
        for (int l = kFirstLevel; l <= kLastLevel; ++l) {
            const int n = 1 << l;
            const CachedSolve& s = cache.get(key, n, width_for(key));
            pass = pass && s.outcome.report.converged && boundary_matches_data(p, s.outcome.u);
            ++checked;
        }
    }
    const bool below = cx.ex1.subsolution_below_data && cx.ex2.subsolution_below_data;
    std::ostringstream d;
    d << "u==g on " << checked << " solutions: " << (pass ? "yes" : "no")
      << "; counterexample subsolutions <= g+1e-10: " << (below ? "yes" : "no");
    report(9, pass && below, d.str());
}

} // namespace

/// Prints one PASS/FAIL line per acceptance criterion. Exits 1 if any criterion fails,
/// unless --report-only is given.
int main(int argc, char** argv) {
    const bool report_only = argc > 1 && std::strcmp(argv[1], "--report-only") == 0;
    SolveCache cache;
    CounterexampleResults cx;
    quadratic_exactness(cache);
    convergence(cache);
    monotonicity();
    stability(cache);
    comparison(cache);
    flat_boundary(cx);
    gradient_blowup(cx);
    convexity(cache);
    boundary(cache, cx);
    std::printf("summary: %d/9 criteria pass\n", 9 - failures);
    return (failures == 0 || report_only) ? 0 : 1;
}
