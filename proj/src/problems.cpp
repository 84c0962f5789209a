#include "masolve/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace masolve {

namespace {

double norm2(const Point& x) { return x[0] * x[0] + x[1] * x[1]; }

PDEProblem quad2d() {
    PDEProblem p;
    p.name = "quad2d";
    p.domain = Domain::unit_square();
    p.f = [](const Point&, double, const Point&) { return 1.0; };
    p.exact_solution = [](const Point& x) { return 0.5 * norm2(x); };
    p.g = p.exact_solution;
    return p;
}

PDEProblem exp2d() {
    PDEProblem p;
    p.name = "exp2d";
    p.domain = Domain::unit_square();
    // det D^2 exp(|x|^2/2) = (1 + |x|^2) exp(|x|^2)
    p.f = [](const Point& x, double, const Point&) { return (1.0 + norm2(x)) * std::exp(norm2(x)); };
    p.exact_solution = [](const Point& x) { return std::exp(0.5 * norm2(x)); };
    p.g = p.exact_solution;
    return p;
}

PDEProblem cone2d() {
    PDEProblem p;
    p.name = "cone2d";
    p.domain = Domain::unit_square();
    p.f = [](const Point&, double, const Point&) { return 0.0; };
    // Apex at (2, 2), outside the closed square.
    p.exact_solution = [](const Point& x) { return std::hypot(x[0] - 2.0, x[1] - 2.0); };
    p.g = p.exact_solution;
    return p;
}

PDEProblem gauss1d() {
    PDEProblem p;
    p.name = "gauss1d";
    p.domain = Domain::unit_interval();
    p.depends_on_p = true;
    p.f = [](const Point&, double, const Point& q) {
        const double t = 1.0 + q[0] * q[0];
        return t * std::sqrt(t);
    };
    p.df_dp_bound = [](double q) { return 3.0 * std::abs(q) * std::sqrt(1.0 + q * q); };
    p.g = [](const Point& x) { return x[0] < 0.5 ? -1.0 : 1.0; };
    // The viscosity solution of the generalized problem is discontinuous at x = 1;
    // no exact solution is attached.
    return p;
}

PDEProblem ma1d() {
    PDEProblem p;
    p.name = "ma1d";
    p.domain = Domain::unit_interval();
    p.f = [](const Point&, double, const Point&) { return 1.0; };
    p.exact_solution = [](const Point& x) { return 0.5 * x[0] * x[0]; };
    p.g = p.exact_solution;
    return p;
}

} // namespace

const std::vector<std::string>& registry_keys() {
    static const std::vector<std::string> keys{"quad2d", "exp2d", "cone2d", "gauss1d", "ma1d"};
    return keys;
}

bool has_problem(std::string_view key) {
    for (const auto& k : registry_keys()) {
        if (k == key) return true;
    }
    return false;
}

PDEProblem make_problem(std::string_view key) {
    if (key == "quad2d") return quad2d();
    if (key == "exp2d") return exp2d();
    if (key == "cone2d") return cone2d();
    if (key == "gauss1d") return gauss1d();
    if (key == "ma1d") return ma1d();
    throw std::out_of_range("unknown problem '" + std::string(key) + "'");
}

Point probe_point(const PDEProblem& problem) {
    return problem.dim() == 1 ? Point{0.5, 0.0} : Point{0.5, 0.5};
}

PDEProblem make_flat_boundary_problem() {
    PDEProblem p;
    p.name = "flat2d";
    p.domain = Domain::unit_square();
    p.f = [](const Point&, double, const Point&) { return 0.0; };
    p.g = [](const Point&) { return 0.0; };
    p.exact_solution = [](const Point&) { return 0.0; };
    return p;
}

} // namespace masolve
