#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "masolve/operators.hpp"

namespace masolve {

/// Registry keys, in a fixed order.
const std::vector<std::string>& registry_keys();

/// Throws std::out_of_range for an unknown key.
PDEProblem make_problem(std::string_view key);

bool has_problem(std::string_view key);

/// Probe point used for err_probe: 0.5 in 1-D, (0.5, 0.5) in 2-D.
Point probe_point(const PDEProblem& problem);

/// Lower half-plane counterexample adapted to the unit square: f = 0, g = 0.
PDEProblem make_flat_boundary_problem();

} // namespace masolve
