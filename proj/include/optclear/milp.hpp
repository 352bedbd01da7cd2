#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "optclear/linprog.hpp"

namespace optclear::lp {

/// A LinearProgram plus a set of variable indices constrained to {0,1}.
struct MixedIntegerProgram {
    LinearProgram lp;
    std::vector<int> binary_vars;
};

struct MilpOptions {
    SimplexOptions simplex;
    double int_tol = 1e-7;       // binary counted integral within this of 0/1
    double gap_tol = 1e-9;       // absolute best-bound pruning gap
    long node_limit = 1'000'000;
    /// Optional primal heuristic: given a (possibly fractional) relaxation
    /// solution, propose a complete feasible point. The solver verifies the
    /// proposal before accepting it as an incumbent.
    std::function<std::optional<std::vector<double>>(const std::vector<double>&)> completion;
    /// Stop as soon as the proven global bound drops to this value or below;
    /// the report then carries status CutoffReached and objective = bound.
    std::optional<double> bound_cutoff;
};

/// Exact optimum over binary assignments via best-bound branch and bound on
/// LP relaxations, branching on the lowest-index fractional binary.
/// Running presolve (bound propagation plus big-M coefficient tightening)
/// preserves the set of integral solutions, so reported optima are exact.
SolveReport solve_milp(const MixedIntegerProgram& mip, const MilpOptions& opts = {});

}  // namespace optclear::lp
