#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace optclear::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LE, GE, EQ };

enum class SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NodeLimit,
    CutoffReached,
};

std::string_view to_string(SolveStatus s);

/// A maximization LP over variables with individual [lower, upper] bounds
/// (either side may be infinite; a variable with both infinite is free).
struct LinearProgram {
    struct Row {
        std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
        RowSense sense = RowSense::LE;
        double rhs = 0.0;
    };

    std::vector<double> objective;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<Row> rows;
    double objective_offset = 0.0;

    int num_vars() const { return static_cast<int>(objective.size()); }

    int add_variable(double lo, double hi, double obj);
    void add_row(RowSense sense, double rhs, std::vector<std::pair<int, double>> terms);

    /// Dimension/bound sanity check; fills `why` on failure when given.
    bool well_formed(std::string* why = nullptr) const;
};

struct SolveReport {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> x;          // primal solution, present iff a solution exists
    double objective = 0.0;         // includes objective_offset
    double bound = 0.0;             // proven upper bound (MILP); == objective for Optimal
    std::vector<double> row_duals;  // per input row, LP only, valid when Optimal
    long iterations = 0;            // simplex pivots
    long nodes = 0;                 // branch-and-bound nodes
};

struct SimplexOptions {
    double tol = 1e-7;        // feasibility / optimality tolerance
    long iteration_limit = 0; // 0 = automatic from problem size
};

/// Two-phase primal simplex with bounded variables and Bland's rule as an
/// anti-cycling fallback. Deterministic given identical input. Statuses are
/// reported, never thrown.
SolveReport solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

}  // namespace optclear::lp
