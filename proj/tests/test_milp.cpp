#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "optclear/milp.hpp"
#include "support.hpp"

using namespace optclear::lp;

namespace {

/// Exhaustive oracle: enumerate every binary assignment and solve the rest.
SolveReport milp_by_enumeration(const MixedIntegerProgram& mip) {
    SolveReport best;
    best.status = SolveStatus::Infeasible;
    const std::size_t nb = mip.binary_vars.size();
    REQUIRE(nb <= 16);
    for (std::uint32_t mask = 0; mask < (1u << nb); ++mask) {
        LinearProgram fixed = mip.lp;
        for (std::size_t i = 0; i < nb; ++i) {
            double v = (mask >> i) & 1u ? 1.0 : 0.0;
            fixed.lower[mip.binary_vars[i]] = v;
            fixed.upper[mip.binary_vars[i]] = v;
        }
        auto rep = solve_lp(fixed);
        if (rep.status != SolveStatus::Optimal) continue;
        if (best.status != SolveStatus::Optimal || rep.objective > best.objective) {
            best = rep;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("no binaries reduces to the LP") {
    MixedIntegerProgram mip;
    int x = mip.lp.add_variable(0.0, kInf, 1.0);
    mip.lp.add_row(RowSense::LE, 3.0, {{x, 1.0}});
    auto milp = solve_milp(mip);
    auto lin = solve_lp(mip.lp);
    REQUIRE(milp.status == SolveStatus::Optimal);
    CHECK(milp.objective == doctest::Approx(lin.objective));
}

TEST_CASE("two binaries with a packing row") {
    MixedIntegerProgram mip;
    int a = mip.lp.add_variable(0.0, 1.0, 1.0);
    int b = mip.lp.add_variable(0.0, 1.0, 1.0);
    mip.lp.add_row(RowSense::LE, 1.0, {{a, 1.0}, {b, 1.0}});
    mip.binary_vars = {a, b};
    auto rep = solve_milp(mip);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.objective == doctest::Approx(1.0));
    CHECK(std::round(rep.x[a] + rep.x[b]) == 1.0);
}

TEST_CASE("fractional relaxation forces branching") {
    // Knapsack where the LP relaxation is fractional.
    MixedIntegerProgram mip;
    int a = mip.lp.add_variable(0.0, 1.0, 10.0);
    int b = mip.lp.add_variable(0.0, 1.0, 6.0);
    int c = mip.lp.add_variable(0.0, 1.0, 4.0);
    mip.lp.add_row(RowSense::LE, 10.0, {{a, 8.0}, {b, 5.0}, {c, 3.0}});
    mip.binary_vars = {a, b, c};
    auto rep = solve_milp(mip);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.objective == doctest::Approx(10.0));  // {b, c} fits: 6 + 4
    CHECK(rep.nodes > 1);
}

TEST_CASE("infeasible MILP reported as such") {
    MixedIntegerProgram mip;
    int a = mip.lp.add_variable(0.0, 1.0, 1.0);
    mip.lp.add_row(RowSense::GE, 0.25, {{a, 1.0}});
    mip.lp.add_row(RowSense::LE, 0.75, {{a, 1.0}});
    mip.binary_vars = {a};
    CHECK(solve_milp(mip).status == SolveStatus::Infeasible);
}

TEST_CASE("big-M indicator pattern recovers the max function") {
    // f = max{x - 4, 0} via an indicator, maximize f - 0.3 x over x in [0,10].
    const double M = 1e6;
    MixedIntegerProgram mip;
    int x = mip.lp.add_variable(0.0, 10.0, -0.3);
    int f = mip.lp.add_variable(0.0, M, 1.0);
    int I = mip.lp.add_variable(0.0, 1.0, 0.0);
    mip.lp.add_row(RowSense::GE, 4.0 - M, {{x, 1.0}, {I, -M}});
    mip.lp.add_row(RowSense::LE, 4.0, {{x, 1.0}, {I, -M}});
    mip.lp.add_row(RowSense::LE, M - 4.0, {{f, 1.0}, {x, -1.0}, {I, M}});
    mip.lp.add_row(RowSense::LE, 0.0, {{f, 1.0}, {I, -M}});
    mip.binary_vars = {I};
    auto rep = solve_milp(mip);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.objective == doctest::Approx(6.0 - 3.0));  // x = 10, f = 6
    CHECK(rep.x[x] == doctest::Approx(10.0));
    CHECK(rep.x[f] == doctest::Approx(6.0));
}

TEST_CASE("random MILPs agree with exhaustive enumeration") {
    testsupport::Rng rng(404);
    int solved = 0;
    for (int trial = 0; trial < 60; ++trial) {
        MixedIntegerProgram mip;
        std::size_t nb = 2 + rng.uniform_index(5);       // 2..6 binaries
        std::size_t nc = rng.uniform_index(3);           // 0..2 continuous
        for (std::size_t i = 0; i < nb; ++i)
            mip.binary_vars.push_back(
                mip.lp.add_variable(0.0, 1.0, std::floor(10.0 * rng.uniform_unit()) - 4.0));
        for (std::size_t i = 0; i < nc; ++i)
            mip.lp.add_variable(0.0, 5.0, std::floor(6.0 * rng.uniform_unit()) - 2.0);
        std::size_t rows = 2 + rng.uniform_index(4);
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<std::pair<int, double>> terms;
            for (int j = 0; j < mip.lp.num_vars(); ++j) {
                double c = std::floor(7.0 * rng.uniform_unit()) - 3.0;
                if (c != 0.0) terms.emplace_back(j, c);
            }
            if (terms.empty()) continue;
            mip.lp.add_row(rng.coin() ? RowSense::LE : RowSense::GE,
                           std::floor(12.0 * rng.uniform_unit()) - 3.0, std::move(terms));
        }
        auto fast = solve_milp(mip);
        auto slow = milp_by_enumeration(mip);
        if (slow.status != SolveStatus::Optimal) {
            CHECK(fast.status == SolveStatus::Infeasible);
            continue;
        }
        REQUIRE_MESSAGE(fast.status == SolveStatus::Optimal, "trial ", trial);
        CHECK_MESSAGE(fast.objective == doctest::Approx(slow.objective).epsilon(1e-6), "trial ",
                      trial);
        ++solved;
    }
    CHECK(solved > 25);
}

TEST_CASE("twelve binaries still match enumeration") {
    testsupport::Rng rng(505);
    MixedIntegerProgram mip;
    for (int i = 0; i < 12; ++i)
        mip.binary_vars.push_back(
            mip.lp.add_variable(0.0, 1.0, std::floor(9.0 * rng.uniform_unit()) + 1.0));
    for (int r = 0; r < 4; ++r) {
        std::vector<std::pair<int, double>> terms;
        for (int j = 0; j < 12; ++j)
            terms.emplace_back(j, std::floor(5.0 * rng.uniform_unit()) + 1.0);
        mip.lp.add_row(RowSense::LE, 10.0 + std::floor(10.0 * rng.uniform_unit()),
                       std::move(terms));
    }
    auto fast = solve_milp(mip);
    auto slow = milp_by_enumeration(mip);
    REQUIRE(fast.status == SolveStatus::Optimal);
    CHECK(fast.objective == doctest::Approx(slow.objective).epsilon(1e-6));
}

TEST_CASE("node limit reports honestly") {
    MixedIntegerProgram mip;
    for (int i = 0; i < 10; ++i)
        mip.binary_vars.push_back(mip.lp.add_variable(0.0, 1.0, 1.0));
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < 10; ++j) terms.emplace_back(j, 2.0);
    mip.lp.add_row(RowSense::LE, 9.0, {terms});
    MilpOptions opts;
    opts.node_limit = 1;
    auto rep = solve_milp(mip, opts);
    CHECK(rep.status == SolveStatus::NodeLimit);
    CHECK(rep.bound >= rep.objective - 1e-9);
}

TEST_CASE("bound cutoff exits early with a certified bound") {
    MixedIntegerProgram mip;
    int a = mip.lp.add_variable(0.0, 1.0, -1.0);
    mip.binary_vars = {a};
    MilpOptions opts;
    opts.bound_cutoff = 0.5;  // optimum is 0 <= cutoff
    auto rep = solve_milp(mip, opts);
    CHECK((rep.status == SolveStatus::CutoffReached || rep.status == SolveStatus::Optimal));
    CHECK(rep.bound <= 0.5 + 1e-9);
}

TEST_CASE("completion heuristic seeds the incumbent") {
    MixedIntegerProgram mip;
    int a = mip.lp.add_variable(0.0, 1.0, 3.0);
    int b = mip.lp.add_variable(0.0, 1.0, 2.0);
    mip.lp.add_row(RowSense::LE, 1.0, {{a, 1.0}, {b, 1.0}});
    mip.binary_vars = {a, b};
    MilpOptions opts;
    int calls = 0;
    opts.completion = [&calls](const std::vector<double>& x)
        -> std::optional<std::vector<double>> {
        ++calls;
        std::vector<double> y(x.size(), 0.0);
        y[0] = 1.0;
        return y;
    };
    auto rep = solve_milp(mip, opts);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.objective == doctest::Approx(3.0));
    CHECK(calls >= 1);
}

TEST_CASE("MILP solves are deterministic") {
    testsupport::Rng rng(606);
    MixedIntegerProgram mip;
    for (int i = 0; i < 8; ++i)
        mip.binary_vars.push_back(mip.lp.add_variable(0.0, 1.0, rng.uniform_unit() * 5.0));
    for (int r = 0; r < 3; ++r) {
        std::vector<std::pair<int, double>> terms;
        for (int j = 0; j < 8; ++j) terms.emplace_back(j, 1.0 + rng.uniform_unit());
        mip.lp.add_row(RowSense::LE, 4.0, std::move(terms));
    }
    auto a = solve_milp(mip);
    auto b = solve_milp(mip);
    CHECK(a.status == b.status);
    CHECK(a.objective == b.objective);
    CHECK(a.x == b.x);
    CHECK(a.nodes == b.nodes);
}
