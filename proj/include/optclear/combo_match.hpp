#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "optclear/market.hpp"
#include "optclear/milp.hpp"

namespace optclear {

struct ComboMatchOptions {
    double eps = 1e-6;           // convergence tolerance on the lower-level objective
    long max_iter = 0;           // 0 = automatic: 10 * (M + N) + 100
    bool fix_L_zero = false;
    bool prefer_volume = false;  // secondary pass maximizing total fills at the optimum
    double tol = 1e-7;           // LP tolerance
    long node_limit = 1'000'000;
    double big_M = 0.0;          // 0 = automatic (see combo_scale)
    double s_max = 0.0;          // 0 = automatic (see combo_scale)
    std::optional<std::size_t> pin_buy;   // fill pinned to 1 (quoting)
    std::optional<std::size_t> pin_sell;
};

/// Search-box and big-M constants for a market. The box is
/// max(10 * max strike / min positive |weight|, 1e4) per side; big M defaults
/// to 1e6 and is raised to 10x the largest |w'S - K| reachable on the box
/// when that exceeds 1e6 (with a warning to stderr, since an undersized M
/// silently truncates payoffs).
struct ComboScale {
    double big_M = 1e6;
    double s_max = 1e4;
    bool big_M_raised = false;
};
ComboScale combo_scale(const MarketInstance& m, const ComboMatchOptions& opts = {});

/// Upper-level LP: maximize b'gamma - a'delta - L subject to
/// gamma'f - delta'g <= L for every recorded constraint.
lp::LinearProgram build_upper_lp(const MarketInstance& m,
                                 const std::vector<ConstraintRecord>& C,
                                 const ComboMatchOptions& opts = {});

/// Lower-level adversarial MILP: given fills and L, find the price vector in
/// the box that violates the dominance constraint the most. Variables are
/// S in [0, s_max]^U, f in [0, big_M]^M, g >= 0, binary indicators I; rows
/// are the big-M linearization of f_m = max{phi_m(alpha_m'S - p_m), 0} and
/// the lower envelope of g_n.
lp::MixedIntegerProgram build_lower_milp(const MarketInstance& m,
                                         std::span<const double> gamma,
                                         std::span<const double> delta, double L,
                                         double big_M, double s_max);

/// Clears a combinatorial market by constraint generation: alternate the
/// upper LP over the generated set with the lower MILP until no price vector
/// violates the match by more than eps, then check recession directions
/// beyond the box. Non-convergence is reported in the status, never silently
/// returned as optimal.
MatchResult match_combinatorial(const MarketInstance& m, const ComboMatchOptions& opts = {});

/// Independent violation oracle: enumerates every vertex of the arrangement
/// formed by the contract hyperplanes {w'S = K}, the coordinate planes and
/// the box faces, and evaluates the net payoff there. Exact on the box
/// because the objective is linear on every arrangement cell. Intended for
/// verification; refuses instances with more than 4 assets or ~25 planes.
std::pair<PriceVector, double> brute_force_violation(const MarketInstance& m,
                                                     std::span<const double> gamma,
                                                     std::span<const double> delta, double L,
                                                     double box);

/// Quote for a custom contract against a combinatorial book, by the same
/// dominated/dominating-portfolio construction as the standard quotes but
/// run through the constraint-generation matcher. nullopt means no finite
/// quote exists (no dominating portfolio, or the search did not converge).
std::optional<double> combo_quote_bid(const MarketInstance& m, const OptionContract& target,
                                      const ComboMatchOptions& opts = {});
std::optional<double> combo_quote_ask(const MarketInstance& m, const OptionContract& target,
                                      const ComboMatchOptions& opts = {});

}  // namespace optclear
