#pragma once

#include <optional>
#include <set>
#include <string>

#include "optclear/linprog.hpp"
#include "optclear/market.hpp"

namespace optclear {

struct StandardMatchOptions {
    bool fix_L_zero = false;     // pin the worst-case offset L to 0
    bool prefer_volume = false;  // secondary pass maximizing total fills at the optimum
    double tol = 1e-7;           // LP tolerance
    /// Orders whose fill is pinned to 1 (used by the quoting procedures).
    std::optional<std::size_t> pin_buy;
    std::optional<std::size_t> pin_sell;
};

/// Assembles the consolidated matching LP for a single-underlying market:
/// variables (gamma, delta, L), objective b'gamma - a'delta - L, one
/// dominance constraint per breakpoint S in {0} union strikes, and one
/// asymptotic-slope row capping the call imbalance as S grows without bound.
/// Throws std::invalid_argument if any contract is not a standard option or
/// the orders mix underlyings.
lp::LinearProgram build_standard_lp(const MarketInstance& m,
                                    const StandardMatchOptions& opts = {});

/// Solves the consolidated match. The all-zero fill with L = 0 is always
/// feasible, so the objective is nonnegative; objective > kMatchTol means a
/// profitable match exists.
MatchResult match_standard(const MarketInstance& m, const StandardMatchOptions& opts = {});

/// Implied continuously compounded rate from a negative-L match:
/// outlay * exp(r * year_fraction) = -L. Requires L < 0 and a positive cash
/// outlay a'delta - b'gamma; throws std::invalid_argument otherwise.
double implied_interest_rate(const MarketInstance& m, const MatchResult& match,
                             double year_fraction);

/// Highest price at which `target` can be bought back risk-free against the
/// book: the maximum gain of selling a portfolio weakly dominated by the
/// target. The market must be arbitrage-free.
double quote_bid(const MarketInstance& m, const OptionContract& target,
                 const StandardMatchOptions& opts = {});

/// Minimum cost of buying a portfolio that weakly dominates `target`.
/// Returns +infinity when no dominating portfolio exists (e.g. a call target
/// against an empty book).
double quote_ask(const MarketInstance& m, const OptionContract& target,
                 const StandardMatchOptions& opts = {});

/// Orders whose price cannot be weakly improved by a portfolio of the other
/// orders: buys with b >= quote_bid(m minus o), sells with
/// a <= quote_ask(m minus o). Equality keeps the order in the set.
std::set<std::string> compute_frontier(const MarketInstance& m,
                                       const StandardMatchOptions& opts = {});

}  // namespace optclear
