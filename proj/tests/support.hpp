#pragma once

// Shared fixtures and independent oracles for the test suites. Everything
// here must stay independent of the implementation paths it checks: the LP
// oracle enumerates active sets directly, and the chain fixtures are priced
// from an explicit discrete distribution.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "optclear/generators.hpp"
#include "optclear/linprog.hpp"
#include "optclear/market.hpp"

namespace testsupport {

using namespace optclear;

inline Order make_order(std::string id, Side side, OptionKind kind,
                        std::map<std::string, double> weights, double strike, double price,
                        double qty = 1.0) {
    return Order{std::move(id), side, OptionContract{kind, std::move(weights), strike}, price,
                 qty};
}

/// The 4-order Walt Disney market: bids 7.2 on C110 and 38.75 on P150,
/// asks 0.05 on C150 and 5.1 on P110 (objective 0.80 with L = 40).
inline MarketInstance market_dis() {
    return MarketInstance::from_orders({
        make_order("b1", Side::Buy, OptionKind::Call, {{"DIS", 1.0}}, 110.0, 7.2),
        make_order("b2", Side::Buy, OptionKind::Put, {{"DIS", 1.0}}, 150.0, 38.75),
        make_order("s1", Side::Sell, OptionKind::Call, {{"DIS", 1.0}}, 150.0, 0.05),
        make_order("s2", Side::Sell, OptionKind::Put, {{"DIS", 1.0}}, 110.0, 5.1),
    });
}

/// The 4-order Apple market: bids 14.1 on C160 and 0.62 on P80, asks 74.2 on
/// C80 and 19.1 on P160 (objective 1.42 with L = -80).
inline MarketInstance market_aapl() {
    return MarketInstance::from_orders({
        make_order("b1", Side::Buy, OptionKind::Call, {{"AAPL", 1.0}}, 160.0, 14.1),
        make_order("b2", Side::Buy, OptionKind::Put, {{"AAPL", 1.0}}, 80.0, 0.62),
        make_order("s1", Side::Sell, OptionKind::Call, {{"AAPL", 1.0}}, 80.0, 74.2),
        make_order("s2", Side::Sell, OptionKind::Put, {{"AAPL", 1.0}}, 160.0, 19.1),
    });
}

/// Four combinatorial orders over AAPL/MSFT that clear for an immediate $15.
inline MarketInstance market_combo_gain() {
    return MarketInstance::from_orders({
        make_order("o1", Side::Buy, OptionKind::Call, {{"AAPL", 1.0}, {"MSFT", 2.0}}, 300.0,
                   110.0),
        make_order("o2", Side::Buy, OptionKind::Call, {{"AAPL", 1.0}, {"MSFT", 1.0}}, 300.0,
                   70.0),
        make_order("o3", Side::Sell, OptionKind::Call, {{"AAPL", 1.0}, {"MSFT", 3.0}}, 300.0,
                   160.0),
        make_order("o4", Side::Sell, OptionKind::Call, {{"AAPL", 1.0}}, 250.0, 5.0),
    });
}

/// The batch-only example: the full trade costs $0 and is feasible, but no
/// single buy order can be covered on its own.
inline MarketInstance market_combo_batch() {
    return MarketInstance::from_orders({
        make_order("o1", Side::Buy, OptionKind::Call, {{"A", 1.0}, {"B", 1.0}}, 10.0, 6.0),
        make_order("o2", Side::Buy, OptionKind::Call, {{"B", 1.0}, {"C", 1.0}}, 7.0, 6.0),
        make_order("o3", Side::Sell, OptionKind::Call, {{"A", 1.0}, {"B", 1.0}, {"C", 1.0}},
                   7.0, 10.0),
        make_order("o4", Side::Sell, OptionKind::Call, {{"B", 1.0}}, 3.0, 2.0),
    });
}

// ---------------------------------------------------------------------------
// Brute-force LP oracle: enumerate candidate active sets (rows as equalities
// plus variable bounds), solve each square system, keep the best feasible
// point. Exact for small nondegenerate LPs with a bounded optimum.
// ---------------------------------------------------------------------------

struct LpOracleResult {
    bool feasible = false;
    double objective = -lp::kInf;
    std::vector<double> x;
};

namespace detail {

inline bool solve_square(std::vector<double> a, std::vector<double> b, std::size_t n,
                         std::vector<double>& x) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-11) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i * n + c] * x[c];
        x[i] = acc / a[i * n + i];
    }
    return true;
}

}  // namespace detail

inline LpOracleResult brute_force_lp(const lp::LinearProgram& prog, double tol = 1e-7) {
    const std::size_t n = static_cast<std::size_t>(prog.num_vars());
    struct Plane {
        std::vector<double> a;
        double b;
    };
    std::vector<Plane> planes;
    for (const auto& row : prog.rows) {
        Plane pl;
        pl.a.assign(n, 0.0);
        for (auto& [j, c] : row.terms) pl.a[static_cast<std::size_t>(j)] += c;
        pl.b = row.rhs;
        planes.push_back(std::move(pl));
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (prog.lower[j] > -lp::kInf) {
            Plane pl;
            pl.a.assign(n, 0.0);
            pl.a[j] = 1.0;
            pl.b = prog.lower[j];
            planes.push_back(std::move(pl));
        }
        if (prog.upper[j] < lp::kInf) {
            Plane pl;
            pl.a.assign(n, 0.0);
            pl.a[j] = 1.0;
            pl.b = prog.upper[j];
            planes.push_back(std::move(pl));
        }
    }

    LpOracleResult best;
    const std::size_t H = planes.size();
    if (H < n) return best;

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::vector<double> a(n * n), b(n), x;

    auto feasible = [&](const std::vector<double>& pt) {
        for (std::size_t j = 0; j < n; ++j) {
            if (pt[j] < prog.lower[j] - tol || pt[j] > prog.upper[j] + tol) return false;
        }
        for (const auto& row : prog.rows) {
            double act = 0.0;
            double scale = 1.0;
            for (auto& [j, c] : row.terms) {
                act += c * pt[static_cast<std::size_t>(j)];
                scale = std::max(scale, std::abs(c * pt[static_cast<std::size_t>(j)]));
            }
            double ft = tol * scale;
            if (row.sense == lp::RowSense::LE && act > row.rhs + ft) return false;
            if (row.sense == lp::RowSense::GE && act < row.rhs - ft) return false;
            if (row.sense == lp::RowSense::EQ && std::abs(act - row.rhs) > ft) return false;
        }
        return true;
    };

    while (true) {
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) a[r * n + c] = planes[idx[r]].a[c];
            b[r] = planes[idx[r]].b;
        }
        if (detail::solve_square(a, b, n, x) && feasible(x)) {
            double obj = prog.objective_offset;
            for (std::size_t j = 0; j < n; ++j) obj += prog.objective[j] * x[j];
            if (!best.feasible || obj > best.objective) {
                best.feasible = true;
                best.objective = obj;
                best.x = x;
            }
        }
        std::size_t i = n;
        bool done = true;
        while (i-- > 0) {
            if (idx[i] != i + H - n) {
                ++idx[i];
                for (std::size_t j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
                done = false;
                break;
            }
        }
        if (done) break;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Chain fixtures priced from an explicit discrete risk-neutral distribution.
// Bids sit below the expected payoff and asks above, so the resulting books
// are arbitrage-free by construction (any dominated portfolio's price is
// bounded by its expectation under the common measure).
// ---------------------------------------------------------------------------

struct MeasureChain {
    std::vector<ChainQuote> quotes;
    std::map<std::string, std::vector<std::pair<double, double>>> measure;  // (spot, prob)
};

inline MeasureChain make_chain_fixture(std::uint64_t seed,
                                       const std::vector<std::string>& tickers,
                                       std::size_t strikes_per_asset = 5,
                                       double haircut = 0.02) {
    MeasureChain out;
    Rng rng(seed);
    const double moves[5] = {0.6, 0.8, 1.0, 1.2, 1.5};
    const double probs[5] = {0.1, 0.2, 0.4, 0.2, 0.1};
    for (const std::string& t : tickers) {
        double s0 = 40.0 + 120.0 * rng.uniform_unit();
        std::vector<std::pair<double, double>> dist;
        for (int i = 0; i < 5; ++i) dist.emplace_back(s0 * moves[i], probs[i]);
        out.measure[t] = dist;

        for (std::size_t k = 0; k < strikes_per_asset; ++k) {
            double rel = 0.7 + 0.6 * static_cast<double>(k) /
                                   static_cast<double>(std::max<std::size_t>(1, strikes_per_asset - 1));
            double K = std::round(s0 * rel * 100.0) / 100.0;
            if (K <= 0.0) K = 1.0;
            for (OptionKind kind : {OptionKind::Call, OptionKind::Put}) {
                double ev = 0.0;
                for (auto& [s, p] : dist)
                    ev += p * std::max(kind_sign(kind) * (s - K), 0.0);
                ChainQuote q;
                q.ticker = t;
                q.kind = kind;
                q.strike = K;
                q.best_bid = ev * (1.0 - haircut);
                q.best_ask = ev * (1.0 + haircut);
                out.quotes.push_back(std::move(q));
            }
        }
    }
    return out;
}

/// Random single-underlying market with prices jittered around the measure
/// expectation; wide jitter makes some of these markets clear profitably.
inline MarketInstance random_standard_market(std::uint64_t seed, std::size_t n_orders,
                                             double jitter = 0.25) {
    Rng rng(seed);
    MeasureChain mc = make_chain_fixture(seed ^ 0x9e3779b97f4a7c15ull, {"XYZ"}, 6, 0.0);
    const auto& dist = mc.measure["XYZ"];
    std::vector<double> strikes;
    for (const auto& q : mc.quotes) strikes.push_back(q.strike);
    std::sort(strikes.begin(), strikes.end());
    strikes.erase(std::unique(strikes.begin(), strikes.end()), strikes.end());

    std::vector<Order> orders;
    for (std::size_t i = 0; i < n_orders; ++i) {
        OptionKind kind = rng.coin() ? OptionKind::Call : OptionKind::Put;
        double K = strikes[rng.uniform_index(strikes.size())];
        Side side = rng.coin() ? Side::Buy : Side::Sell;
        double ev = 0.0;
        for (auto& [s, p] : dist) ev += p * std::max(kind_sign(kind) * (s - K), 0.0);
        double f = 1.0 + jitter * (2.0 * rng.uniform_unit() - 1.0);
        double price = std::max(ev * f, 0.01);
        orders.push_back(make_order("r" + std::to_string(i), side, kind, {{"XYZ", 1.0}}, K,
                                    price));
    }
    return MarketInstance::from_orders(std::move(orders));
}

/// Random small combinatorial market for oracle cross-checks.
inline MarketInstance random_combo_market(std::uint64_t seed, std::size_t n_assets,
                                          std::size_t n_orders) {
    Rng rng(seed);
    std::vector<std::string> tickers;
    for (std::size_t u = 0; u < n_assets; ++u) tickers.push_back(std::string(1, char('A' + u)));

    std::vector<Order> orders;
    for (std::size_t i = 0; i < n_orders; ++i) {
        std::map<std::string, double> w;
        std::size_t legs = 1 + rng.uniform_index(2);
        for (std::size_t l = 0; l < legs; ++l) {
            std::size_t u = rng.uniform_index(n_assets);
            double wt = static_cast<double>(rng.uniform_index(5)) - 2.0;  // -2..2
            if (wt == 0.0) wt = 1.0;
            w[tickers[u]] += wt;
        }
        double K = std::round((10.0 + 90.0 * rng.uniform_unit()) * 4.0) / 4.0;
        if (rng.coin()) K = -K;  // exercise the put-flip path
        Side side = rng.coin() ? Side::Buy : Side::Sell;
        double price = 0.5 + 30.0 * rng.uniform_unit();
        OptionContract c = normalize(OptionKind::Call, std::move(w), K);
        if (c.weights.empty()) c = OptionContract{OptionKind::Call, {{tickers[0], 1.0}}, std::abs(K)};
        orders.push_back(Order{"c" + std::to_string(i), side, std::move(c), price, 1.0});
    }
    MarketInstance m = MarketInstance::from_orders(std::move(orders));
    std::vector<std::string> all = m.universe.assets();
    all.insert(all.end(), tickers.begin(), tickers.end());
    m.universe = AssetUniverse::sorted(std::move(all));
    return m;
}

/// Exhaustive vertex-cover decision for small graphs.
inline bool has_vertex_cover(std::size_t n_vertices,
                             const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                             int k) {
    if (k < 0) return false;
    for (std::uint32_t mask = 0; mask < (1u << n_vertices); ++mask) {
        if (std::popcount(mask) > k) continue;
        bool covers = true;
        for (auto& [i, j] : edges)
            if (!((mask >> i) & 1u) && !((mask >> j) & 1u)) {
                covers = false;
                break;
            }
        if (covers) return true;
    }
    return false;
}

}  // namespace testsupport
