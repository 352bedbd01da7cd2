#include "optclear/standard_match.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace optclear {

namespace {

using lp::LinearProgram;
using lp::RowSense;
using lp::SolveReport;
using lp::SolveStatus;

/// Payoff of a standard option at spot S.
double std_payoff(const Order& o, double S) {
    double k = kind_sign(o.contract.kind);
    return std::max(k * (S - o.contract.strike), 0.0);
}

void require_standard(const MarketInstance& m) {
    std::string_view underlying;
    auto check = [&](const Order& o) {
        if (!o.contract.is_standard())
            throw std::invalid_argument("order " + o.id +
                                        ": not a standard single-underlying option");
        if (underlying.empty()) underlying = o.contract.underlying();
        else if (underlying != o.contract.underlying())
            throw std::invalid_argument("order " + o.id + ": mixes underlyings with " +
                                        std::string(underlying));
    };
    for (const Order& o : m.buys) check(o);
    for (const Order& o : m.sells) check(o);
}

std::vector<double> breakpoints(const MarketInstance& m) {
    std::vector<double> pts{0.0};
    for (const Order& o : m.buys) pts.push_back(o.contract.strike);
    for (const Order& o : m.sells) pts.push_back(o.contract.strike);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-9; }),
              pts.end());
    return pts;
}

struct SolvedLp {
    SolveReport report;
    LinearProgram lp;
};

SolvedLp solve_standard(const MarketInstance& m, const StandardMatchOptions& opts) {
    SolvedLp out;
    out.lp = build_standard_lp(m, opts);
    out.report = lp::solve_lp(out.lp, {.tol = opts.tol});

    if (opts.prefer_volume && out.report.status == SolveStatus::Optimal &&
        m.num_orders() > 0) {
        // Secondary pass: among optimal matches, surface the one with the
        // largest total fill.
        LinearProgram vol = out.lp;
        std::vector<std::pair<int, double>> pin;
        const std::size_t M = m.num_buys(), N = m.num_sells();
        for (std::size_t i = 0; i < M; ++i) {
            pin.emplace_back(static_cast<int>(i), -m.buys[i].price * m.buys[i].quantity);
        }
        for (std::size_t i = 0; i < N; ++i) {
            pin.emplace_back(static_cast<int>(M + i), m.sells[i].price * m.sells[i].quantity);
        }
        pin.emplace_back(static_cast<int>(M + N), 1.0);
        vol.add_row(RowSense::LE, -out.report.objective + 1e-9, std::move(pin));
        for (std::size_t i = 0; i < M + N; ++i) vol.objective[i] = 1.0;
        vol.objective[M + N] = 0.0;
        SolveReport vrep = lp::solve_lp(vol, {.tol = opts.tol});
        if (vrep.status == SolveStatus::Optimal) {
            out.report.x = vrep.x;
            out.report.iterations += vrep.iterations;
        }
    }
    return out;
}

}  // namespace

LinearProgram build_standard_lp(const MarketInstance& m, const StandardMatchOptions& opts) {
    require_standard(m);

    LinearProgram prog;
    const std::size_t M = m.num_buys(), N = m.num_sells();
    for (std::size_t i = 0; i < M; ++i) {
        bool pinned = opts.pin_buy && *opts.pin_buy == i;
        prog.add_variable(pinned ? 1.0 : 0.0, 1.0, m.buys[i].price * m.buys[i].quantity);
    }
    for (std::size_t i = 0; i < N; ++i) {
        bool pinned = opts.pin_sell && *opts.pin_sell == i;
        prog.add_variable(pinned ? 1.0 : 0.0, 1.0, -m.sells[i].price * m.sells[i].quantity);
    }
    const int Lvar = opts.fix_L_zero ? prog.add_variable(0.0, 0.0, -1.0)
                                     : prog.add_variable(-lp::kInf, lp::kInf, -1.0);

    for (double S : breakpoints(m)) {
        std::vector<std::pair<int, double>> terms;
        for (std::size_t i = 0; i < M; ++i) {
            double v = m.buys[i].quantity * std_payoff(m.buys[i], S);
            if (v != 0.0) terms.emplace_back(static_cast<int>(i), v);
        }
        for (std::size_t i = 0; i < N; ++i) {
            double v = m.sells[i].quantity * std_payoff(m.sells[i], S);
            if (v != 0.0) terms.emplace_back(static_cast<int>(M + i), -v);
        }
        terms.emplace_back(Lvar, -1.0);
        prog.add_row(RowSense::LE, 0.0, std::move(terms));
    }

    // Slope of the aggregate payoff as S grows without bound: only calls
    // contribute, and the net call exposure must not be positive.
    std::vector<std::pair<int, double>> slope;
    for (std::size_t i = 0; i < M; ++i)
        if (m.buys[i].contract.kind == OptionKind::Call)
            slope.emplace_back(static_cast<int>(i), m.buys[i].quantity);
    for (std::size_t i = 0; i < N; ++i)
        if (m.sells[i].contract.kind == OptionKind::Call)
            slope.emplace_back(static_cast<int>(M + i), -m.sells[i].quantity);
    prog.add_row(RowSense::LE, 0.0, std::move(slope));

    return prog;
}

MatchResult match_standard(const MarketInstance& m, const StandardMatchOptions& opts) {
    if (opts.pin_buy || opts.pin_sell)
        throw std::invalid_argument("pins are reserved for the quoting procedures");
    SolvedLp solved = solve_standard(m, opts);
    if (solved.report.status != SolveStatus::Optimal)
        throw std::runtime_error("matching LP not optimal: " +
                                 std::string(lp::to_string(solved.report.status)));

    const std::size_t M = m.num_buys(), N = m.num_sells();
    MatchResult res;
    res.status = MatchStatus::Optimal;
    res.gamma.assign(solved.report.x.begin(), solved.report.x.begin() + M);
    res.delta.assign(solved.report.x.begin() + M, solved.report.x.begin() + M + N);
    res.offset_L = solved.report.x[M + N];
    res.iterations = solved.report.iterations;

    double obj = -res.offset_L;
    for (std::size_t i = 0; i < M; ++i) obj += m.buys[i].price * m.buys[i].quantity * res.gamma[i];
    for (std::size_t i = 0; i < N; ++i)
        obj -= m.sells[i].price * m.sells[i].quantity * res.delta[i];
    res.objective = std::abs(obj) < 1e-12 ? 0.0 : obj;

    if (m.num_orders() > 0 && m.universe.size() >= 1) {
        const Order& first = m.buys.empty() ? m.sells.front() : m.buys.front();
        auto idx = m.universe.index_of(first.contract.underlying());
        for (double S : breakpoints(m)) {
            ConstraintRecord rec;
            rec.price_point.assign(m.universe.size(), 0.0);
            if (idx) rec.price_point[*idx] = S;
            for (const Order& o : m.buys) rec.f.push_back(o.quantity * std_payoff(o, S));
            for (const Order& o : m.sells) rec.g.push_back(o.quantity * std_payoff(o, S));
            res.constraints.push_back(std::move(rec));
        }
    }
    return res;
}

double implied_interest_rate(const MarketInstance& m, const MatchResult& match,
                             double year_fraction) {
    if (!(year_fraction > 0.0))
        throw std::invalid_argument("year_fraction must be positive");
    if (!(match.offset_L < 0.0))
        throw std::invalid_argument("implied rate requires a negative L");
    double outlay = 0.0;
    for (std::size_t i = 0; i < m.num_sells(); ++i)
        outlay += m.sells[i].price * m.sells[i].quantity * match.delta[i];
    for (std::size_t i = 0; i < m.num_buys(); ++i)
        outlay -= m.buys[i].price * m.buys[i].quantity * match.gamma[i];
    if (!(outlay > 0.0))
        throw std::invalid_argument("implied rate requires a positive cash outlay");
    return std::log(-match.offset_L / outlay) / year_fraction;
}

double quote_bid(const MarketInstance& m, const OptionContract& target,
                 const StandardMatchOptions& opts) {
    MarketInstance aug = m;
    aug.sells.push_back(Order{"__quote_target", Side::Sell, target, 0.0, 1.0});
    StandardMatchOptions q = opts;
    q.prefer_volume = false;
    q.pin_sell = aug.sells.size() - 1;
    LinearProgram prog = build_standard_lp(aug, q);
    SolveReport rep = lp::solve_lp(prog, {.tol = opts.tol});
    if (rep.status != SolveStatus::Optimal)
        throw std::runtime_error("bid quote LP not optimal: " +
                                 std::string(lp::to_string(rep.status)));
    return std::max(rep.objective, 0.0);
}

double quote_ask(const MarketInstance& m, const OptionContract& target,
                 const StandardMatchOptions& opts) {
    MarketInstance aug = m;
    aug.buys.push_back(Order{"__quote_target", Side::Buy, target, 0.0, 1.0});
    StandardMatchOptions q = opts;
    q.prefer_volume = false;
    q.pin_buy = aug.buys.size() - 1;
    LinearProgram prog = build_standard_lp(aug, q);
    SolveReport rep = lp::solve_lp(prog, {.tol = opts.tol});
    if (rep.status == SolveStatus::Infeasible) return lp::kInf;  // no dominating portfolio
    if (rep.status != SolveStatus::Optimal)
        throw std::runtime_error("ask quote LP not optimal: " +
                                 std::string(lp::to_string(rep.status)));
    return std::max(-rep.objective, 0.0);
}

std::set<std::string> compute_frontier(const MarketInstance& m,
                                       const StandardMatchOptions& opts) {
    std::set<std::string> frontier;
    for (std::size_t i = 0; i < m.num_buys(); ++i) {
        MarketInstance rest = m;
        rest.buys.erase(rest.buys.begin() + static_cast<std::ptrdiff_t>(i));
        double b = quote_bid(rest, m.buys[i].contract, opts);
        if (m.buys[i].price >= b - kMatchTol) frontier.insert(m.buys[i].id);
    }
    for (std::size_t i = 0; i < m.num_sells(); ++i) {
        MarketInstance rest = m;
        rest.sells.erase(rest.sells.begin() + static_cast<std::ptrdiff_t>(i));
        double a = quote_ask(rest, m.sells[i].contract, opts);
        if (m.sells[i].price <= a + kMatchTol) frontier.insert(m.sells[i].id);
    }
    return frontier;
}

}  // namespace optclear
