#include "optclear/combo_match.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace optclear {

namespace {

using lp::LinearProgram;
using lp::MilpOptions;
using lp::MixedIntegerProgram;
using lp::RowSense;
using lp::SolveReport;
using lp::SolveStatus;

struct DenseMarket {
    std::size_t U = 0, M = 0, N = 0;
    std::vector<std::vector<double>> aw;  // buy-side weight rows
    std::vector<std::vector<double>> bw;  // sell-side weight rows
    std::vector<double> phi, p, b, qb;    // buy sign, strike, price, quantity
    std::vector<double> psi, q, a, qs;    // sell sign, strike, price, quantity

    explicit DenseMarket(const MarketInstance& m) {
        U = m.universe.size();
        M = m.num_buys();
        N = m.num_sells();
        for (const Order& o : m.buys) {
            aw.push_back(dense_weights(o.contract, m.universe));
            phi.push_back(kind_sign(o.contract.kind));
            p.push_back(o.contract.strike);
            b.push_back(o.price);
            qb.push_back(o.quantity);
        }
        for (const Order& o : m.sells) {
            bw.push_back(dense_weights(o.contract, m.universe));
            psi.push_back(kind_sign(o.contract.kind));
            q.push_back(o.contract.strike);
            a.push_back(o.price);
            qs.push_back(o.quantity);
        }
    }

    double buy_affine(std::size_t i, std::span<const double> S) const {
        double acc = -p[i];
        for (std::size_t u = 0; u < U; ++u) acc += aw[i][u] * S[u];
        return phi[i] * acc;
    }
    double sell_affine(std::size_t i, std::span<const double> S) const {
        double acc = -q[i];
        for (std::size_t u = 0; u < U; ++u) acc += bw[i][u] * S[u];
        return psi[i] * acc;
    }
};

ConstraintRecord record_at(const MarketInstance& m, std::span<const double> S) {
    ConstraintRecord rec;
    rec.price_point.assign(S.begin(), S.end());
    rec.f.reserve(m.num_buys());
    rec.g.reserve(m.num_sells());
    for (const Order& o : m.buys)
        rec.f.push_back(o.quantity * payoff(o.contract, m.universe, S));
    for (const Order& o : m.sells)
        rec.g.push_back(o.quantity * payoff(o.contract, m.universe, S));
    return rec;
}

bool near_point(std::span<const double> x, std::span<const double> y, double tol) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i] - y[i]) > tol) return false;
    return true;
}

}  // namespace

ComboScale combo_scale(const MarketInstance& m, const ComboMatchOptions& opts) {
    ComboScale sc;
    double max_strike = 0.0;
    double min_weight = lp::kInf;
    auto scan = [&](const Order& o) {
        max_strike = std::max(max_strike, o.contract.strike);
        for (auto& [t, w] : o.contract.weights)
            if (w != 0.0) min_weight = std::min(min_weight, std::abs(w));
    };
    for (const Order& o : m.buys) scan(o);
    for (const Order& o : m.sells) scan(o);

    sc.s_max = 1e4;
    if (min_weight < lp::kInf && max_strike > 0.0)
        sc.s_max = std::max(10.0 * max_strike / min_weight, 1e4);
    if (opts.s_max > 0.0) sc.s_max = opts.s_max;

    // Largest |w'S - K| reachable on the box.
    double reach = 0.0;
    auto reach_of = [&](const Order& o) {
        double hi = -o.contract.strike, lo = -o.contract.strike;
        for (auto& [t, w] : o.contract.weights) {
            if (w > 0) hi += w * sc.s_max;
            else lo += w * sc.s_max;
        }
        reach = std::max({reach, std::abs(hi), std::abs(lo)});
    };
    for (const Order& o : m.buys) reach_of(o);
    for (const Order& o : m.sells) reach_of(o);

    sc.big_M = 1e6;
    if (10.0 * reach > sc.big_M) {
        sc.big_M = 10.0 * reach;
        sc.big_M_raised = true;
        if (opts.big_M <= 0.0)
            std::cerr << "optclear: big-M raised to " << sc.big_M
                      << " to cover payoffs reachable on the price box\n";
    }
    if (opts.big_M > 0.0) {
        sc.big_M = opts.big_M;
        sc.big_M_raised = false;
    }
    return sc;
}

LinearProgram build_upper_lp(const MarketInstance& m, const std::vector<ConstraintRecord>& C,
                             const ComboMatchOptions& opts) {
    if (C.empty()) throw std::invalid_argument("constraint set must be seeded");
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

    for (const ConstraintRecord& rec : C) {
        if (rec.f.size() != M || rec.g.size() != N)
            throw std::invalid_argument("constraint record does not match market shape");
        std::vector<std::pair<int, double>> terms;
        for (std::size_t i = 0; i < M; ++i)
            if (rec.f[i] != 0.0) terms.emplace_back(static_cast<int>(i), rec.f[i]);
        for (std::size_t i = 0; i < N; ++i)
            if (rec.g[i] != 0.0) terms.emplace_back(static_cast<int>(M + i), -rec.g[i]);
        terms.emplace_back(Lvar, -1.0);
        prog.add_row(RowSense::LE, 0.0, std::move(terms));
    }
    return prog;
}

MixedIntegerProgram build_lower_milp(const MarketInstance& m, std::span<const double> gamma,
                                     std::span<const double> delta, double L, double big_M,
                                     double s_max) {
    DenseMarket dm(m);
    if (gamma.size() != dm.M || delta.size() != dm.N)
        throw std::invalid_argument("fill vector size mismatch");

    MixedIntegerProgram mip;
    LinearProgram& prog = mip.lp;
    // Layout: S | f | g | I.
    for (std::size_t u = 0; u < dm.U; ++u) prog.add_variable(0.0, s_max, 0.0);
    for (std::size_t i = 0; i < dm.M; ++i) {
        // The payoff cannot exceed its maximum over the box; bounding f by
        // that (instead of only big M) keeps the relaxation tight enough for
        // branch and bound without changing any integral solution.
        double reach = -dm.phi[i] * dm.p[i];
        for (std::size_t u = 0; u < dm.U; ++u)
            reach += std::max(dm.phi[i] * dm.aw[i][u], 0.0) * s_max;
        double f_hi = std::clamp(reach, 0.0, big_M);
        prog.add_variable(0.0, f_hi, gamma[i] * dm.qb[i]);
    }
    for (std::size_t i = 0; i < dm.N; ++i)
        prog.add_variable(0.0, lp::kInf, -delta[i] * dm.qs[i]);
    for (std::size_t i = 0; i < dm.M; ++i) {
        int v = prog.add_variable(0.0, 1.0, 0.0);
        mip.binary_vars.push_back(v);
    }
    prog.objective_offset = -L;

    const int f0 = static_cast<int>(dm.U);
    const int g0 = f0 + static_cast<int>(dm.M);
    const int i0 = g0 + static_cast<int>(dm.N);

    for (std::size_t i = 0; i < dm.M; ++i) {
        std::vector<std::pair<int, double>> aff;  // phi * alpha' S terms
        for (std::size_t u = 0; u < dm.U; ++u)
            if (dm.aw[i][u] != 0.0)
                aff.emplace_back(static_cast<int>(u), dm.phi[i] * dm.aw[i][u]);
        const double pk = dm.phi[i] * dm.p[i];
        const int fi = f0 + static_cast<int>(i);
        const int Ii = i0 + static_cast<int>(i);

        auto with = [&](std::initializer_list<std::pair<int, double>> extra) {
            std::vector<std::pair<int, double>> t = aff;
            for (auto& e : extra) t.push_back(e);
            return t;
        };
        // phi(alpha'S - p) >= M(I - 1)
        prog.add_row(RowSense::GE, pk - big_M, with({{Ii, -big_M}}));
        // phi(alpha'S - p) <= M I
        prog.add_row(RowSense::LE, pk, with({{Ii, -big_M}}));
        // f <= phi(alpha'S - p) - M(I - 1)
        {
            std::vector<std::pair<int, double>> t;
            t.emplace_back(fi, 1.0);
            for (auto& [j, c] : aff) t.emplace_back(j, -c);
            t.emplace_back(Ii, big_M);
            prog.add_row(RowSense::LE, -pk + big_M, std::move(t));
        }
        // f <= M I
        prog.add_row(RowSense::LE, 0.0, {{fi, 1.0}, {Ii, -big_M}});
    }

    for (std::size_t i = 0; i < dm.N; ++i) {
        // g >= psi(beta'S - q); g >= 0 is the variable bound.
        std::vector<std::pair<int, double>> t;
        t.emplace_back(g0 + static_cast<int>(i), 1.0);
        for (std::size_t u = 0; u < dm.U; ++u)
            if (dm.bw[i][u] != 0.0)
                t.emplace_back(static_cast<int>(u), -dm.psi[i] * dm.bw[i][u]);
        prog.add_row(RowSense::GE, -dm.psi[i] * dm.q[i], std::move(t));
    }
    return mip;
}

namespace {

/// Directions along which the net payoff could grow without bound: the
/// coordinate axes plus the positive part of every order's weight vector.
std::vector<std::vector<double>> recession_directions(const DenseMarket& dm) {
    std::vector<std::vector<double>> dirs;
    for (std::size_t u = 0; u < dm.U; ++u) {
        std::vector<double> d(dm.U, 0.0);
        d[u] = 1.0;
        dirs.push_back(std::move(d));
    }
    auto add_weight_dir = [&](const std::vector<double>& w) {
        std::vector<double> d(dm.U, 0.0);
        double norm = 0.0;
        for (std::size_t u = 0; u < dm.U; ++u) {
            d[u] = std::max(w[u], 0.0);
            norm += d[u] * d[u];
        }
        if (norm <= 0.0) return;
        norm = std::sqrt(norm);
        for (double& v : d) v /= norm;
        for (const auto& e : dirs)
            if (near_point(e, d, 1e-12)) return;
        dirs.push_back(std::move(d));
    };
    for (const auto& w : dm.aw) add_weight_dir(w);
    for (const auto& w : dm.bw) add_weight_dir(w);
    return dirs;
}

/// Asymptotic growth rate of the net payoff along ray t * dir as t grows
/// without bound. Each option contributes phi * w'dir when that is positive
/// (the max eventually activates) and nothing otherwise, so the rate is a
/// linear function of the fills with O(weight) coefficients.
double asymptotic_slope(const DenseMarket& dm, std::span<const double> gamma,
                        std::span<const double> delta, std::span<const double> dir) {
    double slope = 0.0;
    for (std::size_t i = 0; i < dm.M; ++i) {
        double wd = 0.0;
        for (std::size_t u = 0; u < dm.U; ++u) wd += dm.aw[i][u] * dir[u];
        slope += gamma[i] * dm.qb[i] * std::max(dm.phi[i] * wd, 0.0);
    }
    for (std::size_t i = 0; i < dm.N; ++i) {
        double wd = 0.0;
        for (std::size_t u = 0; u < dm.U; ++u) wd += dm.bw[i][u] * dir[u];
        slope -= delta[i] * dm.qs[i] * std::max(dm.psi[i] * wd, 0.0);
    }
    return slope;
}

struct GenerationState {
    std::vector<ConstraintRecord> C;
    std::vector<std::vector<double>> slope_dirs;  // recession rays already cut off
    std::vector<double> gamma, delta;
    double L = 0.0;
    double upper_obj = 0.0;
    long iterations = 0;
    MatchStatus status = MatchStatus::Unconverged;
};

/// One full constraint-generation run (used for the profit phase and again
/// for the optional volume phase). Returns when the lower level certifies
/// the incumbent fills, the iteration budget runs out, or a duplicate cut
/// signals a stall.
void run_generation(const MarketInstance& m, const DenseMarket& dm,
                    const ComboMatchOptions& opts, const MilpOptions& mopts,
                    const ComboScale& sc, long budget, bool volume_phase,
                    double pinned_objective, GenerationState& st) {
    const std::size_t M = dm.M, N = dm.N;
    auto dirs = recession_directions(dm);
    double prev_upper = lp::kInf;
    long used = 0;

    while (used < budget) {
        ++used;
        ++st.iterations;

        LinearProgram up = build_upper_lp(m, st.C, opts);
        // Recession rows: the net payoff must not grow along any cut-off ray.
        for (const auto& d : st.slope_dirs) {
            std::vector<std::pair<int, double>> terms;
            for (std::size_t i = 0; i < M; ++i) {
                double wd = 0.0;
                for (std::size_t u = 0; u < dm.U; ++u) wd += dm.aw[i][u] * d[u];
                double c = dm.qb[i] * std::max(dm.phi[i] * wd, 0.0);
                if (c != 0.0) terms.emplace_back(static_cast<int>(i), c);
            }
            for (std::size_t i = 0; i < N; ++i) {
                double wd = 0.0;
                for (std::size_t u = 0; u < dm.U; ++u) wd += dm.bw[i][u] * d[u];
                double c = dm.qs[i] * std::max(dm.psi[i] * wd, 0.0);
                if (c != 0.0) terms.emplace_back(static_cast<int>(M + i), -c);
            }
            up.add_row(RowSense::LE, 0.0, std::move(terms));
        }
        if (volume_phase) {
            for (std::size_t i = 0; i < M + N; ++i) up.objective[i] = 1.0;
            up.objective[M + N] = 0.0;
            std::vector<std::pair<int, double>> pin;
            for (std::size_t i = 0; i < M; ++i)
                pin.emplace_back(static_cast<int>(i), -dm.b[i] * dm.qb[i]);
            for (std::size_t i = 0; i < N; ++i)
                pin.emplace_back(static_cast<int>(M + i), dm.a[i] * dm.qs[i]);
            pin.emplace_back(static_cast<int>(M + N), 1.0);
            up.add_row(RowSense::LE, -pinned_objective + 1e-9, std::move(pin));
        }
        SolveReport urep = lp::solve_lp(up, {.tol = opts.tol});
        if (urep.status == SolveStatus::Infeasible) {
            // Only pinned fills can be infeasible (a recession row that the
            // pinned contract alone violates): there is no safe cover.
            st.status = MatchStatus::Stalled;
            return;
        }
        if (urep.status != SolveStatus::Optimal)
            throw std::runtime_error("upper-level LP not optimal: " +
                                     std::string(lp::to_string(urep.status)));
        if (urep.objective > prev_upper + 1e-6 * (1.0 + std::abs(prev_upper)))
            throw std::logic_error("upper-level objective increased across iterations");
        prev_upper = urep.objective;

        st.gamma.assign(urep.x.begin(), urep.x.begin() + M);
        st.delta.assign(urep.x.begin() + M, urep.x.begin() + M + N);
        st.L = urep.x[M + N];
        st.upper_obj = urep.objective;
        auto snap_fill = [&](double v) {
            if (v < 10.0 * opts.tol) return 0.0;
            if (v > 1.0 - 10.0 * opts.tol) return 1.0;
            return std::clamp(v, 0.0, 1.0);
        };
        for (double& v : st.gamma) v = snap_fill(v);
        for (double& v : st.delta) v = snap_fill(v);

        MixedIntegerProgram low =
            build_lower_milp(m, st.gamma, st.delta, st.L, sc.big_M, sc.s_max);
        MilpOptions mo = mopts;
        mo.bound_cutoff = opts.eps;
        const std::size_t U = dm.U;
        mo.completion = [&dm, U, M, N](const std::vector<double>& x)
            -> std::optional<std::vector<double>> {
            std::vector<double> y(x.size(), 0.0);
            std::span<const double> S(x.data(), U);
            for (std::size_t u = 0; u < U; ++u) y[u] = x[u];
            for (std::size_t i = 0; i < M; ++i) {
                double e = dm.buy_affine(i, S);
                y[U + i] = std::max(e, 0.0);
                y[U + M + N + i] = e >= 0.0 ? 1.0 : 0.0;
            }
            for (std::size_t i = 0; i < N; ++i)
                y[U + M + i] = std::max(dm.sell_affine(i, S), 0.0);
            return y;
        };
        SolveReport lrep = lp::solve_milp(low, mo);

        bool converged_on_box = false;
        if (lrep.status == SolveStatus::CutoffReached) {
            converged_on_box = true;
        } else if (lrep.status == SolveStatus::Optimal) {
            converged_on_box = lrep.objective <= opts.eps;
        } else if (lrep.status == SolveStatus::NodeLimit) {
            // A violating incumbent still makes progress; otherwise give up.
            if (lrep.x.empty() || lrep.objective <= opts.eps) {
                st.status = MatchStatus::Unconverged;
                return;
            }
        } else {
            throw std::runtime_error("lower-level MILP failed: " +
                                     std::string(lp::to_string(lrep.status)));
        }

        bool progressed = false;

        if (!converged_on_box) {
            std::span<const double> S(lrep.x.data(), dm.U);
            // Linearization sanity: the MILP's payoffs must match direct
            // evaluation at its own maximizer.
            double z = -st.L;
            for (std::size_t i = 0; i < M; ++i) {
                double pay = std::max(dm.buy_affine(i, S), 0.0);
                z += st.gamma[i] * dm.qb[i] * pay;
                if (st.gamma[i] > 1e-7 &&
                    std::abs(lrep.x[dm.U + i] - pay) > 1e-6 * (1.0 + std::abs(pay)))
                    throw std::logic_error("lower-level linearization mismatch on a buy payoff");
            }
            for (std::size_t i = 0; i < N; ++i) {
                double pay = std::max(dm.sell_affine(i, S), 0.0);
                z -= st.delta[i] * dm.qs[i] * pay;
                if (st.delta[i] > 1e-7 &&
                    std::abs(lrep.x[dm.U + M + i] - pay) > 1e-6 * (1.0 + std::abs(pay)))
                    throw std::logic_error("lower-level linearization mismatch on a sell payoff");
            }
            if (std::abs(z - lrep.objective) > 1e-5 * (1.0 + std::abs(z)))
                throw std::logic_error("lower-level objective disagrees with direct evaluation");

            for (const ConstraintRecord& rec : st.C) {
                if (near_point(rec.price_point, S, 1e-9)) {
                    st.status = MatchStatus::Stalled;
                    return;
                }
            }
            st.C.push_back(record_at(m, S));
            progressed = true;
        }

        // Cut off every recession ray the current fills still grow along.
        // The tolerance tracks the fill noise the LP can leave behind, or
        // the check would chase epsilon slopes forever.
        for (const auto& d : dirs) {
            double slope_scale = 0.0;
            for (std::size_t i = 0; i < dm.M; ++i) {
                double wd = 0.0;
                for (std::size_t u = 0; u < dm.U; ++u) wd += dm.aw[i][u] * d[u];
                slope_scale += dm.qb[i] * std::abs(wd);
            }
            for (std::size_t i = 0; i < dm.N; ++i) {
                double wd = 0.0;
                for (std::size_t u = 0; u < dm.U; ++u) wd += dm.bw[i][u] * d[u];
                slope_scale += dm.qs[i] * std::abs(wd);
            }
            double slope_tol = opts.eps / sc.s_max + 10.0 * opts.tol * (1.0 + slope_scale);
            if (asymptotic_slope(dm, st.gamma, st.delta, d) <= slope_tol) continue;
            bool known = false;
            for (const auto& e : st.slope_dirs)
                if (near_point(e, d, 1e-12)) { known = true; break; }
            if (known) {
                // The row is already enforced yet the slope persists: no
                // further cut can make progress.
                st.status = MatchStatus::Stalled;
                return;
            }
            st.slope_dirs.push_back(d);
            progressed = true;
        }
        if (progressed) continue;

        st.status = MatchStatus::Optimal;
        return;
    }
    st.status = MatchStatus::Unconverged;
}

}  // namespace

MatchResult match_combinatorial(const MarketInstance& m, const ComboMatchOptions& opts) {
    if (!(opts.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    DenseMarket dm(m);
    ComboScale sc = combo_scale(m, opts);
    const long budget =
        opts.max_iter > 0 ? opts.max_iter : 10 * static_cast<long>(dm.M + dm.N) + 100;

    MilpOptions mopts;
    mopts.simplex.tol = opts.tol;
    mopts.node_limit = opts.node_limit;

    GenerationState st;
    std::vector<double> zero(dm.U, 0.0);
    st.C.push_back(record_at(m, zero));

    run_generation(m, dm, opts, mopts, sc, budget, /*volume_phase=*/false, 0.0, st);

    if (st.status == MatchStatus::Optimal && opts.prefer_volume && dm.M + dm.N > 0) {
        double pinned = st.upper_obj;
        GenerationState vol;
        vol.C = st.C;
        vol.slope_dirs = st.slope_dirs;
        vol.iterations = st.iterations;
        run_generation(m, dm, opts, mopts, sc, budget, /*volume_phase=*/true, pinned, vol);
        if (vol.status == MatchStatus::Optimal) st = std::move(vol);
    }

    MatchResult res;
    res.status = st.status;
    res.gamma = st.gamma;
    res.delta = st.delta;
    res.offset_L = st.L;
    res.iterations = st.iterations;
    res.constraints = std::move(st.C);
    double obj = -res.offset_L;
    for (std::size_t i = 0; i < dm.M; ++i) obj += dm.b[i] * dm.qb[i] * res.gamma[i];
    for (std::size_t i = 0; i < dm.N; ++i) obj -= dm.a[i] * dm.qs[i] * res.delta[i];
    res.objective = std::abs(obj) < 1e-12 ? 0.0 : obj;
    return res;
}

std::pair<PriceVector, double> brute_force_violation(const MarketInstance& m,
                                                     std::span<const double> gamma,
                                                     std::span<const double> delta, double L,
                                                     double box) {
    DenseMarket dm(m);
    const std::size_t U = dm.U;
    if (U < 1 || U > 4)
        throw std::invalid_argument("violation oracle handles 1 to 4 assets");

    // Hyperplanes w'S = K from distinct contracts (the payoff kinks),
    // normalized to a canonical orientation for dedup.
    std::vector<std::pair<std::vector<double>, double>> planes;
    auto add_plane = [&](const std::vector<double>& w, double K) {
        double scale = 0.0, sign = 1.0;
        for (std::size_t u = 0; u < U; ++u) {
            if (scale == 0.0 && w[u] != 0.0) sign = w[u] > 0 ? 1.0 : -1.0;
            scale = std::max(scale, std::abs(w[u]));
        }
        if (scale <= 0.0) return;  // constant payoff, no kink
        std::vector<double> row(U);
        for (std::size_t u = 0; u < U; ++u) row[u] = sign * w[u] / scale;
        double k = sign * K / scale;
        for (auto& [pw, pk] : planes) {
            bool same = std::abs(pk - k) <= 1e-12;
            for (std::size_t u = 0; same && u < U; ++u)
                same = std::abs(pw[u] - row[u]) <= 1e-12;
            if (same) return;
        }
        planes.emplace_back(std::move(row), k);
    };
    for (std::size_t i = 0; i < dm.M; ++i) add_plane(dm.aw[i], dm.p[i]);
    for (std::size_t i = 0; i < dm.N; ++i) add_plane(dm.bw[i], dm.q[i]);
    if (planes.size() > 25)
        throw std::invalid_argument("violation oracle refuses instances beyond ~25 planes");

    // Append coordinate planes and box faces.
    for (std::size_t u = 0; u < U; ++u) {
        std::vector<double> e(U, 0.0);
        e[u] = 1.0;
        planes.emplace_back(e, 0.0);
        planes.emplace_back(std::move(e), box);
    }

    const std::size_t H = planes.size();
    std::vector<std::size_t> idx(U);
    PriceVector best;
    best.values.assign(U, 0.0);
    double best_z = net_exchange_payoff(m, gamma, delta, best.values) - L;

    // Enumerate all U-subsets of planes; each nonsingular system is a
    // candidate arrangement vertex.
    std::vector<double> A(U * U), rhs(U), S(U);
    auto try_vertex = [&]() {
        for (std::size_t r = 0; r < U; ++r) {
            const auto& [w, k] = planes[idx[r]];
            for (std::size_t c = 0; c < U; ++c) A[r * U + c] = w[c];
            rhs[r] = k;
        }
        // Gaussian elimination with partial pivoting.
        std::vector<double> a = A, x = rhs;
        std::vector<std::size_t> perm(U);
        for (std::size_t i = 0; i < U; ++i) perm[i] = i;
        for (std::size_t col = 0; col < U; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < U; ++r)
                if (std::abs(a[r * U + col]) > std::abs(a[piv * U + col])) piv = r;
            if (std::abs(a[piv * U + col]) < 1e-10) return;  // singular: no vertex
            if (piv != col) {
                for (std::size_t c = 0; c < U; ++c) std::swap(a[col * U + c], a[piv * U + c]);
                std::swap(x[col], x[piv]);
            }
            for (std::size_t r = col + 1; r < U; ++r) {
                double f = a[r * U + col] / a[col * U + col];
                if (f == 0.0) continue;
                for (std::size_t c = col; c < U; ++c) a[r * U + c] -= f * a[col * U + c];
                x[r] -= f * x[col];
            }
        }
        for (std::size_t i = U; i-- > 0;) {
            double acc = x[i];
            for (std::size_t c = i + 1; c < U; ++c) acc -= a[i * U + c] * S[c];
            S[i] = acc / a[i * U + i];
        }
        for (std::size_t u = 0; u < U; ++u) {
            if (S[u] < -1e-7 || S[u] > box + 1e-7) return;
            S[u] = std::clamp(S[u], 0.0, box);
        }
        double z = net_exchange_payoff(m, gamma, delta, S) - L;
        if (z > best_z) {
            best_z = z;
            best.values = S;
        }
    };

    // Lexicographic combinations of size U out of H.
    for (std::size_t i = 0; i < U; ++i) idx[i] = i;
    if (H >= U) {
        while (true) {
            try_vertex();
            std::size_t i = U;
            while (i-- > 0) {
                if (idx[i] != i + H - U) {
                    ++idx[i];
                    for (std::size_t j = i + 1; j < U; ++j) idx[j] = idx[j - 1] + 1;
                    break;
                }
                if (i == 0) return {best, best_z};
            }
        }
    }
    return {best, best_z};
}

namespace {

std::optional<double> combo_quote(const MarketInstance& m, const OptionContract& target,
                                  Side side, const ComboMatchOptions& opts) {
    MarketInstance aug = m;
    for (const auto& [ticker, w] : target.weights)
        if (!aug.universe.contains(ticker))
            throw std::invalid_argument("quote target references unknown asset: " + ticker);
    ComboMatchOptions q = opts;
    q.prefer_volume = false;
    if (side == Side::Sell) {
        aug.sells.push_back(Order{"__quote_target", Side::Sell, target, 0.0, 1.0});
        q.pin_sell = aug.sells.size() - 1;
    } else {
        aug.buys.push_back(Order{"__quote_target", Side::Buy, target, 0.0, 1.0});
        q.pin_buy = aug.buys.size() - 1;
    }
    MatchResult res = match_combinatorial(aug, q);
    if (res.status != MatchStatus::Optimal) return std::nullopt;
    return side == Side::Sell ? std::max(res.objective, 0.0) : std::max(-res.objective, 0.0);
}

}  // namespace

std::optional<double> combo_quote_bid(const MarketInstance& m, const OptionContract& target,
                                      const ComboMatchOptions& opts) {
    return combo_quote(m, target, Side::Sell, opts);
}

std::optional<double> combo_quote_ask(const MarketInstance& m, const OptionContract& target,
                                      const ComboMatchOptions& opts) {
    return combo_quote(m, target, Side::Buy, opts);
}

}  // namespace optclear
