#include "optclear/milp.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace optclear::lp {

namespace {

constexpr double kEps = 1e-12;

struct Presolved {
    LinearProgram lp;  // rows normalized to LE/EQ, possibly tightened
    bool infeasible = false;
};

double term_min(double c, double lo, double hi) { return c >= 0 ? c * lo : c * hi; }
double term_max(double c, double lo, double hi) { return c >= 0 ? c * hi : c * lo; }

/// Bound propagation and big-M coefficient tightening. Both transformations
/// preserve every solution with integral binaries, so the MILP optimum is
/// unchanged while the LP relaxation gets tighter.
Presolved presolve(const MixedIntegerProgram& mip, const MilpOptions& opts) {
    Presolved out;
    out.lp = mip.lp;
    LinearProgram& lp = out.lp;

    std::vector<char> is_bin(lp.num_vars(), 0);
    for (int j : mip.binary_vars) {
        is_bin[j] = 1;
        lp.lower[j] = std::max(lp.lower[j], 0.0);
        lp.upper[j] = std::min(lp.upper[j], 1.0);
    }

    // Normalize GE rows to LE.
    for (auto& row : lp.rows) {
        if (row.sense == RowSense::GE) {
            for (auto& [j, c] : row.terms) c = -c;
            row.rhs = -row.rhs;
            row.sense = RowSense::LE;
        }
    }

    auto snap_binary = [&](int j) {
        if (!is_bin[j]) return;
        if (lp.lower[j] > opts.int_tol) lp.lower[j] = 1.0;
        else lp.lower[j] = std::max(lp.lower[j], 0.0);
        if (lp.upper[j] < 1.0 - opts.int_tol) lp.upper[j] = 0.0;
        else lp.upper[j] = std::min(lp.upper[j], 1.0);
    };

    std::vector<char> dead(lp.rows.size(), 0);
    for (int round = 0; round < 15; ++round) {
        bool changed = false;

        for (std::size_t r = 0; r < lp.rows.size(); ++r) {
            if (dead[r]) continue;
            auto& row = lp.rows[r];

            // Implied variable bounds from the row.
            auto propagate_le = [&](const std::vector<std::pair<int, double>>& terms, double rhs) {
                double min_finite = 0.0;
                int n_inf = 0;
                for (auto& [j, c] : terms) {
                    double v = term_min(c, lp.lower[j], lp.upper[j]);
                    if (std::isinf(v)) ++n_inf;
                    else min_finite += v;
                }
                for (auto& [j, c] : terms) {
                    if (c == 0.0) continue;
                    double own = term_min(c, lp.lower[j], lp.upper[j]);
                    double rest;
                    if (n_inf == 0) rest = min_finite - own;
                    else if (n_inf == 1 && std::isinf(own)) rest = min_finite;
                    else continue;
                    double limit = (rhs - rest) / c;
                    if (c > 0) {
                        if (limit < lp.upper[j] - 1e-9 * (1.0 + std::abs(limit))) {
                            lp.upper[j] = limit;
                            snap_binary(j);
                            changed = true;
                        }
                    } else {
                        if (limit > lp.lower[j] + 1e-9 * (1.0 + std::abs(limit))) {
                            lp.lower[j] = limit;
                            snap_binary(j);
                            changed = true;
                        }
                    }
                    if (lp.lower[j] > lp.upper[j] + 1e-9) out.infeasible = true;
                }
            };

            propagate_le(row.terms, row.rhs);
            if (row.sense == RowSense::EQ) {
                auto neg = row.terms;
                for (auto& [j, c] : neg) c = -c;
                propagate_le(neg, -row.rhs);
            }
            if (out.infeasible) return out;

            // Coefficient tightening on binaries (LE rows only).
            if (row.sense != RowSense::LE) continue;
            for (std::size_t t = 0; t < row.terms.size(); ++t) {
                auto [j, c] = row.terms[t];
                if (!is_bin[j] || lp.lower[j] == lp.upper[j] || c == 0.0) continue;
                double u = 0.0;
                bool inf_rest = false;
                for (std::size_t s = 0; s < row.terms.size(); ++s) {
                    if (s == t) continue;
                    auto [k, ck] = row.terms[s];
                    double v = term_max(ck, lp.lower[k], lp.upper[k]);
                    if (std::isinf(v)) { inf_rest = true; break; }
                    u += v;
                }
                if (inf_rest) continue;
                if (c > 0) {
                    if (u + c <= row.rhs + kEps) { dead[r] = 1; changed = true; break; }
                    if (u < row.rhs - kEps) {
                        row.terms[t].second = c - (row.rhs - u);
                        row.rhs = u;
                        changed = true;
                    }
                } else {
                    if (u <= row.rhs + kEps) { dead[r] = 1; changed = true; break; }
                    if (u < row.rhs - c - kEps) {
                        row.terms[t].second = row.rhs - u;
                        changed = true;
                    }
                }
            }
        }
        if (!changed) break;
    }

    std::vector<LinearProgram::Row> kept;
    kept.reserve(lp.rows.size());
    for (std::size_t r = 0; r < lp.rows.size(); ++r)
        if (!dead[r]) kept.push_back(std::move(lp.rows[r]));
    lp.rows = std::move(kept);
    return out;
}

bool verify_point(const LinearProgram& lp, const std::vector<double>& lo,
                  const std::vector<double>& hi, const std::vector<int>& binaries,
                  const std::vector<double>& x, double tol, double int_tol) {
    if (static_cast<int>(x.size()) != lp.num_vars()) return false;
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (std::isnan(x[j])) return false;
        double btol = tol * (1.0 + std::abs(x[j]));
        if (x[j] < lo[j] - btol || x[j] > hi[j] + btol) return false;
    }
    for (int j : binaries) {
        if (std::abs(x[j] - std::round(x[j])) > int_tol) return false;
    }
    for (const auto& row : lp.rows) {
        double act = 0.0, scale = 1.0;
        for (auto& [j, c] : row.terms) {
            act += c * x[j];
            scale = std::max(scale, std::abs(c * x[j]));
        }
        double ftol = tol * scale;
        switch (row.sense) {
            case RowSense::LE: if (act > row.rhs + ftol) return false; break;
            case RowSense::GE: if (act < row.rhs - ftol) return false; break;
            case RowSense::EQ: if (std::abs(act - row.rhs) > ftol) return false; break;
        }
    }
    return true;
}

double eval_objective(const LinearProgram& lp, const std::vector<double>& x) {
    double obj = lp.objective_offset;
    for (int j = 0; j < lp.num_vars(); ++j) obj += lp.objective[j] * x[j];
    return obj;
}

}  // namespace

SolveReport solve_milp(const MixedIntegerProgram& mip, const MilpOptions& opts) {
    for (int j : mip.binary_vars)
        if (j < 0 || j >= mip.lp.num_vars())
            throw std::invalid_argument("binary index out of range");

    SolveReport rep;
    Presolved pre = presolve(mip, opts);
    if (pre.infeasible) {
        rep.status = SolveStatus::Infeasible;
        return rep;
    }

    LinearProgram& work = pre.lp;
    const std::vector<double> base_lo = work.lower;
    const std::vector<double> base_hi = work.upper;

    struct Node {
        int parent = -1;
        int var = -1;
        double lo = -kInf, hi = kInf;
        double bound = kInf;
        long id = 0;
    };
    std::vector<Node> arena;
    arena.push_back(Node{});

    auto cmp = [&arena](int a, int b) {
        if (arena[a].bound != arena[b].bound) return arena[a].bound < arena[b].bound;
        return arena[a].id > arena[b].id;
    };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> open(cmp);
    open.push(0);

    double inc_obj = -kInf;
    std::vector<double> inc_x;
    long next_id = 1;
    long nodes = 0;
    long iters = 0;

    auto consider_incumbent = [&](const std::vector<double>& x, double obj) {
        if (obj > inc_obj) {
            inc_obj = obj;
            inc_x = x;
        }
    };

    auto finish = [&](SolveStatus status, double bound) -> SolveReport& {
        rep.status = status;
        rep.nodes = nodes;
        rep.iterations = iters;
        rep.bound = bound;
        if (!inc_x.empty()) {
            rep.x = inc_x;
            rep.objective = inc_obj;
        } else {
            rep.objective = bound;
        }
        return rep;
    };

    auto global_ub = [&](double extra) {
        double g = std::max(inc_obj, extra);
        if (!open.empty()) g = std::max(g, arena[open.top()].bound);
        return g;
    };

    while (!open.empty()) {
        int ni = open.top();
        open.pop();
        double node_bound = arena[ni].bound;
        if (node_bound <= inc_obj + opts.gap_tol)
            return finish(SolveStatus::Optimal, inc_obj);

        work.lower = base_lo;
        work.upper = base_hi;
        for (int c = ni; c > 0; c = arena[c].parent) {
            int v = arena[c].var;
            work.lower[v] = std::max(work.lower[v], arena[c].lo);
            work.upper[v] = std::min(work.upper[v], arena[c].hi);
        }

        SolveReport lprep = solve_lp(work, opts.simplex);
        ++nodes;
        iters += lprep.iterations;

        if (lprep.status == SolveStatus::Unbounded)
            return finish(SolveStatus::Unbounded, kInf);
        if (lprep.status != SolveStatus::Optimal && lprep.status != SolveStatus::Infeasible)
            return finish(lprep.status, node_bound);

        double relax_obj = -kInf;
        if (lprep.status == SolveStatus::Optimal) {
            relax_obj = lprep.objective;

            if (relax_obj > inc_obj + opts.gap_tol) {
                if (opts.completion) {
                    if (auto cand = opts.completion(lprep.x)) {
                        if (verify_point(work, base_lo, base_hi, mip.binary_vars, *cand,
                                         opts.simplex.tol, opts.int_tol))
                            consider_incumbent(*cand, eval_objective(work, *cand));
                    }
                }

                int frac = -1;
                for (int j : mip.binary_vars) {
                    double v = lprep.x[j];
                    if (std::abs(v - std::round(v)) > opts.int_tol) { frac = j; break; }
                }

                if (frac < 0) {
                    bool all_fixed = true;
                    for (int j : mip.binary_vars)
                        if (work.lower[j] != work.upper[j]) { all_fixed = false; break; }
                    if (all_fixed) {
                        consider_incumbent(lprep.x, relax_obj);
                    } else {
                        // Integral within tolerance only: certify by re-solving
                        // with the binaries hard-fixed so the incumbent is an
                        // exactly feasible point.
                        auto save_lo = work.lower;
                        auto save_hi = work.upper;
                        for (int j : mip.binary_vars) {
                            double r = std::round(lprep.x[j]);
                            work.lower[j] = r;
                            work.upper[j] = r;
                        }
                        SolveReport fixed = solve_lp(work, opts.simplex);
                        iters += fixed.iterations;
                        work.lower = std::move(save_lo);
                        work.upper = std::move(save_hi);
                        bool settled = false;
                        if (fixed.status == SolveStatus::Optimal) {
                            consider_incumbent(fixed.x, fixed.objective);
                            settled = relax_obj - fixed.objective <= opts.gap_tol;
                        }
                        if (!settled) {
                            // Rounding lost value; split on the first unfixed
                            // binary so no integral point is discarded.
                            for (int j : mip.binary_vars)
                                if (work.lower[j] != work.upper[j]) { frac = j; break; }
                        }
                    }
                }

                if (frac >= 0) {
                    Node down;
                    down.parent = ni;
                    down.var = frac;
                    down.hi = 0.0;
                    down.bound = relax_obj;
                    down.id = next_id++;
                    arena.push_back(down);
                    open.push(static_cast<int>(arena.size()) - 1);

                    Node up = down;
                    up.lo = 1.0;
                    up.hi = kInf;
                    up.id = next_id++;
                    arena.push_back(up);
                    open.push(static_cast<int>(arena.size()) - 1);
                }
            }
        }

        double gub = global_ub(relax_obj);
        if (opts.bound_cutoff && gub <= *opts.bound_cutoff)
            return finish(SolveStatus::CutoffReached, gub);
        if (nodes >= opts.node_limit)
            return finish(SolveStatus::NodeLimit, gub);
    }

    if (inc_x.empty()) return finish(SolveStatus::Infeasible, -kInf);
    return finish(SolveStatus::Optimal, inc_obj);
}

}  // namespace optclear::lp
