#include "optclear/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace optclear::lp {

namespace {

constexpr double kPivotEps = 1e-9;    // tableau entry treated as zero in ratio tests
constexpr double kDegenStep = 1e-10;  // step length below which a pivot counts as degenerate
constexpr double kSnapEps = 1e-11;    // residual slack snapped into bounds at setup

enum class VarState : unsigned char { AtLower, AtUpper, Free, Basic };

struct Tableau {
    int m = 0;        // rows
    int n = 0;        // total columns (structural + slack + artificial)
    int n_struct = 0;
    int n_slack = 0;
    std::vector<double> a;  // row-major m x n, holds B^{-1}A
    std::vector<double> lo, hi;
    std::vector<VarState> state;
    std::vector<int> basis;     // column basic in each row
    std::vector<double> xb;     // basic variable values
    std::vector<double> rc;     // reduced costs for the active phase
    std::vector<double> cost;   // active-phase objective coefficients

    double* row(int i) { return a.data() + static_cast<std::size_t>(i) * n; }
    const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * n; }

    double nonbasic_value(int j) const {
        switch (state[j]) {
            case VarState::AtLower: return lo[j];
            case VarState::AtUpper: return hi[j];
            default: return 0.0;
        }
    }
};

struct RowMeta {
    double scale = 1.0;  // canonical row = sign * original / scale
    double sign = 1.0;
    int slack = -1;
};

class Simplex {
public:
    Simplex(const LinearProgram& lp, const SimplexOptions& opts) : lp_(lp), opts_(opts) {}

    SolveReport run() {
        SolveReport rep;
        std::string why;
        if (!lp_.well_formed(&why)) throw std::invalid_argument("malformed LP: " + why);
        for (int j = 0; j < lp_.num_vars(); ++j)
            if (lp_.lower[j] > lp_.upper[j]) {
                rep.status = SolveStatus::Infeasible;
                return rep;
            }

        build();
        if (trivially_infeasible_) {
            rep.status = SolveStatus::Infeasible;
            rep.iterations = 0;
            return rep;
        }

        long limit = opts_.iteration_limit > 0
                         ? opts_.iteration_limit
                         : 5000 + 40L * (t_.m + t_.n);

        if (n_art_ > 0) {
            set_phase_costs(/*phase1=*/true);
            SolveStatus s = iterate(limit);
            if (s != SolveStatus::Optimal) {
                rep.status = s == SolveStatus::Unbounded ? SolveStatus::IterationLimit : s;
                rep.iterations = iters_;
                return rep;
            }
            double infeas = 0.0;
            for (int i = 0; i < t_.m; ++i)
                if (t_.basis[i] >= t_.n_struct + t_.n_slack) infeas += std::max(t_.xb[i], 0.0);
            if (infeas > 10.0 * opts_.tol) {
                rep.status = SolveStatus::Infeasible;
                rep.iterations = iters_;
                return rep;
            }
            // Pin artificials at zero for phase 2.
            for (int j = t_.n_struct + t_.n_slack; j < t_.n; ++j) {
                t_.lo[j] = 0.0;
                t_.hi[j] = 0.0;
                if (t_.state[j] != VarState::Basic) t_.state[j] = VarState::AtLower;
            }
        }

        set_phase_costs(/*phase1=*/false);
        SolveStatus s = iterate(limit);
        rep.status = s;
        rep.iterations = iters_;
        if (s != SolveStatus::Optimal) return rep;

        extract(rep);
        return rep;
    }

private:
    const LinearProgram& lp_;
    SimplexOptions opts_;
    Tableau t_;
    std::vector<RowMeta> meta_;
    int n_art_ = 0;
    long iters_ = 0;
    bool bland_ = false;
    int degen_streak_ = 0;
    bool trivially_infeasible_ = false;

    void build() {
        const int nv = lp_.num_vars();
        const int m_all = static_cast<int>(lp_.rows.size());

        // Initial point for structural variables.
        std::vector<VarState> st(nv);
        for (int j = 0; j < nv; ++j) {
            if (lp_.lower[j] > -kInf) st[j] = VarState::AtLower;
            else if (lp_.upper[j] < kInf) st[j] = VarState::AtUpper;
            else st[j] = VarState::Free;
        }
        auto init_value = [&](int j) {
            return st[j] == VarState::AtLower ? lp_.lower[j]
                 : st[j] == VarState::AtUpper ? lp_.upper[j]
                                              : 0.0;
        };

        // Scan rows once to count artificials and record canonical data.
        struct RowBuild {
            std::vector<std::pair<int, double>> terms;
            double rhs = 0.0;
            double slo = 0.0, shi = 0.0;
            double slack0 = 0.0;  // nonbasic slack value when an artificial is used
            bool art = false;
            double basic0 = 0.0;  // initial basic value (slack or artificial)
        };
        std::vector<RowBuild> rb;
        rb.reserve(m_all);
        meta_.assign(m_all, RowMeta{});

        for (int i = 0; i < m_all; ++i) {
            const auto& r = lp_.rows[i];
            double scale = 0.0;
            for (auto& [j, c] : r.terms) scale = std::max(scale, std::abs(c));
            if (scale <= 0.0) {
                // Constant row: check directly and drop.
                bool ok = (r.sense == RowSense::LE && 0.0 <= r.rhs + opts_.tol) ||
                          (r.sense == RowSense::GE && 0.0 >= r.rhs - opts_.tol) ||
                          (r.sense == RowSense::EQ && std::abs(r.rhs) <= opts_.tol);
                if (!ok) trivially_infeasible_ = true;
                meta_[i].slack = -1;
                continue;
            }
            RowBuild b;
            b.terms = r.terms;
            b.rhs = r.rhs;
            double sign = 1.0;
            for (auto& [j, c] : b.terms) c /= scale;
            b.rhs /= scale;

            switch (r.sense) {
                case RowSense::LE: b.slo = 0.0;   b.shi = kInf; break;
                case RowSense::GE: b.slo = -kInf; b.shi = 0.0;  break;
                case RowSense::EQ: b.slo = 0.0;   b.shi = 0.0;  break;
            }

            double resid = b.rhs;
            for (auto& [j, c] : b.terms) resid -= c * init_value(j);

            if (resid >= b.slo - kSnapEps && resid <= b.shi + kSnapEps) {
                b.art = false;
                b.basic0 = std::clamp(resid, b.slo, b.shi);
                b.slack0 = 0.0;
            } else {
                b.art = true;
                double s0 = std::clamp(resid, b.slo, b.shi);
                if (s0 == kInf || s0 == -kInf) s0 = 0.0;
                double v = resid - s0;
                if (v < 0.0) {
                    // Negate the row so the artificial starts nonnegative.
                    sign = -1.0;
                    for (auto& [j, c] : b.terms) c = -c;
                    b.rhs = -b.rhs;
                    double nlo = -b.shi, nhi = -b.slo;
                    b.slo = nlo;
                    b.shi = nhi;
                    s0 = -s0;
                    v = -v;
                }
                b.slack0 = s0;
                b.basic0 = v;
                ++n_art_;
            }
            meta_[i].scale = scale;
            meta_[i].sign = sign;
            meta_[i].slack = static_cast<int>(rb.size());  // row index for now
            rb.push_back(std::move(b));
        }

        const int m = static_cast<int>(rb.size());
        t_.m = m;
        t_.n_struct = nv;
        t_.n_slack = m;
        t_.n = nv + m + n_art_;
        t_.a.assign(static_cast<std::size_t>(m) * t_.n, 0.0);
        t_.lo.assign(t_.n, 0.0);
        t_.hi.assign(t_.n, 0.0);
        t_.state.assign(t_.n, VarState::AtLower);
        t_.basis.assign(m, -1);
        t_.xb.assign(m, 0.0);

        for (int j = 0; j < nv; ++j) {
            t_.lo[j] = lp_.lower[j];
            t_.hi[j] = lp_.upper[j];
            t_.state[j] = st[j];
        }

        int art_next = nv + m;
        for (int i = 0; i < m; ++i) {
            const RowBuild& b = rb[i];
            double* row = t_.row(i);
            for (auto& [j, c] : b.terms) row[j] += c;
            int js = nv + i;
            row[js] = 1.0;
            t_.lo[js] = b.slo;
            t_.hi[js] = b.shi;
            if (b.art) {
                int ja = art_next++;
                row[ja] = 1.0;
                t_.lo[ja] = 0.0;
                t_.hi[ja] = kInf;
                t_.state[ja] = VarState::Basic;
                t_.basis[i] = ja;
                t_.xb[i] = b.basic0;
                t_.state[js] = (b.slack0 <= b.slo) ? VarState::AtLower : VarState::AtUpper;
                if (t_.state[js] == VarState::AtLower && b.slo == -kInf)
                    t_.state[js] = VarState::AtUpper;
            } else {
                t_.state[js] = VarState::Basic;
                t_.basis[i] = js;
                t_.xb[i] = b.basic0;
            }
        }

        // Map slack of original row -> column index.
        for (int i = 0; i < m_all; ++i)
            if (meta_[i].slack >= 0) meta_[i].slack += nv;  // rb index == canonical row index
    }

    void set_phase_costs(bool phase1) {
        t_.cost.assign(t_.n, 0.0);
        if (phase1) {
            for (int j = t_.n_struct + t_.n_slack; j < t_.n; ++j) t_.cost[j] = -1.0;
        } else {
            for (int j = 0; j < t_.n_struct; ++j) t_.cost[j] = lp_.objective[j];
        }
        // rc = c - c_B B^{-1} A, computed from the current tableau.
        t_.rc = t_.cost;
        for (int i = 0; i < t_.m; ++i) {
            double cb = t_.cost[t_.basis[i]];
            if (cb == 0.0) continue;
            const double* row = t_.row(i);
            for (int j = 0; j < t_.n; ++j) t_.rc[j] -= cb * row[j];
        }
    }

    bool eligible(int j, int& dir) const {
        if (t_.state[j] == VarState::Basic) return false;
        if (t_.lo[j] == t_.hi[j]) return false;  // fixed
        double r = t_.rc[j];
        switch (t_.state[j]) {
            case VarState::AtLower:
                if (r > opts_.tol) { dir = +1; return true; }
                return false;
            case VarState::AtUpper:
                if (r < -opts_.tol) { dir = -1; return true; }
                return false;
            case VarState::Free:
                if (std::abs(r) > opts_.tol) { dir = r > 0 ? +1 : -1; return true; }
                return false;
            default: return false;
        }
    }

    SolveStatus iterate(long limit) {
        while (true) {
            if (iters_ >= limit) return SolveStatus::IterationLimit;

            // Pricing.
            int enter = -1, dir = 0;
            if (bland_) {
                for (int j = 0; j < t_.n; ++j) {
                    int d;
                    if (eligible(j, d)) { enter = j; dir = d; break; }
                }
            } else {
                double best = 0.0;
                for (int j = 0; j < t_.n; ++j) {
                    int d;
                    if (!eligible(j, d)) continue;
                    double v = std::abs(t_.rc[j]);
                    if (v > best + 1e-12) { best = v; enter = j; dir = d; }
                }
            }
            if (enter < 0) return SolveStatus::Optimal;

            ++iters_;

            // Ratio test.
            double own_range = t_.hi[enter] - t_.lo[enter];  // inf when unbounded/free
            double tmin = own_range;
            int leave = -1;
            double leave_piv = 0.0;
            for (int i = 0; i < t_.m; ++i) {
                double w = t_.row(i)[enter];
                double dw = dir * w;
                int k = t_.basis[i];
                double ratio;
                if (dw > kPivotEps) {
                    if (t_.lo[k] == -kInf) continue;
                    ratio = (t_.xb[i] - t_.lo[k]) / dw;
                } else if (dw < -kPivotEps) {
                    if (t_.hi[k] == kInf) continue;
                    ratio = (t_.xb[i] - t_.hi[k]) / dw;
                } else {
                    continue;
                }
                if (ratio < 0.0) ratio = 0.0;
                bool better;
                if (leave < 0) better = ratio < tmin;
                else if (bland_) better = ratio < tmin - 1e-12 ||
                                          (ratio <= tmin + 1e-12 && k < t_.basis[leave]);
                else better = ratio < tmin - 1e-9 * (1.0 + tmin) ||
                              (ratio <= tmin + 1e-9 * (1.0 + tmin) &&
                               std::abs(w) > std::abs(leave_piv));
                if (better) {
                    tmin = std::min(ratio, tmin);
                    leave = i;
                    leave_piv = w;
                }
            }

            if (leave < 0 && !(own_range < kInf)) return SolveStatus::Unbounded;

            double step = (leave < 0) ? own_range : std::min(tmin, own_range);
            bool flip = (leave < 0) || (own_range <= tmin);
            if (flip) step = own_range;

            if (step <= kDegenStep) {
                if (++degen_streak_ > 2 * (t_.m + 20)) bland_ = true;
            } else {
                degen_streak_ = 0;
            }

            if (flip) {
                // Entering variable jumps to its opposite bound; basis unchanged.
                for (int i = 0; i < t_.m; ++i) {
                    double w = t_.row(i)[enter];
                    if (w != 0.0) t_.xb[i] -= step * dir * w;
                }
                t_.state[enter] =
                    (t_.state[enter] == VarState::AtLower) ? VarState::AtUpper : VarState::AtLower;
                continue;
            }

            // Pivot.
            double enter_val = t_.nonbasic_value(enter) + step * dir;
            for (int i = 0; i < t_.m; ++i) {
                if (i == leave) continue;
                double w = t_.row(i)[enter];
                if (w != 0.0) t_.xb[i] -= step * dir * w;
            }
            int leaving_var = t_.basis[leave];
            double dw = dir * t_.row(leave)[enter];
            t_.state[leaving_var] = dw > 0 ? VarState::AtLower : VarState::AtUpper;

            eliminate(leave, enter);
            t_.basis[leave] = enter;
            t_.xb[leave] = enter_val;
            t_.state[enter] = VarState::Basic;
        }
    }

    void eliminate(int prow, int pcol) {
        double* pr = t_.row(prow);
        double pv = pr[pcol];
        double inv = 1.0 / pv;
        for (int j = 0; j < t_.n; ++j) pr[j] *= inv;
        pr[pcol] = 1.0;
        for (int i = 0; i < t_.m; ++i) {
            if (i == prow) continue;
            double* ri = t_.row(i);
            double f = ri[pcol];
            if (f == 0.0) continue;
            for (int j = 0; j < t_.n; ++j) ri[j] -= f * pr[j];
            ri[pcol] = 0.0;
        }
        double f = t_.rc[pcol];
        if (f != 0.0) {
            for (int j = 0; j < t_.n; ++j) t_.rc[j] -= f * pr[j];
            t_.rc[pcol] = 0.0;
        }
    }

    void extract(SolveReport& rep) const {
        const int nv = lp_.num_vars();
        rep.x.assign(nv, 0.0);
        for (int j = 0; j < nv; ++j) {
            double v = (t_.state[j] == VarState::Basic) ? 0.0 : t_.nonbasic_value(j);
            rep.x[j] = v;
        }
        for (int i = 0; i < t_.m; ++i)
            if (t_.basis[i] < nv) rep.x[t_.basis[i]] = t_.xb[i];
        for (int j = 0; j < nv; ++j) {
            if (lp_.lower[j] > -kInf) rep.x[j] = std::max(rep.x[j], lp_.lower[j]);
            if (lp_.upper[j] < kInf) rep.x[j] = std::min(rep.x[j], lp_.upper[j]);
        }
        double obj = lp_.objective_offset;
        for (int j = 0; j < nv; ++j) obj += lp_.objective[j] * rep.x[j];
        rep.objective = obj;
        rep.bound = obj;

        rep.row_duals.assign(lp_.rows.size(), 0.0);
        for (std::size_t i = 0; i < lp_.rows.size(); ++i) {
            const RowMeta& mt = meta_[i];
            if (mt.slack < 0) continue;  // constant row dropped at setup
            double y = -t_.rc[mt.slack];
            rep.row_duals[i] = mt.sign * y / mt.scale;
        }
    }
};

}  // namespace

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration_limit";
        case SolveStatus::NodeLimit: return "node_limit";
        case SolveStatus::CutoffReached: return "cutoff_reached";
    }
    return "unknown";
}

int LinearProgram::add_variable(double lo, double hi, double obj) {
    objective.push_back(obj);
    lower.push_back(lo);
    upper.push_back(hi);
    return static_cast<int>(objective.size()) - 1;
}

void LinearProgram::add_row(RowSense sense, double rhs, std::vector<std::pair<int, double>> terms) {
    rows.push_back(Row{std::move(terms), sense, rhs});
}

bool LinearProgram::well_formed(std::string* why) const {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (objective.empty()) return fail("no variables");
    if (lower.size() != objective.size() || upper.size() != objective.size())
        return fail("bound vectors do not match variable count");
    for (std::size_t j = 0; j < objective.size(); ++j) {
        if (std::isnan(lower[j]) || std::isnan(upper[j]) || std::isnan(objective[j]))
            return fail("NaN in variable data");
    }
    for (const Row& r : rows) {
        if (std::isnan(r.rhs)) return fail("NaN right-hand side");
        for (auto& [j, c] : r.terms) {
            if (j < 0 || j >= num_vars()) return fail("row references unknown variable");
            if (std::isnan(c) || std::isinf(c)) return fail("bad row coefficient");
        }
    }
    return true;
}

SolveReport solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
    Simplex s(lp, opts);
    return s.run();
}

}  // namespace optclear::lp
