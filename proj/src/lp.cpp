#include "nsgame/lp.hpp"

#include "nsgame/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nsg {

std::string LinearProgram::dump(const std::vector<std::string>* var_names) const {
    auto name = [&](int j) {
        if (var_names && j < int(var_names->size())) return (*var_names)[j];
        return "x" + std::to_string(j);
    };
    std::ostringstream os;
    os << (sense == Sense::Maximize ? "max " : "min ");
    bool first = true;
    for (int j = 0; j < num_vars; ++j) {
        if (objective[j] == 0.0) continue;
        if (!first) os << " + ";
        os << objective[j] << "*" << name(j);
        first = false;
    }
    if (first) os << "0";
    os << "\nsubject to\n";
    for (const auto& r : rows) {
        first = true;
        for (auto [j, v] : r.coef) {
            if (!first) os << " + ";
            os << v << "*" << name(j);
            first = false;
        }
        if (first) os << "0";
        os << (r.rel == Rel::Le ? " <= " : r.rel == Rel::Ge ? " >= " : " = ") << r.rhs << "\n";
    }
    for (int j = 0; j < num_vars; ++j)
        if (signs[j] == VarSign::NonNegative) os << name(j) << " >= 0\n";
    return os.str();
}

namespace {

// Column roles in the standard-form tableau.
enum class ColKind { Structural, SplitNeg, Slack, Artificial };

struct Standardized {
    // original row transforms
    std::vector<int> row_negated;   // 1 if row multiplied by -1
    std::vector<Rel> row_rel;       // relation after rhs normalization
    // columns
    std::vector<ColKind> kind;
    std::vector<int> owner;         // structural/splitneg: original var; slack/artificial: row
    std::vector<int> split_neg_col; // original var -> its negative-part column (-1 if none)
    std::vector<int> pos_col;       // original var -> its positive-part column
    int ncols = 0;
    bool sense_flipped = false;     // objective negated (Min solved as Max)
};

struct Tableau {
    int m = 0, n = 0;               // rows, columns (excluding rhs)
    std::vector<double> t;          // (m) x (n+1), row-major
    std::vector<int> basis;
    double* row(int i) { return &t[size_t(i) * (n + 1)]; }
    const double* row(int i) const { return &t[size_t(i) * (n + 1)]; }
};

void pivot(Tableau& tb, std::vector<double>& zrow, int r, int c) {
    double* pr = tb.row(r);
    const double inv = 1.0 / pr[c];
    for (int j = 0; j <= tb.n; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (int i = 0; i < tb.m; ++i) {
        if (i == r) continue;
        double* ri = tb.row(i);
        double f = ri[c];
        if (f == 0.0) continue;
        for (int j = 0; j <= tb.n; ++j) ri[j] -= f * pr[j];
        ri[c] = 0.0;
    }
    double f = zrow[c];
    if (f != 0.0) {
        for (int j = 0; j <= tb.n; ++j) zrow[j] -= f * pr[j];
        zrow[c] = 0.0;
    }
    tb.basis[r] = c;
}

// Reduced-cost row for objective c over the current basis.
std::vector<double> make_zrow(const Tableau& tb, const std::vector<double>& c) {
    std::vector<double> z(tb.n + 1, 0.0);
    for (int j = 0; j < tb.n; ++j) z[j] = j < int(c.size()) ? c[j] : 0.0;
    for (int i = 0; i < tb.m; ++i) {
        double cb = tb.basis[i] < int(c.size()) ? c[tb.basis[i]] : 0.0;
        if (cb == 0.0) continue;
        const double* ri = tb.row(i);
        for (int j = 0; j <= tb.n; ++j) z[j] -= cb * ri[j];
    }
    return z;
}

enum class RunResult { OptimalReached, Unbounded, IterationLimit };

// Maximize with reduced costs in zrow.  `enterable` masks columns allowed to
// enter.  Deterministic: Dantzig with lowest-index ties, switching to Bland
// after `stall_limit` non-improving pivots.
RunResult run_simplex(Tableau& tb, std::vector<double>& zrow, const std::vector<char>& enterable,
                      double pivot_tol, long long max_iter) {
    long long stall = 0;
    const long long stall_limit = 200 + 2LL * (tb.m + tb.n);
    double last_obj = -zrow[tb.n];  // zrow carries the negated objective
    for (long long iter = 0; iter < max_iter; ++iter) {
        bool bland = stall > stall_limit;
        int c = -1;
        if (!bland) {
            double best = pivot_tol;
            for (int j = 0; j < tb.n; ++j)
                if (enterable[j] && zrow[j] > best) {
                    best = zrow[j];
                    c = j;
                }
        } else {
            for (int j = 0; j < tb.n; ++j)
                if (enterable[j] && zrow[j] > pivot_tol) {
                    c = j;
                    break;
                }
        }
        if (c < 0) return RunResult::OptimalReached;

        int r = -1;
        double best_ratio = 0.0;
        for (int i = 0; i < tb.m; ++i) {
            double a = tb.row(i)[c];
            if (a <= pivot_tol) continue;
            double ratio = tb.row(i)[tb.n] / a;
            if (r < 0 || ratio < best_ratio - 1e-12 ||
                (ratio < best_ratio + 1e-12 && tb.basis[i] < tb.basis[r])) {
                r = i;
                best_ratio = ratio;
            }
        }
        if (r < 0) return RunResult::Unbounded;
        pivot(tb, zrow, r, c);
        double obj = -zrow[tb.n];
        if (obj > last_obj + 1e-12) {
            stall = 0;
            last_obj = obj;
        } else {
            ++stall;
        }
    }
    return RunResult::IterationLimit;
}

}  // namespace

LpOutcome solve_lp(const LinearProgram& lp) { return solve_lp(lp, LpLimits{}); }

LpOutcome solve_lp(const LinearProgram& lp, const LpLimits& limits) {
    if (int(lp.signs.size()) != lp.num_vars || int(lp.objective.size()) != lp.num_vars)
        throw LpError("malformed linear program: sign/objective size mismatch");
    for (const auto& r : lp.rows)
        for (auto [j, v] : r.coef) {
            if (j < 0 || j >= lp.num_vars) throw LpError("row references unknown variable");
            if (!std::isfinite(v)) throw LpError("non-finite coefficient");
        }

    const int m = int(lp.rows.size());
    Standardized st;
    st.sense_flipped = lp.sense == Sense::Minimize;
    st.split_neg_col.assign(lp.num_vars, -1);
    st.pos_col.assign(lp.num_vars, -1);

    auto add_col = [&](ColKind kind, int owner) {
        st.kind.push_back(kind);
        st.owner.push_back(owner);
        return st.ncols++;
    };
    for (int j = 0; j < lp.num_vars; ++j) {
        st.pos_col[j] = add_col(ColKind::Structural, j);
        if (lp.signs[j] == VarSign::Free) st.split_neg_col[j] = add_col(ColKind::SplitNeg, j);
    }
    st.row_negated.assign(m, 0);
    st.row_rel.assign(m, Rel::Le);
    std::vector<int> slack_col(m, -1), art_col(m, -1);
    for (int i = 0; i < m; ++i) {
        Rel rel = lp.rows[i].rel;
        bool neg = lp.rows[i].rhs < 0.0;
        if (neg) rel = rel == Rel::Le ? Rel::Ge : rel == Rel::Ge ? Rel::Le : Rel::Eq;
        st.row_negated[i] = neg;
        st.row_rel[i] = rel;
        if (rel == Rel::Le) slack_col[i] = add_col(ColKind::Slack, i);
        if (rel == Rel::Ge) slack_col[i] = add_col(ColKind::Slack, i);  // surplus, coef -1
        if (rel != Rel::Le) art_col[i] = add_col(ColKind::Artificial, i);
    }

    Tableau tb;
    tb.m = m;
    tb.n = st.ncols;
    tb.t.assign(size_t(m) * (tb.n + 1), 0.0);
    tb.basis.assign(m, -1);
    for (int i = 0; i < m; ++i) {
        double* ri = tb.row(i);
        double sgn = st.row_negated[i] ? -1.0 : 1.0;
        for (auto [j, v] : lp.rows[i].coef) {
            ri[st.pos_col[j]] += sgn * v;
            if (st.split_neg_col[j] >= 0) ri[st.split_neg_col[j]] -= sgn * v;
        }
        ri[tb.n] = sgn * lp.rows[i].rhs;
        if (st.row_rel[i] == Rel::Le) {
            ri[slack_col[i]] = 1.0;
            tb.basis[i] = slack_col[i];
        } else if (st.row_rel[i] == Rel::Ge) {
            ri[slack_col[i]] = -1.0;
        }
        if (art_col[i] >= 0) {
            ri[art_col[i]] = 1.0;
            tb.basis[i] = art_col[i];
        }
    }

    // Objective in standard columns (maximization).
    std::vector<double> cstd(tb.n, 0.0);
    const double osign = st.sense_flipped ? -1.0 : 1.0;
    for (int j = 0; j < lp.num_vars; ++j) {
        cstd[st.pos_col[j]] = osign * lp.objective[j];
        if (st.split_neg_col[j] >= 0) cstd[st.split_neg_col[j]] = -osign * lp.objective[j];
    }

    const long long max_iter =
        limits.max_iterations > 0 ? limits.max_iterations : 5000 + 64LL * (tb.m + tb.n);

    // Phase 1: maximize -sum(artificials).
    bool need_phase1 = false;
    for (int i = 0; i < m; ++i) need_phase1 |= art_col[i] >= 0;
    std::vector<char> enter_all(tb.n, 1);
    if (need_phase1) {
        std::vector<double> c1(tb.n, 0.0);
        for (int i = 0; i < m; ++i)
            if (art_col[i] >= 0) c1[art_col[i]] = -1.0;
        std::vector<double> z1 = make_zrow(tb, c1);
        RunResult rr = run_simplex(tb, z1, enter_all, limits.pivot_tol, max_iter);
        if (rr == RunResult::IterationLimit) throw LpError("phase-1 iteration limit exceeded");
        if (rr == RunResult::Unbounded) throw LpError("phase-1 unbounded (internal error)");
        if (-z1[tb.n] < -limits.feas_tol * 10.0)
            return LpOutcome{LpStatus::Infeasible, 0.0, {}, {}};
        // Drive basic artificials out where possible.
        for (int i = 0; i < m; ++i) {
            int b = tb.basis[i];
            if (b < 0 || st.kind[b] != ColKind::Artificial) continue;
            int c = -1;
            for (int j = 0; j < tb.n; ++j) {
                if (st.kind[j] == ColKind::Artificial) continue;
                if (std::abs(tb.row(i)[j]) > 1e-7) {
                    c = j;
                    break;
                }
            }
            if (c >= 0) pivot(tb, z1, i, c);
            // Otherwise the row is redundant; the artificial stays basic at
            // value ~0 and its column is blocked below.
        }
    }

    // Phase 2.
    std::vector<char> enterable(tb.n, 1);
    for (int j = 0; j < tb.n; ++j)
        if (st.kind[j] == ColKind::Artificial) enterable[j] = 0;
    std::vector<double> zrow = make_zrow(tb, cstd);
    RunResult rr = run_simplex(tb, zrow, enterable, limits.pivot_tol, max_iter);
    if (rr == RunResult::IterationLimit) throw LpError("phase-2 iteration limit exceeded");
    if (rr == RunResult::Unbounded) return LpOutcome{LpStatus::Unbounded, 0.0, {}, {}};

    LpOutcome out;
    out.status = LpStatus::Optimal;
    out.x.assign(lp.num_vars, 0.0);
    for (int i = 0; i < m; ++i) {
        int b = tb.basis[i];
        double v = tb.row(i)[tb.n];
        if (st.kind[b] == ColKind::Structural) out.x[st.owner[b]] += v;
        if (st.kind[b] == ColKind::SplitNeg) out.x[st.owner[b]] -= v;
    }
    double obj = 0.0;
    for (int j = 0; j < lp.num_vars; ++j) obj += lp.objective[j] * out.x[j];
    out.value = obj;

    // Dual multipliers: y_i = -reduced cost of row i's slack (or artificial)
    // column, mapped back through row/sense normalization.
    out.dual.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double y;
        if (st.row_rel[i] == Rel::Le)
            y = -zrow[slack_col[i]];
        else if (art_col[i] >= 0)
            y = -zrow[art_col[i]];
        else
            y = 0.0;
        if (st.row_negated[i]) y = -y;
        if (st.sense_flipped) y = -y;
        out.dual[i] = y;
    }

    // Verify the claimed optimum before returning it.
    for (int i = 0; i < m; ++i) {
        double lhs = 0.0, scale = std::max(1.0, std::abs(lp.rows[i].rhs));
        for (auto [j, v] : lp.rows[i].coef) {
            lhs += v * out.x[j];
            scale = std::max(scale, std::abs(v));
        }
        double viol = 0.0;
        if (lp.rows[i].rel == Rel::Le) viol = lhs - lp.rows[i].rhs;
        if (lp.rows[i].rel == Rel::Ge) viol = lp.rows[i].rhs - lhs;
        if (lp.rows[i].rel == Rel::Eq) viol = std::abs(lhs - lp.rows[i].rhs);
        if (viol > limits.feas_tol * scale * 100.0)
            throw LpError("solver returned an infeasible optimum (row violation " +
                          std::to_string(viol) + ")");
    }
    for (int j = 0; j < lp.num_vars; ++j)
        if (lp.signs[j] == VarSign::NonNegative && out.x[j] < -limits.feas_tol * 100.0)
            throw LpError("solver returned an infeasible optimum (negative variable)");
    return out;
}

LinearProgram random_feasible_bounded_lp(std::uint64_t seed) {
    SplitMix64 rng(seed);
    LinearProgram lp;
    lp.sense = Sense::Maximize;
    const int n = 2 + int(rng.next_below(4));
    const int m = 1 + int(rng.next_below(4));
    std::vector<double> x0(n);
    for (int j = 0; j < n; ++j) {
        bool free_var = rng.next_double() < 0.3;
        lp.add_var(free_var ? VarSign::Free : VarSign::NonNegative,
                   std::floor(10.0 * (rng.next_double() - 0.5)));
        x0[j] = free_var ? 4.0 * (rng.next_double() - 0.5) : 2.0 * rng.next_double();
    }
    for (int i = 0; i < m; ++i) {
        LpRow r;
        double lhs = 0.0;
        for (int j = 0; j < n; ++j) {
            if (rng.next_double() < 0.3) continue;
            double c = std::floor(10.0 * (rng.next_double() - 0.5)) / 2.0;
            if (c == 0.0) continue;
            r.coef.push_back({j, c});
            lhs += c * x0[j];
        }
        if (r.coef.empty()) r.coef.push_back({0, 1.0}), lhs = x0[0];
        if (rng.next_double() < 0.3) {
            r.rel = Rel::Eq;
            r.rhs = lhs;
        } else {
            r.rel = Rel::Le;
            r.rhs = lhs + rng.next_double();
        }
        lp.add_row(std::move(r));
    }
    // Box every variable so the program is bounded whatever the objective.
    for (int j = 0; j < n; ++j) {
        lp.add_row(LpRow{{{j, 1.0}}, Rel::Le, x0[j] + 5.0});
        if (lp.signs[j] == VarSign::Free)
            lp.add_row(LpRow{{{j, -1.0}}, Rel::Le, -(x0[j] - 5.0)});
    }
    return lp;
}

LinearProgram dualize(const LinearProgram& lp) {
    // Normalize rows to the canonical orientation for the sense: Le rows for
    // a maximization, Ge rows for a minimization; equalities unchanged.
    LinearProgram p = lp;
    const Rel canon = p.sense == Sense::Maximize ? Rel::Le : Rel::Ge;
    const Rel wrong = p.sense == Sense::Maximize ? Rel::Ge : Rel::Le;
    for (auto& r : p.rows) {
        if (r.rel == wrong) {
            for (auto& cv : r.coef) cv.second = -cv.second;
            r.rhs = -r.rhs;
            r.rel = canon;
        }
    }

    LinearProgram d;
    d.sense = p.sense == Sense::Maximize ? Sense::Minimize : Sense::Maximize;
    d.num_vars = int(p.rows.size());
    d.signs.resize(d.num_vars);
    d.objective.resize(d.num_vars);
    for (int i = 0; i < d.num_vars; ++i) {
        d.signs[i] = p.rows[i].rel == Rel::Eq ? VarSign::Free : VarSign::NonNegative;
        d.objective[i] = p.rows[i].rhs;
    }
    // One dual row per primal variable: transpose the coefficients.
    std::vector<LpRow> rows(p.num_vars);
    for (int j = 0; j < p.num_vars; ++j) {
        rows[j].rhs = p.objective[j];
        // Dual of a max has >= rows for nonnegative primal vars; dual of a
        // min has <= rows.  Free primal vars give equality rows either way.
        if (p.signs[j] == VarSign::Free)
            rows[j].rel = Rel::Eq;
        else
            rows[j].rel = p.sense == Sense::Maximize ? Rel::Ge : Rel::Le;
    }
    for (int i = 0; i < int(p.rows.size()); ++i)
        for (auto [j, v] : p.rows[i].coef) rows[j].coef.push_back({i, v});
    d.rows = std::move(rows);
    return d;
}

}  // namespace nsg
