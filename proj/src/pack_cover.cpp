// Mixed packing/covering solver in the multiplicative-weights family.
//
// State: exponential weights on packing rows (growing) and on unmet covering
// rows (shrinking), both tracked against running shifts so the exponents
// never overflow.  Each step raises the single variable with the best ratio
// of covering pull to packing pressure; the step size keeps every packing
// exponent change below an adaptive budget and never pushes a packing load
// past the (1+delta) wall, so any returned solution is valid by
// construction.  If no variable's ratio reaches the weighted threshold, the
// weight vector itself proves the unrelaxed problem infeasible, so
// Infeasible answers are sound regardless of tuning.
#include "nsgame/pack_cover.hpp"

#include <algorithm>
#include <cmath>

namespace nsg {

MixedPackCover restricted_dual_to_mpc(const Game& g, double v_prime) {
    if (v_prime < 0.0) throw PackCoverError("objective cap must be nonnegative");
    NonNegDualLayout ly = NonNegDualLayout::make(g);
    MixedPackCover m;
    m.n = int(ly.total);

    const double nsubsets = double((Mask(1) << g.k()) - 1);
    for (long long j = 0; j < ly.ybar_count; ++j)
        m.packing.push_back(SparseRow{{{int(j), 1.0}}, 1.0});
    for (long long q = 0; q < g.q_count(); ++q)
        for (long long a = 0; a < g.a_count(); ++a) {
            SparseRow row;
            for (Mask s = 1; s <= g.full_mask(); ++s)
                row.coef.push_back({int(ly.ybar(g, s, q, g.restrict_answer(a, s))), 1.0});
            row.bound = nsubsets - (g.accepts(q, a) ? 1.0 : 0.0);
            m.packing.push_back(std::move(row));
        }
    {
        SparseRow cap;
        for (Mask s = 1; s <= g.full_mask(); ++s)
            for (long long qs = 0; qs < g.q_sub_count(s); ++qs)
                cap.coef.push_back({int(ly.z(s, qs)), 1.0});
        cap.bound = v_prime;
        m.packing.push_back(std::move(cap));
    }
    for (Mask s = 1; s <= g.full_mask(); ++s)
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            double fiber_weight = 0.0;
            for (long long q : g.query_fibers(s)[qs]) fiber_weight += g.pi(q);
            for (long long as = 0; as < g.a_sub_count(s); ++as) {
                SparseRow row;
                row.coef.push_back({int(ly.z(s, qs)), 1.0});
                for (long long q : g.query_fibers(s)[qs])
                    if (g.pi(q) > 0.0) row.coef.push_back({int(ly.ybar(g, s, q, as)), g.pi(q)});
                row.bound = fiber_weight;
                m.covering.push_back(std::move(row));
            }
        }
    return m;
}

namespace {

struct Entry {
    int other;   // row id in column lists, column id in row lists
    double val;  // normalized coefficient
};

}  // namespace

namespace {
McOutcome solve_mpc_attempt(const MixedPackCover& m, double delta_apx, double eps_scale);
}

McOutcome solve_mpc(const MixedPackCover& m, double delta_apx) {
    // A deadlock of the stepping heuristics (never an Infeasible verdict,
    // which is weight-certified) retries with finer discretization.
    for (int attempt = 0;; ++attempt) {
        try {
            return solve_mpc_attempt(m, delta_apx, std::pow(0.5, attempt));
        } catch (const PackCoverError&) {
            if (attempt >= 2) throw;
        }
    }
}

namespace {
McOutcome solve_mpc_attempt(const MixedPackCover& m, double delta_apx, double eps_scale) {
    if (!(delta_apx > 0.0 && delta_apx < 1.0))
        throw PackCoverError("relaxation must lie in (0,1)");
    for (const auto& r : m.packing) {
        if (r.bound < 0.0) throw PackCoverError("negative packing bound");
        for (auto [j, v] : r.coef)
            if (j < 0 || j >= m.n || v < 0.0 || !std::isfinite(v))
                throw PackCoverError("invalid packing coefficient");
    }
    for (const auto& r : m.covering) {
        if (r.bound < 0.0) throw PackCoverError("negative covering bound");
        for (auto [j, v] : r.coef)
            if (j < 0 || j >= m.n || v < 0.0 || !std::isfinite(v))
                throw PackCoverError("invalid covering coefficient");
    }

    // Variables appearing with positive coefficient in a zero-bound packing
    // row are zero in every solution, relaxed or not.
    std::vector<char> forced(m.n, 0);
    for (const auto& r : m.packing)
        if (r.bound == 0.0)
            for (auto [j, v] : r.coef)
                if (v > 0.0) forced[j] = 1;

    McOutcome out;
    out.relaxation = delta_apx;
    out.x.assign(m.n, 0.0);

    // Normalized rows over the surviving variables.
    std::vector<std::vector<Entry>> prow, crow, pcol(m.n), ccol(m.n);
    for (const auto& r : m.packing) {
        if (r.bound == 0.0) continue;
        std::vector<Entry> row;
        for (auto [j, v] : r.coef)
            if (!forced[j] && v > 0.0) row.push_back({j, v / r.bound});
        if (!row.empty()) prow.push_back(std::move(row));
    }
    for (const auto& r : m.covering) {
        if (r.bound <= 0.0) continue;  // trivially met
        std::vector<Entry> row;
        for (auto [j, v] : r.coef)
            if (!forced[j] && v > 0.0) row.push_back({j, v / r.bound});
        if (row.empty()) {
            out.status = McStatus::Infeasible;  // positive demand, no usable variable
            out.x.clear();
            return out;
        }
        crow.push_back(std::move(row));
    }
    const int mp = int(prow.size()), mc = int(crow.size());
    if (mc == 0) {
        out.status = McStatus::ApproxFeasible;
        return out;
    }
    for (int i = 0; i < mp; ++i)
        for (auto& e : prow[i]) pcol[e.other].push_back({i, e.val});
    for (int j = 0; j < mc; ++j)
        for (auto& e : crow[j]) ccol[e.other].push_back({j, e.val});

    const double eps_int = std::min(delta_apx / 8.0, 0.05) * eps_scale;
    const double eta = std::log(double(std::max(mp + mc, 2))) / eps_int;
    // Aggressive steps stop at soft_wall; eps_int-sized steps may continue up
    // to the hard wall.  The packing-load budgets add: about delta/8 from the
    // aggressive phase plus 5*delta/8 from the fine phase's potential
    // argument, which keeps loads clear of the wall and the output inside
    // (1+delta).
    const double soft_wall = 1.0 + delta_apx / 8.0;
    const double wall = (1.0 + delta_apx) * (1.0 - 1e-12);
    // Exact feasibility forces the best weighted ratio to 1 or above under
    // ANY weight vector, and freshly rebuilt scores carry ~1e-12 rounding,
    // so a threshold at 1 - 1e-7 keeps Infeasible verdicts sound with five
    // orders of margin.
    const double verdict = 1.0 - 1e-7;
    const long long max_iter =
        64LL * (m.n + mp + mc + 16) * (long long)std::ceil(eta / eps_int);

    std::vector<double> x(m.n, 0.0);
    std::vector<double> pload(mp, 0.0), cload(mc, 0.0);
    std::vector<double> pw(mp), cw(mc);
    std::vector<char> active(mc, 1);
    std::vector<double> pull(m.n), pressure(m.n);
    double pshift = 0.0, cshift = 0.0, psum = 0.0, csum = 0.0;
    // Exponent motion since the last rebuild.  The incremental sums cancel
    // catastrophically once weights drift more than ~15 e-folds, so rebuild
    // before that.
    double motion = 0.0;
    int active_count = mc;

    auto rebuild = [&]() {
        pshift = 0.0;
        for (int i = 0; i < mp; ++i) pshift = std::max(pshift, pload[i]);
        cshift = 1.0;
        for (int j = 0; j < mc; ++j)
            if (active[j]) cshift = std::min(cshift, cload[j]);
        psum = csum = 0.0;
        for (int i = 0; i < mp; ++i) {
            pw[i] = std::exp(eta * (pload[i] - pshift));
            psum += pw[i];
        }
        for (int j = 0; j < mc; ++j) {
            cw[j] = active[j] ? std::exp(-eta * (cload[j] - cshift)) : 0.0;
            csum += cw[j];
        }
        std::fill(pull.begin(), pull.end(), 0.0);
        std::fill(pressure.begin(), pressure.end(), 0.0);
        for (int i = 0; i < mp; ++i)
            for (auto& e : prow[i]) pressure[e.other] += pw[i] * e.val;
        for (int j = 0; j < mc; ++j)
            if (active[j])
                for (auto& e : crow[j]) pull[e.other] += cw[j] * e.val;
        motion = 0.0;
    };
    rebuild();

    auto best_ratio = [&](int& best) {
        best = -1;
        double best_score = 0.0;
        for (int k = 0; k < m.n; ++k) {
            if (forced[k] || pull[k] <= 0.0) continue;
            double score = pressure[k] > 0.0 ? (pull[k] / csum) * (psum / pressure[k]) : 2.0;
            if (score > best_score) {
                best_score = score;
                best = k;
            }
        }
        return best_score;
    };

    long long iter = 0, stuck = 0;
    std::vector<char> skip(m.n, 0);
    for (; active_count > 0; ++iter) {
        if (iter >= max_iter)
            throw PackCoverError("iteration limit exceeded (solver defect, not instance hardness)");
        if (stuck > 2LL * m.n + 8) {
            // Every useful column is saturated or stale.  Re-examine with
            // fresh weights: a sub-threshold score certifies infeasibility
            // outright; a saturated best column means covering completion
            // needs packing loads beyond (1+delta), so the relaxed problem
            // is at its boundary and the exact one is infeasible.  Feasible
            // instances never get here: their loads stay near 1 + 3delta/4
            // by the step-budget accounting.
            rebuild();
            std::fill(skip.begin(), skip.end(), 0);
            stuck = 0;
            int b = -1;
            double sc = best_ratio(b);
            bool blocked = b < 0 || sc < verdict;
            if (!blocked) {
                double cap = 1e300;
                for (auto& e : pcol[b]) cap = std::min(cap, (wall - pload[e.other]) / e.val);
                blocked = cap <= 1e-13;
            }
            if (blocked) {
                out.status = McStatus::Infeasible;
                out.x.clear();
                out.iterations = iter;
                return out;
            }
        }
        if (motion > 15.0 || psum > 1e250 || csum < 1e-250) {
            rebuild();
            std::fill(skip.begin(), skip.end(), 0);
        }

        // Best covering-to-packing gradient ratio; the threshold is the
        // weighted-average ratio any feasible point must beat.
        int best = -1;
        double best_score = 0.0;
        for (int k = 0; k < m.n; ++k) {
            if (forced[k] || skip[k] || pull[k] <= 0.0) continue;
            double score = pressure[k] > 0.0 ? (pull[k] / csum) * (psum / pressure[k]) : 2.0;
            if (score > best_score) {
                best_score = score;
                best = k;
            }
        }
        if (best < 0 || best_score < verdict) {
            // A verdict this load-bearing is only issued with fresh weights
            // and without the stepping heuristics' skip marks.
            rebuild();
            best_score = best_ratio(best);
            if (best < 0 || best_score < verdict) {
                out.status = McStatus::Infeasible;
                out.x.clear();
                out.iterations = iter;
                return out;
            }
        }

        // Step size: adaptive exponent budget up to the soft wall, a hard
        // wall on packing loads, and no growth beyond what the active
        // covering rows can use.
        double max_pa = 0.0, wall_cap = 1e300, soft_room = 1e300;
        for (auto& e : pcol[best]) {
            max_pa = std::max(max_pa, e.val);
            wall_cap = std::min(wall_cap, (wall - pload[e.other]) / e.val);
            soft_room = std::min(soft_room, soft_wall - pload[e.other]);
        }
        if (max_pa > 0.0 && wall_cap <= 1e-13) {
            // saturated column: unusable until other loads move
            skip[best] = 1;
            ++stuck;
            continue;
        }
        double budget = eps_int;
        if (max_pa > 0.0 && soft_room > 0.0)
            budget = std::max(eps_int, std::min(2.0, eta * soft_room / 32.0));
        double alpha = max_pa > 0.0 ? budget / (eta * max_pa) : 1e300;
        alpha = std::min(alpha, wall_cap);
        double useful = 0.0, max_ca = 0.0;
        for (auto& e : ccol[best])
            if (active[e.other]) {
                useful = std::max(useful, (1.0 - cload[e.other]) / e.val);
                max_ca = std::max(max_ca, e.val);
            }
        if (useful <= 0.0) {
            // stale accumulator: no active row actually uses this column
            pull[best] = 0.0;
            ++stuck;
            continue;
        }
        alpha = std::min(alpha, useful);
        if (!(alpha > 0.0))
            throw PackCoverError("step size collapsed (solver defect, not instance hardness)");
        stuck = 0;

        x[best] += alpha;
        motion += eta * alpha * std::max(max_pa, max_ca);
        for (auto& e : pcol[best]) {
            int i = e.other;
            double before = pw[i];
            pload[i] += alpha * e.val;
            pw[i] = std::exp(eta * (pload[i] - pshift));
            double dw = pw[i] - before;
            psum += dw;
            for (auto& f : prow[i]) pressure[f.other] += dw * f.val;
        }
        for (auto& e : ccol[best]) {
            int j = e.other;
            if (!active[j]) continue;
            double before = cw[j];
            cload[j] += alpha * e.val;
            if (cload[j] >= 1.0 - 1e-12) {
                // done (a residual this small is inside the output check's
                // tolerance, so snap it closed)
                active[j] = 0;
                --active_count;
                cw[j] = 0.0;
            } else {
                cw[j] = std::exp(-eta * (cload[j] - cshift));
            }
            double dw = cw[j] - before;
            csum += dw;
            for (auto& f : crow[j]) pull[f.other] += dw * f.val;
        }
    }
    out.iterations = iter;

    // Certify the output against the original data before returning it.
    out.x = x;
    for (const auto& r : m.packing) {
        double lhs = 0.0, scale = std::max(1.0, r.bound);
        for (auto [j, v] : r.coef) lhs += v * out.x[j];
        if (lhs > (1.0 + delta_apx) * r.bound + 1e-8 * scale)
            throw PackCoverError("relaxed packing bound violated (solver defect)");
    }
    for (const auto& r : m.covering) {
        double lhs = 0.0;
        for (auto [j, v] : r.coef) lhs += v * out.x[j];
        if (lhs < r.bound - 1e-8 * std::max(1.0, r.bound))
            throw PackCoverError("covering bound violated (solver defect)");
    }
    out.status = McStatus::ApproxFeasible;
    return out;
}
}  // namespace

double nonneg_dual_violation(const Game& g, const DualPoint& x, double relax) {
    NonNegDualLayout ly = NonNegDualLayout::make(g);
    if ((long long)x.v.size() != ly.total)
        throw PackCoverError("dual point has the wrong dimension");
    double worst = 0.0;
    for (double v : x.v) worst = std::max(worst, -v);
    const double nsubsets = double((Mask(1) << g.k()) - 1);
    for (long long j = 0; j < ly.ybar_count; ++j)
        worst = std::max(worst, x.v[j] - (1.0 + relax));
    for (long long q = 0; q < g.q_count(); ++q)
        for (long long a = 0; a < g.a_count(); ++a) {
            double lhs = 0.0;
            for (Mask s = 1; s <= g.full_mask(); ++s)
                lhs += x.v[ly.ybar(g, s, q, g.restrict_answer(a, s))];
            double cap = nsubsets - (g.accepts(q, a) ? 1.0 : 0.0);
            worst = std::max(worst, lhs - (1.0 + relax) * cap);
        }
    for (Mask s = 1; s <= g.full_mask(); ++s)
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            double fiber_weight = 0.0;
            for (long long q : g.query_fibers(s)[qs]) fiber_weight += g.pi(q);
            for (long long as = 0; as < g.a_sub_count(s); ++as) {
                double lhs = x.v[ly.z(s, qs)];
                for (long long q : g.query_fibers(s)[qs])
                    if (g.pi(q) > 0.0) lhs += g.pi(q) * x.v[ly.ybar(g, s, q, as)];
                worst = std::max(worst, fiber_weight - lhs);
            }
        }
    return worst;
}

double nonneg_dual_objective(const Game& g, const DualPoint& x) {
    NonNegDualLayout ly = NonNegDualLayout::make(g);
    double total = 0.0;
    for (Mask s = 1; s <= g.full_mask(); ++s)
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) total += x.v[ly.z(s, qs)];
    return total;
}

DualPoint repair_mpc_solution(const Game& g, const DualPoint& x, double delta_apx) {
    if (delta_apx < 0.0) throw PackCoverError("relaxation must be nonnegative");
    if (nonneg_dual_violation(g, x, delta_apx) > 1e-7)
        throw PackCoverError("repair precondition violated: point is not (1+delta)-feasible");
    NonNegDualLayout ly = NonNegDualLayout::make(g);
    DualPoint y = x;
    for (long long j = 0; j < ly.ybar_count; ++j) y.v[j] = x.v[j] / (1.0 + delta_apx);
    for (Mask s = 1; s <= g.full_mask(); ++s)
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            double fiber_weight = 0.0;
            for (long long q : g.query_fibers(s)[qs]) fiber_weight += g.pi(q);
            y.v[ly.z(s, qs)] = x.v[ly.z(s, qs)] + delta_apx * fiber_weight;
        }
    return y;
}

ApproxResult approx_subns_value_detailed(const Game& g, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw PackCoverError("eps must lie in (0,1)");
    ApproxResult res;
    res.eps = eps;
    res.delta_apx = (eps / 2.0) / std::pow(2.0, g.k());

    double lo = 0.0, hi = 1.0;
    const int steps = int(std::ceil(std::log2(2.0 / eps)));
    for (int t = 0; t < steps; ++t) {
        double mid = 0.5 * (lo + hi);
        MixedPackCover mpc = restricted_dual_to_mpc(g, mid);
        McOutcome mc = solve_mpc(mpc, res.delta_apx);
        ApproxProbe probe;
        probe.v_prime = mid;
        probe.iterations = mc.iterations;
        if (mc.status == McStatus::ApproxFeasible) {
            DualPoint repaired = repair_mpc_solution(g, DualPoint{mc.x}, res.delta_apx);
            probe.feasible = true;
            probe.repaired_objective = nonneg_dual_objective(g, repaired);
            hi = mid;
        } else {
            probe.feasible = false;
            lo = mid;
        }
        res.probes.push_back(probe);
    }
    res.value = std::clamp(0.5 * (lo + hi), 0.0, 1.0);
    return res;
}

double approx_subns_value(const Game& g, double eps) {
    return approx_subns_value_detailed(g, eps).value;
}

}  // namespace nsg
