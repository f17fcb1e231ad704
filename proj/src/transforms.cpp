#include "nsgame/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nsg {

namespace {

// Sub-index restriction between nested subsets: maps the flat index over T's
// coordinates to the flat index over S's coordinates (S subset of T).
std::vector<long long> sub_restriction(const FlatSpace& t_space, Mask t, Mask s) {
    std::vector<int> keep, sub_radix;
    int pos = 0;
    for (int i = 0; i < 32; ++i) {
        Mask bit = Mask(1) << i;
        if (!(t & bit)) continue;
        if (s & bit) {
            keep.push_back(pos);
            sub_radix.push_back(t_space.radix[pos]);
        }
        ++pos;
    }
    FlatSpace s_space(sub_radix);
    std::vector<long long> map(t_space.count);
    for (long long ix = 0; ix < t_space.count; ++ix) {
        long long sub = 0;
        for (size_t j = 0; j < keep.size(); ++j)
            sub += t_space.digit(ix, keep[j]) * s_space.stride[j];
        map[ix] = sub;
    }
    return map;
}

std::vector<Mask> masks_by_size(int k, bool include_empty) {
    std::vector<Mask> all;
    for (Mask s = include_empty ? 0 : 1; s <= (Mask(1) << k) - 1; ++s) all.push_back(s);
    std::stable_sort(all.begin(), all.end(),
                     [](Mask a, Mask b) { return popcount(a) < popcount(b); });
    return all;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

std::string subset_query_label(const Game& g, Mask s, long long qs) {
    std::string lab = mask_to_string(s, g.k()) + "|";
    const FlatSpace& sp = g.q_sub_space(s);
    auto members = mask_members(s, g.k());
    for (size_t j = 0; j < members.size(); ++j) {
        if (j) lab += ",";
        lab += g.query_labels()[members[j]][sp.digit(qs, int(j))];
    }
    return lab;
}

std::string subset_answer_label(const Game& g, Mask s, long long as) {
    std::string lab = mask_to_string(s, g.k()) + "|";
    const FlatSpace& sp = g.a_sub_space(s);
    auto members = mask_members(s, g.k());
    for (size_t j = 0; j < members.size(); ++j) {
        if (j) lab += ",";
        lab += g.answer_labels()[members[j]][sp.digit(as, int(j))];
    }
    return lab;
}

}  // namespace

ReducedGame build_prover_reduction(const Game& g) {
    if (g.k() < 2) throw TransformError("the prover reduction needs at least two players");
    ReducedGame rg;
    const Mask nmask = Mask(1) << g.k();
    rg.q2_encode.assign(nmask, {});
    rg.a2_encode.assign(nmask, {});
    std::vector<std::string> q2_labels, a2_labels, q1_labels, a1_labels;
    for (Mask s = 0; s < nmask; ++s) {
        rg.q2_encode[s].assign(g.q_sub_count(s), -1);
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            rg.q2_encode[s][qs] = (long long)rg.q2_decode.size();
            rg.q2_decode.push_back({s, qs});
            q2_labels.push_back(subset_query_label(g, s, qs));
        }
        rg.a2_encode[s].assign(g.a_sub_count(s), -1);
        for (long long as = 0; as < g.a_sub_count(s); ++as) {
            rg.a2_encode[s][as] = (long long)rg.a2_decode.size();
            rg.a2_decode.push_back({s, as});
            a2_labels.push_back(subset_answer_label(g, s, as));
        }
    }
    for (long long q = 0; q < g.q_count(); ++q) q1_labels.push_back(g.query_tuple_name(q));
    for (long long a = 0; a < g.a_count(); ++a) a1_labels.push_back(g.answer_tuple_name(a));

    const long long nq2 = (long long)rg.q2_decode.size();
    const long long na2 = (long long)rg.a2_decode.size();
    std::vector<double> pi(g.q_count() * nq2, 0.0);
    const double per_subset = std::ldexp(1.0, -g.k());  // exact 2^{-k}
    for (long long q = 0; q < g.q_count(); ++q) {
        if (!g.supported(q)) continue;
        for (Mask s = 0; s < nmask; ++s) {
            long long q2 = rg.q2_encode[s][g.restrict_query(q, s)];
            pi[q * nq2 + q2] = g.pi(q) * per_subset;
        }
    }
    std::vector<std::uint8_t> accept(g.q_count() * nq2 * g.a_count() * na2, 0);
    for (long long q = 0; q < g.q_count(); ++q)
        for (long long q2 = 0; q2 < nq2; ++q2) {
            Mask s = rg.q2_decode[q2].first;
            for (long long a = 0; a < g.a_count(); ++a) {
                if (!g.accepts(q, a)) continue;
                long long a2 = rg.a2_encode[s][g.restrict_answer(a, s)];
                accept[((q * nq2 + q2) * g.a_count() + a) * na2 + a2] = 1;
            }
        }
    rg.game = Game::make({std::move(q1_labels), std::move(q2_labels)},
                         {std::move(a1_labels), std::move(a2_labels)}, std::move(pi),
                         std::move(accept));
    return rg;
}

Strategy lift_local_to_reduced(const Game& g, const ReducedGame& rg,
                               const std::vector<std::vector<int>>& answer_fn) {
    Strategy out = Strategy::zeros(rg.game);
    const long long nq2 = (long long)rg.q2_decode.size();
    const long long na2 = (long long)rg.a2_decode.size();
    for (long long q = 0; q < g.q_count(); ++q) {
        std::vector<int> tup(g.k());
        for (int i = 0; i < g.k(); ++i) tup[i] = answer_fn[i][g.qspace().digit(q, i)];
        long long a = g.aspace().index(tup);
        for (long long q2 = 0; q2 < nq2; ++q2) {
            Mask s = rg.q2_decode[q2].first;
            long long qs = rg.q2_decode[q2].second;
            // answer the restricted query with the same local functions
            std::vector<int> sub;
            auto members = mask_members(s, g.k());
            const FlatSpace& sp = g.q_sub_space(s);
            for (size_t j = 0; j < members.size(); ++j)
                sub.push_back(answer_fn[members[j]][sp.digit(qs, int(j))]);
            long long a2 = rg.a2_encode[s][g.a_sub_space(s).index(sub)];
            out.rows[q * nq2 + q2][a * na2 + a2] = 1.0;
        }
    }
    return out;
}

LiftResult lift_to_subns(const Game& g, const ReducedGame& rg, const Strategy& reduced_strategy,
                         double tol) {
    CheckReport pre = check_strategy(rg.game, reduced_strategy, ModelSpec::ns(), tol);
    if (!pre.pass)
        throw TransformError("lift requires a non-signaling input strategy: " +
                             pre.describe(rg.game));
    const long long nq2 = (long long)rg.q2_decode.size();
    const long long na2 = (long long)rg.a2_decode.size();
    const Mask nmask = Mask(1) << g.k();

    LiftResult out;
    out.strategy = Strategy::zeros(g);
    const double weight = std::ldexp(1.0, -g.k());
    std::vector<std::vector<double>> accepted(nmask, std::vector<double>(g.a_count(), 0.0));
    std::vector<double> acc(nmask, 0.0), pre_prod(nmask + 1, 1.0), suf_prod(nmask + 1, 1.0);
    for (long long q = 0; q < g.q_count(); ++q) {
        for (Mask s = 0; s < nmask; ++s) {
            long long q2 = rg.q2_encode[s][g.restrict_query(q, s)];
            const auto& row = reduced_strategy.rows[q * nq2 + q2];
            double total = 0.0;
            for (long long a = 0; a < g.a_count(); ++a) {
                double v = 0.0;
                if (g.accepts(q, a)) {
                    long long a2 = rg.a2_encode[s][g.restrict_answer(a, s)];
                    v = std::max(0.0, row[a * na2 + a2]);
                }
                accepted[s][a] = v;
                total += v;
            }
            acc[s] = std::min(1.0, total);
        }
        pre_prod[0] = 1.0;
        for (Mask s = 0; s < nmask; ++s) pre_prod[s + 1] = pre_prod[s] * acc[s];
        suf_prod[nmask] = 1.0;
        for (Mask s = nmask; s-- > 0;) suf_prod[s] = suf_prod[s + 1] * acc[s];
        auto& lifted = out.strategy.rows[q];
        for (Mask s = 0; s < nmask; ++s) {
            double others = pre_prod[s] * suf_prod[s + 1];
            if (others == 0.0) continue;
            for (long long a = 0; a < g.a_count(); ++a)
                lifted[a] += weight * others * accepted[s][a];
        }
    }
    // Certificate: the second player's answer marginal per (S, q_S); by the
    // non-signaling precondition it does not depend on the paired query.
    out.certificate = SimFamily::undefined(g);
    for (Mask s = 1; s < nmask; ++s)
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            long long q2 = rg.q2_encode[s][qs];
            const auto& row = reduced_strategy.rows[0 * nq2 + q2];
            std::vector<double> entry(g.a_sub_count(s), 0.0);
            for (long long a = 0; a < g.a_count(); ++a)
                for (long long as = 0; as < g.a_sub_count(s); ++as)
                    entry[as] += std::max(0.0, row[a * na2 + rg.a2_encode[s][as]]);
            out.certificate.entries[s][qs] = std::move(entry);
        }
    return out;
}

NuProfile compute_nu(const Game& g, const Strategy& p) {
    NuProfile out;
    out.nu.assign(g.q_count(), 0.0);
    const Mask nmask = Mask(1) << g.k();
    for (Mask s = 0; s < nmask; ++s) {
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            double mass = 0.0, acc = 0.0;
            for (long long q : g.query_fibers(s)[qs]) {
                if (!g.supported(q)) continue;
                mass += g.pi(q);
                acc += g.pi(q) * (1.0 - p.mass(q));
            }
            double avg = mass > 0.0 ? acc / mass : 0.0;  // empty condition contributes nothing
            for (long long q : g.query_fibers(s)[qs]) out.nu[q] += avg;
        }
    }
    for (long long q = 0; q < g.q_count(); ++q) out.average += g.pi(q) * out.nu[q];
    return out;
}

TrimResult trim_outliers(const Game& g, const Strategy& p) {
    TrimResult out;
    out.trimmed = p;
    out.delta_q.assign(g.q_count(), 0.0);

    const std::vector<Mask> order = masks_by_size(g.k(), true);
    // pi-conditional fiber averages of the original marginals
    std::vector<std::vector<std::vector<double>>> avg(Mask(1) << g.k());
    std::vector<std::vector<char>> defined(Mask(1) << g.k());
    for (Mask s : order) {
        avg[s].assign(g.q_sub_count(s), {});
        defined[s].assign(g.q_sub_count(s), 0);
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            double mass = 0.0;
            std::vector<double> sum(g.a_sub_count(s), 0.0);
            for (long long q : g.query_fibers(s)[qs]) {
                if (!g.supported(q)) continue;
                mass += g.pi(q);
                std::vector<double> m = marginal_row(g, p.rows[q], s);
                for (long long i = 0; i < g.a_sub_count(s); ++i) sum[i] += g.pi(q) * m[i];
            }
            if (mass > 0.0) {
                defined[s][qs] = 1;
                for (double& v : sum) v /= mass;
            }
            avg[s][qs] = std::move(sum);
        }
    }

    for (long long q = 0; q < g.q_count(); ++q) {
        auto& row = out.trimmed.rows[q];
        for (Mask s : order) {
            long long qs = g.restrict_query(q, s);
            if (!defined[s][qs]) continue;  // no pi mass to average against
            for (long long as = 0; as < g.a_sub_count(s); ++as) {
                double cur = 0.0;
                for (long long a = 0; a < g.a_count(); ++a)
                    if (g.restrict_answer(a, s) == as) cur += row[a];
                double target = avg[s][qs][as];
                if (cur > target + 1e-12) {
                    double scale = cur > 0.0 ? target / cur : 0.0;
                    for (long long a = 0; a < g.a_count(); ++a)
                        if (g.restrict_answer(a, s) == as) row[a] *= scale;
                }
            }
        }
        // the paper-style budget: initial excess over the average
        for (Mask s : order) {
            long long qs = g.restrict_query(q, s);
            if (!defined[s][qs]) continue;
            std::vector<double> m = marginal_row(g, p.rows[q], s);
            for (long long as = 0; as < g.a_sub_count(s); ++as)
                out.delta_q[q] += std::max(0.0, m[as] - avg[s][qs][as]);
        }
    }
    return out;
}

Sim1Result build_sim1(const Game& g, const Strategy& trimmed) {
    Sim1Result out;
    out.envelope = canonical_sim_family(g, trimmed);
    out.monotone = out.envelope;
    out.xi_total.assign(Mask(1) << g.k(), {});
    for (Mask s = 1; s <= g.full_mask(); ++s) out.xi_total[s].assign(g.q_sub_count(s), 0.0);

    for (Mask t : masks_by_size(g.k(), false)) {
        if (popcount(t) < 2) continue;  // singletons are the base family
        std::vector<Mask> codim1;
        for (Mask s = (t - 1) & t; s > 0; s = (s - 1) & t)
            if (popcount(s) == popcount(t) - 1) codim1.push_back(s);
        std::sort(codim1.begin(), codim1.end());
        for (Mask s : codim1) {
            std::vector<long long> amap = sub_restriction(g.a_sub_space(t), t, s);
            std::vector<long long> qmap = sub_restriction(g.q_sub_space(t), t, s);
            for (long long qt = 0; qt < g.q_sub_count(t); ++qt) {
                auto& fam = out.monotone.entries[t][qt];
                const auto& bound = out.monotone.entries[s][qmap[qt]];
                for (long long as = 0; as < g.a_sub_count(s); ++as) {
                    double cur = 0.0;
                    for (long long at = 0; at < g.a_sub_count(t); ++at)
                        if (amap[at] == as) cur += fam[at];
                    // ignore float-level excess so exactly-consistent inputs
                    // stay correction-free
                    if (cur > bound[as] + 1e-12) {
                        double excess = cur - bound[as];
                        double scale = bound[as] / cur;
                        for (long long at = 0; at < g.a_sub_count(t); ++at)
                            if (amap[at] == as) fam[at] *= scale;
                        out.xi_total[t][qt] += excess;
                        out.records.push_back({t, qt, s, as, excess});
                    }
                }
            }
        }
    }
    return out;
}

GoodSelection select_good(const Game& g, const SimFamily& sim1, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw TransformError("delta must lie in (0,1]");
    GoodSelection out;
    const Mask full = g.full_mask();
    std::vector<double> bot(g.q_count());
    for (long long q = 0; q < g.q_count(); ++q) {
        bot[q] = 1.0 - sim1.entry_mass(full, q);
        out.eps1 += g.pi(q) * bot[q];
    }
    out.threshold = out.eps1 / delta;
    out.good.assign(g.q_count(), 0);
    for (long long q = 0; q < g.q_count(); ++q) {
        if (bot[q] <= out.threshold * (1.0 + 1e-12) + 1e-15) {
            out.good[q] = 1;
            out.good_mass += g.pi(q);
        }
    }
    if (out.good_mass <= 0.0) throw TransformError("selection kept no query mass");
    out.tv_distance = 1.0 - out.good_mass;

    std::vector<double> pi_star(g.q_count(), 0.0);
    double sum = 0.0;
    long long first = -1;
    for (long long q = 0; q < g.q_count(); ++q) {
        if (!out.good[q] || !g.supported(q)) continue;
        pi_star[q] = g.pi(q) / out.good_mass;
        sum += pi_star[q];
        if (first < 0) first = q;
    }
    pi_star[first] += 1.0 - sum;  // absorb rounding so the mass is exact
    out.gstar = Game::make(g.query_labels(), g.answer_labels(), std::move(pi_star),
                           g.accept_table());
    return out;
}

Sim2Result normalize_sim2(const Game& g, const SimFamily& sim1, const GoodSelection& sel,
                          double delta) {
    Sim2Result out;
    out.alpha = std::max(0.0, 1.0 - sel.eps1 / delta);
    out.family = SimFamily::undefined(g);
    out.beta.assign(Mask(1) << g.k(), {});
    for (Mask s = 1; s <= g.full_mask(); ++s) {
        out.beta[s].assign(g.q_sub_count(s), -1.0);
        double alpha_pow = std::pow(out.alpha, popcount(s));
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            bool reachable = false;
            for (long long q : g.query_fibers(s)[qs]) reachable |= sel.good[q] != 0;
            if (!reachable) continue;
            double beta = sim1.entry_mass(s, qs);
            out.beta[s][qs] = beta;
            std::vector<double> entry(g.a_sub_count(s), 0.0);
            if (out.alpha > 0.0) {
                if (beta < out.alpha - 1e-9)
                    throw TransformError("entry mass dropped below the selection floor at " +
                                         mask_to_string(s, g.k()));
                double scale = alpha_pow / std::max(beta, out.alpha);
                for (long long as = 0; as < g.a_sub_count(s); ++as)
                    entry[as] = sim1.entries[s][qs][as] * scale;
            }
            out.family.entries[s][qs] = std::move(entry);
        }
    }
    return out;
}

SimFamily scale_sim3(const Game& g, const SimFamily& sim2) {
    if (g.k() < 2)
        throw TransformError("the damped family needs at least two players");
    SimFamily out = SimFamily::undefined(g);
    for (Mask s = 1; s <= g.full_mask(); ++s) {
        double scale = std::pow(double(g.k()), -2.0 * popcount(s));
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            if (!sim2.defined(s, qs)) continue;
            std::vector<double> entry = sim2.entries[s][qs];
            for (double& v : entry) v *= scale;
            out.entries[s][qs] = std::move(entry);
        }
    }
    return out;
}

Game extend_with_star(const Game& g, const std::vector<double>& pi) {
    std::vector<std::vector<std::string>> answers = g.answer_labels();
    for (auto& alpha : answers) {
        for (const auto& lab : alpha)
            if (lab == "*") throw TransformError("answer alphabet already uses the star symbol");
        alpha.push_back("*");
    }
    std::vector<int> ext_radix;
    for (const auto& alpha : answers) ext_radix.push_back(int(alpha.size()));
    FlatSpace ext(ext_radix);
    std::vector<std::uint8_t> accept(g.q_count() * ext.count, 0);
    for (long long q = 0; q < g.q_count(); ++q)
        for (long long ae = 0; ae < ext.count; ++ae) {
            std::vector<int> tup(g.k());
            bool real = true;
            for (int i = 0; i < g.k(); ++i) {
                tup[i] = ext.digit(ae, i);
                real &= tup[i] < int(g.answer_labels()[i].size());
            }
            if (real) accept[q * ext.count + ae] = g.accepts(q, g.aspace().index(tup)) ? 1 : 0;
        }
    return Game::make(g.query_labels(), std::move(answers), pi, std::move(accept));
}

long long all_star_answer(const Game& gext) {
    std::vector<int> tup(gext.k());
    for (int i = 0; i < gext.k(); ++i) tup[i] = gext.aspace().radix[i] - 1;
    return gext.aspace().index(tup);
}

StarExtensionResult expand_inclusion_exclusion(const Game& g, const Game& gext,
                                               const SimFamily& sim3,
                                               const std::vector<char>& good) {
    StarExtensionResult out;
    out.p_star = Strategy::zeros(gext);
    const Mask full = g.full_mask();

    // extended index of (a_S, stars elsewhere)
    std::vector<std::vector<long long>> ext_of(full + 1);
    std::vector<std::vector<std::vector<long long>>> amaps(full + 1);
    for (Mask s = 1; s <= full; ++s) {
        ext_of[s].assign(g.a_sub_count(s), 0);
        auto members = mask_members(s, g.k());
        long long star_base = 0;
        for (int i = 0; i < g.k(); ++i)
            if (!(s & (Mask(1) << i)))
                star_base += (gext.aspace().radix[i] - 1) * gext.aspace().stride[i];
        const FlatSpace& sp = g.a_sub_space(s);
        for (long long as = 0; as < g.a_sub_count(s); ++as) {
            long long ix = star_base;
            for (size_t j = 0; j < members.size(); ++j)
                ix += sp.digit(as, int(j)) * gext.aspace().stride[members[j]];
            ext_of[s][as] = ix;
        }
        amaps[s].assign(full + 1, {});
        for (Mask t = s; t <= full; t = (t + 1) | s)
            if (subset_of(s, t)) amaps[s][t] = sub_restriction(g.a_sub_space(t), t, s);
    }

    double first_total = -1.0;
    for (long long q = 0; q < g.q_count(); ++q) {
        if (!good[q]) continue;
        auto& row = out.p_star.rows[q];
        double total = 0.0;
        for (Mask s = 1; s <= full; ++s) {
            std::vector<double> val(g.a_sub_count(s), 0.0);
            Mask comp = full & ~s;
            Mask u = comp;
            for (;;) {
                Mask t = s | u;
                double sign = (popcount(t) - popcount(s)) % 2 ? -1.0 : 1.0;
                long long qt = g.restrict_query(q, t);
                const auto& entry = sim3.entries[t][qt];
                if (entry.empty())
                    throw TransformError("damped family undefined on a selected restriction");
                const auto& amap = amaps[s][t];
                for (long long at = 0; at < g.a_sub_count(t); ++at)
                    val[amap[at]] += sign * entry[at];
                if (u == 0) break;
                u = (u - 1) & comp;
            }
            for (long long as = 0; as < g.a_sub_count(s); ++as) {
                out.min_entry = std::min(out.min_entry, val[as]);
                if (val[as] < -1e-6)
                    throw TransformError("alternating sum went negative at " +
                                         mask_to_string(s, g.k()) + " on " +
                                         g.query_tuple_name(q));
                double v = std::max(0.0, val[as]);
                row[ext_of[s][as]] = v;
                total += v;
            }
        }
        if (first_total < 0.0)
            first_total = total;
        else
            out.max_mass_deviation = std::max(out.max_mass_deviation,
                                              std::abs(total - first_total));
    }
    out.alpha_total = std::max(0.0, first_total);
    return out;
}

NormalizedStar normalize_pstar(const Game& gext, const Strategy& p_star, double alpha_total,
                               const std::vector<char>& good) {
    NormalizedStar out;
    out.p = p_star;
    const long long star = all_star_answer(gext);
    out.gamma = alpha_total >= 1.0 ? 1.0 / alpha_total : 1.0;
    for (long long q = 0; q < gext.q_count(); ++q) {
        auto& row = out.p.rows[q];
        if (!good[q]) {
            std::fill(row.begin(), row.end(), 0.0);
            row[star] = 1.0;  // fixed default distribution off the selection
            continue;
        }
        if (alpha_total >= 1.0) {
            for (double& v : row) v *= out.gamma;
        } else {
            row[star] += 1.0 - alpha_total;
        }
    }
    return out;
}

Strategy fold_stars(const Game& g, const Game& gext, const Strategy& p_star_star,
                    const Assignment& default_answer) {
    if (default_answer.members != g.full_mask() || int(default_answer.symbols.size()) != g.k())
        throw TransformError("default answer must assign every player");
    for (int i = 0; i < g.k(); ++i)
        if (default_answer.symbols[i] < 0 ||
            default_answer.symbols[i] >= int(g.answer_labels()[i].size()))
            throw TransformError("default answer outside the original alphabet");
    std::vector<long long> fold(gext.a_count());
    for (long long ae = 0; ae < gext.a_count(); ++ae) {
        std::vector<int> tup(g.k());
        for (int i = 0; i < g.k(); ++i) {
            int d = gext.aspace().digit(ae, i);
            tup[i] = d < int(g.answer_labels()[i].size()) ? d : default_answer.symbols[i];
        }
        fold[ae] = g.aspace().index(tup);
    }
    Strategy out = Strategy::zeros(g);
    for (long long q = 0; q < g.q_count(); ++q)
        for (long long ae = 0; ae < gext.a_count(); ++ae)
            out.rows[q][fold[ae]] += p_star_star.rows[q][ae];
    return out;
}

const StageCheck* PipelineTrace::find_check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

void push_check(PipelineTrace& tr, std::string name, double worst, double tol,
                std::string witness) {
    StageCheck c;
    c.name = std::move(name);
    c.worst = worst;
    c.pass = worst <= tol;
    c.witness = std::move(witness);
    tr.all_pass &= c.pass;
    tr.checks.push_back(std::move(c));
}

}  // namespace

PipelineTrace run_subns_to_hrns(const Game& g, const Strategy& p, double delta, bool strict) {
    if (g.k() < 2) throw TransformError("the conversion needs at least two players");
    if (!(delta > 0.0 && delta <= 1.0)) throw TransformError("delta must lie in (0,1]");
    {
        CheckReport pre = check_strategy(g, p, ModelSpec::subns());
        if (!pre.pass)
            throw TransformError("input must be sub-non-signaling: " + pre.describe(g));
    }
    PipelineTrace tr;
    tr.k = g.k();
    tr.delta = delta;
    tr.input_value = evaluate_value(g, p);
    tr.input_eps = 1.0 - tr.input_value;

    tr.nu = compute_nu(g, p);
    tr.trim = trim_outliers(g, p);

    // P1: the trimmed strategy never exceeds the input.
    {
        double worst = 0.0;
        long long wq = 0;
        for (long long q = 0; q < g.q_count(); ++q)
            for (long long a = 0; a < g.a_count(); ++a) {
                double v = tr.trim.trimmed.rows[q][a] - p.rows[q][a];
                if (v > worst) {
                    worst = v;
                    wq = q;
                }
            }
        push_check(tr, "P1 trim dominated", worst, 1e-12, g.query_tuple_name(wq));
    }
    // P2: trim budget against the abort profile, on the support.
    {
        double worst = 0.0;
        long long wq = 0;
        for (long long q = 0; q < g.q_count(); ++q) {
            if (!g.supported(q)) continue;
            double v = tr.trim.delta_q[q] + (1.0 - p.mass(q)) - tr.nu.nu[q];
            if (v > worst) {
                worst = v;
                wq = q;
            }
        }
        push_check(tr, "P2 trim budget", worst, 1e-9, g.query_tuple_name(wq));
    }

    tr.sim1 = build_sim1(g, tr.trim.trimmed);

    // P3: subset monotonicity for every nested pair, not only the
    // codimension-one corrections.
    {
        double worst = 0.0;
        std::string wit;
        for (Mask t = 1; t <= g.full_mask(); ++t)
            for (Mask s = t & (t - 1); s > 0; s = (s - 1) & t) {
                auto amap = sub_restriction(g.a_sub_space(t), t, s);
                auto qmap = sub_restriction(g.q_sub_space(t), t, s);
                for (long long qt = 0; qt < g.q_sub_count(t); ++qt) {
                    std::vector<double> marg(g.a_sub_count(s), 0.0);
                    for (long long at = 0; at < g.a_sub_count(t); ++at)
                        marg[amap[at]] += tr.sim1.monotone.entries[t][qt][at];
                    for (long long as = 0; as < g.a_sub_count(s); ++as) {
                        double v = marg[as] - tr.sim1.monotone.entries[s][qmap[qt]][as];
                        if (v > worst) {
                            worst = v;
                            wit = "T=" + mask_to_string(t, g.k()) + " S=" + mask_to_string(s, g.k());
                        }
                    }
                }
            }
        push_check(tr, "P3 subset monotone", worst, 1e-9, wit);
    }
    // P4: correction budget per subset against the abort profile of any
    // supported consistent query.
    {
        double worst = 0.0;
        std::string wit;
        for (Mask t = 1; t <= g.full_mask(); ++t) {
            double fac = factorial(popcount(t) + 1);
            for (long long qt = 0; qt < g.q_sub_count(t); ++qt) {
                double nu_min = 1e300;
                for (long long q : g.query_fibers(t)[qt])
                    if (g.supported(q)) nu_min = std::min(nu_min, tr.nu.nu[q]);
                if (nu_min == 1e300) continue;
                double v = tr.sim1.xi_total[t][qt] - fac * nu_min;
                if (v > worst) {
                    worst = v;
                    wit = "T=" + mask_to_string(t, g.k());
                }
            }
        }
        push_check(tr, "P4 correction budget", worst, 1e-9, wit);
    }
    // Abort bound on the corrected family (the (|S|+2)! chain).
    {
        double worst = 0.0;
        std::string wit;
        for (Mask s = 1; s <= g.full_mask(); ++s) {
            double fac = factorial(popcount(s) + 2);
            for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
                double bot = 1.0 - tr.sim1.monotone.entry_mass(s, qs);
                for (long long q : g.query_fibers(s)[qs]) {
                    if (!g.supported(q)) continue;
                    double v = bot - fac * tr.nu.nu[q];
                    if (v > worst) {
                        worst = v;
                        wit = "S=" + mask_to_string(s, g.k()) + " q=" + g.query_tuple_name(q);
                    }
                }
            }
        }
        push_check(tr, "sim1 abort bound", worst, 1e-9, wit);
    }

    tr.sel = select_good(g, tr.sim1.monotone, delta);
    tr.good_is_all = true;
    for (long long q = 0; q < g.q_count(); ++q) tr.good_is_all &= tr.sel.good[q] != 0;
    push_check(tr, "P5 selection mass", (1.0 - delta) - tr.sel.good_mass, 1e-12,
               "kept " + std::to_string(tr.sel.good_mass));

    tr.sim2 = normalize_sim2(g, tr.sim1.monotone, tr.sel, delta);
    // P6: equalized masses.
    {
        double worst = 0.0;
        std::string wit;
        for (Mask s = 1; s <= g.full_mask(); ++s) {
            double want = std::pow(tr.sim2.alpha, popcount(s));
            for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
                if (!tr.sim2.family.defined(s, qs)) continue;
                double v = std::abs(tr.sim2.family.entry_mass(s, qs) - want);
                if (v > worst) {
                    worst = v;
                    wit = "S=" + mask_to_string(s, g.k());
                }
            }
        }
        push_check(tr, "P6 equalized masses", worst, 1e-9, wit);
    }

    tr.sim3 = scale_sim3(g, tr.sim2.family);
    tr.gstar_ext = extend_with_star(g, tr.sel.gstar.pi());
    StarExtensionResult ext = expand_inclusion_exclusion(g, tr.gstar_ext, tr.sim3, tr.sel.good);
    tr.p_star = ext.p_star;
    tr.alpha_total = ext.alpha_total;
    push_check(tr, "P7 alternating sums", -ext.min_entry, 1e-9, "");

    // P8: restriction to real answers equals the damped family; the total
    // extended mass is query-independent and at most 2^k.
    {
        double worst = 0.0;
        for (long long q = 0; q < g.q_count(); ++q) {
            if (!tr.sel.good[q]) continue;
            const auto& entry = tr.sim3.entries[g.full_mask()][q];
            for (long long a = 0; a < g.a_count(); ++a) {
                std::vector<int> tup(g.k());
                for (int i = 0; i < g.k(); ++i) tup[i] = g.aspace().digit(a, i);
                long long ae = tr.gstar_ext.aspace().index(tup);
                worst = std::max(worst, std::abs(tr.p_star.rows[q][ae] - entry[a]));
            }
        }
        worst = std::max(worst, ext.max_mass_deviation);
        worst = std::max(worst, tr.alpha_total - std::pow(2.0, g.k()));
        push_check(tr, "P8 extension consistency", worst, 1e-9, "");
    }

    NormalizedStar norm = normalize_pstar(tr.gstar_ext, tr.p_star, tr.alpha_total, tr.sel.good);
    tr.p_star_star = norm.p;
    tr.gamma = norm.gamma;
    // P9: exact distributions with matching marginals across the selection.
    {
        double worst = 0.0;
        for (long long q = 0; q < g.q_count(); ++q)
            worst = std::max(worst, std::abs(tr.p_star_star.mass(q) - 1.0));
        CheckReport hr = check_strategy(tr.gstar_ext, tr.p_star_star, ModelSpec::hrns(), 1e-7);
        worst = std::max(worst, hr.worst);
        push_check(tr, "P9 output distribution", worst, 1e-7,
                   hr.pass ? "" : hr.describe(tr.gstar_ext));
    }

    {
        double num = 0.0;
        const auto& fam = tr.sim2.family.entries[g.full_mask()];
        for (long long q = 0; q < g.q_count(); ++q) {
            if (!tr.sel.gstar.supported(q) || fam[q].empty()) continue;
            double acc = 0.0;
            for (long long a = 0; a < g.a_count(); ++a)
                if (g.accepts(q, a)) acc += fam[q][a];
            num += tr.sel.gstar.pi(q) * acc;
        }
        tr.eps2 = 1.0 - num;
    }
    tr.final_value = evaluate_value(tr.gstar_ext, tr.p_star_star);
    tr.bound = std::pow(double(g.k()), -3.0 * g.k()) *
               (1.0 - std::pow(double(g.k()), 2.0 * g.k()) * tr.input_eps / delta);

    if (strict && !tr.all_pass) {
        for (const auto& c : tr.checks)
            if (!c.pass)
                throw TransformError("stage check failed: " + c.name + " (worst " +
                                     std::to_string(c.worst) + ") " + c.witness);
    }
    return tr;
}

}  // namespace nsg
