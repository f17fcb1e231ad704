// Value LPs for the four strategy models.
//
// The generic non-signaling LP has one variable per (query, answer) pair and
// marginal-equality rows across every restricted-query fiber.  For
// two-player games that LP is solved through an equivalent compressed form:
// joint variables only for supported query pairs plus per-player marginal
// blocks.  Any consistent assignment of supported-pair joints and per-query
// marginals extends to a full non-signaling strategy by taking the product
// of the marginals on unsupported pairs, so the compressed LP has the same
// optimum; it is also why the two-player honest-referee and non-signaling
// values coincide.  Answers a player can never get accepted with (under any
// supported query pair) are pinned to zero mass first; rerouting such mass
// to a fixed live answer is value- and model-preserving, so this loses
// nothing and keeps the joint blocks small.
#include "nsgame/value_lp.hpp"

#include <algorithm>
#include <cmath>

#include "nsgame/util.hpp"

namespace nsg {

SubNsLayout SubNsLayout::make(const Game& g) {
    SubNsLayout ly;
    ly.x_count = g.q_count() * g.a_count();
    ly.sim_base.assign(Mask(1) << g.k(), -1);
    long long next = ly.x_count;
    for (Mask s = 1; s <= g.full_mask(); ++s) {
        ly.sim_base[s] = next;
        next += g.q_sub_count(s) * g.a_sub_count(s);
    }
    ly.total = next;
    return ly;
}

NonNegDualLayout NonNegDualLayout::make(const Game& g) {
    NonNegDualLayout ly;
    ly.ybar_base.assign(Mask(1) << g.k(), -1);
    ly.z_base.assign(Mask(1) << g.k(), -1);
    long long next = 0;
    for (Mask s = 1; s <= g.full_mask(); ++s) {
        ly.ybar_base[s] = next;
        next += g.q_count() * g.a_sub_count(s);
    }
    ly.ybar_count = next;
    for (Mask s = 1; s <= g.full_mask(); ++s) {
        ly.z_base[s] = next;
        next += g.q_sub_count(s);
    }
    ly.total = next;
    return ly;
}

namespace {

LinearProgram build_subns_lp(const Game& g, const ModelSpec& model) {
    SubNsLayout ly = SubNsLayout::make(g);
    LinearProgram lp;
    lp.sense = Sense::Maximize;
    lp.num_vars = int(ly.total);
    lp.signs.assign(ly.total, VarSign::NonNegative);
    lp.objective.assign(ly.total, 0.0);
    for (long long q = 0; q < g.q_count(); ++q)
        for (long long a = 0; a < g.a_count(); ++a)
            if (g.accepts(q, a)) lp.objective[ly.x(g, q, a)] = 1.0;

    // Marginal domination: sum_{a: a|S=aS} x_q(a) <= pi(q) Sim_{S,qS}(aS).
    for (Mask s = 1; s <= g.full_mask(); ++s) {
        for (long long q = 0; q < g.q_count(); ++q) {
            long long qs = g.restrict_query(q, s);
            for (long long as = 0; as < g.a_sub_count(s); ++as) {
                LpRow row;
                for (long long a = 0; a < g.a_count(); ++a)
                    if (g.restrict_answer(a, s) == as)
                        row.coef.push_back({int(ly.x(g, q, a)), 1.0});
                row.coef.push_back({int(ly.sim(g, s, qs, as)), -g.pi(q)});
                row.rel = Rel::Le;
                row.rhs = 0.0;
                lp.add_row(std::move(row));
            }
        }
    }
    // Each dominating entry is a probability distribution.
    for (Mask s = 1; s <= g.full_mask(); ++s) {
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            LpRow row;
            for (long long as = 0; as < g.a_sub_count(s); ++as)
                row.coef.push_back({int(ly.sim(g, s, qs, as)), 1.0});
            row.rel = Rel::Eq;
            row.rhs = 1.0;
            lp.add_row(std::move(row));
        }
    }
    if (model.model == StrategyModel::SubNonSignalingDelta) {
        if (model.delta < 0.0 || model.delta > 1.0)
            throw GameError("subns-delta requires delta in [0,1]");
        for (long long q = 0; q < g.q_count(); ++q) {
            if (!g.supported(q)) continue;
            LpRow row;  // sum_a x_q(a) >= (1-delta) pi(q), in <= orientation
            for (long long a = 0; a < g.a_count(); ++a)
                row.coef.push_back({int(ly.x(g, q, a)), -1.0});
            row.rel = Rel::Le;
            row.rhs = -(1.0 - model.delta) * g.pi(q);
            lp.add_row(std::move(row));
        }
    }
    return lp;
}

LinearProgram build_ns_lp(const Game& g, bool honest) {
    std::vector<long long> var_of_q(g.q_count(), -1);
    long long nq = 0;
    for (long long q = 0; q < g.q_count(); ++q)
        if (!honest || g.supported(q)) var_of_q[q] = nq++;

    LinearProgram lp;
    lp.sense = Sense::Maximize;
    lp.num_vars = int(nq * g.a_count());
    lp.signs.assign(lp.num_vars, VarSign::NonNegative);
    lp.objective.assign(lp.num_vars, 0.0);
    auto var = [&](long long q, long long a) { return int(var_of_q[q] * g.a_count() + a); };
    for (long long q = 0; q < g.q_count(); ++q) {
        if (var_of_q[q] < 0) continue;
        for (long long a = 0; a < g.a_count(); ++a)
            if (g.accepts(q, a)) lp.objective[var(q, a)] = g.pi(q);
    }
    // Probability rows.
    for (long long q = 0; q < g.q_count(); ++q) {
        if (var_of_q[q] < 0) continue;
        LpRow row;
        for (long long a = 0; a < g.a_count(); ++a) row.coef.push_back({var(q, a), 1.0});
        row.rel = Rel::Eq;
        row.rhs = 1.0;
        lp.add_row(std::move(row));
    }
    // Marginal equality along a chain within each restricted-query fiber.
    for (Mask s = 1; s < g.full_mask(); ++s) {
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            long long prev = -1;
            for (long long q : g.query_fibers(s)[qs]) {
                if (var_of_q[q] < 0) continue;
                if (prev >= 0) {
                    for (long long as = 0; as < g.a_sub_count(s); ++as) {
                        LpRow row;
                        for (long long a = 0; a < g.a_count(); ++a) {
                            if (g.restrict_answer(a, s) != as) continue;
                            row.coef.push_back({var(prev, a), 1.0});
                            row.coef.push_back({var(q, a), -1.0});
                        }
                        row.rel = Rel::Eq;
                        row.rhs = 0.0;
                        lp.add_row(std::move(row));
                    }
                }
                prev = q;
            }
        }
    }
    return lp;
}

// ----- two-player compressed form ----------------------------------------

struct Bipartite {
    // live answers per player per own-query symbol
    std::vector<std::vector<std::vector<int>>> live;  // [player][symbol] -> answer ids
    std::vector<long long> pair_base;                 // per supported pair
    std::vector<long long> supported;                 // supported flat q ids
    long long m_base[2] = {0, 0};
    long long total = 0;
};

Bipartite bipartite_layout(const Game& g) {
    Bipartite b;
    b.live.resize(2);
    for (int player = 0; player < 2; ++player) {
        int nsym = int(g.query_labels()[player].size());
        int nans = int(g.answer_labels()[player].size());
        b.live[player].assign(nsym, {});
        for (int sym = 0; sym < nsym; ++sym) {
            std::vector<char> alive(nans, 0);
            for (long long q = 0; q < g.q_count(); ++q) {
                if (!g.supported(q) || g.qspace().digit(q, player) != sym) continue;
                for (long long a = 0; a < g.a_count(); ++a)
                    if (g.accepts(q, a)) alive[g.aspace().digit(a, player)] = 1;
            }
            for (int x = 0; x < nans; ++x)
                if (alive[x]) b.live[player][sym].push_back(x);
            if (b.live[player][sym].empty()) b.live[player][sym].push_back(0);
        }
    }
    long long next = 0;
    for (long long q = 0; q < g.q_count(); ++q) {
        if (!g.supported(q)) continue;
        b.supported.push_back(q);
        b.pair_base.push_back(next);
        next += (long long)b.live[0][g.qspace().digit(q, 0)].size() *
                (long long)b.live[1][g.qspace().digit(q, 1)].size();
    }
    for (int player = 0; player < 2; ++player) {
        b.m_base[player] = next;
        for (const auto& symlive : b.live[player]) next += (long long)symlive.size();
    }
    b.total = next;
    return b;
}

long long bip_m_index(const Game& g, const Bipartite& b, int player, int sym, int live_pos) {
    long long off = b.m_base[player];
    for (int s2 = 0; s2 < sym; ++s2) off += (long long)b.live[player][s2].size();
    (void)g;
    return off + live_pos;
}

ExactValue exact_value_bipartite(const Game& g, bool honest) {
    Bipartite b = bipartite_layout(g);
    LinearProgram lp;
    lp.sense = Sense::Maximize;
    lp.num_vars = int(b.total);
    lp.signs.assign(b.total, VarSign::NonNegative);
    lp.objective.assign(b.total, 0.0);

    for (size_t t = 0; t < b.supported.size(); ++t) {
        long long q = b.supported[t];
        int s0 = g.qspace().digit(q, 0), s1 = g.qspace().digit(q, 1);
        const auto& l0 = b.live[0][s0];
        const auto& l1 = b.live[1][s1];
        for (size_t i = 0; i < l0.size(); ++i)
            for (size_t j = 0; j < l1.size(); ++j) {
                long long a = g.aspace().index({l0[i], l1[j]});
                if (g.accepts(q, a))
                    lp.objective[b.pair_base[t] + i * l1.size() + j] = g.pi(q);
            }
        // joint marginals match the per-player marginal blocks
        for (size_t i = 0; i < l0.size(); ++i) {
            LpRow row;
            for (size_t j = 0; j < l1.size(); ++j)
                row.coef.push_back({int(b.pair_base[t] + i * l1.size() + j), 1.0});
            row.coef.push_back({int(bip_m_index(g, b, 0, s0, int(i))), -1.0});
            row.rel = Rel::Eq;
            row.rhs = 0.0;
            lp.add_row(std::move(row));
        }
        for (size_t j = 0; j < l1.size(); ++j) {
            LpRow row;
            for (size_t i = 0; i < l0.size(); ++i)
                row.coef.push_back({int(b.pair_base[t] + i * l1.size() + j), 1.0});
            row.coef.push_back({int(bip_m_index(g, b, 1, s1, int(j))), -1.0});
            row.rel = Rel::Eq;
            row.rhs = 0.0;
            lp.add_row(std::move(row));
        }
    }
    for (int player = 0; player < 2; ++player) {
        for (int sym = 0; sym < int(b.live[player].size()); ++sym) {
            LpRow row;
            for (int i = 0; i < int(b.live[player][sym].size()); ++i)
                row.coef.push_back({int(bip_m_index(g, b, player, sym, i)), 1.0});
            row.rel = Rel::Eq;
            row.rhs = 1.0;
            lp.add_row(std::move(row));
        }
    }

    LpOutcome out = solve_lp(lp);
    if (out.status != LpStatus::Optimal) throw GameError("value LP did not solve to optimality");

    ExactValue ev;
    ev.value = out.value;
    ev.strategy = Strategy::zeros(g);
    // supported pairs take the joint; everything else the product completion
    std::vector<std::vector<double>> marg(2);
    for (int player = 0; player < 2; ++player) {
        int nans = int(g.answer_labels()[player].size());
        marg[player].assign((long long)b.live[player].size() * nans, 0.0);
        for (int sym = 0; sym < int(b.live[player].size()); ++sym)
            for (int i = 0; i < int(b.live[player][sym].size()); ++i)
                marg[player][(long long)sym * nans + b.live[player][sym][i]] =
                    std::max(0.0, out.x[bip_m_index(g, b, player, sym, i)]);
    }
    for (long long q = 0; q < g.q_count(); ++q) {
        int s0 = g.qspace().digit(q, 0), s1 = g.qspace().digit(q, 1);
        int n1 = int(g.answer_labels()[1].size());
        auto& row = ev.strategy.rows[q];
        for (long long a = 0; a < g.a_count(); ++a) {
            int a0 = g.aspace().digit(a, 0), a1 = g.aspace().digit(a, 1);
            row[a] = marg[0][(long long)s0 * int(g.answer_labels()[0].size()) + a0] *
                     marg[1][(long long)s1 * n1 + a1];
        }
    }
    for (size_t t = 0; t < b.supported.size(); ++t) {
        long long q = b.supported[t];
        int s0 = g.qspace().digit(q, 0), s1 = g.qspace().digit(q, 1);
        const auto& l0 = b.live[0][s0];
        const auto& l1 = b.live[1][s1];
        auto& row = ev.strategy.rows[q];
        std::fill(row.begin(), row.end(), 0.0);
        for (size_t i = 0; i < l0.size(); ++i)
            for (size_t j = 0; j < l1.size(); ++j)
                row[g.aspace().index({l0[i], l1[j]})] =
                    std::max(0.0, out.x[b.pair_base[t] + i * l1.size() + j]);
    }
    (void)honest;
    return ev;
}

Strategy extract_subns_strategy(const Game& g, const SubNsLayout& ly,
                                const std::vector<double>& x) {
    Strategy p = Strategy::zeros(g);
    for (long long q = 0; q < g.q_count(); ++q) {
        if (!g.supported(q)) continue;  // all-abort off support
        double inv = 1.0 / g.pi(q);
        double mass = 0.0;
        for (long long a = 0; a < g.a_count(); ++a) {
            double v = std::max(0.0, x[ly.x(g, q, a)] * inv);
            p.rows[q][a] = v;
            mass += v;
        }
        if (mass > 1.0) {
            double fix = 1.0 / mass;
            for (double& v : p.rows[q]) v *= fix;
        }
    }
    return p;
}

SimFamily extract_sim_family(const Game& g, const SubNsLayout& ly, const std::vector<double>& x) {
    SimFamily f = SimFamily::undefined(g);
    for (Mask s = 1; s <= g.full_mask(); ++s)
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            std::vector<double> e(g.a_sub_count(s));
            for (long long as = 0; as < g.a_sub_count(s); ++as)
                e[as] = std::max(0.0, x[ly.sim(g, s, qs, as)]);
            f.entries[s][qs] = std::move(e);
        }
    return f;
}

Strategy extract_ns_strategy(const Game& g, bool honest, const std::vector<double>& x) {
    std::vector<long long> var_of_q(g.q_count(), -1);
    long long nq = 0;
    for (long long q = 0; q < g.q_count(); ++q)
        if (!honest || g.supported(q)) var_of_q[q] = nq++;
    Strategy p = Strategy::zeros(g);
    for (long long q = 0; q < g.q_count(); ++q) {
        if (var_of_q[q] < 0) {
            // honest-referee mode leaves unsupported queries unconstrained
            for (long long a = 0; a < g.a_count(); ++a) p.rows[q][a] = 1.0 / double(g.a_count());
            continue;
        }
        double mass = 0.0;
        for (long long a = 0; a < g.a_count(); ++a) {
            double v = std::max(0.0, x[var_of_q[q] * g.a_count() + a]);
            p.rows[q][a] = v;
            mass += v;
        }
        if (mass > 0.0)
            for (double& v : p.rows[q]) v /= mass;
    }
    return p;
}

}  // namespace

LinearProgram build_value_lp(const Game& g, const ModelSpec& model) {
    switch (model.model) {
        case StrategyModel::SubNonSignaling:
        case StrategyModel::SubNonSignalingDelta:
            return build_subns_lp(g, model);
        case StrategyModel::NonSignaling:
            return build_ns_lp(g, false);
        case StrategyModel::HonestReferee:
            return build_ns_lp(g, true);
    }
    throw GameError("unknown model");
}

ExactValue exact_value(const Game& g, const ModelSpec& model) {
    const bool ns_like = model.model == StrategyModel::NonSignaling ||
                         model.model == StrategyModel::HonestReferee;
    if (ns_like && g.k() == 2)
        return exact_value_bipartite(g, model.model == StrategyModel::HonestReferee);

    LinearProgram lp = build_value_lp(g, model);
    LpOutcome out = solve_lp(lp);
    if (out.status != LpStatus::Optimal) throw GameError("value LP did not solve to optimality");

    ExactValue ev;
    ev.value = out.value;
    if (ns_like) {
        ev.strategy = extract_ns_strategy(g, model.model == StrategyModel::HonestReferee, out.x);
    } else {
        SubNsLayout ly = SubNsLayout::make(g);
        ev.strategy = extract_subns_strategy(g, ly, out.x);
        ev.sim = extract_sim_family(g, ly, out.x);
    }
    return ev;
}

LinearProgram build_nonneg_dual(const Game& g) {
    NonNegDualLayout ly = NonNegDualLayout::make(g);
    LinearProgram lp;
    lp.sense = Sense::Minimize;
    lp.num_vars = int(ly.total);
    lp.signs.assign(ly.total, VarSign::NonNegative);
    lp.objective.assign(ly.total, 0.0);
    for (Mask s = 1; s <= g.full_mask(); ++s)
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) lp.objective[ly.z(s, qs)] = 1.0;

    const double nsubsets = double((Mask(1) << g.k()) - 1);
    for (long long q = 0; q < g.q_count(); ++q)
        for (long long a = 0; a < g.a_count(); ++a) {
            LpRow row;
            for (Mask s = 1; s <= g.full_mask(); ++s)
                row.coef.push_back({int(ly.ybar(g, s, q, g.restrict_answer(a, s))), 1.0});
            row.rel = Rel::Le;
            row.rhs = nsubsets - (g.accepts(q, a) ? 1.0 : 0.0);
            lp.add_row(std::move(row));
        }
    for (Mask s = 1; s <= g.full_mask(); ++s)
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            double fiber_weight = 0.0;
            for (long long q : g.query_fibers(s)[qs]) fiber_weight += g.pi(q);
            for (long long as = 0; as < g.a_sub_count(s); ++as) {
                LpRow row;
                row.coef.push_back({int(ly.z(s, qs)), 1.0});
                for (long long q : g.query_fibers(s)[qs])
                    if (g.pi(q) > 0.0) row.coef.push_back({int(ly.ybar(g, s, q, as)), g.pi(q)});
                row.rel = Rel::Ge;
                row.rhs = fiber_weight;
                lp.add_row(std::move(row));
            }
        }
    // box rows keep every complemented variable in [0,1]
    for (long long j = 0; j < ly.ybar_count; ++j)
        lp.add_row(LpRow{{{int(j), 1.0}}, Rel::Le, 1.0});
    return lp;
}

Strategy random_ns_strategy(const Game& g, std::uint64_t seed) {
    SplitMix64 rng(seed);
    LinearProgram lp = build_ns_lp(g, false);
    for (auto& c : lp.objective) c = rng.next_double();
    LpOutcome out = solve_lp(lp);
    if (out.status != LpStatus::Optimal) throw GameError("non-signaling polytope LP failed");
    return extract_ns_strategy(g, false, out.x);
}

}  // namespace nsg
