#pragma once

#include <optional>

#include "nsgame/game.hpp"
#include "nsgame/lp.hpp"

namespace nsg {

// Variable layout of the sub-non-signaling value LP: the x block (one
// variable per (q,a), already weighted by pi) followed by one Sim block per
// nonempty subset.
struct SubNsLayout {
    long long x_count = 0;
    std::vector<long long> sim_base;  // by mask; -1 for empty subset
    long long total = 0;

    static SubNsLayout make(const Game& g);
    long long x(const Game& g, long long q, long long a) const { return q * g.a_count() + a; }
    long long sim(const Game& g, Mask s, long long qs, long long as) const {
        return sim_base[s] + qs * g.a_sub_count(s) + as;
    }
};

// Variable layout shared by the nonnegative dual and its packing/covering
// form: the complemented ybar block then the z block.
struct NonNegDualLayout {
    std::vector<long long> ybar_base, z_base;  // by mask; -1 for empty subset
    long long ybar_count = 0, total = 0;

    static NonNegDualLayout make(const Game& g);
    long long ybar(const Game& g, Mask s, long long q, long long as) const {
        return ybar_base[s] + q * g.a_sub_count(s) + as;
    }
    long long z(Mask s, long long qs) const { return z_base[s] + qs; }
};

// The value LP for a strategy model.
//  - subns / subns-delta: maximize sum x_q(a) V(q,a) over x >= 0 and the
//    per-subset dominating distributions, with the substitution
//    x_q(a) = pi(q) p_q(a); the delta variant adds per-query mass floors.
//  - ns / hrns: probability rows plus pairwise marginal-equality rows; the
//    honest-referee form quantifies only over supported queries.
LinearProgram build_value_lp(const Game& g, const ModelSpec& model);

struct ExactValue {
    double value = 0.0;
    Strategy strategy;
    std::optional<SimFamily> sim;  // dominating family for the subns models
};

// Solve the model's value LP and recover an optimal strategy (and dominating
// family when applicable).  Two-player non-signaling/honest-referee values
// are solved through an equivalent support-compressed bipartite LP; see the
// module notes in value_lp.cpp.
ExactValue exact_value(const Game& g, const ModelSpec& model);

// The minimization with nonnegative coefficients whose optimum equals the
// sub-non-signaling value.
LinearProgram build_nonneg_dual(const Game& g);

// A vertex of the non-signaling polytope chosen by a seeded random
// objective.  Useful as a generator of structured non-signaling strategies.
Strategy random_ns_strategy(const Game& g, std::uint64_t seed);

}  // namespace nsg
