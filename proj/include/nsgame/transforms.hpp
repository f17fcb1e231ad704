#pragma once

#include "nsgame/game.hpp"

namespace nsg {

struct TransformError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The 2-player game whose first player receives a full query tuple and whose
// second player receives a random subset of its coordinates, checked for
// consistency with the first player's answers.
struct ReducedGame {
    Game game;  // 2-player: player 1 over Q, player 2 over {(S, q_S)}
    // player-2 symbol <-> (subset, restricted tuple) translation
    std::vector<std::pair<Mask, long long>> q2_decode, a2_decode;
    std::vector<std::vector<long long>> q2_encode, a2_encode;  // [mask][sub index]

    long long pair_query(long long q, long long q2) const {
        return q * (long long)q2_decode.size() + q2;
    }
    long long pair_answer(long long a, long long a2) const {
        return a * (long long)a2_decode.size() + a2;
    }
};

ReducedGame build_prover_reduction(const Game& g);

// Local (per-player response table) strategies lift to the reduced game by
// answering both roles from the same tables; used by tests and the harness.
Strategy lift_local_to_reduced(const Game& g, const ReducedGame& rg,
                               const std::vector<std::vector<int>>& answer_fn);

struct LiftResult {
    Strategy strategy;      // sub-non-signaling strategy for the original game
    SimFamily certificate;  // second-player marginals of the reduced strategy
};

// Closed-form conversion of a non-signaling strategy of the reduced game
// into a sub-non-signaling strategy of the original: the per-subset
// executions are independent, an answer is released only when every
// execution accepts, and the released answer comes from a uniformly chosen
// execution.
LiftResult lift_to_subns(const Game& g, const ReducedGame& rg, const Strategy& reduced_strategy,
                         double tol = kDefaultCheckTol);

// ---- conversion pipeline -------------------------------------------------

// Per-query abort budget: the sum over subsets of the pi-conditional average
// abort mass of the fiber through the query.  Conditioning on a fiber with
// no pi mass contributes zero.
struct NuProfile {
    std::vector<double> nu;  // per query
    double average = 0.0;    // E_pi[nu]
};
NuProfile compute_nu(const Game& g, const Strategy& p);

// Lower each query's subset marginals to the fiber average (proportionally
// within the affected answers), recording the paper-style excess per query.
struct TrimResult {
    Strategy trimmed;
    std::vector<double> delta_q;  // per query: sum of initial excesses
};
TrimResult trim_outliers(const Game& g, const Strategy& p);

// Entrywise-max envelope and its subset-monotone correction, built by
// induction on subset size with codimension-one corrections.
struct XiRecord {
    Mask t = 0;
    long long qt = -1;
    Mask s = 0;
    long long as = -1;
    double amount = 0.0;
};
struct Sim1Result {
    SimFamily envelope;  // entrywise max over each fiber
    SimFamily monotone;  // corrected family
    std::vector<std::vector<double>> xi_total;  // [mask][qT]
    std::vector<XiRecord> records;
};
Sim1Result build_sim1(const Game& g, const Strategy& trimmed);

// Queries whose full-answer abort mass stays below the measured-mean-over-
// delta threshold, and the game conditioned on them.
struct GoodSelection {
    double eps1 = 0.0;       // measured E_pi of the full-subset abort mass
    double threshold = 0.0;  // eps1 / delta
    std::vector<char> good;  // per query
    double good_mass = 0.0;  // Pr_pi[GOOD]
    double tv_distance = 0.0;
    Game gstar;              // original predicate with the conditioned distribution
};
GoodSelection select_good(const Game& g, const SimFamily& sim1, double delta);

// Rescale each family entry so its mass depends only on the subset size
// (alpha^|S|), defined on restrictions of selected queries.
struct Sim2Result {
    SimFamily family;
    std::vector<std::vector<double>> beta;  // [mask][qS]; -1 when undefined
    double alpha = 0.0;
};
Sim2Result normalize_sim2(const Game& g, const SimFamily& sim1, const GoodSelection& sel,
                          double delta);

// Damp each entry by k^{-2|S|} so the alternating-sum extension below stays
// nonnegative.  Rejects single-player games.
SimFamily scale_sim3(const Game& g, const SimFamily& sim2);

// Answer alphabets extended with a fresh placeholder symbol per player; the
// predicate rejects any answer containing it.
Game extend_with_star(const Game& g, const std::vector<double>& pi);
long long all_star_answer(const Game& gext);

// Star-padded strategy whose every subset marginal matches the damped family
// exactly, by inclusion-exclusion over supersets.
struct StarExtensionResult {
    Strategy p_star;            // over the extended game; rows only on selected queries
    double alpha_total = 0.0;   // common total mass of the extended rows
    double min_entry = 0.0;     // most negative alternating sum seen (pre-clamp)
    double max_mass_deviation = 0.0;
};
StarExtensionResult expand_inclusion_exclusion(const Game& g, const Game& gext,
                                               const SimFamily& sim3,
                                               const std::vector<char>& good);

// Make every selected row an exact probability distribution: scale down when
// the common mass exceeds one, else park the deficit on the all-star answer.
// Unselected queries get the fixed all-star point distribution.
struct NormalizedStar {
    Strategy p;      // p** over the extended game
    double gamma = 1.0;
};
NormalizedStar normalize_pstar(const Game& gext, const Strategy& p_star, double alpha_total,
                               const std::vector<char>& good);

// Replace each placeholder coordinate with the default answer; membership in
// the equality models is preserved and the value never drops.
Strategy fold_stars(const Game& g, const Game& gext, const Strategy& p_star_star,
                    const Assignment& default_answer);

struct StageCheck {
    std::string name;
    bool pass = true;
    double worst = 0.0;
    std::string witness;
};

struct PipelineTrace {
    int k = 0;
    double delta = 0.0;
    double input_value = 0.0, input_eps = 0.0;
    NuProfile nu;
    TrimResult trim;
    Sim1Result sim1;
    GoodSelection sel;
    Sim2Result sim2;
    SimFamily sim3;
    Game gstar_ext;
    Strategy p_star, p_star_star;
    double alpha_total = 0.0, gamma = 1.0;
    double eps2 = 0.0;        // 1 - conditioned value of the equalized family
    double final_value = 0.0; // value of the output on the extended game
    double bound = 0.0;       // k^{-3k} (1 - k^{2k} eps/delta)
    bool good_is_all = false;
    std::vector<StageCheck> checks;
    bool all_pass = true;

    const StageCheck* find_check(const std::string& name) const;
};

// Full conversion: trim, monotone correction, query selection, mass
// equalization, damping, inclusion-exclusion extension, normalization.
// Every stage inequality is machine-checked into the trace; with strict set
// (the default) any violation aborts with the stage name and witness.
PipelineTrace run_subns_to_hrns(const Game& g, const Strategy& p, double delta,
                                bool strict = true);

}  // namespace nsg
