#pragma once

#include "nsgame/game.hpp"

namespace nsg {

struct RandomGameParams {
    int k = 2;
    std::vector<int> query_sizes;   // per player; broadcast if one entry
    std::vector<int> answer_sizes;
    double density = 0.5;           // i.i.d. acceptance probability
    bool full_support = true;       // false: zero out a random half of pi
};

// Deterministic in the seed.  pi is a normalized positive exponential sample
// (a Dirichlet(1,...,1) draw) unless full_support is disabled.
Game random_game(const RandomGameParams& params, std::uint64_t seed);

enum class StrategyKind {
    LocalRandom,    // product of independent per-player response tables
    LocalMixture,   // convex mixture of local strategies (non-signaling)
    SubNs,          // random rows trimmed to canonical-family feasibility
};

Strategy random_strategy(const Game& g, StrategyKind kind, std::uint64_t seed);

// (1-theta) times a perfect local strategy for a game whose predicate was
// built to accept it; used for high-value conversion inputs.
struct PlantedInstance {
    Game game;
    Strategy perfect;  // value exactly 1
};
PlantedInstance planted_game(const RandomGameParams& params, std::uint64_t seed,
                             double extra_density = 0.15);

// Scale all rows by (1-theta), then optionally jitter entries and re-trim to
// sub-non-signaling feasibility.  Keeps the value within a few theta of 1 on
// a planted instance.
Strategy damped_strategy(const Game& g, const Strategy& base, double theta, double jitter,
                         std::uint64_t seed);

}  // namespace nsg
