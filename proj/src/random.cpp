#include "nsgame/random.hpp"

#include <algorithm>
#include <cmath>

namespace nsg {

namespace {

std::vector<std::string> numbered_labels(const char* prefix, int n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

std::vector<int> resolve_sizes(const std::vector<int>& sizes, int k, const char* what) {
    if (sizes.empty()) throw GameError(std::string(what) + " sizes missing");
    std::vector<int> out = sizes;
    if (int(out.size()) == 1) out.assign(k, out[0]);
    if (int(out.size()) != k) throw GameError(std::string(what) + " sizes must match player count");
    for (int v : out)
        if (v < 1) throw GameError(std::string(what) + " sizes must be >= 1");
    return out;
}

std::vector<double> random_simplex(SplitMix64& rng, long long n) {
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& v : w) {
        v = rng.exponential();
        total += v;
    }
    for (auto& v : w) v /= total;
    // Compensate rounding so the weights sum to 1 exactly enough for kMassTol.
    double sum = 0.0;
    for (double v : w) sum += v;
    w.back() += 1.0 - sum;
    return w;
}

// One random response table per player: player i maps each own query symbol
// to a distribution over its answers.
std::vector<std::vector<std::vector<double>>> random_local_tables(const Game& g, SplitMix64& rng) {
    std::vector<std::vector<std::vector<double>>> t(g.k());
    for (int i = 0; i < g.k(); ++i) {
        int nq = int(g.query_labels()[i].size());
        int na = int(g.answer_labels()[i].size());
        t[i].resize(nq);
        for (int qi = 0; qi < nq; ++qi) t[i][qi] = random_simplex(rng, na);
    }
    return t;
}

void add_local_product(const Game& g, const std::vector<std::vector<std::vector<double>>>& tables,
                       double weight, Strategy& into) {
    for (long long q = 0; q < g.q_count(); ++q) {
        for (long long a = 0; a < g.a_count(); ++a) {
            double p = weight;
            for (int i = 0; i < g.k(); ++i)
                p *= tables[i][g.qspace().digit(q, i)][g.aspace().digit(a, i)];
            into.rows[q][a] += p;
        }
    }
}

// One pass over all (S, q_S) scaling each fiber so the canonical dominating
// family has mass at most 1.  Scaling only shrinks rows, so constraints fixed
// earlier stay fixed.
void trim_to_subns(const Game& g, Strategy& p) {
    const Mask full = g.full_mask();
    for (Mask s = 1; s <= full; ++s) {
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            std::vector<double> best(g.a_sub_count(s), 0.0);
            for (long long q : g.query_fibers(s)[qs]) {
                std::vector<double> m = marginal_row(g, p.rows[q], s);
                for (long long i = 0; i < g.a_sub_count(s); ++i) best[i] = std::max(best[i], m[i]);
            }
            double total = 0.0;
            for (double v : best) total += v;
            if (total > 1.0) {
                double scale = 1.0 / total;
                for (long long q : g.query_fibers(s)[qs])
                    for (double& v : p.rows[q]) v *= scale;
            }
        }
    }
}

}  // namespace

Game random_game(const RandomGameParams& params, std::uint64_t seed) {
    SplitMix64 root(seed);
    SplitMix64 pi_rng = root.split(1);
    SplitMix64 pred_rng = root.split(2);
    SplitMix64 supp_rng = root.split(3);

    std::vector<int> qs = resolve_sizes(params.query_sizes, params.k, "query");
    std::vector<int> as = resolve_sizes(params.answer_sizes, params.k, "answer");

    std::vector<std::vector<std::string>> qlabels, alabels;
    for (int i = 0; i < params.k; ++i) {
        qlabels.push_back(numbered_labels("q", qs[i]));
        alabels.push_back(numbered_labels("a", as[i]));
    }

    FlatSpace qspace(qs), aspace(as);
    std::vector<double> pi = random_simplex(pi_rng, qspace.count);
    if (!params.full_support && qspace.count > 1) {
        long long keep = std::max<long long>(1, qspace.count / 2);
        std::vector<long long> order(qspace.count);
        for (long long i = 0; i < qspace.count; ++i) order[i] = i;
        for (long long i = qspace.count - 1; i > 0; --i)
            std::swap(order[i], order[supp_rng.next_below(i + 1)]);
        for (long long i = keep; i < qspace.count; ++i) pi[order[i]] = 0.0;
        double total = 0.0;
        for (double v : pi) total += v;
        for (double& v : pi) v /= total;
        double sum = 0.0;
        for (double v : pi) sum += v;
        pi[order[0]] += 1.0 - sum;
    }

    std::vector<std::uint8_t> accept(qspace.count * aspace.count, 0);
    for (auto& v : accept) v = pred_rng.next_double() < params.density ? 1 : 0;

    return Game::make(std::move(qlabels), std::move(alabels), std::move(pi), std::move(accept));
}

Strategy random_strategy(const Game& g, StrategyKind kind, std::uint64_t seed) {
    SplitMix64 rng(seed);
    switch (kind) {
        case StrategyKind::LocalRandom: {
            Strategy p = Strategy::zeros(g);
            auto tables = random_local_tables(g, rng);
            add_local_product(g, tables, 1.0, p);
            return p;
        }
        case StrategyKind::LocalMixture: {
            Strategy p = Strategy::zeros(g);
            int parts = 2 + int(rng.next_below(3));
            std::vector<double> w = random_simplex(rng, parts);
            for (int t = 0; t < parts; ++t) {
                auto tables = random_local_tables(g, rng);
                add_local_product(g, tables, w[t], p);
            }
            return p;
        }
        case StrategyKind::SubNs: {
            Strategy p = Strategy::zeros(g);
            for (long long q = 0; q < g.q_count(); ++q) {
                std::vector<double> row = random_simplex(rng, g.a_count());
                double mass = 0.6 + 0.4 * rng.next_double();
                for (long long a = 0; a < g.a_count(); ++a) p.rows[q][a] = mass * row[a];
            }
            trim_to_subns(g, p);
            return p;
        }
    }
    throw GameError("unknown strategy kind");
}

PlantedInstance planted_game(const RandomGameParams& params, std::uint64_t seed,
                             double extra_density) {
    SplitMix64 root(seed);
    SplitMix64 plant_rng = root.split(11);

    RandomGameParams base = params;
    base.density = extra_density;
    Game g0 = random_game(base, root.split(12).next_u64());

    // Deterministic local answers f_i(q_i); force the predicate to accept them.
    std::vector<std::vector<int>> f(g0.k());
    for (int i = 0; i < g0.k(); ++i) {
        int nq = int(g0.query_labels()[i].size());
        int na = int(g0.answer_labels()[i].size());
        f[i].resize(nq);
        for (int qi = 0; qi < nq; ++qi) f[i][qi] = int(plant_rng.next_below(na));
    }
    std::vector<std::uint8_t> accept = g0.accept_table();
    std::vector<long long> planted_a(g0.q_count(), 0);
    for (long long q = 0; q < g0.q_count(); ++q) {
        std::vector<int> tup(g0.k());
        for (int i = 0; i < g0.k(); ++i) tup[i] = f[i][g0.qspace().digit(q, i)];
        long long a = g0.aspace().index(tup);
        accept[q * g0.a_count() + a] = 1;
        planted_a[q] = a;
    }
    PlantedInstance out{Game::make(g0.query_labels(), g0.answer_labels(), g0.pi(), std::move(accept)),
                        Strategy{}};
    out.perfect = Strategy::zeros(out.game);
    for (long long q = 0; q < out.game.q_count(); ++q)
        out.perfect.rows[q][planted_a[q]] = 1.0;
    return out;
}

Strategy damped_strategy(const Game& g, const Strategy& base, double theta, double jitter,
                         std::uint64_t seed) {
    SplitMix64 rng(seed);
    Strategy p = base;
    for (long long q = 0; q < g.q_count(); ++q)
        for (double& v : p.rows[q]) v *= (1.0 - theta);
    if (jitter > 0.0) {
        for (long long q = 0; q < g.q_count(); ++q)
            for (long long a = 0; a < g.a_count(); ++a)
                p.rows[q][a] = std::max(0.0, p.rows[q][a] + jitter * (rng.next_double() - 0.5));
        trim_to_subns(g, p);
    }
    return p;
}

}  // namespace nsg
