#include <doctest.h>

#include <cmath>

#include "nsgame/game.hpp"
#include "nsgame/random.hpp"

using namespace nsg;

namespace {

// Uniform binary queries, accept iff a1 xor a2 == q1 and q2.
Game chsh() {
    std::vector<std::vector<std::string>> q = {{"q0", "q1"}, {"q0", "q1"}};
    std::vector<std::vector<std::string>> a = {{"a0", "a1"}, {"a0", "a1"}};
    std::vector<double> pi(4, 0.25);
    std::vector<std::uint8_t> acc(16, 0);
    for (int qq = 0; qq < 4; ++qq)
        for (int aa = 0; aa < 4; ++aa) {
            int q1 = qq >> 1, q2 = qq & 1, a1 = aa >> 1, a2 = aa & 1;
            acc[qq * 4 + aa] = ((a1 ^ a2) == (q1 & q2)) ? 1 : 0;
        }
    return Game::make(q, a, pi, acc);
}

Strategy pr_box(const Game& g) {
    Strategy s = Strategy::zeros(g);
    for (long long q = 0; q < 4; ++q)
        for (long long a = 0; a < 4; ++a)
            if (g.accepts(q, a)) s.rows[q][a] = 0.5;
    return s;
}

}  // namespace

TEST_CASE("restrict_assignment") {
    Assignment t{0b111, {0, 1, 0}};
    Assignment r = restrict_assignment(t, 0b101);
    CHECK(r.members == 0b101);
    CHECK(r.symbols == std::vector<int>{0, 0});

    CHECK(restrict_assignment(t, 0).symbols.empty());
    CHECK(restrict_assignment(t, 0b111) == t);
    CHECK_THROWS_AS(restrict_assignment(r, 0b010), GameError);
}

TEST_CASE("marginalize") {
    SubDistribution d(0b11, FlatSpace({2, 2}));
    SUBCASE("uniform marginal is uniform") {
        for (auto& v : d.p) v = 0.25;
        auto m = marginalize(d, 0b01);
        CHECK(m.p[0] == doctest::Approx(0.5));
        CHECK(m.p[1] == doctest::Approx(0.5));
    }
    SUBCASE("mass is preserved") {
        d.p = {0.4, 0.2, 0.2, 0.1};
        auto m = marginalize(d, 0b10);
        CHECK(m.mass() == doctest::Approx(0.9));
        CHECK(m.bottom() == doctest::Approx(0.1));
    }
    SUBCASE("perfect correlation marginalizes to uniform") {
        d.p = {0.5, 0.0, 0.0, 0.5};
        auto m = marginalize(d, 0b10);  // keep player 2
        CHECK(m.p[0] == doctest::Approx(0.5));
        CHECK(m.p[1] == doctest::Approx(0.5));
    }
    SUBCASE("tower property") {
        d = SubDistribution(0b111, FlatSpace({2, 2, 2}));
        SplitMix64 rng(5);
        for (auto& v : d.p) v = 0.1 * rng.next_double();
        auto ab = marginalize(d, 0b011);
        auto a_direct = marginalize(d, 0b001);
        auto a_two_step = marginalize(ab, 0b001);
        for (size_t i = 0; i < a_direct.p.size(); ++i)
            CHECK(a_direct.p[i] == doctest::Approx(a_two_step.p[i]).epsilon(1e-12));
    }
    SUBCASE("invalid subset") { CHECK_THROWS_AS(marginalize(d, 0b100), GameError); }
}

TEST_CASE("evaluate_value") {
    Game g = chsh();
    SUBCASE("PR box wins CHSH with probability one") {
        CHECK(evaluate_value(g, pr_box(g)) == 1.0);  // exact
    }
    SUBCASE("constant predicates") {
        std::vector<std::uint8_t> all1(16, 1), all0(16, 0);
        Game g1 = Game::make(g.query_labels(), g.answer_labels(), g.pi(), all1);
        Game g0 = Game::make(g.query_labels(), g.answer_labels(), g.pi(), all0);
        Strategy s = random_strategy(g, StrategyKind::LocalRandom, 99);
        CHECK(evaluate_value(g1, s) == doctest::Approx(1.0));
        CHECK(evaluate_value(g0, s) == 0.0);
    }
    SUBCASE("one-player hand computation") {
        // uniform over {q0,q1}; V accepts only (q0,a0); play a0 always -> 1/2
        std::vector<std::uint8_t> acc = {1, 0, 0, 0};
        Game g1 = Game::make({{"q0", "q1"}}, {{"a0", "a1"}}, {0.5, 0.5}, acc);
        Strategy s = Strategy::zeros(g1);
        s.rows[0][0] = 1.0;
        s.rows[1][0] = 1.0;
        CHECK(evaluate_value(g1, s) == doctest::Approx(0.5));
    }
    SUBCASE("missing entry for a supported query") {
        Strategy s = pr_box(g);
        s.present[2] = 0;
        CHECK_THROWS_AS(evaluate_value(g, s), GameError);
    }
    SUBCASE("monotone in accepting mass") {
        Strategy s = random_strategy(g, StrategyKind::SubNs, 7);
        double before = evaluate_value(g, s);
        for (long long q = 0; q < g.q_count(); ++q)
            for (long long a = 0; a < g.a_count(); ++a)
                if (g.accepts(q, a)) {
                    Strategy t = s;
                    double room = 1.0 - t.mass(q);
                    if (room <= 0) continue;
                    t.rows[q][a] += room;
                    CHECK(evaluate_value(g, t) >= before - 1e-12);
                }
    }
}

TEST_CASE("canonical_sim_family") {
    Game g = chsh();
    SUBCASE("non-signaling strategy: entries equal the common marginal") {
        Strategy s = pr_box(g);
        SimFamily f = canonical_sim_family(g, s);
        for (Mask m : {Mask(1), Mask(2)}) {
            for (long long qs = 0; qs < g.q_sub_count(m); ++qs) {
                REQUIRE(f.defined(m, qs));
                for (double v : f.entries[m][qs]) CHECK(v == doctest::Approx(0.5));
            }
        }
    }
    SUBCASE("entrywise max of two sharing marginals") {
        // two queries share q_{1}: marginals (0.6,0.4) and (0.5,0.5)
        std::vector<std::uint8_t> acc(16, 1);
        Game g2 = Game::make(g.query_labels(), g.answer_labels(), g.pi(), acc);
        Strategy s = Strategy::zeros(g2);
        // q=(q0,q0): P(a1=a0)=0.6; q=(q0,q1): P(a1=a0)=0.5
        s.rows[0] = {0.6, 0.0, 0.4, 0.0};
        s.rows[1] = {0.5, 0.0, 0.5, 0.0};
        s.rows[2] = {1.0, 0.0, 0.0, 0.0};
        s.rows[3] = {1.0, 0.0, 0.0, 0.0};
        SimFamily f = canonical_sim_family(g2, s);
        CHECK(f.entries[0b01][0][0] == doctest::Approx(0.6));
        CHECK(f.entries[0b01][0][1] == doctest::Approx(0.5));
    }
    SUBCASE("dominates every marginal and is pointwise minimal") {
        Game g3 = random_game({3, {2}, {2}, 0.5, true}, 1234);
        Strategy s = random_strategy(g3, StrategyKind::SubNs, 77);
        SimFamily f = canonical_sim_family(g3, s);
        for (Mask m = 1; m <= g3.full_mask(); ++m)
            for (long long qs = 0; qs < g3.q_sub_count(m); ++qs) {
                std::vector<double> sup(g3.a_sub_count(m), 0.0);
                for (long long q : g3.query_fibers(m)[qs]) {
                    auto mr = marginal_row(g3, s.rows[q], m);
                    for (long long i = 0; i < g3.a_sub_count(m); ++i) {
                        CHECK(mr[i] <= f.entries[m][qs][i] + 1e-12);
                        sup[i] = std::max(sup[i], mr[i]);
                    }
                }
                // minimality: the family equals the sup, entrywise
                for (long long i = 0; i < g3.a_sub_count(m); ++i)
                    CHECK(f.entries[m][qs][i] == doctest::Approx(sup[i]));
            }
    }
}

TEST_CASE("check_strategy") {
    Game g = chsh();
    SUBCASE("product strategies are non-signaling") {
        Strategy s = random_strategy(g, StrategyKind::LocalRandom, 3);
        CHECK(check_strategy(g, s, ModelSpec::ns()).pass);
        CHECK(check_strategy(g, s, ModelSpec::hrns()).pass);
        CHECK(check_strategy(g, s, ModelSpec::subns()).pass);
    }
    SUBCASE("local mixtures are non-signaling") {
        Strategy s = random_strategy(g, StrategyKind::LocalMixture, 4);
        CHECK(check_strategy(g, s, ModelSpec::ns()).pass);
    }
    SUBCASE("a planted marginal gap is found with its size") {
        Strategy s = pr_box(g);
        // Shift 0.2 of conditional mass at q=(q0,q0) from a=(a0,a0) to (a1,a0):
        // the S={1} marginal of player 1 changes by 0.2 against the fiber.
        s.rows[0] = {0.3, 0.0, 0.2, 0.5};
        auto rep = check_strategy(g, s, ModelSpec::ns(), 1e-7);
        CHECK_FALSE(rep.pass);
        CHECK(rep.worst == doctest::Approx(0.2));
    }
    SUBCASE("all-abort strategy: subNS passes, NS fails") {
        Strategy s = Strategy::zeros(g);
        CHECK(check_strategy(g, s, ModelSpec::subns()).pass);
        auto rep = check_strategy(g, s, ModelSpec::ns());
        CHECK_FALSE(rep.pass);
        CHECK(rep.worst == doctest::Approx(1.0));
    }
    SUBCASE("subNS-delta bounds the abort mass") {
        Strategy s = pr_box(g);
        for (auto& v : s.rows[1]) v *= 0.8;  // abort mass 0.2 at one query
        CHECK(check_strategy(g, s, ModelSpec::subns()).pass);
        CHECK(check_strategy(g, s, ModelSpec::subns_delta(0.25)).pass);
        CHECK_FALSE(check_strategy(g, s, ModelSpec::subns_delta(0.1)).pass);
    }
    SUBCASE("hrNS only quantifies over the support") {
        // point-mass pi: marginal mismatches off support are invisible to hrNS
        std::vector<double> pi = {1.0, 0.0, 0.0, 0.0};
        Game gs = Game::make(g.query_labels(), g.answer_labels(), pi, g.accept_table());
        Strategy s = pr_box(gs);
        s.rows[3] = {1.0, 0.0, 0.0, 0.0};  // signals wildly, but unsupported
        CHECK_FALSE(check_strategy(gs, s, ModelSpec::ns()).pass);
        CHECK(check_strategy(gs, s, ModelSpec::hrns()).pass);
    }
    SUBCASE("model implications on random instances") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            Game gr = random_game({2, {2}, {2}, 0.5, true}, seed);
            Strategy s = random_strategy(gr, StrategyKind::LocalMixture, seed + 100);
            auto ns = check_strategy(gr, s, ModelSpec::ns());
            auto hr = check_strategy(gr, s, ModelSpec::hrns());
            auto sub = check_strategy(gr, s, ModelSpec::subns());
            if (ns.pass) CHECK(hr.pass);
            bool full_mass = true;
            for (long long q = 0; q < gr.q_count(); ++q)
                full_mass &= std::abs(s.mass(q) - 1.0) <= 1e-9;
            if (hr.pass && full_mass) CHECK(sub.pass);
        }
    }
    SUBCASE("full-mass marginals sum to one for every subset") {
        Strategy s = random_strategy(g, StrategyKind::LocalRandom, 17);
        for (Mask m = 1; m <= g.full_mask(); ++m)
            for (long long q = 0; q < g.q_count(); ++q) {
                auto mr = marginal_row(g, s.rows[q], m);
                double tot = 0.0;
                for (double v : mr) tot += v;
                CHECK(tot == doctest::Approx(1.0).epsilon(1e-9));
            }
    }
}

TEST_CASE("random_instance determinism and postconditions") {
    RandomGameParams params{2, {2}, {3}, 0.4, true};
    Game a = random_game(params, 11);
    Game b = random_game(params, 11);
    CHECK(a.pi() == b.pi());
    CHECK(a.accept_table() == b.accept_table());
    Game c = random_game(params, 12);
    CHECK(a.accept_table() != c.accept_table());

    SUBCASE("density one accepts everything") {
        Game g1 = random_game({2, {2}, {2}, 1.0, true}, 5);
        for (auto v : g1.accept_table()) CHECK(v == 1);
    }
    SUBCASE("pi is a distribution, positive under full support") {
        double mass = 0.0;
        for (double v : a.pi()) {
            CHECK(v > 0.0);
            mass += v;
        }
        CHECK(std::abs(mass - 1.0) <= kMassTol);
    }
    SUBCASE("generated subNS strategies pass the checker") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            Game g = random_game({3, {2}, {2}, 0.5, true}, seed);
            Strategy s = random_strategy(g, StrategyKind::SubNs, seed * 31);
            CHECK(check_strategy(g, s, ModelSpec::subns(), 1e-9).pass);
        }
    }
    SUBCASE("planted instance is perfect and damping is certified subNS") {
        PlantedInstance pl = planted_game({2, {2}, {2}, 0.2, true}, 900);
        CHECK(evaluate_value(pl.game, pl.perfect) == doctest::Approx(1.0));
        Strategy d = damped_strategy(pl.game, pl.perfect, 0.01, 0.0, 1);
        CHECK(evaluate_value(pl.game, d) == doctest::Approx(0.99));
        CHECK(check_strategy(pl.game, d, ModelSpec::subns(), 1e-9).pass);
        CHECK(check_strategy(pl.game, d, ModelSpec::subns_delta(0.0100001), 1e-9).pass);
    }
}
