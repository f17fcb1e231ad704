#include <doctest.h>

#include <cmath>

#include "nsgame/random.hpp"
#include "nsgame/transforms.hpp"
#include "nsgame/value_lp.hpp"

using namespace nsg;

namespace {

Strategy constant_strategy(const Game& g, const std::vector<double>& row) {
    Strategy s = Strategy::zeros(g);
    for (long long q = 0; q < g.q_count(); ++q) s.rows[q] = row;
    return s;
}

}  // namespace

TEST_CASE("reduced game shape and value-1 lift") {
    Game g = random_game({2, {2}, {2}, 0.5, true}, 1);
    ReducedGame rg = build_prover_reduction(g);
    CHECK(rg.game.k() == 2);
    // subsets {} {1} {2} {1,2} contribute 1+2+2+4 restricted queries
    CHECK(rg.game.query_labels()[1].size() == 9);
    CHECK(rg.game.answer_labels()[1].size() == 9);
    CHECK(rg.game.query_labels()[0].size() == 4);

    SUBCASE("k=1 is rejected") {
        Game g1 = random_game({1, {2}, {2}, 0.5, true}, 2);
        CHECK_THROWS_AS(build_prover_reduction(g1), TransformError);
    }
    SUBCASE("local strategies transfer with the same value") {
        for (std::uint64_t seed = 10; seed < 16; ++seed) {
            Game gr = random_game({seed % 2 ? 2 : 3, {2}, {2}, 0.5, true}, seed);
            ReducedGame rr = build_prover_reduction(gr);
            SplitMix64 rng(seed * 3);
            std::vector<std::vector<int>> fn(gr.k());
            for (int i = 0; i < gr.k(); ++i) {
                fn[i].resize(gr.query_labels()[i].size());
                for (auto& v : fn[i]) v = int(rng.next_below(gr.answer_labels()[i].size()));
            }
            Strategy local = lift_local_to_reduced(gr, rr, fn);
            Strategy direct = Strategy::zeros(gr);
            for (long long q = 0; q < gr.q_count(); ++q) {
                std::vector<int> tup(gr.k());
                for (int i = 0; i < gr.k(); ++i) tup[i] = fn[i][gr.qspace().digit(q, i)];
                direct.rows[q][gr.aspace().index(tup)] = 1.0;
            }
            CHECK(evaluate_value(rr.game, local) ==
                  doctest::Approx(evaluate_value(gr, direct)).epsilon(1e-12));
            CHECK(check_strategy(rr.game, local, ModelSpec::ns()).pass);
        }
    }
    SUBCASE("an everywhere-accepting game reaches reduced value 1") {
        Game g1 = random_game({2, {2}, {2}, 1.0, true}, 3);
        ReducedGame r1 = build_prover_reduction(g1);
        std::vector<std::vector<int>> fn = {{0, 0}, {0, 0}};
        Strategy local = lift_local_to_reduced(g1, r1, fn);
        CHECK(evaluate_value(r1.game, local) == doctest::Approx(1.0));
    }
}

TEST_CASE("lift of reduced strategies") {
    SUBCASE("a perfect consistent strategy lifts to a perfect strategy") {
        Game g = random_game({2, {2}, {2}, 1.0, true}, 21);
        ReducedGame rg = build_prover_reduction(g);
        Strategy local = lift_local_to_reduced(g, rg, {{0, 1}, {1, 0}});
        LiftResult lift = lift_to_subns(g, rg, local);
        CHECK(evaluate_value(g, lift.strategy) == doctest::Approx(1.0));
        for (long long q = 0; q < g.q_count(); ++q)
            CHECK(lift.strategy.mass(q) == doctest::Approx(1.0));
        CHECK(check_strategy(g, lift.strategy, ModelSpec::subns(), 1e-9).pass);
    }
    SUBCASE("a strategy that always fails consistency lifts to all-abort") {
        Game g = random_game({2, {2}, {2}, 1.0, true}, 22);
        ReducedGame rg = build_prover_reduction(g);
        // player 2 answers a fixed *wrong-subset* element: every nonempty
        // consistency check fails, so only abort mass remains
        Strategy bad = Strategy::zeros(rg.game);
        const long long na2 = (long long)rg.a2_decode.size();
        for (long long pq = 0; pq < rg.game.q_count(); ++pq) {
            // answer (a1=0) and the player-2 symbol of the *empty* subset,
            // regardless of the asked subset
            bad.rows[pq][0 * na2 + rg.a2_encode[0][0]] = 1.0;
        }
        REQUIRE(check_strategy(rg.game, bad, ModelSpec::ns()).pass);
        LiftResult lift = lift_to_subns(g, rg, bad);
        // only the empty-subset execution can accept; any nonempty asked
        // subset rejects, and all must accept simultaneously
        CHECK(evaluate_value(g, lift.strategy) == doctest::Approx(0.0));
        for (long long q = 0; q < g.q_count(); ++q)
            CHECK(lift.strategy.mass(q) == doctest::Approx(0.0));
    }
    SUBCASE("non-non-signaling inputs are rejected") {
        Game g = random_game({2, {2}, {2}, 0.5, true}, 23);
        ReducedGame rg = build_prover_reduction(g);
        Strategy junk = random_strategy(rg.game, StrategyKind::SubNs, 5);
        CHECK_THROWS_AS(lift_to_subns(g, rg, junk), TransformError);
    }
    SUBCASE("optimal reduced strategies lift to certified sub-non-signaling ones") {
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            Game g = random_game({2, {2}, {2}, 0.45 + 0.1 * (seed % 2), true}, seed * 7717);
            ReducedGame rg = build_prover_reduction(g);
            ExactValue ev = exact_value(rg.game, ModelSpec::ns());
            LiftResult lift = lift_to_subns(g, rg, ev.strategy, 1e-6);
            double eps_star = 1.0 - ev.value;
            CHECK(check_strategy(g, lift.strategy, ModelSpec::subns(), 1e-6).pass);
            double lifted = evaluate_value(g, lift.strategy);
            CHECK(lifted >= 1.0 - std::pow(2.0, g.k()) * eps_star - 1e-6);
            // the certificate is made of sub-distributions dominating the lift
            for (Mask s = 1; s <= g.full_mask(); ++s)
                for (long long q = 0; q < g.q_count(); ++q) {
                    auto m = marginal_row(g, lift.strategy.rows[q], s);
                    long long qs = g.restrict_query(q, s);
                    REQUIRE(lift.certificate.defined(s, qs));
                    CHECK(lift.certificate.entry_mass(s, qs) <= 1.0 + 1e-6);
                    for (long long i = 0; i < g.a_sub_count(s); ++i)
                        CHECK(m[i] <= lift.certificate.entries[s][qs][i] + 1e-6);
                }
        }
    }
}

TEST_CASE("abort profile") {
    Game g = random_game({2, {2}, {2}, 0.5, true}, 41);
    SUBCASE("full-mass strategies have a zero profile") {
        Strategy s = random_strategy(g, StrategyKind::LocalRandom, 1);
        NuProfile nu = compute_nu(g, s);
        for (double v : nu.nu) CHECK(v == doctest::Approx(0.0));
    }
    SUBCASE("uniform abort mass scales with the subset count") {
        Strategy s = random_strategy(g, StrategyKind::LocalRandom, 2);
        for (auto& row : s.rows)
            for (double& v : row) v *= 0.9;
        NuProfile nu = compute_nu(g, s);
        for (double v : nu.nu) CHECK(v == doctest::Approx(0.1 * 4.0).epsilon(1e-9));
    }
    SUBCASE("spot check against direct conditional sums") {
        Strategy s = random_strategy(g, StrategyKind::SubNs, 3);
        NuProfile nu = compute_nu(g, s);
        // brute-force recomputation for one query
        long long q0 = 2;
        double want = 0.0;
        for (Mask mask = 0; mask <= g.full_mask(); ++mask) {
            double num = 0.0, den = 0.0;
            for (long long q = 0; q < g.q_count(); ++q) {
                if (g.restrict_query(q, mask) != g.restrict_query(q0, mask)) continue;
                den += g.pi(q);
                num += g.pi(q) * (1.0 - s.mass(q));
            }
            want += den > 0 ? num / den : 0.0;
        }
        CHECK(nu.nu[q0] == doctest::Approx(want).epsilon(1e-12));
        double avg = 0.0;
        for (long long q = 0; q < g.q_count(); ++q) avg += g.pi(q) * nu.nu[q];
        CHECK(nu.average == doctest::Approx(avg));
    }
}

TEST_CASE("outlier trimming") {
    Game g = random_game({2, {2}, {2}, 0.5, true}, 51);
    SUBCASE("non-signaling strategies are left untouched") {
        Strategy s = random_strategy(g, StrategyKind::LocalMixture, 4);
        TrimResult t = trim_outliers(g, s);
        for (long long q = 0; q < g.q_count(); ++q) {
            CHECK(t.delta_q[q] == doctest::Approx(0.0));
            for (long long a = 0; a < g.a_count(); ++a)
                CHECK(t.trimmed.rows[q][a] == doctest::Approx(s.rows[q][a]).epsilon(1e-12));
        }
    }
    SUBCASE("all-abort strategies are left untouched") {
        Strategy s = Strategy::zeros(g);
        TrimResult t = trim_outliers(g, s);
        for (long long q = 0; q < g.q_count(); ++q) CHECK(t.trimmed.mass(q) == 0.0);
    }
    SUBCASE("a constructed outlier is lowered exactly to the fiber average") {
        // uniform pi over 4 queries; queries 0 and 1 share q_{1}
        Strategy s = constant_strategy(g, {0.25, 0.25, 0.25, 0.25});
        s.rows[0] = {0.45, 0.25, 0.05, 0.25};  // player-1 marginal at a0: 0.7
        // fiber {0,1} average of that marginal: (0.7 + 0.5)/2 weighted by pi
        double w0 = g.pi(0) / (g.pi(0) + g.pi(1));
        double avg = w0 * 0.7 + (1 - w0) * 0.5;
        TrimResult t = trim_outliers(g, s);
        auto m = marginal_row(g, t.trimmed.rows[0], 0b01);
        CHECK(m[0] == doctest::Approx(avg).epsilon(1e-9));
        CHECK(t.delta_q[0] >= 0.7 - avg - 1e-12);
        // the trim invariant: every defined fiber average now dominates
        for (Mask mask = 1; mask <= g.full_mask(); ++mask)
            for (long long q = 0; q < g.q_count(); ++q) {
                auto mm = marginal_row(g, t.trimmed.rows[q], mask);
                long long qs = g.restrict_query(q, mask);
                double fm = 0.0;
                std::vector<double> favg(g.a_sub_count(mask), 0.0);
                for (long long q2 : g.query_fibers(mask)[qs]) {
                    fm += g.pi(q2);
                    auto m2 = marginal_row(g, s.rows[q2], mask);
                    for (size_t i = 0; i < favg.size(); ++i) favg[i] += g.pi(q2) * m2[i];
                }
                if (fm == 0.0) continue;
                for (size_t i = 0; i < favg.size(); ++i)
                    CHECK(mm[i] <= favg[i] / fm + 1e-9);
            }
    }
}

TEST_CASE("monotone family construction") {
    SUBCASE("non-signaling inputs need no correction") {
        Game g = random_game({3, {2}, {2}, 0.5, true}, 61);
        Strategy s = random_strategy(g, StrategyKind::LocalMixture, 5);
        Sim1Result r = build_sim1(g, trim_outliers(g, s).trimmed);
        CHECK(r.records.empty());
        for (Mask mask = 1; mask <= g.full_mask(); ++mask)
            for (long long qs = 0; qs < g.q_sub_count(mask); ++qs)
                for (long long as = 0; as < g.a_sub_count(mask); ++as)
                    CHECK(r.monotone.entries[mask][qs][as] ==
                          doctest::Approx(r.envelope.entries[mask][qs][as]));
    }
    SUBCASE("singleton entries always equal the envelope") {
        Game g = random_game({3, {2}, {2}, 0.5, true}, 62);
        Strategy s = random_strategy(g, StrategyKind::SubNs, 6);
        Sim1Result r = build_sim1(g, trim_outliers(g, s).trimmed);
        for (Mask mask : {Mask(1), Mask(2), Mask(4)})
            for (long long qs = 0; qs < g.q_sub_count(mask); ++qs)
                for (long long as = 0; as < g.a_sub_count(mask); ++as)
                    CHECK(r.monotone.entries[mask][qs][as] ==
                          doctest::Approx(r.envelope.entries[mask][qs][as]));
        for (const auto& rec : r.records) CHECK(popcount(rec.t) >= 2);
    }
}

TEST_CASE("query selection") {
    Game g = random_game({3, {2}, {2}, 0.6, true}, 71);
    SUBCASE("no abort mass keeps every query") {
        Strategy s = random_strategy(g, StrategyKind::LocalRandom, 7);
        Sim1Result r = build_sim1(g, trim_outliers(g, s).trimmed);
        GoodSelection sel = select_good(g, r.monotone, 0.3);
        CHECK(sel.eps1 == doctest::Approx(0.0));
        for (long long q = 0; q < g.q_count(); ++q) CHECK(sel.good[q] == 1);
        CHECK(sel.good_mass == doctest::Approx(1.0));
        CHECK(sel.tv_distance == doctest::Approx(0.0));
        for (long long q = 0; q < g.q_count(); ++q)
            CHECK(sel.gstar.pi(q) == doctest::Approx(g.pi(q)));
    }
    SUBCASE("hand-computed threshold arithmetic on a uniform distribution") {
        // uniform pi over 8 queries; craft a family whose full-subset entries
        // have abort mass b everywhere except one query with factor f.
        std::vector<double> pi(8, 0.125);
        Game gu = Game::make(g.query_labels(), g.answer_labels(), pi, g.accept_table());
        auto crafted = [&](double f) {
            SimFamily fam = SimFamily::undefined(gu);
            for (Mask mask = 1; mask <= gu.full_mask(); ++mask)
                for (long long qs = 0; qs < gu.q_sub_count(mask); ++qs) {
                    std::vector<double> e(gu.a_sub_count(mask), 0.0);
                    double bot = mask == gu.full_mask() ? (qs == 0 ? f * 0.01 : 0.01) : 0.0;
                    e[0] = 1.0 - bot;
                    fam.entries[mask][qs] = std::move(e);
                }
            return fam;
        };
        // mean with factor 10: (7 + 10)/8 * 0.01; threshold at delta=0.2
        GoodSelection s10 = select_good(gu, crafted(10.0), 0.2);
        CHECK(s10.eps1 == doctest::Approx(0.01 * 17.0 / 8.0));
        CHECK(s10.good[0] == 1);  // 0.1 <= (0.irrelevant) 0.0212/0.2 = 0.106
        GoodSelection s50 = select_good(gu, crafted(50.0), 0.2);
        CHECK(s50.good[0] == 0);  // 0.5 > (0.07125/0.2) = 0.35625
        CHECK(s50.good_mass == doctest::Approx(7.0 / 8.0));
        CHECK(s50.tv_distance == doctest::Approx(1.0 / 8.0));
        CHECK(s50.good_mass >= 1.0 - 0.2 - 1e-12);  // the selection bound
        for (long long q = 1; q < 8; ++q)
            CHECK(s50.gstar.pi(q) == doctest::Approx(0.125 / s50.good_mass));
    }
    SUBCASE("delta outside (0,1] is rejected") {
        Strategy s = random_strategy(g, StrategyKind::SubNs, 8);
        Sim1Result r = build_sim1(g, trim_outliers(g, s).trimmed);
        CHECK_THROWS_AS(select_good(g, r.monotone, 0.0), TransformError);
        CHECK_THROWS_AS(select_good(g, r.monotone, 1.25), TransformError);
    }
}

TEST_CASE("mass equalization and damping") {
    Game g = random_game({3, {2}, {2}, 0.5, true}, 81);
    Strategy s = random_strategy(g, StrategyKind::SubNs, 9);
    TrimResult trim = trim_outliers(g, s);
    Sim1Result sim1 = build_sim1(g, trim.trimmed);
    GoodSelection sel = select_good(g, sim1.monotone, 0.5);
    Sim2Result sim2 = normalize_sim2(g, sim1.monotone, sel, 0.5);

    SUBCASE("defined entries have mass alpha^|S| and never grow") {
        for (Mask mask = 1; mask <= g.full_mask(); ++mask) {
            double want = std::pow(sim2.alpha, popcount(mask));
            for (long long qs = 0; qs < g.q_sub_count(mask); ++qs) {
                if (!sim2.family.defined(mask, qs)) continue;
                CHECK(sim2.family.entry_mass(mask, qs) == doctest::Approx(want).epsilon(1e-9));
                CHECK(sim2.beta[mask][qs] >= 1.0 - sel.threshold - 1e-9);
                for (long long as = 0; as < g.a_sub_count(mask); ++as)
                    CHECK(sim2.family.entries[mask][qs][as] <=
                          sim1.monotone.entries[mask][qs][as] + 1e-12);
            }
        }
    }
    SUBCASE("no abort mass means plain per-entry normalization") {
        Strategy full = random_strategy(g, StrategyKind::LocalRandom, 10);
        Sim1Result r1 = build_sim1(g, trim_outliers(g, full).trimmed);
        GoodSelection se = select_good(g, r1.monotone, 0.5);
        Sim2Result r2 = normalize_sim2(g, r1.monotone, se, 0.5);
        CHECK(r2.alpha == doctest::Approx(1.0));
        for (Mask mask = 1; mask <= g.full_mask(); ++mask)
            for (long long qs = 0; qs < g.q_sub_count(mask); ++qs)
                CHECK(r2.family.entry_mass(mask, qs) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("conditioned value only shrinks by the alpha powers") {
        double v1 = 0.0, v2 = 0.0;
        for (long long q = 0; q < g.q_count(); ++q) {
            if (!sel.gstar.supported(q)) continue;
            for (long long a = 0; a < g.a_count(); ++a) {
                if (!g.accepts(q, a)) continue;
                v1 += sel.gstar.pi(q) * sim1.monotone.entries[g.full_mask()][q][a];
                v2 += sel.gstar.pi(q) * sim2.family.entries[g.full_mask()][q][a];
            }
        }
        CHECK(v2 >= std::pow(sim2.alpha, g.k()) * v1 - 1e-9);
    }
    SUBCASE("damping scales each size class") {
        SimFamily sim3 = scale_sim3(g, sim2.family);
        for (Mask mask = 1; mask <= g.full_mask(); ++mask) {
            int sz = popcount(mask);
            for (long long qs = 0; qs < g.q_sub_count(mask); ++qs) {
                if (!sim3.defined(mask, qs)) continue;
                double want = std::pow(sim2.alpha, sz) / std::pow(double(g.k()), 2.0 * sz);
                CHECK(sim3.entry_mass(mask, qs) == doctest::Approx(want).epsilon(1e-9));
            }
        }
    }
    SUBCASE("single-player games are rejected by the damping step") {
        Game g1 = random_game({1, {2}, {2}, 0.5, true}, 82);
        SimFamily dummy = SimFamily::undefined(g1);
        CHECK_THROWS_AS(scale_sim3(g1, dummy), TransformError);
    }
}

TEST_CASE("inclusion-exclusion extension, hand-checked at k=2") {
    Game g = random_game({2, {2}, {2}, 0.6, true}, 91);
    Strategy s = random_strategy(g, StrategyKind::SubNs, 11);
    TrimResult trim = trim_outliers(g, s);
    Sim1Result sim1 = build_sim1(g, trim.trimmed);
    GoodSelection sel = select_good(g, sim1.monotone, 0.5);
    Sim2Result sim2 = normalize_sim2(g, sim1.monotone, sel, 0.5);
    SimFamily sim3 = scale_sim3(g, sim2.family);
    Game gext = extend_with_star(g, sel.gstar.pi());
    StarExtensionResult ext = expand_inclusion_exclusion(g, gext, sim3, sel.good);

    for (long long q = 0; q < g.q_count(); ++q) {
        if (!sel.good[q]) continue;
        // full-subset entries transfer verbatim
        for (long long a = 0; a < g.a_count(); ++a) {
            std::vector<int> tup = {int(g.aspace().digit(a, 0)), int(g.aspace().digit(a, 1))};
            long long ae = gext.aspace().index(tup);
            CHECK(ext.p_star.rows[q][ae] ==
                  doctest::Approx(sim3.entries[g.full_mask()][q][a]).epsilon(1e-12));
        }
        // p*(a1, *) = Sim3_{1}(a1) - sum_a2 Sim3_{12}(a1,a2), by enumeration
        for (int a1 = 0; a1 < 2; ++a1) {
            double direct = sim3.entries[0b01][g.restrict_query(q, 0b01)][a1];
            for (int a2 = 0; a2 < 2; ++a2)
                direct -= sim3.entries[0b11][q][g.aspace().index({a1, a2})];
            long long ae = gext.aspace().index({a1, 2});
            CHECK(ext.p_star.rows[q][ae] == doctest::Approx(std::max(0.0, direct)).epsilon(1e-9));
        }
    }
    CHECK(ext.max_mass_deviation <= 1e-9);
    CHECK(ext.min_entry >= -1e-9);
    CHECK(ext.alpha_total <= 4.0 + 1e-9);

    SUBCASE("normalization yields exact distributions") {
        NormalizedStar norm = normalize_pstar(gext, ext.p_star, ext.alpha_total, sel.good);
        for (long long q = 0; q < gext.q_count(); ++q)
            CHECK(norm.p.mass(q) == doctest::Approx(1.0).epsilon(1e-9));
        if (ext.alpha_total >= 1.0)
            CHECK(norm.gamma == doctest::Approx(1.0 / ext.alpha_total));
        else
            CHECK(norm.gamma == 1.0);
        CHECK(norm.gamma >= std::pow(2.0, -g.k()) - 1e-12);
    }
}

TEST_CASE("star folding") {
    Game g = random_game({2, {2}, {2}, 0.5, true}, 101);
    Game gext = extend_with_star(g, g.pi());
    SUBCASE("no star mass means no change") {
        Strategy s = random_strategy(g, StrategyKind::LocalRandom, 12);
        Strategy embedded = Strategy::zeros(gext);
        for (long long q = 0; q < g.q_count(); ++q)
            for (long long a = 0; a < g.a_count(); ++a) {
                std::vector<int> tup = {int(g.aspace().digit(a, 0)), int(g.aspace().digit(a, 1))};
                embedded.rows[q][gext.aspace().index(tup)] = s.rows[q][a];
            }
        Strategy folded = fold_stars(g, gext, embedded, Assignment{g.full_mask(), {0, 0}});
        for (long long q = 0; q < g.q_count(); ++q)
            for (long long a = 0; a < g.a_count(); ++a)
                CHECK(folded.rows[q][a] == doctest::Approx(s.rows[q][a]));
    }
    SUBCASE("defaults outside the alphabet are rejected") {
        Strategy z = Strategy::zeros(gext);
        CHECK_THROWS_AS(fold_stars(g, gext, z, Assignment{g.full_mask(), {0, 2}}),
                        TransformError);
    }
}

TEST_CASE("full conversion on a perfect non-signaling input") {
    for (int k : {2, 3}) {
        Game g = random_game({k, {2}, {2}, 0.3, true}, 200 + k);
        // plant a perfect strategy
        PlantedInstance pl = planted_game({k, {2}, {2}, 0.3, true}, 300 + k);
        PipelineTrace tr = run_subns_to_hrns(pl.game, pl.perfect, 0.5);
        CHECK(tr.all_pass);
        for (double v : tr.nu.nu) CHECK(v == doctest::Approx(0.0));
        CHECK(tr.sim1.records.empty());
        CHECK(tr.sim2.alpha == doctest::Approx(1.0));
        CHECK(tr.good_is_all);
        // closed form: final value = gamma * k^{-2k}
        double kk = double(k);
        CHECK(tr.final_value ==
              doctest::Approx(tr.gamma * std::pow(kk, -2.0 * kk)).epsilon(1e-9));
        CHECK(tr.final_value >= std::pow(kk, -3.0 * kk) - 1e-12);
        CHECK(check_strategy(tr.gstar_ext, tr.p_star_star, ModelSpec::ns(), 1e-7).pass);
        (void)g;
    }
}

TEST_CASE("full conversion on an all-abort input") {
    Game g = random_game({2, {2}, {2}, 0.5, true}, 210);
    Strategy z = Strategy::zeros(g);
    PipelineTrace tr = run_subns_to_hrns(g, z, 0.5);
    CHECK(tr.all_pass);
    CHECK(tr.final_value == doctest::Approx(0.0));
    CHECK(tr.sim2.alpha == doctest::Approx(0.0));
    // the output degenerates to the constant all-star distribution
    CHECK(check_strategy(tr.gstar_ext, tr.p_star_star, ModelSpec::ns(), 1e-9).pass);
}

TEST_CASE("full conversion invariants on random inputs") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        int k = seed % 2 ? 2 : 3;
        double delta = seed % 3 == 0 ? 0.2 : 0.5;
        Game g = random_game({k, {2}, {2}, 0.5, true}, seed * 773);
        Strategy s = random_strategy(g, StrategyKind::SubNs, seed * 31 + 5);
        PipelineTrace tr = run_subns_to_hrns(g, s, delta);
        CHECK(tr.all_pass);
        CHECK(tr.sel.tv_distance <= delta + 1e-12);
        CHECK(check_strategy(tr.gstar_ext, tr.p_star_star, ModelSpec::hrns(), 1e-7).pass);
        // folding preserves honest-referee membership and never loses value
        Strategy folded = fold_stars(g, tr.gstar_ext, tr.p_star_star,
                                     Assignment{g.full_mask(), std::vector<int>(k, 0)});
        Game gstar_orig = Game::make(g.query_labels(), g.answer_labels(), tr.gstar_ext.pi(),
                                     g.accept_table());
        CHECK(check_strategy(gstar_orig, folded, ModelSpec::hrns(), 1e-7).pass);
        CHECK(evaluate_value(gstar_orig, folded) >= tr.final_value - 1e-12);
    }
}

TEST_CASE("near-perfect inputs meet the conversion bound") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        int k = seed % 2 ? 2 : 3;
        PlantedInstance pl = planted_game({k, {2}, {2}, 0.25, true}, seed * 909);
        double theta = k == 2 ? 0.01 : 1e-4;
        Strategy s = damped_strategy(pl.game, pl.perfect, theta, 0.0, seed);
        PipelineTrace tr = run_subns_to_hrns(pl.game, s, 0.3);
        CHECK(tr.all_pass);
        CHECK(tr.input_eps == doctest::Approx(theta).epsilon(1e-9));
        CHECK(tr.bound > 0.0);
        CHECK(tr.final_value >= tr.bound - 1e-12);
    }
}

TEST_CASE("bounded-abort inputs below sqrt(eps) stay non-signaling") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        int k = seed % 2 ? 2 : 3;
        PlantedInstance pl = planted_game({k, {2}, {2}, 0.25, true}, seed * 1201);
        double theta = 0.0025;
        Strategy s = damped_strategy(pl.game, pl.perfect, theta, 0.0, seed);
        double eps = 1.0 - evaluate_value(pl.game, s);
        double delta_cert = 0.05;  // certified abort bound, delta <= sqrt(eps)
        REQUIRE(check_strategy(pl.game, s, ModelSpec::subns_delta(delta_cert)).pass);
        REQUIRE(delta_cert <= std::sqrt(eps) + 1e-12);
        PipelineTrace tr = run_subns_to_hrns(pl.game, s, delta_cert);
        CHECK(tr.all_pass);
        CHECK(tr.good_is_all);
        CHECK(check_strategy(tr.gstar_ext, tr.p_star_star, ModelSpec::ns(), 1e-7).pass);
    }
}
