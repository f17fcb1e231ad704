#include <doctest.h>

#include <cmath>
#include <cstring>

#include "nsgame/pack_cover.hpp"
#include "nsgame/random.hpp"

using namespace nsg;

namespace {

MixedPackCover tiny(double d) {
    MixedPackCover m;
    m.n = 1;
    m.packing.push_back(SparseRow{{{0, 1.0}}, 1.0});
    m.covering.push_back(SparseRow{{{0, 1.0}}, d});
    return m;
}

// Independent feasibility oracle through the exact LP solver.
bool exactly_feasible(const MixedPackCover& m) {
    LinearProgram lp;
    for (int j = 0; j < m.n; ++j) lp.add_var(VarSign::NonNegative, 0.0);
    for (const auto& r : m.packing) {
        LpRow row;
        for (auto [j, v] : r.coef) row.coef.push_back({j, v});
        row.rel = Rel::Le;
        row.rhs = r.bound;
        lp.add_row(std::move(row));
    }
    for (const auto& r : m.covering) {
        LpRow row;
        for (auto [j, v] : r.coef) row.coef.push_back({j, v});
        row.rel = Rel::Ge;
        row.rhs = r.bound;
        lp.add_row(std::move(row));
    }
    return solve_lp(lp).status == LpStatus::Optimal;
}

MixedPackCover random_mpc(std::uint64_t seed, bool feasible) {
    SplitMix64 rng(seed);
    MixedPackCover m;
    m.n = 3 + int(rng.next_below(6));
    int mp = 2 + int(rng.next_below(4));
    int mc = 2 + int(rng.next_below(4));
    std::vector<double> x0(m.n);
    for (auto& v : x0) v = rng.next_double();
    for (int i = 0; i < mp; ++i) {
        SparseRow r;
        double lhs = 0.0;
        for (int j = 0; j < m.n; ++j) {
            if (rng.next_double() < 0.4) continue;
            double c = rng.next_double();
            r.coef.push_back({j, c});
            lhs += c * x0[j];
        }
        if (r.coef.empty()) {
            r.coef.push_back({0, 1.0});
            lhs = x0[0];
        }
        r.bound = feasible ? lhs * (1.0 + rng.next_double()) : lhs;
        m.packing.push_back(std::move(r));
    }
    for (int j = 0; j < mc; ++j) {
        SparseRow r;
        double lhs = 0.0;
        for (int i = 0; i < m.n; ++i) {
            if (rng.next_double() < 0.4) continue;
            double c = rng.next_double();
            r.coef.push_back({i, c});
            lhs += c * x0[i];
        }
        if (r.coef.empty()) {
            r.coef.push_back({0, 1.0});
            lhs = x0[0];
        }
        // Tight demands make roughly half the non-slack instances infeasible.
        r.bound = feasible ? lhs * (0.2 + 0.7 * rng.next_double()) : lhs * (0.9 + 0.4 * rng.next_double());
        m.covering.push_back(std::move(r));
    }
    return m;
}

}  // namespace

TEST_CASE("unit instance") {
    auto out = solve_mpc(tiny(1.0), 0.05);
    REQUIRE(out.status == McStatus::ApproxFeasible);
    CHECK(out.x[0] >= 1.0 - 1e-9);
    CHECK(out.x[0] <= 1.05 + 1e-9);
}

TEST_CASE("demand beyond the relaxed cap is infeasible") {
    auto out = solve_mpc(tiny(3.0), 0.1);
    CHECK(out.status == McStatus::Infeasible);
}

TEST_CASE("zero-bound packing rows force variables to zero") {
    MixedPackCover m;
    m.n = 2;
    m.packing.push_back(SparseRow{{{0, 1.0}}, 0.0});
    m.covering.push_back(SparseRow{{{0, 1.0}, {1, 2.0}}, 1.0});
    auto out = solve_mpc(m, 0.1);
    REQUIRE(out.status == McStatus::ApproxFeasible);
    CHECK(out.x[0] == 0.0);
    CHECK(out.x[1] >= 0.5 - 1e-9);

    MixedPackCover bad = m;
    bad.covering[0].coef = {{0, 1.0}};
    CHECK(solve_mpc(bad, 0.1).status == McStatus::Infeasible);
}

TEST_CASE("never infeasible on instances the exact LP certifies feasible") {
    int feasible_count = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        MixedPackCover m = random_mpc(seed, seed % 2 == 0);
        bool exact = exactly_feasible(m);
        auto out = solve_mpc(m, 0.05);
        if (exact) {
            ++feasible_count;
            REQUIRE(out.status == McStatus::ApproxFeasible);
            for (const auto& r : m.packing) {
                double lhs = 0.0;
                for (auto [j, v] : r.coef) lhs += v * out.x[j];
                CHECK(lhs <= 1.05 * r.bound + 1e-8);
            }
            for (const auto& r : m.covering) {
                double lhs = 0.0;
                for (auto [j, v] : r.coef) lhs += v * out.x[j];
                CHECK(lhs >= r.bound - 1e-8);
            }
        }
        // infeasible reports must only happen when the exact problem is infeasible
        if (out.status == McStatus::Infeasible) CHECK_FALSE(exact);
    }
    CHECK(feasible_count >= 10);
}

TEST_CASE("solver determinism") {
    MixedPackCover m = random_mpc(99, true);
    auto a = solve_mpc(m, 0.02);
    auto b = solve_mpc(m, 0.02);
    REQUIRE(a.status == b.status);
    REQUIRE(a.x.size() == b.x.size());
    CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
}

TEST_CASE("restricted dual shape") {
    Game g = random_game({2, {2}, {2}, 0.5, true}, 31);
    MixedPackCover m = restricted_dual_to_mpc(g, 0.5);
    long long ybar = 0, zs = 0, cover = 0;
    for (Mask s = 1; s <= g.full_mask(); ++s) {
        ybar += g.q_count() * g.a_sub_count(s);
        zs += g.q_sub_count(s);
        cover += g.q_sub_count(s) * g.a_sub_count(s);
    }
    CHECK(m.n == ybar + zs);
    CHECK((long long)m.packing.size() == ybar + g.q_count() * g.a_count() + 1);
    CHECK((long long)m.covering.size() == cover);
    for (const auto& r : m.packing) {
        CHECK(r.bound >= 0.0);
        for (auto [j, v] : r.coef) {
            (void)j;
            CHECK(v >= 0.0);
        }
    }
    for (const auto& r : m.covering) {
        CHECK(r.bound >= 0.0);
        for (auto [j, v] : r.coef) {
            (void)j;
            CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("feasibility of the restricted dual is monotone in the cap") {
    Game g = random_game({2, {2}, {2}, 0.55, true}, 77);
    double vsub = exact_value(g, ModelSpec::subns()).value;
    double delta = 0.01;
    auto lo = solve_mpc(restricted_dual_to_mpc(g, std::max(0.0, vsub - 0.2)), delta);
    auto hi = solve_mpc(restricted_dual_to_mpc(g, vsub + 0.2), delta);
    CHECK(lo.status == McStatus::Infeasible);
    CHECK(hi.status == McStatus::ApproxFeasible);
    auto hi2 = solve_mpc(restricted_dual_to_mpc(g, vsub + 0.4), delta);
    CHECK(hi2.status == McStatus::ApproxFeasible);
}

TEST_CASE("repair restores unrelaxed feasibility") {
    SUBCASE("zero relaxation is the identity") {
        Game g = random_game({2, {2}, {2}, 0.5, true}, 5);
        NonNegDualLayout ly = NonNegDualLayout::make(g);
        DualPoint x;
        x.v.assign(ly.total, 0.0);
        for (long long j = ly.ybar_count; j < ly.total; ++j) x.v[j] = 1.0;
        DualPoint y = repair_mpc_solution(g, x, 0.0);
        CHECK(y.v == x.v);
    }
    SUBCASE("objective grows by exactly delta times the subset count") {
        Game g = random_game({3, {2}, {2}, 0.5, true}, 6);
        NonNegDualLayout ly = NonNegDualLayout::make(g);
        DualPoint x;
        x.v.assign(ly.total, 0.0);
        for (long long j = ly.ybar_count; j < ly.total; ++j) x.v[j] = 1.0;  // big z
        double delta = 0.125;
        DualPoint y = repair_mpc_solution(g, x, delta);
        double grow = nonneg_dual_objective(g, y) - nonneg_dual_objective(g, x);
        double subsets = double((Mask(1) << g.k()) - 1);
        CHECK(grow == doctest::Approx(delta * subsets).epsilon(1e-12));
    }
    SUBCASE("repaired probe points satisfy the unrelaxed constraints") {
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            Game g = random_game({2, {2}, {2}, 0.5, true}, seed * 19);
            double vsub = exact_value(g, ModelSpec::subns()).value;
            double delta = 0.02;
            auto mc = solve_mpc(restricted_dual_to_mpc(g, std::min(1.0, vsub + 0.05)), delta);
            REQUIRE(mc.status == McStatus::ApproxFeasible);
            DualPoint rep = repair_mpc_solution(g, DualPoint{mc.x}, delta);
            CHECK(nonneg_dual_violation(g, rep, 0.0) <= 1e-7);
            // the repaired objective upper-bounds the true value
            CHECK(nonneg_dual_objective(g, rep) >= vsub - 1e-7);
        }
    }
    SUBCASE("precondition violations are rejected") {
        Game g = random_game({2, {2}, {2}, 0.5, true}, 5);
        DualPoint x;
        x.v.assign(NonNegDualLayout::make(g).total, 0.0);  // covering fails
        CHECK_THROWS_AS(repair_mpc_solution(g, x, 0.05), PackCoverError);
    }
}

TEST_CASE("approximate value: constant predicates") {
    Game g1 = random_game({2, {2}, {2}, 1.0, true}, 8);
    double v1 = approx_subns_value(g1, 0.1);
    CHECK(v1 >= 0.9);
    CHECK(v1 <= 1.0);
    Game g0 = random_game({2, {2}, {2}, 0.0, true}, 9);
    double v0 = approx_subns_value(g0, 0.1);
    CHECK(v0 >= 0.0);
    CHECK(v0 <= 0.1);
}

TEST_CASE("approximate value tracks the exact optimum") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        int k = seed % 2 ? 2 : 3;
        Game g = random_game({k, {2}, {2}, 0.5, true}, seed * 41);
        double exact = exact_value(g, ModelSpec::subns()).value;
        for (double eps : {0.1, 0.05}) {
            ApproxResult res = approx_subns_value_detailed(g, eps);
            CHECK(std::abs(res.value - exact) <= eps);
            for (const auto& probe : res.probes)
                if (!probe.feasible) CHECK(probe.v_prime < exact + 1e-9);
        }
    }
}
