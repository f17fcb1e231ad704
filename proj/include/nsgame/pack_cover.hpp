#pragma once

#include "nsgame/value_lp.hpp"

namespace nsg {

struct PackCoverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SparseRow {
    std::vector<std::pair<int, double>> coef;
    double bound = 0.0;
};

// Feasibility problem Ax <= b, Cx >= d, x >= 0 with all data nonnegative.
struct MixedPackCover {
    int n = 0;
    std::vector<SparseRow> packing;   // Ax <= b
    std::vector<SparseRow> covering;  // Cx >= d
};

enum class McStatus { Infeasible, ApproxFeasible };

struct McOutcome {
    McStatus status = McStatus::Infeasible;
    std::vector<double> x;
    double relaxation = 0.0;     // the (1+delta) applied to packing rows
    long long iterations = 0;
};

// Point in the nonnegative-dual variable space (NonNegDualLayout order:
// complemented ybar block then z block).
struct DualPoint {
    std::vector<double> v;
};

// The nonnegative dual restricted by the objective cap sum z <= v'.
// Packing rows: per-variable ybar <= 1 boxes, the per-(q,a) budget rows, and
// the objective cap; covering rows: the per-(S,qS,aS) demand rows.
MixedPackCover restricted_dual_to_mpc(const Game& g, double v_prime);

// Width-independent multiplicative-weights ascent.  Reports Infeasible only
// when a weight vector certifies that the unrelaxed problem has no solution;
// otherwise returns x >= 0 with Ax <= (1+delta)b and Cx >= d.
McOutcome solve_mpc(const MixedPackCover& m, double delta_apx);

// Largest violation of the nonnegative-dual constraints with packing rows
// relaxed by (1+relax); <= 0 means feasible.
double nonneg_dual_violation(const Game& g, const DualPoint& x, double relax);

double nonneg_dual_objective(const Game& g, const DualPoint& x);

// Turn a (1+delta)-relaxed solution into an unrelaxed one: divide the ybar
// block by (1+delta) and raise each z by delta times its fiber weight.  The
// objective grows by at most delta * (2^k - 1).
DualPoint repair_mpc_solution(const Game& g, const DualPoint& x, double delta_apx);

struct ApproxProbe {
    double v_prime = 0.0;
    bool feasible = false;
    double repaired_objective = 0.0;  // certified upper bound when feasible
    long long iterations = 0;
};

struct ApproxResult {
    double value = 0.0;
    double eps = 0.0;
    double delta_apx = 0.0;
    std::vector<ApproxProbe> probes;
};

// Binary search over the objective cap; returns a value within eps of the
// exact sub-non-signaling value.
double approx_subns_value(const Game& g, double eps);
ApproxResult approx_subns_value_detailed(const Game& g, double eps);

}  // namespace nsg
