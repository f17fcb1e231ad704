#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nsg {

struct LpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Sense { Maximize, Minimize };
enum class VarSign { NonNegative, Free };
enum class Rel { Le, Eq, Ge };

struct LpRow {
    std::vector<std::pair<int, double>> coef;  // sparse (column, value)
    Rel rel = Rel::Le;
    double rhs = 0.0;
};

// Objective sense, per-variable sign tags (the nonnegative set vs. the
// unrestricted set), and rows tagged inequality or equality.
struct LinearProgram {
    Sense sense = Sense::Maximize;
    int num_vars = 0;
    std::vector<VarSign> signs;
    std::vector<double> objective;

    std::vector<LpRow> rows;

    int add_var(VarSign sign, double obj) {
        signs.push_back(sign);
        objective.push_back(obj);
        return num_vars++;
    }
    void add_row(LpRow row) { rows.push_back(std::move(row)); }

    // Human-readable inequality dump (debugging aid, not a wire format).
    std::string dump(const std::vector<std::string>* var_names = nullptr) const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOutcome {
    LpStatus status = LpStatus::Optimal;
    double value = 0.0;
    std::vector<double> x;     // primal solution when optimal
    std::vector<double> dual;  // per-row multipliers when optimal
};

// Bounded two-phase dense simplex with a deterministic pivot rule (largest
// reduced cost, lowest index ties; Bland's rule after a stall).  The claimed
// optimum is feasibility-checked before returning; a failed check throws.
LpOutcome solve_lp(const LinearProgram& lp);

// The dual of a program in canonical mixed sign/row form.  A maximization
// with <=/= rows becomes a minimization with >=/= rows and vice versa;
// inequality-row multipliers are sign-constrained, equality-row multipliers
// are unrestricted.  Applying it twice returns an equivalent program.
LinearProgram dualize(const LinearProgram& lp);

struct LpLimits {
    long long max_iterations = 0;  // 0 = derive from instance size
    double pivot_tol = 1e-9;
    double feas_tol = 1e-8;
};

LpOutcome solve_lp(const LinearProgram& lp, const LpLimits& limits);

// Random instance that is feasible and bounded by construction: a known
// interior point fixes feasibility and box rows fix boundedness.  Mixes
// nonnegative/free variables and inequality/equality rows.
LinearProgram random_feasible_bounded_lp(std::uint64_t seed);

}  // namespace nsg
