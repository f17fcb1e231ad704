#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsgame/util.hpp"

namespace nsg {

inline constexpr double kMassTol = 1e-9;         // tolerance for distribution arithmetic
inline constexpr double kDefaultCheckTol = 1e-7; // default strategy-checker tolerance

struct GameError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A k-player one-round game: per-player query/answer alphabets, a query
// distribution pi over full query tuples, and a 0/1 acceptance predicate.
// Immutable after construction; all index caches are built up front.
class Game {
  public:
    // An empty shell; only assignment from make() produces a usable game.
    Game() = default;

    static Game make(std::vector<std::vector<std::string>> query_labels,
                     std::vector<std::vector<std::string>> answer_labels,
                     std::vector<double> pi,
                     std::vector<std::uint8_t> accept_table);

    int k() const { return k_; }
    long long q_count() const { return qspace_.count; }
    long long a_count() const { return aspace_.count; }
    const FlatSpace& qspace() const { return qspace_; }
    const FlatSpace& aspace() const { return aspace_; }
    const std::vector<std::vector<std::string>>& query_labels() const { return query_labels_; }
    const std::vector<std::vector<std::string>>& answer_labels() const { return answer_labels_; }

    double pi(long long q) const { return pi_[q]; }
    const std::vector<double>& pi() const { return pi_; }
    bool supported(long long q) const { return pi_[q] > 0.0; }
    bool accepts(long long q, long long a) const { return accept_[q * aspace_.count + a] != 0; }
    const std::vector<std::uint8_t>& accept_table() const { return accept_; }

    Mask full_mask() const { return (Mask(1) << k_) - 1; }

    // Restriction tables: flat full index -> flat sub index for subset S.
    long long restrict_query(long long q, Mask s) const { return q_restrict_[s][q]; }
    long long restrict_answer(long long a, Mask s) const { return a_restrict_[s][a]; }
    long long q_sub_count(Mask s) const { return q_sub_[s].count; }
    long long a_sub_count(Mask s) const { return a_sub_[s].count; }
    const FlatSpace& q_sub_space(Mask s) const { return q_sub_[s]; }
    const FlatSpace& a_sub_space(Mask s) const { return a_sub_[s]; }

    // Queries grouped by their restriction to S, indexed by the sub index.
    const std::vector<std::vector<long long>>& query_fibers(Mask s) const { return q_fibers_[s]; }

    std::string query_tuple_name(long long q) const;
    std::string answer_tuple_name(long long a) const;

  private:

    int k_ = 0;
    std::vector<std::vector<std::string>> query_labels_;
    std::vector<std::vector<std::string>> answer_labels_;
    std::vector<double> pi_;
    std::vector<std::uint8_t> accept_;
    FlatSpace qspace_, aspace_;
    std::vector<FlatSpace> q_sub_, a_sub_;                    // by mask
    std::vector<std::vector<long long>> q_restrict_, a_restrict_;  // by mask
    std::vector<std::vector<std::vector<long long>>> q_fibers_;   // by mask, sub index
};

// Ordered tuple of per-player symbol indices over an explicit index set.
struct Assignment {
    Mask members = 0;
    std::vector<int> symbols;  // ascending player order

    bool operator==(const Assignment&) const = default;
};

// Coordinate projection of an assignment onto a subset of its index set.
Assignment restrict_assignment(const Assignment& t, Mask s);

// A sub-probability vector over the assignments of a fixed index set;
// missing mass is the implicit abort symbol.
struct SubDistribution {
    Mask members = 0;
    FlatSpace space;          // radix = alphabet sizes of the members
    std::vector<double> p;    // flat over `space`

    SubDistribution() = default;
    SubDistribution(Mask m, FlatSpace sp)
        : members(m), space(std::move(sp)), p(space.count, 0.0) {}

    double mass() const;
    double bottom() const { return 1.0 - mass(); }
    void clamp_and_validate(const char* what);
};

// Sum out the coordinates outside S.  Total mass (and hence abort mass) is
// preserved.
SubDistribution marginalize(const SubDistribution& d, Mask s);

// A strategy: one sub-distribution over full answers per query.  Rows are
// stored flat; `present` distinguishes an all-abort row from a row that was
// never provided (e.g. omitted from a strategy file).
struct Strategy {
    std::vector<std::vector<double>> rows;   // [q][a]
    std::vector<std::uint8_t> present;

    static Strategy zeros(const Game& g);
    double mass(long long q) const;
    double bottom(long long q) const { return 1.0 - mass(q); }
};

// Family of sub-distributions over partial answers, indexed by nonempty
// subset and restricted query.  Entries may be undefined (empty vector).
struct SimFamily {
    int k = 0;
    // entries[mask][qS] = vector over A_S (empty when undefined)
    std::vector<std::vector<std::vector<double>>> entries;

    static SimFamily undefined(const Game& g);
    bool defined(Mask s, long long q_sub) const { return !entries[s][q_sub].empty(); }
    double entry_mass(Mask s, long long q_sub) const;
};

// Acceptance probability of a strategy: aborts contribute zero.
double evaluate_value(const Game& g, const Strategy& p);

// Per-(S, q_S) marginal of p_q over A_S as a dense matrix helper:
// result[qS-fiber member][aS].  Used by checkers and the conversion stages.
std::vector<double> marginal_row(const Game& g, const std::vector<double>& row, Mask s);

// Entrywise max over each restricted-query fiber: the pointwise-minimal
// family dominating every marginal of p.
SimFamily canonical_sim_family(const Game& g, const Strategy& p);

enum class StrategyModel { NonSignaling, HonestReferee, SubNonSignaling, SubNonSignalingDelta };

struct ModelSpec {
    StrategyModel model = StrategyModel::NonSignaling;
    double delta = 0.0;  // only for SubNonSignalingDelta

    static ModelSpec ns() { return {StrategyModel::NonSignaling, 0.0}; }
    static ModelSpec hrns() { return {StrategyModel::HonestReferee, 0.0}; }
    static ModelSpec subns() { return {StrategyModel::SubNonSignaling, 0.0}; }
    static ModelSpec subns_delta(double d) { return {StrategyModel::SubNonSignalingDelta, d}; }
    std::string name() const;
};

// Pass/fail report with the largest violation and a witness.
struct CheckReport {
    bool pass = true;
    double worst = 0.0;
    Mask witness_mask = 0;
    long long witness_q = -1;   // primary query
    long long witness_q2 = -1;  // second query of a marginal-equality witness
    long long witness_a = -1;   // sub-answer index (over witness_mask)
    std::string detail;

    std::string describe(const Game& g) const;
};

CheckReport check_strategy(const Game& g, const Strategy& p, const ModelSpec& model,
                           double tol = kDefaultCheckTol);

}  // namespace nsg
