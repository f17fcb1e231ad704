#include "nsgame/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nsg {

Game Game::make(std::vector<std::vector<std::string>> query_labels,
                std::vector<std::vector<std::string>> answer_labels,
                std::vector<double> pi,
                std::vector<std::uint8_t> accept_table) {
    Game g;
    g.k_ = int(query_labels.size());
    if (g.k_ < 1) throw GameError("game needs at least one player");
    if (g.k_ > 20) throw GameError("player count out of range");
    if (int(answer_labels.size()) != g.k_)
        throw GameError("answer alphabets must match player count");

    std::vector<int> qr, ar;
    for (int i = 0; i < g.k_; ++i) {
        if (query_labels[i].empty()) throw GameError("empty query alphabet for player " + std::to_string(i + 1));
        if (answer_labels[i].empty()) throw GameError("empty answer alphabet for player " + std::to_string(i + 1));
        qr.push_back(int(query_labels[i].size()));
        ar.push_back(int(answer_labels[i].size()));
    }
    g.query_labels_ = std::move(query_labels);
    g.answer_labels_ = std::move(answer_labels);
    g.qspace_ = FlatSpace(qr);
    g.aspace_ = FlatSpace(ar);

    if ((long long)pi.size() != g.qspace_.count)
        throw GameError("pi must assign a weight to every query tuple");
    double mass = 0.0;
    for (double w : pi) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw GameError("pi weights must be nonnegative and finite");
        mass += w;
    }
    if (std::abs(mass - 1.0) > kMassTol) {
        std::ostringstream os;
        os << "pi mass is " << mass << ", expected 1 within " << kMassTol;
        throw GameError(os.str());
    }
    g.pi_ = std::move(pi);

    if ((long long)accept_table.size() != g.qspace_.count * g.aspace_.count)
        throw GameError("predicate table size must be |Q|*|A|");
    for (std::uint8_t v : accept_table)
        if (v > 1) throw GameError("predicate entries must be 0 or 1");
    g.accept_ = std::move(accept_table);

    const Mask nmask = Mask(1) << g.k_;
    g.q_sub_.resize(nmask);
    g.a_sub_.resize(nmask);
    g.q_restrict_.resize(nmask);
    g.a_restrict_.resize(nmask);
    g.q_fibers_.resize(nmask);
    for (Mask s = 0; s < nmask; ++s) {
        std::vector<int> qsub, asub;
        for (int i = 0; i < g.k_; ++i) {
            if (s & (Mask(1) << i)) {
                qsub.push_back(qr[i]);
                asub.push_back(ar[i]);
            }
        }
        g.q_sub_[s] = FlatSpace(qsub);
        g.a_sub_[s] = FlatSpace(asub);

        g.q_restrict_[s].resize(g.qspace_.count);
        for (long long q = 0; q < g.qspace_.count; ++q) {
            long long ix = 0, d = 0;
            for (int i = 0; i < g.k_; ++i)
                if (s & (Mask(1) << i)) ix += g.qspace_.digit(q, i) * g.q_sub_[s].stride[d++];
            g.q_restrict_[s][q] = ix;
        }
        g.a_restrict_[s].resize(g.aspace_.count);
        for (long long a = 0; a < g.aspace_.count; ++a) {
            long long ix = 0, d = 0;
            for (int i = 0; i < g.k_; ++i)
                if (s & (Mask(1) << i)) ix += g.aspace_.digit(a, i) * g.a_sub_[s].stride[d++];
            g.a_restrict_[s][a] = ix;
        }
        g.q_fibers_[s].assign(g.q_sub_[s].count, {});
        for (long long q = 0; q < g.qspace_.count; ++q)
            g.q_fibers_[s][g.q_restrict_[s][q]].push_back(q);
    }
    return g;
}

std::string Game::query_tuple_name(long long q) const {
    std::string out = "(";
    for (int i = 0; i < k_; ++i) {
        if (i) out += ",";
        out += query_labels_[i][qspace_.digit(q, i)];
    }
    return out + ")";
}

std::string Game::answer_tuple_name(long long a) const {
    std::string out = "(";
    for (int i = 0; i < k_; ++i) {
        if (i) out += ",";
        out += answer_labels_[i][aspace_.digit(a, i)];
    }
    return out + ")";
}

Assignment restrict_assignment(const Assignment& t, Mask s) {
    if (!subset_of(s, t.members))
        throw GameError("restrict_assignment: subset " + std::to_string(s) +
                        " is not contained in the assignment's index set");
    Assignment out;
    out.members = s;
    int pos = 0;
    for (int i = 0; i < 32; ++i) {
        Mask bit = Mask(1) << i;
        if (!(t.members & bit)) continue;
        if (s & bit) out.symbols.push_back(t.symbols[pos]);
        ++pos;
    }
    return out;
}

double SubDistribution::mass() const {
    double m = 0.0;
    for (double v : p) m += v;
    return m;
}

void SubDistribution::clamp_and_validate(const char* what) {
    for (double& v : p) {
        if (v < -kMassTol)
            throw GameError(std::string(what) + ": negative probability " + std::to_string(v));
        if (v < 0.0) v = 0.0;
    }
    if (mass() > 1.0 + kMassTol)
        throw GameError(std::string(what) + ": total mass " + std::to_string(mass()) + " exceeds 1");
}

SubDistribution marginalize(const SubDistribution& d, Mask s) {
    if (!subset_of(s, d.members)) throw GameError("marginalize: invalid subset");
    std::vector<int> sub_radix;
    std::vector<long long> strides;
    {
        // Build the projection from d's local coordinates onto s.
        int pos = 0;
        std::vector<int> keep;
        for (int i = 0; i < 32; ++i) {
            Mask bit = Mask(1) << i;
            if (!(d.members & bit)) continue;
            if (s & bit) {
                keep.push_back(pos);
                sub_radix.push_back(d.space.radix[pos]);
            }
            ++pos;
        }
        SubDistribution out(s, FlatSpace(sub_radix));
        for (long long ix = 0; ix < d.space.count; ++ix) {
            long long sub = 0;
            for (size_t j = 0; j < keep.size(); ++j)
                sub += d.space.digit(ix, keep[j]) * out.space.stride[j];
            out.p[sub] += d.p[ix];
        }
        return out;
    }
}

Strategy Strategy::zeros(const Game& g) {
    Strategy s;
    s.rows.assign(g.q_count(), std::vector<double>(g.a_count(), 0.0));
    s.present.assign(g.q_count(), 1);
    return s;
}

double Strategy::mass(long long q) const {
    double m = 0.0;
    for (double v : rows[q]) m += v;
    return m;
}

SimFamily SimFamily::undefined(const Game& g) {
    SimFamily f;
    f.k = g.k();
    f.entries.resize(Mask(1) << g.k());
    for (Mask s = 1; s < (Mask(1) << g.k()); ++s)
        f.entries[s].assign(g.q_sub_count(s), {});
    return f;
}

double SimFamily::entry_mass(Mask s, long long q_sub) const {
    double m = 0.0;
    for (double v : entries[s][q_sub]) m += v;
    return m;
}

double evaluate_value(const Game& g, const Strategy& p) {
    if ((long long)p.rows.size() != g.q_count())
        throw GameError("evaluate_value: strategy row count does not match the game");
    double v = 0.0;
    for (long long q = 0; q < g.q_count(); ++q) {
        double w = g.pi(q);
        if (w == 0.0) continue;
        if (!p.present[q])
            throw GameError("evaluate_value: missing strategy entry for supported query " +
                            g.query_tuple_name(q));
        double acc = 0.0;
        const auto& row = p.rows[q];
        for (long long a = 0; a < g.a_count(); ++a)
            if (g.accepts(q, a)) acc += row[a];
        v += w * acc;
    }
    return v;
}

std::vector<double> marginal_row(const Game& g, const std::vector<double>& row, Mask s) {
    std::vector<double> out(g.a_sub_count(s), 0.0);
    for (long long a = 0; a < g.a_count(); ++a) out[g.restrict_answer(a, s)] += row[a];
    return out;
}

SimFamily canonical_sim_family(const Game& g, const Strategy& p) {
    SimFamily f = SimFamily::undefined(g);
    const Mask full = g.full_mask();
    for (Mask s = 1; s <= full; ++s) {
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            std::vector<double> best(g.a_sub_count(s), 0.0);
            for (long long q : g.query_fibers(s)[qs]) {
                std::vector<double> m = marginal_row(g, p.rows[q], s);
                for (long long i = 0; i < g.a_sub_count(s); ++i) best[i] = std::max(best[i], m[i]);
            }
            f.entries[s][qs] = std::move(best);
        }
    }
    return f;
}

std::string ModelSpec::name() const {
    switch (model) {
        case StrategyModel::NonSignaling: return "ns";
        case StrategyModel::HonestReferee: return "hrns";
        case StrategyModel::SubNonSignaling: return "subns";
        case StrategyModel::SubNonSignalingDelta: return "subns-delta";
    }
    return "?";
}

std::string CheckReport::describe(const Game& g) const {
    std::ostringstream os;
    os << (pass ? "pass" : "fail") << " worst=" << worst;
    if (!detail.empty()) os << " [" << detail << "]";
    if (witness_q >= 0) {
        os << " S=" << mask_to_string(witness_mask, g.k()) << " q=" << g.query_tuple_name(witness_q);
        if (witness_q2 >= 0) os << " q'=" << g.query_tuple_name(witness_q2);
    }
    return os.str();
}

namespace {

void note_violation(CheckReport& r, double v, Mask s, long long q, long long q2, long long a,
                    const char* what) {
    if (v > r.worst) {
        r.worst = v;
        r.witness_mask = s;
        r.witness_q = q;
        r.witness_q2 = q2;
        r.witness_a = a;
        r.detail = what;
    }
}

// Marginal-equality check quantified over the queries selected by `use`.
void check_marginal_equality(const Game& g, const Strategy& p, const std::vector<char>& use,
                             CheckReport& r) {
    const Mask full = g.full_mask();
    for (Mask s = 1; s <= full; ++s) {
        for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
            long long lo_q = -1, hi_q = -1;
            std::vector<double> lo, hi;
            for (long long q : g.query_fibers(s)[qs]) {
                if (!use[q]) continue;
                std::vector<double> m = marginal_row(g, p.rows[q], s);
                if (lo.empty()) {
                    lo = m;
                    hi = m;
                    lo_q = hi_q = q;
                    continue;
                }
                for (long long i = 0; i < g.a_sub_count(s); ++i) {
                    if (m[i] > hi[i]) {
                        double gap = m[i] - lo[i];
                        note_violation(r, gap, s, q, lo_q, i, "marginal mismatch");
                        hi[i] = m[i];
                    } else if (m[i] < lo[i]) {
                        double gap = hi[i] - m[i];
                        note_violation(r, gap, s, hi_q, q, i, "marginal mismatch");
                        lo[i] = m[i];
                    }
                }
            }
        }
    }
}

}  // namespace

CheckReport check_strategy(const Game& g, const Strategy& p, const ModelSpec& model, double tol) {
    if (tol < 0.0) throw GameError("check_strategy: tolerance must be nonnegative");
    if ((long long)p.rows.size() != g.q_count())
        throw GameError("check_strategy: strategy row count does not match the game");
    CheckReport r;

    std::vector<char> use(g.q_count(), 1);
    const bool honest = model.model == StrategyModel::HonestReferee;
    if (honest)
        for (long long q = 0; q < g.q_count(); ++q) use[q] = g.supported(q) ? 1 : 0;

    switch (model.model) {
        case StrategyModel::NonSignaling:
        case StrategyModel::HonestReferee: {
            for (long long q = 0; q < g.q_count(); ++q) {
                if (!use[q]) continue;
                if (!p.present[q]) throw GameError("check_strategy: missing entry for query " +
                                                   g.query_tuple_name(q));
                note_violation(r, std::abs(p.mass(q) - 1.0), 0, q, -1, -1, "total mass != 1");
            }
            check_marginal_equality(g, p, use, r);
            break;
        }
        case StrategyModel::SubNonSignaling:
        case StrategyModel::SubNonSignalingDelta: {
            const Mask full = g.full_mask();
            for (Mask s = 1; s <= full; ++s) {
                for (long long qs = 0; qs < g.q_sub_count(s); ++qs) {
                    std::vector<double> best(g.a_sub_count(s), 0.0);
                    std::vector<long long> best_q(g.a_sub_count(s), -1);
                    for (long long q : g.query_fibers(s)[qs]) {
                        std::vector<double> m = marginal_row(g, p.rows[q], s);
                        for (long long i = 0; i < g.a_sub_count(s); ++i)
                            if (m[i] > best[i]) {
                                best[i] = m[i];
                                best_q[i] = q;
                            }
                    }
                    double total = 0.0;
                    long long arg_a = 0;
                    for (long long i = 0; i < g.a_sub_count(s); ++i) {
                        total += best[i];
                        if (best[i] > best[arg_a]) arg_a = i;
                    }
                    note_violation(r, total - 1.0, s, best_q[arg_a], -1, arg_a,
                                   "dominating family needs mass > 1");
                }
            }
            if (model.model == StrategyModel::SubNonSignalingDelta) {
                for (long long q = 0; q < g.q_count(); ++q)
                    note_violation(r, (1.0 - p.mass(q)) - model.delta, 0, q, -1, -1,
                                   "abort mass exceeds delta");
            }
            break;
        }
    }
    r.pass = r.worst <= tol;
    return r;
}

}  // namespace nsg
