#include "nsgame/json_io.hpp"

#include <fstream>
#include <sstream>

namespace nsg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ParseError(where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) fail(where, std::string("missing field \"") + key + "\"");
    return *it;
}

std::vector<std::vector<std::string>> parse_alphabets(const json& j, int k,
                                                      const std::string& where) {
    if (!j.is_array() || int(j.size()) != k)
        fail(where, "expected one alphabet per player");
    std::vector<std::vector<std::string>> out(k);
    for (int i = 0; i < k; ++i) {
        if (!j[i].is_array() || j[i].empty())
            fail(where + "[" + std::to_string(i) + "]", "alphabet must be a nonempty array");
        for (const auto& lab : j[i]) {
            if (!lab.is_string()) fail(where + "[" + std::to_string(i) + "]", "labels are strings");
            out[i].push_back(lab.get<std::string>());
        }
    }
    return out;
}

// Resolve a tuple of labels against per-player alphabets into a flat index.
long long resolve_tuple(const json& tup, const std::vector<std::vector<std::string>>& alphabets,
                        const FlatSpace& space, const std::string& where, bool allow_star) {
    int k = int(alphabets.size());
    if (!tup.is_array() || int(tup.size()) != k)
        fail(where, "expected a tuple with one symbol per player");
    std::vector<int> digits(k);
    for (int i = 0; i < k; ++i) {
        if (!tup[i].is_string()) fail(where, "symbols are strings");
        std::string lab = tup[i].get<std::string>();
        const auto& alpha = alphabets[i];
        auto it = std::find(alpha.begin(), alpha.end(), lab);
        if (it == alpha.end()) {
            if (lab == "*" && !allow_star)
                fail(where, "the \"*\" placeholder is only legal against extended answer alphabets");
            fail(where, "unresolved label \"" + lab + "\" for player " + std::to_string(i + 1));
        }
        digits[i] = int(it - alpha.begin());
    }
    return space.index(digits);
}

json tuple_labels(const std::vector<std::vector<std::string>>& alphabets, const FlatSpace& space,
                  long long ix) {
    json out = json::array();
    for (size_t i = 0; i < alphabets.size(); ++i)
        out.push_back(alphabets[i][space.digit(ix, int(i))]);
    return out;
}

}  // namespace

nlohmann::json game_to_json(const Game& g) {
    json j;
    j["k"] = g.k();
    j["queries"] = g.query_labels();
    j["answers"] = g.answer_labels();
    json pi = json::array();
    for (long long q = 0; q < g.q_count(); ++q) {
        if (g.pi(q) <= 0.0) continue;
        json e;
        e["q"] = tuple_labels(g.query_labels(), g.qspace(), q);
        e["p"] = g.pi(q);
        pi.push_back(std::move(e));
    }
    j["pi"] = std::move(pi);
    json pred;
    pred["mode"] = "dense";
    pred["table"] = json::array();
    for (auto v : g.accept_table()) pred["table"].push_back(int(v));
    j["predicate"] = std::move(pred);
    return j;
}

Game game_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail("game", "expected an object");
    const json& jk = field(j, "k", "game");
    if (!jk.is_number_integer()) fail("game.k", "expected an integer");
    int k = jk.get<int>();
    if (k < 1 || k > 20) fail("game.k", "player count out of range");
    auto queries = parse_alphabets(field(j, "queries", "game"), k, "game.queries");
    auto answers = parse_alphabets(field(j, "answers", "game"), k, "game.answers");

    std::vector<int> qr, ar;
    for (int i = 0; i < k; ++i) {
        qr.push_back(int(queries[i].size()));
        ar.push_back(int(answers[i].size()));
    }
    FlatSpace qspace(qr), aspace(ar);

    const json& jpi = field(j, "pi", "game");
    if (!jpi.is_array()) fail("game.pi", "expected an array of {q, p} entries");
    std::vector<double> pi(qspace.count, 0.0);
    double mass = 0.0;
    for (size_t t = 0; t < jpi.size(); ++t) {
        std::string where = "game.pi[" + std::to_string(t) + "]";
        const json& e = jpi[t];
        long long q = resolve_tuple(field(e, "q", where), queries, qspace, where, true);
        const json& p = field(e, "p", where);
        if (!p.is_number()) fail(where, "weight must be a number");
        double w = p.get<double>();
        if (w < 0.0) fail(where, "weight must be nonnegative");
        pi[q] += w;
        mass += w;
    }
    if (std::abs(mass - 1.0) > kMassTol) {
        std::ostringstream os;
        os << "pi mass is " << mass << ", expected 1";
        fail("game.pi", os.str());
    }

    const json& jpred = field(j, "predicate", "game");
    std::string mode = field(jpred, "mode", "game.predicate").get<std::string>();
    std::vector<std::uint8_t> accept(qspace.count * aspace.count, 0);
    if (mode == "accept_list") {
        const json& entries = field(jpred, "entries", "game.predicate");
        if (!entries.is_array()) fail("game.predicate.entries", "expected an array");
        for (size_t t = 0; t < entries.size(); ++t) {
            std::string where = "game.predicate.entries[" + std::to_string(t) + "]";
            const json& e = entries[t];
            long long q = resolve_tuple(field(e, "q", where), queries, qspace, where, true);
            long long a = resolve_tuple(field(e, "a", where), answers, aspace, where, true);
            accept[q * aspace.count + a] = 1;
        }
    } else if (mode == "dense") {
        const json& table = field(jpred, "table", "game.predicate");
        if (!table.is_array() || (long long)table.size() != qspace.count * aspace.count)
            fail("game.predicate.table",
                 "dense table must have |Q|*|A| = " + std::to_string(qspace.count * aspace.count) +
                     " entries");
        for (size_t t = 0; t < table.size(); ++t) {
            if (!table[t].is_number_integer())
                fail("game.predicate.table[" + std::to_string(t) + "]", "entries are 0/1");
            int v = table[t].get<int>();
            if (v != 0 && v != 1)
                fail("game.predicate.table[" + std::to_string(t) + "]", "entries are 0/1");
            accept[t] = std::uint8_t(v);
        }
    } else {
        fail("game.predicate.mode", "expected \"accept_list\" or \"dense\"");
    }
    try {
        return Game::make(std::move(queries), std::move(answers), std::move(pi), std::move(accept));
    } catch (const GameError& e) {
        fail("game", e.what());
    }
}

nlohmann::json strategy_to_json(const Game& g, const Strategy& s) {
    json entries = json::array();
    for (long long q = 0; q < g.q_count(); ++q) {
        if (!s.present[q]) continue;
        json e;
        e["q"] = tuple_labels(g.query_labels(), g.qspace(), q);
        json dist = json::array();
        for (long long a = 0; a < g.a_count(); ++a) {
            if (s.rows[q][a] <= 0.0) continue;
            json d;
            d["a"] = tuple_labels(g.answer_labels(), g.aspace(), a);
            d["p"] = s.rows[q][a];
            dist.push_back(std::move(d));
        }
        e["dist"] = std::move(dist);
        entries.push_back(std::move(e));
    }
    json j;
    j["entries"] = std::move(entries);
    return j;
}

Strategy strategy_from_json(const Game& g, const nlohmann::json& j) {
    if (!j.is_object()) fail("strategy", "expected an object");
    const json& entries = field(j, "entries", "strategy");
    if (!entries.is_array()) fail("strategy.entries", "expected an array");
    Strategy s;
    s.rows.assign(g.q_count(), std::vector<double>(g.a_count(), 0.0));
    s.present.assign(g.q_count(), 0);
    for (size_t t = 0; t < entries.size(); ++t) {
        std::string where = "strategy.entries[" + std::to_string(t) + "]";
        const json& e = entries[t];
        long long q =
            resolve_tuple(field(e, "q", where), g.query_labels(), g.qspace(), where, true);
        if (s.present[q]) fail(where, "duplicate entry for query " + g.query_tuple_name(q));
        s.present[q] = 1;
        const json& dist = field(e, "dist", where);
        if (!dist.is_array()) fail(where + ".dist", "expected an array");
        double mass = 0.0;
        for (size_t d = 0; d < dist.size(); ++d) {
            std::string dwhere = where + ".dist[" + std::to_string(d) + "]";
            long long a = resolve_tuple(field(dist[d], "a", dwhere), g.answer_labels(),
                                        g.aspace(), dwhere, false);
            const json& p = field(dist[d], "p", dwhere);
            if (!p.is_number()) fail(dwhere, "probability must be a number");
            double w = p.get<double>();
            if (w < -kMassTol) fail(dwhere, "negative probability");
            s.rows[q][a] += std::max(0.0, w);
            mass += std::max(0.0, w);
        }
        if (mass > 1.0 + kMassTol) {
            std::ostringstream os;
            os << "entry mass is " << mass << ", exceeds 1";
            fail(where, os.str());
        }
    }
    return s;
}

Game game_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open game file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return game_from_json(j);
}

Strategy strategy_from_file(const Game& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open strategy file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return strategy_from_json(g, j);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open output file " + path);
    out << j.dump(2) << "\n";
}

nlohmann::json check_report_to_json(const Game& g, const CheckReport& r) {
    json j;
    j["pass"] = r.pass;
    j["worst_violation"] = r.worst;
    if (r.witness_q >= 0) {
        json w;
        w["subset"] = mask_to_string(r.witness_mask, g.k());
        w["q"] = g.query_tuple_name(r.witness_q);
        if (r.witness_q2 >= 0) w["q2"] = g.query_tuple_name(r.witness_q2);
        if (r.witness_a >= 0) w["answer_index"] = r.witness_a;
        if (!r.detail.empty()) w["kind"] = r.detail;
        j["witness"] = std::move(w);
    }
    return j;
}

nlohmann::json trace_to_json(const PipelineTrace& tr) {
    json j;
    j["k"] = tr.k;
    j["delta"] = tr.delta;
    j["input_value"] = tr.input_value;
    j["input_eps"] = tr.input_eps;
    j["nu_average"] = tr.nu.average;
    j["eps1_measured"] = tr.sel.eps1;
    // the closed forms the measured value replaces; logged for comparison
    double kk = tr.k;
    j["eps1_closed_forms"] = {
        {"k_pow_k", std::pow(kk, kk) * tr.input_eps},
        {"two_pow_klogk", std::pow(2.0, kk * std::log2(kk)) * tr.input_eps},
        {"proven_chain", (std::tgamma(kk + 2.0) + 1.0) * std::pow(2.0, kk) * tr.input_eps},
    };
    j["eps2_measured"] = tr.eps2;
    j["alpha"] = tr.sim2.alpha;
    j["alpha_total"] = tr.alpha_total;
    j["gamma"] = tr.gamma;
    j["good_count"] = [&] {
        long long n = 0;
        for (char c : tr.sel.good) n += c != 0;
        return n;
    }();
    j["good_mass"] = tr.sel.good_mass;
    j["good_is_all"] = tr.good_is_all;
    j["tv_distance"] = tr.sel.tv_distance;
    j["final_value"] = tr.final_value;
    j["theorem_bound"] = tr.bound;
    j["correction_records"] = tr.sim1.records.size();
    json checks = json::array();
    for (const auto& c : tr.checks) {
        json e;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["worst"] = c.worst;
        if (!c.witness.empty()) e["witness"] = c.witness;
        checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
    j["all_pass"] = tr.all_pass;
    return j;
}

}  // namespace nsg
