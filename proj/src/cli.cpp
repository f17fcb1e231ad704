#include "nsgame/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "nsgame/json_io.hpp"
#include "nsgame/pack_cover.hpp"
#include "nsgame/random.hpp"
#include "nsgame/suite.hpp"
#include "nsgame/transforms.hpp"
#include "nsgame/value_lp.hpp"

namespace nsg {

namespace {

using nlohmann::json;

ModelSpec model_from_name(const std::string& name, double delta) {
    if (name == "ns") return ModelSpec::ns();
    if (name == "hrns") return ModelSpec::hrns();
    if (name == "subns") return ModelSpec::subns();
    if (name == "subns-delta") return ModelSpec::subns_delta(delta);
    throw ParseError("unknown model \"" + name + "\" (want ns|hrns|subns|subns-delta)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"non-signaling game values, reductions, and conversions"};
    app.require_subcommand(1);

    std::string game_path, strategy_path, out_path, trace_path, model_name = "ns";
    std::string config_path, strategy_kind;
    double delta = 0.0, eps = 0.05, tol = kDefaultCheckTol, density = 0.5;
    bool have_delta = false;
    std::uint64_t seed = 0;
    int gen_k = 2, gen_q = 2, gen_a = 2;

    auto* value = app.add_subcommand("value", "exact value of a game under a model");
    value->add_option("--game", game_path)->required();
    value->add_option("--model", model_name);
    value->add_option("--delta", delta);

    auto* approx = app.add_subcommand("approx-subns",
                                      "packing/covering approximation of the subns value");
    approx->add_option("--game", game_path)->required();
    approx->add_option("--eps", eps)->required();

    auto* reduce = app.add_subcommand("reduce", "build the 2-player reduced game");
    reduce->add_option("--game", game_path)->required();
    reduce->add_option("--out", out_path)->required();

    auto* lift = app.add_subcommand("lift",
                                    "lift a non-signaling strategy of the reduced game back");
    lift->add_option("--game", game_path)->required();
    lift->add_option("--strategy", strategy_path)->required();
    lift->add_option("--tol", tol);

    auto* pipeline = app.add_subcommand("pipeline", "sub-non-signaling to honest-referee run");
    pipeline->add_option("--game", game_path)->required();
    pipeline->add_option("--strategy", strategy_path)->required();
    pipeline->add_option("--delta", delta)->each([&](const std::string&) { have_delta = true; });
    pipeline->add_option("--trace", trace_path);

    auto* check = app.add_subcommand("check", "strategy membership check for a model");
    check->add_option("--game", game_path)->required();
    check->add_option("--strategy", strategy_path)->required();
    check->add_option("--model", model_name)->required();
    check->add_option("--delta", delta);
    check->add_option("--tol", tol);

    auto* gen = app.add_subcommand("gen", "seeded random game (and optional strategy)");
    gen->add_option("--seed", seed)->required();
    gen->add_option("--k", gen_k);
    gen->add_option("--q", gen_q);
    gen->add_option("--a", gen_a);
    gen->add_option("--density", density);
    gen->add_option("--out", out_path)->required();
    gen->add_option("--strategy-kind", strategy_kind)
        ->check(CLI::IsMember({"local", "ns", "subns"}));
    gen->add_option("--strategy-out", strategy_path);

    auto* suite = app.add_subcommand("suite", "acceptance experiment suite");
    suite->add_option("--config", config_path);
    suite->add_option("--out", out_path);

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (value->parsed()) {
            Game g = game_from_file(game_path);
            ModelSpec model = model_from_name(model_name, delta);
            json j;
            j["model"] = model.name();
            if (model.model == StrategyModel::SubNonSignalingDelta) j["delta"] = model.delta;
            j["value"] = exact_value(g, model).value;
            out << j.dump(2) << "\n";
            return 0;
        }
        if (approx->parsed()) {
            Game g = game_from_file(game_path);
            ApproxResult res = approx_subns_value_detailed(g, eps);
            json j;
            j["eps"] = res.eps;
            j["delta_apx"] = res.delta_apx;
            j["value"] = res.value;
            json probes = json::array();
            for (const auto& p : res.probes) {
                json e;
                e["v_prime"] = p.v_prime;
                e["feasible"] = p.feasible;
                if (p.feasible) e["repaired_objective"] = p.repaired_objective;
                probes.push_back(std::move(e));
            }
            j["probes"] = std::move(probes);
            out << j.dump(2) << "\n";
            return 0;
        }
        if (reduce->parsed()) {
            Game g = game_from_file(game_path);
            ReducedGame rg = build_prover_reduction(g);
            write_json_file(out_path, game_to_json(rg.game));
            json j;
            j["players"] = 2;
            j["q1_count"] = rg.game.query_labels()[0].size();
            j["q2_count"] = rg.game.query_labels()[1].size();
            j["a1_count"] = rg.game.answer_labels()[0].size();
            j["a2_count"] = rg.game.answer_labels()[1].size();
            j["out"] = out_path;
            out << j.dump(2) << "\n";
            return 0;
        }
        if (lift->parsed()) {
            Game g = game_from_file(game_path);
            ReducedGame rg = build_prover_reduction(g);
            Strategy big = strategy_from_file(rg.game, strategy_path);
            LiftResult res = lift_to_subns(g, rg, big, tol);
            CheckReport rep = check_strategy(g, res.strategy, ModelSpec::subns(), 1e-6);
            json j;
            j["value"] = evaluate_value(g, res.strategy);
            j["check_subns"] = check_report_to_json(g, rep);
            j["strategy"] = strategy_to_json(g, res.strategy);
            out << j.dump(2) << "\n";
            return rep.pass ? 0 : 1;
        }
        if (pipeline->parsed()) {
            Game g = game_from_file(game_path);
            Strategy s = strategy_from_file(g, strategy_path);
            if (!have_delta) {
                double eps_in = 1.0 - evaluate_value(g, s);
                delta = std::min(0.5, eps_in * std::pow(double(g.k()), 3.0 * g.k()));
                if (delta <= 0.0) delta = 0.5;
            }
            PipelineTrace tr = run_subns_to_hrns(g, s, delta, /*strict=*/false);
            json j = trace_to_json(tr);
            if (!trace_path.empty()) write_json_file(trace_path, j);
            json brief;
            brief["delta"] = tr.delta;
            brief["input_value"] = tr.input_value;
            brief["final_value"] = tr.final_value;
            brief["all_pass"] = tr.all_pass;
            if (!trace_path.empty()) brief["trace"] = trace_path;
            out << brief.dump(2) << "\n";
            return tr.all_pass ? 0 : 1;
        }
        if (check->parsed()) {
            Game g = game_from_file(game_path);
            Strategy s = strategy_from_file(g, strategy_path);
            ModelSpec model = model_from_name(model_name, delta);
            CheckReport rep = check_strategy(g, s, model, tol);
            json j = check_report_to_json(g, rep);
            j["model"] = model.name();
            out << j.dump(2) << "\n";
            return rep.pass ? 0 : 1;
        }
        if (gen->parsed()) {
            RandomGameParams params{gen_k, {gen_q}, {gen_a}, density, true};
            Game g = random_game(params, seed);
            write_json_file(out_path, game_to_json(g));
            json j;
            j["out"] = out_path;
            if (!strategy_kind.empty()) {
                if (strategy_path.empty())
                    throw ParseError("--strategy-kind needs --strategy-out");
                Strategy s;
                if (strategy_kind == "local")
                    s = random_strategy(g, StrategyKind::LocalRandom, SplitMix64(seed).split(7).next_u64());
                else if (strategy_kind == "subns")
                    s = random_strategy(g, StrategyKind::SubNs, SplitMix64(seed).split(7).next_u64());
                else
                    s = random_ns_strategy(g, SplitMix64(seed).split(7).next_u64());
                write_json_file(strategy_path, strategy_to_json(g, s));
                j["strategy_out"] = strategy_path;
            }
            out << j.dump(2) << "\n";
            return 0;
        }
        if (suite->parsed()) {
            SuiteConfig config;
            if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in) throw ParseError("cannot open config file " + config_path);
                config = SuiteConfig::from_json(json::parse(in));
            }
            SuiteSummary summary = run_experiment_suite(config);
            json j = summary.to_json();
            if (!out_path.empty()) write_json_file(out_path, j);
            out << j.dump(2) << "\n";
            return summary.all_pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << "usage error: no subcommand\n";
    return 2;
}

}  // namespace nsg
