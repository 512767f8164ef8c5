// MAX-CUT solving, identity verification, benchmarking and graph generation
// around the rqrao library. See README.md for usage examples.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rqrao/bench.hpp"
#include "rqrao/generate.hpp"
#include "rqrao/graph.hpp"
#include "rqrao/json_io.hpp"
#include "rqrao/oracle.hpp"
#include "rqrao/ranktwo.hpp"
#include "rqrao/rqaoa.hpp"
#include "rqrao/solver.hpp"
#include "rqrao/verify.hpp"

namespace {

using nlohmann::ordered_json;

struct GraphOptions {
    std::string path;
    std::string kind;
    int nodes = 100;
    double density = 0.5;
    int grid = 4;
    std::uint64_t gen_seed = 0;

    rqrao::Graph load(std::vector<std::string>* warnings) const {
        if (!path.empty() && !kind.empty())
            throw CLI::ValidationError("--graph and --gen are mutually exclusive");
        if (!path.empty()) {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot read " + path);
            std::stringstream buf;
            buf << in.rdbuf();
            if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
                return rqrao::graph_from_json(nlohmann::json::parse(buf.str()));
            return rqrao::parse_rudy(buf.str(), warnings);
        }
        if (kind.empty()) throw CLI::ValidationError("one of --graph or --gen is required");
        return rqrao::generate(
            {rqrao::graph_kind_from_string(kind), nodes, density, grid, gen_seed});
    }

    ordered_json echo() const {
        ordered_json j;
        if (!path.empty()) {
            j["path"] = path;
        } else {
            j["kind"] = kind;
            j["nodes"] = nodes;
            j["density"] = density;
            j["grid"] = grid;
            j["gen_seed"] = gen_seed;
        }
        return j;
    }
};

void add_graph_options(CLI::App* cmd, GraphOptions& opt) {
    cmd->add_option("--graph", opt.path, "input graph file (rudy text or .json)");
    cmd->add_option("--gen", opt.kind, "generator kind: random|3regular|toric_plus_hub");
    cmd->add_option("--nodes", opt.nodes, "node count for generated graphs");
    cmd->add_option("--density", opt.density, "edge density for random graphs");
    cmd->add_option("--grid", opt.grid, "grid size for toric_plus_hub");
    cmd->add_option("--gen-seed", opt.gen_seed, "generator seed");
}

int default_threads() {
    if (const char* env = std::getenv("RQRAO_THREADS")) return std::atoi(env);
    return 0;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

ordered_json params_echo(const rqrao::RqraoParams& p) {
    return ordered_json{{"m", p.m},
                        {"ensemble", p.ensemble},
                        {"scale", p.scale},
                        {"chi", p.chi},
                        {"bf_threshold", p.bf_threshold},
                        {"perturbation", p.perturbation},
                        {"optimizer",
                         {{"tol_objective", p.optimizer.tol_objective},
                          {"tol_parameters", p.optimizer.tol_parameters},
                          {"max_iterations", p.optimizer.max_iterations}}},
                        {"threads", p.threads}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MAX-CUT via recursive quantum random access optimization"};
    app.require_subcommand(1);

    // --- solve ---------------------------------------------------------
    auto* solve = app.add_subcommand("solve", "run a solver on one graph");
    GraphOptions solve_graph;
    add_graph_options(solve, solve_graph);
    std::string algo = "rqrao";
    rqrao::RqraoParams params;
    int repeat = 1;
    std::uint64_t seed = 0;
    int rank2_restarts = 10;
    std::string out_path, round_csv_path;
    solve->add_option("--algo", algo, "rqrao|tree|qrao|rqaoa|rank2|brute");
    solve->add_option("--m", params.m, "bits per qubit (1, 2 or 3)");
    solve->add_option("--ensemble", params.ensemble, "trials per round (N)");
    solve->add_option("--scale", params.scale, "shrinkage scale factor (S)");
    solve->add_option("--chi", params.chi, "MPS bond dimension");
    solve->add_option("--bf-threshold", params.bf_threshold, "brute-force size (M)");
    solve->add_option("--perturb", params.perturbation, "weight perturbation amplitude");
    solve->add_option("--max-iterations", params.optimizer.max_iterations,
                      "optimizer iteration cap");
    solve->add_option("--restarts", rank2_restarts, "rank2 restart count");
    solve->add_option("--repeat", repeat, "independent runs")->check(CLI::PositiveNumber);
    solve->add_option("--seed", seed, "master seed");
    solve->add_option("--threads", params.threads, "worker cap (0 = hardware)");
    solve->add_option("--out", out_path, "write the JSON report here");
    solve->add_option("--round-csv", round_csv_path, "write per-round telemetry CSV here");

    // --- verify --------------------------------------------------------
    auto* verify_cmd = app.add_subcommand("verify", "run the exact-identity suites");
    int instances = 50;
    std::uint64_t verify_seed = 0;
    std::string verify_out;
    verify_cmd->add_option("--instances", instances, "instances per identity");
    verify_cmd->add_option("--seed", verify_seed, "suite seed");
    verify_cmd->add_option("--out", verify_out, "write the JSON gap report here");

    // --- bench ---------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "sweep solvers over generated instances");
    std::string sizes_arg = "50,100,200";
    std::string algos_arg = "rqrao,rank2";
    int graphs_per_size = 10;
    std::uint64_t bench_seed = 0;
    std::string bench_out;
    rqrao::RqraoParams bench_params;
    bench->add_option("--sizes", sizes_arg, "comma-separated node counts");
    bench->add_option("--graphs", graphs_per_size, "graphs per size");
    bench->add_option("--algos", algos_arg, "comma-separated algorithms");
    bench->add_option("--m", bench_params.m, "bits per qubit");
    bench->add_option("--ensemble", bench_params.ensemble, "trials per round");
    bench->add_option("--chi", bench_params.chi, "MPS bond dimension");
    bench->add_option("--seed", bench_seed, "sweep seed");
    bench->add_option("--threads", bench_params.threads, "worker cap");
    bench->add_option("--out", bench_out, "write the CSV table here");

    // --- gen -----------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a graph instance");
    GraphOptions gen_graph;
    add_graph_options(gen, gen_graph);
    std::string gen_out;
    gen->add_option("--out", gen_out, "output file (.json for JSON, rudy text otherwise)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) {
            if (params.threads == 0) params.threads = default_threads();
            std::vector<std::string> warnings;
            rqrao::Graph g = solve_graph.load(&warnings);
            for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';

            ordered_json report;
            report["command"] = "solve";
            report["algorithm"] = algo;
            report["graph"] = solve_graph.echo();
            report["parameters"] = params_echo(params);
            report["parameters"]["repeat"] = repeat;
            report["parameters"]["seed"] = seed;
            report["parameters"]["rank2_restarts"] = rank2_restarts;

            ordered_json runs = ordered_json::array();
            double best = -std::numeric_limits<double>::infinity();
            std::string best_bits;
            std::string all_rounds_csv;
            for (int r = 0; r < repeat; ++r) {
                rqrao::RngStream stream =
                    rqrao::RngStream(seed).child(static_cast<std::uint64_t>(r));
                rqrao::SolveReport rep;
                if (algo == "rqrao") {
                    rep = rqrao::rqrao_solve(g, params, stream);
                } else if (algo == "tree") {
                    rep = rqrao::tree_rounding_solve(g, params, stream);
                } else if (algo == "qrao") {
                    rep = rqrao::qrao_solve(g, params.m, params.chi, params.optimizer, stream);
                } else if (algo == "rqaoa") {
                    rep = rqrao::rqaoa_solve(g, params.bf_threshold, params.threads);
                } else if (algo == "rank2") {
                    rep = rqrao::rank_two_solve(g, rank2_restarts, stream);
                } else if (algo == "brute") {
                    rqrao::BruteForceResult bf =
                        rqrao::brute_force_maxcut(g, rqrao::resolve_threads(params.threads));
                    rep.algorithm = "brute";
                    rep.bits = bf.bits;
                    rep.cut_weight = bf.weight;
                } else {
                    throw CLI::ValidationError("unknown --algo " + algo);
                }
                if (rep.cut_weight > best) {
                    best = rep.cut_weight;
                    best_bits = rqrao::bits_to_string(rep.bits);
                }
                runs.push_back(rqrao::report_to_json(rep));
                all_rounds_csv += rqrao::rounds_to_csv(rep);
            }
            report["runs"] = runs;
            report["best"] = {{"cut_weight", best}, {"bits", best_bits}};

            if (!out_path.empty()) write_file(out_path, report.dump(2) + "\n");
            if (!round_csv_path.empty()) write_file(round_csv_path, all_rounds_csv);
            std::cout << best << '\n';
            return 0;
        }

        if (*verify_cmd) {
            std::vector<rqrao::VerifyResult> results =
                rqrao::run_verification(instances, verify_seed);
            ordered_json report;
            report["command"] = "verify";
            report["instances"] = instances;
            report["seed"] = verify_seed;
            ordered_json suites = ordered_json::array();
            bool all_pass = true;
            for (const rqrao::VerifyResult& r : results) {
                suites.push_back({{"name", r.name},
                                  {"instances", r.instances},
                                  {"max_gap", r.max_gap},
                                  {"tolerance", r.tolerance},
                                  {"pass", r.pass()}});
                std::cout << (r.pass() ? "pass" : "FAIL") << "  " << r.name << "  max gap "
                          << r.max_gap << "  (tolerance " << r.tolerance << ", " << r.instances
                          << " instances)\n";
                all_pass = all_pass && r.pass();
            }
            report["suites"] = suites;
            report["pass"] = all_pass;
            if (!verify_out.empty()) write_file(verify_out, report.dump(2) + "\n");
            return all_pass ? 0 : 1;
        }

        if (*bench) {
            if (bench_params.threads == 0) bench_params.threads = default_threads();
            rqrao::BenchConfig cfg;
            cfg.params = bench_params;
            cfg.seed = bench_seed;
            cfg.graphs_per_size = graphs_per_size;
            cfg.sizes.clear();
            {
                std::stringstream ss(sizes_arg);
                std::string tok;
                while (std::getline(ss, tok, ',')) cfg.sizes.push_back(std::stoi(tok));
            }
            cfg.algorithms.clear();
            {
                std::stringstream ss(algos_arg);
                std::string tok;
                while (std::getline(ss, tok, ',')) cfg.algorithms.push_back(tok);
            }
            rqrao::BenchResult result = rqrao::run_bench(cfg);
            std::string csv = rqrao::bench_to_csv(result);
            if (!bench_out.empty())
                write_file(bench_out, csv);
            else
                std::cout << csv;
            for (const auto& [algoname, b] : result.time_exponent)
                std::cout << "# time exponent " << algoname << " " << b << '\n';
            return 0;
        }

        if (*gen) {
            rqrao::Graph g = gen_graph.load(nullptr);
            std::string payload;
            if (gen_out.size() > 5 && gen_out.substr(gen_out.size() - 5) == ".json")
                payload = rqrao::graph_to_json(g).dump(2) + "\n";
            else
                payload = rqrao::to_rudy(g);
            if (gen_out.empty())
                std::cout << payload;
            else
                write_file(gen_out, payload);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
