#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rqrao/forest.hpp"
#include "rqrao/graph.hpp"
#include "rqrao/lbfgs.hpp"
#include "rqrao/mpo.hpp"
#include "rqrao/mps.hpp"
#include "rqrao/oracle.hpp"
#include "rqrao/parallel.hpp"
#include "rqrao/qrac.hpp"
#include "rqrao/rng.hpp"
#include "rqrao/tensornet.hpp"

namespace rqrao {

/// Solver hyperparameters; the defaults are the recommended set
/// (m = 3, N = 20, S = 2, chi = 2, M = 10, 1e-5 perturbation).
struct RqraoParams {
    int m = 3;
    int ensemble = 20;        // trials per round, N
    double scale = 2.0;       // shrinkage factor S
    int chi = 2;              // MPS bond cap
    int bf_threshold = 10;    // brute-force size M
    double perturbation = 1e-5;
    OptimizerConfig optimizer;
    int threads = 0;          // 0 = hardware concurrency

    void validate() const {
        if (m < 1 || m > 3) throw std::invalid_argument("m must be 1, 2 or 3");
        if (ensemble < 1) throw std::invalid_argument("ensemble size must be >= 1");
        if (scale < 0) throw std::invalid_argument("scale factor must be >= 0");
        if (chi < 1) throw std::invalid_argument("bond dimension must be >= 1");
        if (bf_threshold < 1 || bf_threshold > kBruteForceNodeLimit)
            throw std::invalid_argument("brute-force threshold must lie in [1, 26]");
        if (perturbation < 0) throw std::invalid_argument("perturbation must be >= 0");
        optimizer.validate();
    }
};

struct RoundLog {
    int nodes = 0;
    int edges = 0;
    int fixed = 0;              // parities fixed this round
    double best_objective = 0;  // best surviving trial objective
    int dropped_trials = 0;
    int fallback_fixes = 0;     // rounds where no edge cleared the threshold
    int sign_disagreements = 0; // energy sign vs current weight sign at fix time
    double seconds = 0;
};

struct SolveReport {
    std::string algorithm;
    std::uint64_t seed = 0;
    BitString bits;
    double cut_weight = 0;
    std::vector<RoundLog> rounds;
    bool optimizer_flag = false;  // a line search gave up somewhere
    double seconds = 0;
};

/// Shrinkage-thresholded mean: mu - sign(mu) * min(S*sigma, |mu|) with the
/// population standard deviation; exactly zero whenever |mu| <= S*sigma.
inline double ensemble_energy(const std::vector<double>& samples, double scale) {
    if (samples.empty()) throw std::invalid_argument("no samples");
    double mu = 0;
    for (double s : samples) mu += s;
    mu /= static_cast<double>(samples.size());
    double var = 0;
    for (double s : samples) var += (s - mu) * (s - mu);
    double sigma = std::sqrt(var / static_cast<double>(samples.size()));
    if (std::abs(mu) <= scale * sigma) return 0.0;
    return mu - (mu > 0 ? 1.0 : -1.0) * scale * sigma;
}

namespace detail {

inline double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

/// Exhaustive completion of a reduction record: enumerate residual
/// assignments (first residual node pinned by flip symmetry), lift each
/// through the record and score on the clean original graph.
inline std::pair<BitString, double> brute_force_finish(const Graph& original,
                                                       const ParityRecord& record, int threads) {
    int nr = record.residual_graph.num_nodes();
    if (nr > kBruteForceNodeLimit)
        throw std::logic_error("residual too large for the brute-force block");
    std::uint64_t total = nr <= 1 ? 1 : (std::uint64_t(1) << (nr - 1));
    int nblocks = threads <= 1 || total < 1024 ? 1 : threads * 4;
    std::uint64_t block = (total + nblocks - 1) / nblocks;
    struct Best {
        double w = -std::numeric_limits<double>::infinity();
        std::uint64_t mask = std::numeric_limits<std::uint64_t>::max();
    };
    std::vector<Best> best(static_cast<std::size_t>(nblocks));
    parallel_for(static_cast<std::size_t>(nblocks), threads, [&](std::size_t bi) {
        Best b;
        BitString residual(static_cast<std::size_t>(nr));
        for (std::uint64_t half = bi * block; half < std::min(total, (bi + 1) * block); ++half) {
            std::uint64_t mask = half << 1;
            for (int i = 0; i < nr; ++i) residual[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
            double w = cut_weight(original, record.lift(original.num_nodes(), residual));
            if (w > b.w + 1e-12 || (w > b.w - 1e-12 && mask < b.mask)) {
                b.w = w;
                b.mask = mask;
            }
        }
        best[bi] = b;
    });
    Best overall;
    for (const Best& b : best)
        if (b.w > overall.w + 1e-12 || (b.w > overall.w - 1e-12 && b.mask < overall.mask))
            overall = b;
    BitString residual(static_cast<std::size_t>(nr));
    for (int i = 0; i < nr; ++i) residual[static_cast<std::size_t>(i)] = (overall.mask >> i) & 1u;
    return {record.lift(original.num_nodes(), residual), overall.w};
}

struct TrialOutcome {
    bool ok = false;
    bool line_search_failed = false;
    double objective = 0;
    std::vector<double> energies;
};

inline TrialOutcome run_trial(const Graph& g, const RqraoParams& p, RngStream stream) {
    TrialOutcome out;
    Rng assign_rng(stream.child(0));
    PauliAssignment a = assign_paulis(g, p.m, assign_rng);
    Mpo h = build_mpo(build_terms(g, a), a.num_qubits);
    Rng init_rng(stream.child(1));
    Mps psi0 = init_mps(a.num_qubits, p.chi, init_rng);
    MpsOptimizeResult opt = optimize(psi0, h, p.optimizer);
    if (!std::isfinite(opt.objective)) return out;
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(g.num_edges()));
    for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
    out.energies = edge_energies(opt.psi, a, edges);
    for (double e : out.energies)
        if (!std::isfinite(e)) return out;
    out.objective = opt.objective;
    out.line_search_failed = opt.line_search_failed;
    out.ok = true;
    return out;
}

/// The recursive loop on one connected component (labels must be 0..n-1):
/// perturb once, then per round run the trial ensemble, fix the parities of
/// the spanning forest over edges whose ensemble energy cleared the
/// threshold, contract, and hand the residual to the brute-force block.
inline SolveReport solve_component(const Graph& original, const RqraoParams& p,
                                   RngStream stream) {
    SolveReport report;
    report.algorithm = "rqrao";
    if (original.num_nodes() == 1) {
        report.bits = {0};
        report.cut_weight = 0;
        return report;
    }

    Rng perturb_rng(stream.child(100));
    Graph current = perturb_weights(original, p.perturbation, perturb_rng);
    ParityRecord record{{}, current, {}};

    int round = 0;
    while (current.num_nodes() > p.bf_threshold) {
        double t0 = now_seconds();
        RoundLog log;
        log.nodes = current.num_nodes();
        log.edges = current.num_edges();

        // node-isolation guard: re-noise weights that merged to exactly zero
        {
            Rng zero_rng(stream.child(101, static_cast<std::uint64_t>(round)));
            bool touched = false;
            std::vector<Edge> edges = current.edges();
            for (Edge& e : edges)
                if (e.w == 0.0) {
                    e.w = zero_rng.uniform(-p.perturbation, p.perturbation);
                    touched = true;
                }
            if (touched) current = Graph(current.num_nodes(), std::move(edges), current.labels());
        }

        // ensemble of independent assignments and optimizations
        std::vector<TrialOutcome> trials(static_cast<std::size_t>(p.ensemble));
        auto run_round = [&](std::uint64_t salt) {
            parallel_for(static_cast<std::size_t>(p.ensemble), p.threads, [&](std::size_t t) {
                trials[t] = run_trial(
                    current, p,
                    stream.child(200 + salt, static_cast<std::uint64_t>(round), t));
            });
        };
        run_round(0);
        if (std::none_of(trials.begin(), trials.end(),
                         [](const TrialOutcome& t) { return t.ok; })) {
            run_round(1);  // one retry with fresh streams
            if (std::none_of(trials.begin(), trials.end(),
                             [](const TrialOutcome& t) { return t.ok; }))
                throw std::runtime_error("every ensemble trial failed twice in round " +
                                         std::to_string(round));
        }

        double best_objective = -std::numeric_limits<double>::infinity();
        for (const TrialOutcome& t : trials) {
            if (!t.ok) {
                ++log.dropped_trials;
                continue;
            }
            best_objective = std::max(best_objective, t.objective);
            report.optimizer_flag = report.optimizer_flag || t.line_search_failed;
        }
        log.best_objective = best_objective;

        // ensemble edge energies, keyed by stable labels
        const auto& edges = current.edges();
        std::map<std::pair<int, int>, double> energy_of;
        std::vector<double> means(edges.size(), 0.0);
        std::vector<ForestEdge> candidates;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            std::vector<double> samples;
            samples.reserve(trials.size());
            for (const TrialOutcome& t : trials)
                if (t.ok) samples.push_back(t.energies[e]);
            double ee = ensemble_energy(samples, p.scale);
            for (double s : samples) means[e] += s / static_cast<double>(samples.size());
            int lu = current.label_of(edges[e].u), lv = current.label_of(edges[e].v);
            energy_of[std::minmax(lu, lv)] = ee;
            if (std::abs(ee) > 0) candidates.push_back({lu, lv, std::abs(ee)});
        }

        if (candidates.empty()) {
            // no edge cleared the shrinkage threshold; fall back to the
            // largest-mean edge so the recursion always progresses
            std::size_t argmax = 0;
            for (std::size_t e = 1; e < edges.size(); ++e)
                if (std::abs(means[e]) > std::abs(means[argmax])) argmax = e;
            int sign;
            if (means[argmax] == 0.0) {
                Rng tie_rng(stream.child(300, static_cast<std::uint64_t>(round)));
                sign = tie_rng.pm1();
            } else {
                sign = means[argmax] > 0 ? 1 : -1;
            }
            int removed = edges[argmax].u, kept = edges[argmax].v;
            record.decisions.push_back({current.label_of(removed), current.label_of(kept), sign});
            current = reduce_graph(current, removed, kept, sign);
            log.fixed = 1;
            log.fallback_fixes = 1;
            log.seconds = now_seconds() - t0;
            report.rounds.push_back(log);
            ++round;
            continue;
        }

        Rng forest_rng(stream.child(400, static_cast<std::uint64_t>(round)));
        RootedForest forest = max_spanning_forest(candidates, forest_rng);
        for (const RootedTree& tree : forest.trees) {
            // leaves first: reverse breadth-first order, root excluded
            for (auto it = tree.bfs_order.rbegin(); it != tree.bfs_order.rend(); ++it) {
                int child_label = *it;
                if (child_label == tree.root) continue;
                int parent_label = tree.parent(child_label);
                double ee = energy_of.at(std::minmax(child_label, parent_label));
                int sign = ee > 0 ? 1 : -1;
                int child_pos = current.pos_of_label(child_label);
                int parent_pos = current.pos_of_label(parent_label);
                double w_now = current.weight(child_pos, parent_pos);
                if (w_now != 0.0 && (w_now > 0) != (ee > 0)) ++log.sign_disagreements;
                record.decisions.push_back({child_label, parent_label, sign});
                current = reduce_graph(current, child_pos, parent_pos, sign);
                ++log.fixed;
            }
        }
        log.seconds = now_seconds() - t0;
        report.rounds.push_back(log);
        ++round;
    }

    record.residual_graph = current;
    auto [bits, weight] = brute_force_finish(original, record, p.threads);
    record.residual_assignment.assign(static_cast<std::size_t>(current.num_nodes()), 0);
    for (int i = 0; i < current.num_nodes(); ++i)
        record.residual_assignment[static_cast<std::size_t>(i)] =
            bits[static_cast<std::size_t>(current.label_of(i))];
    report.bits = bits;
    report.cut_weight = weight;
    return report;
}

} // namespace detail

/// Recursive quantum random access optimization. Disconnected graphs are
/// split and solved per component; the final weight is always recomputed on
/// the original, unperturbed graph.
inline SolveReport rqrao_solve(const Graph& g, const RqraoParams& p, RngStream stream) {
    p.validate();
    double t0 = detail::now_seconds();
    SolveReport report;
    report.algorithm = "rqrao";
    report.seed = stream.seed();
    report.bits.assign(static_cast<std::size_t>(g.num_nodes()), 0);

    auto components = connected_components(g);
    for (std::size_t c = 0; c < components.size(); ++c) {
        Graph part = subgraph(g, components[c]);
        // re-key to identity labels; map back through the component list
        Graph local(part.num_nodes(), part.edges());
        SolveReport sub = detail::solve_component(local, p, stream.child(7, c));
        for (int i = 0; i < local.num_nodes(); ++i)
            report.bits[static_cast<std::size_t>(components[c][static_cast<std::size_t>(i)])] =
                sub.bits[static_cast<std::size_t>(i)];
        for (RoundLog& r : sub.rounds) report.rounds.push_back(r);
        report.optimizer_flag = report.optimizer_flag || sub.optimizer_flag;
    }
    report.cut_weight = cut_weight(g, report.bits);
    report.seconds = detail::now_seconds() - t0;
    return report;
}

/// N = 1 specialization: a single trial per round leaves the shrinkage at
/// zero sigma, so one spanning forest fixes nearly everything at once.
inline SolveReport tree_rounding_solve(const Graph& g, RqraoParams p, RngStream stream) {
    p.ensemble = 1;
    SolveReport report = rqrao_solve(g, p, stream);
    report.algorithm = "tree_rounding";
    return report;
}

/// Plain relaxation with per-site rounding: one assignment, one MPS
/// optimization, bits from the signs of the site expectations.
inline SolveReport qrao_solve(const Graph& g, int m, int chi, const OptimizerConfig& cfg,
                              RngStream stream) {
    double t0 = detail::now_seconds();
    SolveReport report;
    report.algorithm = "qrao";
    report.seed = stream.seed();
    if (g.num_nodes() < 1) throw std::invalid_argument("empty graph");

    Rng assign_rng(stream.child(0));
    PauliAssignment a = assign_paulis(g, m, assign_rng);
    Mpo h = build_mpo(build_terms(g, a), a.num_qubits);
    Rng init_rng(stream.child(1));
    Mps psi0 = init_mps(a.num_qubits, chi, init_rng);
    MpsOptimizeResult opt = optimize(psi0, h, cfg);
    report.optimizer_flag = opt.line_search_failed;

    Rng decode_rng(stream.child(2));
    report.bits = decode_bits(a, site_expectations(opt.psi, a), decode_rng);
    report.cut_weight = cut_weight(g, report.bits);

    RoundLog log;
    log.nodes = g.num_nodes();
    log.edges = g.num_edges();
    log.best_objective = opt.objective;
    log.seconds = detail::now_seconds() - t0;
    report.rounds.push_back(log);
    report.seconds = log.seconds;
    return report;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

/// Deterministic content and wall-clock figures are kept apart: everything
/// under "timings" varies run to run, the rest is a pure function of inputs.
inline nlohmann::ordered_json report_to_json(const SolveReport& r) {
    nlohmann::ordered_json j;
    j["algorithm"] = r.algorithm;
    j["seed"] = r.seed;
    j["cut_weight"] = r.cut_weight;
    j["bits"] = bits_to_string(r.bits);
    j["optimizer_flag"] = r.optimizer_flag;
    nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
    nlohmann::ordered_json round_seconds = nlohmann::ordered_json::array();
    for (const RoundLog& l : r.rounds) {
        rounds.push_back({{"nodes", l.nodes},
                          {"edges", l.edges},
                          {"fixed", l.fixed},
                          {"best_objective", l.best_objective},
                          {"dropped_trials", l.dropped_trials},
                          {"fallback_fixes", l.fallback_fixes},
                          {"sign_disagreements", l.sign_disagreements}});
        round_seconds.push_back(l.seconds);
    }
    j["rounds"] = rounds;
    j["timings"] = {{"total_seconds", r.seconds}, {"round_seconds", round_seconds}};
    return j;
}

/// Telemetry rows (round, nodes, edges, fixed, best objective, seconds).
inline std::string rounds_to_csv(const SolveReport& r) {
    std::ostringstream out;
    out << "round,nodes,edges,fixed,best_objective,seconds\n";
    for (std::size_t i = 0; i < r.rounds.size(); ++i) {
        const RoundLog& l = r.rounds[i];
        out << i << ',' << l.nodes << ',' << l.edges << ',' << l.fixed << ','
            << l.best_objective << ',' << l.seconds << '\n';
    }
    return out.str();
}

} // namespace rqrao
