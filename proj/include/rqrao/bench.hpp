#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rqrao/generate.hpp"
#include "rqrao/ranktwo.hpp"
#include "rqrao/rqaoa.hpp"
#include "rqrao/solver.hpp"

namespace rqrao {

struct BenchConfig {
    std::vector<int> sizes;
    int graphs_per_size = 10;
    std::vector<std::string> algorithms{"rqrao", "rank2"};
    RqraoParams params;
    int rank2_restarts = 10;
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::string algorithm;
    int nodes = 0;
    int graph_index = 0;
    bool ok = false;
    double cut = 0;
    double relative = std::numeric_limits<double>::quiet_NaN();  // vs rank2
    double seconds = 0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::map<std::string, double> time_exponent;  // fitted t ~ n^b per algorithm
};

namespace detail {

inline SolveReport bench_dispatch(const std::string& algo, const Graph& g,
                                  const BenchConfig& cfg, RngStream stream) {
    if (algo == "rqrao") return rqrao_solve(g, cfg.params, stream);
    if (algo == "tree") return tree_rounding_solve(g, cfg.params, stream);
    if (algo == "qrao")
        return qrao_solve(g, cfg.params.m, cfg.params.chi, cfg.params.optimizer, stream);
    if (algo == "rqaoa") return rqaoa_solve(g, cfg.params.bf_threshold, cfg.params.threads);
    if (algo == "rank2") return rank_two_solve(g, cfg.rank2_restarts, stream);
    throw std::invalid_argument("unknown algorithm: " + algo);
}

/// Least-squares exponent of t = a n^b over the per-size mean times.
inline double fit_exponent(const std::vector<std::pair<int, double>>& size_seconds) {
    std::map<int, std::pair<double, int>> mean;
    for (const auto& [n, t] : size_seconds)
        if (t > 0) {
            mean[n].first += t;
            ++mean[n].second;
        }
    if (mean.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (const auto& [n, acc] : mean) {
        double x = std::log(static_cast<double>(n));
        double y = std::log(acc.first / acc.second);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

} // namespace detail

/// Sweep over 3-regular +-1 instances, one row per (algorithm, size, graph).
/// When rank2 participates its cut is the denominator of the relative
/// column; per-instance failures become rows with ok = false.
inline BenchResult run_bench(const BenchConfig& cfg) {
    BenchResult result;
    std::map<std::string, std::vector<std::pair<int, double>>> times;
    for (int n : cfg.sizes) {
        for (int idx = 0; idx < cfg.graphs_per_size; ++idx) {
            RngStream g_stream = RngStream(cfg.seed).child(static_cast<std::uint64_t>(n),
                                                           static_cast<std::uint64_t>(idx));
            Graph g = generate({GraphKind::ThreeRegular, n, 0, 0, g_stream.seed()});
            std::map<std::string, double> cuts;
            for (const std::string& algo : cfg.algorithms) {
                BenchRow row;
                row.algorithm = algo;
                row.nodes = n;
                row.graph_index = idx;
                double t0 = detail::now_seconds();
                try {
                    SolveReport rep = detail::bench_dispatch(algo, g, cfg, g_stream.child(99));
                    row.cut = rep.cut_weight;
                    row.ok = true;
                    cuts[algo] = rep.cut_weight;
                } catch (const std::exception&) {
                    row.ok = false;
                }
                row.seconds = detail::now_seconds() - t0;
                times[algo].push_back({n, row.seconds});
                result.rows.push_back(row);
            }
            auto base = cuts.find("rank2");
            if (base != cuts.end() && base->second != 0)
                for (BenchRow& row : result.rows)
                    if (row.nodes == n && row.graph_index == idx && row.ok)
                        row.relative = row.cut / base->second;
        }
    }
    for (const auto& [algo, pts] : times) result.time_exponent[algo] = detail::fit_exponent(pts);
    return result;
}

inline std::string bench_to_csv(const BenchResult& r) {
    std::ostringstream out;
    out << "algorithm,nodes,graph,cut,relative_cut,seconds\n";
    for (const BenchRow& row : r.rows) {
        out << row.algorithm << ',' << row.nodes << ',' << row.graph_index << ',';
        if (row.ok)
            out << row.cut;
        else
            out << "NA";
        out << ',';
        if (row.ok && std::isfinite(row.relative))
            out << row.relative;
        else
            out << "NA";
        out << ',' << row.seconds << '\n';
    }
    return out.str();
}

} // namespace rqrao
