#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "rqrao/graph.hpp"
#include "rqrao/lbfgs.hpp"
#include "rqrao/solver.hpp"

namespace rqrao {

namespace detail {

/// Expected cut of the angular relaxation: sum_e w_e sin^2((th_j - th_k)/2).
inline double rank_two_objective(const Graph& g, const std::vector<double>& theta,
                                 std::vector<double>* grad) {
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
    double value = 0;
    for (const Edge& e : g.edges()) {
        double d = theta[static_cast<std::size_t>(e.u)] - theta[static_cast<std::size_t>(e.v)];
        double s = std::sin(d / 2);
        value += e.w * s * s;
        if (grad) {
            double dg = e.w * std::sin(d) / 2;
            (*grad)[static_cast<std::size_t>(e.u)] += dg;
            (*grad)[static_cast<std::size_t>(e.v)] -= dg;
        }
    }
    return value;
}

/// Exhaustive hyperplane sweep: the cut pattern changes only at the 2|V|
/// angles where some cos(theta_j + alpha) crosses zero.
inline std::pair<BitString, double> rank_two_round(const Graph& g,
                                                   const std::vector<double>& theta) {
    std::vector<double> criticals;
    criticals.reserve(theta.size() * 2);
    for (double t : theta) {
        criticals.push_back(M_PI / 2 - t);
        criticals.push_back(3 * M_PI / 2 - t);
    }
    BitString best_bits;
    double best = -std::numeric_limits<double>::infinity();
    for (double alpha : criticals) {
        BitString bits(theta.size());
        for (std::size_t j = 0; j < theta.size(); ++j)
            bits[j] = std::cos(theta[j] + alpha + 1e-9) < 0;
        double w = cut_weight(g, bits);
        if (w > best) {
            best = w;
            best_bits = bits;
        }
    }
    return {best_bits, best};
}

/// Single-flip polish: keep flipping the best-improving node until no flip
/// helps.
inline double one_local_search(const Graph& g, BitString& bits) {
    auto adj = g.adjacency();
    std::vector<std::vector<double>> w(adj.size());
    for (std::size_t j = 0; j < adj.size(); ++j) w[j].resize(adj[j].size());
    {
        std::map<std::pair<int, int>, double> lookup;
        for (const Edge& e : g.edges()) lookup[std::minmax(e.u, e.v)] = e.w;
        for (std::size_t j = 0; j < adj.size(); ++j)
            for (std::size_t i = 0; i < adj[j].size(); ++i)
                w[j][i] = lookup.at(std::minmax(static_cast<int>(j), adj[j][i]));
    }
    double value = cut_weight(g, bits);
    bool improved = true;
    int budget = g.num_nodes() * g.num_nodes() + 16;
    while (improved && budget-- > 0) {
        improved = false;
        for (std::size_t j = 0; j < bits.size(); ++j) {
            double delta = 0;
            for (std::size_t i = 0; i < adj[j].size(); ++i) {
                bool crossing = bits[j] != bits[static_cast<std::size_t>(adj[j][i])];
                delta += crossing ? -w[j][i] : w[j][i];
            }
            if (delta > 1e-12) {
                bits[j] ^= 1;
                value += delta;
                improved = true;
            }
        }
    }
    return value;
}

} // namespace detail

/// Rank-two angular relaxation with exhaustive hyperplane rounding and a
/// single-flip polish, restarted from random angles.
inline SolveReport rank_two_solve(const Graph& g, int restarts, RngStream stream) {
    if (restarts < 1) throw std::invalid_argument("need at least one restart");
    double t0 = detail::now_seconds();
    SolveReport report;
    report.algorithm = "rank2";
    report.seed = stream.seed();
    report.cut_weight = -std::numeric_limits<double>::infinity();

    OptimizerConfig cfg;
    cfg.tol_objective = 1e-8;
    cfg.tol_parameters = 1e-8;
    cfg.max_iterations = 500;

    for (int r = 0; r < restarts; ++r) {
        Rng rng(stream.child(static_cast<std::uint64_t>(r)));
        std::vector<double> theta0(static_cast<std::size_t>(g.num_nodes()));
        for (double& t : theta0) t = rng.uniform(0, 2 * M_PI);

        auto objective = [&](const std::vector<double>& x, std::vector<double>& grad) {
            grad.resize(x.size());
            return detail::rank_two_objective(g, x, &grad);
        };
        OptimizeResult opt = lbfgs_maximize(objective, theta0, cfg);

        BitString bits = detail::rank_two_round(g, opt.x).first;
        double polished = detail::one_local_search(g, bits);
        if (polished > report.cut_weight) {
            report.cut_weight = polished;
            report.bits = bits;
        }
        RoundLog log;
        log.nodes = g.num_nodes();
        log.edges = g.num_edges();
        log.best_objective = opt.objective;
        report.rounds.push_back(log);
    }
    report.seconds = detail::now_seconds() - t0;
    return report;
}

} // namespace rqrao
