#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rqrao/graph.hpp"
#include "rqrao/oracle.hpp"
#include "rqrao/solver.hpp"

namespace rqrao {

using Matrix4cd = Eigen::Matrix4cd;

// Level-1 ansatz exp(i beta B) exp(i gamma C) |+>^n with B = sum X_i and
// C = sum w_jk Z_j Z_k. Everything below works from the two-qubit reduced
// state of exp(i gamma C)|+>, whose entries close over neighborhood cosine
// products, so no statevector is ever built.

namespace detail {

/// rho_uv = tr_{everything but u,v}( e^{i gamma C} |+><+| e^{-i gamma C} ).
/// Basis order (z_u, z_v) = |00>, |01>, |10>, |11> with u the left factor.
inline Matrix4cd qaoa1_reduced_state(const Graph& g, int u, int v, double gamma) {
    int n = g.num_nodes();
    std::vector<double> wu(static_cast<std::size_t>(n), 0.0), wv(static_cast<std::size_t>(n), 0.0);
    double wuv = 0;
    for (const Edge& e : g.edges()) {
        if ((e.u == u && e.v == v) || (e.u == v && e.v == u)) {
            wuv = e.w;
            continue;
        }
        if (e.u == u) wu[static_cast<std::size_t>(e.v)] = e.w;
        if (e.v == u) wu[static_cast<std::size_t>(e.u)] = e.w;
        if (e.u == v) wv[static_cast<std::size_t>(e.v)] = e.w;
        if (e.v == v) wv[static_cast<std::size_t>(e.u)] = e.w;
    }
    auto zval = [](int bit) { return bit ? -1.0 : 1.0; };
    Matrix4cd rho;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            double zu = zval(r >> 1), zv = zval(r & 1);
            double zu2 = zval(c >> 1), zv2 = zval(c & 1);
            double prod = 1.0;
            for (int t = 0; t < n; ++t) {
                if (t == u || t == v) continue;
                double a = wu[static_cast<std::size_t>(t)] * (zu - zu2) +
                           wv[static_cast<std::size_t>(t)] * (zv - zv2);
                if (a != 0.0) prod *= std::cos(gamma * a);
            }
            rho(r, c) = 0.25 * std::exp(cx(0, gamma * wuv * (zu * zv - zu2 * zv2))) * prod;
        }
    return rho;
}

inline Matrix4cd mixer2(double beta) {
    Matrix2cd u1;
    u1 << std::cos(beta), cx(0, std::sin(beta)), cx(0, std::sin(beta)), std::cos(beta);
    Matrix4cd u;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) u(r, c) = u1(r >> 1, c >> 1) * u1(r & 1, c & 1);
    return u;
}

/// tr( Z x Z . e^{i beta B2} M e^{-i beta B2} ).
inline double zz_after_mixer(const Matrix4cd& m, double beta) {
    Matrix4cd u = mixer2(beta);
    Matrix4cd rotated = u * m * u.adjoint();
    return (rotated(0, 0) - rotated(1, 1) - rotated(2, 2) + rotated(3, 3)).real();
}

/// Closed-form stationary beta of the mixed objective. Conjugating ZZ by the
/// two-qubit mixer gives A + P cos(4b) + Q sin(4b) with
///   P = (tr(ZZ M) - tr(YY M)) / 2 = (R11 - R22 - R33 + R44)/2 + R14 - R23,
///   Q = -(tr(ZY M) + tr(YZ M)) / 2 = I12 + I13 - I24 - I34,
/// so the extrema sit at 4b = atan2(Q, P) + k pi. Both candidates in
/// [0, pi/2] are evaluated and the ZZ-sum minimizer (the Ising maximizer)
/// wins.
inline double qaoa1_beta_star(const Matrix4cd& m) {
    double p = 0.5 * (m(0, 0).real() - m(1, 1).real() - m(2, 2).real() + m(3, 3).real()) +
               m(0, 3).real() - m(1, 2).real();
    double q = m(0, 1).imag() + m(0, 2).imag() - m(1, 3).imag() - m(2, 3).imag();
    double base = 0.25 * std::atan2(q, p);
    double best_beta = 0, best_val = std::numeric_limits<double>::infinity();
    for (int k = -2; k <= 3; ++k) {
        double beta = base + k * M_PI / 4.0;
        if (beta < 0 || beta > M_PI / 2.0) continue;
        double val = zz_after_mixer(m, beta);
        if (val < best_val) {
            best_val = val;
            best_beta = beta;
        }
    }
    return best_beta;
}

struct Qaoa1Angles {
    double beta = 0;
    double gamma = 0;
    double objective = 0;  // Ising objective (W - sum_e w <ZZ>) / 2
};

/// Coarse 50-point gamma grid on [0, pi] with two 50-point refinements;
/// beta from the closed form at each gamma.
inline Qaoa1Angles qaoa1_grid_search(const Graph& g) {
    double total = g.total_weight();
    auto objective_at = [&](double gamma, double& beta_out) {
        Matrix4cd m = Matrix4cd::Zero();
        for (const Edge& e : g.edges())
            m += e.w * qaoa1_reduced_state(g, e.u, e.v, gamma);
        double beta = qaoa1_beta_star(m);
        beta_out = beta;
        return (total - zz_after_mixer(m, beta)) / 2.0;
    };

    Qaoa1Angles best;
    best.objective = -std::numeric_limits<double>::infinity();
    double lo = 0, hi = M_PI;
    const int points = 50;
    for (int refine = 0; refine < 3; ++refine) {
        double step = (hi - lo) / (points - 1);
        for (int i = 0; i < points; ++i) {
            double gamma = lo + i * step;
            double beta;
            double val = objective_at(gamma, beta);
            if (val > best.objective) best = {beta, gamma, val};
        }
        lo = std::max(0.0, best.gamma - step);
        hi = std::min(M_PI, best.gamma + step);
    }
    return best;
}

} // namespace detail

/// Analytic level-1 edge energy <Z_u Z_v> at the given angles.
inline double qaoa1_edge_energy(const Graph& g, int u, int v, double beta, double gamma) {
    return detail::zz_after_mixer(detail::qaoa1_reduced_state(g, u, v, gamma), beta);
}

/// Dense statevector reference for the level-1 ansatz (test oracle).
inline std::vector<double> qaoa1_dense_edge_energies(const Graph& g, double beta, double gamma) {
    int n = g.num_nodes();
    DenseState::check_dense_bound(n);
    Eigen::Index dim = Eigen::Index(1) << n;
    VectorXcd psi(dim);
    double amp = std::pow(2.0, -n / 2.0);
    for (Eigen::Index z = 0; z < dim; ++z) {
        double c = 0;
        for (const Edge& e : g.edges()) {
            double zu = (z >> e.u) & 1 ? -1.0 : 1.0;
            double zv = (z >> e.v) & 1 ? -1.0 : 1.0;
            c += e.w * zu * zv;
        }
        psi(z) = amp * std::exp(cx(0, gamma * c));
    }
    Matrix2cd mix;
    mix << std::cos(beta), cx(0, std::sin(beta)), cx(0, std::sin(beta)), std::cos(beta);
    for (int q = 0; q < n; ++q) DenseState::apply_1q(psi, q, mix);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(g.num_edges()));
    for (const Edge& e : g.edges()) {
        double v = 0;
        for (Eigen::Index z = 0; z < dim; ++z) {
            double zu = (z >> e.u) & 1 ? -1.0 : 1.0;
            double zv = (z >> e.v) & 1 ? -1.0 : 1.0;
            v += std::norm(psi(z)) * zu * zv;
        }
        out.push_back(v);
    }
    return out;
}

/// Level-1 recursive baseline: per round, optimize (beta, gamma), fix the
/// parity of the largest-|energy| edge, contract, and finish by brute force
/// below the threshold. Deterministic given the graph and threshold.
inline SolveReport rqaoa_solve(const Graph& g, int bf_threshold, int threads = 0) {
    if (bf_threshold < 1 || bf_threshold > kBruteForceNodeLimit)
        throw std::invalid_argument("brute-force threshold must lie in [1, 26]");
    double t0 = detail::now_seconds();
    SolveReport report;
    report.algorithm = "rqaoa";
    Graph current = g;
    ParityRecord record{{}, current, {}};

    int round = 0;
    while (current.num_nodes() > bf_threshold) {
        double tr0 = detail::now_seconds();
        RoundLog log;
        log.nodes = current.num_nodes();
        log.edges = current.num_edges();
        if (current.num_edges() == 0) break;  // only isolated remnants left

        detail::Qaoa1Angles angles = detail::qaoa1_grid_search(current);
        log.best_objective = angles.objective;

        const auto& edges = current.edges();
        std::size_t argmax = 0;
        double best_abs = -1;
        std::vector<double> energies(edges.size());
        for (std::size_t e = 0; e < edges.size(); ++e) {
            energies[e] =
                qaoa1_edge_energy(current, edges[e].u, edges[e].v, angles.beta, angles.gamma);
            if (std::abs(energies[e]) > best_abs) {
                best_abs = std::abs(energies[e]);
                argmax = e;
            }
        }
        int sign;
        if (energies[argmax] == 0.0) {
            // vanishing energies have negligible probability; keep the solve
            // deterministic with a round-keyed stream
            Rng tie(RngStream(0x71a0u).child(static_cast<std::uint64_t>(round)));
            argmax = tie.index(edges.size());
            sign = tie.pm1();
            log.fallback_fixes = 1;
        } else {
            sign = energies[argmax] > 0 ? 1 : -1;
        }
        record.decisions.push_back({current.label_of(edges[argmax].u),
                                    current.label_of(edges[argmax].v), sign});
        current = reduce_graph(current, edges[argmax].u, edges[argmax].v, sign);
        log.fixed = 1;
        log.seconds = detail::now_seconds() - tr0;
        report.rounds.push_back(log);
        ++round;
    }

    record.residual_graph = current;
    if (current.num_nodes() <= kBruteForceNodeLimit) {
        auto [bits, weight] = detail::brute_force_finish(g, record, threads);
        report.bits = bits;
        report.cut_weight = weight;
    } else {
        // every residual assignment scores equally once no edges remain
        BitString residual(static_cast<std::size_t>(current.num_nodes()), 0);
        report.bits = record.lift(g.num_nodes(), residual);
        report.cut_weight = cut_weight(g, report.bits);
    }
    report.seconds = detail::now_seconds() - t0;
    return report;
}

} // namespace rqrao
