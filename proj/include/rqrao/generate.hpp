#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rqrao/graph.hpp"
#include "rqrao/rng.hpp"

namespace rqrao {

enum class GraphKind { Random, ThreeRegular, ToricPlusHub };

inline GraphKind graph_kind_from_string(const std::string& s) {
    if (s == "random") return GraphKind::Random;
    if (s == "3regular") return GraphKind::ThreeRegular;
    if (s == "toric_plus_hub") return GraphKind::ToricPlusHub;
    throw std::invalid_argument("unknown graph kind: " + s);
}

struct GeneratorSpec {
    GraphKind kind = GraphKind::ThreeRegular;
    int nodes = 0;       // random / 3regular
    double density = 0;  // random
    int grid = 0;        // toric_plus_hub: grid size g (g x g torus)
    std::uint64_t seed = 0;
};

namespace detail {

/// Erdos-Renyi-style G(n, M) with M = round(density * C(n,2)) edges and
/// +-1 weights; the family the rudy -rnd_graph flag produces.
inline Graph generate_random(int n, double density, Rng& rng) {
    if (n < 1 || density < 0 || density > 1)
        throw std::invalid_argument("random graph needs n >= 1, density in [0,1]");
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) pairs.push_back({u, v});
    std::shuffle(pairs.begin(), pairs.end(), rng.engine());
    auto m = static_cast<std::size_t>(std::llround(density * static_cast<double>(pairs.size())));
    std::vector<Edge> edges;
    edges.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
        edges.push_back({pairs[i].first, pairs[i].second, static_cast<double>(rng.pm1())});
    return Graph(n, std::move(edges));
}

/// 3-regular simple graph via the pairing model, resampled until simple.
inline Graph generate_3regular(int n, Rng& rng) {
    if (n < 4 || (n * 3) % 2 != 0)
        throw std::runtime_error("3-regular graph needs even 3n and n >= 4");
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<int> stubs(static_cast<std::size_t>(n) * 3);
        for (int i = 0; i < n * 3; ++i) stubs[static_cast<std::size_t>(i)] = i / 3;
        std::shuffle(stubs.begin(), stubs.end(), rng.engine());
        std::vector<std::pair<int, int>> pairs;
        bool ok = true;
        std::vector<std::vector<bool>> seen(static_cast<std::size_t>(n),
                                            std::vector<bool>(static_cast<std::size_t>(n), false));
        for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
            int u = stubs[i], v = stubs[i + 1];
            if (u == v || seen[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) {
                ok = false;
                break;
            }
            seen[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = true;
            seen[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = true;
            pairs.push_back({u, v});
        }
        if (!ok) continue;
        std::vector<Edge> edges;
        edges.reserve(pairs.size());
        for (auto [u, v] : pairs) edges.push_back({u, v, static_cast<double>(rng.pm1())});
        return Graph(n, std::move(edges));
    }
    throw std::runtime_error("3-regular pairing model failed to produce a simple graph");
}

/// g x g torus grid plus one hub node adjacent to every grid node.
/// Grid edges weigh +-1 at random, as do hub edges.
inline Graph generate_toric_plus_hub(int g, Rng& rng) {
    if (g < 3) throw std::invalid_argument("toric grid size must be >= 3");
    int n = g * g;
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(3 * n));
    auto id = [g](int i, int j) { return ((i % g) + g) % g * g + ((j % g) + g) % g; };
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            edges.push_back({id(i, j), id(i, j + 1), static_cast<double>(rng.pm1())});
            edges.push_back({id(i, j), id(i + 1, j), static_cast<double>(rng.pm1())});
        }
    for (int v = 0; v < n; ++v) edges.push_back({v, n, static_cast<double>(rng.pm1())});
    return Graph(n + 1, std::move(edges));
}

} // namespace detail

/// Reproducible graph generation: the same spec always yields the same graph.
inline Graph generate(const GeneratorSpec& spec) {
    Rng rng(RngStream(spec.seed).child(static_cast<std::uint64_t>(spec.kind)));
    switch (spec.kind) {
        case GraphKind::Random: return detail::generate_random(spec.nodes, spec.density, rng);
        case GraphKind::ThreeRegular: return detail::generate_3regular(spec.nodes, rng);
        case GraphKind::ToricPlusHub: return detail::generate_toric_plus_hub(spec.grid, rng);
    }
    throw std::logic_error("unreachable");
}

} // namespace rqrao
