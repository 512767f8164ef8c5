#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "rqrao/forest.hpp"
#include "rqrao/generate.hpp"
#include "rqrao/graph.hpp"

using namespace rqrao;

TEST_SUITE_BEGIN("graph");

TEST_CASE("rudy parsing") {
    Graph g = parse_rudy("3 2\n1 2 1\n2 3 -1\n");
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_edges() == 2);
    CHECK(g.weight(0, 1) == 1.0);
    CHECK(g.weight(1, 2) == -1.0);

    Graph empty = parse_rudy("2 0");
    CHECK(empty.num_nodes() == 2);
    CHECK(empty.num_edges() == 0);

    SUBCASE("duplicate pairs merge by weight sum") {
        Graph m = parse_rudy("2 2\n1 2 1.5\n2 1 2.0\n");
        CHECK(m.num_edges() == 1);
        CHECK(m.weight(0, 1) == doctest::Approx(3.5));
    }
    SUBCASE("self-loops drop with a warning") {
        std::vector<std::string> warnings;
        Graph s = parse_rudy("2 2\n1 1 4\n1 2 1\n", &warnings);
        CHECK(s.num_edges() == 1);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("line 2") != std::string::npos);
    }
    SUBCASE("errors carry the line number") {
        CHECK_THROWS_WITH_AS(parse_rudy("2 1\n1 oops 3\n"),
                             doctest::Contains("line 2"), std::runtime_error);
        CHECK_THROWS_AS(parse_rudy("2 1\n1 5 1\n"), std::out_of_range);
        CHECK_THROWS_AS(parse_rudy(""), std::runtime_error);
    }
}

TEST_CASE("rudy round trip is lossless for exact weights") {
    Rng rng(7);
    Graph g = generate({GraphKind::Random, 12, 0.4, 0, 11});
    Graph back = parse_rudy(to_rudy(g));
    REQUIRE(back.num_edges() == g.num_edges());
    for (int i = 0; i < g.num_edges(); ++i) {
        CHECK(back.edges()[i].u == g.edges()[i].u);
        CHECK(back.edges()[i].v == g.edges()[i].v);
        CHECK(back.edges()[i].w == g.edges()[i].w);
    }
}

TEST_CASE("cut weight") {
    Graph triangle(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}});
    CHECK(cut_weight(triangle, {0, 0, 0}) == 0.0);
    CHECK(cut_weight(triangle, {0, 0, 1}) == 2.0);
    CHECK_THROWS_AS(cut_weight(triangle, {0, 1}), std::invalid_argument);

    SUBCASE("bit-flip symmetry") {
        Graph g = generate({GraphKind::Random, 10, 0.5, 0, 3});
        Rng rng(5);
        for (int t = 0; t < 50; ++t) {
            BitString b(10);
            for (auto& x : b) x = rng.coin();
            CHECK(cut_weight(g, b) == doctest::Approx(cut_weight(g, flipped(b))));
        }
    }
}

TEST_CASE("perturbation") {
    Graph g = generate({GraphKind::ThreeRegular, 20, 0, 0, 1});
    Rng rng(42);
    Graph p = perturb_weights(g, 1e-5, rng);
    for (int i = 0; i < g.num_edges(); ++i) {
        double d = std::abs(p.edges()[i].w - g.edges()[i].w);
        CHECK(d <= 1e-5);
    }
    SUBCASE("zero amplitude leaves weights untouched") {
        Rng r2(42);
        Graph q = perturb_weights(g, 0.0, r2);
        for (int i = 0; i < g.num_edges(); ++i) CHECK(q.edges()[i].w == g.edges()[i].w);
    }
    SUBCASE("same seed, same noise") {
        Rng a(9), b(9);
        Graph pa = perturb_weights(g, 1e-5, a);
        Graph pb = perturb_weights(g, 1e-5, b);
        for (int i = 0; i < g.num_edges(); ++i) CHECK(pa.edges()[i].w == pb.edges()[i].w);
    }
}

TEST_CASE("graph reduction") {
    SUBCASE("path contraction") {
        Graph path(3, {{0, 1, 1}, {1, 2, 1}});
        Graph r = reduce_graph(path, 1, 2, +1);  // remove middle, keep end
        CHECK(r.num_nodes() == 2);
        REQUIRE(r.num_edges() == 1);
        // labels 0 and 2 survive; the re-attached edge carries weight 1
        CHECK(r.label_of(0) == 0);
        CHECK(r.label_of(1) == 2);
        CHECK(r.weight(0, 1) == doctest::Approx(1.0));
    }
    SUBCASE("cancelling weights are kept as zero edges") {
        Graph g(3, {{0, 1, 1}, {0, 2, 2}, {1, 2, -2}});
        Graph r = reduce_graph(g, 1, 0, +1);  // merge node 1 into 0
        REQUIRE(r.num_edges() == 1);
        CHECK(r.weight(0, 1) == doctest::Approx(0.0));
    }
    SUBCASE("missing edge is a contract violation") {
        Graph g(3, {{0, 1, 1}});
        CHECK_THROWS_AS(reduce_graph(g, 0, 2, +1), std::invalid_argument);
    }
    SUBCASE("lifted assignments differ from reduced cuts by a constant") {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            Graph g = generate({GraphKind::Random, 9, 0.5, 0, seed + 100});
            if (g.num_edges() == 0) continue;
            Rng rng(seed);
            auto e = g.edges()[rng.index(static_cast<std::uint64_t>(g.num_edges()))];
            int sign = rng.pm1();
            Graph red = reduce_graph(g, e.u, e.v, sign);
            ParityRecord rec{{{g.label_of(e.u), g.label_of(e.v), sign}}, red, {}};
            double expected_offset = std::numeric_limits<double>::quiet_NaN();
            for (std::uint64_t mask = 0; mask < (1ull << red.num_nodes()); ++mask) {
                BitString rb(static_cast<std::size_t>(red.num_nodes()));
                for (int i = 0; i < red.num_nodes(); ++i) rb[static_cast<std::size_t>(i)] = (mask >> i) & 1;
                double lifted = cut_weight(g, rec.lift(g.num_nodes(), rb));
                double reduced = cut_weight(red, rb);
                if (std::isnan(expected_offset)) expected_offset = lifted - reduced;
                CHECK(lifted - reduced == doctest::Approx(expected_offset).epsilon(1e-12));
            }
        }
    }
    SUBCASE("replaying the record reproduces the residual graph") {
        Graph g = generate({GraphKind::ThreeRegular, 10, 0, 0, 5});
        Graph cur = g;
        std::vector<ParityDecision> decisions;
        Rng rng(3);
        for (int step = 0; step < 4; ++step) {
            auto e = cur.edges()[rng.index(static_cast<std::uint64_t>(cur.num_edges()))];
            int sign = rng.pm1();
            decisions.push_back({cur.label_of(e.u), cur.label_of(e.v), sign});
            cur = reduce_graph(cur, e.u, e.v, sign);
        }
        Graph replayed = replay_reductions(g, decisions);
        REQUIRE(replayed.num_nodes() == cur.num_nodes());
        CHECK(replayed.labels() == cur.labels());
        REQUIRE(replayed.num_edges() == cur.num_edges());
        for (int i = 0; i < cur.num_edges(); ++i)
            CHECK(replayed.edges()[i].w == doctest::Approx(cur.edges()[i].w));
    }
}

namespace {

// exhaustive maximum spanning forest weight, components up to 8 edges
double brute_forest_weight(const std::vector<ForestEdge>& edges) {
    std::set<int> node_set;
    for (const auto& e : edges) {
        node_set.insert(e.u);
        node_set.insert(e.v);
    }
    std::vector<int> nodes(node_set.begin(), node_set.end());
    auto comp_count = [&](unsigned mask) {
        // union-find over selected edges
        std::map<int, int> parent;
        for (int v : nodes) parent[v] = v;
        std::function<int(int)> find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        int merges = 0;
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (mask & (1u << i)) {
                int a = find(edges[i].u), b = find(edges[i].v);
                if (a == b) return -1;  // cycle
                parent[a] = b;
                ++merges;
            }
        return merges;
    };
    // a maximum spanning forest has (nodes - components) edges and no cycles
    double best = -1;
    for (unsigned mask = 0; mask < (1u << edges.size()); ++mask) {
        int merges = comp_count(mask);
        if (merges < 0) continue;
        double w = 0;
        int cnt = 0;
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (mask & (1u << i)) {
                w += edges[i].w;
                ++cnt;
            }
        if (cnt == merges && w > best) best = w;
    }
    return best;
}

} // namespace

TEST_CASE("maximum spanning forest") {
    Rng rng(1);
    SUBCASE("triangle keeps the two heaviest edges") {
        RootedForest f = max_spanning_forest({{0, 1, 3}, {1, 2, 2}, {0, 2, 1}}, rng);
        REQUIRE(f.trees.size() == 1);
        CHECK(forest_total_weight(f) == doctest::Approx(5.0));
    }
    SUBCASE("disconnected edge sets become separate trees") {
        RootedForest f = max_spanning_forest({{0, 1, 1.0}, {5, 6, 2.0}}, rng);
        CHECK(f.trees.size() == 2);
        CHECK(forest_total_weight(f) == doctest::Approx(3.0));
    }
    SUBCASE("empty input, empty forest") {
        RootedForest f = max_spanning_forest({}, rng);
        CHECK(f.trees.empty());
    }
    SUBCASE("matches exhaustive search on small edge sets") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng gen(seed + 500);
            std::vector<ForestEdge> edges;
            int m = 3 + static_cast<int>(gen.index(6));  // up to 8 edges
            for (int i = 0; i < m; ++i) {
                int u = static_cast<int>(gen.index(6));
                int v = static_cast<int>(gen.index(6));
                if (u == v) continue;
                edges.push_back({u, v, gen.uniform(0.1, 5.0)});
            }
            RootedForest f = max_spanning_forest(edges, gen);
            CHECK(forest_total_weight(f) == doctest::Approx(brute_forest_weight(edges)));
        }
    }
    SUBCASE("rooted trees are consistent and deterministic under a seed") {
        std::vector<ForestEdge> edges{{0, 1, 3}, {1, 2, 2}, {2, 3, 5}, {3, 0, 1}, {7, 8, 1}};
        Rng a(77), b(77);
        RootedForest fa = max_spanning_forest(edges, a);
        RootedForest fb = max_spanning_forest(edges, b);
        REQUIRE(fa.trees.size() == fb.trees.size());
        for (std::size_t t = 0; t < fa.trees.size(); ++t) {
            CHECK(fa.trees[t].root == fb.trees[t].root);
            CHECK(fa.trees[t].bfs_order == fb.trees[t].bfs_order);
            // BFS order visits parents before children
            const auto& tree = fa.trees[t];
            for (const auto& [child, parent] : tree.parent_of) {
                auto pos = [&](int node) {
                    return std::find(tree.bfs_order.begin(), tree.bfs_order.end(), node) -
                           tree.bfs_order.begin();
                };
                CHECK(pos(parent) < pos(child));
            }
        }
    }
}

TEST_CASE("generators") {
    SUBCASE("3-regular") {
        Graph g = generate({GraphKind::ThreeRegular, 10, 0, 0, 2});
        std::vector<int> deg(10, 0);
        for (const Edge& e : g.edges()) {
            ++deg[static_cast<std::size_t>(e.u)];
            ++deg[static_cast<std::size_t>(e.v)];
            CHECK(std::abs(e.w) == 1.0);
        }
        for (int d : deg) CHECK(d == 3);
        CHECK_THROWS_AS(generate({GraphKind::ThreeRegular, 7, 0, 0, 2}), std::runtime_error);
    }
    SUBCASE("toric plus hub") {
        Graph g = generate({GraphKind::ToricPlusHub, 0, 0, 3, 4});
        CHECK(g.num_nodes() == 10);
        CHECK(g.num_edges() == 27);  // 18 torus + 9 hub
        std::vector<int> deg(10, 0);
        for (const Edge& e : g.edges()) {
            ++deg[static_cast<std::size_t>(e.u)];
            ++deg[static_cast<std::size_t>(e.v)];
        }
        CHECK(deg[9] == 9);  // hub reaches every grid node
    }
    SUBCASE("random with density") {
        Graph g = generate({GraphKind::Random, 14, 0.5, 0, 9});
        CHECK(g.num_nodes() == 14);
        CHECK(g.num_edges() == 46);  // round(0.5 * 91)
        for (const Edge& e : g.edges()) CHECK(std::abs(e.w) == 1.0);
    }
    SUBCASE("same spec, same graph") {
        Graph a = generate({GraphKind::ThreeRegular, 30, 0, 0, 13});
        Graph b = generate({GraphKind::ThreeRegular, 30, 0, 0, 13});
        REQUIRE(a.num_edges() == b.num_edges());
        for (int i = 0; i < a.num_edges(); ++i) {
            CHECK(a.edges()[i].u == b.edges()[i].u);
            CHECK(a.edges()[i].v == b.edges()[i].v);
            CHECK(a.edges()[i].w == b.edges()[i].w);
        }
    }
}

TEST_CASE("perturbed reduction chains leave no exact-zero merges") {
    // statistical guard for the node-isolation mitigation
    int zero_merges = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        Graph g = generate({GraphKind::ThreeRegular, 12, 0, 0, trial + 900});
        Rng rng(trial);
        Graph cur = perturb_weights(g, 1e-5, rng);
        while (cur.num_nodes() > 2 && cur.num_edges() > 0) {
            auto e = cur.edges()[rng.index(static_cast<std::uint64_t>(cur.num_edges()))];
            cur = reduce_graph(cur, e.u, e.v, rng.pm1());
            for (const Edge& edge : cur.edges())
                if (edge.w == 0.0) ++zero_merges;
        }
    }
    CHECK(zero_merges == 0);
}

TEST_SUITE_END();
