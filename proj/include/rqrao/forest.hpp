#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "rqrao/graph.hpp"
#include "rqrao/rng.hpp"

namespace rqrao {

/// Weighted edge candidate for the spanning forest; w holds |ensemble energy|.
struct ForestEdge {
    int u;
    int v;
    double w;
};

/// One rooted tree of the forest: parent[child] for every non-root node
/// reachable from root, edge weights keyed by child, and a breadth-first
/// visit order (root first). Deleting nodes in reverse visit order processes
/// leaves before their parents.
struct RootedTree {
    int root = -1;
    std::vector<std::pair<int, int>> parent_of;   // (child, parent)
    std::vector<std::pair<int, double>> weight_of; // (child, |weight|)
    std::vector<int> bfs_order;

    int parent(int child) const {
        for (const auto& [c, p] : parent_of)
            if (c == child) return p;
        throw std::out_of_range("node has no parent in this tree");
    }
};

struct RootedForest {
    std::vector<RootedTree> trees;
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }

private:
    std::vector<int> parent_;
    std::vector<int> rank_;
};

} // namespace detail

/// Maximum-weight spanning forest over positively weighted edges (Kruskal).
/// One tree per connected component of the edge set; each tree gets a root
/// chosen uniformly at random. Weight ties break on the smaller (u, v) pair
/// so the forest is deterministic under a fixed seed.
inline RootedForest max_spanning_forest(const std::vector<ForestEdge>& edges, Rng& rng) {
    for (const ForestEdge& e : edges) {
        if (e.w <= 0) throw std::invalid_argument("forest edges must have positive weight");
        if (e.u == e.v) throw std::invalid_argument("forest edges must not be loops");
    }

    std::vector<ForestEdge> sorted = edges;
    std::sort(sorted.begin(), sorted.end(), [](const ForestEdge& a, const ForestEdge& b) {
        if (a.w != b.w) return a.w > b.w;
        auto ka = std::minmax(a.u, a.v);
        auto kb = std::minmax(b.u, b.v);
        return ka < kb;
    });

    // compact the touched node ids
    std::vector<int> nodes;
    for (const ForestEdge& e : sorted) {
        nodes.push_back(e.u);
        nodes.push_back(e.v);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    auto compact = [&](int id) {
        return static_cast<int>(std::lower_bound(nodes.begin(), nodes.end(), id) - nodes.begin());
    };

    detail::UnionFind uf(static_cast<int>(nodes.size()));
    std::vector<ForestEdge> kept;
    for (const ForestEdge& e : sorted)
        if (uf.unite(compact(e.u), compact(e.v))) kept.push_back(e);

    // group kept edges by component
    std::vector<std::vector<ForestEdge>> by_comp;
    std::vector<int> comp_of(nodes.size(), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        int r = uf.find(static_cast<int>(i));
        if (comp_of[static_cast<std::size_t>(r)] < 0) {
            comp_of[static_cast<std::size_t>(r)] = static_cast<int>(by_comp.size());
            by_comp.emplace_back();
        }
        comp_of[i] = comp_of[static_cast<std::size_t>(r)];
    }
    std::vector<std::vector<int>> comp_nodes(by_comp.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        comp_nodes[static_cast<std::size_t>(comp_of[i])].push_back(nodes[i]);
    for (const ForestEdge& e : kept)
        by_comp[static_cast<std::size_t>(comp_of[static_cast<std::size_t>(compact(e.u))])].push_back(e);

    RootedForest forest;
    for (std::size_t c = 0; c < by_comp.size(); ++c) {
        RootedTree tree;
        const auto& members = comp_nodes[c];
        tree.root = members[rng.index(members.size())];

        // adjacency within the tree
        std::vector<std::vector<std::pair<int, double>>> adj;
        std::vector<int> local(nodes.size(), -1);
        for (std::size_t i = 0; i < members.size(); ++i)
            local[static_cast<std::size_t>(compact(members[i]))] = static_cast<int>(i);
        adj.resize(members.size());
        for (const ForestEdge& e : by_comp[c]) {
            int lu = local[static_cast<std::size_t>(compact(e.u))];
            int lv = local[static_cast<std::size_t>(compact(e.v))];
            adj[static_cast<std::size_t>(lu)].push_back({lv, e.w});
            adj[static_cast<std::size_t>(lv)].push_back({lu, e.w});
        }

        std::vector<bool> seen(members.size(), false);
        std::vector<int> queue{local[static_cast<std::size_t>(compact(tree.root))]};
        seen[static_cast<std::size_t>(queue[0])] = true;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            int u = queue[head];
            tree.bfs_order.push_back(members[static_cast<std::size_t>(u)]);
            for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
                if (seen[static_cast<std::size_t>(v)]) continue;
                seen[static_cast<std::size_t>(v)] = true;
                tree.parent_of.push_back({members[static_cast<std::size_t>(v)],
                                          members[static_cast<std::size_t>(u)]});
                tree.weight_of.push_back({members[static_cast<std::size_t>(v)], w});
                queue.push_back(v);
            }
        }
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

inline double forest_total_weight(const RootedForest& f) {
    double s = 0;
    for (const RootedTree& t : f.trees)
        for (const auto& [child, w] : t.weight_of) s += w;
    return s;
}

} // namespace rqrao
