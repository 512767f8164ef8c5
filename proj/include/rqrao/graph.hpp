#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rqrao/rng.hpp"

namespace rqrao {

/// One bit per node, in node-position order.
using BitString = std::vector<std::uint8_t>;

inline BitString flipped(const BitString& b) {
    BitString out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = b[i] ^ 1;
    return out;
}

inline std::string bits_to_string(const BitString& b) {
    std::string s(b.size(), '0');
    for (std::size_t i = 0; i < b.size(); ++i) s[i] = b[i] ? '1' : '0';
    return s;
}

inline BitString bits_from_string(const std::string& s) {
    BitString b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') throw std::invalid_argument("bit string must be 0/1");
        b[i] = s[i] == '1';
    }
    return b;
}

struct Edge {
    int u;
    int v;
    double w;
};

/// Weighted undirected graph. Nodes are positions 0..num_nodes-1; each
/// position carries a stable external label that survives reduction, so a
/// sequence of node removals can be replayed against the original graph.
/// Edges are stored with u < v, at most one per pair. Self-loops and
/// parallel edges are rejected/merged at construction.
class Graph {
public:
    Graph() = default;

    Graph(int num_nodes, std::vector<Edge> edges)
        : Graph(num_nodes, std::move(edges), identity_labels(num_nodes)) {}

    Graph(int num_nodes, std::vector<Edge> edges, std::vector<int> labels)
        : n_(num_nodes), labels_(std::move(labels)) {
        if (static_cast<int>(labels_.size()) != n_)
            throw std::invalid_argument("label count does not match node count");
        std::map<std::pair<int, int>, double> merged;
        for (const Edge& e : edges) {
            if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
                throw std::out_of_range("edge endpoint out of range");
            if (e.u == e.v) throw std::invalid_argument("self-loops are not allowed");
            auto key = std::minmax(e.u, e.v);
            merged[{key.first, key.second}] += e.w;
        }
        edges_.reserve(merged.size());
        for (const auto& [key, w] : merged) edges_.push_back({key.first, key.second, w});
    }

    int num_nodes() const { return n_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& labels() const { return labels_; }
    int label_of(int pos) const { return labels_.at(pos); }

    int pos_of_label(int label) const {
        for (int i = 0; i < n_; ++i)
            if (labels_[i] == label) return i;
        throw std::out_of_range("label not present in graph");
    }

    bool has_edge(int u, int v) const { return find_edge(u, v) >= 0; }

    double weight(int u, int v) const {
        int idx = find_edge(u, v);
        if (idx < 0) throw std::out_of_range("no such edge");
        return edges_[static_cast<std::size_t>(idx)].w;
    }

    double total_weight() const {
        double s = 0;
        for (const Edge& e : edges_) s += e.w;
        return s;
    }

    int max_degree() const {
        std::vector<int> deg(n_, 0);
        for (const Edge& e : edges_) { ++deg[e.u]; ++deg[e.v]; }
        return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
    }

    /// Replace the weight of an existing edge.
    void set_weight(int u, int v, double w) {
        int idx = find_edge(u, v);
        if (idx < 0) throw std::out_of_range("no such edge");
        edges_[static_cast<std::size_t>(idx)].w = w;
    }

    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(n_);
        for (const Edge& e : edges_) {
            adj[e.u].push_back(e.v);
            adj[e.v].push_back(e.u);
        }
        return adj;
    }

private:
    static std::vector<int> identity_labels(int n) {
        std::vector<int> l(n);
        for (int i = 0; i < n; ++i) l[i] = i;
        return l;
    }

    int find_edge(int u, int v) const {
        if (u > v) std::swap(u, v);
        for (std::size_t i = 0; i < edges_.size(); ++i)
            if (edges_[i].u == u && edges_[i].v == v) return static_cast<int>(i);
        return -1;
    }

    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<int> labels_;
};

/// Cut weight of assignment b: sum over edges with endpoints on opposite
/// sides of their weights.
inline double cut_weight(const Graph& g, const BitString& b) {
    if (static_cast<int>(b.size()) != g.num_nodes())
        throw std::invalid_argument("bit string length does not match node count");
    double s = 0;
    for (const Edge& e : g.edges())
        if (b[e.u] != b[e.v]) s += e.w;
    return s;
}

/// Independently perturb every edge weight by Uniform([-amplitude, amplitude]).
inline Graph perturb_weights(const Graph& g, double amplitude, Rng& rng) {
    if (amplitude < 0) throw std::invalid_argument("amplitude must be nonnegative");
    std::vector<Edge> edges = g.edges();
    for (Edge& e : edges) e.w += rng.uniform(-amplitude, amplitude);
    return Graph(g.num_nodes(), std::move(edges), g.labels());
}

/// Contract node `removed` into `kept` (positions), fixing their parity to
/// `sign` (+1: same side, -1: opposite sides). Every other edge (removed, l)
/// is re-attached as (kept, l) with weight sign * w; weights merge if the
/// edge already exists. Zero merged weights are retained in the edge list.
inline Graph reduce_graph(const Graph& g, int removed, int kept, int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +-1");
    if (!g.has_edge(removed, kept))
        throw std::invalid_argument("reduce_graph: edge (removed, kept) does not exist");

    int n = g.num_nodes();
    // positions shift down past the removed node
    auto newpos = [&](int p) { return p < removed ? p : p - 1; };

    std::map<std::pair<int, int>, double> acc;
    for (const Edge& e : g.edges()) {
        if ((e.u == removed && e.v == kept) || (e.u == kept && e.v == removed)) continue;
        int u = e.u, v = e.v;
        double w = e.w;
        if (u == removed) { u = kept; w *= sign; }
        if (v == removed) { v = kept; w *= sign; }
        int a = newpos(u), b = newpos(v);
        if (a > b) std::swap(a, b);
        acc[{a, b}] += w;
    }
    std::vector<Edge> edges;
    edges.reserve(acc.size());
    for (const auto& [key, w] : acc) edges.push_back({key.first, key.second, w});

    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n) - 1);
    for (int i = 0; i < n; ++i)
        if (i != removed) labels.push_back(g.label_of(i));
    return Graph(n - 1, std::move(edges), std::move(labels));
}

/// One parity decision: node `removed` sits on the same side as `kept`
/// when sign = +1, opposite when sign = -1. Nodes are external labels.
struct ParityDecision {
    int removed;
    int kept;
    int sign;
};

/// Ordered reduction history plus the residual graph it produced. Replaying
/// `decisions` against the original graph reproduces `residual_graph`;
/// lifting a residual assignment walks the decisions in reverse.
struct ParityRecord {
    std::vector<ParityDecision> decisions;
    Graph residual_graph;
    BitString residual_assignment;  // empty until the brute-force block ran

    /// Expand an assignment of the residual graph to the original node set
    /// (labels are positions of the original graph).
    BitString lift(int original_num_nodes, const BitString& residual_bits) const {
        if (residual_bits.size() != static_cast<std::size_t>(residual_graph.num_nodes()))
            throw std::invalid_argument("residual assignment length mismatch");
        BitString bits(static_cast<std::size_t>(original_num_nodes), 0);
        for (int i = 0; i < residual_graph.num_nodes(); ++i)
            bits[static_cast<std::size_t>(residual_graph.label_of(i))] = residual_bits[static_cast<std::size_t>(i)];
        for (auto it = decisions.rbegin(); it != decisions.rend(); ++it)
            bits[static_cast<std::size_t>(it->removed)] =
                bits[static_cast<std::size_t>(it->kept)] ^ (it->sign < 0 ? 1 : 0);
        return bits;
    }
};

/// Apply a decision list. Used by tests to check the record invariant.
inline Graph replay_reductions(const Graph& original, const std::vector<ParityDecision>& decisions) {
    Graph g = original;
    for (const ParityDecision& d : decisions)
        g = reduce_graph(g, g.pos_of_label(d.removed), g.pos_of_label(d.kept), d.sign);
    return g;
}

/// Connected components as position lists, each sorted ascending.
inline std::vector<std::vector<int>> connected_components(const Graph& g) {
    int n = g.num_nodes();
    std::vector<int> comp(n, -1);
    auto adj = g.adjacency();
    int c = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{s};
        comp[s] = c;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : adj[u])
                if (comp[v] < 0) { comp[v] = c; stack.push_back(v); }
        }
        ++c;
    }
    std::vector<std::vector<int>> out(c);
    for (int i = 0; i < n; ++i) out[comp[i]].push_back(i);
    return out;
}

/// Induced subgraph on `nodes` (positions). Labels carry over.
inline Graph subgraph(const Graph& g, const std::vector<int>& nodes) {
    std::vector<int> remap(g.num_nodes(), -1);
    std::vector<int> labels;
    labels.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        remap[nodes[i]] = static_cast<int>(i);
        labels.push_back(g.label_of(nodes[i]));
    }
    std::vector<Edge> edges;
    for (const Edge& e : g.edges())
        if (remap[e.u] >= 0 && remap[e.v] >= 0)
            edges.push_back({remap[e.u], remap[e.v], e.w});
    return Graph(static_cast<int>(nodes.size()), std::move(edges), std::move(labels));
}

// ---------------------------------------------------------------------------
// rudy / Gset text format: header "n m", then m lines "i j w", 1-based ids.
// ---------------------------------------------------------------------------

inline Graph parse_rudy(const std::string& text, std::vector<std::string>* warnings = nullptr) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto next_content_line = [&]() -> std::optional<std::string> {
        while (std::getline(in, line)) {
            ++lineno;
            std::size_t pos = line.find_first_not_of(" \t\r\n");
            if (pos == std::string::npos) continue;
            return line;
        }
        return std::nullopt;
    };

    auto header = next_content_line();
    if (!header) throw std::runtime_error("rudy parse error: empty input");
    int n = 0, m = 0;
    {
        std::istringstream hs(*header);
        if (!(hs >> n >> m) || n < 0 || m < 0)
            throw std::runtime_error("rudy parse error at line " + std::to_string(lineno) +
                                     ": expected header \"n m\"");
    }

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        auto row = next_content_line();
        if (!row)
            throw std::runtime_error("rudy parse error: expected " + std::to_string(m) +
                                     " edges, found " + std::to_string(k));
        std::istringstream rs(*row);
        int i = 0, j = 0;
        double w = 0;
        if (!(rs >> i >> j >> w))
            throw std::runtime_error("rudy parse error at line " + std::to_string(lineno) +
                                     ": expected \"i j w\"");
        if (i < 1 || i > n || j < 1 || j > n)
            throw std::out_of_range("rudy parse error at line " + std::to_string(lineno) +
                                    ": node index out of range");
        if (i == j) {
            if (warnings)
                warnings->push_back("line " + std::to_string(lineno) + ": self-loop dropped");
            continue;
        }
        edges.push_back({i - 1, j - 1, w});
    }
    return Graph(n, std::move(edges));
}

inline std::string to_rudy(const Graph& g) {
    std::ostringstream out;
    out << g.num_nodes() << ' ' << g.num_edges() << '\n';
    out.precision(17);
    for (const Edge& e : g.edges())
        out << e.u + 1 << ' ' << e.v + 1 << ' ' << e.w << '\n';
    return out.str();
}

} // namespace rqrao
