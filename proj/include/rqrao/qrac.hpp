#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "rqrao/graph.hpp"
#include "rqrao/pauli.hpp"
#include "rqrao/rng.hpp"

namespace rqrao {

/// Active Pauli alphabet for an (m,1)-QRAC: {Z}, {X,Z}, {X,Y,Z}.
inline const std::vector<Pauli>& active_paulis(int m) {
    static const std::vector<Pauli> p1{Pauli::Z};
    static const std::vector<Pauli> p2{Pauli::X, Pauli::Z};
    static const std::vector<Pauli> p3{Pauli::X, Pauli::Y, Pauli::Z};
    switch (m) {
        case 1: return p1;
        case 2: return p2;
        case 3: return p3;
    }
    throw std::invalid_argument("m must be 1, 2 or 3");
}

inline int pauli_slot(int m, Pauli p) {
    const auto& set = active_paulis(m);
    for (std::size_t i = 0; i < set.size(); ++i)
        if (set[i] == p) return static_cast<int>(i);
    throw std::invalid_argument("Pauli not in the active set for this m");
}

/// Node -> (qubit, Pauli) map under the QRAC constraints: nodes sharing a
/// qubit carry distinct Paulis, and adjacent nodes never share a qubit.
struct PauliAssignment {
    int m = 3;
    int num_qubits = 0;
    std::vector<int> qubit;    // per node
    std::vector<Pauli> pauli;  // per node

    int num_nodes() const { return static_cast<int>(qubit.size()); }
};

/// Check both constraints against a graph. Throws on violation.
inline void validate_assignment(const Graph& g, const PauliAssignment& a) {
    if (a.num_nodes() != g.num_nodes())
        throw std::invalid_argument("assignment does not cover the node set");
    const auto& alphabet = active_paulis(a.m);
    std::vector<int> load(static_cast<std::size_t>(a.num_qubits), 0);
    for (int j = 0; j < a.num_nodes(); ++j) {
        if (a.qubit[j] < 0 || a.qubit[j] >= a.num_qubits)
            throw std::invalid_argument("qubit index out of range");
        if (std::find(alphabet.begin(), alphabet.end(), a.pauli[j]) == alphabet.end())
            throw std::invalid_argument("assignment uses a Pauli outside the active set");
        ++load[static_cast<std::size_t>(a.qubit[j])];
    }
    for (int l : load)
        if (l > a.m) throw std::invalid_argument("more than m nodes share a qubit");
    for (int j = 0; j < a.num_nodes(); ++j)
        for (int k = j + 1; k < a.num_nodes(); ++k)
            if (a.qubit[j] == a.qubit[k] && a.pauli[j] == a.pauli[k])
                throw std::invalid_argument("two nodes share a (qubit, Pauli) slot");
    for (const Edge& e : g.edges())
        if (a.qubit[e.u] == a.qubit[e.v])
            throw std::invalid_argument("adjacent nodes share a qubit");
}

/// Randomized greedy assignment: visit nodes in random order; host each on a
/// uniformly random feasible (qubit, free Pauli) slot, where feasible means
/// the qubit hosts none of the node's neighbors; open a fresh qubit with a
/// random Pauli when no slot qualifies.
inline PauliAssignment assign_paulis(const Graph& g, int m, Rng& rng) {
    const auto& alphabet = active_paulis(m);
    int n = g.num_nodes();
    auto adj = g.adjacency();

    PauliAssignment a;
    a.m = m;
    a.qubit.assign(static_cast<std::size_t>(n), -1);
    a.pauli.assign(static_cast<std::size_t>(n), Pauli::I);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());

    // per qubit: bitmask of taken Pauli slots
    std::vector<unsigned> taken;
    std::vector<std::vector<int>> hosted;

    for (int node : order) {
        std::vector<std::pair<int, int>> slots;  // (qubit, alphabet slot)
        for (std::size_t q = 0; q < taken.size(); ++q) {
            bool neighbor_here = false;
            for (int h : hosted[q])
                if (std::find(adj[static_cast<std::size_t>(node)].begin(),
                              adj[static_cast<std::size_t>(node)].end(),
                              h) != adj[static_cast<std::size_t>(node)].end()) {
                    neighbor_here = true;
                    break;
                }
            if (neighbor_here) continue;
            for (int s = 0; s < m; ++s)
                if (!(taken[q] & (1u << s))) slots.push_back({static_cast<int>(q), s});
        }
        int q, s;
        if (slots.empty()) {
            q = static_cast<int>(taken.size());
            taken.push_back(0);
            hosted.emplace_back();
            s = static_cast<int>(rng.index(static_cast<std::uint64_t>(m)));
        } else {
            auto pick = slots[rng.index(slots.size())];
            q = pick.first;
            s = pick.second;
        }
        taken[static_cast<std::size_t>(q)] |= 1u << s;
        hosted[static_cast<std::size_t>(q)].push_back(node);
        a.qubit[static_cast<std::size_t>(node)] = q;
        a.pauli[static_cast<std::size_t>(node)] = alphabet[static_cast<std::size_t>(s)];
    }
    a.num_qubits = static_cast<int>(taken.size());
    return a;
}

inline nlohmann::ordered_json assignment_to_json(const PauliAssignment& a) {
    nlohmann::ordered_json j;
    j["m"] = a.m;
    j["num_qubits"] = a.num_qubits;
    nlohmann::ordered_json nodes = nlohmann::ordered_json::object();
    for (int i = 0; i < a.num_nodes(); ++i)
        nodes[std::to_string(i)] = {a.qubit[static_cast<std::size_t>(i)],
                                    std::string(1, pauli_char(a.pauli[static_cast<std::size_t>(i)]))};
    j["nodes"] = nodes;
    return j;
}

inline PauliAssignment assignment_from_json(const nlohmann::json& j) {
    PauliAssignment a;
    a.m = j.at("m").get<int>();
    a.num_qubits = j.at("num_qubits").get<int>();
    const auto& nodes = j.at("nodes");
    a.qubit.resize(nodes.size());
    a.pauli.resize(nodes.size());
    for (auto it = nodes.begin(); it != nodes.end(); ++it) {
        auto idx = static_cast<std::size_t>(std::stoi(it.key()));
        a.qubit.at(idx) = it.value().at(0).get<int>();
        a.pauli.at(idx) = pauli_from_char(it.value().at(1).get<std::string>().at(0));
    }
    return a;
}

/// One two-local term of the relaxed Hamiltonian.
struct QracTerm {
    double coeff;      // -(m/2) * w_jk
    int qubit_a;
    Pauli pauli_a;
    int qubit_b;
    Pauli pauli_b;
    int node_j;
    int node_k;
};

/// (m,1)-QRAC Hamiltonian as a constant plus one Pauli-pair term per edge:
/// H = sum_e w_e/2 - (m/2) sum_e w_e P_<j> P_<k>.
struct HamiltonianTerms {
    int m = 3;
    int num_qubits = 0;
    double constant = 0;
    std::vector<QracTerm> terms;
};

inline HamiltonianTerms build_terms(const Graph& g, const PauliAssignment& a) {
    if (a.num_nodes() != g.num_nodes())
        throw std::invalid_argument("assignment does not cover the node set");
    HamiltonianTerms h;
    h.m = a.m;
    h.num_qubits = a.num_qubits;
    h.terms.reserve(static_cast<std::size_t>(g.num_edges()));
    for (const Edge& e : g.edges()) {
        h.constant += e.w / 2.0;
        if (a.qubit[static_cast<std::size_t>(e.u)] == a.qubit[static_cast<std::size_t>(e.v)])
            throw std::invalid_argument("adjacent nodes share a qubit; invalid assignment");
        h.terms.push_back({-(a.m / 2.0) * e.w,
                           a.qubit[static_cast<std::size_t>(e.u)], a.pauli[static_cast<std::size_t>(e.u)],
                           a.qubit[static_cast<std::size_t>(e.v)], a.pauli[static_cast<std::size_t>(e.v)],
                           e.u, e.v});
    }
    return h;
}

/// Per-qubit magic-state bit tuples: bits[q][slot] for slot indexing the
/// active alphabet of m.
struct MagicState {
    int m = 3;
    std::vector<std::vector<std::uint8_t>> bits;

    int num_qubits() const { return static_cast<int>(bits.size()); }
};

/// Single-qubit magic density (I + m^{-1/2} sum_P (-1)^{b_P} P) / 2.
inline Matrix2cd magic_density_1q(int m, const std::vector<std::uint8_t>& bits) {
    const auto& alphabet = active_paulis(m);
    if (bits.size() != alphabet.size())
        throw std::invalid_argument("bit tuple size must equal m");
    Matrix2cd rho = Matrix2cd::Identity();
    for (std::size_t s = 0; s < alphabet.size(); ++s)
        rho += (bits[s] ? -1.0 : 1.0) / std::sqrt(static_cast<double>(m)) *
               pauli_matrix(alphabet[s]);
    return 0.5 * rho;
}

inline Matrix2cd magic_density(const MagicState& ms, int qubit) {
    return magic_density_1q(ms.m, ms.bits.at(static_cast<std::size_t>(qubit)));
}

/// Unit vector spanning the (pure) magic density.
inline Vector2cd magic_vector_1q(int m, const std::vector<std::uint8_t>& bits) {
    Matrix2cd rho = magic_density_1q(m, bits);
    Eigen::SelfAdjointEigenSolver<Matrix2cd> es(rho);
    Vector2cd v = es.eigenvectors().col(1);  // eigenvalue 1
    // fix the global phase for reproducibility
    for (int i = 0; i < 2; ++i)
        if (std::abs(v(i)) > 1e-12) return v * (std::conj(v(i)) / std::abs(v(i)));
    return v;
}

/// Pauli rounding: b_j = 0 when tr(P_<j> rho) > 0, 1 when < 0, a fair coin
/// when exactly 0.
inline BitString decode_bits(const PauliAssignment& a,
                             const std::vector<double>& site_expectations, Rng& rng) {
    if (site_expectations.size() != static_cast<std::size_t>(a.num_nodes()))
        throw std::invalid_argument("one expectation per node required");
    BitString b(site_expectations.size());
    for (std::size_t j = 0; j < b.size(); ++j) {
        double e = site_expectations[j];
        if (e > 0)
            b[j] = 0;
        else if (e < 0)
            b[j] = 1;
        else
            b[j] = rng.coin() ? 1 : 0;
    }
    return b;
}

} // namespace rqrao
