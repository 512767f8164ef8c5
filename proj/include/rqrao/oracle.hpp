#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rqrao/graph.hpp"
#include "rqrao/mpo.hpp"
#include "rqrao/mps.hpp"
#include "rqrao/parallel.hpp"
#include "rqrao/qrac.hpp"
#include "rqrao/rng.hpp"

namespace rqrao {

// Exhaustive / dense-linear-algebra ground truth. Everything here is sized
// for desk-scale verification runs and refuses inputs beyond its bounds.

inline constexpr int kDenseQubitLimit = 20;       // 2^n amplitudes
inline constexpr int kEnumerationBitLimit = 20;   // 2^{mn} magic embeddings
inline constexpr int kBruteForceNodeLimit = 26;

/// Pure state (amplitude vector) or mixed state (density matrix).
class DenseState {
public:
    static DenseState pure(VectorXcd amplitudes) {
        DenseState s;
        s.n_ = qubits_for(amplitudes.size());
        double norm = amplitudes.norm();
        if (norm <= 0) throw std::invalid_argument("zero state");
        s.psi_ = amplitudes / norm;
        s.is_pure_ = true;
        return s;
    }

    static DenseState density(MatrixXcd rho) {
        DenseState s;
        s.n_ = qubits_for(rho.rows());
        if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix must be square");
        double tr = rho.trace().real();
        if (std::abs(rho.trace().imag()) > 1e-10 || tr <= 0)
            throw std::invalid_argument("density matrix must have positive real trace");
        s.rho_ = rho / tr;
        s.is_pure_ = false;
        return s;
    }

    static DenseState haar_random(int n, Rng& rng) {
        check_dense_bound(n);
        VectorXcd v(Eigen::Index(1) << n);
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cx(rng.gaussian(), rng.gaussian());
        return pure(std::move(v));
    }

    static DenseState maximally_mixed(int n) {
        if (n > 10) throw std::invalid_argument("mixed states supported up to 10 qubits");
        Eigen::Index d = Eigen::Index(1) << n;
        return density(MatrixXcd::Identity(d, d) / static_cast<double>(d));
    }

    int num_qubits() const { return n_; }
    bool is_pure() const { return is_pure_; }
    const VectorXcd& amplitudes() const {
        if (!is_pure_) throw std::logic_error("not a pure state");
        return psi_;
    }
    MatrixXcd density_matrix() const { return is_pure_ ? MatrixXcd(psi_ * psi_.adjoint()) : rho_; }

    /// tr(O rho) for O a product of 1-local operators on distinct qubits.
    cx expect_product(const std::vector<std::pair<int, Matrix2cd>>& ops) const {
        if (is_pure_) {
            VectorXcd v = psi_;
            for (const auto& [q, op] : ops) apply_1q(v, q, op);
            return psi_.dot(v);  // conjugates the left argument
        }
        MatrixXcd m = rho_;
        for (const auto& [q, op] : ops) apply_1q_left(m, q, op);
        return m.trace();
    }

    cx expect_paulis(const std::vector<std::pair<int, Pauli>>& ops) const {
        std::vector<std::pair<int, Matrix2cd>> mats;
        mats.reserve(ops.size());
        for (const auto& [q, p] : ops) mats.push_back({q, pauli_matrix(p)});
        return expect_product(mats);
    }

    /// <phi|rho|phi> for a product vector given per-qubit factors.
    double product_fidelity(const std::vector<Vector2cd>& locals) const {
        if (static_cast<int>(locals.size()) != n_)
            throw std::invalid_argument("one local vector per qubit required");
        if (is_pure_) {
            VectorXcd v = psi_;
            for (int q = n_ - 1; q >= 0; --q) v = contract_top_qubit(v, locals[static_cast<std::size_t>(q)]);
            return std::norm(v(0));
        }
        VectorXcd phi = VectorXcd::Ones(1);
        for (int q = 0; q < n_; ++q) {
            VectorXcd next(phi.size() * 2);
            for (Eigen::Index x = 0; x < phi.size(); ++x) {
                next(x) = locals[static_cast<std::size_t>(q)](0) * phi(x);
                next(x + phi.size()) = locals[static_cast<std::size_t>(q)](1) * phi(x);
            }
            phi.swap(next);
        }
        return (phi.adjoint() * rho_ * phi)(0).real();
    }

    /// Contract the most significant qubit of a state vector with <bra|.
    static VectorXcd contract_top_qubit(const VectorXcd& v, const Vector2cd& bra) {
        Eigen::Index half = v.size() / 2;
        VectorXcd out(half);
        for (Eigen::Index x = 0; x < half; ++x)
            out(x) = std::conj(bra(0)) * v(x) + std::conj(bra(1)) * v(x + half);
        return out;
    }

    static void apply_1q(VectorXcd& v, int qubit, const Matrix2cd& op) {
        Eigen::Index stride = Eigen::Index(1) << qubit;
        for (Eigen::Index base = 0; base < v.size(); base += 2 * stride)
            for (Eigen::Index x = 0; x < stride; ++x) {
                cx a = v(base + x);
                cx b = v(base + x + stride);
                v(base + x) = op(0, 0) * a + op(0, 1) * b;
                v(base + x + stride) = op(1, 0) * a + op(1, 1) * b;
            }
    }

    static void apply_1q_left(MatrixXcd& m, int qubit, const Matrix2cd& op) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            VectorXcd col = m.col(c);
            apply_1q(col, qubit, op);
            m.col(c) = col;
        }
    }

    static void check_dense_bound(int n) {
        if (n < 1 || n > kDenseQubitLimit)
            throw std::invalid_argument("dense path limited to " +
                                        std::to_string(kDenseQubitLimit) + " qubits");
    }

private:
    static int qubits_for(Eigen::Index dim) {
        int n = 0;
        while ((Eigen::Index(1) << n) < dim) ++n;
        if ((Eigen::Index(1) << n) != dim)
            throw std::invalid_argument("dimension is not a power of two");
        check_dense_bound(n);
        return n;
    }

    int n_ = 0;
    bool is_pure_ = true;
    VectorXcd psi_;
    MatrixXcd rho_;
};

/// Exact contraction of an MPS to its amplitude vector, normalized.
inline DenseState dense_from_mps(const Mps& psi) {
    DenseState::check_dense_bound(psi.num_qubits());
    // absorb sites top-down; rows enumerate (b_{n-1},...,b_i), MSB first
    MatrixXcd acc = MatrixXcd::Ones(1, 1);
    for (int i = psi.num_qubits() - 1; i >= 0; --i) {
        const SiteTensor& t = psi.site(i);
        MatrixXcd next(acc.rows() * 2, t.cols());
        next.topRows(acc.rows()) = acc * t.m[0];
        next.bottomRows(acc.rows()) = acc * t.m[1];
        // row r of acc holds prefix bits; new row layout must keep qubit i
        // less significant than all absorbed qubits
        MatrixXcd interleaved(acc.rows() * 2, t.cols());
        for (Eigen::Index r = 0; r < acc.rows(); ++r) {
            interleaved.row(2 * r) = next.row(r);
            interleaved.row(2 * r + 1) = next.row(acc.rows() + r);
        }
        acc.swap(interleaved);
    }
    return DenseState::pure(acc.col(0));
}

/// Dense matrix of an MPO built by literally multiplying out its sparse
/// site tensors (bond dimension K, coefficients on site 0).
inline MatrixXcd mpo_to_dense(const Mpo& h) {
    int n = h.num_qubits();
    if (n > 12) throw std::invalid_argument("dense MPO reconstruction limited to 12 qubits");
    Eigen::Index dim = Eigen::Index(1) << n;
    // env[bond] = operator on qubits i-1..0 accumulated so far
    std::vector<MatrixXcd> env(static_cast<std::size_t>(h.bond_dim(0)), MatrixXcd::Ones(1, 1));
    for (int i = 0; i < n; ++i) {
        std::vector<MatrixXcd> next(
            static_cast<std::size_t>(h.bond_dim(i + 1)),
            MatrixXcd::Zero(env[0].rows() * 2, env[0].cols() * 2));
        for (const Mpo::Coord& c : h.site_coords(i)) {
            MatrixXcd& dst = next[static_cast<std::size_t>(c.bond_out)];
            const MatrixXcd& src = env[static_cast<std::size_t>(c.bond_in)];
            dst.block(c.s_out * src.rows(), c.s_in * src.cols(), src.rows(), src.cols()) +=
                c.value * src;
        }
        env.swap(next);
    }
    MatrixXcd out = MatrixXcd::Zero(dim, dim);
    out += h.constant() * MatrixXcd::Identity(dim, dim);
    out += env[0];
    return out;
}

/// Dense (m,1)-QRAC Hamiltonian straight from the term list (kron oracle).
inline MatrixXcd dense_hamiltonian(const HamiltonianTerms& h, int num_qubits) {
    if (num_qubits > 12) throw std::invalid_argument("dense Hamiltonian limited to 12 qubits");
    Eigen::Index dim = Eigen::Index(1) << num_qubits;
    MatrixXcd out = h.constant * MatrixXcd::Identity(dim, dim);
    for (const QracTerm& t : h.terms) {
        MatrixXcd term = MatrixXcd::Identity(dim, dim);
        DenseState::apply_1q_left(term, t.qubit_a, pauli_matrix(t.pauli_a));
        DenseState::apply_1q_left(term, t.qubit_b, pauli_matrix(t.pauli_b));
        out += t.coeff * term;
    }
    return out;
}

inline cx dense_expectation(const DenseState& s, const MatrixXcd& op) {
    if (s.is_pure()) return (s.amplitudes().adjoint() * op * s.amplitudes())(0);
    return (op * s.density_matrix()).trace();
}

/// Eigenstate of the maximum eigenvalue of a Hermitian dense operator.
inline DenseState max_eigenstate(const MatrixXcd& h) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    return DenseState::pure(es.eigenvectors().col(h.rows() - 1));
}

// ---------------------------------------------------------------------------
// Magic-embedding enumeration
// ---------------------------------------------------------------------------

/// Exact fidelity-proportional distribution over all 2^{mn} magic-state
/// embeddings b, bit (q*m + slot) of the index holding b^{[q]}_P for the
/// slot-th Pauli of the active alphabet.
struct MagicDistribution {
    int m = 3;
    int num_qubits = 0;
    std::vector<double> probs;
    double total_fidelity = 0;

    int bit_index(int qubit, int slot) const { return qubit * m + slot; }

    double expect_sign(const std::vector<int>& bit_indices) const {
        double e = 0;
        for (std::size_t b = 0; b < probs.size(); ++b) {
            int parity = 0;
            for (int idx : bit_indices) parity ^= static_cast<int>((b >> idx) & 1u);
            e += (parity ? -1.0 : 1.0) * probs[b];
        }
        return e;
    }

    double prob_bit(int bit_idx, int value) const {
        double p = 0;
        for (std::size_t b = 0; b < probs.size(); ++b)
            if (static_cast<int>((b >> bit_idx) & 1u) == value) p += probs[b];
        return p;
    }

    double prob_equal(int bit_a, int bit_b) const {
        double p = 0;
        for (std::size_t b = 0; b < probs.size(); ++b)
            if (((b >> bit_a) & 1u) == ((b >> bit_b) & 1u)) p += probs[b];
        return p;
    }
};

namespace detail {

/// All 2^m magic bra vectors for a given m, indexed by the bit group.
inline const std::vector<Vector2cd>& magic_vector_table(int m) {
    static std::vector<Vector2cd> tables[4];
    static std::once_flag flags[4];
    std::call_once(flags[static_cast<std::size_t>(m)], [m]() {
        std::vector<Vector2cd>& t = tables[static_cast<std::size_t>(m)];
        t.resize(std::size_t(1) << m);
        for (std::size_t g = 0; g < t.size(); ++g) {
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(m));
            for (int s = 0; s < m; ++s) bits[static_cast<std::size_t>(s)] = (g >> s) & 1u;
            t[g] = magic_vector_1q(m, bits);
        }
    });
    return tables[static_cast<std::size_t>(m)];
}

/// DFS over per-qubit bit groups of a pure state, accumulating fidelities.
inline void fidelity_dfs(const VectorXcd& partial, int qubit, int m, std::size_t prefix,
                         std::vector<double>& out) {
    const auto& table = magic_vector_table(m);
    if (qubit < 0) {
        out[prefix] = std::norm(partial(0));
        return;
    }
    for (std::size_t g = 0; g < table.size(); ++g) {
        VectorXcd next = DenseState::contract_top_qubit(partial, table[g]);
        fidelity_dfs(next, qubit - 1, m, prefix | (g << (static_cast<std::size_t>(qubit) *
                                                         static_cast<std::size_t>(m))),
                     out);
    }
}

} // namespace detail

inline MagicDistribution magic_distribution(const DenseState& rho, int m) {
    int n = rho.num_qubits();
    if (m * n > kEnumerationBitLimit)
        throw std::invalid_argument("enumeration limited to m*n <= " +
                                    std::to_string(kEnumerationBitLimit) + " embedded bits");
    MagicDistribution dist;
    dist.m = m;
    dist.num_qubits = n;
    dist.probs.assign(std::size_t(1) << (m * n), 0.0);

    if (rho.is_pure()) {
        detail::fidelity_dfs(rho.amplitudes(), n - 1, m, 0, dist.probs);
    } else {
        if (n > 8) throw std::invalid_argument("density enumeration limited to 8 qubits");
        const auto& table = detail::magic_vector_table(m);
        for (std::size_t b = 0; b < dist.probs.size(); ++b) {
            std::vector<Vector2cd> locals(static_cast<std::size_t>(n));
            for (int q = 0; q < n; ++q)
                locals[static_cast<std::size_t>(q)] =
                    table[(b >> (static_cast<std::size_t>(q) * static_cast<std::size_t>(m))) &
                          ((std::size_t(1) << m) - 1)];
            dist.probs[b] = rho.product_fidelity(locals);
        }
    }
    double total = 0;
    for (double f : dist.probs) total += f;
    dist.total_fidelity = total;
    for (double& p : dist.probs) p /= total;
    return dist;
}

inline MagicDistribution magic_distribution(const DenseState& rho, const PauliAssignment& a) {
    return magic_distribution(rho, a.m);
}

/// k-local sign-moment check: tr(P^{(x)k} rho) against m^{k/2} E_b[(-1)^{sum of mapped bits}].
struct IdentityCheck {
    double lhs = 0;
    double rhs = 0;
    double gap = 0;
};

inline IdentityCheck verify_klocal_moment(const DenseState& rho, int m,
                                     const std::vector<std::pair<int, Pauli>>& observable) {
    MagicDistribution dist = magic_distribution(rho, m);
    std::vector<int> bits;
    bits.reserve(observable.size());
    for (const auto& [q, p] : observable) bits.push_back(dist.bit_index(q, pauli_slot(m, p)));
    IdentityCheck c;
    c.lhs = rho.expect_paulis(observable).real();
    c.rhs = std::pow(static_cast<double>(m), static_cast<double>(observable.size()) / 2.0) *
            dist.expect_sign(bits);
    c.gap = std::abs(c.lhs - c.rhs);
    return c;
}

/// Node bits encoded in one embedding index, through an assignment.
inline BitString node_bits_from_embedding(std::size_t b, const PauliAssignment& a) {
    BitString bits(static_cast<std::size_t>(a.num_nodes()));
    for (int j = 0; j < a.num_nodes(); ++j) {
        int idx = a.qubit[static_cast<std::size_t>(j)] * a.m +
                  pauli_slot(a.m, a.pauli[static_cast<std::size_t>(j)]);
        bits[static_cast<std::size_t>(j)] = (b >> idx) & 1u;
    }
    return bits;
}

/// E_{b ~ P_m}[CW(b)] by full enumeration.
inline double expected_cut(const DenseState& rho, const Graph& g, const PauliAssignment& a) {
    MagicDistribution dist = magic_distribution(rho, a);
    double e = 0;
    for (std::size_t b = 0; b < dist.probs.size(); ++b) {
        if (dist.probs[b] == 0) continue;
        e += dist.probs[b] * cut_weight(g, node_bits_from_embedding(b, a));
    }
    return e;
}

/// Var_{b ~ P_m}[CW(b)] by full enumeration.
inline double cut_variance(const DenseState& rho, const Graph& g, const PauliAssignment& a) {
    MagicDistribution dist = magic_distribution(rho, a);
    double e = 0, e2 = 0;
    for (std::size_t b = 0; b < dist.probs.size(); ++b) {
        if (dist.probs[b] == 0) continue;
        double cw = cut_weight(g, node_bits_from_embedding(b, a));
        e += dist.probs[b] * cw;
        e2 += dist.probs[b] * cw * cw;
    }
    return e2 - e * e;
}

/// Closed forms for the two moments in terms of tr(H_m rho) and tr(H_m^2 rho).
inline double expected_cut_closed_form(const DenseState& rho, const Graph& g,
                                       const PauliAssignment& a) {
    MatrixXcd h = dense_hamiltonian(build_terms(g, a), a.num_qubits);
    double tr_h = dense_expectation(rho, h).real();
    double m2 = static_cast<double>(a.m) * a.m;
    return (tr_h + (m2 - 1) / 2.0 * g.total_weight()) / m2;
}

/// Variance shortcut (tr(H^2 rho) - tr(H rho)^2) / m^4. Exact only at m = 1:
/// for m > 1 the squared Hamiltonian replaces within-shot sign products by
/// operator products, which changes the overlapping-edge terms. Kept for the
/// m = 1 route and for reporting the m > 1 gap.
inline double cut_variance_closed_form(const DenseState& rho, const Graph& g,
                                       const PauliAssignment& a) {
    MatrixXcd h = dense_hamiltonian(build_terms(g, a), a.num_qubits);
    double tr_h = dense_expectation(rho, h).real();
    double tr_h2 = dense_expectation(rho, MatrixXcd(h * h)).real();
    double m4 = std::pow(static_cast<double>(a.m), 4.0);
    return (tr_h2 - tr_h * tr_h) / m4;
}

/// Shot-moment sign expectation E[(-1)^{sum of bits}] for a multiset of
/// (qubit, Pauli) slots. Repeated slots cancel mod 2; two distinct Paulis
/// surviving on one qubit make the moment vanish (their joint parity is a
/// fair coin set by the basis draw, independent of everything else); the
/// remaining distinct-qubit string follows the k-local identity.
inline double sign_moment(const DenseState& rho, int m,
                          std::vector<std::pair<int, Pauli>> slots) {
    std::sort(slots.begin(), slots.end());
    std::vector<std::pair<int, Pauli>> surviving;
    for (std::size_t i = 0; i < slots.size();) {
        std::size_t j = i;
        while (j < slots.size() && slots[j] == slots[i]) ++j;
        if ((j - i) % 2 == 1) surviving.push_back(slots[i]);
        i = j;
    }
    for (std::size_t i = 0; i + 1 < surviving.size(); ++i)
        if (surviving[i].first == surviving[i + 1].first) return 0.0;
    if (surviving.empty()) return 1.0;
    double scale = std::pow(static_cast<double>(m),
                            -static_cast<double>(surviving.size()) / 2.0);
    return scale * rho.expect_paulis(surviving).real();
}

/// Exact Var[CW] from pairwise shot moments; agrees with the enumeration for
/// every m and reduces to the shortcut form at m = 1.
inline double cut_variance_moment_form(const DenseState& rho, const Graph& g,
                                       const PauliAssignment& a) {
    auto slot = [&](int node) {
        return std::pair<int, Pauli>{a.qubit[static_cast<std::size_t>(node)],
                                     a.pauli[static_cast<std::size_t>(node)]};
    };
    const auto& edges = g.edges();
    std::vector<double> s1(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e)
        s1[e] = sign_moment(rho, a.m, {slot(edges[e].u), slot(edges[e].v)});
    double mean = 0, second = 0;
    for (std::size_t e = 0; e < edges.size(); ++e) mean += edges[e].w * (1.0 - s1[e]) / 2.0;
    for (std::size_t e = 0; e < edges.size(); ++e)
        for (std::size_t f = 0; f < edges.size(); ++f) {
            double s2 = sign_moment(rho, a.m,
                                    {slot(edges[e].u), slot(edges[e].v), slot(edges[f].u),
                                     slot(edges[f].v)});
            second += edges[e].w * edges[f].w * (1.0 - s1[e] - s1[f] + s2) / 4.0;
        }
    return second - mean * mean;
}

struct PairProbabilities {
    double p_j_zero = 0;   // P(b_j = 0)
    double p_equal = 0;    // P(b_j = b_k)
};

/// Closed form for P(b_j = b_k). Exact for pairs on distinct qubits
/// (1/2 + E_jk / 2m). For two nodes sharing a qubit the within-shot joint
/// has P = 1/2 identically; the product form 1/2 + E_j E_k / 2m instead
/// describes bits decoded from independent shots, which is the premise
/// behind per-site rounding. `independent_decode` selects that reading.
inline double pair_equal_closed_form(const DenseState& rho, const PauliAssignment& a, int j,
                                     int k, bool independent_decode = false) {
    auto slot = [&](int node) {
        return std::pair<int, Pauli>{a.qubit[static_cast<std::size_t>(node)],
                                     a.pauli[static_cast<std::size_t>(node)]};
    };
    double m = a.m;
    if (a.qubit[static_cast<std::size_t>(j)] != a.qubit[static_cast<std::size_t>(k)]) {
        double ejk = rho.expect_paulis({slot(j), slot(k)}).real();
        return 0.5 + ejk / (2.0 * m);
    }
    if (!independent_decode) return 0.5;
    double ej = rho.expect_paulis({slot(j)}).real();
    double ek = rho.expect_paulis({slot(k)}).real();
    return 0.5 + ej * ek / (2.0 * m);
}

inline PairProbabilities pair_probabilities(const DenseState& rho, const PauliAssignment& a,
                                            int j, int k) {
    MagicDistribution dist = magic_distribution(rho, a);
    int bj = dist.bit_index(a.qubit[static_cast<std::size_t>(j)],
                            pauli_slot(a.m, a.pauli[static_cast<std::size_t>(j)]));
    int bk = dist.bit_index(a.qubit[static_cast<std::size_t>(k)],
                            pauli_slot(a.m, a.pauli[static_cast<std::size_t>(k)]));
    return {dist.prob_bit(bj, 0), dist.prob_equal(bj, bk)};
}

// ---------------------------------------------------------------------------
// Brute-force MAX-CUT
// ---------------------------------------------------------------------------

struct BruteForceResult {
    BitString bits;
    double weight = 0;
    /// number of optimal assignments with node 0 fixed to 0
    std::int64_t num_optima = 0;
};

/// Exact optimum by enumeration over 2^{n-1} assignments (node 0 pinned to
/// side 0 by the bit-flip symmetry of the cut). Ties resolve to the smallest
/// assignment index.
inline BruteForceResult brute_force_maxcut(const Graph& g, int threads = 1) {
    int n = g.num_nodes();
    if (n < 1 || n > kBruteForceNodeLimit)
        throw std::invalid_argument("brute force limited to " +
                                    std::to_string(kBruteForceNodeLimit) + " nodes");
    const auto& edges = g.edges();
    std::uint64_t total = n == 1 ? 1 : (std::uint64_t(1) << (n - 1));

    int nblocks = threads <= 1 ? 1 : threads * 4;
    std::uint64_t block = (total + nblocks - 1) / nblocks;
    struct Best {
        double w = -std::numeric_limits<double>::infinity();
        std::uint64_t mask = 0;
        std::int64_t count = 0;
    };
    std::vector<Best> best(static_cast<std::size_t>(nblocks));

    parallel_for(static_cast<std::size_t>(nblocks), threads, [&](std::size_t bi) {
        std::uint64_t lo = bi * block, hi = std::min(total, (bi + 1) * block);
        Best b;
        for (std::uint64_t half = lo; half < hi; ++half) {
            std::uint64_t mask = half << 1;  // node 0 bit stays 0
            double w = 0;
            for (const Edge& e : edges)
                if (((mask >> e.u) ^ (mask >> e.v)) & 1u) w += e.w;
            if (w > b.w + 1e-12) {
                b.w = w;
                b.mask = mask;
                b.count = 1;
            } else if (w > b.w - 1e-12) {
                ++b.count;
            }
        }
        best[bi] = b;
    });

    Best overall;
    for (const Best& b : best) {
        if (b.w > overall.w + 1e-12) {
            overall = b;
        } else if (b.w > overall.w - 1e-12) {
            overall.count += b.count;
            if (b.mask < overall.mask) overall.mask = b.mask;
        }
    }

    BruteForceResult res;
    res.weight = overall.w;
    res.num_optima = overall.count;
    res.bits.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) res.bits[static_cast<std::size_t>(i)] = (overall.mask >> i) & 1u;
    return res;
}

// ---------------------------------------------------------------------------
// Highest-probability decode
// ---------------------------------------------------------------------------

namespace detail {

struct DecodeBest {
    double f = -1;
    std::size_t b = 0;
};

/// Branch-and-bound over per-qubit magic groups maximizing
/// f(b) + f(flip b); Cauchy-Schwarz prunes on the partial norms.
inline void decode_dfs(const VectorXcd& part, const VectorXcd& part_flip, int qubit, int m,
                       std::size_t prefix, DecodeBest& best) {
    double bound = part.squaredNorm() + part_flip.squaredNorm();
    if (bound <= best.f) return;
    const auto& table = magic_vector_table(m);
    if (qubit < 0) {
        double f = std::norm(part(0)) + std::norm(part_flip(0));
        if (f > best.f) {
            best.f = f;
            best.b = prefix;
        }
        return;
    }
    std::size_t gmask = table.size() - 1;
    for (std::size_t g = 0; g < table.size(); ++g) {
        VectorXcd next = DenseState::contract_top_qubit(part, table[g]);
        VectorXcd next_flip = DenseState::contract_top_qubit(part_flip, table[g ^ gmask]);
        decode_dfs(next, next_flip, qubit - 1, m,
                   prefix | (g << (static_cast<std::size_t>(qubit) * static_cast<std::size_t>(m))),
                   best);
    }
}

} // namespace detail

struct DecodeResult {
    BitString bits;
    std::size_t embedding = 0;
    double fidelity_sum = 0;  // f(b) + f(flip b), unnormalized
};

/// argmax_b [P_m(b; rho) + P_m(flip b; rho)] for a pure state, decoded to
/// node bits through the assignment. Exact (branch and bound), no
/// enumeration-size bound.
inline DecodeResult max_probability_decode(const DenseState& rho, const PauliAssignment& a) {
    if (!rho.is_pure()) throw std::invalid_argument("decode requires a pure state");
    detail::DecodeBest best;
    detail::decode_dfs(rho.amplitudes(), rho.amplitudes(), rho.num_qubits() - 1, a.m, 0, best);
    return {node_bits_from_embedding(best.b, a), best.b, best.f};
}

} // namespace rqrao
