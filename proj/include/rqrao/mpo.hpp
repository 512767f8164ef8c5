#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "rqrao/mps.hpp"
#include "rqrao/pauli.hpp"
#include "rqrao/qrac.hpp"

namespace rqrao {

/// One Pauli-string summand C_k * prod_q P_{k,q} with identities implied on
/// unlisted qubits. Sites are kept sorted descending (chain sweep order).
struct MpoChannel {
    double coeff = 1.0;
    std::vector<std::pair<int, Pauli>> sites;  // (qubit, non-identity Pauli)

    int hi() const { return sites.empty() ? -1 : sites.front().first; }
    int lo() const { return sites.empty() ? -1 : sites.back().first; }

    Pauli at(int qubit) const {
        for (const auto& [q, p] : sites)
            if (q == qubit) return p;
        return Pauli::I;
    }
};

/// Matrix-product operator for a K-term Pauli-sum Hamiltonian, stored as the
/// channel (COO) form of the standard construction: interior bond dimension
/// K with the bond index diagonal, coefficients folded into the site-0
/// tensor. `site_coords` materializes the B tensors on demand.
class Mpo {
public:
    Mpo() = default;
    Mpo(int num_qubits, double constant, std::vector<MpoChannel> channels)
        : n_(num_qubits), constant_(constant), channels_(std::move(channels)) {
        for (MpoChannel& ch : channels_) {
            std::sort(ch.sites.begin(), ch.sites.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
            for (std::size_t i = 0; i + 1 < ch.sites.size(); ++i)
                if (ch.sites[i].first == ch.sites[i + 1].first)
                    throw std::invalid_argument("channel lists a qubit twice");
            for (const auto& [q, p] : ch.sites) {
                if (q < 0 || q >= n_) throw std::out_of_range("channel qubit out of range");
                if (p == Pauli::I) throw std::invalid_argument("channels list non-identity sites only");
            }
        }
    }

    int num_qubits() const { return n_; }
    double constant() const { return constant_; }
    int num_terms() const { return static_cast<int>(channels_.size()); }
    const std::vector<MpoChannel>& channels() const { return channels_; }

    /// Bond dimension between sites i and i-1 in the materialized tensor
    /// train: K on interior bonds, 1 at the summed boundaries.
    int bond_dim(int i) const {
        return (i == 0 || i == n_) ? 1 : std::max(1, num_terms());
    }

    struct Coord {
        int bond_in;   // k index entering from the right (site i-1 side)
        int s_out;     // output (bra) physical index
        int s_in;      // input (ket) physical index
        int bond_out;  // k index leaving to the left (site i+1 side)
        cx value;
    };

    /// Nonzero entries of the 4-index tensor B^{[i]}. The k bond index is
    /// diagonal; site 0 carries the coefficients and collapses bond_in to 0.
    std::vector<Coord> site_coords(int i) const {
        std::vector<Coord> out;
        for (int k = 0; k < num_terms(); ++k) {
            const MpoChannel& ch = channels_[static_cast<std::size_t>(k)];
            const Matrix2cd& p = pauli_matrix(ch.at(i));
            double c = (i == 0) ? ch.coeff : 1.0;
            int bin = (i == 0) ? 0 : k;
            int bout = (i == n_ - 1) ? 0 : k;
            for (int so = 0; so < 2; ++so)
                for (int si = 0; si < 2; ++si)
                    if (p(so, si) != 0.0) out.push_back({bin, so, si, bout, c * p(so, si)});
        }
        return out;
    }

private:
    int n_ = 0;
    double constant_ = 0;
    std::vector<MpoChannel> channels_;
};

/// MPO of an (m,1)-QRAC Hamiltonian: one channel per edge term plus the
/// scalar offset sum_e w_e / 2.
inline Mpo build_mpo(const HamiltonianTerms& h, int num_qubits) {
    std::vector<MpoChannel> channels;
    channels.reserve(h.terms.size());
    for (const QracTerm& t : h.terms) {
        if (t.qubit_a < 0 || t.qubit_a >= num_qubits || t.qubit_b < 0 || t.qubit_b >= num_qubits)
            throw std::out_of_range("term qubit index out of range");
        channels.push_back({t.coeff, {{t.qubit_a, t.pauli_a}, {t.qubit_b, t.pauli_b}}});
    }
    return Mpo(num_qubits, h.constant, std::move(channels));
}

} // namespace rqrao
