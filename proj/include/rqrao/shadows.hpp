#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "rqrao/mps.hpp"
#include "rqrao/oracle.hpp"
#include "rqrao/parallel.hpp"
#include "rqrao/qrac.hpp"
#include "rqrao/rng.hpp"
#include "rqrao/tensornet.hpp"

namespace rqrao {

/// One magic measurement basis: a unitary with U|0>, U|1> spanning an
/// antipodal magic-state pair, plus the bit tuples each outcome decodes to.
struct MagicBasis {
    Matrix2cd u;
    std::array<std::vector<std::uint8_t>, 2> bits;  // per outcome
};

/// The 2^{m-1} measurement bases of the (m,1)-random magic measurement.
/// For m = 3 the unitaries follow U1^dag = exp(-itX) exp(-isZ) with s = pi/8,
/// t = arccos(sqrt((1 + 1/sqrt(3))/2)), and U2 = U1 X, U3 = U1 Y, U4 = U1 Z
/// up to the dagger; for m < 3 the analogous antipodal pairings are built
/// from the magic-state eigenvectors directly. m = 1 reduces to the
/// computational basis.
inline const std::vector<MagicBasis>& magic_bases(int m) {
    static std::vector<MagicBasis> sets[4];
    static std::once_flag flags[4];
    if (m < 1 || m > 3) throw std::invalid_argument("m must be 1, 2 or 3");
    std::call_once(flags[static_cast<std::size_t>(m)], [m]() {
        std::vector<MagicBasis>& bases = sets[static_cast<std::size_t>(m)];
        if (m == 3) {
            const double s = M_PI / 8.0;
            const double t = std::acos(std::sqrt((1.0 + 1.0 / std::sqrt(3.0)) / 2.0));
            Matrix2cd expz, expx;
            expz << std::exp(cx(0, -s)), 0, 0, std::exp(cx(0, s));
            expx << std::cos(t), cx(0, -std::sin(t)), cx(0, -std::sin(t)), std::cos(t);
            Matrix2cd u1 = (expx * expz).adjoint();
            std::vector<std::array<std::vector<std::uint8_t>, 2>> tuples = {
                {{{0, 0, 0}, {1, 1, 1}}},
                {{{0, 1, 1}, {1, 0, 0}}},
                {{{1, 0, 1}, {0, 1, 0}}},
                {{{1, 1, 0}, {0, 0, 1}}},
            };
            std::vector<Matrix2cd> us = {u1, (u1.adjoint() * pauli_matrix(Pauli::X)).adjoint(),
                                         (u1.adjoint() * pauli_matrix(Pauli::Y)).adjoint(),
                                         (u1.adjoint() * pauli_matrix(Pauli::Z)).adjoint()};
            for (int i = 0; i < 4; ++i) bases.push_back({us[static_cast<std::size_t>(i)],
                                                         tuples[static_cast<std::size_t>(i)]});
        } else {
            // antipodal pairs (b, ~b); U columns are the pair's eigenvectors
            std::size_t count = std::size_t(1) << (m - 1);
            for (std::size_t g = 0; g < count; ++g) {
                std::vector<std::uint8_t> plus(static_cast<std::size_t>(m)), minus;
                for (int sbit = 0; sbit < m; ++sbit)
                    plus[static_cast<std::size_t>(sbit)] = (g >> sbit) & 1u;
                minus = plus;
                for (auto& b : minus) b ^= 1;
                Matrix2cd u;
                u.col(0) = magic_vector_1q(m, plus);
                u.col(1) = magic_vector_1q(m, minus);
                bases.push_back({u, {plus, minus}});
            }
        }
        // sanity: U is unitary and maps |0>,|1> onto the advertised pair
        for (const MagicBasis& b : bases) {
            if ((b.u * b.u.adjoint() - Matrix2cd::Identity()).norm() > 1e-12)
                throw std::logic_error("magic basis unitary is not unitary");
            for (int out = 0; out < 2; ++out) {
                Matrix2cd proj = b.u.col(out) * b.u.col(out).adjoint();
                if ((proj - magic_density_1q(m, b.bits[static_cast<std::size_t>(out)])).norm() >
                    1e-12)
                    throw std::logic_error("magic basis does not match its bit tuples");
            }
        }
    });
    return sets[static_cast<std::size_t>(m)];
}

/// One random-magic-measurement shot: the basis index (0-based; the
/// conventional labels are 1..4) and outcome bit per qubit.
struct ShadowSnapshot {
    int m = 3;
    std::vector<int> basis;
    std::vector<std::uint8_t> outcome;

    int num_qubits() const { return static_cast<int>(basis.size()); }

    /// Decoded (b_X, b_Y, b_Z)-style tuple of one qubit.
    const std::vector<std::uint8_t>& decoded(int qubit) const {
        return magic_bases(m)[static_cast<std::size_t>(basis.at(static_cast<std::size_t>(qubit)))]
            .bits[outcome.at(static_cast<std::size_t>(qubit))];
    }

    /// All decoded bits, embedding layout (qubit * m + slot).
    std::vector<std::uint8_t> decoded_bits() const {
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(num_qubits() * m));
        for (int q = 0; q < num_qubits(); ++q) {
            const auto& tuple = decoded(q);
            for (int s = 0; s < m; ++s)
                bits[static_cast<std::size_t>(q * m + s)] = tuple[static_cast<std::size_t>(s)];
        }
        return bits;
    }
};

namespace detail {

inline ShadowSnapshot sample_dense(const VectorXcd& amplitudes, int m, Rng& rng) {
    const auto& bases = magic_bases(m);
    int n = 0;
    while ((Eigen::Index(1) << n) < amplitudes.size()) ++n;
    ShadowSnapshot snap;
    snap.m = m;
    snap.basis.resize(static_cast<std::size_t>(n));
    snap.outcome.resize(static_cast<std::size_t>(n));
    VectorXcd v = amplitudes;
    double norm_sq = v.squaredNorm();
    for (int q = 0; q < n; ++q) {
        int i = static_cast<int>(rng.index(bases.size()));
        snap.basis[static_cast<std::size_t>(q)] = i;
        // projector onto outcome 0 of this basis
        Matrix2cd proj = bases[static_cast<std::size_t>(i)].u.col(0) *
                         bases[static_cast<std::size_t>(i)].u.col(0).adjoint();
        VectorXcd projected = v;
        DenseState::apply_1q(projected, q, proj);
        double p0 = projected.squaredNorm() / norm_sq;
        if (rng.uniform01() < p0) {
            snap.outcome[static_cast<std::size_t>(q)] = 0;
            v.swap(projected);
            norm_sq = v.squaredNorm();
        } else {
            snap.outcome[static_cast<std::size_t>(q)] = 1;
            VectorXcd rest = v - projected;
            v.swap(rest);
            norm_sq = v.squaredNorm();
        }
    }
    return snap;
}

/// Perfect sampling down the chain: project each visited site onto the drawn
/// outcome vector and score the remainder with the identity bottom envs.
inline ShadowSnapshot sample_mps(const Mps& psi, int m, Rng& rng) {
    const auto& bases = magic_bases(m);
    int n = psi.num_qubits();
    IdentityEnvs env = identity_envs(psi);
    ShadowSnapshot snap;
    snap.m = m;
    snap.basis.resize(static_cast<std::size_t>(n));
    snap.outcome.resize(static_cast<std::size_t>(n));
    Eigen::RowVectorXcd u = Eigen::RowVectorXcd::Ones(1);
    for (int q = n - 1; q >= 0; --q) {
        int i = static_cast<int>(rng.index(bases.size()));
        snap.basis[static_cast<std::size_t>(q)] = i;
        const SiteTensor& a = psi.site(q);
        std::array<Eigen::RowVectorXcd, 2> cond;
        std::array<double, 2> weight{};
        for (int out = 0; out < 2; ++out) {
            Vector2cd bra = bases[static_cast<std::size_t>(i)].u.col(out);
            cond[static_cast<std::size_t>(out)] =
                std::conj(bra(0)) * (u * a.m[0]) + std::conj(bra(1)) * (u * a.m[1]);
            const auto& w = cond[static_cast<std::size_t>(out)];
            weight[static_cast<std::size_t>(out)] =
                (w.conjugate() * env.bot[static_cast<std::size_t>(q)] * w.transpose())(0, 0)
                    .real();
        }
        double p0 = weight[0] / (weight[0] + weight[1]);
        int out = rng.uniform01() < p0 ? 0 : 1;
        snap.outcome[static_cast<std::size_t>(q)] = static_cast<std::uint8_t>(out);
        u = cond[static_cast<std::size_t>(out)];
    }
    return snap;
}

} // namespace detail

/// One (m,1)-random magic measurement of a dense state.
inline ShadowSnapshot magic_measure(const DenseState& state, int m, Rng& rng) {
    if (!state.is_pure()) throw std::invalid_argument("measurement sampling needs a pure state");
    return detail::sample_dense(state.amplitudes(), m, rng);
}

/// One measurement of an MPS; converts to a dense vector up to 20 qubits and
/// samples by conditional contraction beyond that.
inline ShadowSnapshot magic_measure(const Mps& psi, int m, Rng& rng) {
    if (psi.num_qubits() <= kDenseQubitLimit)
        return detail::sample_dense(dense_from_mps(psi).amplitudes(), m, rng);
    double log_norm_sq = detail::mps_log_norm_sq(psi);
    if (!std::isfinite(log_norm_sq)) throw std::runtime_error("MPS has non-positive norm");
    Mps scaled = psi;
    scaled.scale(std::exp(-log_norm_sq / (2.0 * psi.num_qubits())));
    return detail::sample_mps(scaled, m, rng);
}

/// Classical snapshot in factored per-qubit form: factor q is
/// 3 U^dag |b><b| U - I. Only defined for the (3,1) measurement, where the
/// sampling channel is depolarizing and invertible.
struct SnapshotFactors {
    std::vector<Matrix2cd> factors;

    MatrixXcd to_dense() const {
        MatrixXcd acc = MatrixXcd::Ones(1, 1);
        for (std::size_t q = 0; q < factors.size(); ++q) {
            MatrixXcd next(acc.rows() * 2, acc.cols() * 2);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    next.block(r * acc.rows(), c * acc.cols(), acc.rows(), acc.cols()) =
                        factors[q](r, c) * acc;
            acc.swap(next);
        }
        return acc;
    }
};

inline SnapshotFactors snapshot_matrix(const ShadowSnapshot& snap) {
    if (snap.m != 3)
        throw std::invalid_argument("snapshot inversion is defined for the (3,1) measurement");
    const auto& bases = magic_bases(3);
    SnapshotFactors out;
    out.factors.reserve(static_cast<std::size_t>(snap.num_qubits()));
    for (int q = 0; q < snap.num_qubits(); ++q) {
        Vector2cd v = bases[static_cast<std::size_t>(snap.basis[static_cast<std::size_t>(q)])]
                          .u.col(snap.outcome[static_cast<std::size_t>(q)]);
        out.factors.push_back(3.0 * (v * v.adjoint()) - Matrix2cd::Identity());
    }
    return out;
}

/// Mean of o_hat = m^{k/2} (-1)^{sum of decoded bits} over the snapshots.
/// `truncate` clips the final estimate into [-1, 1], the anomaly guard used
/// when estimating physical expectations.
inline double estimate_pauli(const std::vector<ShadowSnapshot>& snapshots,
                             const std::vector<std::pair<int, Pauli>>& observable,
                             bool truncate = true) {
    if (snapshots.empty()) throw std::invalid_argument("no snapshots");
    int m = snapshots.front().m;
    double scale = std::pow(static_cast<double>(m),
                            static_cast<double>(observable.size()) / 2.0);
    double sum = 0;
    for (const ShadowSnapshot& s : snapshots) {
        int parity = 0;
        for (const auto& [q, p] : observable) {
            if (q < 0 || q >= s.num_qubits())
                throw std::out_of_range("observable touches a qubit outside the snapshot");
            parity ^= s.decoded(q)[static_cast<std::size_t>(pauli_slot(m, p))];
        }
        sum += scale * (parity ? -1.0 : 1.0);
    }
    double mean = sum / static_cast<double>(snapshots.size());
    return truncate ? std::clamp(mean, -1.0, 1.0) : mean;
}

/// Shot collection, parallel over shots with per-shot derived seeds.
inline std::vector<ShadowSnapshot> collect_snapshots(const DenseState& state, int m,
                                                     std::size_t shots, RngStream stream,
                                                     int threads = 0) {
    std::vector<ShadowSnapshot> out(shots);
    parallel_for(shots, threads, [&](std::size_t i) {
        Rng rng(stream.child(i));
        out[i] = magic_measure(state, m, rng);
    });
    return out;
}

inline std::string snapshots_to_csv(const std::vector<ShadowSnapshot>& snapshots) {
    std::ostringstream out;
    out << "shot,qubit,basis,outcome\n";
    for (std::size_t s = 0; s < snapshots.size(); ++s)
        for (int q = 0; q < snapshots[s].num_qubits(); ++q)
            out << s << ',' << q << ',' << snapshots[s].basis[static_cast<std::size_t>(q)] + 1
                << ',' << int(snapshots[s].outcome[static_cast<std::size_t>(q)]) << '\n';
    return out.str();
}

} // namespace rqrao
