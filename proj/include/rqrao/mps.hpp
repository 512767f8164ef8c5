#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rqrao/pauli.hpp"
#include "rqrao/rng.hpp"

namespace rqrao {

using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;

/// One MPS site: the two (left x right) matrices indexed by the physical
/// basis state.
struct SiteTensor {
    std::array<MatrixXcd, 2> m;

    Eigen::Index rows() const { return m[0].rows(); }
    Eigen::Index cols() const { return m[0].cols(); }
};

/// Matrix-product state over n qubits with bond cap chi. Site i holds the
/// factor for qubit i; the full amplitude of |b_{n-1} ... b_0> is the matrix
/// product A^{[n-1]}[b_{n-1}] * ... * A^{[0]}[b_0]. Bond i (between sites i
/// and i-1) has dimension min(2^i, 2^{n-i}, chi), 1 at both ends, which is
/// the exact cap for an open chain clipped at chi.
class Mps {
public:
    Mps() = default;
    Mps(int n, int chi) : n_(n), chi_(chi) {
        if (n < 1 || chi < 1) throw std::invalid_argument("need n >= 1 and chi >= 1");
        sites_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            int dl = bond_dim(i + 1);
            int dr = bond_dim(i);
            sites_[static_cast<std::size_t>(i)].m[0].setZero(dl, dr);
            sites_[static_cast<std::size_t>(i)].m[1].setZero(dl, dr);
        }
    }

    int num_qubits() const { return n_; }
    int chi() const { return chi_; }

    /// Dimension of bond i, i in [0, n]; bonds 0 and n are the open ends.
    int bond_dim(int i) const {
        double cap = std::min(std::pow(2.0, i), std::pow(2.0, n_ - i));
        return static_cast<int>(std::min(cap, static_cast<double>(chi_)));
    }

    SiteTensor& site(int i) { return sites_.at(static_cast<std::size_t>(i)); }
    const SiteTensor& site(int i) const { return sites_.at(static_cast<std::size_t>(i)); }

    /// Shared-bond consistency; throws when shapes drifted out of the law.
    void check_shapes() const {
        for (int i = 0; i < n_; ++i) {
            const SiteTensor& t = sites_[static_cast<std::size_t>(i)];
            if (t.m[0].rows() != t.m[1].rows() || t.m[0].cols() != t.m[1].cols())
                throw std::runtime_error("physical slices disagree on shape");
            if (t.rows() != bond_dim(i + 1) || t.cols() != bond_dim(i))
                throw std::runtime_error("MPS tensor violates the bond-shape law");
        }
    }

    std::size_t parameter_count() const {
        std::size_t c = 0;
        for (const SiteTensor& t : sites_)
            c += 2 * static_cast<std::size_t>(t.rows() * t.cols());
        return c;  // complex entries
    }

    /// Flatten to a real parameter vector (re, im interleaved per entry).
    std::vector<double> to_parameters() const {
        std::vector<double> x;
        x.reserve(2 * parameter_count());
        for (const SiteTensor& t : sites_)
            for (int s = 0; s < 2; ++s)
                for (Eigen::Index c = 0; c < t.cols(); ++c)
                    for (Eigen::Index r = 0; r < t.rows(); ++r) {
                        x.push_back(t.m[static_cast<std::size_t>(s)](r, c).real());
                        x.push_back(t.m[static_cast<std::size_t>(s)](r, c).imag());
                    }
        return x;
    }

    void from_parameters(const std::vector<double>& x) {
        std::size_t k = 0;
        for (SiteTensor& t : sites_)
            for (int s = 0; s < 2; ++s)
                for (Eigen::Index c = 0; c < t.cols(); ++c)
                    for (Eigen::Index r = 0; r < t.rows(); ++r) {
                        t.m[static_cast<std::size_t>(s)](r, c) = cx(x.at(k), x.at(k + 1));
                        k += 2;
                    }
        if (k != x.size()) throw std::invalid_argument("parameter vector length mismatch");
    }

    void scale(double factor) {
        for (SiteTensor& t : sites_) {
            t.m[0] *= factor;
            t.m[1] *= factor;
        }
    }

private:
    int n_ = 0;
    int chi_ = 1;
    std::vector<SiteTensor> sites_;
};

/// chi = 1 product state from per-qubit 2-vectors (index = qubit).
inline Mps product_mps(const std::vector<Vector2cd>& locals) {
    Mps psi(static_cast<int>(locals.size()), 1);
    for (std::size_t q = 0; q < locals.size(); ++q) {
        psi.site(static_cast<int>(q)).m[0](0, 0) = locals[q](0);
        psi.site(static_cast<int>(q)).m[1](0, 0) = locals[q](1);
    }
    return psi;
}

/// Computational basis product state |b>.
inline Mps basis_mps(const std::vector<std::uint8_t>& bits) {
    std::vector<Vector2cd> locals(bits.size());
    for (std::size_t q = 0; q < bits.size(); ++q)
        locals[q] = bits[q] ? Vector2cd(0, 1) : Vector2cd(1, 0);
    return product_mps(locals);
}

namespace detail {

/// <psi|psi> by transfer-matrix sweep.
inline double mps_norm_sq(const Mps& psi) {
    MatrixXcd env = MatrixXcd::Ones(1, 1);
    for (int i = psi.num_qubits() - 1; i >= 0; --i) {
        const SiteTensor& t = psi.site(i);
        MatrixXcd next = t.m[0].adjoint() * env * t.m[0];
        next.noalias() += t.m[1].adjoint() * env * t.m[1];
        env.swap(next);
    }
    return env(0, 0).real();
}

/// log <psi|psi> with per-step rescaling, safe for chains long enough that
/// the bare product of transfer factors would leave double range.
inline double mps_log_norm_sq(const Mps& psi) {
    MatrixXcd env = MatrixXcd::Ones(1, 1), next;
    double log_scale = 0;
    for (int i = psi.num_qubits() - 1; i >= 0; --i) {
        const SiteTensor& t = psi.site(i);
        next.noalias() = t.m[0].adjoint() * (env * t.m[0]);
        next.noalias() += t.m[1].adjoint() * (env * t.m[1]);
        double s = next.cwiseAbs().maxCoeff();
        if (!(s > 0) || !std::isfinite(s)) return -std::numeric_limits<double>::infinity();
        next /= s;
        log_scale += std::log(s);
        env.swap(next);
    }
    double tail = env(0, 0).real();
    if (!(tail > 0)) return -std::numeric_limits<double>::infinity();
    return log_scale + std::log(tail);
}

} // namespace detail

/// Random MPS: iid complex Gaussian entries, globally normalized to unit norm.
inline Mps init_mps(int n, int chi, Rng& rng) {
    Mps psi(n, chi);
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < 2; ++s) {
            MatrixXcd& m = psi.site(i).m[static_cast<std::size_t>(s)];
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                for (Eigen::Index r = 0; r < m.rows(); ++r)
                    m(r, c) = cx(rng.gaussian(), rng.gaussian());
        }
    double log_norm_sq = detail::mps_log_norm_sq(psi);
    psi.scale(std::exp(-log_norm_sq / (2.0 * n)));
    return psi;
}

// Versioned binary dump, for debugging sessions.

inline void save_mps(const Mps& psi, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    const char magic[8] = {'R', 'Q', 'M', 'P', 'S', '0', '0', '1'};
    out.write(magic, 8);
    std::int32_t n = psi.num_qubits(), chi = psi.chi();
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&chi), 4);
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < 2; ++s) {
            const MatrixXcd& m = psi.site(i).m[static_cast<std::size_t>(s)];
            out.write(reinterpret_cast<const char*>(m.data()),
                      static_cast<std::streamsize>(sizeof(cx) * static_cast<std::size_t>(m.size())));
        }
}

inline Mps load_mps(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::string(magic, 8) != "RQMPS001") throw std::runtime_error("bad MPS dump header");
    std::int32_t n = 0, chi = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&chi), 4);
    Mps psi(n, chi);
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < 2; ++s) {
            MatrixXcd& m = psi.site(i).m[static_cast<std::size_t>(s)];
            in.read(reinterpret_cast<char*>(m.data()),
                    static_cast<std::streamsize>(sizeof(cx) * static_cast<std::size_t>(m.size())));
        }
    if (!in) throw std::runtime_error("truncated MPS dump");
    return psi;
}

} // namespace rqrao
