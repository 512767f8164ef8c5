#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rqrao/lbfgs.hpp"
#include "rqrao/mpo.hpp"
#include "rqrao/mps.hpp"
#include "rqrao/qrac.hpp"

namespace rqrao {

namespace detail {

// Environment conventions for the <psi|O|psi> sandwich, sites swept from
// n-1 (top) to 0 (bottom):
//   top env  T(i): sites n-1..i+1 contracted, indices (bra bond, ket bond),
//   bottom env B(i): sites i-1..0 contracted, same index order.
// All operators act site-locally; channels list their non-identity sites.

/// T(i-1) = sum_{s',s} P_{s's} A[s']^H T(i) A[s]
inline void transfer_down(const MatrixXcd& t, const SiteTensor& a, Pauli p, MatrixXcd& out) {
    if (p == Pauli::I) {
        out.noalias() = a.m[0].adjoint() * (t * a.m[0]);
        out.noalias() += a.m[1].adjoint() * (t * a.m[1]);
        return;
    }
    const Matrix2cd& pm = pauli_matrix(p);
    out.setZero(a.cols(), a.cols());
    for (int sp = 0; sp < 2; ++sp)
        for (int s = 0; s < 2; ++s)
            if (pm(sp, s) != 0.0)
                out.noalias() += pm(sp, s) * (a.m[static_cast<std::size_t>(sp)].adjoint() *
                                              (t * a.m[static_cast<std::size_t>(s)]));
}

/// B(i+1) = sum_{s',s} P_{s's} conj(A[s']) B(i) A[s]^T
inline void transfer_up(const MatrixXcd& b, const SiteTensor& a, Pauli p, MatrixXcd& out) {
    if (p == Pauli::I) {
        out.noalias() = a.m[0].conjugate() * (b * a.m[0].transpose());
        out.noalias() += a.m[1].conjugate() * (b * a.m[1].transpose());
        return;
    }
    const Matrix2cd& pm = pauli_matrix(p);
    out.setZero(a.rows(), a.rows());
    for (int sp = 0; sp < 2; ++sp)
        for (int s = 0; s < 2; ++s)
            if (pm(sp, s) != 0.0)
                out.noalias() += pm(sp, s) * (a.m[static_cast<std::size_t>(sp)].conjugate() *
                                              (b * a.m[static_cast<std::size_t>(s)].transpose()));
}

/// Scalar closure at site i given both environments.
inline cx close_at(const MatrixXcd& t, const SiteTensor& a, Pauli p, const MatrixXcd& b) {
    const Matrix2cd& pm = pauli_matrix(p);
    cx v = 0;
    for (int sp = 0; sp < 2; ++sp)
        for (int s = 0; s < 2; ++s) {
            if (pm(sp, s) == 0.0) continue;
            // sum_{r',r} (A[s']^H T A[s])_{r'r} B_{r'r}
            MatrixXcd m = a.m[static_cast<std::size_t>(sp)].adjoint() *
                          (t * a.m[static_cast<std::size_t>(s)]);
            v += pm(sp, s) * (m.array() * b.array()).sum();
        }
    return v;
}

/// Identity environments at every site plus the squared norm.
struct IdentityEnvs {
    std::vector<MatrixXcd> top;  // top[i] = T(i)
    std::vector<MatrixXcd> bot;  // bot[i] = B(i)
    double norm_sq = 0;
};

inline IdentityEnvs identity_envs(const Mps& psi) {
    int n = psi.num_qubits();
    IdentityEnvs env;
    env.top.resize(static_cast<std::size_t>(n));
    env.bot.resize(static_cast<std::size_t>(n));
    env.top[static_cast<std::size_t>(n - 1)] = MatrixXcd::Ones(1, 1);
    for (int i = n - 1; i > 0; --i)
        transfer_down(env.top[static_cast<std::size_t>(i)], psi.site(i), Pauli::I,
                      env.top[static_cast<std::size_t>(i - 1)]);
    env.bot[0] = MatrixXcd::Ones(1, 1);
    for (int i = 0; i + 1 < n; ++i)
        transfer_up(env.bot[static_cast<std::size_t>(i)], psi.site(i), Pauli::I,
                    env.bot[static_cast<std::size_t>(i + 1)]);
    env.norm_sq =
        close_at(env.top[static_cast<std::size_t>(n - 1)], psi.site(n - 1), Pauli::I,
                 env.bot[static_cast<std::size_t>(n - 1)])
            .real();
    return env;
}

/// Raw (unnormalized) sandwich value of one channel, reusing shared
/// identity environments.
inline cx channel_value(const Mps& psi, const MpoChannel& ch, const IdentityEnvs& env) {
    if (ch.sites.empty()) return env.norm_sq;
    int hi = ch.hi(), lo = ch.lo();
    if (hi == lo) return close_at(env.top[static_cast<std::size_t>(hi)], psi.site(hi),
                                  ch.sites[0].second, env.bot[static_cast<std::size_t>(lo)]);
    MatrixXcd t = env.top[static_cast<std::size_t>(hi)], tn;
    for (int i = hi; i > lo; --i) {
        transfer_down(t, psi.site(i), ch.at(i), tn);
        t.swap(tn);
    }
    return close_at(t, psi.site(lo), ch.at(lo), env.bot[static_cast<std::size_t>(lo)]);
}

struct EvalResult {
    double objective = 0;       // constant + sum_k c_k v_k / <psi|psi>
    double norm_sq = 0;
    std::vector<cx> raw_channel_values;
};

/// Fused objective and (optionally) gradient of the normalized Rayleigh
/// quotient. The gradient is returned per tensor entry with real and
/// imaginary parts treated as independent real parameters, i.e. entry =
/// d f / d Re + i * d f / d Im = 2 * conjugate Wirtinger derivative.
///
/// Per-channel partial environments live only on the channel's active span;
/// outside the span the channel's closed environment is folded into running
/// coefficient-weighted aggregates, so the whole gradient costs
/// O(sum_k span_k + n) transfer applications. Channels must be 1- or
/// 2-local when a gradient is requested.
inline EvalResult evaluate(const Mps& psi, const Mpo& h, std::vector<SiteTensor>* grad);

/// On long chains the bare norm product leaves double range while the
/// quotient stays well defined. The quotient is invariant under uniform
/// tensor rescaling, so evaluation moves to a unit-norm copy; the raw-entry
/// gradient picks up the chain-rule factor alpha per entry.
inline EvalResult evaluate_rescaled(const Mps& psi, const Mpo& h,
                                    std::vector<SiteTensor>* grad) {
    double log_norm_sq = mps_log_norm_sq(psi);
    if (!std::isfinite(log_norm_sq)) throw std::runtime_error("MPS has non-positive norm");
    double alpha = std::exp(-log_norm_sq / (2.0 * psi.num_qubits()));
    Mps scaled = psi;
    scaled.scale(alpha);
    EvalResult res = evaluate(scaled, h, grad);
    if (grad)
        for (SiteTensor& t : *grad) {
            t.m[0] *= alpha;
            t.m[1] *= alpha;
        }
    return res;
}

inline EvalResult evaluate(const Mps& psi, const Mpo& h, std::vector<SiteTensor>* grad) {
    int n = psi.num_qubits();
    if (h.num_qubits() != n) throw std::invalid_argument("qubit count mismatch");
    {
        double probe = mps_norm_sq(psi);
        if (!(probe > 1e-120) || !(probe < 1e120) || !std::isfinite(probe))
            return evaluate_rescaled(psi, h, grad);
    }
    IdentityEnvs env = identity_envs(psi);
    if (!(env.norm_sq > 0)) throw std::runtime_error("MPS has non-positive norm");

    EvalResult res;
    res.norm_sq = env.norm_sq;
    res.raw_channel_values.resize(h.channels().size());

    const auto& channels = h.channels();
    cx raw_sum = 0;

    if (!grad) {
        for (std::size_t k = 0; k < channels.size(); ++k) {
            res.raw_channel_values[k] = channel_value(psi, channels[k], env);
            raw_sum += channels[k].coeff * res.raw_channel_values[k];
        }
        res.objective = h.constant() + raw_sum.real() / env.norm_sq;
        return res;
    }

    // per-channel partial environments over the active span
    struct ChannelEnvs {
        int lo = 0, hi = 0;
        Pauli p_lo = Pauli::I, p_hi = Pauli::I;
        std::vector<MatrixXcd> t;  // t[i - lo] = channel top env at site i, i in [lo, hi)
        std::vector<MatrixXcd> b;  // b[i - lo - 1] = channel bottom env at site i, i in (lo, hi]
    };
    std::vector<ChannelEnvs> cenv(channels.size());
    // channels closing at a given site, for the aggregate sweeps
    std::vector<std::vector<int>> closes_lo(static_cast<std::size_t>(n)),
        closes_hi(static_cast<std::size_t>(n));

    for (std::size_t k = 0; k < channels.size(); ++k) {
        const MpoChannel& ch = channels[k];
        if (ch.sites.empty() || ch.sites.size() > 2)
            throw std::invalid_argument("gradient path supports 1- and 2-local channels");
        ChannelEnvs& ce = cenv[k];
        ce.hi = ch.hi();
        ce.lo = ch.lo();
        ce.p_hi = ch.sites.front().second;
        ce.p_lo = ch.sites.back().second;
        closes_lo[static_cast<std::size_t>(ce.lo)].push_back(static_cast<int>(k));
        closes_hi[static_cast<std::size_t>(ce.hi)].push_back(static_cast<int>(k));
        if (ce.hi == ce.lo) {
            res.raw_channel_values[k] =
                close_at(env.top[static_cast<std::size_t>(ce.hi)], psi.site(ce.hi), ce.p_hi,
                         env.bot[static_cast<std::size_t>(ce.hi)]);
        } else {
            int span = ce.hi - ce.lo;
            ce.t.resize(static_cast<std::size_t>(span));
            ce.b.resize(static_cast<std::size_t>(span));
            transfer_down(env.top[static_cast<std::size_t>(ce.hi)], psi.site(ce.hi), ce.p_hi,
                          ce.t[static_cast<std::size_t>(span - 1)]);
            for (int i = ce.hi - 1; i > ce.lo; --i)
                transfer_down(ce.t[static_cast<std::size_t>(i - ce.lo)], psi.site(i), Pauli::I,
                              ce.t[static_cast<std::size_t>(i - ce.lo - 1)]);
            transfer_up(env.bot[static_cast<std::size_t>(ce.lo)], psi.site(ce.lo), ce.p_lo,
                        ce.b[0]);
            for (int i = ce.lo + 1; i < ce.hi; ++i)
                transfer_up(ce.b[static_cast<std::size_t>(i - ce.lo - 1)], psi.site(i), Pauli::I,
                            ce.b[static_cast<std::size_t>(i - ce.lo)]);
            res.raw_channel_values[k] = close_at(ce.t[0], psi.site(ce.lo), ce.p_lo,
                                                 env.bot[static_cast<std::size_t>(ce.lo)]);
        }
        raw_sum += ch.coeff * res.raw_channel_values[k];
    }
    res.objective = h.constant() + raw_sum.real() / env.norm_sq;

    // raw-sandwich gradient dS/d conj(A), with S = sum_k c_k v_k
    std::vector<SiteTensor> gS(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < 2; ++s)
            gS[static_cast<std::size_t>(i)].m[static_cast<std::size_t>(s)].setZero(
                psi.site(i).rows(), psi.site(i).cols());

    auto add_hole = [&](int i, const MatrixXcd& t, Pauli p, const MatrixXcd& b, double coeff) {
        const SiteTensor& a = psi.site(i);
        const Matrix2cd& pm = pauli_matrix(p);
        for (int sp = 0; sp < 2; ++sp)
            for (int s = 0; s < 2; ++s) {
                if (pm(sp, s) == 0.0) continue;
                gS[static_cast<std::size_t>(i)].m[static_cast<std::size_t>(sp)].noalias() +=
                    (coeff * pm(sp, s)) * (t * (a.m[static_cast<std::size_t>(s)] * b.transpose()));
            }
    };

    // holes inside active spans (endpoints carry the Paulis)
    for (std::size_t k = 0; k < channels.size(); ++k) {
        const ChannelEnvs& ce = cenv[k];
        double c = channels[k].coeff;
        if (ce.hi == ce.lo) {
            add_hole(ce.hi, env.top[static_cast<std::size_t>(ce.hi)], ce.p_hi,
                     env.bot[static_cast<std::size_t>(ce.hi)], c);
            continue;
        }
        int span = ce.hi - ce.lo;
        add_hole(ce.hi, env.top[static_cast<std::size_t>(ce.hi)], ce.p_hi,
                 ce.b[static_cast<std::size_t>(span - 1)], c);
        add_hole(ce.lo, ce.t[0], ce.p_lo, env.bot[static_cast<std::size_t>(ce.lo)], c);
        for (int i = ce.lo + 1; i < ce.hi; ++i)
            add_hole(i, ce.t[static_cast<std::size_t>(i - ce.lo)], Pauli::I,
                     ce.b[static_cast<std::size_t>(i - ce.lo - 1)], c);
    }

    // channels entirely above the hole: sweep their closed top environments
    // downward as one coefficient-weighted aggregate
    {
        MatrixXcd agg = MatrixXcd::Zero(1, 1), next, closed;  // TA(n-1) = 0
        for (int i = n - 1; i >= 1; --i) {
            transfer_down(agg, psi.site(i), Pauli::I, next);  // -> level i-1
            for (int k : closes_lo[static_cast<std::size_t>(i)]) {
                const ChannelEnvs& ce = cenv[static_cast<std::size_t>(k)];
                const MatrixXcd& t_at_lo =
                    ce.hi == ce.lo ? env.top[static_cast<std::size_t>(i)] : ce.t[0];
                transfer_down(t_at_lo, psi.site(i), ce.p_lo, closed);
                next += channels[static_cast<std::size_t>(k)].coeff * closed;
            }
            agg.swap(next);  // agg = TA(i-1)
            for (int s = 0; s < 2; ++s)
                gS[static_cast<std::size_t>(i - 1)].m[static_cast<std::size_t>(s)].noalias() +=
                    agg * (psi.site(i - 1).m[static_cast<std::size_t>(s)] *
                           env.bot[static_cast<std::size_t>(i - 1)].transpose());
        }
    }

    // channels entirely below the hole: same idea, swept upward
    {
        MatrixXcd agg = MatrixXcd::Zero(1, 1), next, closed;  // BA(0) = 0
        for (int i = 0; i + 1 < n; ++i) {
            transfer_up(agg, psi.site(i), Pauli::I, next);  // -> level i+1
            for (int k : closes_hi[static_cast<std::size_t>(i)]) {
                const ChannelEnvs& ce = cenv[static_cast<std::size_t>(k)];
                const MatrixXcd& b_at_hi =
                    ce.hi == ce.lo ? env.bot[static_cast<std::size_t>(i)]
                                   : ce.b[static_cast<std::size_t>(ce.hi - ce.lo - 1)];
                transfer_up(b_at_hi, psi.site(i), ce.p_hi, closed);
                next += channels[static_cast<std::size_t>(k)].coeff * closed;
            }
            agg.swap(next);  // agg = BA(i+1)
            for (int s = 0; s < 2; ++s)
                gS[static_cast<std::size_t>(i + 1)].m[static_cast<std::size_t>(s)].noalias() +=
                    env.top[static_cast<std::size_t>(i + 1)] *
                    (psi.site(i + 1).m[static_cast<std::size_t>(s)] * agg.transpose());
        }
    }

    // Rayleigh quotient: d f / d conj(A) = (dS - (S/N) dN) / N, times 2 to
    // express the gradient in (d/dRe, d/dIm) form.
    double s_over_n = raw_sum.real() / env.norm_sq;
    grad->resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const SiteTensor& a = psi.site(i);
        for (int s = 0; s < 2; ++s) {
            MatrixXcd gN = env.top[static_cast<std::size_t>(i)] *
                           (a.m[static_cast<std::size_t>(s)] *
                            env.bot[static_cast<std::size_t>(i)].transpose());
            (*grad)[static_cast<std::size_t>(i)].m[static_cast<std::size_t>(s)] =
                2.0 / env.norm_sq *
                (gS[static_cast<std::size_t>(i)].m[static_cast<std::size_t>(s)] - s_over_n * gN);
        }
    }
    return res;
}

} // namespace detail

/// <psi|H|psi> / <psi|psi>. The imaginary residue of the contraction must
/// stay below 1e-9; it is asserted and discarded.
inline double expectation(const Mps& psi, const Mpo& h) {
    detail::EvalResult r = detail::evaluate(psi, h, nullptr);
    cx raw = 0;
    for (std::size_t k = 0; k < r.raw_channel_values.size(); ++k)
        raw += h.channels()[k].coeff * r.raw_channel_values[k];
    if (std::abs(raw.imag()) / std::max(1.0, std::abs(raw.real())) > 1e-9)
        throw std::runtime_error("expectation has a non-negligible imaginary part");
    return r.objective;
}

/// Gradient of the normalized Rayleigh quotient; see detail::evaluate for
/// the real/imaginary packing convention.
inline std::vector<SiteTensor> gradient(const Mps& psi, const Mpo& h) {
    std::vector<SiteTensor> g;
    detail::evaluate(psi, h, &g);
    return g;
}

struct MpsOptimizeResult {
    Mps psi;
    double objective = 0;
    int iterations = 0;
    bool line_search_failed = false;
};

/// Maximize <psi|H|psi>/<psi|psi> over all tensor entries with L-BFGS under
/// strong Wolfe line search. Never throws on line-search trouble: the best
/// iterate reached is returned with a flag.
inline MpsOptimizeResult optimize(const Mps& psi0, const Mpo& h, const OptimizerConfig& cfg) {
    Mps psi = psi0;
    std::vector<SiteTensor> g;
    auto objective = [&](const std::vector<double>& x, std::vector<double>& grad_out) {
        psi.from_parameters(x);
        detail::EvalResult r = detail::evaluate(psi, h, &g);
        std::size_t k = 0;
        for (int i = 0; i < psi.num_qubits(); ++i)
            for (int s = 0; s < 2; ++s) {
                const MatrixXcd& m = g[static_cast<std::size_t>(i)].m[static_cast<std::size_t>(s)];
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                    for (Eigen::Index r2 = 0; r2 < m.rows(); ++r2) {
                        grad_out[k++] = m(r2, c).real();
                        grad_out[k++] = m(r2, c).imag();
                    }
            }
        return r.objective;
    };

    OptimizeResult res = lbfgs_maximize(objective, psi0.to_parameters(), cfg);
    MpsOptimizeResult out;
    out.psi = psi0;
    out.psi.from_parameters(res.x);
    out.objective = res.objective;
    out.iterations = res.iterations;
    out.line_search_failed = res.line_search_failed;
    return out;
}

namespace detail {

inline std::vector<double> pair_expectations(const Mps& psi, std::vector<MpoChannel> channels) {
    for (MpoChannel& ch : channels)
        std::sort(ch.sites.begin(), ch.sites.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
    {
        double probe = mps_norm_sq(psi);
        if (!(probe > 1e-120) || !(probe < 1e120) || !std::isfinite(probe)) {
            double log_norm_sq = mps_log_norm_sq(psi);
            if (!std::isfinite(log_norm_sq))
                throw std::runtime_error("MPS has non-positive norm");
            Mps scaled = psi;
            scaled.scale(std::exp(-log_norm_sq / (2.0 * psi.num_qubits())));
            return pair_expectations(scaled, std::move(channels));
        }
    }
    IdentityEnvs env = identity_envs(psi);
    if (!(env.norm_sq > 0)) throw std::runtime_error("MPS has non-positive norm");
    std::vector<double> out(channels.size());
    for (std::size_t k = 0; k < channels.size(); ++k) {
        cx v = channel_value(psi, channels[k], env) / env.norm_sq;
        if (std::abs(v.imag()) > 1e-9)
            throw std::runtime_error("observable expectation has an imaginary part");
        double x = v.real();
        if (std::abs(x) > 1.0) {
            if (std::abs(x) > 1.0 + 1e-9)
                throw std::runtime_error("Pauli expectation overshoots [-1,1]");
            x = std::clamp(x, -1.0, 1.0);
        }
        out[k] = x;
    }
    return out;
}

} // namespace detail

/// Edge energies <P_<j> P_<k>> for the listed edges, batched over one pair
/// of environment sweeps. Values are clamped to [-1, 1] after checking the
/// overshoot stays below 1e-9.
inline std::vector<double> edge_energies(const Mps& psi, const PauliAssignment& a,
                                         const std::vector<std::pair<int, int>>& edges) {
    std::vector<MpoChannel> channels;
    channels.reserve(edges.size());
    for (const auto& [j, k] : edges) {
        if (j < 0 || j >= a.num_nodes() || k < 0 || k >= a.num_nodes())
            throw std::out_of_range("edge references a node missing from the assignment");
        channels.push_back({1.0,
                            {{a.qubit[static_cast<std::size_t>(j)], a.pauli[static_cast<std::size_t>(j)]},
                             {a.qubit[static_cast<std::size_t>(k)], a.pauli[static_cast<std::size_t>(k)]}}});
    }
    return detail::pair_expectations(psi, std::move(channels));
}

/// Site expectations tr(P_<j> rho) for every node, batched in one sweep.
inline std::vector<double> site_expectations(const Mps& psi, const PauliAssignment& a) {
    std::vector<MpoChannel> channels;
    channels.reserve(static_cast<std::size_t>(a.num_nodes()));
    for (int j = 0; j < a.num_nodes(); ++j)
        channels.push_back({1.0, {{a.qubit[static_cast<std::size_t>(j)],
                                   a.pauli[static_cast<std::size_t>(j)]}}});
    return detail::pair_expectations(psi, std::move(channels));
}

} // namespace rqrao
