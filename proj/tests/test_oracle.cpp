#include <doctest.h>

#include <cmath>

#include "rqrao/generate.hpp"
#include "rqrao/oracle.hpp"
#include "rqrao/tensornet.hpp"

using namespace rqrao;

TEST_SUITE_BEGIN("oracle");

namespace {

PauliAssignment random_assignment(int num_nodes, int m, int num_qubits, Rng& rng) {
    // assignment for an edgeless helper graph: nodes spread over num_qubits
    Graph g(num_nodes, {});
    while (true) {
        PauliAssignment a = assign_paulis(g, m, rng);
        if (a.num_qubits <= num_qubits) {
            a.num_qubits = num_qubits;
            return a;
        }
    }
}

} // namespace

TEST_CASE("magic distribution basics") {
    SUBCASE("m=1 basis states are point masses") {
        VectorXcd v = VectorXcd::Zero(8);
        v(5) = 1.0;  // |101>
        MagicDistribution d = magic_distribution(DenseState::pure(v), 1);
        CHECK(d.probs[5] == doctest::Approx(1.0));
        double sum = 0;
        for (double p : d.probs) sum += p;
        CHECK(sum == doctest::Approx(1.0));
    }
    SUBCASE("maximally mixed state is uniform for every m") {
        for (int m = 1; m <= 3; ++m) {
            MagicDistribution d = magic_distribution(DenseState::maximally_mixed(2), m);
            for (double p : d.probs)
                CHECK(p == doctest::Approx(1.0 / static_cast<double>(d.probs.size())).epsilon(1e-10));
        }
    }
    SUBCASE("single-qubit magic state peaks at its own bits") {
        Matrix2cd rho = magic_density_1q(3, {1, 0, 1});
        MagicDistribution d = magic_distribution(DenseState::density(rho), 3);
        std::size_t argmax = 0;
        for (std::size_t b = 0; b < d.probs.size(); ++b)
            if (d.probs[b] > d.probs[argmax]) argmax = b;
        CHECK(argmax == 0b101);
    }
    SUBCASE("total fidelity equals 2^{(m-1)n}") {
        Rng rng(3);
        DenseState s = DenseState::haar_random(3, rng);
        for (int m = 1; m <= 3; ++m) {
            MagicDistribution d = magic_distribution(s, m);
            CHECK(d.total_fidelity ==
                  doctest::Approx(std::pow(2.0, (m - 1) * 3)).epsilon(1e-10));
        }
    }
    SUBCASE("enumeration bound is enforced") {
        Rng rng(4);
        CHECK_THROWS_AS(magic_distribution(DenseState::haar_random(8, rng), 3),
                        std::invalid_argument);
    }
}

TEST_CASE("k-local sign-moment identity on random states") {
    Rng rng(11);
    for (int m = 1; m <= 3; ++m) {
        for (int trial = 0; trial < 20; ++trial) {
            int n = 1 + static_cast<int>(rng.index(3));
            DenseState rho = trial % 2 ? DenseState::haar_random(n, rng)
                                       : DenseState::maximally_mixed(std::min(n, 2));
            n = rho.num_qubits();
            int k = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
            std::vector<std::pair<int, Pauli>> obs;
            std::vector<int> qubits(static_cast<std::size_t>(n));
            std::iota(qubits.begin(), qubits.end(), 0);
            std::shuffle(qubits.begin(), qubits.end(), rng.engine());
            const auto& alphabet = active_paulis(m);
            for (int i = 0; i < k; ++i)
                obs.push_back({qubits[static_cast<std::size_t>(i)],
                               alphabet[rng.index(alphabet.size())]});
            IdentityCheck c = verify_klocal_moment(rho, m, obs);
            CHECK(c.gap < 1e-9);
        }
    }
}

TEST_CASE("sign moments of magic states reproduce the 1-local trace") {
    for (int m = 1; m <= 3; ++m) {
        const auto& alphabet = active_paulis(m);
        for (std::uint64_t bits = 0; bits < (1ull << m); ++bits) {
            std::vector<std::uint8_t> tuple(static_cast<std::size_t>(m));
            for (int s = 0; s < m; ++s) tuple[static_cast<std::size_t>(s)] = (bits >> s) & 1;
            DenseState rho = DenseState::density(magic_density_1q(m, tuple));
            for (std::size_t s = 0; s < alphabet.size(); ++s) {
                IdentityCheck c = verify_klocal_moment(rho, m, {{0, alphabet[s]}});
                CHECK(c.gap < 1e-9);
                double expect = (tuple[s] ? -1.0 : 1.0) / std::sqrt(static_cast<double>(m));
                CHECK(c.lhs == doctest::Approx(expect).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("cut moments match the closed forms") {
    Rng rng(21);
    for (int m = 1; m <= 3; ++m) {
        for (int trial = 0; trial < 10; ++trial) {
            Graph g = generate({GraphKind::Random, 5, 0.6, 0, static_cast<std::uint64_t>(600 + trial)});
            PauliAssignment a = assign_paulis(g, m, rng);
            if (a.num_qubits * m > kEnumerationBitLimit || a.num_qubits > 6) continue;
            DenseState rho = DenseState::haar_random(a.num_qubits, rng);
            CHECK(std::abs(expected_cut(rho, g, a) - expected_cut_closed_form(rho, g, a)) < 1e-9);
            // the exact variance route from pairwise shot moments
            CHECK(std::abs(cut_variance(rho, g, a) - cut_variance_moment_form(rho, g, a)) < 1e-9);
            // the quantum-variance shortcut is exact only at m = 1
            if (m == 1)
                CHECK(std::abs(cut_variance(rho, g, a) - cut_variance_closed_form(rho, g, a)) <
                      1e-9);
        }
    }
}

TEST_CASE("variance shortcut diverges from the true variance beyond m = 1") {
    // single edge, m = 2, |00>: the cut is a fair Bernoulli coin, variance
    // 1/4, while the quantum-variance shortcut yields 1/16
    Graph pair(2, {{0, 1, 1}});
    PauliAssignment a;
    a.m = 2;
    a.num_qubits = 2;
    a.qubit = {0, 1};
    a.pauli = {Pauli::X, Pauli::Z};
    VectorXcd v = VectorXcd::Zero(4);
    v(0) = 1.0;
    DenseState rho = DenseState::pure(v);
    CHECK(cut_variance(rho, pair, a) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(cut_variance_moment_form(rho, pair, a) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(cut_variance_closed_form(rho, pair, a) == doctest::Approx(1.0 / 16).epsilon(1e-12));
}

TEST_CASE("variance shortcut vanishes on eigenstates") {
    Rng rng(71);
    for (int m = 1; m <= 3; ++m) {
        Graph g = generate({GraphKind::Random, 4, 0.7, 0, static_cast<std::uint64_t>(660 + m)});
        PauliAssignment a = assign_paulis(g, m, rng);
        if (a.num_qubits > 5) continue;
        MatrixXcd h = dense_hamiltonian(build_terms(g, a), a.num_qubits);
        DenseState rho = max_eigenstate(h);
        // tr(H^2) = tr(H)^2 on any eigenstate, so the shortcut reports zero
        CHECK(std::abs(cut_variance_closed_form(rho, g, a)) < 1e-9);
    }
}

TEST_CASE("expected cut is a point mass at m=1 basis states") {
    Rng rng(31);
    Graph g = generate({GraphKind::Random, 5, 0.6, 0, 640});
    PauliAssignment a = assign_paulis(g, 1, rng);
    BitString b(5);
    for (auto& x : b) x = rng.coin();
    // basis state embedding the bits through the assignment
    VectorXcd v = VectorXcd::Zero(Eigen::Index(1) << a.num_qubits);
    std::uint64_t basis = 0;
    for (int j = 0; j < 5; ++j)
        if (b[static_cast<std::size_t>(j)]) basis |= 1ull << a.qubit[static_cast<std::size_t>(j)];
    v(static_cast<Eigen::Index>(basis)) = 1.0;
    DenseState rho = DenseState::pure(v);
    CHECK(expected_cut(rho, g, a) == doctest::Approx(cut_weight(g, b)).epsilon(1e-10));
    CHECK(cut_variance(rho, g, a) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("bit and pair probabilities") {
    Rng rng(41);
    for (int m = 1; m <= 3; ++m) {
        for (int trial = 0; trial < 10; ++trial) {
            int n = m == 1 ? 3 : 2;
            PauliAssignment a = random_assignment(m == 1 ? 3 : 4, m, n, rng);
            DenseState rho = DenseState::haar_random(n, rng);
            for (int j = 0; j < a.num_nodes(); ++j)
                for (int k = j + 1; k < a.num_nodes(); ++k) {
                    PairProbabilities pp = pair_probabilities(rho, a, j, k);
                    double ej = rho.expect_paulis({{a.qubit[static_cast<std::size_t>(j)],
                                                    a.pauli[static_cast<std::size_t>(j)]}})
                                    .real();
                    double ek = rho.expect_paulis({{a.qubit[static_cast<std::size_t>(k)],
                                                    a.pauli[static_cast<std::size_t>(k)]}})
                                    .real();
                    double root_m = std::sqrt(static_cast<double>(m));
                    CHECK(std::abs(pp.p_j_zero - (0.5 + ej / (2 * root_m))) < 1e-9);
                    if (a.qubit[static_cast<std::size_t>(j)] ==
                        a.qubit[static_cast<std::size_t>(k)]) {
                        // within one shot the shared-qubit parity is a fair
                        // coin regardless of the state
                        CHECK(std::abs(pp.p_equal - 0.5) < 1e-9);
                        // while independently decoded bits follow the
                        // product form
                        double indep = pair_equal_closed_form(rho, a, j, k, true);
                        CHECK(indep ==
                              doctest::Approx(0.5 + ej * ek / (2.0 * m)).epsilon(1e-12));
                    } else {
                        CHECK(std::abs(pp.p_equal - pair_equal_closed_form(rho, a, j, k)) < 1e-9);
                    }
                }
        }
    }
    SUBCASE("unit-energy sites decode at the QRAC bound") {
        // magic product state: every |E_j| = 1/sqrt(m) scaled out by design;
        // use a basis state at m=1 where E_j = +-1 exactly
        PauliAssignment a = random_assignment(2, 1, 2, rng);
        VectorXcd v = VectorXcd::Zero(4);
        v(2) = 1.0;
        DenseState rho = DenseState::pure(v);
        PairProbabilities pp = pair_probabilities(rho, a, 0, 1);
        CHECK((pp.p_j_zero == doctest::Approx(0.0) || pp.p_j_zero == doctest::Approx(1.0)));
    }
    SUBCASE("maximally mixed state decodes at chance") {
        PauliAssignment a = random_assignment(4, 2, 2, rng);
        DenseState rho = DenseState::maximally_mixed(2);
        for (int j = 0; j < 4; ++j)
            for (int k = j + 1; k < 4; ++k) {
                PairProbabilities pp = pair_probabilities(rho, a, j, k);
                CHECK(pp.p_j_zero == doctest::Approx(0.5).epsilon(1e-10));
                CHECK(pp.p_equal == doctest::Approx(0.5).epsilon(1e-10));
            }
    }
}

TEST_CASE("magic channel identity") {
    // averaging magic projections reproduces tr(P E(rho)) = m^{-k} tr(P rho)
    Rng rng(51);
    for (int m = 1; m <= 3; ++m) {
        const auto& alphabet = active_paulis(m);
        for (int trial = 0; trial < 10; ++trial) {
            int n = 1 + static_cast<int>(rng.index(2));
            DenseState rho = DenseState::haar_random(n, rng);
            MagicDistribution dist = magic_distribution(rho, m);
            int k = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
            std::vector<std::pair<int, Pauli>> obs;
            for (int i = 0; i < k; ++i)
                obs.push_back({i, alphabet[rng.index(alphabet.size())]});
            // tr(P E(rho)) by enumeration over embeddings
            double lhs = 0;
            for (std::size_t b = 0; b < dist.probs.size(); ++b) {
                double f = dist.probs[b] * dist.total_fidelity;  // raw fidelity
                double tr_p_mu = 1.0;
                for (const auto& [q, p] : obs) {
                    std::size_t group =
                        (b >> (static_cast<std::size_t>(q) * static_cast<std::size_t>(m))) &
                        ((std::size_t(1) << m) - 1);
                    int bit = static_cast<int>((group >> pauli_slot(m, p)) & 1u);
                    tr_p_mu *= (bit ? -1.0 : 1.0) / std::sqrt(static_cast<double>(m));
                }
                lhs += f * tr_p_mu;
            }
            lhs /= std::pow(2.0, (m - 1) * n);
            double rhs = rho.expect_paulis(obs).real() /
                         std::pow(static_cast<double>(m), static_cast<double>(k));
            CHECK(std::abs(lhs - rhs) < 1e-9);
        }
    }
}

TEST_CASE("brute force maxcut") {
    SUBCASE("even cycles cut fully") {
        std::vector<Edge> cyc;
        for (int i = 0; i < 8; ++i) cyc.push_back({i, (i + 1) % 8, 1});
        BruteForceResult r = brute_force_maxcut(Graph(8, cyc));
        CHECK(r.weight == doctest::Approx(8.0));
        CHECK(r.bits[0] == 0);
    }
    SUBCASE("triangle cuts two edges") {
        BruteForceResult r = brute_force_maxcut(Graph(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}));
        CHECK(r.weight == doctest::Approx(2.0));
        CHECK(r.num_optima == 3);
    }
    SUBCASE("parallel and serial agree") {
        Graph g = generate({GraphKind::Random, 16, 0.4, 0, 777});
        BruteForceResult a = brute_force_maxcut(g, 1);
        BruteForceResult b = brute_force_maxcut(g, 4);
        CHECK(a.weight == doctest::Approx(b.weight));
        CHECK(a.bits == b.bits);
        CHECK(a.num_optima == b.num_optima);
    }
    SUBCASE("node bound enforced") {
        CHECK_THROWS_AS(brute_force_maxcut(Graph(27, {})), std::invalid_argument);
    }
}

TEST_CASE("empty-observable sign moment is the normalization") {
    Rng rng(81);
    DenseState rho = DenseState::haar_random(2, rng);
    IdentityCheck c = verify_klocal_moment(rho, 3, {});
    CHECK(c.lhs == doctest::Approx(1.0));
    CHECK(c.rhs == doctest::Approx(1.0));
    CHECK(c.gap < 1e-12);
}

TEST_CASE("dense from mps") {
    SUBCASE("four-qubit chi=2 contraction equals direct matrix products") {
        Rng rng(83);
        Mps psi = init_mps(4, 2, rng);
        const VectorXcd v = dense_from_mps(psi).amplitudes();
        double norm = std::sqrt(detail::mps_norm_sq(psi));
        for (int b3 = 0; b3 < 2; ++b3)
            for (int b2 = 0; b2 < 2; ++b2)
                for (int b1 = 0; b1 < 2; ++b1)
                    for (int b0 = 0; b0 < 2; ++b0) {
                        MatrixXcd amp = psi.site(3).m[static_cast<std::size_t>(b3)] *
                                        psi.site(2).m[static_cast<std::size_t>(b2)] *
                                        psi.site(1).m[static_cast<std::size_t>(b1)] *
                                        psi.site(0).m[static_cast<std::size_t>(b0)];
                        Eigen::Index idx = b0 + 2 * b1 + 4 * b2 + 8 * b3;
                        CHECK(std::abs(v(idx) - amp(0, 0) / norm) < 1e-12);
                    }
    }
    SUBCASE("product states kron together") {
        std::vector<Vector2cd> locals{Vector2cd(1, 0), Vector2cd(0, 1),
                                      Vector2cd(1 / std::sqrt(2.0), 1 / std::sqrt(2.0))};
        // qubit 0 = |0>, qubit 1 = |1>, qubit 2 = |+>
        DenseState s = dense_from_mps(product_mps(locals));
        const VectorXcd& v = s.amplitudes();
        CHECK(std::abs(v(2) - 1 / std::sqrt(2.0)) < 1e-12);  // |010>
        CHECK(std::abs(v(6) - 1 / std::sqrt(2.0)) < 1e-12);  // |110>
    }
    SUBCASE("norm is one after conversion") {
        Rng rng(6);
        Mps psi = init_mps(7, 3, rng);
        DenseState s = dense_from_mps(psi);
        CHECK(s.amplitudes().norm() == doctest::Approx(1.0));
    }
}

TEST_CASE("max probability decode matches enumeration") {
    Rng rng(61);
    for (int m = 1; m <= 3; ++m) {
        for (int trial = 0; trial < 8; ++trial) {
            int n = 2 + static_cast<int>(rng.index(2));
            if (m * n > 12) n = 12 / m;
            DenseState rho = DenseState::haar_random(n, rng);
            PauliAssignment a = random_assignment(m * n, m, n, rng);
            MagicDistribution dist = magic_distribution(rho, m);
            // exhaustive argmax of P(b) + P(flip b)
            std::size_t best = 0;
            double best_p = -1;
            std::size_t full = dist.probs.size() - 1;
            for (std::size_t b = 0; b < dist.probs.size(); ++b) {
                double p = dist.probs[b] + dist.probs[b ^ full];
                if (p > best_p) {
                    best_p = p;
                    best = b;
                }
            }
            DecodeResult got = max_probability_decode(rho, a);
            CHECK(got.fidelity_sum ==
                  doctest::Approx(best_p * dist.total_fidelity).epsilon(1e-9));
            double got_p = dist.probs[got.embedding] + dist.probs[got.embedding ^ full];
            CHECK(got_p == doctest::Approx(best_p).epsilon(1e-9));
            CHECK(node_bits_from_embedding(best, a).size() == got.bits.size());
        }
    }
}

TEST_SUITE_END();
