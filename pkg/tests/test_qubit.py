"""Tests for the exact qubit algebra: Bell machinery, twirl, error
functionals, and the Holevo oracle."""

import itertools
import math

import numpy as np
import pytest

from strqkd import qubit

RNG = np.random.default_rng(20240819)


def kron(*vs):
    out = vs[0]
    for v in vs[1:]:
        out = np.kron(out, v)
    return out


def same_up_to_phase(v, w, tol=1e-12):
    overlap = abs(np.vdot(v, w))
    return abs(overlap - np.linalg.norm(v) * np.linalg.norm(w)) < tol


class TestPauli:
    def test_identity(self):
        assert np.allclose(qubit.pauli(0, 0), np.eye(2))

    def test_bit_flip(self):
        assert np.allclose(qubit.pauli(1, 0), [[0, 1], [1, 0]])

    def test_phase_flip(self):
        assert np.allclose(qubit.pauli(0, 1), [[1, 0], [0, -1]])

    def test_unitarity(self):
        for r, s in itertools.product((0, 1), repeat=2):
            u = qubit.pauli(r, s)
            assert np.allclose(u @ u.conj().T, np.eye(2))

    def test_bit_flip_permutes_z_signal_states(self):
        x_gate = qubit.pauli(1, 0)
        for x in (0, 1):
            assert np.allclose(
                x_gate @ qubit.bb84_vector(0, x), qubit.bb84_vector(0, x ^ 1)
            )


class TestBellStates:
    def test_phi00(self):
        expected = np.array([1, 0, 0, 1]) / math.sqrt(2)
        assert np.allclose(qubit.bell_vector(0, 0), expected)

    def test_phi11_by_hand(self):
        # (1/sqrt 2)[(-1)^0 |1>|0> + (-1)^1 |0>|1>]
        expected = np.array([0, -1, 1, 0]) / math.sqrt(2)
        assert np.allclose(qubit.bell_vector(1, 1), expected)

    def test_orthonormality(self):
        vecs = [qubit.bell_vector(a, b) for a in (0, 1) for b in (0, 1)]
        gram = np.array([[np.vdot(v, w) for w in vecs] for v in vecs])
        assert np.allclose(gram, np.eye(4), atol=1e-14)


class TestBB84States:
    def test_z_basis(self):
        assert np.allclose(qubit.bb84_vector(0, 0), [1, 0])
        assert np.allclose(qubit.bb84_vector(0, 1), [0, 1])

    def test_x_basis(self):
        s = 1 / math.sqrt(2)
        assert np.allclose(qubit.bb84_vector(1, 1), [s, -s])

    def test_projectors_complete(self):
        for u in (0, 1):
            total = qubit.bb84_projector(u, 0) + qubit.bb84_projector(u, 1)
            assert np.allclose(total, np.eye(2))


class TestRotatedBellBasis:
    """Programmatic comparison against the four explicit basis rows."""

    def primed(self, a, b):
        return kron(np.eye(2), qubit.HADAMARD) @ qubit.bell_vector(a, b)

    def test_row_00(self):
        expected = [qubit.bell_vector(a, b) for a, b in ((0, 0), (0, 1), (1, 0), (1, 1))]
        for got, want in zip(qubit.rotated_bell_basis(0, 0), expected):
            assert same_up_to_phase(got, want)

    def test_row_01(self):
        expected = [self.primed(a, b) for a, b in ((0, 0), (0, 1), (1, 0), (1, 1))]
        for got, want in zip(qubit.rotated_bell_basis(0, 1), expected):
            assert same_up_to_phase(got, want)

    def test_row_10(self):
        expected = [self.primed(a, b) for a, b in ((0, 0), (1, 0), (0, 1), (1, 1))]
        for got, want in zip(qubit.rotated_bell_basis(1, 0), expected):
            assert same_up_to_phase(got, want)

    def test_row_11(self):
        expected = [
            qubit.bell_vector(a, b) for a, b in ((0, 0), (1, 0), (0, 1), (1, 1))
        ]
        for got, want in zip(qubit.rotated_bell_basis(1, 1), expected):
            assert same_up_to_phase(got, want)

    def test_all_rows_orthonormal(self):
        for u1, u2 in itertools.product((0, 1), repeat=2):
            vecs = np.column_stack(qubit.rotated_bell_basis(u1, u2))
            assert np.allclose(vecs.conj().T @ vecs, np.eye(4), atol=1e-13)


class TestTwirl:
    def test_maximally_mixed_invariant(self):
        mixed = np.eye(16) / 16
        assert np.allclose(qubit.twirl(mixed), mixed, atol=1e-14)

    def test_diagonal_in_tensored_bell_basis(self):
        basis = qubit.tensored_bell_basis_matrix()
        for _ in range(10):
            rho = qubit.random_density_matrix(16, RNG)
            diag = basis.conj().T @ qubit.twirl(rho) @ basis
            off = diag - np.diag(np.diag(diag))
            assert np.abs(off).max() < 1e-12

    def test_diagonal_matches_bell_diagonal_of_input(self):
        # Independent oracle: direct change of basis of the input.
        basis = qubit.tensored_bell_basis_matrix()
        rho = qubit.random_density_matrix(16, RNG)
        expected = np.diag(basis.conj().T @ rho @ basis)
        got = np.diag(basis.conj().T @ qubit.twirl(rho) @ basis)
        assert np.abs(expected - got).max() < 1e-12

    def test_idempotent(self):
        rho = qubit.random_density_matrix(16, RNG)
        tw = qubit.twirl(rho)
        assert np.abs(qubit.twirl(tw) - tw).max() < 1e-12

    def test_preserves_basis_error_rate(self):
        for _ in range(5):
            rho = qubit.random_density_matrix(16, RNG)
            tw = qubit.twirl(rho)
            for u1, u2 in itertools.product((0, 1), repeat=2):
                assert abs(
                    qubit.basis_error_rate(rho, u1, u2)
                    - qubit.basis_error_rate(tw, u1, u2)
                ) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            qubit.twirl(np.eye(4) / 4)


class TestBellDiagonalStates:
    def test_pure_product(self):
        alpha = np.zeros(16)
        alpha[0] = 1.0
        expected = np.outer(
            kron(qubit.bell_vector(0, 0), qubit.bell_vector(0, 0)),
            kron(qubit.bell_vector(0, 0), qubit.bell_vector(0, 0)).conj(),
        )
        assert np.allclose(qubit.bell_diagonal_to_density(alpha), expected)

    def test_uniform_is_maximally_mixed(self):
        rho = qubit.bell_diagonal_to_density(np.ones(16) / 16)
        assert np.allclose(rho, np.eye(16) / 16, atol=1e-14)

    def test_fixed_point_of_twirl(self):
        alpha = qubit.random_bell_diagonal(RNG)
        rho = qubit.bell_diagonal_to_density(alpha)
        assert np.abs(qubit.twirl(rho) - rho).max() < 1e-12

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            qubit.bell_diagonal_to_density(np.ones(16))


def pair_weights_from_flip(w):
    """Bell weights of a pair with bit-flip probability w: (a, b) lex."""
    return {(0, 0): 1.0 - w, (0, 1): w, (1, 0): 0.0, (1, 1): 0.0}


def enumerate_error_rate(weights1, weights2, u1, u2):
    """Combinatorial oracle for the basis error rate of a Bell-diagonal
    product state: a pair in Phi_{a,b} disagrees with probability b in the
    Z basis and a in the X basis; the end-to-end error is the parity of the
    per-link disagreements."""
    total = 0.0
    for (a1, b1), w1 in weights1.items():
        for (a2, b2), w2 in weights2.items():
            d1 = a1 if u1 else b1
            d2 = a2 if u2 else b2
            total += w1 * w2 * (d1 ^ d2)
    return total


def product_alpha(weights1, weights2):
    alpha = np.zeros((2, 2, 2, 2))
    for (a1, b1), w1 in weights1.items():
        for (a2, b2), w2 in weights2.items():
            alpha[a1, b1, a2, b2] = w1 * w2
    return alpha.reshape(16)


class TestBasisErrorRate:
    def test_perfect_bell_pairs(self):
        alpha = np.zeros(16)
        alpha[0] = 1.0
        rho = qubit.bell_diagonal_to_density(alpha)
        for u1, u2 in itertools.product((0, 1), repeat=2):
            assert qubit.basis_error_rate(rho, u1, u2) == pytest.approx(0.0, abs=1e-13)

    def test_maximally_mixed(self):
        rho = np.eye(16) / 16
        for u1, u2 in itertools.product((0, 1), repeat=2):
            assert qubit.basis_error_rate(rho, u1, u2) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("w1,w2", [(0.05, 0.05), (0.1, 0.02), (0.0, 0.3)])
    def test_flip_weight_compound_value(self, w1, w2):
        weights1 = pair_weights_from_flip(w1)
        weights2 = pair_weights_from_flip(w2)
        rho = qubit.bell_diagonal_to_density(product_alpha(weights1, weights2))
        for u1, u2 in itertools.product((0, 1), repeat=2):
            expected = enumerate_error_rate(weights1, weights2, u1, u2)
            assert qubit.basis_error_rate(rho, u1, u2) == pytest.approx(
                expected, abs=1e-12
            )

    def test_flip_weight_frozen_value(self):
        # Both links flip weight 0.05, Z bases: 2 w (1 - w) = 0.095.
        weights = pair_weights_from_flip(0.05)
        rho = qubit.bell_diagonal_to_density(product_alpha(weights, weights))
        assert qubit.basis_error_rate(rho, 0, 0) == pytest.approx(0.095, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            qubit.basis_error_rate(np.eye(4) / 4, 0, 0)


class TestVonNeumannEntropy:
    def test_pure_state(self):
        assert qubit.von_neumann_entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0)

    def test_maximally_mixed(self):
        for d in (2, 4, 16):
            rho = np.eye(d) / d
            assert qubit.von_neumann_entropy(rho) == pytest.approx(math.log2(d))

    def test_binary_diagonal(self):
        expected = -0.25 * math.log2(0.25) - 0.75 * math.log2(0.75)
        assert qubit.von_neumann_entropy(np.diag([0.25, 0.75])) == pytest.approx(
            expected, abs=1e-12
        )
        assert expected == pytest.approx(0.8113, abs=1e-4)

    def test_rejects_non_psd(self):
        with pytest.raises(ValueError):
            qubit.von_neumann_entropy(np.diag([1.5, -0.5]))


class TestHolevoOracle:
    def test_pure_bell_pairs_decoupled(self):
        alpha = np.zeros(16)
        alpha[0] = 1.0
        for u1, u2 in itertools.product((0, 1), repeat=2):
            assert qubit.holevo_oracle(alpha, u1, u2) == pytest.approx(0.0, abs=1e-9)

    def test_bound_on_random_states(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            alpha = qubit.random_bell_diagonal(rng)
            for u1, u2 in itertools.product((0, 1), repeat=2):
                chi = qubit.holevo_oracle(alpha, u1, u2)
                assert chi <= qubit.holevo_bound(alpha, u1, u2) + 1e-9

    def test_uniform_regression_baseline(self):
        # Frozen from the first verified run; the maximally mixed state gives
        # Eve one full bit for every basis combination.
        alpha = np.ones(16) / 16
        for u1, u2 in itertools.product((0, 1), repeat=2):
            assert qubit.holevo_oracle(alpha, u1, u2) == pytest.approx(1.0, abs=1e-9)

    def test_phase_flip_family_saturates_bound(self):
        # Rank-2 family: weight w on a phase flip in the first link.  Eve's
        # information about the Z key is exactly the phase-error entropy.
        for w in (0.01, 0.1, 0.3):
            alpha = np.zeros((2, 2, 2, 2))
            alpha[0, 0, 0, 0] = 1.0 - w
            alpha[1, 0, 0, 0] = w
            chi = qubit.holevo_oracle(alpha.reshape(16), 0, 0)
            bound = qubit.holevo_bound(alpha.reshape(16), 0, 0)
            h_w = -w * math.log2(w) - (1 - w) * math.log2(1 - w)
            assert chi == pytest.approx(h_w, abs=1e-9)
            assert bound - chi < 1e-3

    def test_relabeling_symmetry_of_conditional_states(self):
        alpha = qubit.random_bell_diagonal(RNG)
        for u1, u2, a, b in itertools.product((0, 1), repeat=4):
            p, rho = qubit.conditional_end_user_state(alpha, u1, u2, a, b)
            p2, rho2 = qubit.conditional_end_user_state(alpha, u1 ^ 1, u2 ^ 1, b, a)
            assert p == pytest.approx(p2, abs=1e-12)
            assert np.abs(rho - rho2).max() < 1e-12

    def test_bound_never_exceeds_observed_entropy_bound(self):
        # End-to-end consistency: chi at (u1, u2) stays below the binary
        # entropy of the complementary-basis observed error rate.
        from strqkd.keyrate import binary_entropy

        rng = np.random.default_rng(11)
        for _ in range(10):
            alpha = qubit.random_bell_diagonal(rng)
            rho = qubit.bell_diagonal_to_density(alpha)
            for u1, u2 in itertools.product((0, 1), repeat=2):
                chi = qubit.holevo_oracle(alpha, u1, u2)
                e_comp = qubit.basis_error_rate(rho, u1 ^ 1, u2 ^ 1)
                assert chi <= binary_entropy(min(e_comp, 1.0)) + 1e-9
