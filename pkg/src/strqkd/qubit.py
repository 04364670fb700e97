"""Exact finite-dimensional qubit algebra for the relay security analysis.

Everything here is dense, exact linear algebra on at most four qubits plus a
16-dimensional purifying register: BB84 signal states, Bell states and their
basis-rotated variants, the correlated-Pauli twirl that projects a four-qubit
state onto the Bell-diagonal family, basis-dependent error-rate functionals,
and a numerical Holevo oracle that certifies the entropic bound used by the
key-rate formulas.

Qubit ordering throughout is (A, T, T', B): Alice's half of the first link,
the node's receive and send halves, Bob's half of the second link.  All
functions are pure; logs are base 2.
"""

from __future__ import annotations

import itertools

import numpy as np

from .keyrate import binary_entropy

__all__ = [
    "Z_BASIS",
    "X_BASIS",
    "pauli",
    "bell_vector",
    "bell_state",
    "bb84_vector",
    "bb84_projector",
    "rotated_bell_basis",
    "twirl",
    "bell_diagonal_to_density",
    "tensored_bell_basis_matrix",
    "basis_error_rate",
    "von_neumann_entropy",
    "bell_announcement_stats",
    "holevo_oracle",
    "holevo_bound",
    "random_density_matrix",
    "random_bell_diagonal",
    "check_density_matrix",
]

Z_BASIS = 0
X_BASIS = 1

# Tolerances for density-matrix validation and eigenvalue clamping.
TRACE_TOL = 1e-10
HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-10

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def pauli(r: int, s: int) -> np.ndarray:
    """Pauli unitary U_{r,s} = sum_k (-1)^{ks} |k+r><k| (addition mod 2)."""
    out = np.zeros((2, 2), dtype=complex)
    for k in (0, 1):
        out[k ^ r, k] = (-1.0) ** (k * s)
    return out


def bell_vector(a: int, b: int) -> np.ndarray:
    """Bell state |Phi_{a,b}> = (1/sqrt 2) sum_k (-1)^{ak} |k+b>|k>."""
    out = np.zeros(4, dtype=complex)
    for k in (0, 1):
        out[2 * (k ^ b) + k] = (-1.0) ** (a * k)
    return out / np.sqrt(2.0)


def bell_state(a: int, b: int) -> np.ndarray:
    """Rank-1 projector onto |Phi_{a,b}>."""
    v = bell_vector(a, b)
    return np.outer(v, v.conj())


def bb84_vector(u: int, x: int) -> np.ndarray:
    """BB84 signal state |phi^u_x>: computational for u=0, Hadamard-rotated
    for u=1."""
    ket = np.zeros(2, dtype=complex)
    ket[x] = 1.0
    if u:
        ket = HADAMARD @ ket
    return ket


def bb84_projector(u: int, x: int) -> np.ndarray:
    """Measurement (POVM) element M^u_x, the projector onto |phi^u_x>."""
    v = bb84_vector(u, x)
    return np.outer(v, v.conj())


def rotated_bell_basis(u1: int, u2: int) -> list[np.ndarray]:
    """The four vectors H^{u1} x H^{u2} |Phi_{a,b}>, (a, b) in lex order.

    For u1 = u2 this is a permutation of the Bell states; for u1 != u2 it is
    a permutation of (1 x H)|Phi_{a,b}>, matching the node's measurement when
    its two links use bases (u1, u2).
    """
    h1 = np.linalg.matrix_power(HADAMARD, u1)
    h2 = np.linalg.matrix_power(HADAMARD, u2)
    rot = np.kron(h1, h2)
    return [rot @ bell_vector(a, b) for a in (0, 1) for b in (0, 1)]


def _multi_kron(*mats: np.ndarray) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _twirl_unitaries() -> list[np.ndarray]:
    units = []
    for r, s, rp, sp in itertools.product((0, 1), repeat=4):
        u_first = pauli(r, s)
        u_second = pauli(rp, sp)
        units.append(_multi_kron(u_first, u_first, u_second, u_second))
    return units


_TWIRL_UNITARIES = _twirl_unitaries()


def tensored_bell_basis_matrix() -> np.ndarray:
    """Unitary whose columns are |Phi_{a,b}>_{A,T} x |Phi_{a',b'}>_{T',B},
    (a, b, a', b') in lex order."""
    bell4 = np.column_stack([bell_vector(a, b) for a in (0, 1) for b in (0, 1)])
    return np.kron(bell4, bell4)


_BELL_BASIS_16 = tensored_bell_basis_matrix()


def twirl(rho: np.ndarray) -> np.ndarray:
    """Average rho over correlated Pauli conjugations in both links.

    The result is diagonal in the tensored Bell basis with the same
    Bell-basis diagonal as the input.
    """
    if rho.shape != (16, 16):
        raise ValueError(f"twirl expects a 16x16 matrix, got shape {rho.shape}")
    out = np.zeros_like(rho, dtype=complex)
    for u in _TWIRL_UNITARIES:
        out += u @ rho @ u.conj().T
    return out / len(_TWIRL_UNITARIES)


def _as_alpha(alpha) -> np.ndarray:
    arr = np.asarray(alpha, dtype=float).reshape(-1)
    if arr.size != 16:
        raise ValueError(f"Bell-diagonal weights must have 16 entries, got {arr.size}")
    if arr.min() < -1e-12:
        raise ValueError("Bell-diagonal weights must be non-negative")
    if abs(arr.sum() - 1.0) > 1e-12:
        raise ValueError(f"Bell-diagonal weights must sum to 1, got {arr.sum()}")
    return np.clip(arr, 0.0, None)


def bell_diagonal_to_density(alpha) -> np.ndarray:
    """Four-qubit state sum alpha_{a,b,a',b'} |Phi_{a,b}><Phi_{a,b}| x
    |Phi_{a',b'}><Phi_{a',b'}|; a fixed point of the twirl.

    ``alpha`` is 16 non-negative weights in (a, b, a', b') lex order.
    """
    arr = _as_alpha(alpha)
    return (_BELL_BASIS_16 * arr) @ _BELL_BASIS_16.conj().T


def check_density_matrix(rho: np.ndarray) -> None:
    """Raise ValueError unless rho is a valid density matrix."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if abs(np.trace(rho) - 1.0) > TRACE_TOL:
        raise ValueError(f"trace must be 1, got {np.trace(rho)}")
    if np.abs(rho - rho.conj().T).max() > HERMITICITY_TOL:
        raise ValueError("matrix is not Hermitian within tolerance")
    if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
        raise ValueError("matrix is not positive semidefinite within tolerance")


def basis_error_rate(rho: np.ndarray, u1: int, u2: int) -> float:
    """Error rate between Alice's bit and Bob's parity-corrected bit.

    A and T are measured in basis u1, T' and B in basis u2; the node
    announces b = t + t', Bob corrects y -> y + b, and an error is any
    outcome quadruple with x + y + t + t' odd (all sums mod 2).
    """
    if rho.shape != (16, 16):
        raise ValueError(f"expected a 16x16 matrix, got shape {rho.shape}")
    total = 0.0
    for x, t, tp, y in itertools.product((0, 1), repeat=4):
        if (x ^ t ^ tp ^ y) != 1:
            continue
        v = _multi_kron(
            bb84_vector(u1, x),
            bb84_vector(u1, t),
            bb84_vector(u2, tp),
            bb84_vector(u2, y),
        )
        total += float(np.real(v.conj() @ rho @ v))
    return min(max(total, 0.0), 1.0)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -sum_i lambda_i log2 lambda_i, with 0 log 0 = 0.

    Eigenvalues in [-PSD_TOL, 0) are clamped to zero; anything more negative
    is rejected.
    """
    eigvals = np.linalg.eigvalsh(rho)
    if eigvals.min() < -PSD_TOL:
        raise ValueError(f"matrix is not PSD: min eigenvalue {eigvals.min()}")
    eigvals = np.clip(eigvals, 0.0, None)
    nonzero = eigvals[eigvals > 0.0]
    return float(-(nonzero * np.log2(nonzero)).sum())


def _entropy_of_eigvals(eigvals: np.ndarray) -> float:
    eigvals = np.clip(eigvals, 0.0, None)
    nonzero = eigvals[eigvals > 1e-300]
    return float(-(nonzero * np.log2(nonzero)).sum())


def _purification_tensor(alpha) -> np.ndarray:
    # |Psi> = sum_i sqrt(lambda_i) |i>_{ATB} |i>_E with E of dimension 16;
    # for a Bell-diagonal state the eigenvectors are the tensored Bell basis.
    arr = _as_alpha(alpha)
    m = _BELL_BASIS_16 * np.sqrt(arr)
    return m.reshape(2, 2, 2, 2, 16)  # axes: A, T, T', B, E


def bell_announcement_stats(alpha, u1: int, u2: int):
    """Statistics of the node's rotated-Bell measurement on a Bell-diagonal
    state.

    Returns ``(p, e)`` as (2, 2) arrays over the announcement (a, b):
    ``p[a, b]`` is the outcome probability, ``e[a, b]`` the conditional
    error rate between Alice's bit (basis u1) and Bob's b-corrected bit
    (basis u2).
    """
    psi = _purification_tensor(alpha)
    basis = rotated_bell_basis(u1, u2)
    p = np.zeros((2, 2))
    e = np.zeros((2, 2))
    for a in (0, 1):
        for b in (0, 1):
            beta = basis[2 * a + b].reshape(2, 2)
            cond = np.einsum("tu,atube->abe", beta.conj(), psi)
            prob = float(np.real(np.einsum("abe,abe->", cond, cond.conj())))
            p[a, b] = prob
            if prob <= 0.0:
                continue
            err = 0.0
            for x, y in itertools.product((0, 1), repeat=2):
                if (x ^ y ^ b) != 1:
                    continue
                amp = np.einsum(
                    "a,b,abe->e",
                    bb84_vector(u1, x).conj(),
                    bb84_vector(u2, y).conj(),
                    cond,
                )
                err += float(np.real(amp.conj() @ amp))
            e[a, b] = err / prob
    return p, e


def conditional_end_user_state(
    alpha, u1: int, u2: int, a: int, b: int
) -> tuple[float, np.ndarray]:
    """Probability of announcement (a, b) and the conditional state on A, B.

    The node projects its two qubits onto the (a, b) element of the rotated
    Bell basis for (u1, u2).  Conditioned states obey the relabeling
    symmetry: the result at (u1, u2, a, b) equals the one at the
    complementary bases with (a, b) swapped.
    """
    psi = _purification_tensor(alpha)
    beta = rotated_bell_basis(u1, u2)[2 * a + b].reshape(2, 2)
    cond = np.einsum("tu,atube->abe", beta.conj(), psi)
    p_ab = float(np.real(np.einsum("abe,abe->", cond, cond.conj())))
    if p_ab <= 0.0:
        return 0.0, np.zeros((4, 4), dtype=complex)
    flat = cond.reshape(4, 16)
    return p_ab, (flat @ flat.conj().T) / p_ab


def holevo_oracle(alpha, u1: int, u2: int) -> float:
    """Holevo quantity chi(X : E, announcements) for a Bell-diagonal state.

    Eve holds the purifying register of the canonical purification plus the
    classical announcement register carrying the full rotated-Bell outcome
    (a, b); X is Alice's key bit from measuring her qubit in basis u1.
    """
    psi = _purification_tensor(alpha)
    basis = rotated_bell_basis(u1, u2)

    # Joint weights q[x][(a,b)] and (unnormalized) Eve blocks per branch.
    branch: list[dict[tuple[int, int], tuple[float, np.ndarray]]] = [{}, {}]
    uncond: dict[tuple[int, int], tuple[float, np.ndarray]] = {}
    for a in (0, 1):
        for b in (0, 1):
            beta = basis[2 * a + b].reshape(2, 2)
            cond = np.einsum("tu,atube->abe", beta.conj(), psi)  # A, B, E
            p_ab = float(np.real(np.einsum("abe,abe->", cond, cond.conj())))
            if p_ab <= 1e-15:
                continue
            flat = cond.reshape(4, 16)
            uncond[(a, b)] = (p_ab, flat.T @ flat.conj())
            for x in (0, 1):
                amp = np.einsum("a,abe->be", bb84_vector(u1, x).conj(), cond)
                q = float(np.real(np.einsum("be,be->", amp, amp.conj())))
                if q <= 1e-15:
                    continue
                branch[x][(a, b)] = (q, amp.T @ amp.conj())

    def _cq_entropy(blocks: dict) -> float:
        # Entropy of sum_ab p_ab rho_ab x |ab><ab|  =  H({p}) + sum p S(rho).
        total = sum(p for p, _ in blocks.values())
        out = 0.0
        for p, rho_unnorm in blocks.values():
            w = p / total
            out += -w * np.log2(w)
            out += w * _entropy_of_eigvals(np.linalg.eigvalsh(rho_unnorm / p))
        return out

    p_x = [sum(p for p, _ in branch[x].values()) for x in (0, 1)]
    chi = _cq_entropy(uncond)
    for x in (0, 1):
        if p_x[x] > 0.0:
            chi -= p_x[x] * _cq_entropy(branch[x])
    return max(0.0, chi)


def holevo_bound(alpha, u1: int, u2: int) -> float:
    """Entropic upper bound certified by the oracle.

    The announcement-conditioned states at (u1, u2, a, b) coincide with
    those at the complementary bases with (a, b) swapped, so the bound is
    sum_{a,b} p(a,b | u1,u2) h(e(b,a | complementary bases)).
    """
    p, _ = bell_announcement_stats(alpha, u1, u2)
    _, e_comp = bell_announcement_stats(alpha, u1 ^ 1, u2 ^ 1)
    total = 0.0
    for a in (0, 1):
        for b in (0, 1):
            if p[a, b] > 0.0:
                total += p[a, b] * binary_entropy(min(max(e_comp[b, a], 0.0), 1.0))
    return total


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random full-rank density matrix (Ginibre construction)."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_bell_diagonal(rng: np.random.Generator) -> np.ndarray:
    """Random Bell-diagonal weight vector (flat Dirichlet)."""
    return rng.dirichlet(np.ones(16))
