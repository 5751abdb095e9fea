"""Brute-force reference implementations used only by the tests.

Nothing here imports the package's mapping, Slater-Condon or simulation
code; the constructions work directly on occupation-number vectors and
Kronecker products of 2x2 Pauli matrices.
"""

from functools import reduce
from itertools import combinations, product

import numpy as np
import scipy.linalg

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(label):
    """Dense matrix of a label written with qubit 0 rightmost."""
    return reduce(np.kron, [PAULI[c] for c in label])


def dense_from_labels(n_qubits, identity, terms):
    m = identity * np.eye(1 << n_qubits, dtype=complex)
    for c, label in terms:
        m = m + c * pauli_matrix(label)
    return m


def pauli_decompose(matrix):
    """All nonzero ``Tr(P M) / 2^n`` coefficients, keyed by label."""
    dim = matrix.shape[0]
    n = dim.bit_length() - 1
    out = {}
    for chars in product("IXYZ", repeat=n):
        label = "".join(chars)
        c = np.trace(pauli_matrix(label) @ matrix) / dim
        if abs(c) > 1e-13:
            out[label] = c
    return out


def _annihilate(bits, j):
    if not bits >> j & 1:
        return None, 0
    sign = -1 if bin(bits & ((1 << j) - 1)).count("1") % 2 else 1
    return bits ^ (1 << j), sign


def _create(bits, j):
    if bits >> j & 1:
        return None, 0
    sign = -1 if bin(bits & ((1 << j) - 1)).count("1") % 2 else 1
    return bits | (1 << j), sign


def apply_string(ops, bits):
    """Apply ``[(kind, mode), ...]`` right to left; kind is '+' or '-'."""
    sign = 1
    for kind, j in reversed(ops):
        bits, s = (_create if kind == "+" else _annihilate)(bits, j)
        if bits is None:
            return None, 0
        sign *= s
    return bits, sign


def fock_hamiltonian(ham):
    """Second-quantized H on all ``2^(2n)`` occupation states (alpha modes then beta)."""
    n = ham.n_orbitals
    nm = 2 * n
    dim = 1 << nm
    H = ham.core_energy * np.eye(dim)
    h, g = ham.one_body, ham.two_body
    strings = []
    for p, q in product(range(n), repeat=2):
        if h[p, q] != 0:
            for s in (0, 1):
                strings.append((h[p, q], [("+", p + s * n), ("-", q + s * n)]))
    for p, q, r, t in product(range(n), repeat=4):
        v = g[p, q, r, t]
        if v == 0:
            continue
        for s1, s2 in product((0, 1), repeat=2):
            strings.append((0.5 * v, [("+", p + s1 * n), ("+", r + s2 * n), ("-", t + s2 * n), ("-", q + s1 * n)]))
    for b in range(dim):
        for coeff, ops in strings:
            out, sign = apply_string(ops, b)
            if out is not None:
                H[out, b] += coeff * sign
    return H


def sector_indices(n, n_alpha, n_beta):
    mask = (1 << n) - 1
    return [b for b in range(1 << (2 * n)) if bin(b & mask).count("1") == n_alpha and bin(b >> n).count("1") == n_beta]


def annihilation_matrix(n_modes, j):
    dim = 1 << n_modes
    A = np.zeros((dim, dim))
    for b in range(dim):
        out, s = _annihilate(b, j)
        if out is not None:
            A[out, b] = s
    return A


def sector_ground_state(fock, n, n_alpha, n_beta):
    """Lowest eigenpair of the Fock matrix restricted to one sector, embedded in Fock space."""
    idx = sector_indices(n, n_alpha, n_beta)
    w, v = np.linalg.eigh(fock[np.ix_(idx, idx)])
    full = np.zeros(fock.shape[0])
    full[idx] = v[:, 0]
    return w[0], full


def exact_qdrift_channel(terms, lam, rho, t, n_samples):
    """Infinite-realization qDRIFT channel as a superoperator power.

    ``terms`` is a list of ``(coefficient, label)``.
    """
    tau = t * lam / n_samples
    total = sum(abs(c) for c, _ in terms)
    dim = rho.shape[0]
    S = np.zeros((dim * dim, dim * dim), dtype=complex)
    for c, label in terms:
        U = scipy.linalg.expm(-1j * np.sign(c) * tau * pauli_matrix(label))
        S += (abs(c) / total) * np.kron(U, U.conj())
    vec = np.linalg.matrix_power(S, n_samples) @ rho.reshape(-1)
    return vec.reshape(dim, dim)


def cisd_space(n, n_alpha, n_beta):
    """All (alpha, beta) strings within excitation degree 2 of the lowest-filling reference."""
    ra, rb = (1 << n_alpha) - 1, (1 << n_beta) - 1
    out = set()
    for a in combinations(range(n), n_alpha):
        for b in combinations(range(n), n_beta):
            A = sum(1 << i for i in a)
            B = sum(1 << i for i in b)
            if (bin(A ^ ra).count("1") + bin(B ^ rb).count("1")) // 2 <= 2:
                out.add((A, B))
    return out
