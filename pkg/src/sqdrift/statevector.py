"""Desk-scale statevector simulation: determinants, Pauli rotations, sampling.

Basis index bit ``q`` is qubit ``q``. Under the blocked ordering qubit ``q``
is alpha orbital ``q`` for ``q < n`` and beta orbital ``q - n`` otherwise,
so the basis index of a determinant is ``Determinant.combined(n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import expm_multiply

from .determinant import Determinant
from .errors import ScaleError
from .pauli import PauliHamiltonian, PauliString

MAX_STATEVECTOR_QUBITS = 24
MAX_DENSE_QUBITS = 12

_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(n_qubits: int) -> np.ndarray:
    idx = _INDEX_CACHE.get(n_qubits)
    if idx is None:
        idx = _INDEX_CACHE[n_qubits] = np.arange(1 << n_qubits, dtype=np.int64)
    return idx


class StateVector:
    def __init__(self, n_qubits: int, amplitudes=None):
        if n_qubits > MAX_STATEVECTOR_QUBITS:
            raise ScaleError(f"{n_qubits} qubits exceeds the statevector cap of {MAX_STATEVECTOR_QUBITS}")
        self.n_qubits = n_qubits
        if amplitudes is None:
            amplitudes = np.zeros(1 << n_qubits, dtype=complex)
            amplitudes[0] = 1.0
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != (1 << n_qubits,):
            raise ValueError("amplitude vector has the wrong length")
        self.amplitudes = amplitudes

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits}, norm={self.norm():.12f})"


@dataclass
class SampleSet:
    n_qubits: int
    counts: dict[int, int]
    total_shots: int
    provenance: tuple = field(default=())

    def __post_init__(self):
        if sum(self.counts.values()) != self.total_shots:
            raise ValueError("counts do not sum to total_shots")

    def labelled(self) -> dict[str, int]:
        return {format(b, f"0{self.n_qubits}b"): c for b, c in sorted(self.counts.items())}

    @classmethod
    def merge(cls, sets) -> "SampleSet":
        sets = list(sets)
        counts: dict[int, int] = {}
        for s in sets:
            for b, c in s.counts.items():
                counts[b] = counts.get(b, 0) + c
        n = sets[0].n_qubits if sets else 0
        return cls(n, dict(sorted(counts.items())), sum(s.total_shots for s in sets))


def to_blocked_index(bits: int, n_orbitals: int, ordering: str) -> int:
    """Re-express a basis index from ``ordering`` in the blocked layout."""
    if ordering == "blocked":
        return bits
    out = 0
    for p in range(n_orbitals):
        out |= ((bits >> (2 * p)) & 1) << p
        out |= ((bits >> (2 * p + 1)) & 1) << (n_orbitals + p)
    return out


def from_blocked_index(bits: int, n_orbitals: int, ordering: str) -> int:
    if ordering == "blocked":
        return bits
    out = 0
    for p in range(n_orbitals):
        out |= ((bits >> p) & 1) << (2 * p)
        out |= ((bits >> (n_orbitals + p)) & 1) << (2 * p + 1)
    return out


def prepare_determinant(det: Determinant, n_qubits: int, ordering: str = "blocked") -> StateVector:
    if n_qubits % 2:
        raise ValueError("determinants need an even qubit count")
    n = n_qubits // 2
    if det.alpha >> n or det.beta >> n:
        raise ValueError(f"determinant does not fit in {n_qubits} qubits")
    state = StateVector(n_qubits, np.zeros(1 << n_qubits, dtype=complex))
    state.amplitudes[from_blocked_index(det.combined(n), n, ordering)] = 1.0
    return state


def apply_pauli_rotation(state: StateVector, p: PauliString, theta: float) -> StateVector:
    """In place: ``state <- exp(-i theta P) state = cos(theta) state - i sin(theta) P state``."""
    if p.n_qubits != state.n_qubits:
        raise ValueError(f"Pauli on {p.n_qubits} qubits applied to {state.n_qubits}-qubit state")
    psi = state.amplitudes
    idx = _indices(state.n_qubits)
    c, s = np.cos(theta), np.sin(theta)
    ipow = (p.x & p.z).bit_count() % 4
    if p.x == 0:
        # diagonal: P|b> = (-1)^{|b & z|} |b>
        odd = (np.bitwise_count(idx & p.z) & 1).astype(bool)
        psi *= np.where(odd, c + 1j * s, c - 1j * s)
        return state
    src = idx ^ p.x
    sign = 1.0 - 2.0 * (np.bitwise_count(src & p.z) & 1)
    coeff = -1j * s * (1j) ** ipow
    psi[:] = c * psi + coeff * sign * psi[src]
    return state


def evolve(state: StateVector, seq) -> StateVector:
    """Apply the rotations of a :class:`~sqdrift.qdrift.QDriftSequence` in order."""
    for p, theta in seq.rotations:
        apply_pauli_rotation(state, p, theta)
    return state


def exact_evolve(state: StateVector, h: PauliHamiltonian, t: float) -> StateVector:
    """In place ``state <- exp(-i H t) state`` (truncated Taylor with scaling)."""
    if h.n_qubits != state.n_qubits:
        raise ValueError("Hamiltonian and state qubit counts differ")
    if state.n_qubits > MAX_DENSE_QUBITS:
        raise ScaleError(f"exact evolution is capped at {MAX_DENSE_QUBITS} qubits")
    if t == 0:
        return state
    state.amplitudes[:] = expm_multiply(-1j * t * h.to_sparse(), state.amplitudes)
    return state


def _alias_table(p: np.ndarray):
    k = p.size
    scaled = p * (k / p.sum())
    prob = np.ones(k)
    alias = np.arange(k)
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    while small and large:
        s, l = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] -= 1.0 - scaled[s]
        (small if scaled[l] < 1.0 else large).append(l)
    return prob, alias


def sample_indices(p: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``shots`` indices from the (unnormalized) distribution ``p``.

    Alias sampling over the nonzero support when shots outnumber it,
    inverse-CDF otherwise.
    """
    support = np.flatnonzero(p > 0)
    weights = p[support]
    if shots > support.size:
        prob, alias = _alias_table(weights)
        col = rng.integers(support.size, size=shots)
        keep = rng.random(shots) < prob[col]
        picked = np.where(keep, col, alias[col])
    else:
        cdf = np.cumsum(weights)
        picked = np.searchsorted(cdf, rng.random(shots) * cdf[-1], side="right")
        picked = np.minimum(picked, support.size - 1)
    return support[picked]


def sample_bitstrings(state: StateVector, shots: int, rng: np.random.Generator, provenance=()) -> SampleSet:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    drawn = sample_indices(np.abs(state.amplitudes) ** 2, shots, rng)
    values, counts = np.unique(drawn, return_counts=True)
    return SampleSet(
        state.n_qubits,
        {int(b): int(c) for b, c in zip(values, counts)},
        shots,
        tuple(provenance),
    )
