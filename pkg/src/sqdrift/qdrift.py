"""qDRIFT randomized evolution sequences and the Krylov time grid.

A sequence of ``N`` rotations for total time ``t`` draws term ``k`` with
probability ``|c_k| / lambda`` and rotates by ``sign(c_k) * t * lambda / N``
about its Pauli string. The identity term never enters a sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateHamiltonianError, ScaleError
from .pauli import PauliHamiltonian, PauliString, lambda_norm, sampling_distribution

MAX_CHANNEL_QUBITS = 8


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, *key)``.

    The same key gives the same stream regardless of which process or in
    which order it is requested.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def _as_rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng, None
    return make_rng(int(rng)), int(rng)


@dataclass(frozen=True)
class QDriftSequence:
    rotations: tuple[tuple[PauliString, float], ...]
    total_time: float
    n_samples: int
    lam: float
    seed: int | None = None
    term_indices: tuple[int, ...] = field(default=(), repr=False)

    def __len__(self):
        return len(self.rotations)

    def inverse(self) -> "QDriftSequence":
        rots = tuple((p, -theta) for p, theta in reversed(self.rotations))
        return QDriftSequence(rots, -self.total_time, self.n_samples, self.lam, self.seed, self.term_indices[::-1])


def sample_sequence(h: PauliHamiltonian, t: float, n_samples: int, rng) -> QDriftSequence:
    """Draw one qDRIFT realization. ``rng`` is a Generator or an integer seed."""
    if n_samples < 0:
        raise ValueError("n_samples must be non-negative")
    rng, seed = _as_rng(rng)
    lam = lambda_norm(h)
    if n_samples == 0:
        return QDriftSequence((), t, 0, lam, seed)
    if lam == 0.0:
        raise DegenerateHamiltonianError("cannot sample from a Hamiltonian with lambda = 0")
    probs = sampling_distribution(h)
    picks = rng.choice(len(h.terms), size=n_samples, p=probs)
    tau = t * lam / n_samples
    coeffs = h.coefficients
    rots = tuple((h.terms[k][1], float(np.sign(coeffs[k]) * tau)) for k in picks)
    return QDriftSequence(rots, t, n_samples, lam, seed, tuple(int(k) for k in picks))


def krylov_time_grid(dt: float, depth: int) -> list[float]:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    return [k * dt for k in range(depth + 1)]


@dataclass
class DensityEstimate:
    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.n_qubits > MAX_CHANNEL_QUBITS:
            raise ScaleError(f"density matrices are capped at {MAX_CHANNEL_QUBITS} qubits")
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = 1 << self.n_qubits
        if self.matrix.shape != (dim, dim):
            raise ValueError("density matrix has the wrong shape")

    @classmethod
    def pure(cls, state) -> "DensityEstimate":
        psi = state.amplitudes
        return cls(state.n_qubits, np.outer(psi, psi.conj()))

    def check(self, tol: float = 1e-10) -> None:
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=tol, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise ValueError("density matrix trace is not 1")
        if np.linalg.eigvalsh(m).min() < -1e-9:
            raise ValueError("density matrix is not positive semidefinite")


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


def qdrift_channel(h: PauliHamiltonian, rho0: DensityEstimate, t: float, n_samples: int,
                   n_realizations: int, rng, chunk: int = 2048) -> DensityEstimate:
    """Monte Carlo average of ``V rho0 V^+`` over sampled sequences.

    All realizations advance together one rotation at a time; ``rho0`` is
    handled through its eigen-decomposition.
    """
    if rho0.n_qubits != h.n_qubits:
        raise ValueError("state and Hamiltonian qubit counts differ")
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    rng, _ = _as_rng(rng)
    dim = 1 << h.n_qubits
    w, vecs = np.linalg.eigh(0.5 * (rho0.matrix + rho0.matrix.conj().T))
    keep = w > 1e-14
    w, vecs = w[keep], vecs[:, keep]
    if n_samples == 0 or t == 0:
        return DensityEstimate(h.n_qubits, (vecs * w) @ vecs.conj().T)

    lam = lambda_norm(h)
    if lam == 0.0:
        raise DegenerateHamiltonianError("cannot sample from a Hamiltonian with lambda = 0")
    probs = sampling_distribution(h)
    tau = t * lam / n_samples
    idx = np.arange(dim)
    srcs = np.stack([idx ^ p.x for _, p in h.terms])
    signs = np.sign(h.coefficients)
    phases = np.stack([
        (1j) ** ((p.x & p.z).bit_count() % 4) * (1.0 - 2.0 * (np.bitwise_count((idx ^ p.x) & p.z) & 1))
        for _, p in h.terms
    ])
    # -i sin(theta_k) * phase_k, with theta_k = sign(c_k) tau
    kicks = -1j * np.sin(tau) * signs[:, None] * phases
    c = np.cos(tau)

    acc = np.zeros((dim, dim), dtype=complex)
    n_vec = w.size
    done = 0
    while done < n_realizations:
        m = min(chunk, n_realizations - done)
        picks = rng.choice(len(h.terms), size=(m, n_samples), p=probs)
        picks = np.repeat(picks, n_vec, axis=0)
        psi = np.tile(vecs.T, (m, 1))
        rows = np.arange(psi.shape[0])[:, None]
        for j in range(n_samples):
            k = picks[:, j]
            psi = c * psi + kicks[k] * psi[rows, srcs[k]]
        weighted = psi * np.sqrt(np.tile(w, m))[:, None]
        acc += weighted.T @ weighted.conj()
        done += m
    return DensityEstimate(h.n_qubits, acc / n_realizations)


def exact_channel(h: PauliHamiltonian, rho0: DensityEstimate, t: float) -> np.ndarray:
    u = scipy.linalg.expm(-1j * t * h.to_dense())
    return u @ rho0.matrix @ u.conj().T


def estimate_channel_error(h: PauliHamiltonian, rho0: DensityEstimate, t: float, n_samples: int,
                           n_realizations: int, rng) -> float:
    """Trace distance between the sampled qDRIFT channel and exact evolution."""
    if h.n_qubits > MAX_CHANNEL_QUBITS:
        raise ScaleError(f"channel estimation is capped at {MAX_CHANNEL_QUBITS} qubits")
    approx = qdrift_channel(h, rho0, t, n_samples, n_realizations, rng)
    return trace_distance(approx.matrix, exact_channel(h, rho0, t))
