"""Pauli strings, the Jordan-Wigner mapping and the qDRIFT term distribution.

A :class:`PauliString` is a pair of bit masks: qubit ``q`` carries X if only
``x`` has bit ``q``, Z if only ``z`` has it, Y if both. Labels are written
with qubit 0 rightmost, matching bitstring labels.

Internally the mapper works with unphased products ``X^x Z^z`` (all X
factors to the left), where multiplication is a sign flip and ``X^x Z^z =
(-i)^{|x & z|} P(x, z)``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateHamiltonianError, IntegralDataError
from .hamiltonian import MolecularHamiltonian

COEFF_THRESHOLD = 1e-12
IMAG_TOL = 1e-10
ORDERINGS = ("blocked", "interleaved")


@dataclass(frozen=True, order=True)
class PauliString:
    n_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError(f"masks do not fit in {self.n_qubits} qubits")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        x = z = 0
        for q, ch in enumerate(reversed(label)):
            if ch in "XY":
                x |= 1 << q
            if ch in "ZY":
                z |= 1 << q
            if ch not in "IXYZ":
                raise ValueError(f"bad Pauli label {label!r}")
        return cls(len(label), x, z)

    @property
    def label(self) -> str:
        chars = []
        for q in reversed(range(self.n_qubits)):
            bx, bz = (self.x >> q) & 1, (self.z >> q) & 1
            chars.append("IZXY"[bx * 2 + bz])
        return "".join(chars)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def __str__(self):
        return self.label

    def action(self):
        """``(source, phase)`` with ``(P psi)[c] = phase[c] * psi[source[c]]``."""
        idx = np.arange(1 << self.n_qubits, dtype=np.int64)
        source = idx ^ self.x
        sign = 1 - 2 * (np.bitwise_count(source & self.z) & 1).astype(np.int8)
        phase = (1j) ** ((self.x & self.z).bit_count() % 4) * sign
        return source, phase


@dataclass(frozen=True, eq=False)
class PauliHamiltonian:
    """Real-weighted sum of non-identity Pauli strings plus an identity offset."""

    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...]
    identity_offset: float = 0.0
    dropped_weight: float = 0.0
    threshold: float = COEFF_THRESHOLD
    ordering: str = "blocked"
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        seen = set()
        for c, p in self.terms:
            if p.is_identity:
                raise ValueError("identity term must go in identity_offset")
            if p.n_qubits != self.n_qubits:
                raise ValueError("term qubit count mismatch")
            if p in seen:
                raise ValueError(f"duplicate term {p.label}; merge first")
            seen.add(p)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, PauliHamiltonian):
            return NotImplemented
        return (
            self.n_qubits == other.n_qubits
            and self.terms == other.terms
            and self.identity_offset == other.identity_offset
        )

    @cached_property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=float)

    @classmethod
    def from_terms(cls, n_qubits, terms, identity_offset=0.0, threshold=COEFF_THRESHOLD, **kw):
        """Build from possibly repeated ``(coefficient, PauliString)`` pairs."""
        offset, merged, dropped = merge_terms(terms, threshold)
        return cls(n_qubits, merged, identity_offset + offset, dropped, threshold, **kw)

    def to_sparse(self) -> sp.csr_matrix:
        dim = 1 << self.n_qubits
        if self.n_qubits > 20:
            raise ValueError("refusing to materialize more than 20 qubits")
        idx = np.arange(dim, dtype=np.int64)
        groups = defaultdict(list)
        for c, p in self.terms:
            groups[p.x].append((c, p))
        rows, cols, vals = [idx], [idx], [np.full(dim, self.identity_offset, dtype=complex)]
        for x, members in sorted(groups.items()):
            src = idx ^ x
            val = np.zeros(dim, dtype=complex)
            for c, p in members:
                sign = 1 - 2 * (np.bitwise_count(src & p.z) & 1).astype(float)
                val += c * (1j) ** ((x & p.z).bit_count() % 4) * sign
            rows.append(idx)
            cols.append(src)
            vals.append(val)
        m = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        ).tocsr()
        m.eliminate_zeros()
        return m

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def export(self, path=None) -> str:
        """One ``coefficient  label`` line per term, identity first."""
        lines = [f"{self.identity_offset:.17g}  {'I' * self.n_qubits}"]
        lines += [f"{c:.17g}  {p.label}" for c, p in self.terms]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def parse(cls, text: str) -> "PauliHamiltonian":
        terms = []
        n = None
        for line in text.splitlines():
            if not line.strip():
                continue
            coeff, label = line.split()
            n = len(label) if n is None else n
            terms.append((float(coeff), PauliString.from_label(label)))
        return cls.from_terms(n or 0, terms, threshold=0.0)


def merge_terms(terms, threshold=COEFF_THRESHOLD):
    """Combine like strings; return ``(identity, merged terms, dropped weight)``.

    Merged terms are sorted by ``(x, z)`` so the result is order independent.
    """
    acc = defaultdict(float)
    for c, p in terms:
        acc[p] += c
    identity = 0.0
    merged = []
    dropped = 0.0
    for p in sorted(acc, key=lambda s: (s.x, s.z)):
        c = acc[p]
        if p.is_identity:
            identity += c
        elif abs(c) < threshold:
            dropped += abs(c)
        else:
            merged.append((c, p))
    return identity, tuple(merged), dropped


def spin_orbital_to_qubit(n_orbitals: int, ordering: str = "blocked"):
    """Qubit index for ``(spatial orbital, spin)`` with spin 0 = alpha."""
    if ordering == "blocked":
        return lambda p, s: p + s * n_orbitals
    if ordering == "interleaved":
        return lambda p, s: 2 * p + s
    raise ValueError(f"unknown ordering {ordering!r}; use one of {ORDERINGS}")


def _excitation_xz(i: int, j: int) -> dict[tuple[int, int], complex]:
    """``a+_i a_j`` as a sum of unphased ``X^x Z^z`` products."""
    if i == j:
        zi = 1 << i
        return {(0, 0): 0.5, (0, zi): -0.5}
    ci = [(0.5, 1 << i, ((1 << i) - 1)), (0.5, 1 << i, ((1 << i) - 1) | (1 << i))]
    aj = [(0.5, 1 << j, ((1 << j) - 1)), (-0.5, 1 << j, ((1 << j) - 1) | (1 << j))]
    out = defaultdict(complex)
    for c1, x1, z1 in ci:
        for c2, x2, z2 in aj:
            sign = -1 if (z1 & x2).bit_count() & 1 else 1
            out[(x1 ^ x2, z1 ^ z2)] += c1 * c2 * sign
    return {k: v for k, v in out.items() if v != 0}


def _multiply(a: dict, b: dict, scale: float, into: dict) -> None:
    for (x1, z1), c1 in a.items():
        for (x2, z2), c2 in b.items():
            sign = -1 if (z1 & x2).bit_count() & 1 else 1
            into[(x1 ^ x2, z1 ^ z2)] += scale * sign * c1 * c2


def jordan_wigner(
    ham: MolecularHamiltonian, ordering: str = "blocked", threshold: float = COEFF_THRESHOLD
) -> PauliHamiltonian:
    """Map ``ham`` to qubits; the identity offset includes the core energy."""
    n = ham.n_orbitals
    qubit = spin_orbital_to_qubit(n, ordering)
    h, g = ham.one_body, ham.two_body

    # spin-summed E_pq = sum_s a+_{ps} a_{qs}
    E = {}
    for p in range(n):
        for q in range(n):
            acc = defaultdict(complex)
            for s in (0, 1):
                for k, v in _excitation_xz(qubit(p, s), qubit(q, s)).items():
                    acc[k] += v
            E[p, q] = dict(acc)

    # H = sum h_pq E_pq + 1/2 sum (pq|rs) (E_pq E_rs - delta_qr E_ps)
    acc = defaultdict(complex)
    one_eff = h - 0.5 * np.einsum("pqqs->ps", g)
    for p in range(n):
        for q in range(n):
            if one_eff[p, q] != 0.0:
                for k, v in E[p, q].items():
                    acc[k] += one_eff[p, q] * v
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    v = g[p, q, r, s]
                    if v != 0.0:
                        _multiply(E[p, q], E[r, s], 0.5 * v, acc)

    terms = []
    for (x, z), c in acc.items():
        coeff = c * (-1j) ** ((x & z).bit_count() % 4)
        if abs(coeff.imag) > IMAG_TOL:
            raise IntegralDataError(
                f"imaginary coefficient {coeff} on {PauliString(2 * n, x, z).label}; mapping is not Hermitian-real"
            )
        terms.append((coeff.real, PauliString(2 * n, x, z)))
    return PauliHamiltonian.from_terms(
        2 * n, terms, identity_offset=ham.core_energy, threshold=threshold, ordering=ordering
    )


def lambda_norm(h: PauliHamiltonian) -> float:
    """Sum of absolute non-identity coefficients."""
    return float(np.abs(h.coefficients).sum()) if h.terms else 0.0


def sampling_distribution(h: PauliHamiltonian) -> np.ndarray:
    lam = lambda_norm(h)
    if lam == 0.0:
        raise DegenerateHamiltonianError("lambda = 0: no terms to sample")
    return np.abs(h.coefficients) / lam
