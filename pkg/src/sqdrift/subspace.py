"""Determinant-subspace projection, diagonalization and one-particle observables.

Fermionic signs follow the canonical operator order: alpha orbitals
ascending, then beta orbitals ascending (the combined bitstring of
:class:`~sqdrift.determinant.Determinant`).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .determinant import (
    Determinant,
    annihilation_sign,
    excitations,
    occupied,
    strings_with_popcount,
)
from .eigensolver import diagonalize
from .errors import ScaleError
from .hamiltonian import MolecularHamiltonian

MAX_NONZEROS = 50_000_000
FCI_MAX_DETERMINANTS = 1_000_000


@dataclass(frozen=True)
class SubspaceBasis:
    """Product (alpha x beta) or explicit determinant basis.

    In product mode the determinant order is alpha-major. Explicit bases are
    stored sorted by ``(alpha, beta)``.
    """

    n_orbitals: int
    alpha_strings: tuple[int, ...]
    beta_strings: tuple[int, ...]
    mode: str = "product"
    pairs: tuple[tuple[int, int], ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.mode not in ("product", "explicit"):
            raise ValueError(f"unknown basis mode {self.mode!r}")
        object.__setattr__(self, "alpha_strings", tuple(sorted(set(self.alpha_strings))))
        object.__setattr__(self, "beta_strings", tuple(sorted(set(self.beta_strings))))
        object.__setattr__(self, "pairs", tuple(sorted(set(self.pairs))))

    @classmethod
    def product(cls, n_orbitals, alpha_strings, beta_strings):
        return cls(n_orbitals, tuple(alpha_strings), tuple(beta_strings), "product")

    @classmethod
    def explicit(cls, n_orbitals, dets):
        pairs = tuple((d.alpha, d.beta) for d in dets)
        return cls(
            n_orbitals,
            tuple(p[0] for p in pairs),
            tuple(p[1] for p in pairs),
            "explicit",
            pairs,
        )

    @classmethod
    def from_determinants(cls, n_orbitals, dets, mode="product"):
        dets = list(dets)
        if mode == "product":
            return cls.product(n_orbitals, (d.alpha for d in dets), (d.beta for d in dets))
        return cls.explicit(n_orbitals, dets)

    @property
    def dimension(self) -> int:
        if self.mode == "product":
            return len(self.alpha_strings) * len(self.beta_strings)
        return len(self.pairs)

    def __len__(self):
        return self.dimension

    @cached_property
    def determinants(self) -> tuple[Determinant, ...]:
        if self.mode == "product":
            return tuple(Determinant(a, b) for a in self.alpha_strings for b in self.beta_strings)
        return tuple(Determinant(a, b) for a, b in self.pairs)

    @cached_property
    def index(self) -> dict[Determinant, int]:
        return {d: i for i, d in enumerate(self.determinants)}

    def digest(self) -> str:
        h = hashlib.sha256(f"{self.mode}:{self.n_orbitals}".encode())
        for d in self.determinants:
            h.update(f"{d.alpha},{d.beta};".encode())
        return h.hexdigest()[:16]

    def export(self, path) -> None:
        """Write one bitstring per line (beta half first, qubit 0 rightmost)."""
        Path(path).write_text("".join(d.label(self.n_orbitals) + "\n" for d in self.determinants))


@dataclass
class SubspaceResult:
    energies: np.ndarray
    eigenvectors: np.ndarray
    basis: SubspaceBasis
    residual_norms: np.ndarray

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def ground_vector(self) -> np.ndarray:
        # lowest index after sorting, also under degeneracy
        return self.eigenvectors[:, 0]

    def export_vector(self, path, which: int = 0) -> None:
        n = self.basis.n_orbitals
        lines = ["bitstring,coefficient"]
        for det, c in zip(self.basis.determinants, self.eigenvectors[:, which]):
            lines.append(f"{det.label(n)},{c:.17g}")
        Path(path).write_text("\n".join(lines) + "\n")


def _check_counts(ham, det):
    if det.n_alpha != ham.n_alpha or det.n_beta != ham.n_beta:
        raise ValueError(
            f"determinant has ({det.n_alpha}, {det.n_beta}) electrons, expected ({ham.n_alpha}, {ham.n_beta})"
        )


def _diagonal(core, h, g, bits):
    occ = np.array(occupied(bits), dtype=int)
    if occ.size == 0:
        return core
    one = h[occ, occ].sum()
    two = g[occ[:, None], occ[None, :], occ[:, None], occ[None, :]].sum()
    return core + one + 0.5 * two


def _element(core, h, g, b1, b2):
    diff = b1 ^ b2
    degree = diff.bit_count()
    if degree == 0:
        return _diagonal(core, h, g, b1)
    if degree == 2:
        (m,) = occupied(b1 & diff)
        (p,) = occupied(b2 & diff)
        sign = annihilation_sign(b2, p) * annihilation_sign(b2 ^ (1 << p), m)
        common = np.array(occupied(b1 & b2), dtype=int)
        val = h[m, p]
        if common.size:
            val += g[m, common, p, common].sum()
        return sign * val
    if degree == 4:
        m, n = occupied(b1 & diff)
        p, q = occupied(b2 & diff)
        bits = b2
        sign = annihilation_sign(bits, p)
        bits ^= 1 << p
        sign *= annihilation_sign(bits, q)
        bits ^= 1 << q
        sign *= annihilation_sign(bits, n)
        bits |= 1 << n
        sign *= annihilation_sign(bits, m)
        return sign * g[m, n, p, q]
    return 0.0


def diagonal_energy(ham: MolecularHamiltonian, det: Determinant) -> float:
    h, g = ham.spin_orbital_integrals
    return float(_diagonal(ham.core_energy, h, g, det.combined(ham.n_orbitals)))


def slater_condon_element(ham: MolecularHamiltonian, d1: Determinant, d2: Determinant) -> float:
    """``<d1|H|d2>`` including core energy on the diagonal."""
    _check_counts(ham, d1)
    _check_counts(ham, d2)
    h, g = ham.spin_orbital_integrals
    n = ham.n_orbitals
    return float(_element(ham.core_energy, h, g, d1.combined(n), d2.combined(n)))


def _connectivity(ham, basis):
    n, na, nb = ham.n_orbitals, ham.n_alpha, ham.n_beta
    va, vb = n - na, n - nb
    singles = na * va + nb * vb
    doubles = comb(na, 2) * comb(va, 2) + comb(nb, 2) * comb(vb, 2) + na * va * nb * vb
    return 1 + singles + doubles


def build_subspace_matrix(ham: MolecularHamiltonian, basis: SubspaceBasis, max_nonzeros: int = MAX_NONZEROS):
    """Sparse CSR projection of ``ham`` onto ``basis``.

    Connections are found by generating the singles and doubles of each row
    determinant and looking them up, so work scales with dimension times
    connectivity rather than dimension squared.
    """
    dim = basis.dimension
    if dim == 0:
        raise ValueError("basis is empty")
    estimate = dim * min(dim, _connectivity(ham, basis))
    if estimate > max_nonzeros:
        raise ScaleError(f"subspace of dimension {dim} needs ~{estimate} nonzeros (cap {max_nonzeros})")
    for d in (basis.determinants[0], basis.determinants[-1]):
        _check_counts(ham, d)
    h, g = ham.spin_orbital_integrals
    n, core = ham.n_orbitals, ham.core_energy
    index = basis.index
    rows, cols, vals = [], [], []
    for i, det in enumerate(basis.determinants):
        bi = det.combined(n)
        rows.append(i)
        cols.append(i)
        vals.append(_diagonal(core, h, g, bi))
        for other in excitations(det, n):
            j = index.get(other)
            if j is None or j < i:
                continue
            v = _element(core, h, g, bi, other.combined(n))
            if v != 0.0:
                rows += (i, j)
                cols += (j, i)
                vals += (v, v)
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def solve_subspace(ham: MolecularHamiltonian, basis: SubspaceBasis, k: int = 1, tol: float = 1e-8) -> SubspaceResult:
    matrix = build_subspace_matrix(ham, basis)
    k = min(k, basis.dimension)
    energies, vectors, res = diagonalize(matrix, k=k, tol=tol)
    return SubspaceResult(energies, vectors, basis, res)


def _check_normalized(coeffs, tol=1e-6):
    norm = np.linalg.norm(coeffs)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"coefficients are not normalized (norm {norm:.10g})")


def one_rdm(basis: SubspaceBasis, coeffs) -> tuple[np.ndarray, np.ndarray]:
    """Spin-resolved ``gamma[p, q] = <Psi| a+_p a_q |Psi>`` for alpha and beta."""
    coeffs = np.asarray(coeffs)
    _check_normalized(coeffs)
    n = basis.n_orbitals
    index = basis.index
    dtype = np.result_type(coeffs.dtype, float)
    gammas = [np.zeros((n, n), dtype=dtype), np.zeros((n, n), dtype=dtype)]
    full = (1 << n) - 1
    for det, cj in zip(basis.determinants, coeffs):
        if cj == 0:
            continue
        bits = det.combined(n)
        for spin, string in ((0, det.alpha), (1, det.beta)):
            offset = spin * n
            gamma = gammas[spin]
            occ = occupied(string)
            for q in occ:
                gamma[q, q] += abs(cj) ** 2
            for q in occ:
                b = bits ^ (1 << (q + offset))
                sq = annihilation_sign(bits, q + offset)
                for p in occupied(full & ~string):
                    target = b | (1 << (p + offset))
                    i = index.get(Determinant.from_combined(target, n))
                    if i is None:
                        continue
                    gamma[p, q] += np.conj(coeffs[i]) * cj * sq * annihilation_sign(b, p + offset)
    return gammas[0], gammas[1]


def dyson_orbital(result_n: SubspaceResult, result_nm1: SubspaceResult) -> tuple[np.ndarray, float]:
    """``phi_p = <Psi^(N-1)| a_p |Psi^N>`` over the spin sector that lost an electron.

    Uses the lowest eigenvector of each result.
    """
    bn, bm = result_n.basis, result_nm1.basis
    if bn.n_orbitals != bm.n_orbitals:
        raise ValueError("bases span different orbital sets")
    n = bn.n_orbitals
    dn, dm = bn.determinants[0], bm.determinants[0]
    if dn.n_alpha - dm.n_alpha == 1 and dn.n_beta == dm.n_beta:
        offset, spin_of = 0, (lambda d: d.alpha)
    elif dn.n_beta - dm.n_beta == 1 and dn.n_alpha == dm.n_alpha:
        offset, spin_of = n, (lambda d: d.beta)
    else:
        raise ValueError(
            f"states must differ by one electron in one spin sector: "
            f"({dn.n_alpha}, {dn.n_beta}) vs ({dm.n_alpha}, {dm.n_beta})"
        )
    cn, cm = result_n.ground_vector, result_nm1.ground_vector
    index = bm.index
    phi = np.zeros(n, dtype=np.result_type(cn.dtype, cm.dtype, float))
    for det, c in zip(bn.determinants, cn):
        if c == 0:
            continue
        bits = det.combined(n)
        for p in occupied(spin_of(det)):
            i = index.get(Determinant.from_combined(bits ^ (1 << (p + offset)), n))
            if i is not None:
                phi[p] += np.conj(cm[i]) * c * annihilation_sign(bits, p + offset)
    return phi, float(np.linalg.norm(phi))


def full_space_basis(n_orbitals: int, n_alpha: int, n_beta: int) -> SubspaceBasis:
    return SubspaceBasis.product(
        n_orbitals,
        strings_with_popcount(n_orbitals, n_alpha),
        strings_with_popcount(n_orbitals, n_beta),
    )


def fci_oracle(ham: MolecularHamiltonian, k: int = 1, max_determinants: int = FCI_MAX_DETERMINANTS) -> SubspaceResult:
    """Exact diagonalization over the full ``(n_alpha, n_beta)`` sector."""
    n = ham.n_orbitals
    size = comb(n, ham.n_alpha) * comb(n, ham.n_beta)
    if size > max_determinants:
        raise ScaleError(f"FCI space has {size} determinants (cap {max_determinants})")
    return solve_subspace(ham, full_space_basis(n, ham.n_alpha, ham.n_beta), k=k)
