"""Occupation-string determinants and bit helpers.

Spin strings are Python ints used as bitsets: bit ``p`` set means spatial
orbital ``p`` is occupied. The combined spin-orbital string of a determinant
puts alpha orbitals in bits ``0..n-1`` and beta orbitals in bits ``n..2n-1``;
this is both the blocked qubit layout and the canonical fermionic operator
order used for signs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations


@dataclass(frozen=True, order=True)
class Determinant:
    alpha: int
    beta: int

    @property
    def n_alpha(self) -> int:
        return self.alpha.bit_count()

    @property
    def n_beta(self) -> int:
        return self.beta.bit_count()

    def combined(self, n_orbitals: int) -> int:
        return self.alpha | (self.beta << n_orbitals)

    @classmethod
    def from_combined(cls, bits: int, n_orbitals: int) -> "Determinant":
        mask = (1 << n_orbitals) - 1
        return cls(bits & mask, bits >> n_orbitals)

    def label(self, n_orbitals: int) -> str:
        """Bitstring with qubit 0 rightmost, beta half first."""
        return format(self.combined(n_orbitals), f"0{2 * n_orbitals}b")

    @classmethod
    def from_label(cls, label: str) -> "Determinant":
        label = label.replace(" ", "")
        if len(label) % 2:
            raise ValueError(f"bitstring {label!r} has odd length")
        return cls.from_combined(int(label, 2), len(label) // 2)

    @classmethod
    def from_occupations(cls, alpha_occ, beta_occ) -> "Determinant":
        return cls(bits_from_indices(alpha_occ), bits_from_indices(beta_occ))


def bits_from_indices(indices) -> int:
    out = 0
    for i in indices:
        out |= 1 << int(i)
    return out


def occupied(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


def strings_with_popcount(n_orbitals: int, n_electrons: int) -> list[int]:
    """All spin strings of ``n_electrons`` in ``n_orbitals``, ascending."""
    return sorted(bits_from_indices(c) for c in combinations(range(n_orbitals), n_electrons))


def hartree_fock_determinant(n_orbitals: int, n_alpha: int, n_beta: int) -> Determinant:
    if n_alpha > n_orbitals or n_beta > n_orbitals or min(n_alpha, n_beta) < 0:
        raise ValueError("electron count does not fit in the orbital space")
    return Determinant((1 << n_alpha) - 1, (1 << n_beta) - 1)


def annihilation_sign(bits: int, p: int) -> int:
    """Sign picked up by ``a_p`` (or ``a_p^+``) acting on ``bits``."""
    return -1 if (bits & ((1 << p) - 1)).bit_count() & 1 else 1


def excitation_degree(a: Determinant, b: Determinant) -> int:
    return ((a.alpha ^ b.alpha).bit_count() + (a.beta ^ b.beta).bit_count()) // 2


def spin_counts(n_electrons: int, spin_projection: int) -> tuple[int, int]:
    """(n_alpha, n_beta) from total electrons and MS2 = n_alpha - n_beta."""
    if (n_electrons + spin_projection) % 2:
        raise ValueError("spin projection parity does not match electron count")
    n_alpha = (n_electrons + spin_projection) // 2
    return n_alpha, n_electrons - n_alpha


def excitations(det: Determinant, n_orbitals: int, max_degree: int = 2):
    """Yield every determinant at excitation degree 1..``max_degree`` from ``det``.

    Spin counts are preserved; mixed alpha-beta doubles are included. Each
    determinant is yielded exactly once.
    """
    full = (1 << n_orbitals) - 1
    singles_a = _spin_singles(det.alpha, full)
    singles_b = _spin_singles(det.beta, full)
    for a in singles_a:
        yield Determinant(a, det.beta)
    for b in singles_b:
        yield Determinant(det.alpha, b)
    if max_degree < 2:
        return
    for a in _spin_doubles(det.alpha, full):
        yield Determinant(a, det.beta)
    for b in _spin_doubles(det.beta, full):
        yield Determinant(det.alpha, b)
    for a in singles_a:
        for b in singles_b:
            yield Determinant(a, b)


def _spin_singles(bits: int, full: int) -> list[int]:
    occ = occupied(bits)
    virt = occupied(full & ~bits)
    return [bits ^ (1 << i) ^ (1 << a) for i in occ for a in virt]


def _spin_doubles(bits: int, full: int) -> list[int]:
    occ = occupied(bits)
    virt = occupied(full & ~bits)
    out = []
    for i, j in combinations(occ, 2):
        for a, b in combinations(virt, 2):
            out.append(bits ^ (1 << i) ^ (1 << j) ^ (1 << a) ^ (1 << b))
    return out
