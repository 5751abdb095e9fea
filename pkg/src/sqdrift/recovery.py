"""Configuration recovery for symmetry-violating samples.

Bitstrings whose per-spin electron counts are wrong are repaired by flipping
bits, choosing which bits to flip from an orbital occupancy profile. The
profile is refined from each subspace eigenvector (self-consistency), and the
largest-amplitude determinants of the previous iteration are carried over.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .determinant import Determinant, occupied
from .statevector import SampleSet, to_blocked_index

log = logging.getLogger(__name__)


@dataclass
class OccupancyProfile:
    alpha_occ: np.ndarray
    beta_occ: np.ndarray

    def __post_init__(self):
        self.alpha_occ = np.asarray(self.alpha_occ, dtype=float)
        self.beta_occ = np.asarray(self.beta_occ, dtype=float)
        if self.alpha_occ.shape != self.beta_occ.shape:
            raise ValueError("alpha and beta profiles differ in length")

    @property
    def n_orbitals(self) -> int:
        return self.alpha_occ.size

    @classmethod
    def from_reference(cls, det: Determinant, n_orbitals: int, high: float = 0.9, low: float = 0.1):
        """Occupation pattern of ``det`` smoothed to ``high``/``low``."""
        a = np.array([high if det.alpha >> p & 1 else low for p in range(n_orbitals)])
        b = np.array([high if det.beta >> p & 1 else low for p in range(n_orbitals)])
        return cls(a, b)


def split_and_filter(samples: SampleSet, n_alpha: int, n_beta: int, ordering: str = "blocked"):
    """Partition samples into admissible determinants and raw invalid bitstrings.

    Returns ``(valid, invalid)``: ``valid`` is a sorted list of
    ``(Determinant, count)`` and ``invalid`` a sorted list of
    ``(blocked bitstring, count)``.
    """
    if samples.n_qubits % 2:
        raise ValueError(f"bitstring length {samples.n_qubits} is not even")
    n = samples.n_qubits // 2
    valid: dict[Determinant, int] = {}
    invalid: dict[int, int] = {}
    for bits, count in samples.counts.items():
        bits = to_blocked_index(bits, n, ordering)
        det = Determinant.from_combined(bits, n)
        if det.n_alpha == n_alpha and det.n_beta == n_beta:
            valid[det] = valid.get(det, 0) + count
        else:
            invalid[bits] = invalid.get(bits, 0) + count
    return sorted(valid.items()), sorted(invalid.items())


def _choose(rng, positions, weights, what):
    weights = np.asarray(weights, dtype=float)
    total = weights.sum()
    if total <= 0:
        log.info("all-zero recovery weights while %s; falling back to uniform choice", what)
        return positions[int(rng.integers(len(positions)))]
    return positions[int(rng.choice(len(positions), p=weights / total))]


def _fix_string(bits: int, target: int, occ: np.ndarray, n: int, rng) -> int:
    while bits.bit_count() > target:
        pos = occupied(bits)
        bits ^= 1 << _choose(rng, pos, 1.0 - occ[pos], "removing an electron")
    while bits.bit_count() < target:
        pos = occupied(((1 << n) - 1) & ~bits)
        bits |= 1 << _choose(rng, pos, occ[pos], "adding an electron")
    return bits


def recover_configurations(invalid, profile: OccupancyProfile, n_alpha: int, n_beta: int, rng):
    """Repair each sampled copy of each invalid bitstring independently.

    Alpha and beta strings are fixed separately. Returns a sorted list of
    ``(Determinant, weight)`` where weight counts the copies that landed on
    that determinant.
    """
    n = profile.n_orbitals
    occ_a = np.clip(profile.alpha_occ, 0.0, 1.0)
    occ_b = np.clip(profile.beta_occ, 0.0, 1.0)
    out: dict[Determinant, int] = {}
    for bits, count in sorted(invalid):
        raw = Determinant.from_combined(bits, n)
        for _ in range(count):
            a = raw.alpha if raw.n_alpha == n_alpha else _fix_string(raw.alpha, n_alpha, occ_a, n, rng)
            b = raw.beta if raw.n_beta == n_beta else _fix_string(raw.beta, n_beta, occ_b, n, rng)
            det = Determinant(a, b)
            out[det] = out.get(det, 0) + 1
    return sorted(out.items())


def top_determinants(previous, keep: int) -> list[tuple[Determinant, float]]:
    """The ``keep`` entries of ``(det, amplitude)`` with largest ``|amplitude|``.

    Ties go to the lexicographically smaller bitstring label.
    """
    ranked = sorted(previous, key=lambda item: (-abs(item[1]), item[0].beta, item[0].alpha))
    return ranked[: max(keep, 0)]


def carry_over(previous, fresh, keep: int) -> dict[Determinant, float]:
    """Union of ``fresh`` (weights summed) with the top-``keep`` previous determinants.

    Carried determinants absent from ``fresh`` enter with weight 0.
    """
    merged: dict[Determinant, float] = {}
    for det, w in fresh:
        merged[det] = merged.get(det, 0.0) + w
    for det, _ in top_determinants(previous, keep):
        merged.setdefault(det, 0.0)
    return dict(sorted(merged.items()))


def estimate_occupancies(dets, coeffs, n_orbitals: int) -> OccupancyProfile:
    """``occ_p = sum_i |c_i|^2 [p occupied in det_i]``, per spin."""
    coeffs = np.asarray(coeffs)
    norm = np.linalg.norm(coeffs)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"coefficients are not normalized (norm {norm:.10g})")
    weights = np.abs(coeffs) ** 2
    alpha = np.zeros(n_orbitals)
    beta = np.zeros(n_orbitals)
    for det, w in zip(dets, weights):
        for p in occupied(det.alpha):
            alpha[p] += w
        for p in occupied(det.beta):
            beta[p] += w
    return OccupancyProfile(alpha, beta)


def inject_bit_flips(samples: SampleSet, probability: float, rng) -> SampleSet:
    """Flip every bit of every shot independently with ``probability``."""
    if probability <= 0 or not samples.counts:
        return samples
    bits = np.array(list(samples.counts.keys()), dtype=np.int64)
    counts = np.array(list(samples.counts.values()), dtype=np.int64)
    shots = np.repeat(bits, counts)
    flips = rng.random((shots.size, samples.n_qubits)) < probability
    masks = flips.astype(np.int64) @ (np.int64(1) << np.arange(samples.n_qubits, dtype=np.int64))
    noisy = shots ^ masks
    values, new_counts = np.unique(noisy, return_counts=True)
    return SampleSet(
        samples.n_qubits,
        {int(b): int(c) for b, c in zip(values, new_counts)},
        samples.total_shots,
        samples.provenance,
    )
