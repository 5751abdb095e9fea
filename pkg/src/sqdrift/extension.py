"""Singles/doubles enlargement of a sampled determinant set, with ranking and capping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .determinant import Determinant, excitations
from .hamiltonian import MolecularHamiltonian
from .subspace import SubspaceBasis, SubspaceResult, _element, diagonal_energy

LEVELS = {"singles": 1, "singles+doubles": 2}


@dataclass(frozen=True)
class ExtensionConfig:
    cap: int | None = None
    excitation_level: str = "singles+doubles"
    mode: str = "product"

    def __post_init__(self):
        if self.cap is not None and self.cap < 1:
            raise ValueError("cap must be >= 1")
        if self.excitation_level not in LEVELS:
            raise ValueError(f"excitation_level must be one of {sorted(LEVELS)}")
        if self.mode not in ("product", "explicit"):
            raise ValueError(f"unknown mode {self.mode!r}")


def generate_excitations(dets, level: str, n_orbitals: int) -> list[Determinant]:
    """Input determinants plus all their singles (and doubles), sorted and deduplicated."""
    degree = LEVELS[level]
    out = set(dets)
    for det in set(dets):
        out.update(excitations(det, n_orbitals, degree))
    return sorted(out)


def perturbative_importance(ham: MolecularHamiltonian, result: SubspaceResult, dets) -> dict[Determinant, float]:
    """Epstein-Nesbet amplitude ``|<D|H|Psi>| / |E_D - E|`` against the ground state of ``result``."""
    h, g = ham.spin_orbital_integrals
    n, core = ham.n_orbitals, ham.core_energy
    index = result.basis.index
    coeffs = result.ground_vector
    energy = result.ground_energy
    scores = {}
    for det in dets:
        bits = det.combined(n)
        coupling = 0.0
        for other in excitations(det, n):
            i = index.get(other)
            if i is not None:
                coupling += coeffs[i] * _element(core, h, g, bits, other.combined(n))
        denom = abs(diagonal_energy(ham, det) - energy)
        scores[det] = abs(coupling) / max(denom, 1e-8)
    return scores


def _top(scores: dict[int, float], cap: int | None) -> list[int]:
    ranked = sorted(scores, key=lambda s: (-scores[s], s))
    return ranked if cap is None else ranked[:cap]


def rank_and_cap(dets, weights, cfg: ExtensionConfig, n_orbitals: int,
                 ham: MolecularHamiltonian | None = None, reference: SubspaceResult | None = None) -> SubspaceBasis:
    """Keep the ``cfg.cap`` most important strings (product) or determinants (explicit).

    Determinants missing from ``weights`` are scored perturbatively against
    ``reference`` when ``ham`` and ``reference`` are given, else with 0.
    Ties break on the unsigned string values.
    """
    dets = sorted(set(dets))
    importance = {d: float(weights[d]) for d in dets if d in weights}
    missing = [d for d in dets if d not in weights]
    if missing and ham is not None and reference is not None:
        importance.update(perturbative_importance(ham, reference, missing))
    for d in missing:
        importance.setdefault(d, 0.0)

    if cfg.mode == "explicit":
        ranked = sorted(dets, key=lambda d: (-importance[d], d.beta, d.alpha))
        kept = ranked if cfg.cap is None else ranked[: cfg.cap]
        return SubspaceBasis.explicit(n_orbitals, kept)

    alpha: dict[int, float] = {}
    beta: dict[int, float] = {}
    for d in dets:
        alpha[d.alpha] = alpha.get(d.alpha, 0.0) + importance[d]
        beta[d.beta] = beta.get(d.beta, 0.0) + importance[d]
    return SubspaceBasis.product(n_orbitals, _top(alpha, cfg.cap), _top(beta, cfg.cap))


def abs_weights(basis: SubspaceBasis, coeffs) -> dict[Determinant, float]:
    return {d: float(abs(c)) for d, c in zip(basis.determinants, np.asarray(coeffs))}
