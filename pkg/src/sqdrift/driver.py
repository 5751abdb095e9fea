"""End-to-end SqDRIFT / SKQD / ExtSqDRIFT runs driven by a JSON config."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .determinant import hartree_fock_determinant
from .errors import SqdriftError, StageError
from .extension import ExtensionConfig, abs_weights, generate_excitations, rank_and_cap
from .hamiltonian import MolecularHamiltonian, hf_energy, read_fcidump, restrict_active_space
from .pauli import PauliHamiltonian, jordan_wigner, lambda_norm
from .qdrift import krylov_time_grid, make_rng, sample_sequence
from .recovery import (
    OccupancyProfile,
    carry_over,
    estimate_occupancies,
    inject_bit_flips,
    recover_configurations,
    split_and_filter,
    top_determinants,
)
from .statevector import SampleSet, evolve, exact_evolve, prepare_determinant, sample_bitstrings
from .subspace import SubspaceBasis, solve_subspace

log = logging.getLogger(__name__)

METHODS = ("sqdrift", "skqd-exact", "extsqdrift")

# RNG stream tags, folded into every key next to the space/time/realization indices
_SEQUENCE, _SHOTS, _NOISE, _RECOVERY = range(4)


class ConfigError(SqdriftError, ValueError):
    exit_code = 2


@dataclass
class ActiveSpace:
    frozen: list[int] = field(default_factory=list)
    active: list[int] | None = None
    label: str | None = None


@dataclass
class RunConfig:
    input: str = ""
    method: str = "sqdrift"
    qdrift_samples: int = 300
    dt: float | None = None
    krylov_depth: int = 4
    shots: int = 10_000
    realizations: int = 8
    subspace_cap: int | None = None
    basis_mode: str = "product"
    recovery_iterations: int = 3
    carry_over_keep: int = 50
    seed: int = 0
    noise_probability: float = 0.0
    output_dir: str = "results"
    ordering: str = "blocked"
    coefficient_threshold: float = 1e-12
    extension_level: str = "singles+doubles"
    extension_uncapped: bool = False
    include_reference: bool = True
    convergence_tol: float = 1e-6
    stop_on_convergence: bool = True
    active_spaces: list[ActiveSpace] = field(default_factory=list)
    workers: int = 1

    def __post_init__(self):
        self.active_spaces = [
            s if isinstance(s, ActiveSpace) else ActiveSpace(**s) for s in self.active_spaces
        ]
        self.validate()

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        for name in ("qdrift_samples", "krylov_depth", "shots", "realizations",
                     "recovery_iterations", "carry_over_keep", "workers"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("dt must be positive")
        if not 0.0 <= self.noise_probability <= 0.5:
            raise ConfigError("noise_probability must lie in [0, 0.5]")
        if self.subspace_cap is not None and self.subspace_cap < 1:
            raise ConfigError("subspace_cap must be >= 1")
        if self.basis_mode not in ("product", "explicit"):
            raise ConfigError(f"unknown basis_mode {self.basis_mode!r}")
        if self.ordering not in ("blocked", "interleaved"):
            raise ConfigError(f"unknown ordering {self.ordering!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        spaces = data.get("active_spaces", [])
        for s in spaces:
            bad = sorted(set(s) - {"frozen", "active", "label"})
            if bad:
                raise ConfigError(f"unknown active-space keys: {', '.join(bad)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        cfg = cls.from_dict(data)
        if cfg.input and not Path(cfg.input).is_absolute():
            cfg.input = str((Path(path).parent / cfg.input).resolve())
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class IterationRecord:
    space: int
    iteration: int
    energy: float
    correlation_energy: float
    dimension: int
    n_alpha_strings: int
    n_beta_strings: int
    invalid_fraction: float
    recovered: int
    carried_over: int
    basis_hash: str


@dataclass
class SpaceResult:
    label: str
    frozen: list[int]
    active: list[int]
    n_orbitals: int
    n_qubits: int
    n_electrons: int
    hf_energy: float
    energy: float
    correlation_energy: float
    dimension: int
    converged: bool
    metadata: dict
    samples: list[dict]


@dataclass
class RunResult:
    config: dict
    iterations: list[IterationRecord] = field(default_factory=list)
    spaces: list[SpaceResult] = field(default_factory=list)
    final_energy: float | None = None
    final_correlation_energy: float | None = None
    timings: dict = field(default_factory=dict)
    error: str | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunResult":
        data = dict(data)
        data["iterations"] = [IterationRecord(**r) for r in data.get("iterations", [])]
        data["spaces"] = [SpaceResult(**s) for s in data.get("spaces", [])]
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def correlation_energy(e_total: float, e_hf: float) -> float:
    return e_total - e_hf


def _circuit_job(args):
    """Sample one circuit: prepare HF, evolve, measure, optionally add noise."""
    pauli, ref, t, k, r, cfg_tuple = args
    seed, space, method, n_rot, shots, noise, ordering = cfg_tuple
    state = prepare_determinant(ref, pauli.n_qubits, ordering)
    if method == "skqd-exact":
        exact_evolve(state, pauli, t)
    else:
        seq = sample_sequence(pauli, t, n_rot, make_rng(seed, _SEQUENCE, space, k, r))
        evolve(state, seq)
    samples = sample_bitstrings(state, shots, make_rng(seed, _SHOTS, space, k, r), provenance=(k, r, seed))
    if noise > 0:
        samples = inject_bit_flips(samples, noise, make_rng(seed, _NOISE, space, k, r))
    return samples


def _collect_samples(cfg: RunConfig, pauli: PauliHamiltonian, ref, times, space: int) -> list[SampleSet]:
    if cfg.shots == 0:
        return []
    n_real = 1 if cfg.method == "skqd-exact" else cfg.realizations
    cfg_tuple = (cfg.seed, space, cfg.method, cfg.qdrift_samples, cfg.shots, cfg.noise_probability, cfg.ordering)
    jobs = [(pauli, ref, t, k, r, cfg_tuple) for k, t in enumerate(times) for r in range(n_real)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_circuit_job, jobs))
    else:
        results = [_circuit_job(j) for j in jobs]
    # one merged set per Krylov time, in time order
    per_time = []
    for k in range(len(times)):
        per_time.append(SampleSet.merge(results[k * n_real : (k + 1) * n_real]))
    return per_time


def _build_basis(cfg, ham, merged, carried_priority):
    """Cap the determinant set to ``cfg.subspace_cap`` strings/determinants."""
    total = sum(merged.values()) or 1.0
    weights = dict(merged)
    # carried determinants rank by amplitude, ahead of almost all sampled ones
    for det, amp in carried_priority:
        weights[det] = weights.get(det, 0.0) + total * abs(amp)
    return rank_and_cap(
        list(merged), weights, ExtensionConfig(cap=cfg.subspace_cap, mode=cfg.basis_mode), ham.n_orbitals
    )


def _run_space(cfg: RunConfig, base: MolecularHamiltonian, space_idx: int, space: ActiveSpace | None, result: RunResult):
    timings = result.timings.setdefault(f"space{space_idx}", {})
    stage, it = "setup", 0

    def tick(name, t0):
        timings[name] = timings.get(name, 0.0) + time.perf_counter() - t0

    try:
        frozen = list(space.frozen) if space else []
        active = list(space.active) if space and space.active is not None else [
            i for i in range(base.n_orbitals) if i not in frozen
        ]
        stage = "active_space"
        ham = restrict_active_space(base, frozen, active) if (frozen or active != list(range(base.n_orbitals))) else base
        n, na, nb = ham.n_orbitals, ham.n_alpha, ham.n_beta
        ref = hartree_fock_determinant(n, na, nb)
        e_hf = hf_energy(ham, ref)

        stage = "jordan_wigner"
        t0 = time.perf_counter()
        pauli = jordan_wigner(ham, cfg.ordering, cfg.coefficient_threshold)
        lam = lambda_norm(pauli)
        tick("map", t0)
        dt = cfg.dt if cfg.dt is not None else (1.0 / lam if lam > 0 else 1.0)
        times = krylov_time_grid(dt, cfg.krylov_depth)

        stage = "sampling"
        t0 = time.perf_counter()
        per_time = _collect_samples(cfg, pauli, ref, times, space_idx)
        allsamples = SampleSet.merge(per_time) if per_time else SampleSet(2 * n, {}, 0)
        tick("sampling", t0)

        stage = "split"
        valid, invalid = split_and_filter(allsamples, na, nb, cfg.ordering)
        n_invalid = sum(c for _, c in invalid)
        invalid_fraction = n_invalid / allsamples.total_shots if allsamples.total_shots else 0.0

        profile = OccupancyProfile.from_reference(ref, n)
        previous: list = []
        energy_prev = None
        converged = False
        final = None
        n_passes = max(cfg.recovery_iterations, 1)
        for it in range(n_passes):
            stage = "recovery"
            t0 = time.perf_counter()
            recovered = []
            if cfg.recovery_iterations > 0 and invalid:
                recovered = recover_configurations(invalid, profile, na, nb, make_rng(cfg.seed, _RECOVERY, space_idx, it))
            fresh = list(valid) + list(recovered)
            if cfg.include_reference:
                fresh.append((ref, 0.0))
            carried = top_determinants(previous, cfg.carry_over_keep)
            merged = carry_over(previous, fresh, cfg.carry_over_keep)
            tick("recovery", t0)

            stage = "basis"
            basis = _build_basis(cfg, ham, merged, carried)
            stage = "diagonalize"
            t0 = time.perf_counter()
            sub = solve_subspace(ham, basis)
            if cfg.method == "extsqdrift":
                stage = "extension"
                ext_dets = generate_excitations(basis.determinants, cfg.extension_level, n)
                ext_cfg = ExtensionConfig(
                    cap=None if cfg.extension_uncapped else cfg.subspace_cap,
                    excitation_level=cfg.extension_level,
                    mode=cfg.basis_mode,
                )
                ext_basis = rank_and_cap(ext_dets, abs_weights(basis, sub.ground_vector), ext_cfg, n, ham, sub)
                stage = "diagonalize"
                sub = solve_subspace(ham, ext_basis)
            tick("diagonalize", t0)

            stage = "occupancies"
            profile = estimate_occupancies(sub.basis.determinants, sub.ground_vector, n)
            previous = list(zip(sub.basis.determinants, sub.ground_vector.tolist()))
            energy = sub.ground_energy
            result.iterations.append(IterationRecord(
                space=space_idx,
                iteration=it,
                energy=energy,
                correlation_energy=correlation_energy(energy, e_hf),
                dimension=sub.basis.dimension,
                n_alpha_strings=len(sub.basis.alpha_strings),
                n_beta_strings=len(sub.basis.beta_strings),
                invalid_fraction=invalid_fraction,
                recovered=sum(c for _, c in recovered),
                carried_over=len(carried),
                basis_hash=sub.basis.digest(),
            ))
            log.info(
                "space %d iteration %d: E=%.10f dim=%d invalid=%.4f recovered=%d carried=%d",
                space_idx, it, energy, sub.basis.dimension, invalid_fraction,
                result.iterations[-1].recovered, len(carried),
            )
            final = sub
            if energy_prev is not None and abs(energy - energy_prev) < cfg.convergence_tol:
                converged = True
                if cfg.stop_on_convergence:
                    break
            energy_prev = energy

        label = space.label if space and space.label else f"{n}o{ham.n_electrons}e"
        result.spaces.append(SpaceResult(
            label=label,
            frozen=frozen,
            active=active,
            n_orbitals=n,
            n_qubits=2 * n,
            n_electrons=ham.n_electrons,
            hf_energy=e_hf,
            energy=final.ground_energy,
            correlation_energy=correlation_energy(final.ground_energy, e_hf),
            dimension=final.basis.dimension,
            converged=converged,
            metadata={
                "lambda": lam,
                "n_terms": len(pauli),
                "dropped_weight": pauli.dropped_weight,
                "coefficient_threshold": cfg.coefficient_threshold,
                "ordering": cfg.ordering,
                "times": times,
                "qdrift_samples": cfg.qdrift_samples,
                "master_seed": cfg.seed,
                "total_shots": allsamples.total_shots,
            },
            samples=[s.labelled() for s in per_time],
        ))
        return final
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, it, exc) from exc


def run_pipeline(cfg: RunConfig, write: bool = True) -> RunResult:
    """Run every configured active space; write reports to ``cfg.output_dir`` if ``write``.

    On failure the partial result is still written before the
    :class:`StageError` propagates.
    """
    result = RunResult(config=cfg.to_dict())
    t_start = time.perf_counter()
    stage_err = None
    try:
        try:
            base = read_fcidump(cfg.input)
        except Exception as exc:
            raise StageError("parse", 0, exc) from exc
        spaces = cfg.active_spaces or [None]
        for idx, space in enumerate(spaces):
            _run_space(cfg, base, idx, space, result)
        last = result.spaces[-1]
        result.final_energy = last.energy
        result.final_correlation_energy = last.correlation_energy
    except StageError as exc:
        result.error = str(exc)
        stage_err = exc
    result.timings["total"] = time.perf_counter() - t_start
    if write:
        emit_report(result, cfg.output_dir)
    if stage_err is not None:
        raise stage_err
    return result


def emit_report(result: RunResult, directory) -> dict[str, Path]:
    """Write ``result.json``, ``convergence.csv`` and ``plotdata.csv``."""
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "result": out / "result.json",
            "convergence": out / "convergence.csv",
            "plotdata": out / "plotdata.csv",
        }
        paths["result"].write_text(result.to_json() + "\n")
        with paths["convergence"].open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["space", "iteration", "energy", "correlation_energy", "dimension"])
            for r in result.iterations:
                w.writerow([r.space, r.iteration, repr(r.energy), repr(r.correlation_energy), r.dimension])
        method = result.config.get("method", "")
        cap = result.config.get("subspace_cap")
        with paths["plotdata"].open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "n_active_orbitals", "n_qubits", "cap", "method", "energy", "correlation_energy"])
            for s in result.spaces:
                w.writerow([s.label, s.n_orbitals, s.n_qubits, "" if cap is None else cap, method,
                            repr(s.energy), repr(s.correlation_energy)])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report: {exc.strerror}", str(exc.filename or out)) from exc
    return paths


def load_result(path) -> RunResult:
    return RunResult.from_dict(json.loads(Path(path).read_text()))
