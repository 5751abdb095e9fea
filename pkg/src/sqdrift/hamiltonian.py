"""Molecular Hamiltonians: FCIDUMP reading/writing and active-space restriction.

Integrals are held as dense numpy arrays over spatial orbitals, two-electron
integrals in chemists' notation ``(pq|rs)``. Files use 1-based indices;
memory is 0-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .determinant import Determinant, spin_counts
from .errors import FcidumpParseError, IntegralDataError

DUPLICATE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MolecularHamiltonian:
    n_orbitals: int
    n_electrons: int
    spin_projection: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    orbsym: tuple[int, ...] = field(default=())

    def __post_init__(self):
        n = self.n_orbitals
        one = np.array(self.one_body, dtype=float)
        two = np.array(self.two_body, dtype=float)
        if one.shape != (n, n) or two.shape != (n, n, n, n):
            raise ValueError("integral arrays do not match n_orbitals")
        if not 0 <= self.n_electrons <= 2 * n:
            raise ValueError(f"n_electrons={self.n_electrons} invalid for {n} orbitals")
        if abs(self.spin_projection) > self.n_electrons or (
            self.n_electrons - self.spin_projection
        ) % 2:
            raise ValueError("spin_projection inconsistent with n_electrons")
        one.flags.writeable = False
        two.flags.writeable = False
        object.__setattr__(self, "one_body", one)
        object.__setattr__(self, "two_body", two)
        object.__setattr__(self, "core_energy", float(self.core_energy))
        object.__setattr__(self, "orbsym", tuple(self.orbsym))

    @property
    def n_alpha(self) -> int:
        return spin_counts(self.n_electrons, self.spin_projection)[0]

    @property
    def n_beta(self) -> int:
        return spin_counts(self.n_electrons, self.spin_projection)[1]

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_orbitals

    def __eq__(self, other):
        if not isinstance(other, MolecularHamiltonian):
            return NotImplemented
        return (
            self.n_orbitals == other.n_orbitals
            and self.n_electrons == other.n_electrons
            and self.spin_projection == other.spin_projection
            and self.core_energy == other.core_energy
            and np.array_equal(self.one_body, other.one_body)
            and np.array_equal(self.two_body, other.two_body)
        )

    def check_symmetry(self, tol: float = 1e-12) -> None:
        h, g = self.one_body, self.two_body
        if not np.allclose(h, h.T, atol=tol, rtol=0):
            raise IntegralDataError("one-body integrals are not symmetric")
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if not np.allclose(g, g.transpose(perm), atol=tol, rtol=0):
                raise IntegralDataError("two-body integrals break 8-fold symmetry")

    @cached_property
    def spin_orbital_integrals(self) -> tuple[np.ndarray, np.ndarray]:
        """Spin-orbital ``h[i, j]`` and antisymmetrized ``<ij||kl>``.

        Spin orbital ``p`` (alpha) and ``n + p`` (beta) map to spatial ``p``.
        """
        n = self.n_orbitals
        spin = np.repeat([0, 1], n)
        spatial = np.tile(np.arange(n), 2)
        same = spin[:, None] == spin[None, :]
        h = np.where(same, self.one_body[np.ix_(spatial, spatial)], 0.0)
        # <ij|kl> = (ik|jl) delta(s_i, s_k) delta(s_j, s_l)
        g = self.two_body[np.ix_(spatial, spatial, spatial, spatial)].transpose(0, 2, 1, 3)
        g = g * (same[:, None, :, None] & same[None, :, None, :])
        anti = g - g.transpose(0, 1, 3, 2)
        h.flags.writeable = False
        anti.flags.writeable = False
        return h, anti


def _canonical(i, j, k, l):
    ij = (i, j) if i >= j else (j, i)
    kl = (k, l) if k >= l else (l, k)
    return ij + kl if ij >= kl else kl + ij


_HEADER_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=")


def _parse_header(text: str, first_line: int):
    body = re.sub(r"&FCI", " ", text, count=1, flags=re.IGNORECASE)
    body = re.sub(r"(&END|/)\s*$", " ", body.strip(), flags=re.IGNORECASE)
    keys = list(_HEADER_KEY.finditer(body))
    lead = body[: keys[0].start()].strip() if keys else body.strip()
    if lead:
        raise FcidumpParseError("unexpected token in namelist header", first_line, lead.split()[0])
    values = {}
    for idx, m in enumerate(keys):
        end = keys[idx + 1].start() if idx + 1 < len(keys) else len(body)
        raw = [t for t in re.split(r"[,\s]+", body[m.end() : end]) if t]
        values[m.group(1).upper()] = raw
    return values


def _header_int(values, key, line, default=None):
    if key not in values:
        if default is None:
            raise FcidumpParseError("missing header key", line, key)
        return default
    raw = values[key]
    if len(raw) != 1:
        raise FcidumpParseError(f"expected one value for {key}", line, " ".join(raw) or key)
    try:
        return int(raw[0])
    except ValueError:
        raise FcidumpParseError(f"non-integer value for {key}", line, raw[0]) from None


def parse_fcidump(text: str) -> MolecularHamiltonian:
    """Parse FCIDUMP text into a :class:`MolecularHamiltonian`.

    Every symmetry image of a stored integral is populated. Duplicate lines
    for the same canonical slot must agree within ``1e-10`` (last one wins);
    ``e i 0 0 0`` orbital-energy lines are ignored.
    """
    lines = text.splitlines()
    header_lines = []
    end = None
    for lineno, line in enumerate(lines):
        header_lines.append(line)
        stripped = line.strip().upper()
        if stripped.endswith("&END") or stripped == "/" or stripped.endswith(" /"):
            end = lineno
            break
    if not lines or not lines[0].strip().upper().startswith("&FCI"):
        raise FcidumpParseError(
            "FCIDUMP must start with a &FCI namelist", 1, lines[0].strip() if lines else ""
        )
    if end is None:
        raise FcidumpParseError("unterminated namelist header (missing &END)", len(lines))
    header = _parse_header("\n".join(header_lines), 1)
    norb = _header_int(header, "NORB", 1)
    nelec = _header_int(header, "NELEC", 1)
    ms2 = _header_int(header, "MS2", 1, default=0)
    if header.get("UHF", ["F"])[0].strip(".").upper() in ("T", "TRUE", "1"):
        raise FcidumpParseError("unrestricted integrals are not supported", 1, "UHF")
    orbsym = tuple(int(v) for v in header.get("ORBSYM", []))
    if norb < 0:
        raise FcidumpParseError("NORB must be non-negative", 1, str(norb))

    one = np.zeros((norb, norb))
    two = np.zeros((norb, norb, norb, norb))
    core = 0.0
    seen: dict[tuple, float] = {}
    for lineno in range(end + 1, len(lines)):
        parts = lines[lineno].split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FcidumpParseError("integral line needs 'value i j k l'", lineno + 1, lines[lineno].strip())
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
        except ValueError:
            raise FcidumpParseError("bad integral value", lineno + 1, parts[0]) from None
        try:
            idx = [int(p) for p in parts[1:]]
        except ValueError:
            raise FcidumpParseError("bad orbital index", lineno + 1, " ".join(parts[1:])) from None
        for v in idx:
            if not 0 <= v <= norb:
                raise FcidumpParseError(f"orbital index out of range [0, {norb}]", lineno + 1, str(v))
        i, j, k, l = idx
        if i == j == k == l == 0:
            slot = ("core",)
        elif k == l == 0 and i > 0 and j > 0:
            slot = ("one",) + ((i, j) if i >= j else (j, i))
        elif j == k == l == 0:
            continue
        elif min(idx) > 0:
            slot = ("two",) + _canonical(i, j, k, l)
        else:
            raise FcidumpParseError("unrecognised index pattern", lineno + 1, " ".join(parts[1:]))
        prev = seen.get(slot)
        if prev is not None and abs(prev - value) > DUPLICATE_TOL:
            raise IntegralDataError(
                f"inconsistent duplicate integral {slot[1:]} on line {lineno + 1}: {prev!r} vs {value!r}"
            )
        seen[slot] = value

    for slot, value in seen.items():
        if slot[0] == "core":
            core = value
        elif slot[0] == "one":
            p, q = slot[1] - 1, slot[2] - 1
            one[p, q] = one[q, p] = value
        else:
            p, q, r, s = (x - 1 for x in slot[1:])
            for a, b, c, d in (
                (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
            ):
                two[a, b, c, d] = value
    return MolecularHamiltonian(norb, nelec, ms2, core, one, two, orbsym)


def read_fcidump(path) -> MolecularHamiltonian:
    return parse_fcidump(Path(path).read_text())


def format_fcidump(ham: MolecularHamiltonian) -> str:
    """Serialize with 17 significant digits, one canonical representative per slot."""
    n = ham.n_orbitals
    orbsym = ham.orbsym or (1,) * n
    out = [
        f" &FCI NORB={n},NELEC={ham.n_electrons},MS2={ham.spin_projection},",
        "  ORBSYM=" + ",".join(str(s) for s in orbsym) + ",",
        "  ISYM=1,",
        " &END",
    ]
    g = ham.two_body
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if (i, j) < (k, l):
                        continue
                    v = g[i, j, k, l]
                    if v != 0.0:
                        out.append(f"{v:.17g} {i + 1} {j + 1} {k + 1} {l + 1}")
    h = ham.one_body
    for i in range(n):
        for j in range(i + 1):
            if h[i, j] != 0.0:
                out.append(f"{h[i, j]:.17g} {i + 1} {j + 1} 0 0")
    out.append(f"{ham.core_energy:.17g} 0 0 0 0")
    return "\n".join(out) + "\n"


def write_fcidump(ham: MolecularHamiltonian, path) -> None:
    Path(path).write_text(format_fcidump(ham))


def restrict_active_space(ham: MolecularHamiltonian, frozen, active) -> MolecularHamiltonian:
    """Fold doubly occupied ``frozen`` orbitals into an effective core over ``active``."""
    frozen = [int(i) for i in frozen]
    active = [int(i) for i in active]
    n = ham.n_orbitals
    for idx in frozen + active:
        if not 0 <= idx < n:
            raise ValueError(f"orbital index {idx} out of range for {n} orbitals")
    if set(frozen) & set(active):
        raise ValueError(f"frozen and active overlap: {sorted(set(frozen) & set(active))}")
    if len(set(frozen)) != len(frozen) or len(set(active)) != len(active):
        raise ValueError("duplicate orbital indices in frozen/active")
    n_el = ham.n_electrons - 2 * len(frozen)
    if n_el < 0:
        raise ValueError(f"freezing {len(frozen)} orbitals leaves {n_el} electrons")
    if n_el > 2 * len(active) or abs(ham.spin_projection) > n_el:
        raise ValueError("remaining electrons do not fit in the active space")

    h, g = ham.one_body, ham.two_body
    core = ham.core_energy
    one = h[np.ix_(active, active)].copy()
    if frozen:
        f = np.array(frozen)
        jf = g[np.ix_(f, f, f, f)]
        coulomb = np.einsum("iijj->", jf)
        exchange = np.einsum("ijji->", jf)
        core += 2.0 * np.trace(h[np.ix_(f, f)]) + 2.0 * coulomb - exchange
        a = np.array(active, dtype=int)
        if a.size:
            one += 2.0 * np.einsum("pqii->pq", g[np.ix_(a, a, f, f)])
            one -= np.einsum("piiq->pq", g[np.ix_(a, f, f, a)])
    two = g[np.ix_(active, active, active, active)].copy()
    orbsym = tuple(ham.orbsym[i] for i in active) if ham.orbsym else ()
    return MolecularHamiltonian(len(active), n_el, ham.spin_projection, core, one, two, orbsym)


def hf_energy(ham: MolecularHamiltonian, reference: Determinant) -> float:
    """Diagonal Slater-Condon energy of ``reference`` (core energy included)."""
    from .subspace import diagonal_energy

    if reference.n_alpha != ham.n_alpha or reference.n_beta != ham.n_beta:
        raise ValueError(
            f"reference has ({reference.n_alpha}, {reference.n_beta}) electrons, "
            f"Hamiltonian expects ({ham.n_alpha}, {ham.n_beta})"
        )
    return diagonal_energy(ham, reference)
