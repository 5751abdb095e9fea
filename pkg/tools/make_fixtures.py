"""Regenerate the FCIDUMP fixtures in tests/data with PySCF.

PySCF is only needed here; the package never imports it. Reference SCF and
FCI energies are written next to the dumps so tests can compare against an
independent integrals/CI code.
"""

import json
from pathlib import Path

from pyscf import fci, gto, scf
from pyscf.tools import fcidump

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

MOLECULES = {
    "h2": dict(atom="H 0 0 0; H 0 0 0.735", basis="sto-3g"),
    "h4": dict(atom="H 0 0 0; H 0 0 1.5; H 0 0 3.0; H 0 0 4.5", basis="sto-3g"),
    "h2o": dict(
        atom="O 0 0 0.1173; H 0 0.7572 -0.4692; H 0 -0.7572 -0.4692",
        basis="sto-3g",
    ),
}


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    refs = {}
    for name, kw in MOLECULES.items():
        mol = gto.M(unit="Angstrom", verbose=0, **kw)
        mf = scf.RHF(mol)
        mf.conv_tol = 1e-12
        mf.kernel()
        path = DATA / f"{name}.fcidump"
        fcidump.from_scf(mf, str(path), tol=1e-15)
        e_fci, _ = fci.FCI(mf).kernel()
        refs[name] = {
            "geometry": kw["atom"],
            "basis": kw["basis"],
            "n_orbitals": int(mf.mo_coeff.shape[1]),
            "n_electrons": int(mol.nelectron),
            "e_scf": float(mf.e_tot),
            "e_fci": float(e_fci),
        }
    (DATA / "references.json").write_text(json.dumps(refs, indent=2) + "\n")


if __name__ == "__main__":
    main()
