"""Sample-based Krylov diagonalization with qDRIFT-randomized circuits (SqDRIFT).

A desk-scale toolkit: FCIDUMP Hamiltonians are mapped to qubits, evolved
with randomized Pauli-rotation sequences on a statevector simulator,
sampled, repaired by configuration recovery and diagonalized in the
sampled determinant subspace.
"""

from .determinant import Determinant, hartree_fock_determinant
from .hamiltonian import MolecularHamiltonian, hf_energy, parse_fcidump, read_fcidump, restrict_active_space
from .pauli import PauliHamiltonian, PauliString, jordan_wigner, lambda_norm, sampling_distribution
from .subspace import SubspaceBasis, SubspaceResult, fci_oracle

__all__ = [
    "Determinant",
    "MolecularHamiltonian",
    "PauliHamiltonian",
    "PauliString",
    "SubspaceBasis",
    "SubspaceResult",
    "fci_oracle",
    "hartree_fock_determinant",
    "hf_energy",
    "jordan_wigner",
    "lambda_norm",
    "parse_fcidump",
    "read_fcidump",
    "restrict_active_space",
    "sampling_distribution",
]

__version__ = "0.1.0"
