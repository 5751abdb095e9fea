import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sqdrift.determinant import Determinant, hartree_fock_determinant
from sqdrift.errors import FcidumpParseError, IntegralDataError
from sqdrift.hamiltonian import (
    MolecularHamiltonian,
    format_fcidump,
    hf_energy,
    parse_fcidump,
    restrict_active_space,
)
from sqdrift.subspace import fci_oracle


def test_header_only():
    ham = parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0 &END\n")
    assert (ham.n_orbitals, ham.n_electrons, ham.spin_projection) == (2, 2, 0)
    assert not ham.one_body.any() and not ham.two_body.any()
    assert ham.core_energy == 0.0


def test_core_energy_line():
    ham = parse_fcidump("&FCI NORB=1,NELEC=1,MS2=1 &END\n0.5 0 0 0 0\n")
    assert ham.core_energy == 0.5


def test_whitespace_namelist_and_multiline_header():
    text = "&FCI NORB= 2 NELEC= 2\n MS2= 0\n ORBSYM= 1 2\n/\n 1.5D-01 1 2 0 0\n"
    ham = parse_fcidump(text)
    assert ham.n_orbitals == 2 and ham.orbsym == (1, 2)
    assert ham.one_body[0, 1] == ham.one_body[1, 0] == 0.15


def test_one_based_indices_and_eightfold_images():
    ham = parse_fcidump("&FCI NORB=3,NELEC=2,MS2=0 &END\n0.25 3 1 2 1\n")
    g = ham.two_body
    # (31|21) in file -> [2,0,1,0] in memory plus all symmetry images
    for idx in [(2, 0, 1, 0), (0, 2, 1, 0), (2, 0, 0, 1), (1, 0, 2, 0), (0, 1, 0, 2)]:
        assert g[idx] == 0.25
    assert np.count_nonzero(g) == 8


def test_malformed_header_names_token_and_line():
    with pytest.raises(FcidumpParseError) as exc:
        parse_fcidump("&FCI NORB=two,NELEC=2 &END\n")
    assert "two" in str(exc.value) and exc.value.line == 1


def test_missing_norb():
    with pytest.raises(FcidumpParseError, match="NORB"):
        parse_fcidump("&FCI NELEC=2 &END\n")


def test_index_out_of_range():
    with pytest.raises(FcidumpParseError) as exc:
        parse_fcidump("&FCI NORB=2,NELEC=2 &END\n0.1 3 1 0 0\n")
    assert exc.value.line == 2


def test_inconsistent_duplicate_is_data_error():
    with pytest.raises(IntegralDataError):
        parse_fcidump("&FCI NORB=2,NELEC=2 &END\n0.1 1 2 0 0\n0.2 2 1 0 0\n")


def test_consistent_duplicate_last_wins():
    ham = parse_fcidump("&FCI NORB=2,NELEC=2 &END\n0.1 1 2 0 0\n0.10000000000001 2 1 0 0\n")
    assert ham.one_body[0, 1] == 0.10000000000001


def test_not_an_fcidump():
    with pytest.raises(FcidumpParseError):
        parse_fcidump("hello\n")


def test_fixture_values_are_stored_verbatim(fcidump_path, h2):
    # every value printed by the generator lands bit-identically in its slot
    for line in fcidump_path("h2").read_text().splitlines()[4:]:
        v, i, j, k, l = line.split()
        i, j, k, l = map(int, (i, j, k, l))
        if i == j == k == l == 0:
            assert h2.core_energy == float(v)
        elif k == l == 0:
            assert h2.one_body[i - 1, j - 1] == float(v)
        else:
            # (11|22) and (22|11) differ in the last digit in the file; last wins
            assert abs(h2.two_body[i - 1, j - 1, k - 1, l - 1] - float(v)) < 1e-15


@pytest.mark.parametrize("name", ["h2", "h4", "h2o"])
def test_round_trip_bit_identical(name, fcidump_path):
    from sqdrift.hamiltonian import read_fcidump

    ham = read_fcidump(fcidump_path(name))
    again = parse_fcidump(format_fcidump(ham))
    assert again == ham
    assert parse_fcidump(format_fcidump(again)) == again


@pytest.mark.parametrize("name", ["h2", "h4", "h2o"])
def test_fixture_symmetry_invariants(request, name):
    ham = request.getfixturevalue(name)
    ham.check_symmetry(1e-12)


def test_hf_energy_trivial_cases():
    zero = MolecularHamiltonian(2, 2, 0, 0.7, np.zeros((2, 2)), np.zeros((2,) * 4))
    assert hf_energy(zero, Determinant(1, 1)) == 0.7
    h = np.array([[-1.3, 0.2], [0.2, 0.4]])
    one = MolecularHamiltonian(2, 1, 1, 0.1, h, np.zeros((2,) * 4))
    assert hf_energy(one, Determinant(0b10, 0)) == pytest.approx(0.1 + 0.4, abs=0)


def test_hf_energy_electron_mismatch(h2):
    with pytest.raises(ValueError):
        hf_energy(h2, Determinant(0b11, 0b01))


@pytest.mark.parametrize("name", ["h2", "h4", "h2o"])
def test_hf_energy_matches_external_scf(request, name, references, hf_det):
    ham = request.getfixturevalue(name)
    assert hf_energy(ham, hf_det(ham)) == pytest.approx(references[name]["e_scf"], abs=1e-8)


def test_hf_energy_invariant_under_line_order(fcidump_path, h4, hf_det):
    lines = fcidump_path("h4").read_text().splitlines()
    header, body = lines[:4], lines[4:]
    rnd = random.Random(7)
    e0 = hf_energy(h4, hf_det(h4))
    for _ in range(5):
        rnd.shuffle(body)
        ham = parse_fcidump("\n".join(header + body) + "\n")
        assert hf_energy(ham, hf_det(ham)) == pytest.approx(e0, abs=1e-13)


def test_restrict_identity(h4):
    out = restrict_active_space(h4, [], list(range(h4.n_orbitals)))
    assert out == h4


def test_restrict_all_frozen_gives_hf_energy(h2o, hf_det):
    frozen = list(range(h2o.n_alpha))
    out = restrict_active_space(h2o, frozen, [])
    assert out.n_electrons == 0
    assert out.core_energy == pytest.approx(hf_energy(h2o, hf_det(h2o)), abs=1e-10)


def test_restrict_preserves_hf_energy(h2o, hf_det):
    out = restrict_active_space(h2o, [0], [1, 2, 3, 4, 5])
    assert hf_energy(out, hf_det(out)) == pytest.approx(hf_energy(h2o, hf_det(h2o)), abs=1e-10)


def test_restrict_h4_raises_fci_energy(h4):
    full = fci_oracle(h4).ground_energy
    frozen = fci_oracle(restrict_active_space(h4, [0], [1, 2, 3])).ground_energy
    assert frozen >= full - 1e-12
    assert frozen - full > 1e-4


def test_restrict_errors(h4):
    with pytest.raises(ValueError, match="overlap"):
        restrict_active_space(h4, [0], [0, 1])
    with pytest.raises(ValueError):
        restrict_active_space(h4, [0, 1, 2], [3])


def test_restricted_is_fci_of_embedded_subspace(h2o):
    """Frozen-core FCI equals a full-space solve over determinants with the core filled."""
    from sqdrift.subspace import SubspaceBasis, solve_subspace
    from sqdrift.determinant import strings_with_popcount

    active = [1, 2, 3, 4, 5]
    small = fci_oracle(restrict_active_space(h2o, [0], active)).ground_energy
    strings = [1 | (s << 1) for s in strings_with_popcount(5, 4)]
    big = solve_subspace(h2o, SubspaceBasis.product(7, strings, strings)).ground_energy
    assert small == pytest.approx(big, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_random_hamiltonian_round_trip(seed):
    rnd = np.random.default_rng(seed)
    n = int(rnd.integers(1, 4))
    h = rnd.normal(size=(n, n))
    h = h + h.T
    g = rnd.normal(size=(n, n, n, n))
    g = g + g.transpose(1, 0, 2, 3)
    g = g + g.transpose(0, 1, 3, 2)
    g = g + g.transpose(2, 3, 0, 1)
    ham = MolecularHamiltonian(n, n, n % 2, rnd.normal(), h, g)
    assert parse_fcidump(format_fcidump(ham)) == ham
