"""Tests for chain builders and matrix-free Pauli-sum action."""

import numpy as np
import pytest

from qtherm.chains import (
    ChainModel,
    ResourceGuardError,
    build_ising,
    build_xxz,
    check_dense_guard,
    check_purification_guard,
)
from qtherm.pauli import PauliSum, single_site, two_site
from qtherm.states import hermitian_eig


def test_ising_l3_ground_energy():
    vals, _ = hermitian_eig(build_ising(3, 0.0))
    assert abs(vals[0] - (-3.0)) < 1e-12


def test_ising_l2_double_bond_fixture():
    # periodic sum counts the single L=2 bond twice: H = -2 XX, spectrum {-2,-2,2,2}
    vals, _ = hermitian_eig(build_ising(2, 0.0))
    assert np.allclose(vals, [-2.0, -2.0, 2.0, 2.0], atol=1e-12)


def test_ising_spin_flip_parity_at_zero_field():
    h = build_ising(4, 0.0).entries
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    p = np.array([[1.0 + 0j]])
    for _ in range(4):
        p = np.kron(p, x)
    assert np.max(np.abs(h @ p - p @ h)) < 1e-12


def test_xxz_commutes_with_total_sz():
    h = build_xxz(4, 0.7).entries
    z = np.diag([1.0, -1.0]).astype(complex)
    total = np.zeros_like(h)
    for i in range(4):
        total += PauliSum(4, ((1.0, single_site(4, i, "Z")),)).to_dense()
    assert np.max(np.abs(h @ total - total @ h)) < 1e-12


def test_xxz_l2_double_bond_fixture():
    # doubled Heisenberg bond: 2(XX+YY+ZZ) has spectrum {-6, 2, 2, 2}
    vals, _ = hermitian_eig(build_xxz(2, 1.0))
    assert np.allclose(vals, [-6.0, 2.0, 2.0, 2.0], atol=1e-12)


def test_xx_chain_spectrum_symmetric():
    vals, _ = hermitian_eig(build_xxz(4, 0.0))
    assert np.max(np.abs(np.sort(vals) + np.sort(-vals)[::-1])) < 1e-10


def test_chain_model_validation():
    with pytest.raises(ValueError, match="kind"):
        ChainModel(kind="heisenberg", n_sites=4, coupling_param=1.0)
    with pytest.raises(ValueError, match="at least 2"):
        ChainModel(kind="ising", n_sites=1, coupling_param=1.0)


def test_resource_guards():
    check_dense_guard(12)
    check_purification_guard(10)
    with pytest.raises(ResourceGuardError, match="L <= 12"):
        check_dense_guard(13)
    with pytest.raises(ResourceGuardError, match="L <= 10"):
        check_purification_guard(11)


# --- Pauli sums --------------------------------------------------------------

def test_pauli_sum_validation():
    with pytest.raises(ValueError, match="n_sites"):
        PauliSum(n_sites=3, terms=((1.0, "XX"),))
    with pytest.raises(ValueError, match="invalid"):
        PauliSum(n_sites=2, terms=((1.0, "XQ"),))


def test_pauli_helpers():
    assert single_site(4, 2, "Y") == "IIYI"
    assert two_site(4, 0, 3, "X", "Z") == "XIIZ"


def test_apply_last_axis_matches_dense():
    rng = np.random.default_rng(0)
    for model in (ChainModel("ising", 4, 0.7), ChainModel("xxz", 4, -0.9)):
        terms = model.terms()
        dense = terms.to_dense()
        vec = rng.normal(size=16) + 1j * rng.normal(size=16)
        assert np.max(np.abs(terms.apply_last_axis(vec) - dense @ vec)) < 1e-12
        # batched: operator acts on the last axis of a stack
        batch = rng.normal(size=(3, 16)) + 1j * rng.normal(size=(3, 16))
        got = terms.apply_last_axis(batch)
        want = batch @ dense.T
        assert np.max(np.abs(got - want)) < 1e-12


def test_apply_last_axis_shape_check():
    terms = ChainModel("ising", 3, 1.0).terms()
    with pytest.raises(ValueError, match="last axis"):
        terms.apply_last_axis(np.zeros(4))
