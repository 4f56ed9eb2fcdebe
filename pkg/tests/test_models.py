"""
Tests for the transverse-field Ising ground-state builders.
"""

import numpy as np
import pytest

from pauli_gaussian.errors import ContractViolation, NumericGuardError
from pauli_gaussian.models import (
    TfimSpec,
    bdg_blocks,
    load_r_matrix,
    r_matrix_from_vector,
    tfim_ground_state,
    tfim_r_matrix,
    tfim_r_matrix_bogoliubov,
    tfim_r_matrix_exact_small,
)
from pauli_gaussian.state import computational_statevector, save_state
from tests.conftest import phase_aligned_error


def pair_ratio(coupling, field):
    """Closed-form r_12 of the L = 2 ring."""
    return (np.sqrt(field**2 + coupling**2) - field) / coupling


@pytest.mark.parametrize("size", [0, 3, 7])
def test_spec_needs_even_size(size):
    with pytest.raises(ContractViolation, match="even L"):
        TfimSpec(size)


def test_spec_momenta_are_antiperiodic():
    spec = TfimSpec(4)
    np.testing.assert_allclose(spec.momenta, np.pi * np.array([1, 3, 5, 7]) / 4)
    assert spec.boundary == "periodic"
    assert spec.parity == "even"


@pytest.mark.parametrize("route", ["exact", "bogoliubov"])
def test_two_site_ring(route):
    state = tfim_r_matrix(TfimSpec(2, coupling=1.0, field=0.7), route)
    assert state.r_matrix[0, 1] == pytest.approx(pair_ratio(1.0, 0.7), abs=1e-12)


def test_exact_route_reproduces_ground_state():
    """The Gaussian built from R is the diagonalized ground state."""
    spec = TfimSpec(8, coupling=1.0, field=0.8)
    _, vector = tfim_ground_state(spec)
    state = tfim_r_matrix_exact_small(spec)
    assert phase_aligned_error(computational_statevector(state), vector) < 1e-8


def test_exact_ground_state_pairing_is_real_and_positive():
    state = tfim_r_matrix(TfimSpec(6, field=1.3), "exact")
    upper = state.r_matrix[np.triu_indices(6, k=1)]
    assert np.abs(upper.imag).max() < 1e-10
    assert upper.real.min() > 0


def test_ground_state_energy_matches_modes():
    """E_0 = -1/2 sum_k E_k in the even sector."""
    spec = TfimSpec(6, coupling=1.0, field=0.6)
    energy, _ = tfim_ground_state(spec)
    assert energy == pytest.approx(-0.5 * spec.mode_energies().sum(), abs=1e-9)


@pytest.mark.parametrize("field", [0.5, 1.0, 2.0])
@pytest.mark.parametrize(
    "size", [4, 6, 8, pytest.param(10, marks=pytest.mark.slow)]
)
def test_bogoliubov_matches_exact(size, field):
    spec = TfimSpec(size, coupling=1.0, field=field)
    exact = tfim_r_matrix(spec, "exact")
    bogoliubov = tfim_r_matrix(spec, "bogoliubov")
    np.testing.assert_allclose(bogoliubov.r_matrix, exact.r_matrix, atol=1e-8)


def test_auto_route_is_bogoliubov():
    spec = TfimSpec(6)
    np.testing.assert_array_equal(
        tfim_r_matrix(spec).r_matrix, tfim_r_matrix_bogoliubov(spec).r_matrix
    )


def test_scale_covariance():
    a = tfim_r_matrix(TfimSpec(8, coupling=1.0, field=0.9))
    b = tfim_r_matrix(TfimSpec(8, coupling=3.0, field=2.7))
    np.testing.assert_allclose(a.r_matrix, b.r_matrix, atol=1e-10)


def test_large_field_approaches_vacuum():
    state = tfim_r_matrix(TfimSpec(10, coupling=1.0, field=100.0))
    assert np.abs(state.r_matrix).max() < 0.02


def test_bdg_blocks_symmetry():
    a, b = bdg_blocks(TfimSpec(6, coupling=0.7, field=1.2))
    np.testing.assert_array_equal(a, a.T)
    np.testing.assert_array_equal(b, -b.T)
    np.testing.assert_allclose(np.diag(a), 2.4)
    # antiperiodic bond between the last and first site
    assert a[5, 0] == pytest.approx(0.7)
    assert a[0, 1] == pytest.approx(-0.7)


def test_gapless_spectrum_is_refused():
    with pytest.raises(NumericGuardError, match="Gapless Bogoliubov mode"):
        tfim_r_matrix(TfimSpec(4, coupling=0.0, field=0.0))


def test_exact_route_guard(fresh_config):
    fresh_config.max_exact_model_sites = 6
    with pytest.raises(NumericGuardError, match="bogoliubov route"):
        tfim_r_matrix(TfimSpec(8), "exact")


def test_unknown_route():
    with pytest.raises(ContractViolation):
        tfim_r_matrix(TfimSpec(4), "dmrg")


def test_r_matrix_from_vector_needs_vacuum_amplitude():
    vector = np.zeros(4, dtype=complex)
    vector[3] = 1.0
    with pytest.raises(NumericGuardError, match="Vacuum amplitude"):
        r_matrix_from_vector(vector, 2)


def test_load_r_matrix_round_trip(tmp_path):
    state = tfim_r_matrix(TfimSpec(6, field=0.5))
    path = tmp_path / "tfim.json"
    save_state(state, path)
    loaded = load_r_matrix(path)
    np.testing.assert_array_equal(loaded.r_matrix, state.r_matrix)
