"""
Tests for post-measurement states, entanglement entropies and decay fits.
"""

import numpy as np
import pandas as pd
import pytest

from pauli_gaussian.basis import PauliBasisSpec, SpinConfiguration
from pauli_gaussian.errors import ContractViolation, NumericGuardError
from pauli_gaussian.models import TfimSpec, tfim_r_matrix
from pauli_gaussian.oracle import dense_from_gaussian, oracle_condition, oracle_partial_trace
from pauli_gaussian.postmeasure import (
    SCAN_COLUMNS,
    GeometryTemplate,
    MeasurementGeometry,
    ReducedDensityMatrix,
    condition_on_outcome,
    decay_scan,
    extrapolate_exponent,
    fit_decay_exponent,
    fit_exponential_decay,
    get_pattern,
    read_scan_csv,
    reduced_density_matrix,
    renyi_entropy,
    scaling_dimension,
    write_scan_csv,
)
from pauli_gaussian.probentropy import SubregionOutcome, marginal_probability
from pauli_gaussian.state import make_state


def synthetic_scan(values, size=256, alphas=(1.0,)):
    """Scan table with r = d and entropy = values(d) for d = 1..40."""
    rows = [(size, d, float(d), a, values(d), 0.5) for a in alphas for d in range(1, 41)]
    return pd.DataFrame(rows, columns=SCAN_COLUMNS)


def test_ring_geometry():
    geometry = MeasurementGeometry.ring(12, 2, 2, 3)
    assert geometry.a1 == (0, 1)
    assert geometry.b1 == (2, 3, 4)
    assert geometry.a2 == (5, 6)
    assert geometry.b2 == (7, 8, 9, 10, 11)
    assert geometry.distance == 3
    assert geometry.a_sites == (0, 1, 5, 6)


@pytest.mark.parametrize("args", [(6, 2, 2, 3), (6, 0, 2, 1), (6, 2, 2, -1)])
def test_ring_geometry_must_fit(args):
    with pytest.raises(ContractViolation):
        MeasurementGeometry.ring(*args)


def test_geometry_must_partition():
    with pytest.raises(ContractViolation, match="partition"):
        MeasurementGeometry(4, (0,), (1,), (1,), (3,))


def test_empty_b_gives_pure_state_entanglement(make_random_state, make_random_basis):
    """With nothing measured, P = 1 and rho_A1 has the spectrum of the plain partial trace."""
    state, basis = make_random_state(4), make_random_basis(4)
    geometry = MeasurementGeometry.ring(4, 2, 2, 0)
    pm = condition_on_outcome(state, basis, geometry)
    assert pm.probability == pytest.approx(1.0)
    rho = reduced_density_matrix(pm)
    reference = ReducedDensityMatrix(oracle_partial_trace(dense_from_gaussian(state), [0, 1]))
    np.testing.assert_allclose(rho.eigenvalues(), reference.eigenvalues(), atol=1e-12)


def test_outcome_probability_is_marginal(make_random_state, make_random_basis):
    state, basis = make_random_state(7), make_random_basis(7)
    geometry = MeasurementGeometry.ring(7, 2, 1, 2)
    outcome = SpinConfiguration((1, -1, -1, 1))
    pm = condition_on_outcome(state, basis, geometry, outcome)
    marginal = marginal_probability(state, basis, SubregionOutcome(geometry.b_sites, outcome))
    assert pm.probability == pytest.approx(marginal)
    assert pm.norm == pytest.approx(1.0)


def test_conditioned_vector_matches_oracle(make_random_state, make_random_basis):
    state, basis = make_random_state(6), make_random_basis(6)
    geometry = MeasurementGeometry.ring(6, 1, 2, 2)
    outcome = SpinConfiguration((-1, 1, 1))
    pm = condition_on_outcome(state, basis, geometry, outcome)
    vector, probability = oracle_condition(
        dense_from_gaussian(state), basis, geometry.b_sites, outcome, geometry.a_sites
    )
    assert pm.probability == pytest.approx(probability)
    np.testing.assert_allclose(pm.vector, vector, atol=1e-10)


def test_density_matrices_are_valid_and_symmetric(make_random_state, make_random_basis):
    """rho_A1 and rho_A2 of a pure conditional state share their nonzero spectrum."""
    state, basis = make_random_state(8), make_random_basis(8)
    geometry = MeasurementGeometry.ring(8, 2, 3, 2)
    pm = condition_on_outcome(state, basis, geometry, SpinConfiguration((1, 1, -1)))
    rho1 = reduced_density_matrix(pm, "A1")
    rho2 = reduced_density_matrix(pm, "A2")
    assert rho1.check() == []
    assert rho2.check() == []
    assert rho1.dimension == 4
    assert rho2.dimension == 8
    for alpha in (0.5, 1, 2):
        assert renyi_entropy(rho1, alpha) == pytest.approx(renyi_entropy(rho2, alpha), abs=1e-10)


def test_unknown_block(make_random_state, make_random_basis):
    pm = condition_on_outcome(
        make_random_state(4), make_random_basis(4), MeasurementGeometry.ring(4, 2, 2, 0)
    )
    with pytest.raises(ContractViolation):
        reduced_density_matrix(pm, "B1")


def test_outcome_probabilities_sum_to_one(make_random_state, make_random_basis):
    state, basis = make_random_state(6), make_random_basis(6)
    geometry = MeasurementGeometry.ring(6, 1, 1, 2)
    total = sum(
        condition_on_outcome(state, basis, geometry, SpinConfiguration.from_index(i, 4)).probability
        for i in range(16)
    )
    assert total == pytest.approx(1.0)


def test_zero_probability_outcome():
    """The vacuum never shows '+' in sigma^z."""
    state = make_state(np.zeros((4, 4)))
    geometry = MeasurementGeometry.ring(4, 1, 1, 1)
    with pytest.raises(NumericGuardError, match="zero probability"):
        condition_on_outcome(
            state, PauliBasisSpec.named("z", 4), geometry, SpinConfiguration((1, 1))
        )


def test_outcome_length_is_checked(make_random_state, make_random_basis):
    geometry = MeasurementGeometry.ring(4, 1, 1, 1)
    with pytest.raises(ContractViolation, match="2 signs"):
        condition_on_outcome(make_random_state(4), make_random_basis(4), geometry, None)


def test_conditioning_guard(fresh_config, make_random_state, make_random_basis):
    fresh_config.max_conditioned_sites = 3
    geometry = MeasurementGeometry.ring(6, 2, 2, 1)
    with pytest.raises(NumericGuardError, match="limited to 3"):
        condition_on_outcome(
            make_random_state(6), make_random_basis(6), geometry, SpinConfiguration((1, 1))
        )


def test_renyi_entropy_cases():
    pure = ReducedDensityMatrix(np.diag([1.0, 0.0]))
    mixed = ReducedDensityMatrix(np.eye(2) / 2)
    for alpha in (0.5, 1, 2, 5):
        assert renyi_entropy(pure, alpha) == pytest.approx(0.0, abs=1e-14)
        assert renyi_entropy(mixed, alpha) == pytest.approx(np.log(2))
    with pytest.raises(ContractViolation):
        renyi_entropy(mixed, -1)


def test_eigenvalue_floor():
    rho = ReducedDensityMatrix(np.diag([1.0, 1e-16]))
    assert rho.eigenvalues()[0] == 0.0
    assert rho.purity == pytest.approx(1.0)


def test_density_matrix_check_reports_issues():
    rho = ReducedDensityMatrix(np.array([[1.0, 0.5], [0.0, 0.5]]))
    issues = rho.check()
    assert "not Hermitian" in issues
    assert any(issue.startswith("trace") for issue in issues)


def test_patterns():
    geometry = MeasurementGeometry.ring(12, 2, 2, 4)
    assert str(get_pattern("x-all-plus").outcome(geometry)) == "++++++++"
    assert str(get_pattern("x-plus-minus").outcome(geometry)) == "++++----"
    assert str(get_pattern("x-alternating").outcome(geometry)) == "+-+-+-+-"
    assert str(get_pattern("x-alternating-plus").outcome(geometry)) == "+-+-++++"
    z_basis = get_pattern("z-all-plus").basis(12)
    np.testing.assert_allclose(z_basis.theta, np.pi)


def test_alternating_pattern_needs_even_blocks():
    geometry = MeasurementGeometry.ring(12, 2, 2, 3)
    with pytest.raises(ContractViolation, match="even block"):
        get_pattern("x-alternating").outcome(geometry)


def test_alternating_b1_scans_even_separations():
    assert get_pattern("x-alternating").distance_step == 2
    assert get_pattern("x-alternating-plus").distance_step == 2
    assert get_pattern("x-plus-minus").distance_step == 1


def test_unknown_pattern():
    with pytest.raises(ContractViolation, match="Unknown outcome pattern"):
        get_pattern("y-all-plus")


def test_z_pattern_on_vacuum_is_a_product():
    """theta = pi '+' is the empty site, so the vacuum gives P = 1 and no entanglement."""
    state = make_state(np.zeros((8, 8)))
    table = decay_scan(state, None, "z-all-plus", [1.0], [1, 2], GeometryTemplate(8))
    assert table["P_outcome"].tolist() == pytest.approx([1.0, 1.0])
    assert table["entropy"].abs().max() < 1e-12


def test_decay_scan_table():
    template = GeometryTemplate(10)
    table = decay_scan(
        lambda size: tfim_r_matrix(TfimSpec(size)),
        None,
        get_pattern("x-all-plus"),
        [0.5, 2.0],
        [1, 2, 3],
        template,
    )
    assert list(table.columns) == SCAN_COLUMNS
    assert len(table) == 6
    assert (table["L"] == 10).all()
    assert (table["entropy"] >= 0).all()
    assert ((table["P_outcome"] > 0) & (table["P_outcome"] <= 1)).all()
    # Renyi entropies decrease with alpha at fixed d
    for _, group in table.groupby("d"):
        assert group.sort_values("alpha")["entropy"].is_monotonic_decreasing


def test_decay_scan_rejects_bad_alpha():
    with pytest.raises(ContractViolation):
        decay_scan(
            make_state(np.zeros((8, 8))), None, "x-all-plus", [0.0], [1], GeometryTemplate(8)
        )


def test_scan_csv_round_trip(tmp_path):
    table = synthetic_scan(lambda d: 1.0 / d)
    path = tmp_path / "scan.csv"
    write_scan_csv(table, path)
    loaded = read_scan_csv(path)
    pd.testing.assert_frame_equal(loaded, table, check_dtype=False)


def test_read_scan_csv_fills_missing_separation(tmp_path):
    path = tmp_path / "old.csv"
    path.write_text("L,d,alpha,entropy,P_outcome\n128,4,1.0,0.1,0.5\n128,10,1.0,0.05,0.5\n")
    table = read_scan_csv(path)
    assert list(table.columns) == SCAN_COLUMNS
    np.testing.assert_allclose(table["r"], GeometryTemplate(128).separation([4, 10]))


def test_read_scan_csv_needs_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("d,entropy\n1,0.5\n")
    with pytest.raises(ContractViolation, match="lacks columns"):
        read_scan_csv(path)


@pytest.mark.parametrize("alpha, delta1", [(0.5, 0.75), (1.0, 0.375), (2.0, 0.375)])
def test_power_law_fit(alpha, delta1):
    table = synthetic_scan(lambda d: 3.0 * d**-1.5, alphas=(alpha,))
    fit = fit_decay_exponent(table, alpha)
    assert fit.eta == pytest.approx(1.5)
    assert fit.delta1 == pytest.approx(delta1)
    assert fit.residual < 1e-12
    assert fit.window == (4, 32)
    assert fit.points == 29
    assert fit.intercept == pytest.approx(np.log(3.0))


def test_fit_explicit_window_and_alpha_selection():
    table = pd.concat(
        [
            synthetic_scan(lambda d: d**-2.0, alphas=(1.0,)),
            synthetic_scan(lambda d: d**-1.0, alphas=(0.5,)),
        ]
    )
    assert fit_decay_exponent(table, 1.0, (4, 16)).eta == pytest.approx(2.0)
    assert fit_decay_exponent(table, 0.5, (4, 16)).eta == pytest.approx(1.0)


def test_fit_needs_enough_points():
    table = synthetic_scan(lambda d: 1.0 / d)
    with pytest.raises(ContractViolation, match="at least 4"):
        fit_decay_exponent(table, 1.0, (4, 6))


def test_fit_skips_nonpositive_entropies():
    table = synthetic_scan(lambda d: 1.0 / d if d % 2 else 0.0)
    fit = fit_decay_exponent(table, 1.0, (1, 20))
    assert fit.points == 10
    assert fit.eta == pytest.approx(1.0)


def test_exponential_fit_beats_power_law_on_exponential_data():
    table = synthetic_scan(lambda d: 2.0 * np.exp(-d / 5.0))
    exponential = fit_exponential_decay(table, 1.0, (4, 16))
    power = fit_decay_exponent(table, 1.0, (4, 16))
    assert exponential.rate == pytest.approx(0.2)
    assert exponential.correlation_length == pytest.approx(5.0)
    assert exponential.residual < power.residual


def test_scaling_dimension():
    assert scaling_dimension(2.0, 0.5) == pytest.approx(1.0)
    assert scaling_dimension(2.0, 1.0) == pytest.approx(0.5)


def test_extrapolation():
    sizes = [64, 96, 128]
    eta, slope, residual = extrapolate_exponent(sizes, [1.0 + 3.0 / L for L in sizes])
    assert eta == pytest.approx(1.0)
    assert slope == pytest.approx(3.0)
    assert residual < 1e-12
    with pytest.raises(ContractViolation):
        extrapolate_exponent([64], [1.0])


def test_separation_is_the_chord_between_block_centres():
    template = GeometryTemplate(128)
    x = np.array([4.0, 16.0]) + 2.0
    np.testing.assert_allclose(template.separation([4, 16]), 128 / np.pi * np.sin(np.pi * x / 128))
    # the chord is symmetric about half the ring
    assert GeometryTemplate(16, 1, 1).separation(7) == pytest.approx(16 / np.pi)
    assert template.separation(4) < 6.0


def test_decay_scan_records_separation():
    template = GeometryTemplate(10)
    table = decay_scan(tfim_r_matrix(TfimSpec(10)), None, "z-all-plus", [1.0], [1, 3], template)
    np.testing.assert_allclose(table["r"], template.separation([1, 3]))


def test_fit_runs_on_separation_not_block_count():
    rows = [(128, d, d + 2.0, 1.0, (d + 2.0) ** -2.0, 0.5) for d in range(4, 17)]
    fit = fit_decay_exponent(pd.DataFrame(rows, columns=SCAN_COLUMNS), 1.0, (4, 16))
    assert fit.eta == pytest.approx(2.0)
    assert fit.residual < 1e-12


def test_default_window():
    assert GeometryTemplate(128).default_window() == (4, 16)
    assert GeometryTemplate(16).default_window() == (4, 4)


# Reproduction at L = 128 (run with -m slow)


def critical_scan(pattern, alphas, step=1):
    template = GeometryTemplate(128)
    state = tfim_r_matrix(TfimSpec(128))
    return decay_scan(state, None, pattern, alphas, list(range(4, 17, step)), template)


@pytest.mark.slow
def test_critical_z_all_plus_dimension():
    table = critical_scan("z-all-plus", [0.5, 1.0, 2.0])
    fit = fit_decay_exponent(table, 1.0, (4, 16))
    assert fit.delta1 == pytest.approx(0.5, rel=0.2)
    ratio = fit_decay_exponent(table, 0.5, (4, 16)).eta / fit_decay_exponent(table, 2.0, (4, 16)).eta
    assert ratio == pytest.approx(0.5, abs=0.15)


@pytest.mark.slow
@pytest.mark.parametrize(
    "pattern, delta1, rel, step",
    [
        ("x-all-plus", 2.0, 0.25, 1),
        ("x-plus-minus", 1.0, 0.25, 1),
        ("x-alternating", 0.5, 0.25, 2),
        ("x-alternating-plus", 1.0, 0.25, 2),
    ],
)
def test_critical_x_pattern_dimensions(pattern, delta1, rel, step):
    fit = fit_decay_exponent(critical_scan(pattern, [1.0], step), 1.0, (4, 16))
    assert fit.delta1 == pytest.approx(delta1, rel=rel)


@pytest.mark.slow
def test_off_critical_decay_is_exponential():
    state = tfim_r_matrix(TfimSpec(128, coupling=1.0, field=2.0))
    table = decay_scan(state, None, "z-all-plus", [1.0], list(range(4, 17)), GeometryTemplate(128))
    exponential = fit_exponential_decay(table, 1.0, (4, 16))
    power = fit_decay_exponent(table, 1.0, (4, 16))
    assert exponential.residual < power.residual
