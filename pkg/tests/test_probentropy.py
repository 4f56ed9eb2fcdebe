"""
Tests for formation probabilities, marginals, entropies and the
most-likely-outcome search.
"""

import io
import itertools

import numpy as np
import pandas as pd
import pytest

from pauli_gaussian.amplitude import evaluate
from pauli_gaussian.basis import PauliBasisSpec, SpinConfiguration
from pauli_gaussian.errors import ContractViolation, NumericGuardError
from pauli_gaussian.probentropy import (
    SubregionOutcome,
    entropy_of_distribution,
    marginal_probability,
    max_probability_search,
    probability,
    probability_table,
    shannon_renyi_entropy,
    write_probability_csv,
)
from pauli_gaussian.state import make_state


def test_vacuum_z_all_minus_is_certain():
    """The vacuum has every site empty: '-' on every site with probability 1."""
    state = make_state(np.zeros((5, 5)))
    basis = PauliBasisSpec.named("z", 5)
    down = SpinConfiguration.all_plus(5).flipped()
    assert probability(state, basis, down) == pytest.approx(1.0)
    assert probability(state, basis, SpinConfiguration.all_plus(5)) == 0


@pytest.mark.parametrize("size", [2, 3, 4, 5])
def test_paths_agree(make_random_state, make_random_basis, size):
    state, basis = make_random_state(size), make_random_basis(size, theta_margin=0.05)
    for index in range(0, 2**size, 3):
        config = SpinConfiguration.from_index(index, size)
        direct = probability(state, basis, config, "amplitude_squared")
        ratio = probability(state, basis, config, "det_ratio")
        assert ratio == pytest.approx(direct, rel=1e-9, abs=1e-14)
        assert direct == pytest.approx(abs(evaluate(state, basis, config)) ** 2, abs=1e-12)


def test_det_ratio_refuses_singular_band(make_random_state):
    state = make_random_state(4)
    with pytest.raises(NumericGuardError):
        probability(state, PauliBasisSpec.named("z", 4), SpinConfiguration.all_plus(4), "det_ratio")


def test_alpha_does_not_change_probabilities(make_random_state, make_random_basis):
    """Bit-identical under any alpha."""
    state, basis = make_random_state(5), make_random_basis(5)
    other = basis.replace(alpha=basis.alpha + 1.234)
    for index in range(32):
        config = SpinConfiguration.from_index(index, 5)
        assert probability(state, basis, config) == probability(state, other, config)


@pytest.mark.parametrize("size", [1, 3, 6])
@pytest.mark.parametrize("path", ["amplitude_squared", "det_ratio"])
def test_table_is_complete(make_random_state, make_random_basis, size, path):
    state, basis = make_random_state(size), make_random_basis(size, theta_margin=0.05)
    table = probability_table(state, basis, path)
    assert table.complete
    assert table.total == pytest.approx(1.0, abs=1e-9)
    assert table.probabilities.min() >= 0


def test_table_is_worker_invariant(make_random_state, make_random_basis, monkeypatch):
    monkeypatch.setattr("pauli_gaussian.probentropy.BLOCK_SIZE", 8)
    state, basis = make_random_state(6), make_random_basis(6)
    serial = probability_table(state, basis, workers=1)
    threaded = probability_table(state, basis, workers=3)
    np.testing.assert_array_equal(serial.probabilities, threaded.probabilities)


def test_table_guard(fresh_config, make_random_state):
    fresh_config.max_enumeration_sites = 4
    with pytest.raises(NumericGuardError, match="2\\^5"):
        probability_table(make_random_state(5), PauliBasisSpec.named("x", 5))


def test_marginal_sums_completions(make_random_state, make_random_basis):
    state, basis = make_random_state(5), make_random_basis(5)
    outcome = SubregionOutcome((0, 3), SpinConfiguration((-1, 1)))
    table = probability_table(state, basis)
    expected = sum(
        p for c, p in zip(table.configs, table.probabilities) if c.signs[0] == -1 and c.signs[3] == 1
    )
    assert marginal_probability(state, basis, outcome) == pytest.approx(expected)


def test_marginals_over_all_outcomes_sum_to_one(make_random_state, make_random_basis):
    state, basis = make_random_state(4), make_random_basis(4)
    total = sum(
        marginal_probability(
            state, basis, SubregionOutcome((1, 2), SpinConfiguration.from_index(i, 2))
        )
        for i in range(4)
    )
    assert total == pytest.approx(1.0)


def test_subregion_outcome_validation():
    with pytest.raises(ContractViolation):
        SubregionOutcome((), SpinConfiguration((1,)))
    with pytest.raises(ContractViolation):
        SubregionOutcome((2, 1), SpinConfiguration((1, 1)))
    with pytest.raises(ContractViolation):
        SubregionOutcome((0, 1), SpinConfiguration((1,)))


def test_subregion_extend():
    outcome = SubregionOutcome((1, 3), SpinConfiguration((-1, -1)))
    full = outcome.extend(5, SpinConfiguration((1, 1, 1)))
    assert str(full) == "+-+-+"


def test_entropy_of_certain_outcome_is_zero():
    state = make_state(np.zeros((4, 4)))
    basis = PauliBasisSpec.named("z", 4)
    for alpha in (0.5, 1, 2):
        assert shannon_renyi_entropy(state, basis, alpha) == pytest.approx(0.0, abs=1e-12)


def test_entropy_of_uniform_distribution():
    """The vacuum measured in x is uniform over 2^L outcomes: L ln 2."""
    state = make_state(np.zeros((4, 4)))
    basis = PauliBasisSpec.named("x", 4)
    for alpha in (0.5, 1, 3):
        assert shannon_renyi_entropy(state, basis, alpha) == pytest.approx(4 * np.log(2))


def test_entropy_is_bracketed_and_monotone(make_random_state, make_random_basis):
    state, basis = make_random_state(5), make_random_basis(5)
    values = [shannon_renyi_entropy(state, basis, a) for a in (0.5, 1, 2, 4)]
    assert all(0 <= v <= 5 * np.log(2) + 1e-12 for v in values)
    assert values == sorted(values, reverse=True)


def test_entropy_of_distribution():
    p = np.array([0.5, 0.25, 0.25, 0.0])
    assert entropy_of_distribution(p, 1) == pytest.approx(1.5 * np.log(2))
    assert entropy_of_distribution(p, 2) == pytest.approx(-np.log(0.375))
    with pytest.raises(ContractViolation):
        entropy_of_distribution(p, 0)


def test_probability_csv_footer(make_random_state):
    state = make_random_state(3)
    table = probability_table(state, PauliBasisSpec.named("x", 3))
    buffer = io.StringIO()
    write_probability_csv(table, buffer)
    buffer.seek(0)
    frame = pd.read_csv(buffer)
    assert list(frame.columns) == ["config", "probability", "path"]
    assert len(frame) == 9
    assert frame["config"].iloc[-1] == "total"
    assert frame["probability"].iloc[-1] == pytest.approx(1.0)
    assert frame["probability"].iloc[:-1].sum() == pytest.approx(frame["probability"].iloc[-1])


def test_search_finds_certain_outcome_of_vacuum():
    state = make_state(np.zeros((3, 3)))
    result = max_probability_search(state, grid_resolution=3, restarts=1, max_sweeps=3)
    assert result.probability == pytest.approx(1.0, abs=1e-9)
    assert result.global_entanglement == pytest.approx(0.0, abs=1e-9)
    assert probability(state, result.basis, result.config) == pytest.approx(result.probability)


def test_search_beats_named_bases(make_random_state):
    """The search result is at least the best z or x outcome."""
    state = make_random_state(4, scale=0.8)
    named = max(
        probability_table(state, PauliBasisSpec.named(name, 4)).probabilities.max()
        for name in ("z", "x")
    )
    result = max_probability_search(state, grid_resolution=5, restarts=2, max_sweeps=5)
    assert result.probability >= named - 1e-9
    assert result.probability <= 1 + 1e-9


def test_search_beats_uniform_grid(make_random_state):
    """The search result is at least the best outcome of any basis on a uniform 9^3 grid."""
    state = make_random_state(4, scale=0.8)
    angles = np.linspace(0.0, 2 * np.pi, 9, endpoint=False)
    thetas = np.linspace(0.0, np.pi, 9)
    grid_best = max(
        probability_table(state, PauliBasisSpec.uniform(4, phi, theta, alpha)).probabilities.max()
        for phi, theta, alpha in itertools.product(angles, thetas, angles)
    )
    result = max_probability_search(state, grid_resolution=9, restarts=2, max_sweeps=5)
    assert result.probability >= grid_best - 1e-9


def test_search_is_reproducible(make_random_state):
    state = make_random_state(3)
    a = max_probability_search(state, grid_resolution=3, restarts=2, seed=5, max_sweeps=3)
    b = max_probability_search(state, grid_resolution=3, restarts=2, seed=5, max_sweeps=3)
    assert a.probability == b.probability
    assert a.config == b.config


def test_search_guard(fresh_config, make_random_state):
    fresh_config.max_search_sites = 2
    with pytest.raises(NumericGuardError):
        max_probability_search(make_random_state(3))
