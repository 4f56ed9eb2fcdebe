"""
Invariant suite run by `pauli-gaussian validate`.

Each check draws random instances at the configured sizes and reports the
largest residual against its tolerance. The suite is described in YAML;
the packaged default is default_suite.yaml.
"""

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import yaml

from .amplitude import (
    AmplitudeRequest,
    amplitude_relations_check,
    domain_wall_amplitude,
    evaluate,
    flip_configuration,
    m_matrix,
    m_matrix_from_pairs,
    padded_problem,
    reflect_basis,
)
from .basis import PauliBasisSpec, SpinConfiguration
from .errors import ParseError
from .oracle import dense_from_gaussian, oracle_rotated_vector
from .probentropy import probability, probability_table
from .recursion import recursive_amplitude, recursive_amplitude_alt
from .skewlin import lieb_odd_extension, lieb_shifted_pfaffian, lieb_subset_sum
from .state import (
    FermionConfiguration,
    base_config_change,
    computational_statevector,
    ensure_vacuum_base,
    make_state,
    random_state,
)

log = logging.getLogger(__name__)

DEFAULT_SUITE = "default_suite.yaml"


def random_basis(rng: np.random.Generator, size: int, theta_margin: float = 0.0) -> PauliBasisSpec:
    """Random per-site angles; theta stays `theta_margin` away from 0, pi and 2pi."""
    phi = rng.uniform(0, 2 * np.pi, size)
    alpha = rng.uniform(0, 2 * np.pi, size)
    theta = rng.uniform(theta_margin, np.pi - theta_margin, size)
    theta = theta + np.pi * rng.integers(0, 2, size)
    return PauliBasisSpec(phi, theta, alpha)


def _state(rng: np.random.Generator, size: int):
    return random_state(size, seed=int(rng.integers(2**31)))


def _all_configs(size: int) -> list[SpinConfiguration]:
    return [SpinConfiguration.from_index(i, size) for i in range(2**size)]


def _phase_aligned(a: np.ndarray, b: np.ndarray) -> float:
    """max |a - c b| over the best unit-modulus c."""
    overlap = np.vdot(b, a)
    c = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(a - c * b))) if len(a) else 0.0


# Checks: (rng, size) -> residual of one random instance


def check_oracle_equivalence(rng, size):
    state, basis = _state(rng, size), random_basis(rng, size)
    reference = oracle_rotated_vector(dense_from_gaussian(state), basis)
    engine = np.array([evaluate(state, basis, c) for c in _all_configs(size)])
    return float(np.max(np.abs(engine - reference)))


def check_path_equivalence(rng, size):
    state, basis = _state(rng, size), random_basis(rng, size, theta_margin=0.05)
    config = SpinConfiguration.from_index(int(rng.integers(2**size)), size)
    direct = evaluate(state, basis, config, "m_form")
    tan = evaluate(state, basis, config, "tan_form")
    return abs(tan - direct) / max(abs(direct), 1e-12)


def _recursion_check(function):
    def check(rng, size):
        state, basis = _state(rng, size), random_basis(rng, size)
        config = SpinConfiguration.from_index(int(rng.integers(2**size)), size)
        return abs(function(state, basis, config) - evaluate(state, basis, config))

    return check


def check_phase_shift_identity(rng, size):
    state, basis = _state(rng, size), random_basis(rng, size)
    config = SpinConfiguration.from_index(int(rng.integers(2**size)), size)
    negated = make_state(-state.r_matrix)
    shifted = basis.replace(phi=basis.phi + np.pi / 2)
    return abs(evaluate(state, basis, config) - evaluate(negated, shifted, config))


def check_reflection(rng, size):
    state, basis = _state(rng, size), random_basis(rng, size)
    config = SpinConfiguration.from_index(int(rng.integers(2**size)), size)
    flipped = abs(evaluate(state, basis, flip_configuration(config)))
    reflected = abs(evaluate(state, reflect_basis(basis), config))
    return abs(flipped - reflected)


def check_pair_forms(rng, size):
    state, basis = _state(rng, size), random_basis(rng, size)
    config = SpinConfiguration.from_index(int(rng.integers(2**size)), size)
    req = AmplitudeRequest(state, basis, config)
    problem = padded_problem(state, basis, config)
    direct = m_matrix(problem.r_matrix, problem.phi, problem.theta, problem.signs)
    return max(
        float(np.max(np.abs(m_matrix_from_pairs(req, variant) - direct)))
        for variant in ("theta", "phi")
    )


def check_amplitude_relations(rng, size):
    state = _state(rng, size)
    phi = rng.uniform(0, np.pi / 2)
    basis = PauliBasisSpec.uniform(size, phi, np.pi / 2)
    return amplitude_relations_check(state, basis)["max_residual"]


def check_domain_wall(rng, size):
    state = _state(rng, size)
    phi = rng.uniform(0, np.pi / 2)
    basis = PauliBasisSpec.uniform(size, phi, np.pi / 2, 0.0)
    configs = _all_configs(size)
    engine = np.array([evaluate(state, basis, c) for c in configs])
    walls = np.array([domain_wall_amplitude(state, phi, c) for c in configs])
    odd = np.array([len(c.minus_sites) % 2 for c in configs], dtype=bool)
    return max(_phase_aligned(walls[~odd], engine[~odd]), _phase_aligned(walls[odd], engine[odd]))


def check_lieb(rng, size):
    upper = np.triu(rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)), k=1)
    m = upper - upper.T
    lambdas = rng.normal(size=size) + 1j * rng.normal(size=size)
    lhs = lieb_shifted_pfaffian(m, lambdas) if size % 2 == 0 else lieb_odd_extension(m, lambdas)
    return abs(lhs - lieb_subset_sum(m, lambdas))


def check_probability_completeness(rng, size):
    state, basis = _state(rng, size), random_basis(rng, size, theta_margin=0.05)
    return max(
        abs(probability_table(state, basis, path).total - 1)
        for path in ("amplitude_squared", "det_ratio")
    )


def check_probability_paths(rng, size):
    state, basis = _state(rng, size), random_basis(rng, size, theta_margin=0.05)
    config = SpinConfiguration.from_index(int(rng.integers(2**size)), size)
    direct = probability(state, basis, config, "amplitude_squared")
    ratio = probability(state, basis, config, "det_ratio")
    return abs(ratio - direct) / max(direct, 1e-12)


def check_base_change(rng, size):
    state = _state(rng, size)
    base = FermionConfiguration.from_index(int(rng.integers(2**size)), size)
    if len(base.occupied) % 2:
        base = base.flipped([0])
    rebased = base_config_change(ensure_vacuum_base(state), base)
    return _phase_aligned(computational_statevector(rebased), computational_statevector(state))


CHECKS: dict[str, Callable] = {
    "oracle_equivalence": check_oracle_equivalence,
    "path_equivalence": check_path_equivalence,
    "recursion": _recursion_check(recursive_amplitude),
    "recursion_alternative": _recursion_check(recursive_amplitude_alt),
    "phase_shift_identity": check_phase_shift_identity,
    "reflection": check_reflection,
    "pair_forms": check_pair_forms,
    "amplitude_relations": check_amplitude_relations,
    "domain_wall": check_domain_wall,
    "lieb_formula": check_lieb,
    "probability_completeness": check_probability_completeness,
    "probability_paths": check_probability_paths,
    "base_change": check_base_change,
}

# Checks whose closed forms exist only at particular sizes
FIXED_SIZES: dict[str, tuple[int, ...]] = {"amplitude_relations": (4,)}


@dataclass
class CheckSpec:
    name: str
    sizes: list[int]
    tolerance: float
    trials: int


@dataclass
class CheckResult:
    name: str
    size: int
    trials: int
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_residual) and self.max_residual <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "L": self.size,
            "trials": self.trials,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class ValidationReport:
    seed: int
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "results": [r.to_dict() for r in self.results],
        }


def load_suite(path: Optional[Path] = None, trials: Optional[int] = None) -> list[CheckSpec]:
    """
    Read a suite file (default: the packaged suite).

    Raises:
        ParseError: on unknown checks or malformed entries
    """
    if path is None:
        text = resources.files("pauli_gaussian").joinpath(DEFAULT_SUITE).read_text()
        source = DEFAULT_SUITE
    else:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ParseError(f"Cannot read suite {path}: {e}")
        source = str(path)
    try:
        spec = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        raise ParseError(f"Invalid YAML in {source}: {e}")

    default_trials = int(spec.get("trials", 100)) if trials is None else trials
    checks = []
    for position, entry in enumerate(spec.get("checks", [])):
        name = entry.get("name")
        if name not in CHECKS:
            raise ParseError(f"Unknown check {name!r}", position=f"checks[{position}]")
        try:
            checks.append(
                CheckSpec(
                    name=name,
                    sizes=[int(s) for s in entry["sizes"]],
                    tolerance=float(entry["tolerance"]),
                    trials=trials or int(entry.get("trials", default_trials)),
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"Malformed check entry: {e}", position=f"checks[{position}]")
        allowed = FIXED_SIZES.get(name)
        if allowed and not set(checks[-1].sizes) <= set(allowed):
            raise ParseError(
                f"Check {name!r} only runs at L in {list(allowed)}, got {checks[-1].sizes}",
                position=f"checks[{position}]",
            )
    return checks


def run_suite(checks: list[CheckSpec], seed: int = 0) -> ValidationReport:
    """Run every check; instances are drawn from one generator per (check, L)."""
    report = ValidationReport(seed=seed)
    for index, spec in enumerate(checks):
        function = CHECKS[spec.name]
        for size in spec.sizes:
            rng = np.random.default_rng([seed, index, size])
            worst = max(function(rng, size) for _ in range(spec.trials))
            result = CheckResult(spec.name, size, spec.trials, float(worst), spec.tolerance)
            status = "ok" if result.passed else "FAILED"
            log.info(
                f"{spec.name} L={size}: max residual {result.max_residual:.3e} "
                f"(tol {spec.tolerance:.0e}) {status}"
            )
            report.results.append(result)
    return report
