"""
Formation probabilities, marginals and Shannon-Renyi entropies of
measurement outcomes, plus a heuristic search for the most likely product
outcome (global entanglement = -ln P_max).

Entropies use the natural logarithm.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, TextIO, Union

import numpy as np
import pandas as pd
import scipy.optimize
import scipy.stats

from .amplitude import (
    check_singular_band,
    m_matrix,
    padded_problem,
    tan_matrix,
    up_down_factors,
)
from .basis import PauliBasisSpec, SpinConfiguration
from .config import get_config
from .errors import ContractViolation, NumericGuardError
from .skewlin import pfaffian
from .state import GaussianPureState, ensure_vacuum_base

log = logging.getLogger(__name__)

PROBABILITY_PATHS = ("amplitude_squared", "det_ratio")
BLOCK_SIZE = 2**14


@dataclass
class ProbabilityTable:
    """Outcome probabilities with the path that produced them."""

    configs: list[SpinConfiguration]
    probabilities: np.ndarray
    path: str
    size: int

    @property
    def total(self) -> float:
        return float(np.sum(self.probabilities))

    @property
    def complete(self) -> bool:
        return len(self.configs) == 2**self.size

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "config": [str(c) for c in self.configs],
                "probability": self.probabilities,
                "path": self.path,
            }
        )


@dataclass(frozen=True)
class SubregionOutcome:
    """Fixed outcome on a measured site set B (0-based, sorted)."""

    sites: tuple[int, ...]
    outcome: SpinConfiguration

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if not sites:
            raise ContractViolation("A subregion outcome needs at least one site")
        if list(sites) != sorted(set(sites)):
            raise ContractViolation(f"Sites must be unique and ascending, got {sites}")
        if len(sites) != self.outcome.size:
            raise ContractViolation(
                f"{len(sites)} sites but an outcome of length {self.outcome.size}"
            )
        object.__setattr__(self, "sites", sites)

    def extend(self, size: int, rest: SpinConfiguration) -> SpinConfiguration:
        """Full configuration with `rest` filling the complement, in site order."""
        signs = [0] * size
        for site, s in zip(self.sites, self.outcome.signs):
            signs[site] = s
        complement = [k for k in range(size) if k not in self.sites]
        for site, s in zip(complement, rest.signs):
            signs[site] = s
        return SpinConfiguration(tuple(signs))


def _check_path(path: str) -> None:
    if path not in PROBABILITY_PATHS:
        raise ContractViolation(f"Unknown probability path {path!r}; expected one of {PROBABILITY_PATHS}")


def probability(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    config: SpinConfiguration,
    path: str = "amplitude_squared",
) -> float:
    """
    P_S for one outcome.

    Neither path touches alpha, so the result is bit-identical under any
    change of alpha. det_ratio uses sqrt(det(R^S+ R^S)) = |pf R^S|^2 and
    sqrt(det(I + R^+R)) = N_R^2.
    """
    _check_path(path)
    problem = padded_problem(state, basis, config)
    weight = 2.0 if problem.padded else 1.0
    if path == "amplitude_squared":
        m = m_matrix(problem.r_matrix, problem.phi, problem.theta, problem.signs)
        return weight * abs(pfaffian(m)) ** 2 / problem.norm**2

    check_singular_band(basis.theta)
    rs = tan_matrix(problem.r_matrix, problem.phi, problem.theta, problem.signs)
    u, _ = up_down_factors(problem.theta, problem.signs)
    ratio = abs(pfaffian(rs)) ** 2 / problem.norm**2
    return float(weight * ratio * np.prod(u**2))


def _guard(count: int, what: str) -> None:
    config = get_config()
    if not config.enumeration_allowed(count):
        raise NumericGuardError(
            f"{what} needs 2^{count} evaluations, above the limit of "
            f"{config.max_enumeration_sites} sites; use a smaller region or "
            "set PAULI_GAUSSIAN_ALLOW_LARGE=true"
        )


def _evaluate_blocks(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    configs: Sequence[SpinConfiguration],
    path: str,
    workers: int,
) -> np.ndarray:
    """Probabilities in input order, evaluated in fixed blocks."""
    state = ensure_vacuum_base(state)
    blocks = [configs[i : i + BLOCK_SIZE] for i in range(0, len(configs), BLOCK_SIZE)]

    def run(block):
        return np.array([probability(state, basis, c, path) for c in block])

    if workers <= 1 or len(blocks) < 2:
        parts = [run(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(run, blocks))
    return np.concatenate(parts) if parts else np.zeros(0)


def probability_table(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    path: str = "amplitude_squared",
    workers: Optional[int] = None,
) -> ProbabilityTable:
    """All 2^L outcome probabilities, ordered by SpinConfiguration.index."""
    _check_path(path)
    _guard(state.size, "Full outcome enumeration")
    workers = get_config().workers if workers is None else workers
    configs = [SpinConfiguration.from_index(i, state.size) for i in range(2**state.size)]
    log.info(f"Enumerating {len(configs)} outcomes ({path}, {workers} worker(s))")
    values = _evaluate_blocks(state, basis, configs, path, workers)
    return ProbabilityTable(configs, values, path, state.size)


def write_probability_csv(table: ProbabilityTable, out: Union[Path, TextIO]) -> None:
    """CSV with columns config, probability, path and a closing total row."""
    frame = table.to_frame()
    footer = pd.DataFrame({"config": ["total"], "probability": [table.total], "path": [table.path]})
    pd.concat([frame, footer], ignore_index=True).to_csv(
        out, index=False, float_format="%.17g", lineterminator="\n"
    )


def marginal_probability(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    outcome: SubregionOutcome,
    path: str = "amplitude_squared",
) -> float:
    """Sum of P over the 2^|A| completions of the outcome on B."""
    if outcome.sites[-1] >= state.size:
        raise ContractViolation(f"Site {outcome.sites[-1]} out of range for L={state.size}")
    free = state.size - len(outcome.sites)
    _guard(free, "Marginalizing over the unmeasured region")
    configs = [
        outcome.extend(state.size, SpinConfiguration.from_index(i, free)) for i in range(2**free)
    ]
    values = _evaluate_blocks(state, basis, configs, path, get_config().workers)
    return float(np.sum(values))


def entropy_of_distribution(probabilities: np.ndarray, alpha: float) -> float:
    """H_alpha = ln(sum p^alpha)/(1 - alpha); Shannon at alpha = 1."""
    if alpha <= 0:
        raise ContractViolation(f"alpha must be positive, got {alpha}")
    p = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    p = p[p > 0]
    if alpha == 1:
        return float(scipy.stats.entropy(p))
    return float(np.log(np.sum(p**alpha)) / (1 - alpha))


def shannon_renyi_entropy(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    alpha: float,
    path: str = "amplitude_squared",
) -> float:
    """Shannon-Renyi entropy of the full outcome distribution (natural log)."""
    if alpha <= 0:
        raise ContractViolation(f"alpha must be positive, got {alpha}")
    table = probability_table(state, basis, path)
    return entropy_of_distribution(table.probabilities, alpha)


@dataclass
class SearchResult:
    """Best product-basis outcome found by the search."""

    basis: PauliBasisSpec
    config: SpinConfiguration
    probability: float
    seeds_tried: int = 0
    history: list[float] = field(default_factory=list)

    @property
    def global_entanglement(self) -> float:
        return float(-np.log(self.probability)) if self.probability > 0 else float("inf")


def _as_plus(phi: float, theta: float, sign: int) -> tuple[float, float]:
    """(phi, theta) whose '+' bra matches the `sign` bra at (phi, theta) up to phase."""
    if sign == 1:
        return phi, theta
    return np.mod(phi + np.pi, 2 * np.pi), np.pi - theta


def _all_plus_probability(state, phi: np.ndarray, theta: np.ndarray) -> float:
    basis = PauliBasisSpec(phi, theta, np.zeros_like(phi))
    return probability(state, basis, SpinConfiguration.all_plus(len(phi)))


def _coordinate_ascent(state, phi, theta, max_sweeps: int, tol: float) -> tuple[np.ndarray, np.ndarray, float]:
    phi, theta = phi.copy(), theta.copy()
    best = _all_plus_probability(state, phi, theta)
    for sweep in range(max_sweeps):
        start = best
        for site in range(len(phi)):
            for angles, bounds in ((theta, (0.0, np.pi)), (phi, (0.0, 2 * np.pi))):
                saved = angles[site]

                def objective(x):
                    angles[site] = x
                    return -_all_plus_probability(state, phi, theta)

                result = scipy.optimize.minimize_scalar(objective, bounds=bounds, method="bounded")
                if -result.fun > best:
                    angles[site] = result.x
                    best = -result.fun
                else:
                    angles[site] = saved
        if best - start < tol:
            break
    return phi, theta, best


def max_probability_search(
    state: GaussianPureState,
    grid_resolution: int = 5,
    restarts: int = 4,
    seed: int = 0,
    max_sweeps: int = 20,
    tol: float = 1e-10,
) -> SearchResult:
    """
    Coordinate ascent over per-site (theta, phi) for the most likely outcome.

    Every product outcome is the all-plus outcome of some per-site basis,
    so the search runs on all-plus with theta in [0, pi]. Seeds are the
    uniform (phi, theta) grid (with every outcome string when L is small
    enough to enumerate) plus `restarts` random draws. The result is a
    lower bound on the true maximum.
    """
    size = state.size
    config = get_config()
    if size > config.max_search_sites and not config.allow_large_enumeration:
        raise NumericGuardError(f"Search limited to {config.max_search_sites} sites, got {size}")
    state = ensure_vacuum_base(state)
    rng = np.random.default_rng(seed)

    thetas = np.linspace(0.0, np.pi, grid_resolution)
    phis = np.linspace(0.0, 2 * np.pi, grid_resolution, endpoint=False)
    enumerate_outcomes = size <= 10
    seeds = []
    for phi0, theta0 in itertools.product(phis, thetas):
        if enumerate_outcomes:
            outcomes = [SpinConfiguration.from_index(i, size) for i in range(2**size)]
        else:
            outcomes = [SpinConfiguration.all_plus(size)]
        for outcome in outcomes:
            pairs = [_as_plus(phi0, theta0, s) for s in outcome.signs]
            phi = np.array([p for p, _ in pairs])
            theta = np.array([t for _, t in pairs])
            seeds.append((_all_plus_probability(state, phi, theta), phi, theta))
    seeds.sort(key=lambda item: -item[0])
    starts = [(phi, theta) for _, phi, theta in seeds[:restarts]]
    for _ in range(restarts):
        starts.append((rng.uniform(0, 2 * np.pi, size), rng.uniform(0, np.pi, size)))
    log.info(f"Probability search: {len(seeds)} grid seeds, {len(starts)} ascents")

    best = (seeds[0][0], seeds[0][1], seeds[0][2])
    history = []
    for phi, theta in starts:
        phi, theta, value = _coordinate_ascent(state, phi, theta, max_sweeps, tol)
        history.append(value)
        log.debug(f"Ascent finished at P = {value:.6g}")
        if value > best[0]:
            best = (value, phi, theta)

    value, phi, theta = best
    signs = np.where(theta > np.pi / 2, -1, 1)
    out_phi = np.where(signs == -1, np.mod(phi + np.pi, 2 * np.pi), phi)
    out_theta = np.where(signs == -1, np.pi - theta, theta)
    return SearchResult(
        basis=PauliBasisSpec(out_phi, out_theta, np.zeros(size)),
        config=SpinConfiguration(tuple(int(s) for s in signs)),
        probability=float(value),
        seeds_tried=len(seeds) + restarts,
        history=history,
    )
