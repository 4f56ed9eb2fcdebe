"""
Post-measurement entanglement on a ring.

The ring is cut into four contiguous blocks in cyclic order A1, B1, A2, B2.
B = B1 + B2 is measured in a product Pauli basis; the conditional state of
A = A1 + A2 is built from the 2^|A| joint amplitudes, and the Renyi
entropy of A1 is tracked as the separation d = |B1| grows. At criticality
E ~ r^-eta, r the chord distance between the A blocks, with
eta = 4 alpha Delta_1 for alpha < 1 and 4 Delta_1 otherwise.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, TextIO, Union

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.stats

from .amplitude import batch_amplitudes
from .basis import PauliBasisSpec, SpinConfiguration
from .config import get_config
from .errors import ContractViolation, NumericGuardError
from .probentropy import entropy_of_distribution
from .state import GaussianPureState

log = logging.getLogger(__name__)

ZERO_PROBABILITY = 1e-300
MIN_FIT_POINTS = 4
SCAN_COLUMNS = ["L", "d", "r", "alpha", "entropy", "P_outcome"]


@dataclass(frozen=True)
class MeasurementGeometry:
    """
    Four contiguous blocks A1, B1, A2, B2 on a ring of `size` sites (0-based).

    Attributes:
        size: ring size L
        a1, b1, a2, b2: site lists of each block
    """

    size: int
    a1: tuple[int, ...]
    b1: tuple[int, ...]
    a2: tuple[int, ...]
    b2: tuple[int, ...]

    def __post_init__(self):
        for name in ("a1", "b1", "a2", "b2"):
            object.__setattr__(self, name, tuple(int(s) for s in getattr(self, name)))
        every = self.a1 + self.b1 + self.a2 + self.b2
        if sorted(every) != list(range(self.size)):
            raise ContractViolation(
                f"Blocks must partition the {self.size}-site ring, got {every}"
            )
        if not self.a1 or not self.a2:
            raise ContractViolation("A1 and A2 must be nonempty")

    @classmethod
    def ring(cls, size: int, a1_size: int, a2_size: int, distance: int) -> "MeasurementGeometry":
        """A1 at sites 0.., then `distance` B1 sites, A2, and B2 filling the rest."""
        b2_size = size - a1_size - a2_size - distance
        if a1_size < 1 or a2_size < 1 or distance < 0 or b2_size < 0:
            raise ContractViolation(
                f"Cannot fit |A1|={a1_size}, |A2|={a2_size}, d={distance} on L={size}"
            )
        cuts = np.cumsum([0, a1_size, distance, a2_size, b2_size])
        blocks = [tuple(range(cuts[k], cuts[k + 1])) for k in range(4)]
        return cls(size, *blocks)

    @property
    def distance(self) -> int:
        return len(self.b1)

    @property
    def a_sites(self) -> tuple[int, ...]:
        return self.a1 + self.a2

    @property
    def b_sites(self) -> tuple[int, ...]:
        return self.b1 + self.b2

    def __str__(self) -> str:
        return (
            f"L={self.size} |A1|={len(self.a1)} |B1|={len(self.b1)} "
            f"|A2|={len(self.a2)} |B2|={len(self.b2)}"
        )


@dataclass(frozen=True, eq=False)
class PostMeasurementState:
    """Normalized state of A given the outcome on B (A1 index major)."""

    vector: np.ndarray
    probability: float
    outcome: Optional[SpinConfiguration]
    geometry: MeasurementGeometry

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True, eq=False)
class ReducedDensityMatrix:
    """Density matrix of one A block."""

    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        """Ascending spectrum with round-off below the floor set to 0."""
        values = scipy.linalg.eigvalsh(self.matrix)
        values[values < get_config().eigenvalue_floor] = 0.0
        return values

    @property
    def purity(self) -> float:
        return float(np.sum(self.eigenvalues() ** 2))

    def check(self, tol: float = 1e-10) -> list[str]:
        """Return the violated density-matrix invariants, if any."""
        issues = []
        if not np.allclose(self.matrix, self.matrix.conj().T, atol=tol, rtol=0):
            issues.append("not Hermitian")
        if abs(self.trace - 1) > tol:
            issues.append(f"trace {self.trace:.12g} != 1")
        if scipy.linalg.eigvalsh(self.matrix).min() < -tol:
            issues.append("negative eigenvalue")
        return issues


def _full_configs(
    geometry: MeasurementGeometry, outcome: Optional[SpinConfiguration]
) -> list[SpinConfiguration]:
    a_sites = geometry.a_sites
    b_sites = geometry.b_sites
    count = len(a_sites)
    configs = []
    for index in range(2**count):
        signs = [0] * geometry.size
        for site, s in zip(a_sites, SpinConfiguration.from_index(index, count).signs):
            signs[site] = s
        if outcome is not None:
            for site, s in zip(b_sites, outcome.signs):
                signs[site] = s
        configs.append(SpinConfiguration(tuple(signs)))
    return configs


def condition_on_outcome(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    geometry: MeasurementGeometry,
    outcome_b: Optional[SpinConfiguration] = None,
    path: str = "auto",
    workers: Optional[int] = None,
) -> PostMeasurementState:
    """
    Conditional state of A after measuring B with outcome `outcome_b`.

    `outcome_b` lists signs for B1 then B2 in site order; None is allowed
    only when B is empty.

    Raises:
        NumericGuardError: if |A| exceeds the conditioning guard or the
            outcome has zero probability
    """
    if geometry.size != state.size:
        raise ContractViolation(f"Geometry is for L={geometry.size}, state has L={state.size}")
    config = get_config()
    a_count = len(geometry.a_sites)
    if a_count > config.max_conditioned_sites and not config.allow_large_enumeration:
        raise NumericGuardError(
            f"Conditioning needs 2^{a_count} amplitudes; |A| is limited to "
            f"{config.max_conditioned_sites} sites"
        )
    b_count = len(geometry.b_sites)
    if b_count and (outcome_b is None or outcome_b.size != b_count):
        raise ContractViolation(f"Outcome must give {b_count} signs for B")
    if not b_count:
        outcome_b = None

    amplitudes = batch_amplitudes(state, basis, _full_configs(geometry, outcome_b), path, workers)
    prob = float(np.vdot(amplitudes, amplitudes).real)
    if prob < ZERO_PROBABILITY:
        raise NumericGuardError(f"Outcome {outcome_b} on B has zero probability ({prob:.3e})")
    log.debug(f"Conditioned {geometry} on {outcome_b}: P = {prob:.6g}")
    return PostMeasurementState(amplitudes / np.sqrt(prob), prob, outcome_b, geometry)


def reduced_density_matrix(pm: PostMeasurementState, block: str = "A1") -> ReducedDensityMatrix:
    """Trace out the other A block; Psi is 2^|A1| x 2^|A2| in listed site order."""
    geometry = pm.geometry
    psi = pm.vector.reshape(2 ** len(geometry.a1), 2 ** len(geometry.a2))
    if block == "A1":
        return ReducedDensityMatrix(psi @ psi.conj().T)
    if block == "A2":
        return ReducedDensityMatrix(psi.T @ psi.conj())
    raise ContractViolation(f"block must be 'A1' or 'A2', got {block!r}")


def renyi_entropy(rho: ReducedDensityMatrix, alpha: float) -> float:
    """Renyi entanglement entropy (natural log); von Neumann at alpha = 1."""
    return entropy_of_distribution(rho.eigenvalues(), alpha)


# Outcome patterns


def _alternating(size: int) -> tuple[int, ...]:
    return tuple(1 if k % 2 == 0 else -1 for k in range(size))


def _uniform(size: int, sign: int) -> tuple[int, ...]:
    return (sign,) * size


@dataclass(frozen=True)
class OutcomePattern:
    """
    Crystal outcome on B1 and B2 with its measurement basis.

    z patterns measure at theta = pi, where '+' is the sigma^z eigenstate
    favoured by the transverse field.
    """

    name: str
    basis_name: str
    b1_rule: str
    b2_rule: str
    delta1: float

    def basis(self, size: int) -> PauliBasisSpec:
        if self.basis_name == "z":
            return PauliBasisSpec.uniform(size, 0.0, np.pi, 0.0)
        return PauliBasisSpec.named(self.basis_name, size)

    @property
    def distance_step(self) -> int:
        """Smallest separation and step for scans; an alternating B1 needs even d."""
        return 2 if self.b1_rule == "alternating" else 1

    @staticmethod
    def _block(rule: str, size: int) -> tuple[int, ...]:
        if rule == "alternating":
            if size % 2:
                raise ContractViolation(
                    f"Alternating outcome needs an even block, got {size} sites"
                )
            return _alternating(size)
        return _uniform(size, 1 if rule == "plus" else -1)

    def outcome(self, geometry: MeasurementGeometry) -> SpinConfiguration:
        signs = self._block(self.b1_rule, len(geometry.b1)) + self._block(
            self.b2_rule, len(geometry.b2)
        )
        return SpinConfiguration(signs)


OUTCOME_PATTERNS = {
    p.name: p
    for p in (
        OutcomePattern("z-all-plus", "z", "plus", "plus", 0.5),
        OutcomePattern("x-all-plus", "x", "plus", "plus", 2.0),
        OutcomePattern("x-plus-minus", "x", "plus", "minus", 1.0),
        OutcomePattern("x-alternating", "x", "alternating", "alternating", 0.5),
        OutcomePattern("x-alternating-plus", "x", "alternating", "plus", 1.0),
    )
}


def get_pattern(name: str) -> OutcomePattern:
    if name not in OUTCOME_PATTERNS:
        raise ContractViolation(
            f"Unknown outcome pattern {name!r}; expected one of {sorted(OUTCOME_PATTERNS)}"
        )
    return OUTCOME_PATTERNS[name]


@dataclass(frozen=True)
class GeometryTemplate:
    """Fixed L, |A1|, |A2|; the separation is chosen per scan point."""

    size: int
    a1_size: int = 2
    a2_size: int = 2

    def at(self, distance: int) -> MeasurementGeometry:
        return MeasurementGeometry.ring(self.size, self.a1_size, self.a2_size, distance)

    def default_window(self) -> tuple[int, int]:
        """d in [4, L/8]."""
        return 4, max(4, self.size // 8)

    def separation(self, distance) -> np.ndarray:
        """
        Chord distance between the A1 and A2 centres on the ring.

        The centres sit d + (|A1| + |A2|) / 2 sites apart along B1; the
        chord (L / pi) sin(pi x / L) is the conformal distance on a ring.
        """
        x = np.asarray(distance, dtype=float) + (self.a1_size + self.a2_size) / 2
        return self.size / np.pi * np.sin(np.pi * x / self.size)


def decay_scan(
    state_builder: Union[GaussianPureState, Callable[[int], GaussianPureState]],
    basis: Optional[PauliBasisSpec],
    outcome_pattern: Union[str, OutcomePattern],
    alphas: Sequence[float],
    d_values: Sequence[int],
    geometry_template: GeometryTemplate,
    path: str = "auto",
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """
    Entropy of A1 against the separation d.

    Args:
        state_builder: the state, or a callable building it from L
        basis: measurement basis; None uses the pattern's basis
        outcome_pattern: pattern name or OutcomePattern
        alphas: Renyi indices
        d_values: separations to scan
        geometry_template: ring size and A block sizes

    Returns:
        DataFrame with columns L, d, r (chord separation), alpha, entropy, P_outcome
    """
    size = geometry_template.size
    state = state_builder(size) if callable(state_builder) else state_builder
    pattern = get_pattern(outcome_pattern) if isinstance(outcome_pattern, str) else outcome_pattern
    basis = pattern.basis(size) if basis is None else basis
    for alpha in alphas:
        if alpha <= 0:
            raise ContractViolation(f"alpha must be positive, got {alpha}")

    rows = []
    for d in d_values:
        geometry = geometry_template.at(int(d))
        outcome = pattern.outcome(geometry)
        pm = condition_on_outcome(state, basis, geometry, outcome, path, workers)
        rho = reduced_density_matrix(pm)
        r = float(geometry_template.separation(d))
        for alpha in alphas:
            rows.append(
                (size, int(d), r, float(alpha), renyi_entropy(rho, alpha), pm.probability)
            )
        log.info(f"Scan point d={d}: P_outcome = {pm.probability:.6g}")
    return pd.DataFrame(rows, columns=SCAN_COLUMNS)


def write_scan_csv(table: pd.DataFrame, out: Union[Path, TextIO]) -> None:
    table[SCAN_COLUMNS].to_csv(out, index=False, float_format="%.17g", lineterminator="\n")


def read_scan_csv(path: Path) -> pd.DataFrame:
    """Read a scan; files without an r column get the default |A1| = |A2| = 2 chord."""
    table = pd.read_csv(path)
    missing = [c for c in SCAN_COLUMNS if c != "r" and c not in table.columns]
    if missing:
        raise ContractViolation(f"Scan file {path} lacks columns {missing}")
    if "r" not in table.columns:
        r = [float(GeometryTemplate(int(L)).separation(d)) for L, d in zip(table["L"], table["d"])]
        table.insert(SCAN_COLUMNS.index("r"), "r", r)
    return table


# Fits


@dataclass
class DecayFit:
    """Power-law fit ln E = c - eta ln r, r the chord separation."""

    eta: float
    delta1: float
    residual: float
    intercept: float
    window: tuple[int, int]
    points: int
    alpha: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "eta": self.eta,
            "delta1": self.delta1,
            "residual": self.residual,
            "intercept": self.intercept,
            "window": list(self.window),
            "points": self.points,
        }


@dataclass
class ExponentialFit:
    """ln E = c - d / xi."""

    rate: float
    intercept: float
    residual: float
    window: tuple[int, int]
    points: int

    @property
    def correlation_length(self) -> float:
        return 1.0 / self.rate if self.rate != 0 else float("inf")

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "correlation_length": self.correlation_length,
            "intercept": self.intercept,
            "residual": self.residual,
            "window": list(self.window),
            "points": self.points,
        }


def scaling_dimension(eta: float, alpha: float) -> float:
    """Delta_1 = eta / (4 alpha) for alpha < 1, eta / 4 otherwise."""
    return eta / (4 * alpha) if alpha < 1 else eta / 4


def _window_points(
    table: pd.DataFrame, alpha: float, window: Optional[tuple[int, int]]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, tuple[int, int]]:
    rows = table[np.isclose(table["alpha"].to_numpy(dtype=float), alpha)]
    if window is None:
        size = int(rows["L"].iloc[0]) if len(rows) else 0
        window = GeometryTemplate(size).default_window()
    lo, hi = window
    rows = rows[(rows["d"] >= lo) & (rows["d"] <= hi) & (rows["entropy"] > 0)]
    if len(rows) < MIN_FIT_POINTS:
        raise ContractViolation(
            f"Need at least {MIN_FIT_POINTS} positive points for alpha={alpha} in d in "
            f"[{lo}, {hi}], found {len(rows)}"
        )
    d = rows["d"].to_numpy(dtype=float)
    r = rows["r"].to_numpy(dtype=float)
    entropy = rows["entropy"].to_numpy(dtype=float)
    return d, r, np.log(entropy), (int(lo), int(hi))


def _rms_residual(x: np.ndarray, y: np.ndarray, fit) -> float:
    return float(np.sqrt(np.mean((y - (fit.intercept + fit.slope * x)) ** 2)))


def fit_decay_exponent(
    table: pd.DataFrame, alpha: float, window: Optional[tuple[int, int]] = None
) -> DecayFit:
    """
    Least-squares slope of ln E against ln r; residual is the RMS in ln E.

    The window selects rows by d; the regression runs on the chord
    separation r between the A blocks.
    """
    _, r, log_e, window = _window_points(table, alpha, window)
    x = np.log(r)
    fit = scipy.stats.linregress(x, log_e)
    eta = -float(fit.slope)
    return DecayFit(
        eta=eta,
        delta1=scaling_dimension(eta, alpha),
        residual=_rms_residual(x, log_e, fit),
        intercept=float(fit.intercept),
        window=window,
        points=len(r),
        alpha=float(alpha),
    )


def fit_exponential_decay(
    table: pd.DataFrame, alpha: float, window: Optional[tuple[int, int]] = None
) -> ExponentialFit:
    """Least-squares slope of ln E against d."""
    d, _, log_e, window = _window_points(table, alpha, window)
    fit = scipy.stats.linregress(d, log_e)
    return ExponentialFit(
        rate=-float(fit.slope),
        intercept=float(fit.intercept),
        residual=_rms_residual(d, log_e, fit),
        window=window,
        points=len(d),
    )


def extrapolate_exponent(sizes: Sequence[int], etas: Sequence[float]) -> tuple[float, float, float]:
    """
    Linear extrapolation of eta against 1/L to 1/L = 0.

    Returns:
        (eta at L -> infinity, slope, RMS residual)
    """
    if len(sizes) != len(etas) or len(sizes) < 2:
        raise ContractViolation("Extrapolation needs at least two (L, eta) pairs")
    x = 1.0 / np.asarray(sizes, dtype=float)
    y = np.asarray(etas, dtype=float)
    fit = scipy.stats.linregress(x, y)
    return float(fit.intercept), float(fit.slope), _rms_residual(x, y, fit)
