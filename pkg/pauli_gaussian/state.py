"""
Fermionic Gaussian pure states |R, C> = N_R^-1 exp(1/2 sum r_ij a_i^+ a_j^+)|C>.

A state is a skew-symmetric R matrix on top of a base occupation string C.
Downstream amplitude formulas assume the vacuum base, so `make_state`
canonicalizes to C = 0 whenever the vacuum overlap is nonzero.

Dense vectors index occupations with site 1 as the most significant bit
(bit value 1 = occupied).
"""

import itertools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import get_config
from .errors import ContractViolation, NumericGuardError, ParseError
from .skewlin import determinant, skew_matrix, sub_pfaffian

log = logging.getLogger(__name__)

VACUUM_OVERLAP_FLOOR = 1e-12


@dataclass(frozen=True)
class FermionConfiguration:
    """Occupation numbers n_j in {0, 1}, site 1 first."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ContractViolation(f"Occupations must be 0 or 1, got {bits}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def vacuum(cls, size: int) -> "FermionConfiguration":
        return cls((0,) * size)

    @classmethod
    def from_index(cls, index: int, size: int) -> "FermionConfiguration":
        """Decode a dense-vector index (site 1 = most significant bit)."""
        return cls(tuple((index >> (size - 1 - k)) & 1 for k in range(size)))

    @classmethod
    def from_sites(cls, occupied: Sequence[int], size: int) -> "FermionConfiguration":
        bits = [0] * size
        for site in occupied:
            bits[site] = 1
        return cls(tuple(bits))

    @property
    def size(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    @property
    def occupied(self) -> tuple[int, ...]:
        return tuple(k for k, b in enumerate(self.bits) if b)

    def flipped(self, sites: Sequence[int]) -> "FermionConfiguration":
        bits = list(self.bits)
        for site in sites:
            bits[site] ^= 1
        return FermionConfiguration(tuple(bits))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True, eq=False)
class GaussianPureState:
    """
    Gaussian pure state with cached normalization.

    Attributes:
        r_matrix: L x L complex skew-symmetric pairing matrix (read-only)
        base_config: occupation string the pairing acts on
        norm: det(I + R^+ R)^(1/4)
    """

    r_matrix: np.ndarray
    base_config: FermionConfiguration
    norm: float

    @property
    def size(self) -> int:
        return self.r_matrix.shape[0]

    @property
    def is_vacuum_based(self) -> bool:
        return not any(self.base_config.bits)

    def __repr__(self) -> str:
        return (
            f"GaussianPureState(L={self.size}, base={self.base_config}, "
            f"norm={self.norm:.6g})"
        )


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


def normalization(r_matrix: np.ndarray) -> float:
    """
    N_R = det(I + R^+ R)^(1/4).

    The determinant is real and >= 1 for skew R; an imaginary residue above
    1e-10 relative is a contract violation.
    """
    size = r_matrix.shape[0]
    if size == 0:
        return 1.0
    det = determinant(np.eye(size) + r_matrix.conj().T @ r_matrix)
    if abs(det.imag) > 1e-10 * max(1.0, abs(det)):
        raise ContractViolation(f"det(I + R^+R) has imaginary part {det.imag:.3e}")
    return float(det.real) ** 0.25


def make_state(
    r_matrix,
    base_config: Optional[Sequence[int]] = None,
    canonicalize: bool = True,
) -> GaussianPureState:
    """
    Build a validated state, moving it to the vacuum base when possible.

    Args:
        r_matrix: skew-symmetric pairing matrix
        base_config: occupation string C (default: vacuum)
        canonicalize: convert a non-vacuum base to the vacuum base

    Returns:
        GaussianPureState
    """
    r = skew_matrix(r_matrix)
    size = r.shape[0]
    if size < 1:
        raise ContractViolation("A state needs at least one site")
    base = (
        FermionConfiguration.vacuum(size)
        if base_config is None
        else FermionConfiguration(tuple(base_config))
    )
    if base.size != size:
        raise ContractViolation(
            f"Base configuration has {base.size} sites, R has {size}"
        )
    state = GaussianPureState(_frozen(r), base, normalization(r))
    if canonicalize and not state.is_vacuum_based:
        try:
            state = ensure_vacuum_base(state)
        except NumericGuardError:
            log.debug(f"Vacuum overlap vanishes; keeping base {base}")
    return state


def configuration_sign(base: FermionConfiguration, target: FermionConfiguration) -> int:
    """
    sgn(C, I) = prod_{i>=2} (-1)^(|n_i - m_i| * sum_{j<i} n_j).

    The sign from moving the creation operators of the flipped sites past
    the occupied sites of the base to their left.
    """
    sign = 1
    occupied_left = 0
    for n, m in zip(base.bits, target.bits):
        if n != m and occupied_left % 2 == 1:
            sign = -sign
        occupied_left += n
    return sign


def computational_amplitude(
    state: GaussianPureState, config: FermionConfiguration
) -> complex:
    """
    <I|R, C> = sgn(C, I) pf(R restricted to the sites where C and I differ) / N_R.

    For the vacuum base this is pf(R_I)/N_R. Odd flip sets give exactly 0.
    """
    if config.size != state.size:
        raise ContractViolation(
            f"Configuration has {config.size} sites, state has {state.size}"
        )
    flips = [k for k in range(state.size) if config.bits[k] != state.base_config.bits[k]]
    if len(flips) % 2 == 1:
        return 0.0 + 0.0j
    sign = configuration_sign(state.base_config, config)
    return sign * sub_pfaffian(state.r_matrix, flips) / state.norm


def computational_statevector(state: GaussianPureState) -> np.ndarray:
    """Dense 2^L vector of computational amplitudes (site 1 most significant)."""
    size = state.size
    if not get_config().enumeration_allowed(size):
        raise NumericGuardError(
            f"Refusing 2^{size} enumeration (limit {get_config().max_enumeration_sites} "
            "sites; set PAULI_GAUSSIAN_ALLOW_LARGE=true to override)"
        )
    vector = np.zeros(2**size, dtype=complex)
    base = state.base_config
    for count in range(0, size + 1, 2):
        for flips in itertools.combinations(range(size), count):
            config = base.flipped(flips)
            vector[config.index] = computational_amplitude(state, config)
    return vector


def base_config_change(
    state: GaussianPureState, new_base: FermionConfiguration
) -> GaussianPureState:
    """
    Re-express the state on a different base configuration.

    r'_ij = sgn(C', I') psi(I') / psi(C') with I' = C' flipped at {i, j}.
    The result equals the input up to a global phase.

    Raises:
        NumericGuardError: if the amplitude of the new base vanishes
    """
    if new_base.size != state.size:
        raise ContractViolation(
            f"New base has {new_base.size} sites, state has {state.size}"
        )
    if new_base == state.base_config:
        return state

    anchor = computational_amplitude(state, new_base)
    if abs(anchor) < VACUUM_OVERLAP_FLOOR:
        flips = [
            k for k in range(state.size) if new_base.bits[k] != state.base_config.bits[k]
        ]
        raise NumericGuardError(
            f"Cannot change base to {new_base}: the pfaffinho over sites {flips} "
            f"vanishes (|amplitude| = {abs(anchor):.3e})"
        )

    size = state.size
    r_new = np.zeros((size, size), dtype=complex)
    for i, j in itertools.combinations(range(size), 2):
        target = new_base.flipped((i, j))
        ratio = computational_amplitude(state, target) / anchor
        r_new[i, j] = configuration_sign(new_base, target) * ratio
        r_new[j, i] = -r_new[i, j]

    log.debug(f"Base change {state.base_config} -> {new_base}")
    return GaussianPureState(_frozen(r_new), new_base, normalization(r_new))


def ensure_vacuum_base(state: GaussianPureState) -> GaussianPureState:
    """Return the state on the vacuum base (no-op when already there)."""
    if state.is_vacuum_based:
        return state
    return base_config_change(state, FermionConfiguration.vacuum(state.size))


def random_state(size: int, seed: int = 0, scale: float = 1.0) -> GaussianPureState:
    """
    Seeded random state on the vacuum base.

    Upper-triangular entries are independent complex Gaussians with
    E|r_ij|^2 = scale^2.
    """
    if size < 1:
        raise ContractViolation(f"size must be >= 1, got {size}")
    rng = np.random.default_rng(seed)
    upper = np.triu_indices(size, k=1)
    count = len(upper[0])
    values = (rng.normal(size=count) + 1j * rng.normal(size=count)) * scale / np.sqrt(2)
    r = np.zeros((size, size), dtype=complex)
    r[upper] = values
    r = r - r.T
    return make_state(r)


def state_to_dict(state: GaussianPureState) -> dict:
    """JSON state spec: strictly-upper nonzero entries, 0-based indices."""
    entries = []
    for i, j in zip(*np.triu_indices(state.size, k=1)):
        value = state.r_matrix[i, j]
        if value != 0:
            entries.append([int(i), int(j), float(value.real), float(value.imag)])
    spec = {"kind": "matrix", "L": state.size, "entries": entries}
    if not state.is_vacuum_based:
        spec["base"] = list(state.base_config.bits)
    return spec


def state_from_dict(spec: dict) -> GaussianPureState:
    """
    Parse the JSON state spec.

    Unlisted entries are 0. A lower-triangle entry (i > j) is read as the
    skew partner of (j, i); listing both with inconsistent values, or a
    nonzero diagonal, is rejected with the offending pair.
    """
    if not isinstance(spec, dict):
        raise ParseError("State spec must be a JSON object")
    if spec.get("kind") != "matrix":
        raise ParseError(f"Unsupported state kind: {spec.get('kind')!r}")
    try:
        size = int(spec["L"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("State spec needs an integer 'L'")
    if size < 1:
        raise ParseError(f"L must be >= 1, got {size}")

    tol = get_config().skew_tolerance
    upper: dict[tuple[int, int], complex] = {}
    for position, entry in enumerate(spec.get("entries", [])):
        try:
            i, j, re, im = entry
            i, j = int(i), int(j)
            value = complex(float(re), float(im))
        except (TypeError, ValueError):
            raise ParseError(f"Malformed entry {entry!r}", position=f"entries[{position}]")
        if not (0 <= i < size and 0 <= j < size):
            raise ParseError(
                f"Index ({i},{j}) out of range for L={size}",
                position=f"entries[{position}]",
            )
        if i == j:
            if value != 0:
                raise ParseError(
                    f"Matrix is not skew-symmetric: nonzero diagonal at ({i},{j})",
                    position=f"entries[{position}]",
                )
            continue
        key, value = ((i, j), value) if i < j else ((j, i), -value)
        if key in upper and abs(upper[key] - value) > tol:
            raise ParseError(
                f"Matrix is not skew-symmetric at ({i},{j})",
                position=f"entries[{position}]",
            )
        upper[key] = value

    r = np.zeros((size, size), dtype=complex)
    for (i, j), value in upper.items():
        r[i, j] = value
        r[j, i] = -value

    base = spec.get("base")
    if base is not None and len(base) != size:
        raise ParseError(f"'base' has {len(base)} entries, expected {size}")
    return make_state(r, base)


def save_state(state: GaussianPureState, path: Path) -> None:
    """Write the JSON state spec."""
    path = Path(path)
    with open(path, "w") as f:
        json.dump(state_to_dict(state), f, indent=2)
    log.info(f"Saved L={state.size} state to {path}")


def load_state(path: Path) -> GaussianPureState:
    """Read the JSON state spec."""
    path = Path(path)
    try:
        with open(path) as f:
            spec = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"Invalid JSON in {path}: {e.msg}", position=f"line {e.lineno}")
    except OSError as e:
        raise ParseError(f"Cannot read state file {path}: {e}")
    return state_from_dict(spec)
