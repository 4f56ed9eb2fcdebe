"""
Local Pauli measurement bases and outcome strings.

A basis assigns each site an angle triple (phi, theta, alpha) in radians.
The engine's phase convention is fixed by `canonical_bras`: contracting a
dense state against these bras reproduces the Pfaffian amplitude formulas
exactly, phase included. theta = 0 measures sigma^z with '+' selecting an
occupied site; theta = pi/2 with phi = 0 (pi/2) measures sigma^x (sigma^y).
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ContractViolation, ParseError

log = logging.getLogger(__name__)

TWO_PI = 2 * np.pi

# Named uniform bases: (phi, theta, alpha)
NAMED_BASES = {
    "z": (0.0, 0.0, 0.0),
    "x": (0.0, np.pi / 2, 0.0),
    "y": (np.pi / 2, np.pi / 2, 0.0),
}

PLUS_CHARS = {"+": 1, "u": 1, "1": 1}
MINUS_CHARS = {"-": -1, "−": -1, "d": -1, "0": -1}


@dataclass(frozen=True, eq=False)
class PauliBasisSpec:
    """
    Per-site angle triples.

    Angles are stored as given; `reduced()` maps them into [0, 2pi).
    Shifted angles such as 2pi - theta are kept unreduced internally.
    """

    phi: np.ndarray
    theta: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        arrays = [np.array(a, dtype=float).reshape(-1) for a in (self.phi, self.theta, self.alpha)]
        if not (len(arrays[0]) == len(arrays[1]) == len(arrays[2])):
            raise ContractViolation(
                f"Angle arrays differ in length: {[len(a) for a in arrays]}"
            )
        for name, a in zip(("phi", "theta", "alpha"), arrays):
            if not np.all(np.isfinite(a)):
                raise ContractViolation(f"Non-finite {name} angle")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def uniform(cls, size: int, phi: float, theta: float, alpha: float = 0.0) -> "PauliBasisSpec":
        return cls(np.full(size, phi), np.full(size, theta), np.full(size, alpha))

    @classmethod
    def named(cls, name: str, size: int) -> "PauliBasisSpec":
        if name not in NAMED_BASES:
            raise ParseError(f"Unknown basis name {name!r}; expected one of {sorted(NAMED_BASES)}")
        return cls.uniform(size, *NAMED_BASES[name])

    @classmethod
    def from_triples(cls, triples: Sequence[Sequence[float]]) -> "PauliBasisSpec":
        triples = np.array(triples, dtype=float).reshape(-1, 3)
        return cls(triples[:, 0], triples[:, 1], triples[:, 2])

    @property
    def size(self) -> int:
        return len(self.theta)

    @property
    def triples(self) -> np.ndarray:
        return np.stack([self.phi, self.theta, self.alpha], axis=1)

    def reduced(self) -> "PauliBasisSpec":
        return PauliBasisSpec(
            np.mod(self.phi, TWO_PI), np.mod(self.theta, TWO_PI), np.mod(self.alpha, TWO_PI)
        )

    def subset(self, sites: Sequence[int]) -> "PauliBasisSpec":
        idx = np.asarray(sites, dtype=int)
        return PauliBasisSpec(self.phi[idx], self.theta[idx], self.alpha[idx])

    def replace(
        self,
        phi: Optional[np.ndarray] = None,
        theta: Optional[np.ndarray] = None,
        alpha: Optional[np.ndarray] = None,
    ) -> "PauliBasisSpec":
        return PauliBasisSpec(
            self.phi if phi is None else phi,
            self.theta if theta is None else theta,
            self.alpha if alpha is None else alpha,
        )

    def to_dict(self) -> dict:
        return {"per_site": self.triples.tolist()}

    def __repr__(self) -> str:
        return f"PauliBasisSpec(L={self.size})"


@dataclass(frozen=True)
class SpinConfiguration:
    """Outcome signs s_j in {+1, -1}, site 1 first."""

    signs: tuple[int, ...]

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if any(s not in (1, -1) for s in signs):
            raise ContractViolation(f"Spin signs must be +1 or -1, got {signs}")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def all_plus(cls, size: int) -> "SpinConfiguration":
        return cls((1,) * size)

    @classmethod
    def from_index(cls, index: int, size: int) -> "SpinConfiguration":
        """Bit 0 = '+', bit 1 = '-', site 1 the most significant bit."""
        return cls(tuple(1 - 2 * ((index >> (size - 1 - k)) & 1) for k in range(size)))

    @property
    def size(self) -> int:
        return len(self.signs)

    @property
    def index(self) -> int:
        value = 0
        for s in self.signs:
            value = (value << 1) | (s == -1)
        return value

    @property
    def plus_sites(self) -> tuple[int, ...]:
        return tuple(k for k, s in enumerate(self.signs) if s == 1)

    @property
    def minus_sites(self) -> tuple[int, ...]:
        return tuple(k for k, s in enumerate(self.signs) if s == -1)

    def flipped(self) -> "SpinConfiguration":
        return SpinConfiguration(tuple(-s for s in self.signs))

    def subset(self, sites: Sequence[int]) -> "SpinConfiguration":
        return SpinConfiguration(tuple(self.signs[k] for k in sites))

    def __str__(self) -> str:
        return "".join("+" if s == 1 else "-" for s in self.signs)


@dataclass(frozen=True)
class CanonicalBraPair:
    """Measurement bras of one site: <+|0>, <+|1>, <-|0>, <-|1>."""

    plus0: complex
    plus1: complex
    minus0: complex
    minus1: complex

    def rows(self) -> np.ndarray:
        """2 x 2 array, row 0 = <+|, row 1 = <-|, columns = occupation 0, 1."""
        return np.array([[self.plus0, self.plus1], [self.minus0, self.minus1]], dtype=complex)

    def bra(self, sign: int) -> np.ndarray:
        return self.rows()[0 if sign == 1 else 1]

    def is_orthonormal(self, tol: float = 1e-12) -> bool:
        rows = self.rows()
        return bool(np.allclose(rows @ rows.conj().T, np.eye(2), atol=tol, rtol=0))


def u_matrix(phi: float, theta: float, alpha: float) -> np.ndarray:
    """Single-qubit basis-change unitary U_(phi, theta, alpha)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [
            [c, s * np.exp(-1j * phi)],
            [s * np.exp(-1j * alpha), -c * np.exp(-1j * (alpha + phi))],
        ],
        dtype=complex,
    )


def canonical_bras(phi: float, theta: float, alpha: float) -> CanonicalBraPair:
    """Measurement bras in the convention the amplitude formulas use."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    phase_a = np.exp(-1j * alpha)
    phase_p = np.exp(1j * phi)
    return CanonicalBraPair(
        plus0=complex(s),
        plus1=complex(phase_p * c),
        minus0=complex(-phase_a * c),
        minus1=complex(phase_a * phase_p * s),
    )


def basis_bras(basis: PauliBasisSpec) -> np.ndarray:
    """Stacked bra rows for every site, shape (L, 2, 2)."""
    return np.stack(
        [canonical_bras(p, t, a).rows() for p, t, a in zip(basis.phi, basis.theta, basis.alpha)]
    )


def parse_configuration(text: str, size: Optional[int] = None) -> SpinConfiguration:
    """
    Parse an outcome string, site 1 first.

    '+', 'u', '1' mean +1; '-', 'd', '0' mean -1.

    Raises:
        ParseError: on an unknown character or wrong length
    """
    text = text.strip()
    signs = []
    for position, char in enumerate(text):
        if char in PLUS_CHARS:
            signs.append(1)
        elif char in MINUS_CHARS:
            signs.append(-1)
        else:
            raise ParseError(f"Bad configuration character {char!r} in {text!r}", position=position)
    if not signs:
        raise ParseError("Empty configuration string")
    if size is not None and len(signs) != size:
        raise ParseError(
            f"Configuration {text!r} has {len(signs)} sites, expected {size}",
            position=min(len(signs), size),
        )
    return SpinConfiguration(tuple(signs))


def _angles(values: Sequence[float], degrees: bool) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.deg2rad(values) if degrees else values


def basis_from_dict(spec: dict, size: int, degrees: bool = False) -> PauliBasisSpec:
    """Parse {"uniform": {...}} or {"per_site": [[phi, theta, alpha], ...]}."""
    if "uniform" in spec:
        u = spec["uniform"]
        try:
            phi, theta, alpha = _angles([u["phi"], u["theta"], u.get("alpha", 0.0)], degrees)
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"Bad uniform basis spec {u!r}: {e}")
        return PauliBasisSpec.uniform(size, phi, theta, alpha).reduced()
    if "per_site" in spec:
        rows = spec["per_site"]
        if len(rows) != size:
            raise ParseError(f"Basis lists {len(rows)} sites, expected {size}")
        try:
            triples = _angles(rows, degrees).reshape(size, 3)
        except ValueError:
            raise ParseError("per_site entries must be [phi, theta, alpha] triples")
        return PauliBasisSpec.from_triples(triples).reduced()
    raise ParseError(f"Basis spec needs 'uniform' or 'per_site', got keys {sorted(spec)}")


def parse_basis(text: str, size: int, degrees: bool = False) -> PauliBasisSpec:
    """
    Parse a basis argument.

    Accepted forms:
        z | x | y                   named uniform bases
        uniform:phi,theta,alpha     uniform angles
        {"uniform": ...} JSON text  inline JSON
        path/to/basis.json          JSON file
    """
    text = text.strip()
    if text in NAMED_BASES:
        return PauliBasisSpec.named(text, size)
    if text.startswith("uniform:"):
        parts = text[len("uniform:"):].split(",")
        if len(parts) not in (2, 3):
            raise ParseError(f"Expected uniform:phi,theta[,alpha], got {text!r}")
        try:
            values = _angles([float(p) for p in parts] + [0.0] * (3 - len(parts)), degrees)
        except ValueError:
            raise ParseError(f"Non-numeric angle in {text!r}")
        return PauliBasisSpec.uniform(size, *values).reduced()
    if text.startswith("{"):
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"Invalid basis JSON: {e.msg}", position=e.pos)
        return basis_from_dict(spec, size, degrees)
    path = Path(text)
    if path.exists():
        with open(path) as f:
            try:
                spec = json.load(f)
            except json.JSONDecodeError as e:
                raise ParseError(f"Invalid JSON in {path}: {e.msg}", position=f"line {e.lineno}")
        return basis_from_dict(spec, size, degrees)
    raise ParseError(f"Unrecognized basis {text!r}")
