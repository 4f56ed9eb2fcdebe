"""
Amplitudes of Gaussian pure states in local Pauli bases.

For a state |R, 0> and outcome string S measured in the basis (phi, theta,
alpha):

    a_S = (-1)^(L(1-s_1)/2) sqrt(2)^(L mod 2) e^(-i sum_{S-} alpha_j) pf M / N_R

with the skew matrix, for n < m,

    M_nm = r_nm e^(i(phi_n+phi_m)) u_n u_m + (-1)^(n+m) (-1)^((s_n+s_m)/2) v_n v_m

where u_j = cos(theta_j/2), v_j = sin(theta_j/2) for s_j = + and the two are
swapped for s_j = -. The tan form divides out prod u_j, which is singular
near theta in {0, pi}. Odd L is handled by a zero-row ancilla with
s = s_1, theta = pi/2, phi = alpha = 0.

Indices are 0-based. (-1)^(n+m) has the same value for 0- and 1-based
indices, so every sign below is written directly in 0-based form.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .basis import PauliBasisSpec, SpinConfiguration
from .config import get_config
from .errors import ContractViolation, NumericGuardError
from .skewlin import pfaffian, sub_pfaffian
from .state import GaussianPureState, ensure_vacuum_base, make_state, normalization

log = logging.getLogger(__name__)

PATHS = ("auto", "m_form", "tan_form", "domain_wall")
PATH_ALIASES = {
    "m": "m_form",
    "tan": "tan_form",
    "dw": "domain_wall",
    "domain-wall": "domain_wall",
}

HALF_PI = np.pi / 2
ANGLE_MATCH_TOL = 1e-12


def resolve_path(path: str) -> str:
    path = PATH_ALIASES.get(path, path)
    if path not in PATHS:
        raise ContractViolation(f"Unknown amplitude path {path!r}; expected one of {PATHS}")
    return path


@dataclass(frozen=True, eq=False)
class AmplitudeRequest:
    """One amplitude query: state, basis, outcome and evaluation path."""

    state: GaussianPureState
    basis: PauliBasisSpec
    config: SpinConfiguration
    path: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "path", resolve_path(self.path))
        size = self.state.size
        if self.basis.size != size or self.config.size != size:
            raise ContractViolation(
                f"Size mismatch: state L={size}, basis L={self.basis.size}, "
                f"configuration L={self.config.size}"
            )
        if self.path == "domain_wall":
            uniform_phi(self.basis)


@dataclass(frozen=True, eq=False)
class PaddedProblem:
    """Even-size problem; odd L gains a zero-row ancilla as the last site."""

    original_size: int
    r_matrix: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    alpha: np.ndarray
    signs: np.ndarray
    norm: float

    @property
    def size(self) -> int:
        return self.r_matrix.shape[0]

    @property
    def padded(self) -> bool:
        return self.size != self.original_size


def padded_problem(
    state: GaussianPureState, basis: PauliBasisSpec, config: SpinConfiguration
) -> PaddedProblem:
    state = ensure_vacuum_base(state)
    size = state.size
    signs = np.array(config.signs, dtype=int)
    phi, theta, alpha = basis.phi, basis.theta, basis.alpha
    r = np.array(state.r_matrix)
    if size % 2 == 1:
        padded = np.zeros((size + 1, size + 1), dtype=complex)
        padded[:size, :size] = r
        r = padded
        phi = np.append(phi, 0.0)
        theta = np.append(theta, HALF_PI)
        alpha = np.append(alpha, 0.0)
        signs = np.append(signs, signs[0])
    return PaddedProblem(size, r, phi, theta, alpha, signs, state.norm)


def _skew_from_upper(full: np.ndarray) -> np.ndarray:
    upper = np.triu(full, k=1)
    return upper - upper.T


def _parity(size: int) -> np.ndarray:
    return (-1.0) ** np.add.outer(np.arange(size), np.arange(size))


def up_down_factors(theta: np.ndarray, signs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    up = signs == 1
    return np.where(up, c, s), np.where(up, s, c)


def m_matrix(r: np.ndarray, phi, theta, signs) -> np.ndarray:
    """Skew matrix M whose Pfaffian carries the amplitude (alpha-free)."""
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    signs = np.asarray(signs, dtype=int)
    u, v = up_down_factors(theta, signs)
    phase = np.exp(1j * np.add.outer(phi, phi))
    spin = -np.outer(signs, signs)  # (-1)^((s_n+s_m)/2)
    full = r * phase * np.outer(u, u) + _parity(len(signs)) * spin * np.outer(v, v)
    return _skew_from_upper(full)


def tan_matrix(r: np.ndarray, phi, theta, signs) -> np.ndarray:
    """R^S with tan^(s_j)(theta_j/2) weights."""
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    signs = np.asarray(signs, dtype=int)
    t = np.tan(theta / 2) ** signs.astype(float)
    phase = np.exp(1j * np.add.outer(phi, phi))
    spin = -np.outer(signs, signs)
    full = r * phase + _parity(len(signs)) * spin * np.outer(t, t)
    return _skew_from_upper(full)


def prefactor_sign(problem: PaddedProblem) -> float:
    """(-1)^(L(1-s_1)/2) sqrt(2)^(L mod 2), evaluated with the original L."""
    size = problem.original_size
    sign = -1.0 if (size * (1 - problem.signs[0]) // 2) % 2 else 1.0
    return sign * (np.sqrt(2.0) if size % 2 else 1.0)


def alpha_phase(problem: PaddedProblem) -> complex:
    return complex(np.exp(-1j * problem.alpha[problem.signs == -1].sum()))


def check_singular_band(theta: np.ndarray) -> None:
    band = get_config().singular_band
    reduced = np.mod(theta, 2 * np.pi)
    distance = np.minimum.reduce(
        [np.abs(reduced), np.abs(reduced - np.pi), np.abs(reduced - 2 * np.pi)]
    )
    bad = np.flatnonzero(distance < band)
    if bad.size:
        site = int(bad[0])
        raise NumericGuardError(
            f"theta[{site}] = {theta[site]:.3g} lies within {band:.0e} of a tan/cot "
            "singularity (0, pi, 2pi); use the m_form path"
        )


def amplitude_m_form(req: AmplitudeRequest) -> complex:
    problem = padded_problem(req.state, req.basis, req.config)
    m = m_matrix(problem.r_matrix, problem.phi, problem.theta, problem.signs)
    return prefactor_sign(problem) * alpha_phase(problem) * pfaffian(m) / problem.norm


def amplitude_tan_form(req: AmplitudeRequest) -> complex:
    """
    Tan-form evaluation.

    Raises:
        NumericGuardError: if any theta is within the singular band
    """
    check_singular_band(req.basis.theta)
    problem = padded_problem(req.state, req.basis, req.config)
    u, _ = up_down_factors(problem.theta, problem.signs)
    rs = tan_matrix(problem.r_matrix, problem.phi, problem.theta, problem.signs)
    return (
        prefactor_sign(problem) * alpha_phase(problem) * np.prod(u) * pfaffian(rs) / problem.norm
    )


def amplitude(req: AmplitudeRequest) -> complex:
    """Amplitude <S| R, 0> by the requested path (auto = m_form)."""
    if req.path in ("auto", "m_form"):
        return amplitude_m_form(req)
    if req.path == "tan_form":
        return amplitude_tan_form(req)
    phi = uniform_phi(req.basis)
    phase = np.exp(-1j * req.basis.alpha[np.array(req.config.signs) == -1].sum())
    return phase * domain_wall_amplitude(req.state, phi, req.config)


def evaluate(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    config: SpinConfiguration,
    path: str = "auto",
) -> complex:
    return amplitude(AmplitudeRequest(state, basis, config, path))


def batch_amplitudes(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    configs: Sequence[SpinConfiguration],
    path: str = "auto",
    workers: Optional[int] = None,
) -> np.ndarray:
    """Evaluate many outcomes; the result follows the input order."""
    workers = get_config().workers if workers is None else workers
    state = ensure_vacuum_base(state)
    requests = [AmplitudeRequest(state, basis, c, path) for c in configs]
    if workers <= 1 or len(requests) < 2:
        return np.array([amplitude(r) for r in requests], dtype=complex)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return np.array(list(executor.map(amplitude, requests)), dtype=complex)


# Special cases and pair forms


def all_up_amplitude(state: GaussianPureState, basis: PauliBasisSpec) -> complex:
    """a_{+...+} = sqrt(2)^(L mod 2) pf M / N_R, b = cc r e^(i phi) - (-1)^(n+m) ss."""
    problem = padded_problem(state, basis, SpinConfiguration.all_plus(state.size))
    c, s = np.cos(problem.theta / 2), np.sin(problem.theta / 2)
    phase = np.exp(1j * np.add.outer(problem.phi, problem.phi))
    full = np.outer(c, c) * problem.r_matrix * phase - _parity(problem.size) * np.outer(s, s)
    root = np.sqrt(2.0) if state.size % 2 else 1.0
    return root * pfaffian(_skew_from_upper(full)) / problem.norm


def all_down_amplitude(state: GaussianPureState, basis: PauliBasisSpec) -> complex:
    """a_{-...-} = (-1)^L sqrt(2)^(L mod 2) e^(-i sum alpha) pf M / N_R."""
    down = SpinConfiguration.all_plus(state.size).flipped()
    problem = padded_problem(state, basis, down)
    c, s = np.cos(problem.theta / 2), np.sin(problem.theta / 2)
    phase = np.exp(1j * np.add.outer(problem.phi, problem.phi))
    full = np.outer(s, s) * problem.r_matrix * phase - _parity(problem.size) * np.outer(c, c)
    root = np.sqrt(2.0) if state.size % 2 else 1.0
    sign = -1.0 if state.size % 2 else 1.0
    return (
        sign * root * np.exp(-1j * basis.alpha.sum()) * pfaffian(_skew_from_upper(full))
        / problem.norm
    )


def pair_amplitude(
    r: complex,
    phi: Sequence[float],
    theta: Sequence[float],
    signs: Sequence[int],
) -> complex:
    """Two-qubit amplitude of (|00> + r|11>)/N with alpha = 0."""
    pair = make_state([[0.0, r], [-r, 0.0]])
    basis = PauliBasisSpec(np.asarray(phi, float), np.asarray(theta, float), np.zeros(2))
    return evaluate(pair, basis, SpinConfiguration(tuple(signs)))


def m_matrix_from_pairs(req: AmplitudeRequest, variant: str = "theta") -> np.ndarray:
    """
    Build M from two-qubit amplitudes with adjusted angles.

    n+m odd:  M_nm = N_nm a(phi, theta)
    n+m even: M_nm = (-1)^((1+s_n)/2) N_nm a(phi, 2pi - theta_n, theta_m)  [theta]
              M_nm = -N_nm a(phi + pi/2, theta)                            [phi]
    """
    if variant not in ("theta", "phi"):
        raise ContractViolation(f"Unknown variant {variant!r}; expected 'theta' or 'phi'")
    problem = padded_problem(req.state, req.basis, req.config)
    size = problem.size
    m = np.zeros((size, size), dtype=complex)
    for n in range(size):
        for k in range(n + 1, size):
            r = problem.r_matrix[n, k]
            phi = problem.phi[[n, k]]
            theta = problem.theta[[n, k]]
            signs = problem.signs[[n, k]]
            norm = np.sqrt(1 + abs(r) ** 2)
            if (n + k) % 2 == 1:
                value = norm * pair_amplitude(r, phi, theta, signs)
            elif variant == "theta":
                sign = -1.0 if signs[0] == 1 else 1.0
                shifted = np.array([2 * np.pi - theta[0], theta[1]])
                value = sign * norm * pair_amplitude(r, phi, shifted, signs)
            else:
                value = -norm * pair_amplitude(r, phi + HALF_PI, theta, signs)
            m[n, k] = value
            m[k, n] = -value
    return m


PAIR_TABLE_ANGLES = {
    # name: ((phi_n, theta_n), (phi_m, theta_m))
    "zz": ((0.0, 0.0), (0.0, 0.0)),
    "xx": ((0.0, HALF_PI), (0.0, HALF_PI)),
    "yy": ((HALF_PI, HALF_PI), (HALF_PI, HALF_PI)),
    "zx": ((0.0, 0.0), (0.0, HALF_PI)),
    "zy": ((0.0, 0.0), (HALF_PI, HALF_PI)),
    "xy": ((0.0, HALF_PI), (HALF_PI, HALF_PI)),
}


def pair_entry(r: complex, n: int, m: int, s_n: int, s_m: int, angles) -> complex:
    """General M_nm for one pair with angles ((phi_n, theta_n), (phi_m, theta_m))."""
    (phi_n, theta_n), (phi_m, theta_m) = angles
    u, v = up_down_factors(np.array([theta_n, theta_m]), np.array([s_n, s_m]))
    parity = (-1) ** (n + m)
    return complex(
        r * np.exp(1j * (phi_n + phi_m)) * u[0] * u[1] + parity * (-s_n * s_m) * v[0] * v[1]
    )


def pair_entry_table(r: complex, n: int, m: int, s_n: int, s_m: int) -> dict[str, complex]:
    """Closed forms of M_nm in the named uniform and mixed bases."""
    parity = (-1) ** (n + m)
    up_n, down_n = (1 + s_n) / 2, (1 - s_n) / 2
    up_m, down_m = (1 + s_m) / 2, (1 - s_m) / 2
    root = np.sqrt(2.0)
    return {
        "zz": up_n * up_m * r - parity * down_n * down_m,
        "xx": 0.5 * (r - parity * s_n * s_m),
        "yy": -0.5 * (r + parity * s_n * s_m),
        "zx": (up_n * r + parity * s_m * down_n) / root,
        "zy": (up_n * 1j * r + parity * s_m * down_n) / root,
        "xy": 0.5 * (1j * r - parity * s_n * s_m),
    }


def flip_configuration(config: SpinConfiguration) -> SpinConfiguration:
    return config.flipped()


def reflect_basis(basis: PauliBasisSpec) -> PauliBasisSpec:
    """theta -> pi - theta on every site."""
    return basis.replace(theta=np.pi - basis.theta)


# Domain-wall route for theta = pi/2


def uniform_phi(basis: PauliBasisSpec) -> float:
    """The shared phi of a (phi, pi/2, .) basis."""
    if not np.allclose(np.mod(basis.theta, 2 * np.pi), HALF_PI, atol=ANGLE_MATCH_TOL, rtol=0):
        raise ContractViolation("The domain-wall route needs theta = pi/2 on every site")
    if not np.allclose(basis.phi, basis.phi[0], atol=ANGLE_MATCH_TOL, rtol=0):
        raise ContractViolation("The domain-wall route needs a uniform phi")
    return float(basis.phi[0])


def wall_permutation(size: int) -> np.ndarray:
    """P with P[0, L-1] = 1 and P[i, i-1] = -1."""
    p = np.zeros((size, size))
    p[0, size - 1] = 1.0
    p[np.arange(1, size), np.arange(size - 1)] = -1.0
    return p


def _checked_solve(a: np.ndarray, b: np.ndarray, label: str) -> np.ndarray:
    """b @ a^-1, refusing numerically singular a."""
    if np.linalg.cond(a) > 1e12:
        raise NumericGuardError(f"{label} is singular; the domain-wall route is unavailable")
    return scipy.linalg.solve(a.T, b.T).T


def domain_wall_matrix(state: GaussianPureState, phi: float) -> np.ndarray:
    """R~ = (I + W P)(W P - I)^-1 with W = (R^phi - I)(R^phi + I)^-1, R^phi = e^(2i phi) R."""
    state = ensure_vacuum_base(state)
    size = state.size
    eye = np.eye(size)
    r_phi = np.exp(2j * phi) * state.r_matrix
    w = _checked_solve(r_phi + eye, r_phi - eye, "R^phi + I")
    wp = w @ wall_permutation(size)
    r_tilde = _checked_solve(wp - eye, eye + wp, "W P - I")
    return (r_tilde - r_tilde.T) / 2


def domain_walls(config: SpinConfiguration) -> tuple[int, ...]:
    """Sites j with s_j != s_(j+1), the last compared with the first."""
    signs = config.signs
    size = len(signs)
    return tuple(j for j in range(size) if signs[j] != signs[(j + 1) % size])


def domain_wall_amplitude(
    state: GaussianPureState,
    phi: float,
    config: SpinConfiguration,
    r_tilde: Optional[np.ndarray] = None,
) -> complex:
    """
    sgn(S) pf(R~ on the wall sites) / (sqrt(2) N_R~) in the (phi, pi/2, 0) basis.

    Defined for even L, where S and -S share a wall pattern.
    """
    if state.size % 2 == 1:
        raise ContractViolation(f"The domain-wall route needs even L, got {state.size}")
    if config.size != state.size:
        raise ContractViolation("Configuration and state sizes differ")
    if r_tilde is None:
        r_tilde = domain_wall_matrix(state, phi)
    sign = -1 if len(config.minus_sites) % 2 else 1
    walls = domain_walls(config)
    return sign * sub_pfaffian(r_tilde, walls) / (np.sqrt(2.0) * normalization(r_tilde))


def amplitude_relations_check(
    state: GaussianPureState, basis: Optional[PauliBasisSpec] = None
) -> dict[str, float]:
    """
    Residuals of the quadratic L = 4 amplitude relations.

    The sigma^z relation uses the z basis; the two domain-wall relations use
    (phi, pi/2, 0) with phi taken from `basis` (default 0).
    """
    if state.size != 4:
        raise ContractViolation(f"Amplitude relations are defined for L = 4, got {state.size}")
    phi = 0.0 if basis is None else uniform_phi(basis)

    def relation(target: PauliBasisSpec, lhs, terms) -> float:
        def a(text):
            signs = tuple(1 if ch == "+" else -1 for ch in text)
            return evaluate(state, target, SpinConfiguration(signs))

        left = a(lhs[0]) * a(lhs[1])
        right = sum(sign * a(p) * a(q) for sign, p, q in terms)
        return float(abs(left - right))

    z_basis = PauliBasisSpec.named("z", 4)
    wall_basis = PauliBasisSpec.uniform(4, phi, HALF_PI, 0.0)
    report = {
        "sigma_z": relation(
            z_basis,
            ("----", "++++"),
            [(1, "++--", "--++"), (-1, "+-+-", "-+-+"), (1, "+--+", "-++-")],
        ),
        "domain_wall_plus": relation(
            wall_basis,
            ("++++", "+-+-"),
            [(1, "+-++", "+++-"), (-1, "+--+", "++--"), (1, "+---", "++-+")],
        ),
        "domain_wall_minus": relation(
            wall_basis,
            ("----", "-+-+"),
            [(1, "-+--", "---+"), (-1, "-++-", "--++"), (1, "-+++", "--+-")],
        ),
    }
    report["max_residual"] = max(report.values())
    log.debug(f"L=4 amplitude relations: {report}")
    return report
