"""
Recursive amplitude expansion.

Writing b_S = N_R a_S, the Pfaffian of M expanded along its first row gives

    b_S = sum_j  P(Abar_2j) b_{1,2j}(phi, theta) b_rest(phi, thetabar^j)
        - sum_j  P(A_2j)    b_{1,2j+1}(phi + pi/2, theta) b_rest(phi, 2pi - thetabar^j)

with A_2j = {2..2j}, Abar_2j = {2j+1..L'}, P the product of the spins in a
region, and thetabar^j replacing theta_k by 2pi - theta_k on Abar_2j. The
alternative form trades the phi shift of the odd branch for theta_1 ->
2pi - theta_1 and a (-1)^((1+s_1)/2) sign.

All sub-amplitudes live on the padded even-size problem: for odd L the
ancilla is an ordinary site with theta = pi/2 (3pi/2 after a flip) and a
zero row, so its pair normalization is 1. Site indices below are 0-based
in the padded problem.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .amplitude import (
    AmplitudeRequest,
    HALF_PI,
    PaddedProblem,
    amplitude,
    padded_problem,
    prefactor_sign,
)
from .basis import PauliBasisSpec, SpinConfiguration
from .errors import ContractViolation
from .state import GaussianPureState, ensure_vacuum_base, make_state

log = logging.getLogger(__name__)

VARIANTS = ("phi", "theta")
DEPTHS = ("direct", "full")


@dataclass
class RecursionTerm:
    """
    One term of the first-row expansion.

    Attributes:
        pair: padded site indices (0, k)
        remainder: padded sites left after removing the pair
        parity_sign: P(Abar) for even k+1, P(A) for odd k+1
        branch_sign: +1, -1, or (-1)^((1+s_1)/2) for the alternative odd branch
        flipped_sites: remainder sites whose theta becomes 2pi - theta
        phi_shifted: pair sites whose phi gains pi/2
        theta_flipped_pair: pair sites whose theta becomes 2pi - theta
    """

    pair: tuple[int, int]
    remainder: tuple[int, ...]
    parity_sign: int
    branch_sign: int
    flipped_sites: tuple[int, ...]
    phi_shifted: tuple[int, ...] = ()
    theta_flipped_pair: tuple[int, ...] = ()
    pair_factor: Optional[complex] = None
    remainder_factor: Optional[complex] = None

    @property
    def value(self) -> complex:
        if self.pair_factor is None or self.remainder_factor is None:
            raise ContractViolation("Term has not been evaluated")
        return self.branch_sign * self.parity_sign * self.pair_factor * self.remainder_factor

    def describe(self) -> str:
        """1-based rendering, e.g. '+ s[+1] b(1,2) b(3,4 | flip 3,4)'."""

        def one(sites):
            return ",".join(str(s + 1) for s in sites)

        sign = "+" if self.branch_sign > 0 else "-"
        pair = f"b({one(self.pair)}"
        if self.phi_shifted:
            pair += " | phi+pi/2"
        if self.theta_flipped_pair:
            pair += f" | flip {one(self.theta_flipped_pair)}"
        rest = f"b({one(self.remainder)}"
        if self.flipped_sites:
            rest += f" | flip {one(self.flipped_sites)}"
        return f"{sign} s[{self.parity_sign:+d}] {pair}) {rest})"


@dataclass(frozen=True, eq=False)
class _SubProblem:
    """Even-size problem carried through the recursion (alpha kept per site)."""

    r_matrix: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    alpha: np.ndarray
    signs: np.ndarray
    sites: tuple[int, ...] = field(default=())

    @classmethod
    def from_padded(cls, problem: PaddedProblem) -> "_SubProblem":
        return cls(
            problem.r_matrix,
            problem.phi,
            problem.theta,
            problem.alpha,
            problem.signs,
            tuple(range(problem.size)),
        )

    @property
    def size(self) -> int:
        return len(self.signs)

    def restrict(self, local: list[int]) -> "_SubProblem":
        idx = np.array(local, dtype=int)
        return _SubProblem(
            self.r_matrix[np.ix_(idx, idx)],
            self.phi[idx],
            self.theta[idx],
            self.alpha[idx],
            self.signs[idx],
            tuple(self.sites[k] for k in local),
        )

    def with_angles(self, phi=None, theta=None) -> "_SubProblem":
        return _SubProblem(
            self.r_matrix,
            self.phi if phi is None else phi,
            self.theta if theta is None else theta,
            self.alpha,
            self.signs,
            self.sites,
        )


def _direct_b(sub: _SubProblem) -> complex:
    """N_R a_S of an even-size subproblem via the direct Pfaffian engine."""
    if sub.size == 0:
        return 1.0 + 0.0j
    state = make_state(sub.r_matrix)
    basis = PauliBasisSpec(sub.phi, sub.theta, sub.alpha)
    config = SpinConfiguration(tuple(int(s) for s in sub.signs))
    return state.norm * amplitude(AmplitudeRequest(state, basis, config))


def _expand(sub: _SubProblem, variant: str) -> list[tuple[RecursionTerm, _SubProblem, _SubProblem]]:
    """Terms of the first-row expansion with their pair and remainder subproblems."""
    size = sub.size
    signs = sub.signs
    expansion = []
    for k in range(1, size):
        rest = [q for q in range(1, size) if q != k]
        pair = sub.restrict([0, k])
        if k % 2 == 1:
            # 1-based partner 2j: flip the sites after the pair
            region = list(range(k + 1, size))
            branch_sign = 1
            phi_shifted: tuple[int, ...] = ()
            theta_flipped_pair: tuple[int, ...] = ()
        else:
            # 1-based partner 2j+1: flip the sites between the pair
            region = list(range(1, k))
            if variant == "phi":
                branch_sign = -1
                pair = pair.with_angles(phi=pair.phi + HALF_PI)
                phi_shifted = (sub.sites[0], sub.sites[k])
                theta_flipped_pair = ()
            else:
                branch_sign = -1 if signs[0] == 1 else 1
                pair = pair.with_angles(theta=np.array([2 * np.pi - pair.theta[0], pair.theta[1]]))
                phi_shifted = ()
                theta_flipped_pair = (sub.sites[0],)
        parity = int(np.prod(signs[region])) if region else 1

        remainder = sub.restrict(rest)
        flipped = [i for i, q in enumerate(rest) if q in region]
        theta = remainder.theta.copy()
        theta[flipped] = 2 * np.pi - theta[flipped]
        remainder = remainder.with_angles(theta=theta)

        term = RecursionTerm(
            pair=(sub.sites[0], sub.sites[k]),
            remainder=tuple(sub.sites[q] for q in rest),
            parity_sign=parity,
            branch_sign=branch_sign,
            flipped_sites=tuple(sub.sites[q] for q in region),
            phi_shifted=phi_shifted,
            theta_flipped_pair=theta_flipped_pair,
        )
        expansion.append((term, pair, remainder))
    return expansion


def _recursive_b(sub: _SubProblem, variant: str, depth: str) -> complex:
    if sub.size == 0:
        return 1.0 + 0.0j
    if sub.size == 2:
        return _direct_b(sub)
    total = 0.0 + 0.0j
    for term, pair, remainder in _expand(sub, variant):
        term.pair_factor = _direct_b(pair)
        if depth == "full":
            term.remainder_factor = _recursive_b(remainder, variant, depth)
        else:
            term.remainder_factor = _direct_b(remainder)
        total += term.value
    return total


def _check_args(variant: str, depth: str) -> None:
    if variant not in VARIANTS:
        raise ContractViolation(f"Unknown variant {variant!r}; expected one of {VARIANTS}")
    if depth not in DEPTHS:
        raise ContractViolation(f"Unknown depth {depth!r}; expected one of {DEPTHS}")


def unnormalized_amplitude(
    state: GaussianPureState, basis: PauliBasisSpec, config: SpinConfiguration
) -> complex:
    """b_S = N_R a_S, with N_R of the vacuum-based form."""
    state = ensure_vacuum_base(state)
    return state.norm * amplitude(AmplitudeRequest(state, basis, config))


def recursion_terms(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    config: SpinConfiguration,
    variant: str = "phi",
) -> list[RecursionTerm]:
    """Evaluated terms of the top-level expansion, in partner order 2..L'."""
    _check_args(variant, "direct")
    sub = _SubProblem.from_padded(padded_problem(state, basis, config))
    terms = []
    for term, pair, remainder in _expand(sub, variant):
        term.pair_factor = _direct_b(pair)
        term.remainder_factor = _direct_b(remainder)
        terms.append(term)
    return terms


def recursive_unnormalized_amplitude(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    config: SpinConfiguration,
    variant: str = "phi",
    depth: str = "direct",
) -> complex:
    """b_S by recursion; depth='full' recurses down to pairs."""
    _check_args(variant, depth)
    problem = padded_problem(state, basis, config)
    b_padded = _recursive_b(_SubProblem.from_padded(problem), variant, depth)
    log.debug(f"Recursive b_S ({variant}, {depth}) for {config}: {b_padded}")
    return prefactor_sign(problem) * b_padded


def recursive_amplitude(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    config: SpinConfiguration,
    depth: str = "direct",
) -> complex:
    b = recursive_unnormalized_amplitude(state, basis, config, "phi", depth)
    return b / ensure_vacuum_base(state).norm


def recursive_amplitude_alt(
    state: GaussianPureState,
    basis: PauliBasisSpec,
    config: SpinConfiguration,
    depth: str = "direct",
) -> complex:
    b = recursive_unnormalized_amplitude(state, basis, config, "theta", depth)
    return b / ensure_vacuum_base(state).norm
