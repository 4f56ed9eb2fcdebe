"""
Brute-force dense reference for small systems.

Index convention, shared with every cross-check in the package:
occupation vectors put site 1 in the most significant bit (1 = occupied);
outcome vectors put site 1 in the most significant bit with 0 = '+' and
1 = '-'.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import PauliBasisSpec, SpinConfiguration, basis_bras
from .config import get_config
from .errors import ContractViolation, NumericGuardError
from .state import GaussianPureState, computational_statevector

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DenseState:
    """Length-2^L statevector in the occupation basis."""

    vector: np.ndarray
    size: int

    def __post_init__(self):
        if self.vector.shape != (2**self.size,):
            raise ContractViolation(
                f"Vector of shape {self.vector.shape} does not match L={self.size}"
            )

    @property
    def tensor(self) -> np.ndarray:
        return self.vector.reshape((2,) * self.size)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


def _check_size(size: int) -> None:
    config = get_config()
    if size > config.max_oracle_sites and not config.allow_large_enumeration:
        raise NumericGuardError(
            f"Dense oracle limited to {config.max_oracle_sites} sites, got {size}"
        )


def dense_from_gaussian(state: GaussianPureState) -> DenseState:
    """Expand pf(R_I)/N_R over every occupation subset."""
    _check_size(state.size)
    return DenseState(computational_statevector(state), state.size)


def oracle_amplitude(
    dense: DenseState, basis: PauliBasisSpec, config: SpinConfiguration
) -> complex:
    """Contract the dense vector with the product of measurement bras."""
    if basis.size != dense.size or config.size != dense.size:
        raise ContractViolation("Basis, configuration and state sizes differ")
    bras = basis_bras(basis)
    psi = dense.tensor
    for site, sign in enumerate(config.signs):
        psi = np.tensordot(bras[site, 0 if sign == 1 else 1], psi, axes=([0], [0]))
    return complex(psi)


def oracle_rotated_vector(dense: DenseState, basis: PauliBasisSpec) -> np.ndarray:
    """Amplitudes of every outcome string, indexed as SpinConfiguration.index."""
    if basis.size != dense.size:
        raise ContractViolation("Basis and state sizes differ")
    bras = basis_bras(basis)
    psi = dense.tensor
    for site in range(dense.size):
        psi = np.moveaxis(np.tensordot(bras[site], psi, axes=([1], [site])), 0, site)
    return psi.reshape(-1)


def oracle_partial_trace(dense: DenseState, keep_sites: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on `keep_sites`, in the listed order."""
    _check_size(dense.size)
    keep = list(keep_sites)
    if len(set(keep)) != len(keep) or any(not 0 <= k < dense.size for k in keep):
        raise ContractViolation(f"Invalid kept sites {keep} for L={dense.size}")
    rest = [k for k in range(dense.size) if k not in keep]
    psi = np.transpose(dense.tensor, keep + rest).reshape(2 ** len(keep), -1)
    return psi @ psi.conj().T


def oracle_condition(
    dense: DenseState,
    basis: PauliBasisSpec,
    measured_sites: Sequence[int],
    outcome: SpinConfiguration,
    kept_sites: Sequence[int],
) -> tuple[np.ndarray, float]:
    """
    Project measured sites onto their outcome bras.

    Returns the normalized vector over `kept_sites` (listed order, first site
    most significant, expressed in the measurement basis of each kept site)
    and the outcome probability.
    """
    measured = list(measured_sites)
    kept = list(kept_sites)
    if sorted(measured + kept) != list(range(dense.size)):
        raise ContractViolation("Measured and kept sites must partition the system")
    bras = basis_bras(basis)
    psi = np.transpose(dense.tensor, measured + kept)
    for site, sign in zip(measured, outcome.signs):
        psi = np.tensordot(bras[site, 0 if sign == 1 else 1], psi, axes=([0], [0]))
    for axis, site in enumerate(kept):
        psi = np.moveaxis(np.tensordot(bras[site], psi, axes=([1], [axis])), 0, axis)
    vector = np.asarray(psi).reshape(-1)
    probability = float(np.vdot(vector, vector).real)
    if probability > 0:
        vector = vector / np.sqrt(probability)
    return vector, probability
