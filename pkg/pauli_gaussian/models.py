"""
R-matrix builders for physical models.

The transverse-field Ising ring is

    H = -J sum_j sigma^x_j sigma^x_(j+1) + h sum_j sigma^z_j,   sigma^x_(L+1) = sigma^x_1

with sigma^z_j = 2 n_j - 1, so for h > 0 the h -> infinity paramagnet is the
fermion vacuum and R -> 0. This is the usual sign convention for
-h sum sigma^z up to a global sigma^x rotation, which leaves every
sigma^x-basis quantity unchanged.

Two routes produce the ground-state pairing matrix:

  exact       sparse diagonalization of the spin Hamiltonian and
              r_ij = psi(e_i + e_j) / psi(0) (L <= 12)
  bogoliubov  diagonalization of the quadratic fermion Hamiltonian in the
              even-parity (antiperiodic) sector, G = -(U^+)^-1 V^+

The exact route is authoritative; the Bogoliubov route must agree with it
entrywise.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
from scipy.sparse.linalg import eigsh

from .config import get_config
from .errors import ContractViolation, NumericGuardError
from .state import GaussianPureState, load_state, make_state

log = logging.getLogger(__name__)

MODEL_ROUTES = ("auto", "exact", "bogoliubov")
VACUUM_OVERLAP_FLOOR = 1e-12
GAP_FLOOR = 1e-12

# Dense diagonalization below this Hilbert-space dimension
DENSE_LIMIT = 256


@dataclass(frozen=True)
class TfimSpec:
    """
    Periodic transverse-field Ising ring, even-parity sector.

    Attributes:
        size: number of sites L (even)
        coupling: J
        field: h
    """

    size: int
    coupling: float = 1.0
    field: float = 1.0

    def __post_init__(self):
        if self.size < 2 or self.size % 2:
            raise ContractViolation(
                f"TFIM ring needs an even L >= 2 for the antiperiodic sector, got {self.size}"
            )
        if not (np.isfinite(self.coupling) and np.isfinite(self.field)):
            raise ContractViolation("J and h must be finite")

    @property
    def boundary(self) -> str:
        return "periodic"

    @property
    def parity(self) -> str:
        return "even"

    @property
    def momenta(self) -> np.ndarray:
        """Antiperiodic momenta k = pi(2m+1)/L."""
        return np.pi * (2 * np.arange(self.size) + 1) / self.size

    def mode_energies(self) -> np.ndarray:
        """E_k = 2 sqrt(J^2 + h^2 - 2 J h cos k)."""
        j, h = self.coupling, self.field
        return 2 * np.sqrt(np.maximum(j**2 + h**2 - 2 * j * h * np.cos(self.momenta), 0.0))


def tfim_hamiltonian(spec: TfimSpec) -> sparse.csr_matrix:
    """Sparse spin Hamiltonian in the occupation basis (site 1 most significant)."""
    size = spec.size
    sx = sparse.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    sz = sparse.csr_matrix(np.array([[-1.0, 0.0], [0.0, 1.0]]))  # 2n - 1
    eye = sparse.identity(2, format="csr")

    def site_operator(op, site):
        ops = [eye] * size
        ops[site] = op
        out = ops[0]
        for other in ops[1:]:
            out = sparse.kron(out, other, "csr")
        return out

    sx_list = [site_operator(sx, i) for i in range(size)]
    sz_list = [site_operator(sz, i) for i in range(size)]
    dim = 2**size
    h_xx = sparse.csr_matrix((dim, dim))
    h_z = sparse.csr_matrix((dim, dim))
    for i in range(size):
        h_xx = h_xx + sx_list[i] @ sx_list[(i + 1) % size]
        h_z = h_z + sz_list[i]
    return -spec.coupling * h_xx + spec.field * h_z


def tfim_ground_state(spec: TfimSpec) -> tuple[float, np.ndarray]:
    """
    Exact ground-state energy and normalized vector.

    Raises:
        NumericGuardError: if L exceeds the exact-model guard
    """
    limit = get_config().max_exact_model_sites
    if spec.size > limit:
        raise NumericGuardError(
            f"Exact TFIM diagonalization limited to L <= {limit}, got {spec.size}; "
            "use the bogoliubov route"
        )
    hamiltonian = tfim_hamiltonian(spec)
    dim = hamiltonian.shape[0]
    if dim <= DENSE_LIMIT:
        energies, vectors = scipy.linalg.eigh(hamiltonian.toarray())
        energy, vector = energies[0], vectors[:, 0]
    else:
        v0 = np.full(dim, 1.0 / np.sqrt(dim))
        energies, vectors = eigsh(hamiltonian, k=1, which="SA", v0=v0)
        energy, vector = energies[0], vectors[:, 0]
    vector = vector / np.linalg.norm(vector)
    log.debug(f"TFIM L={spec.size} J={spec.coupling} h={spec.field}: E0 = {energy:.12g}")
    return float(energy), vector.astype(complex)


def r_matrix_from_vector(vector: np.ndarray, size: int) -> np.ndarray:
    """
    Pairing matrix r_ij = psi(e_i + e_j) / psi(0) of a Gaussian vector.

    Raises:
        NumericGuardError: if the vacuum amplitude vanishes
    """
    anchor = vector[0]
    if abs(anchor) < VACUUM_OVERLAP_FLOOR:
        raise NumericGuardError(
            f"Vacuum amplitude {abs(anchor):.3e} too small to extract R"
        )
    r = np.zeros((size, size), dtype=complex)
    for i in range(size):
        for j in range(i + 1, size):
            index = (1 << (size - 1 - i)) | (1 << (size - 1 - j))
            r[i, j] = vector[index] / anchor
            r[j, i] = -r[i, j]
    return r


def tfim_r_matrix_exact_small(spec: TfimSpec) -> GaussianPureState:
    """Ground state by exact diagonalization, read off through r_ij = a_ij / a_0."""
    _, vector = tfim_ground_state(spec)
    return make_state(r_matrix_from_vector(vector, spec.size))


def bdg_blocks(spec: TfimSpec) -> tuple[np.ndarray, np.ndarray]:
    """
    Hopping block A and pairing block B of H = sum A_ij c+_i c_j + 1/2 sum (B_ij c+_i c+_j + h.c.).

    The bond L -> 1 carries the antiperiodic sign of the even-parity sector.
    """
    size = spec.size
    j = spec.coupling
    a = np.zeros((size, size))
    b = np.zeros((size, size))
    for site in range(size):
        a[site, site] += 2 * spec.field
        nxt = (site + 1) % size
        sign = -1.0 if nxt == 0 else 1.0
        a[site, nxt] += -j * sign
        a[nxt, site] += -j * sign
        b[site, nxt] += -j * sign
        b[nxt, site] += j * sign
    return a, b


def tfim_r_matrix_bogoliubov(spec: TfimSpec) -> GaussianPureState:
    """
    Ground-state pairing matrix from the Bogoliubov-de Gennes spectrum.

    The positive-energy eigenvectors (U; V) of [[A, B], [-B*, -A*]] define
    the quasiparticle annihilators sum_i (U*_ik c_i + V*_ik c+_i), which
    annihilate exp(1/2 c+ G c+)|0> for G = -(U^+)^-1 V^+.

    Raises:
        NumericGuardError: on a gapless mode or a singular U block
    """
    energies = spec.mode_energies()
    soft = int(np.argmin(energies))
    if energies[soft] < GAP_FLOOR:
        k = spec.momenta[soft]
        raise NumericGuardError(
            f"Gapless Bogoliubov mode at momentum pair (k, -k) = ({k:.6g}, {-k:.6g}); "
            f"E_k = {energies[soft]:.3e}"
        )

    size = spec.size
    a, b = bdg_blocks(spec)
    bdg = np.block([[a, b], [-b.conj(), -a.conj()]])
    values, vectors = scipy.linalg.eigh(bdg)
    positive = vectors[:, size:]
    if values[size] < GAP_FLOOR:
        raise NumericGuardError(f"Bogoliubov spectrum not gapped: E_min = {values[size]:.3e}")
    u, v = positive[:size], positive[size:]

    cond = np.linalg.cond(u)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericGuardError(
            f"U block is singular (cond = {cond:.3e}); the ground state has no vacuum overlap"
        )
    g = -np.linalg.solve(u.conj().T, v.conj().T)
    g = (g - g.T) / 2
    log.debug(f"Bogoliubov L={size}: gap {values[size]:.6g}, max |r| {np.abs(g).max():.3g}")
    return make_state(g)


def tfim_r_matrix(spec: TfimSpec, route: str = "auto") -> GaussianPureState:
    """TFIM ground state by the requested route (auto = bogoliubov)."""
    if route not in MODEL_ROUTES:
        raise ContractViolation(f"Unknown model route {route!r}; expected one of {MODEL_ROUTES}")
    log.info(
        f"Building TFIM state: L={spec.size}, J={spec.coupling}, h={spec.field}, route={route}"
    )
    if route == "exact":
        return tfim_r_matrix_exact_small(spec)
    return tfim_r_matrix_bogoliubov(spec)


def load_r_matrix(path: Path) -> GaussianPureState:
    """Read a state from the JSON state spec."""
    state = load_state(Path(path))
    log.info(f"Loaded L={state.size} state from {path}")
    return state
