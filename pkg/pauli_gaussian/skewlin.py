"""
Dense complex linear algebra for skew-symmetric matrices.

Pfaffians use skew-symmetric Gaussian elimination with partial pivoting
(Parlett-Reid tridiagonalization), O(n^3). All public indices are 0-based.
Sign factors written (-1)^(n+m) with 1-based n, m in the literature are
unchanged by the shift to 0-based indices, because n+m and (n+1)+(m+1)
have the same parity; no offset is applied anywhere in this module.
"""

import itertools
import logging
from typing import Sequence

import numpy as np
import scipy.linalg

from .config import get_config
from .errors import ContractViolation

log = logging.getLogger(__name__)


def skew_matrix(entries, tol: float | None = None) -> np.ndarray:
    """
    Validate and return a complex skew-symmetric matrix.

    Inputs within `tol` of skew-symmetry are symmetrized as (m - m^T)/2;
    anything further away is rejected.

    Raises:
        ContractViolation: if the input is not square or not skew.
    """
    tol = get_config().skew_tolerance if tol is None else tol
    m = np.array(entries, dtype=complex)
    if m.size == 0:
        return np.zeros((0, 0), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractViolation(f"Expected a square matrix, got shape {m.shape}")
    deviation = np.abs(m + m.T)
    if deviation.max() > tol:
        i, j = np.unravel_index(int(deviation.argmax()), deviation.shape)
        raise ContractViolation(
            f"Matrix is not skew-symmetric: |m[{i},{j}] + m[{j},{i}]| = "
            f"{deviation[i, j]:.3e} exceeds {tol:.1e}"
        )
    return (m - m.T) / 2


def index_subset(parent_dim: int, kept: Sequence[int]) -> tuple[int, ...]:
    """Return `kept` as a validated, strictly increasing index tuple."""
    kept = tuple(sorted(int(k) for k in kept))
    if len(set(kept)) != len(kept):
        raise ContractViolation(f"Repeated index in subset {kept}")
    if kept and (kept[0] < 0 or kept[-1] >= parent_dim):
        raise ContractViolation(
            f"Subset {kept} out of range for dimension {parent_dim}"
        )
    return kept


def pfaffian(m: np.ndarray, check: bool = False) -> complex:
    """
    Pfaffian of a skew-symmetric matrix.

    Returns exactly 1 for the empty matrix and exactly 0 for odd dimension.
    Pivots below pivot_tolerance * max|entry| are treated as structural
    zeros and short-circuit to 0.
    """
    if check:
        m = skew_matrix(m)
    n = m.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n % 2 == 1:
        return 0.0 + 0.0j

    a = np.array(m, dtype=complex)
    scale = np.abs(a).max()
    if scale == 0.0:
        return 0.0 + 0.0j
    threshold = get_config().pivot_tolerance * scale

    result = 1.0 + 0.0j
    for k in range(0, n - 1, 2):
        # Bring the largest entry of column k (below the diagonal) to row k+1
        kp = k + 1 + int(np.abs(a[k + 1 :, k]).argmax())
        if kp != k + 1:
            a[[k + 1, kp], k:] = a[[kp, k + 1], k:]
            a[k:, [k + 1, kp]] = a[k:, [kp, k + 1]]
            result = -result

        pivot = a[k, k + 1]
        if abs(pivot) < threshold:
            return 0.0 + 0.0j
        result *= pivot

        if k + 2 < n:
            tau = a[k, k + 2 :] / pivot
            col = a[k + 2 :, k + 1]
            a[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)

    return complex(result)


def sub_pfaffian(m: np.ndarray, keep: Sequence[int]) -> complex:
    """Pfaffian of the principal submatrix on `keep` (a pfaffinho)."""
    keep = index_subset(m.shape[0], keep)
    if len(keep) % 2 == 1:
        return 0.0 + 0.0j
    if not keep:
        return 1.0 + 0.0j
    idx = np.array(keep)
    return pfaffian(m[np.ix_(idx, idx)])


def remove_indices(m: np.ndarray, drop: Sequence[int]) -> np.ndarray:
    """Principal submatrix with the rows and columns in `drop` removed."""
    keep = [k for k in range(m.shape[0]) if k not in set(drop)]
    idx = np.array(keep, dtype=int)
    return m[np.ix_(idx, idx)]


def pfaffian_expand_row(m: np.ndarray, i: int) -> complex:
    """
    Pfaffian by expansion along row i.

    pf(m) = sum_{j != i} (-1)^(i+j+1+H(i-j)) m[i, j] pf(m without rows/cols i, j)
    where H is the Heaviside step with H(0) excluded by j != i.
    """
    n = m.shape[0]
    if n % 2 == 1 or n < 2:
        raise ContractViolation(f"Row expansion needs even dimension >= 2, got {n}")
    if not 0 <= i < n:
        raise ContractViolation(f"Row {i} out of range for dimension {n}")
    total = 0.0 + 0.0j
    for j in range(n):
        if j == i or m[i, j] == 0:
            continue
        heaviside = 1 if i > j else 0
        sign = (-1) ** (i + j + 1 + heaviside)
        total += sign * m[i, j] * pfaffian(remove_indices(m, (i, j)))
    return total


def lieb_matrix(m: np.ndarray, lambdas: Sequence[complex]) -> np.ndarray:
    """Matrix with entries m[i, j] - (-1)^(i+j) lambda_i lambda_j above the diagonal."""
    n = m.shape[0]
    lam = np.asarray(lambdas, dtype=complex)
    if lam.shape != (n,):
        raise ContractViolation(
            f"Expected {n} weights, got {lam.shape[0] if lam.ndim else 0}"
        )
    parity = (-1.0) ** np.add.outer(np.arange(n), np.arange(n))
    shift = np.triu(parity * np.outer(lam, lam), k=1)
    return m - shift + shift.T


def lieb_shifted_pfaffian(m: np.ndarray, lambdas: Sequence[complex]) -> complex:
    """
    Pfaffian of the weight-shifted matrix (Lieb's formula, even dimension).

    Equals sum over even subsets K of pf(m_K) * prod_{j not in K} lambda_j.
    """
    if m.shape[0] % 2 == 1:
        raise ContractViolation(
            f"Lieb's formula needs even dimension, got {m.shape[0]}"
        )
    return pfaffian(lieb_matrix(m, lambdas))


def lieb_odd_extension(m: np.ndarray, lambdas: Sequence[complex]) -> complex:
    """
    Odd-dimension extension: pad with a zero row and column, weight 1.

    Equals sum over all subsets K of pf(m_K) * prod_{j not in K} lambda_j
    for the unpadded matrix (odd-size K contribute 0).
    """
    n = m.shape[0]
    if n % 2 == 0:
        raise ContractViolation(f"Odd extension needs odd dimension, got {n}")
    lam = np.asarray(lambdas, dtype=complex)
    if lam.shape != (n,):
        raise ContractViolation(
            f"Expected {n} weights, got {lam.shape[0] if lam.ndim else 0}"
        )
    padded = np.zeros((n + 1, n + 1), dtype=complex)
    padded[:n, :n] = m
    return lieb_shifted_pfaffian(padded, np.append(lam, 1.0))


def lieb_subset_sum(m: np.ndarray, lambdas: Sequence[complex]) -> complex:
    """Right-hand side of Lieb's formula by explicit subset enumeration."""
    n = m.shape[0]
    lam = np.asarray(lambdas, dtype=complex)
    total = 0.0 + 0.0j
    for size in range(0, n + 1, 2):
        for kept in itertools.combinations(range(n), size):
            weight = np.prod([lam[j] for j in range(n) if j not in kept])
            total += sub_pfaffian(m, kept) * weight
    return total


def determinant(m: np.ndarray) -> complex:
    """Determinant via LU factorization."""
    if m.shape[0] == 0:
        return 1.0 + 0.0j
    return complex(scipy.linalg.det(m))
