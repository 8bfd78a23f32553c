"""Sliced inverse regression.

Predictors are whitened, observations are sorted by the response and cut into
``H`` contiguous slices, and the weighted covariance of the whitened slice
means is eigendecomposed. Its leading eigenvectors, mapped back through the
inverse square root of the predictor covariance, estimate the effective
dimension-reducing directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numlin
from .errors import DegenerateSliceError, DomainError, ShapeError, TooManySlicesError


@dataclass(frozen=True)
class SliceAssignment:
    labels: np.ndarray
    H: int
    counts: np.ndarray
    proportions: np.ndarray


@dataclass(frozen=True)
class SirModel:
    stats: numlin.CenterWhitenStats
    slice_mean_cov: np.ndarray
    eigenvalues: np.ndarray
    directions: np.ndarray
    H: int

    @property
    def beta(self) -> np.ndarray:
        """Leading direction."""
        return self.directions[:, 0]


def assign_slices(y, H: int) -> SliceAssignment:
    """Partition observations into ``H`` contiguous slices of the sorted response.

    Slice sizes differ by at most one; the first ``n mod H`` slices get the
    extra observation. Ties are broken by original index.
    """
    y = numlin.as_vector(y)
    n = y.shape[0]
    if H < 2:
        raise DomainError(f"need at least 2 slices, got H={H}")
    if H > n:
        raise TooManySlicesError(f"H={H} slices requested for only n={n} observations")
    base, rem = divmod(n, H)
    counts = np.full(H, base, dtype=int)
    counts[:rem] += 1
    order = np.argsort(y, kind="stable")
    labels = np.empty(n, dtype=int)
    labels[order] = np.repeat(np.arange(H), counts)
    return SliceAssignment(labels, H, counts, counts / n)


def slice_mean_cov(Z, assignment: SliceAssignment) -> np.ndarray:
    """Weighted covariance ``sum_h rho_h m_h m_h'`` of the per-slice means of ``Z``."""
    Z = np.asarray(Z, dtype=float)
    labels = assignment.labels
    if Z.ndim != 2 or Z.shape[0] != labels.shape[0]:
        raise ShapeError(f"Z has shape {Z.shape}, labels have length {labels.shape[0]}")
    counts = np.bincount(labels, minlength=assignment.H)
    if np.any(counts == 0):
        raise DegenerateSliceError("every slice must contain at least one observation")
    sums = np.zeros((assignment.H, Z.shape[1]))
    np.add.at(sums, labels, Z)
    means = sums / counts[:, None]
    rho = counts / labels.shape[0]
    M = (means * rho[:, None]).T @ means
    return 0.5 * (M + M.T)


def fit_sir(
    X,
    y,
    H: int = 10,
    K: int = 1,
    divisor: numlin.Divisor = "n-1",
    floor: float = numlin.EIGEN_FLOOR,
) -> SirModel:
    X = numlin.as_data_matrix(X)
    n, p = X.shape
    y = numlin.as_vector(y, n)
    k_max = min(H - 1, p)
    if K < 1 or K > k_max:
        raise DomainError(f"K must satisfy 1 <= K <= min(H-1, p)={k_max}, got {K}")
    a = assign_slices(y, H)
    stats = numlin.fit_whitening(X, divisor, floor)
    Z = numlin.whiten(X, stats)
    M = slice_mean_cov(Z, a)
    w, V = numlin.sym_eigh(M)
    eigenvalues = np.clip(w[:k_max], 0.0, None)
    directions = np.column_stack(
        [numlin.canonical_direction(stats.inv_sqrt_cov @ V[:, k]) for k in range(K)]
    )
    return SirModel(stats, M, eigenvalues, directions, H)
