"""Shared numerical primitives: moments, whitening, spectral helpers, quantiles.

Every downstream module takes raw data as an ``(n, p)`` float array (one
observation per row) and leans on these helpers for covariance estimation,
symmetric inverse square roots, pseudo-inverses, Krylov sequences and
distribution quantiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from .errors import DegenerateDirectionError, DomainError, InsufficientDataError, ShapeError

Divisor = Literal["n", "n-1"]

EIGEN_FLOOR = 1e-12
SYMMETRY_RTOL = 1e-10


def as_data_matrix(X, *, min_rows: int = 2, name: str = "X") -> np.ndarray:
    """Validate and return ``X`` as a finite 2-D float array.

    Raises:
        ShapeError: if ``X`` is not 2-D or has no columns.
        InsufficientDataError: if ``X`` has fewer than ``min_rows`` rows.
        DomainError: if ``X`` contains NaN or infinite entries.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError(f"{name} must be 2-D (n, p), got shape {X.shape}")
    if X.shape[1] < 1:
        raise ShapeError(f"{name} must have at least one column")
    if X.shape[0] < min_rows:
        raise InsufficientDataError(
            f"{name} needs at least {min_rows} rows, got {X.shape[0]}"
        )
    if not np.all(np.isfinite(X)):
        raise DomainError(f"{name} contains non-finite entries")
    return X


def as_vector(y, n: int | None = None, name: str = "y") -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim == 2 and 1 in y.shape:
        y = y.ravel()
    if y.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {y.shape}")
    if n is not None and y.shape[0] != n:
        raise ShapeError(f"{name} has length {y.shape[0]}, expected {n}")
    if not np.all(np.isfinite(y)):
        raise DomainError(f"{name} contains non-finite entries")
    return y


def _ddof(divisor: Divisor) -> int:
    if divisor == "n":
        return 0
    if divisor == "n-1":
        return 1
    raise DomainError(f"divisor must be 'n' or 'n-1', got {divisor!r}")


def sample_mean_cov(X, divisor: Divisor = "n-1") -> tuple[np.ndarray, np.ndarray]:
    """Column means and sample covariance of an ``(n, p)`` data matrix.

    ``divisor`` selects between the maximum-likelihood (``"n"``) and the
    unbiased (``"n-1"``) estimator. The result is symmetrized exactly.
    """
    X = as_data_matrix(X)
    ddof = _ddof(divisor)
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / (X.shape[0] - ddof)
    return mean, 0.5 * (cov + cov.T)


def sample_cross_cov(X, y, divisor: Divisor = "n-1") -> np.ndarray:
    """Cross-covariance vector between the columns of ``X`` and the response ``y``."""
    X = as_data_matrix(X)
    y = as_vector(y, X.shape[0])
    ddof = _ddof(divisor)
    Xc = X - X.mean(axis=0)
    return Xc.T @ (y - y.mean()) / (X.shape[0] - ddof)


def check_symmetric(M, name: str = "M") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {M.shape}")
    scale = max(np.abs(M).max(initial=0.0), 1.0)
    if np.abs(M - M.T).max(initial=0.0) > SYMMETRY_RTOL * scale:
        raise DomainError(f"{name} is not symmetric")
    return 0.5 * (M + M.T)


def sym_eigh(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix, eigenvalues in descending order."""
    M = check_symmetric(M)
    w, V = np.linalg.eigh(M)
    return w[::-1], V[:, ::-1]


def inv_sqrt(M, floor: float = EIGEN_FLOOR) -> np.ndarray:
    """Symmetric inverse square root restricted to the numerical range of ``M``.

    Eigenvalues ``d <= floor * d_max`` are treated as zero and map to zero,
    so a rank-deficient ``M`` yields the pseudo-inverse square root.
    """
    if floor < 0:
        raise DomainError("floor must be nonnegative")
    w, V = sym_eigh(M)
    d_max = w[0] if w.size else 0.0
    if d_max <= 0:
        return np.zeros_like(V)
    keep = w > floor * d_max
    scale = np.zeros_like(w)
    scale[keep] = 1.0 / np.sqrt(w[keep])
    return (V * scale) @ V.T


def pseudo_inverse(M, rel_tol: float = EIGEN_FLOOR) -> np.ndarray:
    """Moore-Penrose inverse via SVD, dropping singular values below ``rel_tol * s_max``."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {M.shape}")
    if M.size == 0:
        return M.T.copy()
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0:
        return np.zeros(M.T.shape)
    keep = s > rel_tol * s[0]
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (Vt.T * inv_s) @ U.T


def canonical_direction(v) -> np.ndarray:
    """Scale ``v`` to unit length with its first nonzero coordinate positive."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0:
        raise DegenerateDirectionError("cannot normalize a zero or non-finite direction")
    v = v / norm
    nz = np.flatnonzero(np.abs(v) > 1e-14)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return v


def krylov_columns(A, v, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit-norm Krylov vectors ``A^j v / ||A^j v||`` for ``j < q`` and their norms.

    Computed by repeated multiplication of the normalized previous vector so
    that ill-conditioned ``A`` does not overflow. Returns ``(U, scales)`` where
    ``U[:, j] * scales[j]`` is the raw column ``A^j v``; ``scales`` may
    contain ``inf``/``0`` if the raw sequence leaves the float range.
    """
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    p = A.shape[0]
    if q < 1 or q > p:
        raise DomainError(f"Krylov order q must satisfy 1 <= q <= p={p}, got {q}")
    norm = np.linalg.norm(v)
    if norm == 0 or not np.isfinite(norm):
        raise DegenerateDirectionError("Krylov seed vector is zero")
    U = np.empty((p, q))
    log_scales = np.empty(q)
    u = v / norm
    log_s = np.log(norm)
    for j in range(q):
        U[:, j] = u
        log_scales[j] = log_s
        if j + 1 < q:
            w = A @ u
            s = np.linalg.norm(w)
            if s == 0:
                # sequence terminated: A^j v is in the null space of A
                U[:, j + 1 :] = 0.0
                log_scales[j + 1 :] = -np.inf
                break
            u = w / s
            log_s += np.log(s)
    with np.errstate(over="ignore"):
        scales = np.exp(log_scales)
    return U, scales


def krylov_orthobasis(A, v, q: int, rel_tol: float = EIGEN_FLOOR) -> np.ndarray:
    """Orthonormal basis of ``span(v, A v, ..., A^{q-1} v)`` by Arnoldi.

    Each new vector is orthogonalized twice against the previous ones, so the
    basis stays accurate when the raw Krylov columns are nearly parallel. The
    basis has fewer than ``q`` columns if the sequence becomes numerically
    dependent (residual norm at most ``rel_tol`` times ``||A u||``).
    """
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    p = A.shape[0]
    if q < 1 or q > p:
        raise DomainError(f"Krylov order q must satisfy 1 <= q <= p={p}, got {q}")
    norm = np.linalg.norm(v)
    if norm == 0 or not np.isfinite(norm):
        raise DegenerateDirectionError("Krylov seed vector is zero")
    Q = np.empty((p, q))
    Q[:, 0] = v / norm
    k = 1
    while k < q:
        w = A @ Q[:, k - 1]
        ref = np.linalg.norm(w)
        for _ in range(2):
            w -= Q[:, :k] @ (Q[:, :k].T @ w)
        s = np.linalg.norm(w)
        if ref == 0 or s <= rel_tol * ref:
            break
        Q[:, k] = w / s
        k += 1
    return Q[:, :k]


def orth_range(B, rel_tol: float = EIGEN_FLOOR) -> np.ndarray:
    """Orthonormal basis of the numerical column span of ``B``.

    Columns are normalized first, so the rank cut is insensitive to their scale.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    norms = np.linalg.norm(B, axis=0)
    nz = norms > 0
    B = B[:, nz] / norms[nz]
    if B.shape[1] == 0:
        return B
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    return U[:, s > rel_tol * s[0]]


def subspace_solve(cov, basis, rhs, rel_tol: float = EIGEN_FLOOR) -> np.ndarray:
    """``B (B' cov B)^- B' rhs`` for the span ``B`` of ``basis``.

    Only the span of ``basis`` matters, so it is replaced by an orthonormal
    basis of its numerical rank before the inner matrix is formed.
    """
    cov = np.asarray(cov, dtype=float)
    B = orth_range(basis, rel_tol)
    if B.shape[1] == 0:
        return np.zeros(cov.shape[0])
    return B @ (pseudo_inverse(B.T @ cov @ B, rel_tol) @ (B.T @ np.asarray(rhs, dtype=float)))


def sigma_projection(cov, basis, v, rel_tol: float = EIGEN_FLOOR) -> np.ndarray:
    """Projection of ``v`` onto ``span(basis)`` in the ``cov`` inner product."""
    return subspace_solve(cov, basis, np.asarray(cov, dtype=float) @ v, rel_tol)


def sigma_projector(cov, basis, rel_tol: float = EIGEN_FLOOR) -> np.ndarray:
    """Matrix ``B (B' cov B)^- B' cov`` of :func:`sigma_projection`."""
    cov = np.asarray(cov, dtype=float)
    B = orth_range(basis, rel_tol)
    if B.shape[1] == 0:
        return np.zeros_like(cov)
    return B @ pseudo_inverse(B.T @ cov @ B, rel_tol) @ B.T @ cov


# -- quantiles ---------------------------------------------------------------

_FAMILY_NPARAMS = {"normal": 0, "student_t": 1, "chi_square": 1, "f": 2}


@dataclass(frozen=True)
class QuantileSpec:
    family: str
    prob: float
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.family not in _FAMILY_NPARAMS:
            raise DomainError(f"unknown distribution family {self.family!r}")
        if len(self.params) != _FAMILY_NPARAMS[self.family]:
            raise DomainError(
                f"{self.family} takes {_FAMILY_NPARAMS[self.family]} degrees of freedom"
            )
        if any(not (np.isfinite(d) and d > 0) for d in self.params):
            raise DomainError("degrees of freedom must be positive and finite")
        if not (0.0 < self.prob < 1.0):
            raise DomainError(f"prob must lie in (0, 1), got {self.prob}")

    def _dist(self):
        return {
            "normal": stats.norm,
            "student_t": stats.t,
            "chi_square": stats.chi2,
            "f": stats.f,
        }[self.family](*self.params)


def quantile(spec: QuantileSpec) -> float:
    """Inverse CDF at ``spec.prob``. Non-integer degrees of freedom are fine."""
    return float(spec._dist().ppf(spec.prob))


def cdf(spec: QuantileSpec, x: float) -> float:
    return float(spec._dist().cdf(x))


def upper_quantile(family: str, alpha: float, *params: float) -> float:
    """Upper ``alpha`` critical value, i.e. the ``1 - alpha`` quantile."""
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"significance level must lie in (0, 1), got {alpha}")
    return quantile(QuantileSpec(family, 1.0 - alpha, tuple(float(d) for d in params)))


@dataclass(frozen=True)
class CenterWhitenStats:
    mean: np.ndarray
    cov: np.ndarray
    inv_sqrt_cov: np.ndarray
    eigen_floor: float = EIGEN_FLOOR

    @property
    def p(self) -> int:
        return self.mean.shape[0]


def fit_whitening(
    X, divisor: Divisor = "n-1", floor: float = EIGEN_FLOOR
) -> CenterWhitenStats:
    mean, cov = sample_mean_cov(X, divisor)
    return CenterWhitenStats(mean, cov, inv_sqrt(cov, floor), floor)


def whiten(X, stats_: CenterWhitenStats) -> np.ndarray:
    """Rows ``z_i = cov^{-1/2} (x_i - mean)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != stats_.p:
        raise ShapeError(
            f"whitening statistics are for p={stats_.p}, data has shape {X.shape}"
        )
    return (X - stats_.mean) @ stats_.inv_sqrt_cov
