"""Partial sliced inverse regression.

The single-index SIR direction is projected, in the ``Sigma_x`` inner product,
onto the Krylov subspace generated by ``omega = Sigma_x beta_SIR``. The Krylov
order ``q`` is picked by counting large consecutive eigenvalue ratios of
``R_p R_p'``. Several indices are extracted by deflating the predictors and
refitting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numlin
from .errors import DegenerateDirectionError, DegenerateError, DomainError
from .sir import fit_sir

DEFAULT_H = 10
DEFAULT_ALPHA = 1.5
RANK_FLOOR = 1e-10


@dataclass(frozen=True)
class KrylovBasis:
    """Krylov sequence ``(omega, S omega, ..., S^{q-1} omega)``.

    ``unit_columns`` are the same vectors rescaled to unit norm and
    ``scales`` the norms, so ``columns == unit_columns * scales``.
    """

    omega: np.ndarray
    unit_columns: np.ndarray
    scales: np.ndarray
    q: int

    @property
    def columns(self) -> np.ndarray:
        return self.unit_columns * self.scales


@dataclass(frozen=True)
class PsirModel:
    beta: np.ndarray
    q: int
    basis: KrylovBasis
    beta_sir: np.ndarray
    sir_eigenvalue: float
    cov_x: np.ndarray
    x_mean: np.ndarray
    H: int
    alpha_threshold: float

    @property
    def projector(self) -> np.ndarray:
        B = numlin.krylov_orthobasis(self.cov_x, self.basis.omega, self.q)
        return numlin.sigma_projector(self.cov_x, B)


def krylov_sequence(cov_x, omega, q: int) -> KrylovBasis:
    cov_x = numlin.check_symmetric(cov_x, "cov_x")
    omega = np.asarray(omega, dtype=float).ravel()
    U, scales = numlin.krylov_columns(cov_x, omega, q)
    return KrylovBasis(omega, U, scales, q)


def krylov_spectrum(cov_x, omega) -> np.ndarray:
    """Descending eigenvalues of ``R_p R_p'`` for the full raw Krylov matrix."""
    cov_x = numlin.check_symmetric(cov_x, "cov_x")
    p = cov_x.shape[0]
    U, scales = numlin.krylov_columns(cov_x, omega, p)
    # singular values of R_p squared; avoids forming R_p R_p' explicitly
    s = np.linalg.svd(U * scales, compute_uv=False)
    return s**2


def select_q(
    cov_x, omega, alpha: float = DEFAULT_ALPHA, rank_floor: float = RANK_FLOOR
) -> int:
    """Number of consecutive eigenvalue ratios of ``R_p R_p'`` exceeding ``alpha``.

    Eigenvalues below ``rank_floor`` times the largest are dropped before the
    ratios are formed. The count is clipped to ``[1, retained rank]``.
    """
    if not alpha > 1:
        raise DomainError(f"threshold alpha must exceed 1, got {alpha}")
    lam = krylov_spectrum(cov_x, omega)
    if not np.isfinite(lam[0]):
        raise DegenerateDirectionError("Krylov sequence overflowed")
    lam = lam[lam > rank_floor * lam[0]]
    ratios = lam[:-1] / lam[1:]
    count = int(np.sum(ratios > alpha))
    return min(max(count, 1), lam.size)


def fit_psir(
    X,
    y,
    H: int = DEFAULT_H,
    alpha: float = DEFAULT_ALPHA,
    q: int | None = None,
    divisor: numlin.Divisor = "n-1",
    rank_floor: float = RANK_FLOOR,
) -> PsirModel:
    """Single-index PSIR fit.

    Args:
        X: ``(n, p)`` predictors.
        y: response of length ``n``.
        H: number of SIR slices.
        alpha: eigenvalue-ratio threshold for choosing ``q``.
        q: force a Krylov order instead of selecting one.

    Returns:
        PsirModel with a unit-norm, sign-fixed ``beta``.
    """
    X = numlin.as_data_matrix(X)
    sir = fit_sir(X, y, H=H, K=1, divisor=divisor)
    cov = sir.stats.cov
    beta_sir = sir.beta
    omega = cov @ beta_sir
    if q is None:
        q = select_q(cov, omega, alpha, rank_floor)
    basis = krylov_sequence(cov, omega, q)
    # same span as the raw columns, but well conditioned for the solve
    beta = numlin.subspace_solve(cov, numlin.krylov_orthobasis(cov, omega, q), omega)
    return PsirModel(
        beta=numlin.canonical_direction(beta),
        q=q,
        basis=basis,
        beta_sir=beta_sir,
        sir_eigenvalue=float(sir.eigenvalues[0]),
        cov_x=cov,
        x_mean=sir.stats.mean,
        H=H,
        alpha_threshold=alpha,
    )


def fit_psir_multi(
    X,
    y,
    H: int = DEFAULT_H,
    alpha: float = DEFAULT_ALPHA,
    max_dirs: int | None = None,
    var_tol: float = 0.05,
) -> list[np.ndarray]:
    """Multiple-index PSIR by repeated deflation of the predictors.

    After each single-index fit the working predictors are replaced by
    ``e_k = (I - b_k b_k') e_{k-1}``. Fitting stops once the remaining total
    variance is at most ``var_tol`` of the original, after ``max_dirs``
    directions, or when a deflated fit degenerates. Returned directions are
    expressed in the original coordinates, ``(I - b_1 b_1') ... b_k``, and
    normalized.
    """
    X = numlin.as_data_matrix(X)
    p = X.shape[1]
    if max_dirs is None:
        max_dirs = min(p, 5)
    if max_dirs < 1 or max_dirs > p:
        raise DomainError(f"max_dirs must satisfy 1 <= max_dirs <= p={p}, got {max_dirs}")
    E = X - X.mean(axis=0)
    total = np.sum(E**2)
    if total == 0:
        return []
    composer = np.eye(p)
    out: list[np.ndarray] = []
    while len(out) < max_dirs:
        if np.sum(E**2) / total <= var_tol:
            break
        try:
            b = fit_psir(E, y, H=H, alpha=alpha).beta
            d = numlin.canonical_direction(composer @ b)
        except DegenerateError:
            break
        out.append(d)
        deflate = np.eye(p) - np.outer(b, b)
        E = E @ deflate
        composer = composer @ deflate
    return out
