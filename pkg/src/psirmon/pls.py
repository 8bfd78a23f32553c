"""Partial least squares: NIPALS with X-deflation and the Krylov closed form."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import numlin
from .errors import DegenerateInputError, DomainError, ShapeError

NIPALS_TOL = 1e-10
NIPALS_MAX_ITER = 500


@dataclass(frozen=True)
class PlsModel:
    """Fitted NIPALS model.

    ``T = Xc @ R`` holds for the centered training predictors ``Xc`` and
    ``Xc = T @ P.T + E``.
    """

    W: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    T: np.ndarray
    R: np.ndarray
    E: np.ndarray
    A: int
    x_mean: np.ndarray
    y_mean: np.ndarray
    converged: tuple[bool, ...]
    n_iter: tuple[int, ...]

    @property
    def oblique_projector(self) -> np.ndarray:
        return self.P @ self.R.T


@dataclass(frozen=True)
class PlsDirection:
    beta: np.ndarray
    q_used: int
    krylov: np.ndarray
    degenerate: bool = False


def fit_nipals(
    X,
    Y,
    A: int = 1,
    tol: float = NIPALS_TOL,
    max_iter: int = NIPALS_MAX_ITER,
) -> PlsModel:
    """NIPALS PLS with deflation of ``X`` only.

    ``Y`` may be a vector or an ``(n, m)`` matrix. Components whose inner
    loop hits ``max_iter`` are flagged in ``converged`` rather than raising.
    """
    X = numlin.as_data_matrix(X)
    n, p = X.shape
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    Y = numlin.as_data_matrix(Y, name="Y")
    if Y.shape[0] != n:
        raise ShapeError(f"X has {n} rows, Y has {Y.shape[0]}")
    if A < 1 or A > min(n - 1, p):
        raise DomainError(f"A must satisfy 1 <= A <= min(n-1, p), got {A}")

    x_mean, y_mean = X.mean(axis=0), Y.mean(axis=0)
    Xk = X - x_mean
    Yc = Y - y_mean
    x_scale = np.abs(Xk).max()
    if x_scale == 0:
        raise DegenerateInputError("X has zero variance")
    if np.abs(Yc).max() == 0:
        raise DegenerateInputError("Y has zero variance")

    m = Y.shape[1]
    W, P, T = np.zeros((p, A)), np.zeros((p, A)), np.zeros((n, A))
    Q = np.zeros((m, A))
    converged, n_iter = [], []
    for a in range(A):
        if np.linalg.norm(Xk) <= 1e-12 * x_scale * np.sqrt(n * p):
            raise DomainError(f"A={A} exceeds the numerical rank of centered X")
        u = Yc[:, np.argmax(Yc.var(axis=0))].copy()
        t_old = None
        ok = False
        for it in range(1, max_iter + 1):
            w = Xk.T @ u
            w_norm = np.linalg.norm(w)
            if w_norm == 0:
                raise DegenerateInputError("X residual is orthogonal to the response")
            w /= w_norm
            t = Xk @ w
            q = Yc.T @ t / (t @ t)
            u = Yc @ q / (q @ q)
            if t_old is not None and np.linalg.norm(t - t_old) <= tol * np.linalg.norm(t):
                ok = True
                break
            if m == 1 and t_old is None:
                # with one response, u is proportional to Yc and w is fixed after one pass
                ok = True
                break
            t_old = t
        p_load = Xk.T @ t / (t @ t)
        Xk = Xk - np.outer(t, p_load)
        W[:, a], P[:, a], T[:, a], Q[:, a] = w, p_load, t, Yc.T @ t / (t @ t)
        converged.append(ok)
        n_iter.append(it)

    R = W @ np.linalg.inv(P.T @ W)
    return PlsModel(
        W, P, Q, T, R, Xk, A, x_mean, y_mean.ravel(), tuple(converged), tuple(n_iter)
    )


def pls_x_decompose(model: PlsModel, x, center: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Oblique split ``x = P R' x + (I - P R') x``.

    ``x`` may be one sample or a batch of rows. It is expected to be
    centered already unless ``center=True``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.P.shape[0]:
        raise ShapeError(f"x has {x.shape[-1]} coordinates, model has {model.P.shape[0]}")
    if center:
        x = x - model.x_mean
    x_hat = (x @ model.R) @ model.P.T
    return x_hat, x - x_hat


def pls_closed_form(cov_x, cov_xy, q: int) -> PlsDirection:
    """Single-response PLS coefficient ``R_q (R_q' S R_q)^- R_q' s_xy``.

    ``R_q`` is the Krylov matrix ``(s_xy, S s_xy, ..., S^{q-1} s_xy)``. A zero
    cross-covariance gives a zero coefficient and sets ``degenerate``.
    """
    cov_x = numlin.check_symmetric(cov_x, "cov_x")
    cov_xy = np.asarray(cov_xy, dtype=float).ravel()
    p = cov_x.shape[0]
    if cov_xy.shape[0] != p:
        raise ShapeError(f"cov_xy has length {cov_xy.shape[0]}, expected {p}")
    if q < 1 or q > p:
        raise DomainError(f"q must satisfy 1 <= q <= p={p}, got {q}")
    if not np.any(cov_xy):
        warnings.warn("zero cross-covariance: PLS direction is zero", RuntimeWarning)
        return PlsDirection(np.zeros(p), q, np.zeros((p, q)), degenerate=True)
    U, scales = numlin.krylov_columns(cov_x, cov_xy, q)
    beta = numlin.subspace_solve(cov_x, numlin.krylov_orthobasis(cov_x, cov_xy, q), cov_xy)
    return PlsDirection(beta, q, U * scales, degenerate=False)

