"""Fault detection on a single-index X-space decomposition.

A fitted direction ``beta`` (PSIR, SIR or PLS) splits a centered sample into
a score ``t`` along ``beta`` and a residual orthogonal to it. Three statistics
are monitored:

* Hotelling's T^2 on the score, with an F-based control limit;
* SPE, the squared residual norm, with Box's ``g chi^2(h)`` limit (the
  Jackson-Mudholkar normal approximation is available for comparison);
* the combined index ``phi = T^2 / tau2 + SPE / delta`` with a ``g chi^2(h)``
  limit of its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from . import numlin
from .errors import (
    DegenerateApproximationError,
    DegenerateModelError,
    DomainError,
    InsufficientDataError,
    ShapeError,
)
from .pls import pls_closed_form
from .psir import DEFAULT_ALPHA, DEFAULT_H, fit_psir, select_q
from .sir import fit_sir

Method = Literal["psir", "sir", "pls"]
METHODS: tuple[str, ...] = ("pls", "sir", "psir")
DEFAULT_ALPHA_SIG = 0.01


@dataclass(frozen=True)
class Limits:
    t2: float
    spe: float
    combined: float


@dataclass(frozen=True)
class MonitorModel:
    method: str
    beta: np.ndarray
    x_mean: np.ndarray
    lam: float
    thetas: tuple[float, float, float]
    n_train: int
    alpha_sig: float
    limits: Limits
    r: int = 1
    q: int | None = None
    H: int | None = None
    alpha_threshold: float | None = None
    sigma_spe: np.ndarray | None = None
    columns: tuple[str, ...] | None = None
    spe_limit_jm: float | None = field(default=None)

    @property
    def p(self) -> int:
        return self.beta.shape[0]

    @property
    def projector(self) -> np.ndarray:
        b = self.beta
        return np.outer(b, b) / (b @ b)


@dataclass(frozen=True)
class DetectionReport:
    t2: float
    spe: float
    phi: float
    t2_alarm: bool
    spe_alarm: bool
    phi_alarm: bool
    limits: Limits


# -- control limits ------------------------------------------------------------


def t2_limit(n: int, r: int, alpha_sig: float) -> float:
    """T^2 upper control limit ``r (n^2 - 1) / (n (n - r)) * F_{r, n-r}(1 - alpha)``."""
    if not (n > r >= 1):
        raise DomainError(f"need n > r >= 1, got n={n}, r={r}")
    f = numlin.upper_quantile("f", alpha_sig, r, n - r)
    return r * (n * n - 1) / (n * (n - r)) * f


def spe_limit_box(theta1: float, theta2: float, alpha_sig: float) -> float:
    """Box's ``g chi^2_alpha(h)`` limit with ``g = theta2/theta1``, ``h = theta1^2/theta2``."""
    if not (theta1 > 0 and theta2 > 0):
        raise DomainError("theta1 and theta2 must be positive")
    g, h = theta2 / theta1, theta1**2 / theta2
    return g * numlin.upper_quantile("chi_square", alpha_sig, h)


def spe_limit_jm(theta1: float, theta2: float, theta3: float, alpha_sig: float) -> float:
    """Jackson-Mudholkar normal-approximation SPE limit."""
    if not (theta1 > 0 and theta2 > 0 and theta3 > 0):
        raise DomainError("theta1, theta2 and theta3 must be positive")
    h0 = 1.0 - 2.0 * theta1 * theta3 / (3.0 * theta2**2)
    if abs(h0) < 1e-12:
        raise DegenerateApproximationError("h0 = 1 - 2 theta1 theta3 / (3 theta2^2) vanishes")
    z = numlin.upper_quantile("normal", alpha_sig)
    base = (
        1.0
        + theta2 * h0 * (h0 - 1.0) / theta1**2
        + z * math.sqrt(2.0 * theta2 * h0**2) / theta1
    )
    if base <= 0:
        raise DegenerateApproximationError("normal approximation base is not positive")
    return theta1 * base ** (1.0 / h0)


def combined_limit(
    t2_lim: float, spe_lim: float, theta1: float, theta2: float, alpha_sig: float
) -> float:
    """``g_phi chi^2_alpha(h_phi)`` limit of ``phi = T^2/t2_lim + SPE/spe_lim``.

    The T^2 term contributes one unit-variance score (``r = 1``).
    """
    if not (t2_lim > 0 and spe_lim > 0 and theta1 > 0 and theta2 > 0):
        raise DomainError("limits and thetas must be positive")
    first = 1.0 / t2_lim + theta1 / spe_lim
    second = 1.0 / t2_lim**2 + theta2 / spe_lim**2
    g, h = second / first, first**2 / second
    return g * numlin.upper_quantile("chi_square", alpha_sig, h)


# -- fitting -----------------------------------------------------------------


def fit_direction(
    X,
    y,
    method: Method = "psir",
    H: int = DEFAULT_H,
    alpha_threshold: float = DEFAULT_ALPHA,
) -> tuple[np.ndarray, int | None]:
    """Unit-norm loading direction for ``method`` and the Krylov order used (if any)."""
    if method == "psir":
        m = fit_psir(X, y, H=H, alpha=alpha_threshold)
        return m.beta, m.q
    if method == "sir":
        return fit_sir(X, y, H=H, K=1).beta, None
    if method == "pls":
        _, cov = numlin.sample_mean_cov(X)
        s_xy = numlin.sample_cross_cov(X, y)
        if not np.any(s_xy):
            raise DegenerateModelError("zero cross-covariance between X and y")
        q = select_q(cov, s_xy, alpha_threshold)
        d = pls_closed_form(cov, s_xy, q)
        return numlin.canonical_direction(d.beta), q
    raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")


def build_monitor(
    X,
    y,
    method: Method = "psir",
    H: int = DEFAULT_H,
    alpha_threshold: float = DEFAULT_ALPHA,
    alpha_sig: float = DEFAULT_ALPHA_SIG,
    columns: tuple[str, ...] | None = None,
) -> MonitorModel:
    X = numlin.as_data_matrix(X)
    beta, q = fit_direction(X, y, method, H, alpha_threshold)
    return monitor_from_direction(
        X, beta, alpha_sig, method=method, q=q, H=H,
        alpha_threshold=alpha_threshold, columns=columns,
    )


def monitor_from_direction(
    X,
    beta,
    alpha_sig: float = DEFAULT_ALPHA_SIG,
    method: str = "custom",
    **meta,
) -> MonitorModel:
    """Build the score/residual statistics and limits for a given direction."""
    X = numlin.as_data_matrix(X)
    n, p = X.shape
    if n < 2:
        raise InsufficientDataError("need at least 2 training rows")
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.shape[0] != p:
        raise ShapeError(f"beta has length {beta.shape[0]}, data has p={p}")
    bb = beta @ beta
    if not np.isfinite(bb) or bb == 0:
        raise DegenerateModelError("loading direction is zero")
    x_mean, cov = numlin.sample_mean_cov(X)
    t = (X - x_mean) @ beta / bb
    lam = float(t @ t / (n - 1))
    if lam <= 0:
        raise DegenerateModelError("score variance is zero")
    resid = np.eye(p) - np.outer(beta, beta) / bb
    sigma_spe = resid @ cov @ resid.T
    sigma_spe = 0.5 * (sigma_spe + sigma_spe.T)
    ev = np.clip(np.linalg.eigvalsh(sigma_spe), 0.0, None)
    thetas = (float(ev.sum()), float((ev**2).sum()), float((ev**3).sum()))
    limits = compute_limits(n, thetas, alpha_sig)
    try:
        jm = spe_limit_jm(*thetas, alpha_sig)
    except (DomainError, DegenerateApproximationError):
        jm = None
    return MonitorModel(
        method=method,
        beta=beta,
        x_mean=x_mean,
        lam=lam,
        thetas=thetas,
        n_train=n,
        alpha_sig=alpha_sig,
        limits=limits,
        sigma_spe=sigma_spe,
        spe_limit_jm=jm,
        **meta,
    )


def compute_limits(n: int, thetas, alpha_sig: float, r: int = 1) -> Limits:
    theta1, theta2 = thetas[0], thetas[1]
    tau2 = t2_limit(n, r, alpha_sig)
    delta = spe_limit_box(theta1, theta2, alpha_sig)
    zeta2 = combined_limit(tau2, delta, theta1, theta2, alpha_sig)
    return Limits(tau2, delta, zeta2)


# -- scoring -----------------------------------------------------------------


def _centered(model: MonitorModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.p or x.ndim > 2:
        raise ShapeError(f"expected samples with {model.p} coordinates, got shape {x.shape}")
    return x - model.x_mean


def x_decompose(model: MonitorModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Score ``t`` and residual ``e`` with ``beta t + e = x - x_mean``.

    Accepts one sample (returns a scalar-shaped ``t``) or a batch of rows.
    """
    xc = _centered(model, x)
    b = model.beta
    t = xc @ b / (b @ b)
    e = xc - np.multiply.outer(t, b)
    return t, e


def t_squared(model: MonitorModel, x):
    t, _ = x_decompose(model, x)
    return t**2 / model.lam


def spe(model: MonitorModel, x):
    _, e = x_decompose(model, x)
    return np.sum(e**2, axis=-1)


def combined_index(model: MonitorModel, x):
    return normalized_phi(model, t_squared(model, x), spe(model, x))


def normalized_phi(model: MonitorModel, t2, spe_):
    return t2 / model.limits.t2 + spe_ / model.limits.spe


def statistics(model: MonitorModel, X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(T^2, SPE, phi)`` arrays for every row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    t, e = x_decompose(model, X)
    t2 = t**2 / model.lam
    s = np.sum(e**2, axis=1)
    return t2, s, normalized_phi(model, t2, s)


def detect(model: MonitorModel, x) -> DetectionReport:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeError("detect takes a single sample; use statistics() for batches")
    t2, s, phi = (float(v[0]) for v in statistics(model, x[None, :]))
    lim = model.limits
    return DetectionReport(t2, s, phi, t2 > lim.t2, s > lim.spe, phi > lim.combined, lim)


# -- persistence -------------------------------------------------------------

FORMAT_TAG = "psirmon-monitor/1"


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dumps(model: MonitorModel) -> str:
    """Serialize to ``key = value`` lines; reals carry 17 significant digits."""
    lines = [
        f"format = {FORMAT_TAG}",
        f"method = {model.method}",
        f"p = {model.p}",
        f"n_train = {model.n_train}",
        f"r = {model.r}",
        f"alpha_sig = {_fmt(model.alpha_sig)}",
        "beta = " + " ".join(_fmt(v) for v in model.beta),
        "x_mean = " + " ".join(_fmt(v) for v in model.x_mean),
        f"lambda = {_fmt(model.lam)}",
        f"theta1 = {_fmt(model.thetas[0])}",
        f"theta2 = {_fmt(model.thetas[1])}",
        f"theta3 = {_fmt(model.thetas[2])}",
        f"t2_limit = {_fmt(model.limits.t2)}",
        f"spe_limit = {_fmt(model.limits.spe)}",
        f"combined_limit = {_fmt(model.limits.combined)}",
    ]
    if model.q is not None:
        lines.append(f"q = {model.q}")
    if model.H is not None:
        lines.append(f"H = {model.H}")
    if model.alpha_threshold is not None:
        lines.append(f"alpha_threshold = {_fmt(model.alpha_threshold)}")
    if model.spe_limit_jm is not None:
        lines.append(f"spe_limit_jm = {_fmt(model.spe_limit_jm)}")
    if model.columns is not None:
        lines.append("columns = " + ",".join(model.columns))
    return "\n".join(lines) + "\n"


def loads(text: str) -> MonitorModel:
    kv: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DomainError(f"line {lineno}: expected 'key = value'")
        kv[key.strip()] = value.strip()
    if kv.get("format") != FORMAT_TAG:
        raise DomainError(f"not a {FORMAT_TAG} document")
    try:
        vec = lambda k: np.array([float(v) for v in kv[k].split()])  # noqa: E731
        opt = lambda k, f: f(kv[k]) if k in kv else None  # noqa: E731
        model = MonitorModel(
            method=kv["method"],
            beta=vec("beta"),
            x_mean=vec("x_mean"),
            lam=float(kv["lambda"]),
            thetas=(float(kv["theta1"]), float(kv["theta2"]), float(kv["theta3"])),
            n_train=int(kv["n_train"]),
            alpha_sig=float(kv["alpha_sig"]),
            limits=Limits(
                float(kv["t2_limit"]), float(kv["spe_limit"]), float(kv["combined_limit"])
            ),
            r=int(kv["r"]),
            q=opt("q", int),
            H=opt("H", int),
            alpha_threshold=opt("alpha_threshold", float),
            spe_limit_jm=opt("spe_limit_jm", float),
            columns=opt("columns", lambda s: tuple(s.split(","))),
        )
    except KeyError as exc:
        raise DomainError(f"model document is missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise DomainError(f"malformed model document: {exc}") from None
    if model.beta.shape != model.x_mean.shape or model.beta.shape[0] != int(kv["p"]):
        raise DomainError("beta, x_mean and p disagree in the model document")
    return model


def save_model(model: MonitorModel, path) -> None:
    Path(path).write_text(dumps(model))


def load_model(path) -> MonitorModel:
    return loads(Path(path).read_text())
