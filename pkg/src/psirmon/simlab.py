"""Monte Carlo fault-detection experiments.

Each cell of an experiment pairs one fault direction with one repetition: a
fresh in-control training set is drawn, every method's monitor is fitted on
it, and a fresh batch of in-control samples is shifted by ``f * xi`` for each
fault magnitude ``f``. The cell records, per method and magnitude, the
percentage of shifted samples whose combined index exceeds its limit.

Randomness is keyed on ``(seed, direction index)`` for directions and
``(seed, direction index, rep index)`` for cells, so results do not depend on
execution order or on the number of worker processes.
"""

from __future__ import annotations

import io
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.special import expit

from . import numlin
from .errors import DegenerateSignalError, DomainError, PsirmonError, ShapeError
from .monitor import METHODS, build_monitor, statistics

log = logging.getLogger(__name__)

DEFAULT_FAULTS = (0.0, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0)
DIRECTION_SCHEMES = ("sphere", "orthant")
MODEL_KINDS = ("linear", "nonlinear")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full Monte Carlo specification. Defaults are the published settings."""

    p: int = 10
    rho: float = 0.5
    n_train: int = 500
    n_faulty: int = 100
    fault_magnitudes: tuple[float, ...] = DEFAULT_FAULTS
    n_directions: int = 100
    n_reps: int = 10
    model_kind: str = "linear"
    noise_fraction: float = 0.05
    H: int = 10
    alpha_threshold: float = 1.5
    alpha_sig: float = 0.01
    seed: int = 0
    direction_scheme: str = "orthant"
    methods: tuple[str, ...] = METHODS

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def bad(name, why):
            raise DomainError(f"invalid config field {name!r}: {why}")

        if self.p < 1:
            bad("p", "must be >= 1")
        lower = -1.0 / (self.p - 1) if self.p > 1 else -np.inf
        if not (lower < self.rho < 1):
            bad("rho", f"must lie in ({lower:.6g}, 1) for a positive definite covariance")
        if self.n_train < max(self.H, 3):
            bad("n_train", f"must be at least max(H, 3)={max(self.H, 3)}")
        if self.n_faulty < 1:
            bad("n_faulty", "must be >= 1")
        if not self.fault_magnitudes:
            bad("fault_magnitudes", "must not be empty")
        if self.n_directions < 1:
            bad("n_directions", "must be >= 1")
        if self.n_reps < 1:
            bad("n_reps", "must be >= 1")
        if self.model_kind not in MODEL_KINDS:
            bad("model_kind", f"must be one of {MODEL_KINDS}")
        if not self.noise_fraction > 0:
            bad("noise_fraction", "must be > 0")
        if self.H < 2:
            bad("H", "must be >= 2")
        if not self.alpha_threshold > 1:
            bad("alpha_threshold", "must be > 1")
        if not (0 < self.alpha_sig < 1):
            bad("alpha_sig", "must lie in (0, 1)")
        if self.direction_scheme not in DIRECTION_SCHEMES:
            bad("direction_scheme", f"must be one of {DIRECTION_SCHEMES}")
        if not self.methods or any(m not in METHODS for m in self.methods):
            bad("methods", f"must be a non-empty subset of {METHODS}")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass
class RateTable:
    """Mean and standard deviation (percent) of detection rates per ``(f, method)``.

    ``rates[method]`` is an ``(n_cells, n_f)`` array of per-cell percentages;
    failed cells are NaN and excluded from the summaries.
    """

    fault_magnitudes: tuple[float, ...]
    methods: tuple[str, ...]
    rates: dict[str, np.ndarray]
    model_kind: str = "linear"
    failures: dict[str, int] = field(default_factory=dict)

    def mean(self, method: str, f: float) -> float:
        return float(np.nanmean(self._column(method, f)))

    def std(self, method: str, f: float) -> float:
        return float(np.nanstd(self._column(method, f)))

    def n_cells(self, method: str, f: float) -> int:
        return int(np.sum(~np.isnan(self._column(method, f))))

    def _column(self, method: str, f: float) -> np.ndarray:
        j = self.fault_magnitudes.index(f)
        return self.rates[method][:, j]

    def rows(self):
        for f in self.fault_magnitudes:
            for m in self.methods:
                yield f, m, self.mean(m, f), self.std(m, f), self.n_cells(m, f)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("f,method,mean_pct,std_pct,n_cells\n")
        for f, m, mean, std, n in self.rows():
            buf.write(f"{f:g},{m},{mean:.6f},{std:.6f},{n}\n")
        return buf.getvalue()

    def format_table(self) -> str:
        """Aligned text: a block of means and a block of standard deviations."""
        head = f"{'f':>5}" + "".join(f"{m.upper():>10}" for m in self.methods)
        out = [f"Model: {self.model_kind}", "Means of the fault detection rates (%)", head]
        for f in self.fault_magnitudes:
            out.append(f"{f:>5g}" + "".join(f"{self.mean(m, f):>10.2f}" for m in self.methods))
        out += ["", "Standard deviations of the fault detection rates (%)", head]
        for f in self.fault_magnitudes:
            out.append(f"{f:>5g}" + "".join(f"{self.std(m, f):>10.2f}" for m in self.methods))
        failed = sum(self.failures.values())
        if failed:
            out.append(f"\n{failed} method-cell fits failed and were skipped")
        return "\n".join(out) + "\n"


# -- generators --------------------------------------------------------------


def equicorrelation_sqrt(p: int, rho: float) -> np.ndarray:
    """Symmetric square root of ``(1 - rho) I + rho 11'``."""
    lower = -1.0 / (p - 1) if p > 1 else -np.inf
    if not (lower < rho < 1):
        raise DomainError(f"rho={rho} does not give a positive definite covariance for p={p}")
    a = np.sqrt(1.0 - rho)
    b = (np.sqrt(1.0 - rho + p * rho) - a) / p
    return a * np.eye(p) + b * np.ones((p, p))


def gen_predictors(n: int, p: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """``n`` rows i.i.d. N(0, Sigma) with unit variances and common correlation ``rho``."""
    root = equicorrelation_sqrt(p, rho)
    return rng.standard_normal((n, p)) @ root


def gen_response(
    X, model_kind: str, noise_fraction: float, rng: np.random.Generator
) -> np.ndarray:
    """Sum-of-coordinates (``linear``) or logistic-of-sum (``nonlinear``) response.

    Gaussian noise is added with standard deviation ``noise_fraction`` times the
    sample standard deviation of the noiseless signal.
    """
    X = numlin.as_data_matrix(X)
    s = X.sum(axis=1)
    if model_kind == "nonlinear":
        s = expit(s)
    elif model_kind != "linear":
        raise DomainError(f"model_kind must be one of {MODEL_KINDS}")
    sd = s.std(ddof=1)
    if not sd > 0:
        raise DegenerateSignalError("signal has zero variance")
    return s + noise_fraction * sd * rng.standard_normal(s.shape[0])


def random_unit_direction(
    p: int, rng: np.random.Generator, scheme: str = "sphere"
) -> np.ndarray:
    """A unit-norm fault direction.

    ``sphere`` is uniform on the unit sphere. ``orthant`` normalizes a vector
    of independent U(0, 1) coordinates, which is the scheme that reproduces
    the published detection-rate tables.
    """
    if p < 1:
        raise DomainError("p must be >= 1")
    if scheme == "sphere":
        v = rng.standard_normal(p)
    elif scheme == "orthant":
        v = rng.random(p)
    else:
        raise DomainError(f"scheme must be one of {DIRECTION_SCHEMES}")
    n = np.linalg.norm(v)
    while n == 0:  # measure-zero event, redraw
        v = rng.standard_normal(p)
        n = np.linalg.norm(v)
    return v / n


def inject_fault(X, xi, f: float) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if X.ndim != 2 or xi.shape != (X.shape[1],):
        raise ShapeError(f"cannot shift data of shape {X.shape} by direction of shape {xi.shape}")
    return X + f * xi


# -- experiment --------------------------------------------------------------


def direction_rng(seed: int, d: int) -> np.random.Generator:
    return np.random.default_rng([seed, 0, d])


def cell_rng(seed: int, d: int, r: int) -> np.random.Generator:
    return np.random.default_rng([seed, 1, d, r])


def run_cell(config: ExperimentConfig, d: int, r: int) -> dict[str, np.ndarray | None]:
    """Detection rates (percent) per method for one (direction, repetition) cell.

    A method whose fit fails maps to ``None``.
    """
    xi = random_unit_direction(config.p, direction_rng(config.seed, d), config.direction_scheme)
    rng = cell_rng(config.seed, d, r)
    X = gen_predictors(config.n_train, config.p, config.rho, rng)
    y = gen_response(X, config.model_kind, config.noise_fraction, rng)
    base = gen_predictors(config.n_faulty, config.p, config.rho, rng)
    out: dict[str, np.ndarray | None] = {}
    for method in config.methods:
        try:
            model = build_monitor(
                X, y, method, config.H, config.alpha_threshold, config.alpha_sig
            )
        except (PsirmonError, np.linalg.LinAlgError) as exc:
            log.warning("cell (%d, %d) %s failed: %s", d, r, method, exc)
            out[method] = None
            continue
        rates = np.empty(len(config.fault_magnitudes))
        for j, f in enumerate(config.fault_magnitudes):
            _, _, phi = statistics(model, inject_fault(base, xi, f))
            rates[j] = 100.0 * np.mean(phi > model.limits.combined)
        out[method] = rates
    return out


def _run_cell_star(args):
    return run_cell(*args)


def run_experiment(config: ExperimentConfig, threads: int = 1) -> RateTable:
    """Run every (direction, repetition) cell and aggregate detection rates.

    ``threads > 1`` distributes cells over a process pool; results are
    identical to the serial run.
    """
    cells = [(d, r) for d in range(config.n_directions) for r in range(config.n_reps)]
    jobs = [(config, d, r) for d, r in cells]
    if threads > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_cell_star, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        results = [_run_cell_star(j) for j in jobs]

    n_f = len(config.fault_magnitudes)
    rates = {m: np.full((len(cells), n_f), np.nan) for m in config.methods}
    failures = {m: 0 for m in config.methods}
    for i, res in enumerate(results):
        for m in config.methods:
            if res[m] is None:
                failures[m] += 1
            else:
                rates[m][i] = res[m]
    if any(failures.values()):
        warnings.warn(f"skipped failed cells: {failures}", RuntimeWarning)
    return RateTable(
        tuple(config.fault_magnitudes), tuple(config.methods), rates, config.model_kind, failures
    )


def config_to_text(config: ExperimentConfig) -> str:
    lines = []
    for k, v in asdict(config).items():
        if isinstance(v, tuple):
            v = ", ".join(f"{x:g}" if isinstance(x, float) else str(x) for x in v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str, **overrides) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment) into a config."""
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise DomainError(f"line {lineno}: expected 'key = value'")
        if key not in types:
            raise DomainError(f"invalid config field {key!r}: unknown key (line {lineno})")
        try:
            values[key] = _coerce(types[key], value)
        except ValueError:
            raise DomainError(
                f"invalid config field {key!r}: cannot parse {value!r} (line {lineno})"
            ) from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def _coerce(type_name: str, value: str):
    if type_name == "int":
        return int(value)
    if type_name == "float":
        return float(value)
    if type_name == "str":
        return value
    if type_name.startswith("tuple[float"):
        return tuple(float(v) for v in value.replace(",", " ").split())
    if type_name.startswith("tuple[str"):
        return tuple(v.strip() for v in value.replace(",", " ").split())
    raise ValueError(type_name)
