"""Command-line front end.

Subcommands::

    psirmon fit DATA.csv --response y --method psir --out model.txt
    psirmon detect model.txt NEW.csv --out report.csv
    psirmon limits --n 500 --theta1 4.5 --theta2 2.25 --theta3 1.125 --alpha-sig 0.01
    psirmon simulate configs/desk_linear.cfg --out table.csv

Exit codes: 0 success / no alarm, 1 alarms present (``detect``),
2 usage or parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import secrets
import sys
from pathlib import Path

import numpy as np

from . import monitor, simlab
from .errors import DegenerateError, DomainError, PsirmonError

EXIT_OK, EXIT_ALARM, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header names and a float matrix; errors name the offending line and column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return [], np.empty((0, 0))
        header = [h.strip() for h in header]
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise UsageError(
                    f"{path}: line {reader.line_num}: expected {len(header)} fields, got {len(row)}"
                )
            vals = []
            for name, cell in zip(header, row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise UsageError(
                        f"{path}: line {reader.line_num}, column {name!r}: "
                        f"non-numeric value {cell!r}"
                    ) from None
            rows.append(vals)
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, data


def _fmt(v: float) -> str:
    return format(v, ".10g")


def cmd_fit(args) -> int:
    header, data = read_csv(args.data)
    if args.response not in header:
        raise UsageError(f"response column {args.response!r} not found in {args.data}")
    j = header.index(args.response)
    columns = tuple(h for i, h in enumerate(header) if i != j)
    X = np.delete(data, j, axis=1)
    y = data[:, j]
    model = monitor.build_monitor(
        X, y, args.method, args.slices, args.alpha_threshold, args.alpha_sig, columns=columns
    )
    monitor.save_model(model, args.out)
    print(f"method: {model.method}")
    print("direction: " + " ".join(_fmt(v) for v in model.beta))
    print(f"q: {model.q if model.q is not None else '-'}")
    print("thetas: " + " ".join(_fmt(v) for v in model.thetas))
    print(f"t2_limit: {_fmt(model.limits.t2)}")
    print(f"spe_limit: {_fmt(model.limits.spe)}")
    print(f"combined_limit: {_fmt(model.limits.combined)}")
    return EXIT_OK


def cmd_detect(args) -> int:
    try:
        model = monitor.load_model(args.model)
    except DomainError as exc:
        raise UsageError(f"{args.model}: {exc}") from None
    header, data = read_csv(args.data)
    if data.shape[0] == 0:
        X = np.empty((0, model.p))
    elif model.columns is not None and set(model.columns) <= set(header):
        X = data[:, [header.index(c) for c in model.columns]]
    elif data.shape[1] == model.p:
        X = data
    else:
        raise UsageError(
            f"{args.data} has {data.shape[1]} columns; model expects {model.p}"
            + (f" named {','.join(model.columns)}" if model.columns else "")
        )
    if X.shape[0]:
        t2, spe, phi = monitor.statistics(model, X)
    else:
        t2 = spe = phi = np.empty(0)
    lim = model.limits
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["row", "t2", "spe", "phi", "t2_alarm", "spe_alarm", "phi_alarm"])
        for i in range(X.shape[0]):
            w.writerow([
                i, repr(float(t2[i])), repr(float(spe[i])), repr(float(phi[i])),
                int(t2[i] > lim.t2), int(spe[i] > lim.spe), int(phi[i] > lim.combined),
            ])
    finally:
        if out is not sys.stdout:
            out.close()
    n_alarm = int(np.sum(phi > lim.combined))
    print(f"{n_alarm} of {X.shape[0]} rows exceed the combined limit", file=sys.stderr)
    return EXIT_ALARM if n_alarm else EXIT_OK


def cmd_limits(args) -> int:
    tau2 = monitor.t2_limit(args.n, args.r, args.alpha_sig)
    box = monitor.spe_limit_box(args.theta1, args.theta2, args.alpha_sig)
    print(f"t2_limit: {_fmt(tau2)}")
    print(f"spe_limit_box: {_fmt(box)}")
    if args.theta3 is not None:
        print(f"spe_limit_jm: {_fmt(monitor.spe_limit_jm(args.theta1, args.theta2, args.theta3, args.alpha_sig))}")
    print(f"combined_limit: {_fmt(monitor.combined_limit(tau2, box, args.theta1, args.theta2, args.alpha_sig))}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    has_seed = args.seed is not None or any(
        line.split("#", 1)[0].split("=", 1)[0].strip() == "seed" for line in text.splitlines()
    )
    seed = args.seed
    if not has_seed:
        seed = secrets.randbits(32)
        print(f"seed: {seed}", file=sys.stderr)
    try:
        config = simlab.config_from_text(text, seed=seed)
    except (DomainError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    table = simlab.run_experiment(config, threads=args.threads)
    rendered = table.to_csv() if args.format == "csv" else table.format_table()
    if args.out:
        Path(args.out).write_text(rendered)
    if args.format == "csv" and args.out:
        print(table.format_table(), end="")
    else:
        print(rendered, end="")
    return EXIT_OK


def _default_threads() -> int:
    import os

    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="psirmon", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def prob(s):
        v = float(s)
        if not 0 < v < 1:
            raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {s}")
        return v

    fit = sub.add_parser("fit", help="fit a monitor from a CSV file")
    fit.add_argument("data")
    fit.add_argument("--response", required=True, help="name of the response column")
    fit.add_argument("--method", choices=monitor.METHODS, default="psir")
    fit.add_argument("--slices", "-H", type=int, default=10, dest="slices")
    fit.add_argument("--alpha-threshold", type=float, default=1.5)
    fit.add_argument("--alpha-sig", type=prob, default=monitor.DEFAULT_ALPHA_SIG)
    fit.add_argument("--out", "-o", required=True, help="model file to write")
    fit.set_defaults(func=cmd_fit)

    det = sub.add_parser("detect", help="score rows of a CSV file against a model")
    det.add_argument("model")
    det.add_argument("data")
    det.add_argument("--out", "-o", help="report CSV (default: stdout)")
    det.set_defaults(func=cmd_detect)

    lim = sub.add_parser("limits", help="print control limits")
    lim.add_argument("--n", type=int, required=True)
    lim.add_argument("--r", type=int, default=1)
    lim.add_argument("--theta1", type=float, required=True)
    lim.add_argument("--theta2", type=float, required=True)
    lim.add_argument("--theta3", type=float)
    lim.add_argument("--alpha-sig", type=float, default=monitor.DEFAULT_ALPHA_SIG)
    lim.set_defaults(func=cmd_limits)

    sim = sub.add_parser("simulate", help="run a Monte Carlo fault-detection experiment")
    sim.add_argument("config", help="key = value config file")
    sim.add_argument("--out", "-o", help="write the rate table here")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--threads", type=int, default=_default_threads())
    sim.add_argument("--format", choices=("csv", "table"), default="csv")
    sim.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateError, PsirmonError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
