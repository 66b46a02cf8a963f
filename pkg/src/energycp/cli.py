"""Command-line interface: ``energycp detect | simulate | eval``.

Exit codes: 0 on success, 1 for data or domain errors, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import List, Optional

import numpy as np

from .divisive import THREADS_ENV, DivisiveConfig, default_threads
from .energy import DEFAULT_MIN_SIZE
from .errors import InvalidInputError
from .evaluation import adjusted_rand, rand_index
from .ingest import ingest_csv
from .partition import Partition
from .results import ResultDocument, detect
from .simlab import KINDS, make_scenario, reports_to_csv, reports_to_json, run_study


class UsageError(Exception):
    pass


def _threads_arg(p):
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="energycp",
        description="Nonparametric multiple change-point detection with energy statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="estimate change points in a CSV series")
    d.add_argument("--input", required=True, help="CSV file, one observation per row")
    d.add_argument("--method", choices=("divisive", "agglo"), default="divisive")
    d.add_argument("--alpha", type=float, default=1.0)
    d.add_argument("--min-size", type=int, default=None,
                   help=f"minimum cluster size (default {DEFAULT_MIN_SIZE})")
    d.add_argument("--perms", type=int, default=None, help="permutations R (default 499)")
    d.add_argument("--sig", type=float, default=None, help="significance level (default 0.05)")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--max-cp", type=int, default=None, help="cap on accepted change points")
    d.add_argument("--init-width", type=int, default=None,
                   help="agglo: width of the initial equal-width clusters (default: --min-size)")
    d.add_argument("--header", action="store_true", help="first row holds column names")
    d.add_argument("--delimiter", default=",")
    d.add_argument("--columns", default=None,
                   help="comma-separated header names or 1-based column numbers")
    d.add_argument("--impute", action="store_true",
                   help="fill missing cells with the mean of their neighbours")
    d.add_argument("--output", default=None, help="write the JSON result here (default stdout)")
    d.add_argument("--emit-plot-data", metavar="DIR", default=None,
                   help="write per-segment summary tables to DIR")
    d.add_argument("--no-timing", action="store_true",
                   help="omit wall-clock duration so output depends only on the inputs")
    _threads_arg(d)

    s = sub.add_parser("simulate", help="Monte Carlo study on a simulated scenario")
    s.add_argument("--scenario", required=True, choices=KINDS)
    s.add_argument("--param", type=float, default=None,
                   help="change size (mean, variance, df or correlation)")
    s.add_argument("--T", type=int, required=True)
    s.add_argument("--reps", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dim", type=int, default=2, help="dim-correlation: dimension")
    s.add_argument("--noise", action="store_true",
                   help="dim-correlation: only the first two coordinates change")
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--min-size", type=int, default=DEFAULT_MIN_SIZE)
    s.add_argument("--perms", type=int, default=199)
    s.add_argument("--sig", type=float, default=0.05)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--output", default=None)
    _threads_arg(s)

    e = sub.add_parser("eval", help="compare two sets of change points")
    e.add_argument("--truth", required=True,
                   help="change points: comma list, JSON list, or a result JSON file")
    e.add_argument("--estimate", required=True, help="same forms as --truth")
    e.add_argument("--T", type=int, default=None,
                   help="series length (optional when both sides are result files)")
    e.add_argument("--json", action="store_true", help="print a JSON object")
    return parser


def _parse_points(text: str):
    """Return (change points, T or None) from a list literal or result file."""
    if os.path.isfile(text):
        with open(text) as fh:
            doc = ResultDocument.from_json(fh.read())
        return list(doc.change_points), doc.T
    t = text.strip()
    if t.startswith("["):
        try:
            pts = json.loads(t)
        except json.JSONDecodeError as exc:
            raise UsageError(f"cannot parse {text!r}: {exc}")
    else:
        pts = [p for p in t.split(",") if p.strip()]
    try:
        return [int(p) for p in pts], None
    except (TypeError, ValueError):
        raise UsageError(f"change points must be integers, got {text!r}")


def _write(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def emit_plot_data(directory: str, X: np.ndarray, doc: ResultDocument) -> None:
    """Write ``segments.csv`` (and ``gof.csv`` for agglo) for external plotting."""
    os.makedirs(directory, exist_ok=True)
    d = X.shape[1]
    head = ["segment", "start", "end", "length"]
    head += [f"mean_{j + 1}" for j in range(d)] + [f"var_{j + 1}" for j in range(d)]
    with open(os.path.join(directory, "segments.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(head)
        for i, (a, b) in enumerate(doc.partition.segments(), start=1):
            seg = X[a - 1:b]
            var = seg.var(axis=0, ddof=1) if seg.shape[0] > 1 else np.zeros(d)
            w.writerow([i, a, b, b - a + 1]
                       + [f"{v:.12g}" for v in seg.mean(axis=0)]
                       + [f"{v:.12g}" for v in var])
    if doc.gof is not None:
        n = len(doc.gof) + 1
        with open(os.path.join(directory, "gof.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["clusters", "gof"])
            for i, g in enumerate(doc.gof):
                w.writerow([n - i, f"{g:.12g}"])


def cmd_detect(args) -> int:
    if args.method == "divisive" and args.init_width is not None:
        raise UsageError("--init-width applies only to --method agglo")
    if args.method == "agglo":
        given = [f for f, v in (("--perms", args.perms), ("--sig", args.sig),
                                ("--max-cp", args.max_cp)) if v is not None]
        if given:
            raise UsageError(f"{', '.join(given)} apply only to --method divisive")
    columns = args.columns.split(",") if args.columns else None
    X = ingest_csv(args.input, header=args.header, delimiter=args.delimiter,
                   columns=columns, impute=args.impute)
    min_size = DEFAULT_MIN_SIZE if args.min_size is None else args.min_size
    if args.method == "divisive":
        cfg = DivisiveConfig(
            alpha=args.alpha,
            min_size=min_size,
            num_permutations=499 if args.perms is None else args.perms,
            sig_level=0.05 if args.sig is None else args.sig,
            max_change_points=args.max_cp,
            seed=args.seed,
        )
        doc = detect(X, "divisive", cfg=cfg, threads=args.threads, timing=not args.no_timing)
    else:
        width = min_size if args.init_width is None else args.init_width
        doc = detect(X, "agglo", init=width, alpha=args.alpha, timing=not args.no_timing)
    _write(doc.to_json(), args.output)
    if args.emit_plot_data:
        emit_plot_data(args.emit_plot_data, X, doc)
    return 0


def cmd_simulate(args) -> int:
    scn = make_scenario(args.scenario, args.param, args.T, args.seed, args.dim, args.noise)
    cfg = DivisiveConfig(alpha=args.alpha, min_size=args.min_size,
                         num_permutations=args.perms, sig_level=args.sig)
    report = run_study(scn, args.reps, cfg, threads=args.threads)
    text = reports_to_csv([report]) if args.format == "csv" else reports_to_json([report])
    _write(text, args.output)
    return 0


def cmd_eval(args) -> int:
    truth, t1 = _parse_points(args.truth)
    est, t2 = _parse_points(args.estimate)
    lengths = {t for t in (args.T, t1, t2) if t is not None}
    if not lengths:
        raise UsageError("--T is required unless both sides are result files")
    if len(lengths) > 1:
        raise UsageError(f"inconsistent series lengths: {sorted(lengths)}")
    T = lengths.pop()
    u = Partition(tuple(truth), T)
    v = Partition(tuple(est), T)
    ri, ari = rand_index(u, v), adjusted_rand(u, v)
    if args.json:
        print(json.dumps({"rand_index": ri, "adjusted_rand": ari}))
    else:
        print(f"rand_index\t{ri:.12g}")
        print(f"adjusted_rand\t{ari:.12g}")
    return 0


COMMANDS = {"detect": cmd_detect, "simulate": cmd_simulate, "eval": cmd_eval}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "threads", None) is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (InvalidInputError, OSError) as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
