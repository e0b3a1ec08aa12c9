"""Command line entry point.

Subcommands: simulate, segment, extract-features, decode, evaluate, ppplot.
All outputs are CSV/JSON with stable formatting (12 significant digits), so a
rerun with identical inputs and seed writes byte-identical files. Passing
--plot additionally renders a PNG figure next to each delimited output.

A config file of KEY=VALUE lines may supply any long option of the invoked
subcommand; explicit flags win over the file, the file wins over defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import evaluation, plots
from .ballgen import BallSet, extract_features
from .errors import (
    DegenerateInputError,
    ParameterError,
    ParseError,
    RegimeSegError,
    SizeError,
    ValidationError,
)
from .excursion import recurrence_times, tail_encode
from .hfs import HfsResult, _clamped_rate, hfs_search, pp_plot_data
from .simgen import ScenarioSpec, simulate
from .timeseries import (
    FLOAT_FMT,
    MultiSeries,
    Permutation,
    block_permute,
    embed_lags,
    load_csv,
    save_csv,
    standardize,
)
from .weighting import METHODS, DecodeConfig, decode

USAGE_ERRORS = (ParameterError, SizeError, FileNotFoundError)
DATA_ERRORS = (ParseError, ValidationError, DegenerateInputError)


def _png(path) -> Path:
    return Path(path).with_suffix(".png")


def _write_labels(path, times, labels) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("time", "label"))
        int_time = np.issubdtype(np.asarray(times).dtype, np.integer)
        for t, lab in zip(times, labels):
            writer.writerow((int(t) if int_time else str(t), int(lab)))


def _write_matrix(path, matrix, header) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(header)
        for row in np.atleast_2d(matrix):
            writer.writerow([FLOAT_FMT % v for v in row])


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_label_csv(path) -> tuple[np.ndarray, np.ndarray]:
    times, labels = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if lineno == 1 and not row[-1].strip().lstrip("-").isdigit():
                continue
            try:
                times.append(row[0])
                labels.append(int(row[-1]))
            except ValueError as exc:
                raise ParseError(f"{path} line {lineno}: {exc}") from None
    return np.asarray(times), np.asarray(labels, dtype=np.int64)


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    if (args.case is None) == (args.ar is None):
        raise ParameterError("choose exactly one of --case or --ar")
    if args.case is not None:
        spec = ScenarioSpec(
            kind="gaussian", case=args.case, n_periods=args.periods,
            period_range=(args.period_min, args.period_max),
        )
    else:
        spec = ScenarioSpec(
            kind="ar", ar_order=args.ar, n_periods=args.periods,
            period_range=(args.period_min, args.period_max),
        )
    sim = simulate(spec, args.seed)
    save_csv(sim.series, args.out)
    _write_labels(args.truth, sim.series.time_index, sim.truth)
    if args.plot:
        plots.plot_series(
            sim.series.values, _png(args.out), truth=sim.truth,
            title=f"{spec.label()} seed={args.seed}",
        )
    print(f"wrote {sim.series.n_points} x {sim.series.n_dims} series to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# segment


def _pick_column(series: MultiSeries, column) -> np.ndarray:
    if column is None:
        if series.n_dims != 1:
            raise ParameterError(
                f"input has {series.n_dims} value columns; choose one with --column"
            )
        return series.values[:, 0]
    try:
        return series.column(int(column))
    except ValueError:
        return series.column(column)


def _report_payload(result: HfsResult) -> dict:
    params = result.params
    return {
        "loss": result.report.loss,
        "criterion": result.report.criterion,
        "n_params": result.report.n_params,
        "per_region_loglik": list(result.report.per_region_loglik),
        "n_points": result.report.n_points,
        "gap_threshold": None if params is None else params.gap_threshold,
        "run_threshold": None if params is None else params.run_threshold,
        "region_rates": {str(j): r for j, r in (result.segmentation.region_rates or {}).items()},
        "n_switches": result.segmentation.n_switches,
    }


def cmd_segment(args) -> int:
    series = load_csv(args.input, has_header=not args.no_header)
    x = _pick_column(series, args.column)
    bits = tail_encode(x, args.alpha, args.beta)
    result = hfs_search(bits, criterion=args.criterion)
    _write_labels(args.out, series.time_index, result.segmentation.labels)
    _write_json(args.report, _report_payload(result))
    if args.plot:
        plots.plot_series(x, _png(args.out), labels=result.segmentation.labels)
    print(
        f"segmented {series.n_points} points into {result.segmentation.n_segments} regions "
        f"(loss {result.report.loss:.4f})"
    )
    return 0


# ---------------------------------------------------------------------------
# extract-features


def cmd_extract(args) -> int:
    series = load_csv(args.input, has_header=not args.no_header)
    if not args.no_standardize:
        series = standardize(series)
    perm = None
    if args.lag is not None:
        series = embed_lags(series, args.lag)
    if args.window is not None:
        series, perm = block_permute(series, args.window, args.seed)
    feats, balls = extract_features(
        series.values, n_balls=args.balls, ratio=args.ratio,
        criterion=args.criterion, seed=args.seed,
    )
    _write_matrix(args.out, feats.values, [f"f{v + 1}" for v in range(feats.n_features)])
    sidecar = {
        "n_points": feats.n_points,
        "ball_size": balls.ball_size,
        "ratio": args.ratio,
        "criterion": args.criterion,
        "seed": args.seed,
        "centroids": balls.centroids.tolist(),
        "members": (balls.members + 1).tolist(),  # 1-based time positions
        "permutation": None
        if perm is None
        else {"mapping": (perm.mapping + 1).tolist(), "window_length": perm.window_length},
        "source": str(args.input),
    }
    _write_json(args.balls_out, sidecar)
    print(f"wrote {feats.n_points} x {feats.n_features} feature matrix to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# decode


def _load_features(path) -> np.ndarray:
    matrix = np.genfromtxt(path, delimiter=",", skip_header=1, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if np.isnan(matrix).any():
        raise ParseError(f"{path}: non-numeric entries in feature matrix")
    return matrix


def _load_balls(path) -> tuple[BallSet, Permutation | None]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    balls = BallSet(np.asarray(payload["members"], dtype=np.int64) - 1, np.asarray(payload["centroids"]))
    perm = None
    if payload.get("permutation"):
        perm = Permutation(
            np.asarray(payload["permutation"]["mapping"], dtype=np.int64) - 1,
            payload["permutation"]["window_length"],
        )
    return balls, perm


def cmd_decode(args) -> int:
    feats = _load_features(args.features)
    balls, perm = _load_balls(args.balls)
    cfg = DecodeConfig(
        method=args.method, k=args.k, eta=args.eta, max_iter=args.max_iter,
        tol=args.tol, seed=args.seed, n_restarts=args.restarts,
    )
    result = decode(feats, balls, cfg)
    labels = result.segmentation.labels
    if perm is not None:
        labels = perm.inverse().apply_to_array(labels)
    _write_labels(args.out, np.arange(1, labels.shape[0] + 1), labels)
    _write_matrix(
        args.weights_out,
        np.column_stack([np.arange(1, result.weights.shape[0] + 1), result.weights]),
        ("feature", "weight"),
    )
    _write_json(
        args.trace_out,
        {
            "method": args.method,
            "converged": result.converged,
            "n_iterations": result.n_iterations,
            "iterations": result.trace,
        },
    )
    if args.plot:
        plots.plot_weights(result.weights, _png(args.weights_out), title=f"{args.method} weights")
    status = "converged" if result.converged else "hit the iteration cap"
    print(f"decode {status} after {result.n_iterations} iterations")
    return 0


# ---------------------------------------------------------------------------
# evaluate


def _csv_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _accuracy_mode(args) -> int:
    specs: list[ScenarioSpec] = []
    period_range = (args.period_min, args.period_max)
    for case in _csv_ints(args.cases) if args.cases else []:
        specs.append(ScenarioSpec("gaussian", case=case, n_periods=args.periods, period_range=period_range))
    for order in _csv_ints(args.ar_orders) if args.ar_orders else []:
        specs.append(ScenarioSpec("ar", ar_order=order, n_periods=args.periods, period_range=period_range))
    if not specs:
        raise ParameterError("simulation mode needs --cases and/or --ar-orders")
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise ParameterError(f"unknown method {m!r}; choose from {METHODS}")
    table = evaluation.replicate_table(
        specs, methods, args.reps, seed=args.seed, workers=args.workers,
        n_balls=args.balls, ratio=args.ratio, criterion=args.criterion,
        eta=args.eta, max_iter=args.max_iter, tol=args.tol,
        n_restarts=args.restarts, lag=args.lag, window=args.window,
    )
    rows = [spec.label() for spec in specs]
    with open(args.out_table, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario"] + list(methods))
        for row in rows:
            writer.writerow(
                [row] + [f"{table[(row, m)].mean:.4f} ({table[(row, m)].std:.4f})" for m in methods]
            )
    _write_json(
        args.out_report,
        {
            row: {
                m: {
                    "mean": table[(row, m)].mean,
                    "std": table[(row, m)].std,
                    "n_reps": table[(row, m)].n_reps,
                    "per_rep": list(table[(row, m)].per_rep),
                }
                for m in methods
            }
            for row in rows
        },
    )
    if args.plot:
        means = np.array([[table[(row, m)].mean for m in methods] for row in rows])
        plots.plot_accuracy_table(rows, list(methods), means, _png(args.out_table))
    for row in rows:
        cells = "  ".join(f"{m}={table[(row, m)].mean:.4f}" for m in methods)
        print(f"{row}: {cells}")
    return 0


def _real_data_mode(args) -> int:
    series = load_csv(args.data, has_header=not args.no_header)
    _, labels = _read_label_csv(args.labels)
    if labels.shape[0] != series.n_points:
        raise ValidationError("label file length does not match the series")
    zs = [float(v) for v in args.z.split(",") if v.strip()]
    report: dict = {"n_points": series.n_points, "dimensions": {}}
    for j, name in enumerate(series.dim_names):
        x = series.values[:, j]
        entry: dict = {}
        for z in zs:
            ht = evaluation.heavy_tailedness(x, labels, z)
            entry[f"z={z:g}"] = {
                "tail_probs": {str(s): p for s, p in ht.tail_probs.items()},
                "volatile_state": ht.volatile_state,
                "delta": ht.delta,
            }
        report["dimensions"][name] = entry
        grid = evaluation.kde_grid(x)
        curves = {}
        for state in (0, 1):
            dens = evaluation.gaussian_kde(x[labels == state], grid)
            curves[f"state{state}"] = dens
            out = Path(f"{args.kde_out}_{name}_state{state}.csv")
            _write_matrix(out, np.column_stack([grid, dens]), ("value", "density"))
        if args.plot:
            plots.plot_kde(grid, curves, Path(f"{args.kde_out}_{name}.png"), title=name)
    _write_json(args.out_report, report)
    print(f"heavy-tailedness report for {len(series.dim_names)} dimensions -> {args.out_report}")
    return 0


def cmd_evaluate(args) -> int:
    if args.data is not None:
        if args.labels is None:
            raise ParameterError("real-data mode needs --labels alongside --data")
        return _real_data_mode(args)
    return _accuracy_mode(args)


# ---------------------------------------------------------------------------
# ppplot


def cmd_ppplot(args) -> int:
    series = load_csv(args.input, has_header=not args.no_header)
    x = _pick_column(series, args.column)
    bits = tail_encode(x, args.alpha, args.beta)
    out = Path(args.out)
    if not args.by_region:
        rec = recurrence_times(bits)
        pairs = pp_plot_data(rec, _clamped_rate(bits.n_events, bits.n_points))
        _write_matrix(out, pairs, ("empirical", "theoretical"))
        if args.plot:
            plots.plot_pp(pairs, _png(out))
        print(f"wrote {pairs.shape[0]} P-P pairs to {out}")
        return 0
    result = hfs_search(bits, criterion=args.criterion)
    seg = result.segmentation
    for state, rate in sorted((seg.region_rates or {}).items()):
        from .excursion import ExcursionSequence

        sub = ExcursionSequence(bits.bits[seg.labels == state])
        pairs = pp_plot_data(recurrence_times(sub), rate)
        path = out.with_name(f"{out.stem}_state{state}{out.suffix}")
        _write_matrix(path, pairs, ("empirical", "theoretical"))
        if args.plot:
            plots.plot_pp(pairs, _png(path), title=f"state {state}")
        print(f"wrote {pairs.shape[0]} P-P pairs to {path}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_io_flags(sub, output=True):
    sub.add_argument("--input", required=True, help="input series CSV")
    sub.add_argument("--no-header", action="store_true", help="input CSV has no header row")
    if output:
        sub.add_argument("--out", required=True, help="output CSV path")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="regimeseg",
        description="Segment multivariate series into recurrent hidden phases.",
    )
    parser.add_argument("--config", help="KEY=VALUE config file (flags take precedence)")
    subs = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    sim = subs.add_parser("simulate", help="generate a benchmark scenario")
    sim.add_argument("--case", type=int, choices=(1, 2, 3, 4, 5), help="bivariate Gaussian case")
    sim.add_argument("--ar", type=int, choices=(1, 2), help="switching AR order")
    sim.add_argument("--periods", type=int, default=10)
    sim.add_argument("--period-min", type=int, default=200)
    sim.add_argument("--period-max", type=int, default=400)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True, help="series CSV path")
    sim.add_argument("--truth", required=True, help="truth labels CSV path")
    sim.add_argument("--plot", action="store_true")
    sim.set_defaults(func=cmd_simulate)
    registry["simulate"] = sim

    seg = subs.add_parser("segment", help="tail events + two-level threshold search")
    _add_io_flags(seg)
    seg.add_argument("--column", help="value column name or index (required when p > 1)")
    seg.add_argument("--alpha", type=float, default=0.05)
    seg.add_argument("--beta", type=float, default=0.95)
    seg.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    seg.add_argument("--report", required=True, help="fit report JSON path")
    seg.add_argument("--plot", action="store_true")
    seg.set_defaults(func=cmd_segment)
    registry["segment"] = seg

    ext = subs.add_parser("extract-features", help="ball events -> N x V rate matrix")
    _add_io_flags(ext)
    ext.add_argument("--balls", type=int, default=100, help="number of balls V")
    ext.add_argument("--ratio", type=float, default=0.1, help="ball size as a fraction of N")
    ext.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    ext.add_argument("--seed", type=int, default=0)
    ext.add_argument("--no-standardize", action="store_true")
    ext.add_argument("--lag", type=int, help="embed a univariate series with this many lags")
    ext.add_argument("--window", type=int, help="block-permute within windows of this length")
    ext.add_argument("--balls-out", required=True, help="ball membership JSON path")
    ext.set_defaults(func=cmd_extract)
    registry["extract-features"] = ext

    dec = subs.add_parser("decode", help="feature-weighted clustering of the rate matrix")
    dec.add_argument("--features", required=True, help="feature matrix CSV")
    dec.add_argument("--balls", required=True, help="ball membership JSON")
    dec.add_argument("--method", choices=METHODS, required=True)
    dec.add_argument("--k", type=int, default=2)
    dec.add_argument("--eta", type=float, default=0.5)
    dec.add_argument("--max-iter", type=int, default=50)
    dec.add_argument("--tol", type=float, default=1e-6)
    dec.add_argument("--seed", type=int, default=0)
    dec.add_argument("--restarts", type=int, default=5)
    dec.add_argument("--out", required=True, help="segmentation CSV path")
    dec.add_argument("--weights-out", required=True, help="final weights CSV path")
    dec.add_argument("--trace-out", required=True, help="iteration trace JSON path")
    dec.add_argument("--plot", action="store_true")
    dec.set_defaults(func=cmd_decode)
    registry["decode"] = dec

    ev = subs.add_parser("evaluate", help="replication table, or heavy tails on real data")
    ev.add_argument("--cases", help="comma-separated Gaussian cases, e.g. 1,2,5")
    ev.add_argument("--ar-orders", help="comma-separated AR orders, e.g. 1,2")
    ev.add_argument("--methods", default="fwsa,nmi,delta,entropy")
    ev.add_argument("--reps", type=int, default=100)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--periods", type=int, default=10)
    ev.add_argument("--period-min", type=int, default=200)
    ev.add_argument("--period-max", type=int, default=400)
    ev.add_argument("--balls", type=int, default=100)
    ev.add_argument("--ratio", type=float, default=0.1)
    ev.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    ev.add_argument("--eta", type=float, default=0.5)
    ev.add_argument("--max-iter", type=int, default=50)
    ev.add_argument("--tol", type=float, default=1e-6)
    ev.add_argument("--restarts", type=int, default=5)
    ev.add_argument("--lag", type=int, help="lag embedding for AR scenarios (default: the order)")
    ev.add_argument("--window", type=int, default=evaluation.DEFAULT_WINDOW)
    ev.add_argument("--workers", type=int, help="parallel replications (default REGIME_SEG_THREADS)")
    ev.add_argument("--out-table", default="accuracy_table.csv")
    ev.add_argument("--out-report", default="accuracy_report.json")
    ev.add_argument("--data", help="real-data mode: series CSV (needs --labels)")
    ev.add_argument("--labels", help="real-data mode: segmentation CSV")
    ev.add_argument("--z", default="1,2,3", help="real-data mode: z levels")
    ev.add_argument("--kde-out", default="kde", help="real-data mode: KDE output prefix")
    ev.add_argument("--plot", action="store_true")
    ev.set_defaults(func=cmd_evaluate)
    registry["evaluate"] = ev

    pp = subs.add_parser("ppplot", help="empirical vs geometric CDF pairs")
    _add_io_flags(pp)
    pp.add_argument("--column", help="value column name or index (required when p > 1)")
    pp.add_argument("--alpha", type=float, default=0.05)
    pp.add_argument("--beta", type=float, default=0.95)
    pp.add_argument("--by-region", action="store_true", help="one file per detected region")
    pp.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    pp.add_argument("--plot", action="store_true")
    pp.set_defaults(func=cmd_ppplot)
    registry["ppplot"] = pp

    return parser, registry


def _coerce(action: argparse.Action, raw: str):
    if isinstance(action, argparse._StoreTrueAction):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if action.type is not None:
        return action.type(raw)
    return raw


def _apply_config(parser, registry, argv: list[str]) -> None:
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return
    command = next((tok for tok in argv if tok in registry), None)
    if command is None:
        return
    sub = registry[command]
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    actions = {a.dest: a for a in sub._actions}
    overrides = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"config line {lineno}: expected KEY=VALUE, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        dest = key.replace("-", "_")
        if dest not in actions or dest in ("help", "func", "command"):
            parser.error(f"config line {lineno}: unknown option {key!r} for {command!r}")
        try:
            overrides[dest] = _coerce(actions[dest], value.strip("\"'"))
        except ValueError as exc:
            parser.error(f"config line {lineno}: {exc}")
    if overrides:
        sub.set_defaults(**overrides)
        # A config-supplied value satisfies a required flag.
        for action in sub._actions:
            if action.dest in overrides:
                action.required = False


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = build_parser()
    _apply_config(parser, registry, argv)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
