"""Command-line interface.

Verbs: ``extract``, ``compare``, ``partitions``, ``simulate``, ``diagnose``
and ``report-growth``.  Exit codes: 0 success, 1 user error, 2 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import __version__
from .mlp import (
    ModelFileError,
    TrainConfig,
    forward,
    load_csv,
    load_model,
    potential_diagnostics,
    scale_dataset,
)
from .multiset import build_cache, enumerate_partitions, filter_partitions, get_cache, partition_vectors
from .polyalg import Polynomial, count_terms, monomial_to_multiset
from .simulation import SIM_COLUMNS, Scenario, run_seed
from .transform import TransformConfig, nn2poly, predict, required_cache_order

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("nn2poly")

DEFAULTS = {
    "q_taylor": "8",
    "q_max": "3",
    "format": "json",
}

GROWTH_MAX_P = 50
GROWTH_MAX_Q = 6


class UsageError(Exception):
    pass


def _int_list(text) -> list[int]:
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(s) for s in str(text).split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got '{text}'") from None


def _q_max(text):
    if text is None or str(text).lower() in ("none", "inf", "0"):
        return None
    return int(text)


def _transform_config(args) -> TransformConfig:
    orders = _int_list(args.q_taylor)
    return TransformConfig(
        taylor_orders=orders[0] if len(orders) == 1 else orders,
        q_max=_q_max(args.q_max),
        mode=getattr(args, "mode", None),
    )


def term_label(t) -> str:
    """Variables of a monomial as comma-joined 1-based labels, '0' for the intercept."""
    labels = monomial_to_multiset(t)
    return ",".join(map(str, labels)) if labels else "0"


def _as_list(polys) -> list[Polynomial]:
    return [polys] if isinstance(polys, Polynomial) else list(polys)


def _write_csv(rows, header, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


@contextmanager
def _open_out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _load_model(path):
    try:
        return load_model(path)
    except FileNotFoundError:
        raise UsageError(f"weight file not found: {path}") from None
    except ModelFileError as exc:
        raise UsageError(str(exc)) from None


def _load_data(path, model_p, scale):
    try:
        data = load_csv(path)
    except FileNotFoundError:
        raise UsageError(f"data file not found: {path}") from None
    if data.p != model_p:
        raise UsageError(f"dataset has {data.p} input columns, model expects {model_p}")
    return scale_dataset(data, scale_targets=False) if scale else data


# ---------------------------------------------------------------- extract


def cmd_extract(args) -> int:
    model = _load_model(args.weights)
    config = _transform_config(args)
    cache = get_cache(model.p, required_cache_order(model, config))
    polys = _as_list(nn2poly(model, config, cache))

    if args.verify:
        from .oracle import symbolic_forward

        try:
            exact = _as_list(symbolic_forward(model))
        except ValueError as exc:
            raise UsageError(f"--verify: {exc}") from None
        diff = max(
            abs(P.coef(k) - O.coef(k)) for P, O in zip(polys, exact) for k in set(P) | set(O)
        )
        print(f"verify: max_abs_diff={diff!r}", file=sys.stderr)

    payload = polys[0].to_dict() if len(polys) == 1 else [P.to_dict() for P in polys]
    if args.top_k is None:
        with _open_out(args.out) as fh:
            if args.format == "csv":
                _write_csv(_term_rows(polys), ("output", "term", "exponents", "coef"), fh)
            else:
                fh.write(json.dumps(payload) + "\n")
        return 0
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(json.dumps(payload) + "\n")
    _write_csv(_top_k_rows(polys, args.top_k), ("output", "rank", "term", "exponents", "coef"), sys.stdout)
    return 0


def _term_rows(polys):
    for j, P in enumerate(polys, start=1):
        for t, c in P.items():
            yield (j, term_label(t), " ".join(map(str, t)), c)


def _top_k_rows(polys, k):
    if k < 1:
        raise UsageError("--top-k must be >= 1")
    for j, P in enumerate(polys, start=1):
        # stable sort keeps graded-lex order among equal magnitudes
        ranked = sorted(P.items(), key=lambda kv: -abs(kv[1]))[:k]
        for rank, (t, c) in enumerate(ranked, start=1):
            yield (j, rank, term_label(t), " ".join(map(str, t)), c)


# ---------------------------------------------------------------- compare


def cmd_compare(args) -> int:
    model = _load_model(args.weights)
    data = _load_data(args.data, model.p, args.scale)
    config = _transform_config(args)
    timings = {}

    t0 = time.perf_counter()
    cache = get_cache(model.p, required_cache_order(model, config))
    timings["cache_build_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    polys = nn2poly(model, config, cache)
    timings["transform_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    nn_pred = np.asarray(forward(model, data.inputs)).reshape(len(data), -1)
    poly_pred = np.asarray(predict(polys, data.inputs)).reshape(len(data), -1)
    timings["evaluation_s"] = time.perf_counter() - t0

    metrics = {"mse_poly_vs_nn": float(np.mean((poly_pred - nn_pred) ** 2))}
    if nn_pred.shape[1] == 1:
        resid = nn_pred[:, 0] - data.targets
        metrics["mse_nn_vs_y"] = float(np.mean(resid**2))
        var_y = float(np.var(data.targets))
        metrics["r2_nn_vs_y"] = 1.0 - metrics["mse_nn_vs_y"] / var_y if var_y > 0 else float("nan")
        var_nn = float(np.var(nn_pred))
        metrics["r2_poly_vs_nn"] = 1.0 - metrics["mse_poly_vs_nn"] / var_nn if var_nn > 0 else float("nan")

    report = {
        "config": {
            "weights": str(args.weights),
            "data": str(args.data),
            "q_taylor": _int_list(args.q_taylor),
            "q_max": _q_max(args.q_max),
            "scaled": bool(args.scale),
            "n_samples": len(data),
        },
        "metrics": metrics,
    }
    if args.timing:
        report["timing"] = timings
    with _open_out(args.out) as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if args.pred_out:
        with open(args.pred_out, "w", newline="") as fh:
            header = ["nn_pred", "poly_pred"] if nn_pred.shape[1] == 1 else [
                f"{kind}_{j}" for j in range(1, nn_pred.shape[1] + 1) for kind in ("nn_pred", "poly_pred")
            ]
            rows = [
                [v for j in range(nn_pred.shape[1]) for v in (float(a[j]), float(b[j]))]
                for a, b in zip(nn_pred, poly_pred)
            ]
            _write_csv(rows, header, fh)
    for key, value in metrics.items():
        print(f"{key:>16}  {value:.6g}", file=sys.stderr)
    return 0


# ------------------------------------------------------------- partitions


def _format_partition(part) -> str:
    return ",".join("{" + ",".join(map(str, b)) + "}" for b in part)


def cmd_partitions(args) -> int:
    try:
        labels = [int(s) for s in args.multiset.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"cannot parse multiset '{args.multiset}'") from None
    if not labels or any(x < 1 for x in labels):
        raise UsageError("multiset must be a non-empty list of positive integers")
    parts = enumerate_partitions(labels)
    if args.n is not None or args.q is not None:
        n_values = [args.n] if args.n is not None else range(1, len(labels) + 1)
        Q = args.q if args.q is not None else len(labels)
        keep = {part for n in n_values for part in filter_partitions(parts, n, Q)}
        parts = [part for part in parts if part in keep]
    distinct = sorted(set(labels))
    for part in parts:
        if args.vectors:
            vecs = partition_vectors(part, distinct)
            print("+".join("(" + ",".join(map(str, v)) + ")" for v in vecs))
        else:
            print(_format_partition(part))
    return 0


# --------------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    if args.seed is None:
        raise UsageError("simulate needs explicit --seed values")
    seeds = _int_list(args.seed)
    layers = _int_list(args.layers)
    if any(L < 1 for L in layers):
        raise UsageError("hidden layer counts must be >= 1")
    train_cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size, learning_rate=args.lr)
    orders = _int_list(args.q_taylor)
    if len(orders) != 1:
        raise UsageError("simulate uses a single --q-taylor value for every layer")
    rows = []
    for L in layers:
        scenario = Scenario(
            p=args.p,
            order=args.order,
            n_interactions=args.interactions,
            hidden_layers=L,
            width=args.width,
            activation=args.activation,
            constrain=args.constrain,
            n_samples=args.samples,
            noise_sd=args.noise_sd,
            train=train_cfg,
            taylor_order=orders[0],
            q_max=_q_max(args.q_max),
        )
        for seed in seeds:
            row = run_seed(scenario, seed)
            rows.append([row[c] for c in SIM_COLUMNS])
            log.info("layers=%d seed=%d done", L, seed)
    with _open_out(args.out) as fh:
        _write_csv(rows, SIM_COLUMNS, fh)
    return 0


# --------------------------------------------------------------- diagnose

DIAG_COLUMNS = (
    "layer", "activation", "bin_lo", "bin_hi", "count",
    "mean", "sd", "frac_abs_gt_1", "max_abs", "taylor_max_err", "taylor_mean_err",
)


def cmd_diagnose(args) -> int:
    model = _load_model(args.weights)
    data = _load_data(args.data, model.p, args.scale)
    orders = _int_list(args.q_taylor)
    stats = potential_diagnostics(model, data, q=orders[0], bins=args.bins)
    rows = []
    for s in stats:
        for lo, hi, count in zip(s.bin_edges[:-1], s.bin_edges[1:], s.hist_counts):
            rows.append([
                s.layer, s.activation, float(lo), float(hi), int(count),
                s.mean, s.sd, s.frac_above_one, s.max_abs, s.taylor_max_err, s.taylor_mean_err,
            ])
    with _open_out(args.out) as fh:
        _write_csv(rows, DIAG_COLUMNS, fh)
    return 0


# ---------------------------------------------------------- report-growth

GROWTH_COLUMNS = (
    "p", "Q", "n_terms", "n_canonical_classes", "cache_build_ms", "cache_bytes",
    "n_canonical_partitions", "n_all_partitions",
)


def _class_size(key, p) -> int:
    """Number of monomials in ``p`` variables sharing the canonical form ``key``."""
    from collections import Counter
    from math import comb, factorial

    k = len(key)
    if k > p:
        return 0
    ways = comb(p, k) * factorial(k)
    for m in Counter(key).values():
        ways //= factorial(m)
    return ways


def cmd_report_growth(args) -> int:
    ps = _int_list(args.p)
    qs = _int_list(args.q)
    if not args.force and (max(ps) > GROWTH_MAX_P or max(qs) > GROWTH_MAX_Q):
        raise UsageError(f"grid exceeds p <= {GROWTH_MAX_P}, Q <= {GROWTH_MAX_Q}; pass --force to run it")
    rows = []
    for p in ps:
        for Q in qs:
            t0 = time.perf_counter()
            cache = build_cache(p, Q)
            elapsed = (time.perf_counter() - t0) * 1000.0
            n_all = sum(len(cache[key]) * _class_size(key, p) for key in cache.keys())
            rows.append([
                p, Q, count_terms(p, Q), len(cache), round(elapsed, 3), len(cache.to_json().encode()),
                cache.n_partitions, n_all,
            ])
    with _open_out(args.out) as fh:
        _write_csv(rows, GROWTH_COLUMNS, fh)
    return 0


# ------------------------------------------------------------------ parser


def _add_transform_flags(sp) -> None:
    sp.add_argument("--q-taylor", help="Taylor order, or one per layer: INT[,INT...] (default 8)")
    sp.add_argument("--q-max", help="maximum polynomial order, 'none' for no cap (default 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nn2poly", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="TOML file with default flag values")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("extract", help="polynomial representation of a weight file")
    sp.add_argument("--weights", required=True)
    _add_transform_flags(sp)
    sp.add_argument("--mode", choices=("regression", "classification"))
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("json", "csv"))
    sp.add_argument("--top-k", type=int, help="print the N largest |coefficient| terms as CSV")
    sp.add_argument("--verify", action="store_true", help="compare with the exact symbolic expansion")
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("compare", help="network vs polynomial predictions on a dataset")
    sp.add_argument("--weights", required=True)
    sp.add_argument("--data", required=True)
    _add_transform_flags(sp)
    sp.add_argument("--mode", choices=("regression", "classification"))
    sp.add_argument("--scale", action="store_true", help="min-max scale inputs to [-1, 1] first")
    sp.add_argument("--out", help="report JSON path (default stdout)")
    sp.add_argument("--pred-out", help="CSV of nn_pred, poly_pred per sample")
    sp.add_argument("--timing", action="store_true", help="include per-phase timings in the report")
    sp.add_argument("--format", choices=("json",))
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("partitions", help="list multiset partitions")
    sp.add_argument("multiset", help="comma-separated labels, e.g. 1,1,2,3")
    sp.add_argument("--n", type=int, help="keep partitions with exactly N blocks")
    sp.add_argument("--q", "-Q", type=int, help="keep partitions whose blocks have at most Q elements")
    sp.add_argument("--vectors", action="store_true", help="print multiplicity-vector form")
    sp.set_defaults(func=cmd_partitions)

    sp = sub.add_parser("simulate", help="synthetic-data study: train, transform, compare")
    sp.add_argument("--p", type=int, default=5)
    sp.add_argument("--order", type=int, default=2, help="order of the generating polynomial")
    sp.add_argument("--interactions", type=int, default=5)
    sp.add_argument("--layers", default="1", help="hidden layer counts, INT[,INT...]")
    sp.add_argument("--width", type=int, default=50)
    sp.add_argument("--activation", default="tanh")
    sp.add_argument("--seed", help="seeds, INT[,INT...] (required)")
    sp.add_argument("--constrain", action=argparse.BooleanOptionalAction, default=True)
    sp.add_argument("--samples", type=int, default=500)
    sp.add_argument("--noise-sd", type=float, default=1.0)
    sp.add_argument("--epochs", type=int, default=Scenario().train.epochs)
    sp.add_argument("--batch-size", type=int, default=Scenario().train.batch_size)
    sp.add_argument("--lr", type=float, default=Scenario().train.learning_rate)
    _add_transform_flags(sp)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("csv",))
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("diagnose", help="per-layer potential histograms and Taylor error")
    sp.add_argument("--weights", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--q-taylor", help="Taylor order used for the error column (default 8)")
    sp.add_argument("--bins", type=int, default=60)
    sp.add_argument("--scale", action="store_true")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("csv",))
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("report-growth", help="term counts and partition-cache sizes")
    sp.add_argument("--p", default="3,10,20")
    sp.add_argument("--q", "-Q", default="2,3,4")
    sp.add_argument("--force", action="store_true")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("csv",))
    sp.set_defaults(func=cmd_report_growth)
    return parser


def _apply_config(args) -> None:
    file_values = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                file_values = tomllib.load(fh)
        except FileNotFoundError:
            raise UsageError(f"config file not found: {args.config}") from None
        except tomllib.TOMLDecodeError as exc:
            raise UsageError(f"{args.config}: {exc}") from None
        file_values = {k.replace("-", "_"): v for k, v in file_values.items()}
    for key in ("q_taylor", "q_max", "seed", "format"):
        if not hasattr(args, key) or getattr(args, key) is not None:
            continue
        if key in file_values:
            value = file_values[key]
            setattr(args, key, ",".join(map(str, value)) if isinstance(value, list) else str(value))
        elif key in DEFAULTS:
            setattr(args, key, DEFAULTS[key])


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        _apply_config(args)
        return args.func(args)
    except (UsageError, ValueError, OverflowError, MemoryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # invariant violations and bugs
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
