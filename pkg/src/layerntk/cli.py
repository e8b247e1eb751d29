"""``layerntk`` command-line interface.

Exit codes: 0 success, 2 configuration/usage error, 3 numeric or degenerate
result, 4 I/O or data-format error. Failures print one line to stderr:
``layerntk: error[<code>]: <message>``.
"""
import argparse
import csv
import logging
import os
import sys
import warnings

import numpy as np

from .errors import ConfigError, IDXFormatError
from .experiments.concentration import ZonalTarget, decrement_ratio_mc
from .experiments.config import ExperimentConfig, parse_float_list, parse_int_list
from .experiments.manifest import write_manifest
from .experiments.mnist import read_idx
from .experiments.sweep import build_model, build_points, contribution_sweep, summarize
from .experiments.sweep import write_rows_csv, write_summary_csv
from .experiments.training import run_training, write_trace_csv, write_training_csv
from .gegenbauer import ratio_table, to_gegenbauer, write_ratio_csv
from .kernel_series import DEFAULT_TRUNCATION, expand_activation, get_activation, two_layer_series
from .kernel_series import write_expansion_csv
from .ntk import gram_set

OUTPUT_ENV = "LAYERNTK_OUTPUT_DIR"
# the beta walk is cheap; a long series keeps truncation bias out of ratios
SERIES_TRUNCATION = 100
log = logging.getLogger("layerntk")


def _series_args(p, max_degree_default):
    p.add_argument("--activation", default="relu")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--max-degree", type=int, default=max_degree_default)
    p.add_argument(
        "--truncation", type=int, default=None, help=f"power-series truncation (default max({SERIES_TRUNCATION}, max-degree))"
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="layerntk", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--output-dir", help=f"artifact directory (else ${OUTPUT_ENV}, else ./out)")
    common.add_argument("--seed", type=int, help="run a single seed instead of [run] seeds")
    common.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("expand", parents=[common], help="Hermite expansion and two-layer kernel series")
    p.add_argument("--activation", default="relu")
    p.add_argument("--degree", type=int, default=DEFAULT_TRUNCATION)

    p = sub.add_parser("gegenbauer", parents=[common], help="Gegenbauer coefficients of both layer kernels")
    _series_args(p, 12)

    p = sub.add_parser("ratio", parents=[common], help="layer-wise eigenvalue ratios per degree")
    _series_args(p, 12)

    p = sub.add_parser("gram", parents=[common], help="per-layer gram matrices (binary) for each seed")
    p.add_argument("--save", action="store_true", help="also write GramSet binaries")

    sub.add_parser("contributions", parents=[common], help="relative layer contributions sweep")
    sub.add_parser("concentration", parents=[common], help="Monte Carlo decrement-ratio concentration")
    p = sub.add_parser("train-layerwise", parents=[common], help="train one layer at a time")
    p.add_argument("--trace-every", type=int, default=0, help="write per-step traces every k steps")

    p = sub.add_parser("mnist-info", parents=[common], help="describe an IDX file")
    p.add_argument("path")
    return parser


def _output_dir(args):
    out = args.output_dir or os.environ.get(OUTPUT_ENV) or "out"
    os.makedirs(out, exist_ok=True)
    return out


def _config(args, required=True):
    if args.config is None:
        if required:
            raise ConfigError(f"{args.command} needs --config")
        cfg = ExperimentConfig.from_string("")
    else:
        cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg.set("run", "seeds", args.seed)
    return cfg


def _truncation(args):
    return args.truncation if args.truncation is not None else max(SERIES_TRUNCATION, args.max_degree)


def cmd_expand(args, out):
    write_manifest(os.path.join(out, "manifest.json"), "expand", extra={"args": vars(args)})
    a = expand_activation(get_activation(args.activation), args.degree)
    path = os.path.join(out, "expansion.csv")
    write_expansion_csv(path, a)
    return [path]


def cmd_gegenbauer(args, out):
    write_manifest(os.path.join(out, "manifest.json"), "gegenbauer", extra={"args": vars(args)})
    first, second = two_layer_series(args.activation, _truncation(args))
    gf = to_gegenbauer(first, args.dim, args.max_degree)
    gs = to_gegenbauer(second, args.dim, args.max_degree)
    path = os.path.join(out, "gegenbauer.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["degree", "lambda_first", "lambda_second", "mercer_first", "mercer_second"])
        for l, row in enumerate(zip(gf.coeffs, gs.coeffs, gf.eigenvalues(), gs.eigenvalues())):
            w.writerow([l, *(repr(float(v)) for v in row)])
    return [path]


def cmd_ratio(args, out):
    write_manifest(os.path.join(out, "manifest.json"), "ratio", extra={"args": vars(args)})
    first, second = two_layer_series(args.activation, _truncation(args))
    rows = ratio_table(
        to_gegenbauer(first, args.dim, args.max_degree),
        to_gegenbauer(second, args.dim, args.max_degree),
        args.max_degree,
    )
    path = os.path.join(out, "ratio.csv")
    write_ratio_csv(path, rows)
    return [path]


def cmd_gram(args, out):
    cfg = _config(args)
    write_manifest(os.path.join(out, "manifest.json"), "gram", cfg, cfg.seeds)
    paths = []
    summary = os.path.join(out, "gram_summary.csv")
    with open(summary, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "layer", "n", "trace", "min_eigenvalue", "max_eigenvalue"])
        for seed in cfg.seeds:
            X = build_points(cfg, seed)
            grams = gram_set(build_model(cfg, X.shape[1], seed), X)
            for l, g in enumerate(grams.grams):
                ev = np.linalg.eigvalsh(g)
                w.writerow([seed, l, grams.n, repr(float(np.trace(g))), repr(float(ev[0])), repr(float(ev[-1]))])
            if args.save:
                p = os.path.join(out, f"grams_seed{seed}.bin")
                grams.save(p)
                paths.append(p)
    return [summary, *paths]


def cmd_contributions(args, out):
    cfg = _config(args)
    write_manifest(os.path.join(out, "manifest.json"), "contributions", cfg, cfg.seeds)
    rows = contribution_sweep(cfg)
    raw = os.path.join(out, "contributions.csv")
    agg = os.path.join(out, "contributions_summary.csv")
    write_rows_csv(raw, rows)
    write_summary_csv(agg, summarize(rows))
    return [raw, agg]


def cmd_concentration(args, out):
    cfg = _config(args)
    seed = cfg.seeds[0]
    write_manifest(os.path.join(out, "manifest.json"), "concentration", cfg, [seed])
    sec = "concentration"
    first, second = two_layer_series(cfg.get(sec, "activation"), cfg.get(sec, "max_degree", int))
    target = ZonalTarget(
        cfg.get(sec, "dim", int),
        tuple(cfg.get(sec, "degrees", parse_int_list)),
        tuple(cfg.get(sec, "amplitudes", parse_float_list)),
    )
    report = decrement_ratio_mc(
        first,
        second,
        target,
        cfg.get(sec, "n_grid", parse_int_list),
        cfg.get(sec, "trials", int),
        seed,
        cfg.get(sec, "delta", float),
    )
    path = os.path.join(out, "concentration.csv")
    report.to_csv(path)
    log.info("log-log slope of median deviation: %.3f", report.slope())
    return [path]


def cmd_train(args, out):
    cfg = _config(args)
    write_manifest(os.path.join(out, "manifest.json"), "train-layerwise", cfg, cfg.seeds)
    rows, traces = run_training(cfg)
    path = os.path.join(out, "training.csv")
    write_training_csv(path, rows)
    paths = [path]
    if args.trace_every > 0:
        degrees = cfg.get("targets", "degrees", parse_int_list)
        for seed, trace in traces:
            p = os.path.join(out, f"trace_seed{seed}_layer{trace.layer}.csv")
            write_trace_csv(p, trace, degrees, args.trace_every)
            paths.append(p)
    return paths


def cmd_mnist_info(args, out):
    write_manifest(os.path.join(out, "manifest.json"), "mnist-info", extra={"path": args.path})
    arr = read_idx(args.path)
    path = os.path.join(out, "mnist_info.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "kind", "shape", "min", "max"])
        kind = "images" if arr.ndim == 3 else "labels"
        w.writerow([args.path, kind, "x".join(map(str, arr.shape)), int(arr.min()), int(arr.max())])
    return [path]


COMMANDS = {
    "expand": cmd_expand,
    "gegenbauer": cmd_gegenbauer,
    "ratio": cmd_ratio,
    "gram": cmd_gram,
    "contributions": cmd_contributions,
    "concentration": cmd_concentration,
    "train-layerwise": cmd_train,
    "mnist-info": cmd_mnist_info,
}


def _exit_code(exc):
    if isinstance(exc, (IDXFormatError, OSError)):
        return 4
    if isinstance(exc, (ConfigError, ValueError, KeyError)):
        return 2
    if isinstance(exc, (ArithmeticError, MemoryError, np.linalg.LinAlgError)):
        return 3
    return 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    logging.captureWarnings(True)
    try:
        out = _output_dir(args)
        with warnings.catch_warnings():
            if args.verbose == 0:
                warnings.simplefilter("ignore")
            paths = COMMANDS[args.command](args, out)
    except Exception as exc:  # noqa: BLE001 - every failure maps to an exit code
        code = _exit_code(exc)
        msg = " ".join(str(exc).split()) or type(exc).__name__
        print(f"layerntk: error[{code}]: {type(exc).__name__}: {msg}", file=sys.stderr)
        return code
    for p in paths:
        log.info("wrote %s", p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
