"""``mvsc`` command line: gen, fit, sweep, trace, weights.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .dataset import DatasetError, SyntheticSpec, generate_synthetic, save_dataset
from .experiment import (
    TRACED,
    ExperimentConfig,
    lowest_weight_table,
    prepare_dataset,
    run_experiment,
)
from .reports import write_csv, write_json

log = logging.getLogger("rmsc.cli")


class UsageError(Exception):
    """Invalid invocation; maps to exit code 2."""


# -- commands (library-callable) -------------------------------------------

def cmd_gen(spec: SyntheticSpec, out) -> Path:
    """Write a synthetic dataset plus ``outliers.txt``; returns the manifest path."""
    dataset, outliers = generate_synthetic(spec)
    manifest = save_dataset(dataset, out)
    Path(out, "outliers.txt").write_text("".join(f"{int(j)}\n" for j in outliers))
    return manifest


def cmd_fit(cfg: ExperimentConfig, record_timing: bool = False) -> dict:
    """Run one experiment and write ``report.json``, ``labels.csv`` and ``metrics.csv``."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_experiment(cfg, record_timing=record_timing)
    report = result.report
    write_json(out / "report.json", report)
    if report["labels"] is not None:
        write_csv(out / "labels.csv", ["sample", "label"], enumerate(report["labels"]))
    ev = report["evaluation"]
    if ev is not None:
        write_csv(out / "metrics.csv", ["restart", "accuracy", "nmi"],
                  ((r, a, m) for r, (a, m) in enumerate(zip(ev["per_run_accuracy"], ev["per_run_nmi"]))))
    return report


def cmd_sweep(cfg: ExperimentConfig, lambda_grid, beta_grid) -> list:
    """Evaluate every ``(lambda, beta)`` pair; failures become NaN rows. Writes ``sweep.csv``."""
    if not lambda_grid or not beta_grid:
        raise UsageError("lambda and beta grids must be nonempty")
    dataset = prepare_dataset(cfg)
    rows = []
    for lam in lambda_grid:
        for beta in beta_grid:
            try:
                cell = cfg.with_overrides(lam=lam, beta=beta)
                ev = run_experiment(cell, dataset=dataset).report["evaluation"]
                if ev is None:
                    raise ValueError("dataset has no labels to score against")
                rows.append((lam, beta, ev["mean_accuracy"], ev["std_accuracy"],
                             ev["mean_nmi"], ev["std_nmi"]))
            except (ValueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
                log.warning("sweep cell lambda=%r beta=%r failed: %s", lam, beta, exc)
                rows.append((lam, beta) + (math.nan,) * 4)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", ["lambda", "beta", "mean_acc", "std_acc", "mean_nmi", "std_nmi"], rows)
    if all(math.isnan(r[2]) for r in rows):
        log.warning("every sweep cell failed")
    return rows


def cmd_trace(cfg: ExperimentConfig) -> list:
    """Objective value after each iteration, written to ``trace.csv``."""
    if cfg.method not in TRACED:
        raise UsageError(f"method {cfg.method} has no objective trace; use RMSC or RMSC_WV")
    result = run_experiment(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "trace.csv", ["iteration", "objective"],
              ((i + 1, f) for i, f in enumerate(result.trace)))
    return result.trace


def cmd_weights(cfg: ExperimentConfig, n_lowest: int = 10) -> np.ndarray:
    """Final ``m x n`` weights to ``weights.csv``; per-view lowest to ``lowest_weights.csv``."""
    if cfg.method != "RMSC":
        raise UsageError("weights are per-sample only for method RMSC")
    result = run_experiment(cfg, n_lowest=n_lowest)
    W = result.weights
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "weights.csv", [str(j) for j in range(W.shape[1])], W.tolist())
    write_csv(out / "lowest_weights.csv", ["view", "rank", "sample", "weight"],
              lowest_weight_table(W, n_lowest))
    return W


# -- argument parsing -------------------------------------------------------

def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _sigma(text):
    return text if text == "median" else float(text)


def _experiment_args(p):
    p.add_argument("--config", help="JSON experiment config; flags override it")
    p.add_argument("--manifest", help="dataset manifest (JSON)")
    p.add_argument("--method", help="RMSC, RMSC_WV, SSC_BSV, SSC_AVG or SC_BSV")
    p.add_argument("--out", help="output directory")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--init", dest="init_policy", choices=["ridge", "zero"])
    p.add_argument("--n-clusters", type=int)
    p.add_argument("--restarts", dest="kmeans_restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--knn-k", type=int)
    p.add_argument("--sigma", type=_sigma, help="'median' or a positive bandwidth")
    p.add_argument("--no-normalize", action="store_true", help="skip unit-L2 column scaling")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvsc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic multi-view dataset")
    g.add_argument("--out", required=True)
    g.add_argument("--clusters", type=int, default=3)
    g.add_argument("--per-cluster", type=int, default=20)
    g.add_argument("--subspace-dim", type=int, default=5)
    g.add_argument("--ambient-dims", type=_ints, default=[60, 60])
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--outlier-fraction", type=float, default=0.0)
    g.add_argument("--outlier-views", type=_ints, default=[])
    g.add_argument("--seed", type=int, default=0)

    f = sub.add_parser("fit", help="fit one method and evaluate")
    _experiment_args(f)
    f.add_argument("--record-timing", action="store_true",
                   help="store wall-clock seconds in report.json (breaks byte-identical reruns)")

    s = sub.add_parser("sweep", help="grid over lambda and beta")
    _experiment_args(s)
    s.add_argument("--lambdas", type=_floats, required=True)
    s.add_argument("--betas", type=_floats, required=True)

    t = sub.add_parser("trace", help="objective value per iteration")
    _experiment_args(t)

    w = sub.add_parser("weights", help="dump learned sample weights")
    _experiment_args(w)
    w.add_argument("--top", type=int, default=10, help="lowest weights listed per view")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    over = {k: getattr(args, k) for k in ("lam", "beta", "gamma", "max_iters", "rel_tol",
                                         "init_policy", "n_clusters", "kmeans_restarts",
                                         "seed", "knn_k", "sigma", "method")}
    over["dataset_manifest"] = args.manifest
    over["output_dir"] = args.out
    if args.no_normalize:
        over["normalize"] = False
    cfg = cfg.with_overrides(**over)
    if cfg.dataset_manifest is None:
        raise UsageError("no dataset: pass --manifest or set dataset_manifest in --config")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen":
            spec = SyntheticSpec(args.clusters, args.per_cluster, args.subspace_dim,
                                 tuple(args.ambient_dims), args.noise, args.outlier_fraction,
                                 tuple(args.outlier_views), args.seed)
            print(cmd_gen(spec, args.out))
            return 0
        cfg = _config_from_args(args)
        if args.command == "fit":
            report = cmd_fit(cfg, record_timing=args.record_timing)
            ev = report["evaluation"]
            if ev is not None:
                print(f"{cfg.method}: acc {ev['mean_accuracy']:.4f} +/- {ev['std_accuracy']:.4f}, "
                      f"nmi {ev['mean_nmi']:.4f} +/- {ev['std_nmi']:.4f}")
            print(Path(cfg.output_dir) / "report.json")
        elif args.command == "sweep":
            cmd_sweep(cfg, args.lambdas, args.betas)
            print(Path(cfg.output_dir) / "sweep.csv")
        elif args.command == "trace":
            cmd_trace(cfg)
            print(Path(cfg.output_dir) / "trace.csv")
        elif args.command == "weights":
            cmd_weights(cfg, args.top)
            print(Path(cfg.output_dir) / "weights.csv")
        return 0
    except (UsageError, DatasetError, ValueError) as exc:
        print(f"mvsc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"mvsc {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
