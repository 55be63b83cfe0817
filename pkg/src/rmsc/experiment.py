"""Method dispatch, evaluation and report assembly for experiments."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .dataset import MultiViewDataset, load_dataset, normalize_unit_l2
from .metrics import evaluate_runs
from .reports import validate_config, validate_report
from .solver import SolverConfig, fit_rmsc, fit_rmsc_wv, fit_ssc_single, naive_average_similarity
from .spectral import (
    SpectralConfig,
    gaussian_knn_graph,
    similarity_from_representation,
    spectral_cluster_runs,
)

METHODS = ("RMSC", "RMSC_WV", "SSC_BSV", "SSC_AVG", "SC_BSV")
TRACED = ("RMSC", "RMSC_WV")


def canonical_method(name: str) -> str:
    key = name.strip().upper().replace("-", "_")
    if key not in METHODS:
        raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")
    return key


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: method, hyperparameters, data and output location.

    ``spectral`` holds :class:`SpectralConfig` keyword arguments; a missing
    ``n_clusters`` is taken from the dataset.
    """

    method: str = "RMSC"
    solver: SolverConfig = SolverConfig()
    spectral: dict = field(default_factory=dict)
    dataset_manifest: Optional[str] = None
    output_dir: str = "."
    normalize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "method", canonical_method(self.method))
        unknown = set(self.spectral) - {"n_clusters", "kmeans_restarts", "kmeans_max_iters",
                                        "seed", "knn_k", "sigma"}
        if unknown:
            raise ValueError(f"unknown spectral settings: {sorted(unknown)}")

    def spectral_config(self, dataset: MultiViewDataset) -> SpectralConfig:
        kw = dict(self.spectral)
        if kw.get("n_clusters") is None:
            if dataset.n_clusters is None:
                raise ValueError("n_clusters unknown: set it in the config or the manifest")
            kw["n_clusters"] = dataset.n_clusters
        cfg = SpectralConfig(**kw)
        if cfg.n_clusters > dataset.n_samples:
            raise ValueError(f"n_clusters={cfg.n_clusters} exceeds n={dataset.n_samples}")
        if self.method == "SC_BSV" and cfg.knn_k >= dataset.n_samples:
            raise ValueError(f"knn_k={cfg.knn_k} must be smaller than n={dataset.n_samples}")
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        raw = json.loads(Path(path).read_text())
        try:
            validate_config(raw)
        except jsonschema.ValidationError as exc:
            raise ValueError(f"{path}: invalid config: {exc.message}") from None
        solver = raw.get("solver", {})
        if "lambda" in solver:
            solver = dict(solver, lam=solver.pop("lambda"))
        base = Path(path).parent
        manifest = raw.get("dataset_manifest")
        if manifest is not None and not Path(manifest).is_absolute():
            manifest = str(base / manifest)
        return cls(method=raw.get("method", "RMSC"),
                   solver=SolverConfig(**solver),
                   spectral=dict(raw.get("spectral", {})),
                   dataset_manifest=manifest,
                   output_dir=raw.get("output_dir", "."),
                   normalize=raw.get("normalize", True))

    def with_overrides(self, **kw) -> "ExperimentConfig":
        solver_kw = {k: kw.pop(k) for k in ("lam", "beta", "gamma", "max_iters", "rel_tol", "init_policy")
                     if kw.get(k) is not None}
        spectral_kw = {k: kw.pop(k) for k in ("n_clusters", "kmeans_restarts", "kmeans_max_iters",
                                              "seed", "knn_k", "sigma")
                       if kw.get(k) is not None}
        top = {k: v for k, v in kw.items() if v is not None}
        solver = replace(self.solver, **solver_kw) if solver_kw else self.solver
        return replace(self, solver=solver, spectral={**self.spectral, **spectral_kw}, **top)


def prepare_dataset(cfg: ExperimentConfig) -> MultiViewDataset:
    if cfg.dataset_manifest is None:
        raise ValueError("no dataset manifest given")
    ds = load_dataset(cfg.dataset_manifest)
    return normalize_unit_l2(ds) if cfg.normalize else ds


def _evaluation(runs, truth):
    if truth is None:
        return None
    ev = evaluate_runs(runs, truth)
    acc_mean, acc_std = ev.accuracy_mean_std
    nmi_mean, nmi_std = ev.nmi_mean_std
    return {"accuracy": ev.accuracy, "nmi": ev.nmi,
            "per_run_accuracy": ev.per_run_accuracy, "per_run_nmi": ev.per_run_nmi,
            "mean_accuracy": acc_mean, "std_accuracy": acc_std,
            "mean_nmi": nmi_mean, "std_nmi": nmi_std}


def _best_labels(runs):
    best = min(range(len(runs)), key=lambda r: runs[r][1])
    return [int(x) for x in runs[best][0]]


def hyperparameters(cfg: ExperimentConfig, spec: SpectralConfig) -> dict:
    s = cfg.solver
    return {"lambda": s.lam, "beta": s.beta, "gamma": s.gamma, "max_iters": s.max_iters,
            "rel_tol": s.rel_tol, "init_policy": s.init_policy.value,
            "n_clusters": spec.n_clusters, "kmeans_restarts": spec.kmeans_restarts,
            "kmeans_max_iters": spec.kmeans_max_iters, "seed": spec.seed,
            "knn_k": spec.knn_k, "sigma": spec.sigma, "normalize": cfg.normalize}


@dataclass
class RunResult:
    """In-memory outcome of :func:`run_experiment`; ``report`` is the JSON-ready summary."""

    report: dict
    trace: list = field(default_factory=list)
    weights: Optional[np.ndarray] = None
    runs: list = field(default_factory=list)


def run_experiment(cfg: ExperimentConfig, dataset: Optional[MultiViewDataset] = None,
                   record_timing: bool = False, n_lowest: int = 10) -> RunResult:
    """Fit ``cfg.method``, cluster, and score against labels when available."""
    if dataset is None:
        dataset = prepare_dataset(cfg)
    spec = cfg.spectral_config(dataset)
    truth = dataset.labels
    t0 = time.perf_counter()
    report = {"method": cfg.method, "hyperparameters": hyperparameters(cfg, spec),
              "dataset": {"manifest": str(cfg.dataset_manifest or ""),
                          "n_samples": dataset.n_samples, "n_views": dataset.n_views,
                          "view_names": list(dataset.view_names),
                          "has_labels": truth is not None},
              "evaluation": None, "labels": None, "iterations": None, "converged": None,
              "objective_trace": [], "wall_clock_seconds": None,
              "weight_summary": None, "selected_view": None, "per_view": []}
    result = RunResult(report)

    if cfg.method in TRACED:
        fit = fit_rmsc if cfg.method == "RMSC" else fit_rmsc_wv
        reps, weights, trace = fit(dataset, cfg.solver)
        runs = spectral_cluster_runs(similarity_from_representation(reps.consensus), spec)
        report.update(iterations=trace.iterations_run, converged=trace.converged,
                      objective_trace=[float(x) for x in trace.objective_values],
                      weight_summary=_weight_summary(weights, n_lowest))
        result.trace, result.weights = list(trace.objective_values), weights
    elif cfg.method == "SSC_AVG":
        zs = [fit_ssc_single(X, cfg.solver.beta) for X in dataset.views]
        runs = spectral_cluster_runs(naive_average_similarity(zs), spec)
    else:
        runs = None
        per_view = []
        for name, X in zip(dataset.view_names, dataset.views):
            if cfg.method == "SSC_BSV":
                S = similarity_from_representation(fit_ssc_single(X, cfg.solver.beta))
            else:
                S = gaussian_knn_graph(X, spec)
            vruns = spectral_cluster_runs(S, spec)
            per_view.append((name, vruns, _evaluation(vruns, truth)))
        report["per_view"] = [{"view": name, "evaluation": ev, "labels": _best_labels(vr)}
                              for name, vr, ev in per_view]
        if truth is not None:
            # best view by mean accuracy over restarts; first view wins ties
            best = max(range(len(per_view)),
                       key=lambda i: (per_view[i][2]["mean_accuracy"], -i))
            report["selected_view"] = per_view[best][0]
            runs = per_view[best][1]

    if runs is not None:
        result.runs = runs
        report["labels"] = _best_labels(runs)
        report["evaluation"] = _evaluation(runs, truth)
    if record_timing:
        report["wall_clock_seconds"] = time.perf_counter() - t0
    validate_report(report)
    return result


def _weight_summary(weights, n_lowest):
    W = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    if W.shape[0] == 1 and np.asarray(weights).ndim == 1:
        W = W.T  # per-view weights: one column
    lowest = []
    for v in range(W.shape[0]):
        order = np.argsort(W[v], kind="stable")[:n_lowest]
        for j in order:
            sample = int(j) if W.shape[1] > 1 else None
            lowest.append({"view": v, "sample": sample, "weight": float(W[v, j])})
    return {"per_view_mean": [float(x) for x in W.mean(axis=1)], "lowest": lowest}


def lowest_weight_table(weights, n_lowest: int = 10):
    """Rows ``(view, rank, sample, weight)`` of the smallest weights in each view."""
    W = np.asarray(weights, dtype=np.float64)
    rows = []
    for v in range(W.shape[0]):
        for rank, j in enumerate(np.argsort(W[v], kind="stable")[:n_lowest]):
            rows.append((v, rank, int(j), float(W[v, j])))
    return rows


def config_to_dict(cfg: ExperimentConfig) -> dict:
    solver = asdict(cfg.solver)
    solver["lambda"] = solver.pop("lam")
    solver["init_policy"] = cfg.solver.init_policy.value
    return {"method": cfg.method, "solver": solver, "spectral": dict(cfg.spectral),
            "dataset_manifest": cfg.dataset_manifest, "output_dir": cfg.output_dir,
            "normalize": cfg.normalize}
