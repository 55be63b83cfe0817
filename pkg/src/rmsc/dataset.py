"""Multi-view datasets: validation, CSV/JSON ingestion, preprocessing and
synthetic union-of-subspaces generation.

Samples are columns. View ``v`` is a ``d_v x n`` matrix and all views share
the same ``n`` columns.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed or inconsistent dataset input."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True, order="F")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MultiViewDataset:
    """``m`` feature matrices over the same ``n`` samples.

    Parameters
    ----------
    views : sequence of arrays, each of shape (d_v, n)
    view_names : sequence of str, optional
        Defaults to ``view0, view1, ...``.
    labels : array of int, shape (n,), optional
        Ground truth in ``[0, n_clusters)``.
    n_clusters : int, optional
        Inferred from ``labels`` when omitted.
    """

    views: tuple
    view_names: tuple = ()
    labels: Optional[np.ndarray] = None
    n_clusters: Optional[int] = None

    def __post_init__(self):
        views = tuple(_frozen(v) for v in self.views)
        if len(views) == 0:
            raise DatasetError("dataset needs at least one view")
        for v, X in enumerate(views):
            if X.ndim != 2:
                raise DatasetError(f"view {v} must be 2-D, got shape {X.shape}")
            if X.shape[0] < 1:
                raise DatasetError(f"view {v} has no feature rows")
            if not np.all(np.isfinite(X)):
                raise DatasetError(f"view {v} contains non-finite entries")
        counts = [X.shape[1] for X in views]
        if len(set(counts)) != 1:
            raise DatasetError(f"column count mismatch across views: {counts}")
        if counts[0] < 2:
            raise DatasetError("need at least 2 samples")
        object.__setattr__(self, "views", views)

        names = tuple(self.view_names) or tuple(f"view{v}" for v in range(len(views)))
        if len(names) != len(views):
            raise DatasetError(f"{len(names)} view names for {len(views)} views")
        object.__setattr__(self, "view_names", names)

        c = self.n_clusters
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.ndim != 1 or y.shape[0] != counts[0]:
                raise DatasetError(f"expected {counts[0]} labels, got shape {y.shape}")
            if not np.issubdtype(y.dtype, np.integer):
                if not np.all(np.equal(np.mod(y, 1), 0)):
                    raise DatasetError("labels must be integers")
            y = y.astype(np.int64)
            if y.min() < 0:
                raise DatasetError("labels must be nonnegative")
            if c is None:
                c = int(y.max()) + 1
            bad = np.flatnonzero(y >= c)
            if bad.size:
                raise DatasetError(
                    f"label {y[bad[0]]} at position {bad[0]} out of range [0, {c})")
            missing = np.setdiff1d(np.arange(c), y)
            if missing.size:
                raise DatasetError(f"cluster ids {missing.tolist()} never appear in labels")
            y.setflags(write=False)
            object.__setattr__(self, "labels", y)
        if c is not None:
            c = int(c)
            if c < 1:
                raise DatasetError("n_clusters must be positive")
        object.__setattr__(self, "n_clusters", c)

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def n_samples(self) -> int:
        return self.views[0].shape[1]

    @property
    def dims(self) -> list:
        return [X.shape[0] for X in self.views]

    def select_views(self, indices: Sequence[int]) -> "MultiViewDataset":
        return MultiViewDataset(
            views=[self.views[i] for i in indices],
            view_names=[self.view_names[i] for i in indices],
            labels=self.labels,
            n_clusters=self.n_clusters,
        )


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a union-of-subspaces multi-view dataset.

    Every view draws its own random subspace per cluster, so cluster
    membership is shared across views while the geometry is not.
    """

    n_clusters: int
    samples_per_cluster: int
    subspace_dim: int
    ambient_dims: tuple
    noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    outlier_views: tuple = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ambient_dims", tuple(int(d) for d in self.ambient_dims))
        object.__setattr__(self, "outlier_views", tuple(int(v) for v in self.outlier_views))
        if self.n_clusters < 1 or self.samples_per_cluster < 1 or self.subspace_dim < 1:
            raise DatasetError("n_clusters, samples_per_cluster and subspace_dim must be positive")
        if not self.ambient_dims or min(self.ambient_dims) < 1:
            raise DatasetError("ambient_dims must be a nonempty list of positive integers")
        if self.subspace_dim >= min(self.ambient_dims):
            raise DatasetError(
                f"subspace_dim={self.subspace_dim} must be < min(ambient_dims)={min(self.ambient_dims)}")
        if self.noise_sigma < 0:
            raise DatasetError("noise_sigma must be nonnegative")
        if not 0 <= self.outlier_fraction < 1:
            raise DatasetError("outlier_fraction must lie in [0, 1)")
        m = len(self.ambient_dims)
        for v in self.outlier_views:
            if not 0 <= v < m:
                raise DatasetError(f"outlier view {v} out of range for {m} views")
        if self.seed < 0:
            raise DatasetError("seed must be unsigned")

    @property
    def n_samples(self) -> int:
        return self.n_clusters * self.samples_per_cluster

    @property
    def n_outliers(self) -> int:
        return int(round(self.outlier_fraction * self.n_samples))


def generate_synthetic(spec: SyntheticSpec):
    """Draw a dataset from ``spec``.

    Returns
    -------
    dataset : MultiViewDataset
    outliers : ndarray of int
        Sorted column indices replaced by random unit vectors in every view
        listed in ``spec.outlier_views``.
    """
    rng = np.random.default_rng(spec.seed)
    n, k, c = spec.n_samples, spec.samples_per_cluster, spec.n_clusters
    labels = np.repeat(np.arange(c), k)

    views = []
    for d in spec.ambient_dims:
        X = np.empty((d, n))
        for i in range(c):
            basis, _ = np.linalg.qr(rng.standard_normal((d, spec.subspace_dim)))
            coef = rng.standard_normal((spec.subspace_dim, k))
            X[:, i * k:(i + 1) * k] = basis @ coef
        if spec.noise_sigma > 0:
            X += spec.noise_sigma * rng.standard_normal((d, n))
        views.append(X)

    outliers = np.sort(rng.choice(n, size=spec.n_outliers, replace=False))
    for v in spec.outlier_views:
        d = spec.ambient_dims[v]
        junk = rng.standard_normal((d, outliers.size))
        views[v][:, outliers] = junk / np.linalg.norm(junk, axis=0)

    ds = MultiViewDataset(views=views, labels=labels, n_clusters=c)
    return ds, outliers


def normalize_unit_l2(dataset: MultiViewDataset) -> MultiViewDataset:
    """Scale every column of every view to unit Euclidean norm."""
    out = []
    for v, X in enumerate(dataset.views):
        norms = np.linalg.norm(X, axis=0)
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            raise DatasetError(
                f"view {v} ({dataset.view_names[v]}): column {zero[0]} has zero norm")
        out.append(X / norms)
    return MultiViewDataset(views=out, view_names=dataset.view_names,
                            labels=dataset.labels, n_clusters=dataset.n_clusters)


# -- on-disk format ---------------------------------------------------------

def _read_matrix_csv(path: Path) -> np.ndarray:
    if not path.is_file():
        raise DatasetError(f"missing file: {path}")
    rows = []
    with open(path, newline="") as fh:
        for r, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    x = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: non-numeric cell {cell!r} at row {r}, column {col}") from None
                if not math.isfinite(x):
                    raise DatasetError(f"{path}: non-finite cell at row {r}, column {col}")
                vals.append(x)
            if rows and len(vals) != len(rows[0]):
                raise DatasetError(
                    f"{path}: row {r} has {len(vals)} columns, expected {len(rows[0])}")
            rows.append(vals)
    if not rows:
        raise DatasetError(f"{path}: empty matrix file")
    return np.array(rows, dtype=np.float64)


def _read_labels(path: Path) -> np.ndarray:
    if not path.is_file():
        raise DatasetError(f"missing file: {path}")
    labels = []
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            try:
                labels.append(int(s))
            except ValueError:
                raise DatasetError(f"{path}: non-integer label {s!r} at line {i}") from None
    return np.array(labels, dtype=np.int64)


def load_dataset(manifest_path) -> MultiViewDataset:
    """Load a dataset from a JSON manifest.

    The manifest lists ``views: [{name, path}]`` and optionally
    ``labels_path`` and ``n_clusters``. Relative paths resolve against the
    manifest's directory.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise DatasetError(f"missing file: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{manifest_path}: invalid JSON ({exc})") from None
    if not isinstance(manifest, dict) or not manifest.get("views"):
        raise DatasetError(f"{manifest_path}: manifest needs a nonempty 'views' list")
    base = manifest_path.parent

    views, names = [], []
    for i, entry in enumerate(manifest["views"]):
        if "path" not in entry:
            raise DatasetError(f"{manifest_path}: view entry {i} has no 'path'")
        views.append(_read_matrix_csv(base / entry["path"]))
        names.append(str(entry.get("name", f"view{i}")))
    counts = [X.shape[1] for X in views]
    if len(set(counts)) != 1:
        detail = ", ".join(f"{nm}={c}" for nm, c in zip(names, counts))
        raise DatasetError(f"{manifest_path}: column count mismatch across views ({detail})")

    labels = None
    if manifest.get("labels_path"):
        lpath = base / manifest["labels_path"]
        labels = _read_labels(lpath)
        if labels.size != counts[0]:
            raise DatasetError(f"{lpath}: expected {counts[0]} labels, found {labels.size}")
        c = manifest.get("n_clusters")
        if c is not None:
            bad = np.flatnonzero((labels < 0) | (labels >= c))
            if bad.size:
                raise DatasetError(
                    f"{lpath}: label {labels[bad[0]]} at line {bad[0] + 1} out of range [0, {c})")
    try:
        return MultiViewDataset(views=views, view_names=names, labels=labels,
                                n_clusters=manifest.get("n_clusters"))
    except DatasetError as exc:
        raise DatasetError(f"{manifest_path}: {exc}") from None


def save_matrix_csv(path, X: np.ndarray) -> None:
    # %.17g round-trips doubles exactly
    np.savetxt(path, np.asarray(X), delimiter=",", fmt="%.17g")


def save_dataset(dataset: MultiViewDataset, directory, stem: str = "view") -> Path:
    """Write ``dataset`` as a manifest plus per-view CSVs. Returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for v, (name, X) in enumerate(zip(dataset.view_names, dataset.views)):
        fname = f"{stem}{v}.csv"
        save_matrix_csv(directory / fname, X)
        entries.append({"name": name, "path": fname})
    manifest = {"views": entries}
    if dataset.labels is not None:
        (directory / "labels.txt").write_text("".join(f"{int(y)}\n" for y in dataset.labels))
        manifest["labels_path"] = "labels.txt"
    if dataset.n_clusters is not None:
        manifest["n_clusters"] = dataset.n_clusters
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path
