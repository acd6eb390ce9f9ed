"""K-means family, fixed-centroid assignment, and cluster validity scoring.

Everything here is seeded and deterministic: k-means++ initialization draws
from a caller-supplied seed, ties break toward the lowest index, and empty
clusters are repaired by reseeding on the point farthest from its centroid.
Fitting is single-threaded; fitted results are immutable.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ArgumentError,
    ConfigError,
    EmptyClusterError,
    UndefinedScoreError,
)
from .linalg import pca_fit, pca_transform, pca_truncate

DEFAULT_K = 14
DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class CentroidSet:
    """Labeled cluster centers, either corpus-fitted or externally supplied.

    ``texts`` carries the sentence each centroid came from: the combined
    topic sentence for fixed centroids, the nearest member sentence for
    fitted ones. ``space`` is "raw" or "pca:<n_comp>".
    """

    mode: str                      # "pdc" | "kmeans"
    labels: tuple[str, ...]
    centroids: np.ndarray          # (k, d)
    space: str = "raw"
    texts: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.mode not in ("pdc", "kmeans"):
            raise ArgumentError(f"mode must be 'pdc' or 'kmeans', got {self.mode!r}")
        if len(self.labels) != self.centroids.shape[0]:
            raise ArgumentError(
                f"{len(self.labels)} labels for {self.centroids.shape[0]} centroids"
            )
        if self.texts is not None and len(self.texts) != len(self.labels):
            raise ArgumentError("texts must align with labels")

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def dim(self) -> int:
        return int(self.centroids.shape[1])


@dataclass(frozen=True)
class ClusteringResult:
    assignments: np.ndarray        # (n,) int
    centroids: CentroidSet
    inertia: float
    iterations: int
    seed: int
    inertia_history: tuple[float, ...] = ()


def _as_matrix(data) -> np.ndarray:
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        x = np.vstack([np.asarray(row, dtype=np.float64) for row in data])
    if x.shape[0] == 0:
        raise ArgumentError("data must be nonempty")
    return x


def _squared_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(n, k) matrix of squared Euclidean distances.

    Computed one centroid at a time from explicit differences: memory stays
    at O(n*d) and the values are as exact as the inputs allow, which the
    monotonicity guarantees of Lloyd iterations rely on.
    """
    n, k = x.shape[0], centers.shape[0]
    sq = np.empty((n, k), dtype=np.float64)
    for j in range(k):
        diff = x - centers[j]
        sq[:, j] = np.einsum("nd,nd->n", diff, diff)
    return sq


def _cluster_labels(k: int) -> tuple[str, ...]:
    return tuple(f"cluster-{i:02d}" for i in range(k))


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    first = int(rng.integers(0, n))
    centers[0] = x[first]
    closest_sq = np.sum((x - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = closest_sq.sum()
        if total <= 0.0:
            idx = int(rng.integers(0, n))
        else:
            idx = int(rng.choice(n, p=closest_sq / total))
        centers[i] = x[idx]
        closest_sq = np.minimum(closest_sq, np.sum((x - centers[i]) ** 2, axis=1))
    return centers


def _repair_empty_clusters(
    x: np.ndarray, centers: np.ndarray, assignments: np.ndarray
) -> np.ndarray:
    """Reseed each empty cluster on the point farthest from its own centroid."""
    centers = centers.copy()
    counts = np.bincount(assignments, minlength=centers.shape[0])
    if np.all(counts > 0):
        return centers
    point_sq = np.sum((x - centers[assignments]) ** 2, axis=1)
    taken: set[int] = set()
    for cluster in np.nonzero(counts == 0)[0]:
        order = np.argsort(-point_sq, kind="stable")
        for idx in order:
            if int(idx) not in taken:
                break
        taken.add(int(idx))
        centers[cluster] = x[idx]
        point_sq[idx] = 0.0
    return centers


def kmeans_fit(
    data,
    k: int,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    space: str = "raw",
) -> ClusteringResult:
    """Lloyd's algorithm with k-means++ initialization.

    Iterates until the largest centroid displacement falls below ``tol`` or
    ``max_iter`` is reached. Inertia is recorded after every assignment
    step and is nonincreasing across iterations.
    """
    x = _as_matrix(data)
    n = x.shape[0]
    if k < 1 or k > n:
        raise ArgumentError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(x, k, rng)
    history: list[float] = []
    assignments = np.zeros(n, dtype=np.int64)
    iterations = 0
    for iteration in range(1, max_iter + 1):
        iterations = iteration
        sq = _squared_distances(x, centers)
        assignments = np.argmin(sq, axis=1)
        history.append(float(np.sum(sq[np.arange(n), assignments])))
        new_centers = centers.copy()
        for cluster in range(k):
            members = assignments == cluster
            if np.any(members):
                new_centers[cluster] = x[members].mean(axis=0)
        new_centers = _repair_empty_clusters(x, new_centers, assignments)
        shift = float(np.max(np.sqrt(np.sum((new_centers - centers) ** 2, axis=1))))
        centers = new_centers
        if shift < tol:
            break
    sq = _squared_distances(x, centers)
    assignments = np.argmin(sq, axis=1)
    inertia = float(np.sum(sq[np.arange(n), assignments]))
    history.append(inertia)
    centroid_set = CentroidSet(
        mode="kmeans", labels=_cluster_labels(k), centroids=centers, space=space
    )
    return ClusteringResult(
        assignments=assignments,
        centroids=centroid_set,
        inertia=inertia,
        iterations=iterations,
        seed=seed,
        inertia_history=tuple(history),
    )


def minibatch_kmeans_fit(
    data,
    k: int,
    seed: int = 0,
    batch_size: int = 64,
    max_iter: int = DEFAULT_MAX_ITER,
    space: str = "raw",
) -> ClusteringResult:
    """Mini-batch k-means: per-batch updates with per-centroid rate 1/count.

    Each iteration samples one batch, assigns it against the centroids
    frozen at batch start, then walks the batch moving each centroid toward
    its members with a step of one over that centroid's cumulative count.
    With ``batch_size == len(data)`` the first iteration reproduces a full
    Lloyd update.
    """
    x = _as_matrix(data)
    n = x.shape[0]
    if k < 1 or k > n:
        raise ArgumentError(f"k must be in [1, {n}], got {k}")
    if not 1 <= batch_size <= n:
        raise ArgumentError(f"batch_size must be in [1, {n}], got {batch_size}")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(x, k, rng)
    counts = np.zeros(k, dtype=np.int64)
    for _ in range(max_iter):
        batch_idx = rng.choice(n, size=batch_size, replace=False)
        batch = x[batch_idx]
        batch_assign = np.argmin(_squared_distances(batch, centers), axis=1)
        for point, cluster in zip(batch, batch_assign):
            counts[cluster] += 1
            eta = 1.0 / counts[cluster]
            centers[cluster] = (1.0 - eta) * centers[cluster] + eta * point
    sq = _squared_distances(x, centers)
    assignments = np.argmin(sq, axis=1)
    inertia = float(np.sum(sq[np.arange(n), assignments]))
    centroid_set = CentroidSet(
        mode="kmeans", labels=_cluster_labels(k), centroids=centers, space=space
    )
    return ClusteringResult(
        assignments=assignments,
        centroids=centroid_set,
        inertia=inertia,
        iterations=max_iter,
        seed=seed,
    )


def pdc_assign(data, centroids: CentroidSet) -> ClusteringResult:
    """Assign every point to its nearest fixed centroid (lowest index on ties)."""
    x = _as_matrix(data)
    if x.shape[1] != centroids.dim:
        raise ArgumentError(
            f"data dim {x.shape[1]} does not match centroid dim {centroids.dim}"
        )
    sq = _squared_distances(x, centroids.centroids)
    assignments = np.argmin(sq, axis=1)
    inertia = float(np.sum(sq[np.arange(x.shape[0]), assignments]))
    return ClusteringResult(
        assignments=assignments,
        centroids=centroids,
        inertia=inertia,
        iterations=0,
        seed=0,
    )


def silhouette_score(data, assignments) -> float:
    """Mean silhouette over all points.

    For each point, a is its mean distance to other members of its own
    cluster and b the smallest mean distance to any other cluster; the
    point scores (b - a) / max(a, b). Points in singleton clusters score 0,
    as do points where a and b are both 0.
    """
    x = _as_matrix(data)
    labels = np.asarray(assignments, dtype=np.int64)
    if labels.shape[0] != x.shape[0]:
        raise ArgumentError("assignments must align with data")
    unique, cluster_of = np.unique(labels, return_inverse=True)
    if unique.size < 2:
        raise UndefinedScoreError(
            "silhouette is undefined when the data forms fewer than 2 clusters"
        )
    n = x.shape[0]
    n_clusters = unique.size
    counts = np.bincount(cluster_of, minlength=n_clusters).astype(np.float64)
    membership = np.zeros((n, n_clusters), dtype=np.float64)
    membership[np.arange(n), cluster_of] = 1.0
    sq_norms = np.einsum("nd,nd->n", x, x)
    scores = np.zeros(n, dtype=np.float64)
    chunk = 512
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = x[start:stop]
        # ||p - q||^2 expansion; clip tiny negatives from cancellation
        sq = sq_norms[start:stop, None] + sq_norms[None, :] - 2.0 * (block @ x.T)
        dist = np.sqrt(np.clip(sq, 0.0, None))
        cluster_sums = dist @ membership  # (chunk, n_clusters)
        own = cluster_of[start:stop]
        rows = np.arange(stop - start)
        own_counts = counts[own]
        singleton = own_counts <= 1.0
        a = cluster_sums[rows, own] / np.where(singleton, 1.0, own_counts - 1.0)
        mean_to_cluster = cluster_sums / counts[None, :]
        mean_to_cluster[rows, own] = np.inf
        b = mean_to_cluster.min(axis=1)
        denom = np.maximum(a, b)
        block_scores = np.where(denom > 0.0, (b - a) / np.where(denom > 0.0, denom, 1.0), 0.0)
        scores[start:stop] = np.where(singleton, 0.0, block_scores)
    return float(scores.mean())


def pseudo_centroids(result: ClusteringResult, data, texts: Sequence[str]) -> CentroidSet:
    """Replace each mean centroid with its nearest actual member vector.

    The returned set is labeled cluster-00..cluster-NN and carries the
    member sentences as texts. Ties go to the lowest data index.
    """
    x = _as_matrix(data)
    texts = list(texts)
    if len(texts) != x.shape[0]:
        raise ArgumentError(f"{len(texts)} texts for {x.shape[0]} vectors")
    if result.assignments.shape[0] != x.shape[0]:
        raise ArgumentError("result does not describe this data")
    k = result.centroids.k
    chosen_vectors = np.empty_like(result.centroids.centroids)
    chosen_texts: list[str] = []
    for cluster in range(k):
        member_idx = np.nonzero(result.assignments == cluster)[0]
        if member_idx.size == 0:
            raise EmptyClusterError(cluster)
        center = result.centroids.centroids[cluster]
        sq = np.sum((x[member_idx] - center) ** 2, axis=1)
        best = member_idx[int(np.argmin(sq))]
        chosen_vectors[cluster] = x[best]
        chosen_texts.append(texts[best])
    return CentroidSet(
        mode="kmeans",
        labels=_cluster_labels(k),
        centroids=chosen_vectors,
        space=result.centroids.space,
        texts=tuple(chosen_texts),
    )


FAILED = "FAILED"

SWEEP_ALGORITHMS = ("kmeans", "minibatch_kmeans", "pdc")


def silhouette_sweep(
    data,
    algorithms: Sequence[str],
    n_comp_values: Sequence[int],
    k: int = DEFAULT_K,
    seed: int = 0,
    pdc_centroids: np.ndarray | None = None,
    batch_size: int = 64,
    out_csv: Path | None = None,
) -> list[tuple[str, int, float | str]]:
    """Score each (algorithm, n_comp) combination after PCA reduction.

    Runs that collapse to a single cluster are recorded with the literal
    FAILED value rather than raising. When requested, writes a CSV with
    columns algorithm,n_comp,silhouette.
    """
    x = _as_matrix(data)
    for algorithm in algorithms:
        if algorithm not in SWEEP_ALGORITHMS:
            raise ArgumentError(f"unknown algorithm {algorithm!r}")
        if algorithm == "pdc" and pdc_centroids is None:
            raise ArgumentError("pdc requires pdc_centroids")
    rows: list[tuple[str, int, float | str]] = []
    # one full-rank decomposition serves every n_comp: truncation is
    # identical to refitting with a smaller component count
    full_model = pca_fit(x, min(x.shape[0], x.shape[1]))
    for n_comp in n_comp_values:
        model = pca_truncate(full_model, n_comp)
        reduced = pca_transform(model, x)
        for algorithm in algorithms:
            if algorithm == "kmeans":
                result = kmeans_fit(reduced, k=k, seed=seed, space=f"pca:{n_comp}")
            elif algorithm == "minibatch_kmeans":
                result = minibatch_kmeans_fit(
                    reduced,
                    k=k,
                    seed=seed,
                    batch_size=min(batch_size, reduced.shape[0]),
                    space=f"pca:{n_comp}",
                )
            else:
                reduced_centers = pca_transform(model, pdc_centroids)
                centroid_set = CentroidSet(
                    mode="pdc",
                    labels=tuple(f"topic-{i:02d}" for i in range(reduced_centers.shape[0])),
                    centroids=reduced_centers,
                    space=f"pca:{n_comp}",
                )
                result = pdc_assign(reduced, centroid_set)
            try:
                score: float | str = silhouette_score(reduced, result.assignments)
            except UndefinedScoreError:
                score = FAILED
            rows.append((algorithm, int(n_comp), score))
    if out_csv is not None:
        write_sweep_csv(rows, out_csv)
    return rows


def write_sweep_csv(rows: Sequence[tuple[str, int, float | str]], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["algorithm", "n_comp", "silhouette"])
        for algorithm, n_comp, score in rows:
            value = score if isinstance(score, str) else f"{score:.4f}"
            writer.writerow([algorithm, n_comp, value])


def save_centroids(centroids: CentroidSet, descriptor, path: Path) -> None:
    """Persist a centroid set in the store's JSONL shape plus per-row labels."""
    path = Path(path)
    header = {
        "provider_id": descriptor.provider_id,
        "model_id": descriptor.model_id,
        "dim": centroids.dim,
        "mode": centroids.mode,
        "space": centroids.space,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for i, label in enumerate(centroids.labels):
            record = {
                "label": label,
                "text": centroids.texts[i] if centroids.texts else "",
                "vector": [float(v) for v in centroids.centroids[i]],
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_centroids(path: Path):
    """Load a persisted centroid set; returns (CentroidSet, header dict)."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
            mode = header["mode"]
            space = header["space"]
            dim = int(header["dim"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"centroid file {path} has a malformed header: {exc}") from exc
        labels: list[str] = []
        texts: list[str] = []
        vectors: list[np.ndarray] = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                labels.append(record["label"])
                texts.append(record.get("text", ""))
                vector = np.asarray(record["vector"], dtype=np.float64)
            except (ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"centroid file {path} line {lineno} is malformed: {exc}") from exc
            if vector.shape != (dim,):
                raise ConfigError(
                    f"centroid file {path} line {lineno} has dim {vector.shape[0]}, header says {dim}"
                )
            vectors.append(vector)
    if not vectors:
        raise ConfigError(f"centroid file {path} contains no centroids")
    centroid_set = CentroidSet(
        mode=mode,
        labels=tuple(labels),
        centroids=np.vstack(vectors),
        space=space,
        texts=tuple(texts),
    )
    return centroid_set, header
