"""The extractive summarization pipeline.

A summary is built by embedding every document sentence (through the
cache-through store when one is supplied), measuring Euclidean distance to
each centroid, and keeping the n_best nearest sentences per centroid. A
sentence may appear under several topics; nothing deduplicates across
topics. Distances are computed in raw embedding space unless the request
asks for a PCA space explicitly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .clustering import CentroidSet
from .corpus import Document, fetch_document
from .embedding import EmbeddingStore, store_get_or_embed
from .errors import ArgumentError, CentroidMismatchError, EmptyDocumentError
from .linalg import PcaModel, pca_transform


@dataclass(frozen=True)
class SummaryRequest:
    source: str
    mode: str = "pdc"              # "pdc" | "kmeans"
    n_best: int = 1
    space: str = "raw"             # "raw" | "pca:<n_comp>"

    def __post_init__(self):
        if self.mode not in ("pdc", "kmeans"):
            raise ArgumentError(f"mode must be 'pdc' or 'kmeans', got {self.mode!r}")
        if self.n_best < 1:
            raise ArgumentError(f"n_best must be >= 1, got {self.n_best}")


@dataclass(frozen=True)
class Pick:
    text: str
    distance: float


@dataclass(frozen=True)
class TopicSummary:
    label: str
    picks: tuple[Pick, ...]
    gloss: str | None = None


@dataclass(frozen=True)
class SummaryStats:
    input_sentence_count: int
    output_sentence_count: int
    reduction_ratio: float


@dataclass(frozen=True)
class Summary:
    source: str
    mode: str
    n_best: int
    topics: tuple[TopicSummary, ...]
    stats: SummaryStats
    space: str = "raw"


def rank_against_centroid(sent_vecs, centroid: np.ndarray) -> list[tuple[int, float]]:
    """All (sentence index, distance) pairs sorted ascending by distance.

    The sort is stable: equal distances keep sentence-index order.
    """
    matrix = np.asarray(sent_vecs, dtype=np.float64)
    if matrix.ndim != 2:
        matrix = np.vstack([np.asarray(v, dtype=np.float64) for v in sent_vecs])
    centroid = np.asarray(centroid, dtype=np.float64)
    if matrix.shape[1] != centroid.shape[0]:
        raise ArgumentError(
            f"vector dim {matrix.shape[1]} does not match centroid dim {centroid.shape[0]}"
        )
    diff = matrix - centroid
    distances = np.sqrt(np.einsum("nd,nd->n", diff, diff))
    order = np.argsort(distances, kind="stable")
    return [(int(i), float(distances[i])) for i in order]


def summarize(
    request: SummaryRequest,
    provider,
    centroids: CentroidSet,
    document: Document | None = None,
    store: EmbeddingStore | None = None,
    pca: PcaModel | None = None,
    fetch_policy: str = "fixture-only",
) -> Summary:
    """Rank every document sentence against every centroid and keep the best.

    Deterministic for fixed inputs. The centroid set's mode must match the
    request; when the request names a PCA space, both sides of the distance
    are projected with the supplied model. When no document is passed, the
    request's source is fetched under ``fetch_policy``.
    """
    if centroids.mode != request.mode:
        raise CentroidMismatchError(
            f"request mode {request.mode!r} but centroids are {centroids.mode!r}"
        )
    if document is None:
        document = fetch_document(request.source, fetch_policy=fetch_policy)
    texts = document.texts
    if not texts:
        raise EmptyDocumentError(f"document {document.source} has no sentences")

    if store is not None:
        vectors = store_get_or_embed(store, texts, provider)
    else:
        vectors = provider.embed(texts)
    matrix = np.vstack(vectors)

    centroid_matrix = centroids.centroids
    if request.space.startswith("pca"):
        if pca is None:
            raise ArgumentError("request names a PCA space but no model was supplied")
        matrix = pca_transform(pca, matrix)
        if centroids.space == "raw":
            centroid_matrix = pca_transform(pca, centroid_matrix)
        elif centroids.space != request.space:
            raise CentroidMismatchError(
                f"centroids live in {centroids.space!r}, request wants {request.space!r}"
            )
    elif centroids.space != "raw":
        raise CentroidMismatchError(
            f"centroids live in {centroids.space!r} but the request is raw-space"
        )
    if matrix.shape[1] != centroid_matrix.shape[1]:
        raise CentroidMismatchError(
            f"sentence dim {matrix.shape[1]} does not match centroid dim {centroid_matrix.shape[1]}"
        )

    n = len(texts)
    take = min(request.n_best, n)
    topics: list[TopicSummary] = []
    for i, label in enumerate(centroids.labels):
        ranked = rank_against_centroid(matrix, centroid_matrix[i])
        picks = tuple(Pick(text=texts[idx], distance=dist) for idx, dist in ranked[:take])
        gloss = None
        if centroids.mode == "kmeans" and centroids.texts:
            gloss = centroids.texts[i]
        topics.append(TopicSummary(label=label, picks=picks, gloss=gloss))

    output_count = sum(len(t.picks) for t in topics)
    stats = SummaryStats(
        input_sentence_count=n,
        output_sentence_count=output_count,
        reduction_ratio=1.0 - output_count / n,
    )
    return Summary(
        source=document.source,
        mode=request.mode,
        n_best=request.n_best,
        topics=tuple(topics),
        stats=stats,
        space=request.space,
    )


def load_random_pool() -> list[str]:
    raw = resources.files("policysum.data").joinpath("random_pool.txt").read_text("utf-8")
    return [line.strip() for line in raw.splitlines() if line.strip()]


def random_baseline_summary(
    n: int,
    seed: int,
    sentence_pool: list[str] | None = None,
    labels: tuple[str, ...] | None = None,
) -> Summary:
    """A summary-shaped document of ``n`` pool sentences sampled without replacement.

    Used only as the evaluation baseline; distances are reported as zero.
    Sentences are distributed round-robin over the supplied topic labels.
    """
    pool = sentence_pool if sentence_pool is not None else load_random_pool()
    if n > len(pool):
        raise ArgumentError(f"pool of {len(pool)} sentences cannot supply {n}")
    rng = np.random.default_rng(seed)
    indices = rng.choice(len(pool), size=n, replace=False)
    chosen = [pool[int(i)] for i in indices]
    if labels is None:
        labels = tuple(f"random-{i:02d}" for i in range(min(n, 14)))
    buckets: list[list[Pick]] = [[] for _ in labels]
    for i, text in enumerate(chosen):
        buckets[i % len(labels)].append(Pick(text=text, distance=0.0))
    topics = tuple(
        TopicSummary(label=label, picks=tuple(bucket))
        for label, bucket in zip(labels, buckets)
    )
    stats = SummaryStats(
        input_sentence_count=len(pool),
        output_sentence_count=n,
        reduction_ratio=1.0 - n / len(pool),
    )
    return Summary(
        source="random-baseline",
        mode="random",
        n_best=max(1, (n + len(labels) - 1) // len(labels)),
        topics=topics,
        stats=stats,
    )


def summary_sentences(summary: Summary) -> list[str]:
    """Flatten a summary's picks in topic order (duplicates preserved)."""
    return [pick.text for topic in summary.topics for pick in topic.picks]


def summary_to_json(summary: Summary) -> str:
    """Serialize a summary to the structured document shape, distances with
    four decimal places, keys sorted so identical summaries are identical bytes."""
    payload = {
        "source": summary.source,
        "mode": summary.mode,
        "n_best": summary.n_best,
        "space": summary.space,
        "stats": {
            "input_sentence_count": summary.stats.input_sentence_count,
            "output_sentence_count": summary.stats.output_sentence_count,
            "reduction_ratio": round(summary.stats.reduction_ratio, 4),
        },
        "topics": [
            {
                "label": topic.label,
                **({"gloss": topic.gloss} if topic.gloss else {}),
                "picks": [
                    {"text": pick.text, "distance": round(pick.distance, 4)}
                    for pick in topic.picks
                ],
            }
            for topic in summary.topics
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_summary(summary: Summary, path: Path) -> None:
    Path(path).write_text(summary_to_json(summary), encoding="utf-8", newline="\n")
