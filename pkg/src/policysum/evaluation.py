"""Summary evaluation: squared-distance totals and ROUGE overlap metrics.

SSD pivots on the 14 topic headers; ROUGE references the combined sample
sentences. That asymmetry is deliberate and mirrors how each metric is
defined. ROUGE tokenization is lowercase alphanumeric runs with no
stemming or stopword removal; pass a different tokenizer to change that.
All metric functions are pure.
"""

from __future__ import annotations

import csv
import math
import re
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .clustering import CentroidSet
from .corpus import GdprTopics, fetch_document, load_gdpr_topics
from .errors import ArgumentError, PolicySumError
from .linalg import PcaModel
from .summarizer import (
    Summary,
    SummaryRequest,
    random_baseline_summary,
    summarize,
    summary_sentences,
)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def rouge_tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Score:
    precision: float
    recall: float
    f: float


def _prf(precision: float, recall: float) -> Score:
    if precision + recall > 0.0:
        f = 2.0 * precision * recall / (precision + recall)
    else:
        f = 0.0
    return Score(precision=precision, recall=recall, f=f)


@dataclass(frozen=True)
class RougeScores:
    r1: Score
    r2: Score
    rl: Score
    rw: Score
    mean_r1_rl: float


@dataclass(frozen=True)
class SsdTopicEntry:
    topic: str
    best_sentence: str
    squared_distance: float


@dataclass(frozen=True)
class SsdReport:
    per_topic: tuple[SsdTopicEntry, ...]
    total: float


@dataclass(frozen=True)
class EvalRow:
    company: str
    model: str                     # "random" | "pdc" | "kmeans" | "gdpr"
    ssd: float
    rouge: RougeScores | None = None
    error: str | None = None


def ssd_evaluate(topic_texts: Sequence[str], summary_sentences: Sequence[str], provider) -> SsdReport:
    """Per topic, the smallest squared Euclidean distance to any summary sentence.

    Topic texts and summary sentences are embedded with the same provider;
    the per-topic minima sum to the report total.
    """
    if not summary_sentences:
        raise ArgumentError("summary_sentences must be nonempty")
    topic_vecs = np.vstack(provider.embed(list(topic_texts)))
    sentence_vecs = np.vstack(provider.embed(list(summary_sentences)))
    entries = []
    total = 0.0
    for i, topic in enumerate(topic_texts):
        diff = sentence_vecs - topic_vecs[i]
        sq = np.einsum("nd,nd->n", diff, diff)
        best = int(np.argmin(sq))
        entries.append(
            SsdTopicEntry(
                topic=topic,
                best_sentence=summary_sentences[best],
                squared_distance=float(sq[best]),
            )
        )
        total += float(sq[best])
    return SsdReport(per_topic=tuple(entries), total=total)


def _ngram_counts(tokens: Sequence[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i:i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def rouge_n(
    reference: str,
    hypothesis: str,
    n: int,
    tokenizer: Callable[[str], list[str]] = rouge_tokenize,
) -> Score:
    """Clipped n-gram overlap: precision over hypothesis grams, recall over
    reference grams. Zero denominators yield zero scores."""
    if n < 1:
        raise ArgumentError(f"n must be >= 1, got {n}")
    ref_counts = _ngram_counts(tokenizer(reference), n)
    hyp_counts = _ngram_counts(tokenizer(hypothesis), n)
    overlap = sum(min(count, ref_counts.get(gram, 0)) for gram, count in hyp_counts.items())
    hyp_total = sum(hyp_counts.values())
    ref_total = sum(ref_counts.values())
    precision = overlap / hyp_total if hyp_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    return _prf(precision, recall)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    m, n = len(a), len(b)
    prev = [0] * (n + 1)
    for i in range(1, m + 1):
        current = [0] * (n + 1)
        ai = a[i - 1]
        for j in range(1, n + 1):
            if ai == b[j - 1]:
                current[j] = prev[j - 1] + 1
            elif prev[j] >= current[j - 1]:
                current[j] = prev[j]
            else:
                current[j] = current[j - 1]
        prev = current
    return prev[n]


def rouge_l(
    reference: str,
    hypothesis: str,
    tokenizer: Callable[[str], list[str]] = rouge_tokenize,
) -> Score:
    """Longest-common-subsequence overlap at token level."""
    ref = tokenizer(reference)
    hyp = tokenizer(hypothesis)
    if not ref or not hyp:
        return Score(0.0, 0.0, 0.0)
    lcs = _lcs_length(ref, hyp)
    return _prf(lcs / len(hyp), lcs / len(ref))


def _wlcs_value(a: Sequence[str], b: Sequence[str], weight: float) -> float:
    m, n = len(a), len(b)
    vals = [[0.0] * (n + 1) for _ in range(m + 1)]
    runs = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        ai = a[i - 1]
        for j in range(1, n + 1):
            if ai == b[j - 1]:
                k = runs[i - 1][j - 1]
                vals[i][j] = vals[i - 1][j - 1] + (k + 1) ** weight - k ** weight
                runs[i][j] = k + 1
            elif vals[i - 1][j] >= vals[i][j - 1]:
                vals[i][j] = vals[i - 1][j]
            else:
                vals[i][j] = vals[i][j - 1]
    return vals[m][n]


def rouge_w(
    reference: str,
    hypothesis: str,
    weight: float = 1.0,
    tokenizer: Callable[[str], list[str]] = rouge_tokenize,
) -> Score:
    """Weighted LCS: a consecutive run of k matches is worth k**weight.

    Scores are inverse-normalized by the weighting function of the
    reference and hypothesis lengths, so weight 1.0 coincides with the
    plain LCS scores.
    """
    if weight < 1.0:
        raise ArgumentError(f"weight must be >= 1, got {weight}")
    ref = tokenizer(reference)
    hyp = tokenizer(hypothesis)
    if not ref or not hyp:
        return Score(0.0, 0.0, 0.0)
    wlcs = _wlcs_value(ref, hyp, weight)
    inverse = 1.0 / weight
    precision = (wlcs / len(hyp) ** weight) ** inverse
    recall = (wlcs / len(ref) ** weight) ** inverse
    return _prf(precision, recall)


def rouge_all(reference: str, hypothesis: str, weight: float = 1.0) -> RougeScores:
    r1 = rouge_n(reference, hypothesis, 1)
    r2 = rouge_n(reference, hypothesis, 2)
    rl = rouge_l(reference, hypothesis)
    rw = rouge_w(reference, hypothesis, weight)
    return RougeScores(r1=r1, r2=r2, rl=rl, rw=rw, mean_r1_rl=(r1.f + rl.f) / 2.0)


def _mean_scores(scores: list[Score]) -> Score:
    k = len(scores)
    return Score(
        precision=sum(s.precision for s in scores) / k,
        recall=sum(s.recall for s in scores) / k,
        f=sum(s.f for s in scores) / k,
    )


def rouge_evaluate(
    reference_sentences: Sequence[str], summary: Summary, weight: float = 1.0
) -> RougeScores:
    """Score each topic's concatenated picks against its reference sentence,
    then macro-average over topics."""
    if len(summary.topics) != len(reference_sentences):
        raise ArgumentError(
            f"summary has {len(summary.topics)} topics for {len(reference_sentences)} references"
        )
    per_topic: dict[str, list[Score]] = {"r1": [], "r2": [], "rl": [], "rw": []}
    for reference, topic in zip(reference_sentences, summary.topics):
        hypothesis = " ".join(pick.text for pick in topic.picks)
        per_topic["r1"].append(rouge_n(reference, hypothesis, 1))
        per_topic["r2"].append(rouge_n(reference, hypothesis, 2))
        per_topic["rl"].append(rouge_l(reference, hypothesis))
        per_topic["rw"].append(rouge_w(reference, hypothesis, weight))
    r1 = _mean_scores(per_topic["r1"])
    r2 = _mean_scores(per_topic["r2"])
    rl = _mean_scores(per_topic["rl"])
    rw = _mean_scores(per_topic["rw"])
    return RougeScores(r1=r1, r2=r2, rl=rl, rw=rw, mean_r1_rl=(r1.f + rl.f) / 2.0)


@dataclass(frozen=True)
class Aggregate:
    mean: float
    std_dev: float   # population standard deviation


@dataclass(frozen=True)
class BatchReport:
    rows: tuple[EvalRow, ...]
    ssd_aggregates: dict[str, Aggregate]
    rouge_aggregates: dict[str, Aggregate]   # of mean_r1_rl, per model


def _aggregate(values: list[float], population_std: bool = True) -> Aggregate:
    n = len(values)
    mean = sum(values) / n
    divisor = n if population_std else max(n - 1, 1)
    variance = sum((v - mean) ** 2 for v in values) / divisor
    return Aggregate(mean=mean, std_dev=math.sqrt(variance))


def batch_evaluate(
    manifest: Sequence[tuple[str, str]],
    modes: Sequence[str],
    provider,
    seed: int = 0,
    kmeans_centroids: CentroidSet | None = None,
    kmeans_pca: PcaModel | None = None,
    pdc_centroids: CentroidSet | None = None,
    topics: GdprTopics | None = None,
    n_best: int = 1,
    fetch_policy: str = "fixture-only",
    random_pool: list[str] | None = None,
    rouge_weight: float = 1.0,
    population_std: bool = True,
) -> BatchReport:
    """Summarize and score every manifest document under every model.

    Each document yields one row per model: the random baseline, each
    requested summarizer mode, and the fixed reference document whose SSD
    is constant across rows. Per-document failures become error-marked
    rows and the batch continues. Rows are sorted by company then model
    before aggregation so results do not depend on manifest order.
    Standard deviations divide by N (population) by default; pass
    ``population_std=False`` for the N-1 sample estimator.
    """
    if not manifest:
        raise ArgumentError("manifest must be nonempty")
    companies = [company for company, _ in manifest]
    if len(set(companies)) != len(companies):
        raise ArgumentError("manifest lists a company more than once")
    for mode in modes:
        if mode not in ("pdc", "kmeans"):
            raise ArgumentError(f"unknown mode {mode!r}")
    if "kmeans" in modes and kmeans_centroids is None:
        raise ArgumentError("kmeans mode requires fitted centroids")
    if (
        "kmeans" in modes
        and kmeans_centroids.space.startswith("pca")
        and kmeans_pca is None
    ):
        raise ArgumentError(
            f"kmeans centroids live in {kmeans_centroids.space} but no PCA model was supplied"
        )
    topics = topics or load_gdpr_topics()
    headers = topics.headers
    references = topics.combined_sentences
    labels = tuple(headers)
    if pdc_centroids is None and "pdc" in modes:
        vectors = np.vstack(provider.embed(references))
        pdc_centroids = CentroidSet(
            mode="pdc", labels=labels, centroids=vectors, texts=tuple(references)
        )

    gdpr_ssd = ssd_evaluate(headers, references, provider).total

    rows: list[EvalRow] = []
    for company, source in manifest:
        try:
            document = fetch_document(source, fetch_policy=fetch_policy)
            # key the baseline draw to the company so results do not depend
            # on manifest ordering
            doc_seed = seed + zlib.crc32(company.encode("utf-8"))
            baseline = random_baseline_summary(
                14 * n_best, doc_seed, sentence_pool=random_pool, labels=labels
            )
            per_model: list[tuple[str, Summary]] = [("random", baseline)]
            for mode in modes:
                centroids = pdc_centroids if mode == "pdc" else kmeans_centroids
                pca = kmeans_pca if mode == "kmeans" else None
                request = SummaryRequest(
                    source=source, mode=mode, n_best=n_best, space=centroids.space
                )
                per_model.append(
                    (mode, summarize(request, provider, centroids, document=document, pca=pca))
                )
            for model, summary in per_model:
                flat = summary_sentences(summary)
                ssd = ssd_evaluate(headers, flat, provider).total
                rouge = rouge_evaluate(references, summary, weight=rouge_weight)
                rows.append(EvalRow(company=company, model=model, ssd=ssd, rouge=rouge))
            rows.append(EvalRow(company=company, model="gdpr", ssd=gdpr_ssd))
        except PolicySumError as exc:
            for model in ["random", *modes, "gdpr"]:
                rows.append(
                    EvalRow(company=company, model=model, ssd=float("nan"), error=str(exc))
                )
    rows.sort(key=lambda row: (row.company, row.model))
    ssd_aggregates: dict[str, Aggregate] = {}
    rouge_aggregates: dict[str, Aggregate] = {}
    for model in ["random", *modes, "gdpr"]:
        ssd_values = [r.ssd for r in rows if r.model == model and r.error is None]
        if ssd_values:
            ssd_aggregates[model] = _aggregate(ssd_values, population_std)
        rouge_values = [
            r.rouge.mean_r1_rl for r in rows if r.model == model and r.rouge is not None
        ]
        if rouge_values:
            rouge_aggregates[model] = _aggregate(rouge_values, population_std)
    return BatchReport(
        rows=tuple(rows),
        ssd_aggregates=ssd_aggregates,
        rouge_aggregates=rouge_aggregates,
    )


_SSD_COLUMNS = ["random", "pdc", "kmeans", "gdpr_fixed"]
_MODEL_TO_COLUMN = {"random": "random", "pdc": "pdc", "kmeans": "kmeans", "gdpr": "gdpr_fixed"}


def write_ssd_csv(report: BatchReport, path: Path) -> None:
    """company,random,pdc,kmeans,gdpr_fixed with trailing mean and std rows."""
    by_company: dict[str, dict[str, str]] = {}
    for row in report.rows:
        column = _MODEL_TO_COLUMN[row.model]
        cell = "ERROR" if row.error is not None else f"{row.ssd:.4f}"
        by_company.setdefault(row.company, {})[column] = cell
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["company"] + _SSD_COLUMNS)
        for company in sorted(by_company):
            cells = by_company[company]
            writer.writerow([company] + [cells.get(col, "") for col in _SSD_COLUMNS])
        mean_row, std_row = ["mean"], ["std_dev"]
        for column in _SSD_COLUMNS:
            model = next(m for m, c in _MODEL_TO_COLUMN.items() if c == column)
            agg = report.ssd_aggregates.get(model)
            mean_row.append(f"{agg.mean:.4f}" if agg else "")
            std_row.append(f"{agg.std_dev:.4f}" if agg else "")
        writer.writerow(mean_row)
        writer.writerow(std_row)


def write_rouge_csv(report: BatchReport, path: Path) -> None:
    """company,model,r1_p,r1_r,r1_f,r2_f,rl_f,rw_f,mean_r1_rl (one row per scored model)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["company", "model", "r1_p", "r1_r", "r1_f", "r2_f", "rl_f", "rw_f", "mean_r1_rl"]
        )
        for row in report.rows:
            if row.error is not None:
                writer.writerow([row.company, row.model] + ["ERROR"] * 7)
                continue
            if row.rouge is None:
                continue
            r = row.rouge
            writer.writerow(
                [
                    row.company,
                    row.model,
                    f"{r.r1.precision:.4f}",
                    f"{r.r1.recall:.4f}",
                    f"{r.r1.f:.4f}",
                    f"{r.r2.f:.4f}",
                    f"{r.rl.f:.4f}",
                    f"{r.rw.f:.4f}",
                    f"{r.mean_r1_rl:.4f}",
                ]
            )


def write_plot_data(report: BatchReport, path: Path) -> None:
    """Long-form company,series,value rows for external charting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["company", "series", "value"])
        for row in report.rows:
            if row.error is not None:
                continue
            writer.writerow([row.company, f"ssd_{row.model}", f"{row.ssd:.4f}"])
            if row.rouge is not None:
                writer.writerow(
                    [row.company, f"rouge_mean_{row.model}", f"{row.rouge.mean_r1_rl:.4f}"]
                )
