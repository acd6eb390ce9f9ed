"""Command-line surface for one-shot runs and batch reproduction.

Exit codes: 0 success, 2 usage error, 3 data error, 4 network error.
All randomness flows from --seed; identical invocations over identical
inputs produce byte-identical outputs.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import clustering, corpus, evaluation, linalg, summarizer
from .embedding import EmbeddingStore, HashEmbedder, RemoteEmbedder, store_get_or_embed
from .errors import (
    ArgumentError,
    ConfigError,
    DataError,
    EmptyClusterError,
    NetworkError,
    PolicySumError,
    UndefinedScoreError,
)

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NETWORK = 4

DEFAULT_DIM = 256


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(func):
    """Translate package errors into the documented exit codes."""

    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ArgumentError as exc:
            _fail(EXIT_USAGE, str(exc))
        except (DataError, ConfigError, UndefinedScoreError, EmptyClusterError) as exc:
            _fail(EXIT_DATA, str(exc))
        except NetworkError as exc:
            _fail(EXIT_NETWORK, str(exc))
        except PolicySumError as exc:
            _fail(EXIT_DATA, str(exc))

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


def _build_provider(provider: str, dim: int, seed: int, endpoint: str | None):
    if provider == "hash":
        return HashEmbedder(dim=dim, seed=seed)
    if provider == "remote":
        if not endpoint:
            raise ArgumentError("remote provider needs --endpoint or EMBED_ENDPOINT")
        return RemoteEmbedder(endpoint)
    raise ArgumentError(f"unknown provider {provider!r}")


provider_options = [
    click.option("--provider", type=click.Choice(["hash", "remote"]), default="hash",
                 show_default=True, help="Embedding provider."),
    click.option("--dim", type=int, default=DEFAULT_DIM, show_default=True,
                 help="Hash embedding dimensionality."),
    click.option("--seed", type=int, default=0, show_default=True,
                 help="Seed for every random choice in the command."),
    click.option("--endpoint", envvar="EMBED_ENDPOINT", default=None,
                 help="Remote embedding service base URL."),
]


def _with_provider_options(command):
    for option in reversed(provider_options):
        command = option(command)
    return command


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON file of option defaults; explicit flags win.")
@click.pass_context
def main(ctx, config_path):
    """Extractive privacy-policy summarization and evaluation."""
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            defaults = json.load(fh)
        if not isinstance(defaults, dict):
            raise click.UsageError("config file must hold a JSON object")
        ctx.default_map = defaults


def _load_corpus_lines(path: Path) -> list[str]:
    lines = [line.strip() for line in path.read_text(encoding="utf-8").splitlines()]
    return [line for line in lines if line]


@main.command()
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="UTF-8 text file, one sentence per line.")
@click.option("--store", "store_path", required=True, type=click.Path(path_type=Path),
              help="Embedding store file to create or extend.")
@_with_provider_options
@_guard
def embed(corpus_path, store_path, provider, dim, seed, endpoint):
    """Embed every corpus sentence into the store (idempotent)."""
    prov = _build_provider(provider, dim, seed, endpoint)
    sentences = _load_corpus_lines(corpus_path)
    if store_path.exists():
        store = EmbeddingStore.load(store_path)
    else:
        store = EmbeddingStore.create(prov.descriptor, store_path)
    before = len(store)
    store_get_or_embed(store, sentences, prov)
    click.echo(f"embedded {len(store) - before} new sentences ({len(store)} total)")


@main.command()
@click.option("--store", "store_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--k", type=int, default=clustering.DEFAULT_K, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n-comp", type=int, default=None,
              help="Reduce with PCA to this many components before fitting.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@_guard
def fit(store_path, k, seed, n_comp, out_path):
    """Fit k-means on the store and persist the pseudo-centroid set."""
    if k < 2:
        raise ArgumentError(f"k must be >= 2, got {k}")
    store = EmbeddingStore.load(store_path)
    if not store.entries:
        raise DataError(f"store {store_path} is empty")
    texts = list(store.entries.keys())
    matrix = np.vstack([store.entries[t] for t in texts])
    space = "raw"
    if n_comp is not None:
        model = linalg.pca_fit(matrix, n_comp)
        linalg.save_pca(model, Path(str(out_path) + ".pca"))
        matrix = linalg.pca_transform(model, matrix)
        space = f"pca:{n_comp}"
    result = clustering.kmeans_fit(matrix, k=k, seed=seed, space=space)
    centroids = clustering.pseudo_centroids(result, matrix, texts)
    clustering.save_centroids(centroids, store.descriptor, out_path)
    click.echo(
        f"fitted k={k} on {matrix.shape[0]} vectors "
        f"(inertia {result.inertia:.4f}, {result.iterations} iterations) -> {out_path}"
    )


def _pdc_centroids(provider) -> clustering.CentroidSet:
    topics = corpus.load_gdpr_topics()
    vectors = np.vstack(provider.embed(topics.combined_sentences))
    return clustering.CentroidSet(
        mode="pdc",
        labels=tuple(topics.headers),
        centroids=vectors,
        texts=tuple(topics.combined_sentences),
    )


def _load_kmeans_artifact(centroid_path: Path):
    centroids, header = clustering.load_centroids(centroid_path)
    pca_model = None
    if centroids.space.startswith("pca"):
        pca_path = Path(str(centroid_path) + ".pca")
        if not pca_path.exists():
            raise ConfigError(
                f"centroids are in {centroids.space} but {pca_path} is missing"
            )
        pca_model = linalg.load_pca(pca_path)
    return centroids, pca_model


@main.command(name="summarize")
@click.option("--source", required=True, help="URL (live policy) or local file path.")
@click.option("--mode", type=click.Choice(["pdc", "kmeans"]), default="pdc", show_default=True)
@click.option("--n-best", type=int, default=1, show_default=True)
@click.option("--centroids", "centroid_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Centroid artifact (required for kmeans mode).")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Output file; stdout when omitted.")
@click.option("--fetch-policy", type=click.Choice(["fixture-only", "live"]),
              default="fixture-only", show_default=True)
@_with_provider_options
@_guard
def summarize_cmd(source, mode, n_best, centroid_path, out_path, fetch_policy,
                  provider, dim, seed, endpoint):
    """Summarize one document into per-topic nearest sentences."""
    prov = _build_provider(provider, dim, seed, endpoint)
    pca_model = None
    if centroid_path is not None:
        centroid_set, pca_model = _load_kmeans_artifact(centroid_path)
    elif mode == "pdc":
        centroid_set = _pdc_centroids(prov)
    else:
        raise ArgumentError("kmeans mode requires --centroids")
    space = centroid_set.space
    request = summarizer.SummaryRequest(source=source, mode=mode, n_best=n_best, space=space)
    summary = summarizer.summarize(
        request, prov, centroid_set, pca=pca_model, fetch_policy=fetch_policy
    )
    rendered = summarizer.summary_to_json(summary)
    if out_path is None:
        click.echo(rendered, nl=False)
    else:
        Path(out_path).write_text(rendered, encoding="utf-8", newline="\n")
        click.echo(
            f"summarized {summary.stats.input_sentence_count} sentences into "
            f"{summary.stats.output_sentence_count} picks -> {out_path}"
        )


def _read_manifest(manifest_path: Path, fixture_root: Path | None, fetch_policy: str):
    entries: list[tuple[str, str]] = []
    root = fixture_root or manifest_path.parent
    with open(manifest_path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"company", "url", "fixture_file"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DataError(
                f"manifest {manifest_path} must have columns company,url,fixture_file"
            )
        for record in reader:
            if fetch_policy == "live":
                entries.append((record["company"], record["url"]))
            else:
                entries.append((record["company"], str(root / record["fixture_file"])))
    if not entries:
        raise DataError(f"manifest {manifest_path} lists no documents")
    return entries


@main.command()
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="CSV with columns company,url,fixture_file.")
@click.option("--modes", default="pdc", show_default=True,
              help="Comma-separated summarizer modes to score.")
@click.option("--centroids", "centroid_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Centroid artifact for kmeans mode.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@click.option("--n-best", type=int, default=1, show_default=True)
@click.option("--rouge-weight", type=float, default=1.0, show_default=True,
              help="Weight for the weighted-LCS metric (1.0 reduces to plain LCS).")
@click.option("--fixture-root", envvar="FIXTURE_ROOT",
              type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--fetch-policy", type=click.Choice(["fixture-only", "live"]),
              default="fixture-only", show_default=True)
@_with_provider_options
@_guard
def evaluate(manifest_path, modes, centroid_path, out_dir, n_best, rouge_weight,
             fixture_root, fetch_policy, provider, dim, seed, endpoint):
    """Run SSD and ROUGE over a manifest of documents; write report CSVs."""
    prov = _build_provider(provider, dim, seed, endpoint)
    mode_list = [m.strip() for m in modes.split(",") if m.strip()]
    kmeans_centroids = None
    kmeans_pca = None
    if "kmeans" in mode_list:
        if centroid_path is None:
            raise ArgumentError("kmeans mode requires --centroids")
        kmeans_centroids, kmeans_pca = _load_kmeans_artifact(centroid_path)
    manifest = _read_manifest(manifest_path, fixture_root, fetch_policy)
    report = evaluation.batch_evaluate(
        manifest,
        mode_list,
        prov,
        seed=seed,
        kmeans_centroids=kmeans_centroids,
        kmeans_pca=kmeans_pca,
        n_best=n_best,
        fetch_policy=fetch_policy,
        rouge_weight=rouge_weight,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    evaluation.write_ssd_csv(report, out_dir / "ssd.csv")
    evaluation.write_rouge_csv(report, out_dir / "rouge.csv")
    evaluation.write_plot_data(report, out_dir / "plot_data.csv")
    failures = sum(1 for row in report.rows if row.error is not None)
    click.echo(
        f"evaluated {len(manifest)} documents over {len(mode_list)} mode(s) "
        f"({failures} error rows) -> {out_dir}"
    )


@main.command()
@click.option("--store", "store_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--algorithms", default="kmeans,minibatch_kmeans,pdc", show_default=True)
@click.option("--n-comp", "n_comp_values", default="3,10,100,140", show_default=True,
              help="Comma-separated component counts to sweep.")
@click.option("--k", type=int, default=clustering.DEFAULT_K, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@_guard
def sweep(store_path, algorithms, n_comp_values, k, seed, batch_size, out_path):
    """Silhouette-score clustering algorithms across PCA settings."""
    store = EmbeddingStore.load(store_path)
    if not store.entries:
        raise DataError(f"store {store_path} is empty")
    matrix = np.vstack(list(store.entries.values()))
    algorithm_list = [a.strip() for a in algorithms.split(",") if a.strip()]
    n_comps = [int(v) for v in n_comp_values.split(",") if v.strip()]
    pdc_vectors = None
    if "pdc" in algorithm_list:
        topics = corpus.load_gdpr_topics()
        missing = [t for t in topics.combined_sentences if store.get(t) is None]
        if missing:
            raise DataError(
                f"store lacks embeddings for {len(missing)} topic sentences; "
                "run the embed command over the topic corpus first"
            )
        pdc_vectors = np.vstack([store.entries[t] for t in topics.combined_sentences])
    rows = clustering.silhouette_sweep(
        matrix,
        algorithm_list,
        n_comps,
        k=k,
        seed=seed,
        pdc_centroids=pdc_vectors,
        batch_size=batch_size,
        out_csv=out_path,
    )
    click.echo(f"swept {len(rows)} combinations -> {out_path}")


@main.command(name="serve-check")
@click.option("--endpoint", envvar="EMBED_ENDPOINT", required=True,
              help="Embedding sidecar base URL.")
@_guard
def serve_check(endpoint):
    """Ping the embedding sidecar and report its model and dimension."""
    remote = RemoteEmbedder(endpoint)
    descriptor = remote.descriptor
    click.echo(f"ok: model={descriptor.model_id} dim={descriptor.dim}")


if __name__ == "__main__":
    main()
