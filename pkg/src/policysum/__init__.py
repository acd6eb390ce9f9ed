"""Extractive summarization of privacy-policy documents.

Sentences are embedded, ranked by Euclidean distance against 14 labeled
centroids (fixed topic centroids or corpus-fitted k-means centroids), and
the nearest n_best per topic form the summary. Evaluation covers squared-
distance totals against the topic headers and ROUGE overlap against the
combined sample sentences.
"""

from .clustering import (
    CentroidSet,
    ClusteringResult,
    kmeans_fit,
    minibatch_kmeans_fit,
    pdc_assign,
    pseudo_centroids,
    silhouette_score,
    silhouette_sweep,
)
from .corpus import (
    Document,
    GdprTopics,
    Sentence,
    extract_text,
    fetch_document,
    load_gdpr_topics,
    split_sentences,
)
from .embedding import (
    EmbeddingProviderDescriptor,
    EmbeddingStore,
    HashEmbedder,
    RemoteEmbedder,
    hash_embed,
    remote_embed,
    store_get_or_embed,
)
from .evaluation import (
    EvalRow,
    RougeScores,
    SsdReport,
    batch_evaluate,
    rouge_evaluate,
    rouge_l,
    rouge_n,
    rouge_w,
    ssd_evaluate,
)
from .linalg import PcaModel, choose_n_comp_by_variance, pca_fit, pca_transform
from .summarizer import (
    Summary,
    SummaryRequest,
    random_baseline_summary,
    rank_against_centroid,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "CentroidSet",
    "ClusteringResult",
    "Document",
    "EmbeddingProviderDescriptor",
    "EmbeddingStore",
    "EvalRow",
    "GdprTopics",
    "HashEmbedder",
    "PcaModel",
    "RemoteEmbedder",
    "RougeScores",
    "Sentence",
    "SsdReport",
    "Summary",
    "SummaryRequest",
    "batch_evaluate",
    "choose_n_comp_by_variance",
    "extract_text",
    "fetch_document",
    "hash_embed",
    "kmeans_fit",
    "load_gdpr_topics",
    "minibatch_kmeans_fit",
    "pca_fit",
    "pca_transform",
    "pdc_assign",
    "pseudo_centroids",
    "random_baseline_summary",
    "rank_against_centroid",
    "remote_embed",
    "rouge_evaluate",
    "rouge_l",
    "rouge_n",
    "rouge_w",
    "silhouette_score",
    "silhouette_sweep",
    "split_sentences",
    "ssd_evaluate",
    "store_get_or_embed",
    "summarize",
]
