"""Clustering a sentence corpus and sweeping silhouette scores.

Embeds a small privacy-themed corpus, then compares k-means, mini-batch
k-means and fixed-centroid assignment across PCA settings. Higher
silhouette means cleaner cluster separation; the score always degrades
as more (noisier) components are kept.
"""

import numpy as np

from policysum import HashEmbedder, load_gdpr_topics
from policysum.clustering import (
    kmeans_fit,
    pseudo_centroids,
    silhouette_score,
    silhouette_sweep,
)

provider = HashEmbedder(dim=128, seed=0)
topics = load_gdpr_topics()

corpus = list(topics.combined_sentences) + [
    "we log the pages you visit inside the product",
    "email preferences are stored with your profile",
    "advertising partners receive aggregated campaign counts",
    "sessions expire after thirty days of inactivity",
    "we answer subject access requests within a month",
    "browser settings control which cookies are accepted",
    "third party pages follow their own privacy notices",
    "the notice changes whenever our processing changes",
]
matrix = np.vstack(provider.embed(corpus))

fitted = kmeans_fit(matrix, k=4, seed=0)
print(f"k-means: inertia {fitted.inertia:.4f} after {fitted.iterations} iterations")
print(f"silhouette: {silhouette_score(matrix, fitted.assignments):.4f}")

representatives = pseudo_centroids(fitted, matrix, corpus)
print("\ncluster representatives (member sentence nearest each mean):")
for label, text in zip(representatives.labels, representatives.texts):
    print(f"  {label}: {text[:70]}")

print("\nsilhouette sweep (algorithm, n_comp, score):")
rows = silhouette_sweep(
    matrix,
    ["kmeans", "minibatch_kmeans", "pdc"],
    n_comp_values=[3, 10],
    k=4,
    seed=0,
    pdc_centroids=np.vstack(provider.embed(topics.combined_sentences[:4])),
)
for algorithm, n_comp, score in rows:
    rendered = score if isinstance(score, str) else f"{score:.4f}"
    print(f"  {algorithm:18s} n_comp={n_comp:<3d} {rendered}")
