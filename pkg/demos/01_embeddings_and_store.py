"""Hash embeddings and the cache-through store.

The hash embedder needs no model: it feature-hashes word unigrams and
bigrams into a fixed number of buckets and L2-normalizes. Identical text
always produces identical vectors, which is what makes the on-disk store
a safe cache.
"""

import tempfile
from pathlib import Path

import numpy as np

from policysum import EmbeddingStore, HashEmbedder, hash_embed, store_get_or_embed

provider = HashEmbedder(dim=64, seed=7)

v1 = hash_embed("we collect data", 64, seed=7)
v2 = hash_embed("we collect data", 64, seed=7)
print(f"same text, same vector: {np.array_equal(v1, v2)}")
print(f"L2 norm: {np.linalg.norm(v1):.12f}")
print(f"empty text stays zero: {np.linalg.norm(hash_embed('', 64, 7)) == 0.0}")

with tempfile.TemporaryDirectory() as tmp:
    store_path = Path(tmp) / "vectors.jsonl"
    store = EmbeddingStore.create(provider.descriptor, store_path)

    sentences = [
        "we collect your name and email address",
        "cookies keep you signed in",
        "we collect your name and email address",  # duplicate: embedded once
    ]
    vectors = store_get_or_embed(store, sentences, provider)
    print(f"\nstore holds {len(store)} unique sentences for {len(sentences)} inputs")

    reloaded = EmbeddingStore.load(store_path)
    again = store_get_or_embed(reloaded, sentences, provider)
    print(f"reloaded store returns identical vectors: "
          f"{all(np.array_equal(a, b) for a, b in zip(vectors, again))}")
    print("\nfirst lines of the store file:")
    for line in store_path.read_text().splitlines()[:2]:
        print(" ", line[:100] + ("..." if len(line) > 100 else ""))
