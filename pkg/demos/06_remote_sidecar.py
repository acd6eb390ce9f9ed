"""Talking to the embedding sidecar over its wire protocol.

Starts the sidecar with its deterministic stub encoder (no model
download), checks /health, embeds a batch through the remote provider,
and shuts it down. Swap --stub for --model <checkpoint> to serve a real
sentence-transformer.
"""

import subprocess
import sys
import time

import numpy as np
import requests

from policysum.embedding import RemoteEmbedder

PORT = 8942
ENDPOINT = f"http://127.0.0.1:{PORT}"

process = subprocess.Popen(
    [sys.executable, "-m", "embed_service", "--stub", "32", "--port", str(PORT)],
    stdout=subprocess.DEVNULL,
    stderr=subprocess.DEVNULL,
)
try:
    for _ in range(50):
        try:
            if requests.get(f"{ENDPOINT}/health", timeout=0.2).status_code == 200:
                break
        except requests.RequestException:
            time.sleep(0.1)
    else:
        raise SystemExit("sidecar did not come up")

    health = requests.get(f"{ENDPOINT}/health", timeout=2).json()
    print(f"health: {health}")

    provider = RemoteEmbedder(ENDPOINT)
    print(f"descriptor: {provider.descriptor}")

    vectors = provider.embed([
        "what data do we collect?",
        "how do we use cookies?",
        "what data do we collect?",
    ])
    print(f"received {len(vectors)} vectors of dim {vectors[0].shape[0]}")
    print(f"duplicate sentences map to identical vectors: "
          f"{np.array_equal(vectors[0], vectors[2])}")
finally:
    process.terminate()
    process.wait(timeout=5)
    print("sidecar stopped")
