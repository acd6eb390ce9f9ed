"""Sentence embedding providers and the on-disk embedding store.

Two providers implement the same small contract (a descriptor plus a batch
``embed`` method): a deterministic feature-hashing embedder that needs no
model, and an HTTP client for a remote encoder service. The store is an
append-only JSONL cache keyed by exact sentence text; it permits concurrent
readers but a single writer (callers enforce the single-writer side).
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np
import requests

from .errors import ArgumentError, ConfigError, ProtocolError, TransportError

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class EmbeddingProviderDescriptor:
    """Identity of an embedding space: provider, model, dimensionality."""

    provider_id: str
    model_id: str
    dim: int

    def __post_init__(self):
        if not self.provider_id:
            raise ArgumentError("provider_id must be nonempty")
        if self.dim <= 0:
            raise ArgumentError(f"dim must be positive, got {self.dim}")


class EmbeddingProvider(Protocol):
    descriptor: EmbeddingProviderDescriptor

    def embed(self, sentences: Sequence[str]) -> list[np.ndarray]: ...


def _hash_tokens(text: str) -> list[str]:
    # lowercase word runs; any non-alphanumeric run is a separator
    return _TOKEN_RE.findall(text.lower())


def _bucket_and_sign(feature: str, seed: int, dim: int) -> tuple[int, float]:
    digest = hashlib.blake2b(
        feature.encode("utf-8"), digest_size=8, salt=str(seed).encode("utf-8")[:16]
    ).digest()
    value = int.from_bytes(digest, "little")
    sign = 1.0 if (value >> 60) & 1 else -1.0
    return value % dim, sign


def hash_embed(sentence: str, dim: int, seed: int) -> np.ndarray:
    """Embed one sentence by feature-hashing its word unigrams and bigrams.

    Deterministic in (sentence, dim, seed) across runs and platforms. The
    result is L2-normalized; a sentence with no tokens maps to the zero
    vector and is left unnormalized.
    """
    if dim <= 0:
        raise ArgumentError(f"dim must be positive, got {dim}")
    tokens = _hash_tokens(sentence)
    vec = np.zeros(dim, dtype=np.float64)
    if not tokens:
        return vec
    features: list[str] = list(tokens)
    features.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    for feature in features:
        bucket, sign = _bucket_and_sign(feature, seed, dim)
        vec[bucket] += sign
    norm = math.sqrt(float(np.dot(vec, vec)))
    if norm > 0.0:
        vec /= norm
    return vec


class HashEmbedder:
    """Deterministic, model-free provider built on :func:`hash_embed`."""

    def __init__(self, dim: int = 256, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self.descriptor = EmbeddingProviderDescriptor(
            provider_id="hash-v1",
            model_id=f"hash-v1-d{dim}-s{seed}",
            dim=dim,
        )

    def embed(self, sentences: Sequence[str]) -> list[np.ndarray]:
        return [hash_embed(s, self.dim, self.seed) for s in sentences]


def remote_embed(
    sentences: Sequence[str], endpoint: str, timeout_ms: int = 10_000
) -> list[np.ndarray]:
    """Embed a batch through the remote encoder's POST /embed endpoint.

    Raises TransportError on connection problems (retryable), ProtocolError
    when the response does not follow the wire format or the vectors
    disagree on dimensionality.
    """
    if not sentences:
        raise ArgumentError("cannot embed an empty batch")
    url = endpoint.rstrip("/") + "/embed"
    try:
        response = requests.post(
            url, json={"sentences": list(sentences)}, timeout=timeout_ms / 1000.0
        )
    except requests.RequestException as exc:
        raise TransportError(f"embed request to {url} failed: {exc}", endpoint) from exc
    if response.status_code != 200:
        raise ProtocolError(
            f"embed service returned status {response.status_code}: {response.text[:200]}"
        )
    try:
        payload = response.json()
        dim = int(payload["dim"])
        vectors = payload["vectors"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ProtocolError(f"malformed embed response: {exc}") from exc
    if not isinstance(vectors, list) or len(vectors) != len(sentences):
        raise ProtocolError(
            f"expected {len(sentences)} vectors, got {len(vectors) if isinstance(vectors, list) else 'non-list'}"
        )
    out = []
    for i, raw in enumerate(vectors):
        try:
            arr = np.asarray(raw, dtype=np.float64)
        except (ValueError, TypeError) as exc:
            raise ProtocolError(f"vector {i} is not numeric: {exc}") from exc
        if arr.ndim != 1 or arr.shape[0] != dim:
            raise ProtocolError(f"vector {i} has dim {arr.shape}, service advertised {dim}")
        out.append(arr)
    return out


class RemoteEmbedder:
    """Provider backed by the HTTP sidecar's wire protocol."""

    def __init__(self, endpoint: str, timeout_ms: int = 10_000):
        self.endpoint = endpoint
        self.timeout_ms = timeout_ms
        self._descriptor: EmbeddingProviderDescriptor | None = None

    @property
    def descriptor(self) -> EmbeddingProviderDescriptor:
        if self._descriptor is None:
            url = self.endpoint.rstrip("/") + "/health"
            try:
                response = requests.get(url, timeout=self.timeout_ms / 1000.0)
            except requests.RequestException as exc:
                raise TransportError(f"health check of {url} failed: {exc}", self.endpoint) from exc
            if response.status_code != 200:
                raise ProtocolError(f"health check returned status {response.status_code}")
            try:
                payload = response.json()
                self._descriptor = EmbeddingProviderDescriptor(
                    provider_id="remote",
                    model_id=str(payload["model"]),
                    dim=int(payload["dim"]),
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise ProtocolError(f"malformed health response: {exc}") from exc
        return self._descriptor

    def embed(self, sentences: Sequence[str]) -> list[np.ndarray]:
        vectors = remote_embed(sentences, self.endpoint, self.timeout_ms)
        expected = self.descriptor.dim
        for vec in vectors:
            if vec.shape[0] != expected:
                raise ProtocolError(
                    f"service produced dim {vec.shape[0]}, descriptor says {expected}"
                )
        return vectors


@dataclass
class EmbeddingStore:
    """In-memory sentence-to-vector map, optionally mirrored to a JSONL file.

    File format: a header line ``{"provider_id":..., "model_id":..., "dim":N}``
    followed by one ``{"text":..., "vector":[...]}`` record per sentence,
    UTF-8 with LF line endings. Records are only ever appended.
    """

    descriptor: EmbeddingProviderDescriptor
    path: Path | None = None
    entries: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, text: str) -> np.ndarray | None:
        return self.entries.get(text)

    def add(self, text: str, vector: np.ndarray) -> None:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.descriptor.dim,):
            raise ConfigError(
                f"vector of dim {vector.shape} cannot enter a store of dim {self.descriptor.dim}"
            )
        if text in self.entries:
            return
        self.entries[text] = vector
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(_entry_line(text, vector))

    @classmethod
    def create(cls, descriptor: EmbeddingProviderDescriptor, path: Path | None = None) -> "EmbeddingStore":
        store = cls(descriptor=descriptor, path=Path(path) if path else None)
        if store.path is not None:
            with open(store.path, "w", encoding="utf-8", newline="\n") as fh:
                header = {
                    "provider_id": descriptor.provider_id,
                    "model_id": descriptor.model_id,
                    "dim": descriptor.dim,
                }
                fh.write(json.dumps(header, sort_keys=True) + "\n")
        return store

    @classmethod
    def load(cls, path: Path) -> "EmbeddingStore":
        path = Path(path)
        with open(path, "r", encoding="utf-8") as fh:
            header_line = fh.readline()
            if not header_line.strip():
                raise ConfigError(f"store file {path} is missing its header line")
            try:
                header = json.loads(header_line)
                descriptor = EmbeddingProviderDescriptor(
                    provider_id=header["provider_id"],
                    model_id=header["model_id"],
                    dim=int(header["dim"]),
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"store file {path} has a malformed header: {exc}") from exc
            entries: dict[str, np.ndarray] = {}
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    text = record["text"]
                    vector = np.asarray(record["vector"], dtype=np.float64)
                except (ValueError, KeyError, TypeError) as exc:
                    raise ConfigError(f"store file {path} line {lineno} is malformed: {exc}") from exc
                if vector.shape != (descriptor.dim,):
                    raise ConfigError(
                        f"store file {path} line {lineno} has dim {vector.shape[0]}, header says {descriptor.dim}"
                    )
                entries[text] = vector
        return cls(descriptor=descriptor, path=path, entries=entries)


def _entry_line(text: str, vector: np.ndarray) -> str:
    return json.dumps({"text": text, "vector": [float(x) for x in vector]}, sort_keys=True) + "\n"


def store_get_or_embed(
    store: EmbeddingStore, sentences: Iterable[str], provider: EmbeddingProvider
) -> list[np.ndarray]:
    """Cache-through lookup: embed only sentences the store has not seen.

    Newly embedded sentences are appended to the store. Output order
    matches input order; repeated calls with the same inputs make zero
    provider calls the second time.
    """
    if provider.descriptor != store.descriptor:
        raise ConfigError(
            f"provider {provider.descriptor} does not match store {store.descriptor}"
        )
    sentences = list(sentences)
    seen: set[str] = set()
    missing: list[str] = []
    for text in sentences:
        if store.get(text) is None and text not in seen:
            seen.add(text)
            missing.append(text)
    if missing:
        vectors = provider.embed(missing)
        if len(vectors) != len(missing):
            raise ProtocolError(
                f"provider returned {len(vectors)} vectors for {len(missing)} sentences"
            )
        for text, vector in zip(missing, vectors):
            store.add(text, vector)
    return [store.entries[text] for text in sentences]
