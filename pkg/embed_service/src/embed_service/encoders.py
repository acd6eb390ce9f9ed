"""Encoder backends for the sidecar.

The real backend wraps a sentence-transformers checkpoint and loads it
lazily; the stub backend is deterministic and model-free, for tests and
for smoke-running the service without downloading anything.
"""

from __future__ import annotations

import hashlib
import math
import threading

DEFAULT_MODEL = "sentence-transformers/all-mpnet-base-v2"


class EncoderError(RuntimeError):
    """The backend failed to produce embeddings."""


class SbertEncoder:
    """Lazy wrapper around a sentence-transformers checkpoint."""

    def __init__(self, model_id: str = DEFAULT_MODEL):
        self.model_id = model_id
        self._model = None
        self._dim: int | None = None
        self._lock = threading.Lock()

    @property
    def ready(self) -> bool:
        return self._model is not None

    def load(self) -> None:
        with self._lock:
            if self._model is not None:
                return
            try:
                from sentence_transformers import SentenceTransformer
            except ImportError as exc:
                raise EncoderError(
                    "sentence-transformers is not installed; "
                    "install the 'model' extra or use --stub"
                ) from exc
            try:
                self._model = SentenceTransformer(self.model_id)
                self._dim = int(self._model.get_sentence_embedding_dimension())
            except Exception as exc:
                raise EncoderError(f"could not load model {self.model_id}: {exc}") from exc

    @property
    def dim(self) -> int:
        if self._dim is None:
            raise EncoderError("model not loaded yet")
        return self._dim

    def encode(self, sentences: list[str]) -> list[list[float]]:
        if self._model is None:
            raise EncoderError("model not loaded yet")
        try:
            matrix = self._model.encode(sentences, convert_to_numpy=True)
        except Exception as exc:
            raise EncoderError(f"encoding failed: {exc}") from exc
        return [[float(x) for x in row] for row in matrix]


class StubEncoder:
    """Deterministic hash-based encoder; no external model involved."""

    def __init__(self, dim: int = 16, model_id: str | None = None):
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        self._dim = dim
        self.model_id = model_id or f"stub-{dim}"
        self.ready = True

    def load(self) -> None:
        self.ready = True

    @property
    def dim(self) -> int:
        return self._dim

    def encode(self, sentences: list[str]) -> list[list[float]]:
        return [self._one(text) for text in sentences]

    def _one(self, text: str) -> list[float]:
        vec = [0.0] * self._dim
        for token in text.lower().split():
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            value = int.from_bytes(digest, "little")
            sign = 1.0 if value & 1 else -1.0
            vec[value % self._dim] += sign
        norm = math.sqrt(sum(x * x for x in vec))
        if norm > 0.0:
            vec = [x / norm for x in vec]
        return vec


class FailingEncoder:
    """Always-erroring backend, for exercising the 500 path in tests."""

    model_id = "failing"
    ready = True
    dim = 4

    def load(self) -> None:
        pass

    def encode(self, sentences):
        raise EncoderError("synthetic failure")
