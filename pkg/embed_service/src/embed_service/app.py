"""FastAPI application implementing the embedding wire protocol.

POST /embed  {"sentences": [str...]} -> {"model": str, "dim": int,
"vectors": [[float...]...]}; GET /health -> {"status": "ok", "model",
"dim"}. Malformed or empty requests answer 400, oversize batches 413,
backend failures 500, and /health answers 503 until the model is loaded.

Encoding runs under a lock, so vectors from concurrent requests are never
interleaved across responses.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .encoders import EncoderError

DEFAULT_MAX_BATCH = 64


@dataclass(frozen=True)
class ServiceConfig:
    model_id: str
    port: int = 8763
    max_batch: int = DEFAULT_MAX_BATCH

    def __post_init__(self):
        if not 1024 <= self.port <= 65535:
            raise ValueError(f"port must be in [1024, 65535], got {self.port}")
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")


def create_app(encoder, max_batch: int = DEFAULT_MAX_BATCH) -> FastAPI:
    app = FastAPI(title="embed-service", docs_url=None, redoc_url=None)
    encode_lock = threading.Lock()

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message})

    @app.get("/health")
    def health():
        if not encoder.ready:
            return error(503, "model is still loading")
        return {"status": "ok", "model": encoder.model_id, "dim": encoder.dim}

    @app.post("/embed")
    async def embed(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return error(400, "body must be JSON")
        if not isinstance(payload, dict) or "sentences" not in payload:
            return error(400, "body must be an object with a 'sentences' list")
        sentences = payload["sentences"]
        if not isinstance(sentences, list) or not all(isinstance(s, str) for s in sentences):
            return error(400, "'sentences' must be a list of strings")
        if not sentences:
            return error(400, "'sentences' must not be empty")
        if len(sentences) > max_batch:
            return error(413, f"batch of {len(sentences)} exceeds max_batch {max_batch}")
        if not encoder.ready:
            return error(503, "model is still loading")
        with encode_lock:
            try:
                vectors = encoder.encode(sentences)
            except EncoderError as exc:
                return error(500, str(exc))
        return {"model": encoder.model_id, "dim": encoder.dim, "vectors": vectors}

    return app
