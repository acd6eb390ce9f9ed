"""Start the sidecar: ``embed-service --model <id> --port <port>``.

Binds loopback by default; there is no authentication layer.
"""

from __future__ import annotations

import argparse
import sys

import uvicorn

from .app import ServiceConfig, create_app
from .encoders import DEFAULT_MODEL, EncoderError, SbertEncoder, StubEncoder


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="embed-service")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="sentence-transformers checkpoint to serve")
    parser.add_argument("--port", type=int, default=8763)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--max-batch", type=int, default=64)
    parser.add_argument("--stub", type=int, metavar="DIM", default=None,
                        help="serve the deterministic stub encoder instead of a model")
    args = parser.parse_args(argv)

    config = ServiceConfig(model_id=args.model, port=args.port, max_batch=args.max_batch)
    if args.stub is not None:
        encoder = StubEncoder(dim=args.stub)
    else:
        encoder = SbertEncoder(config.model_id)
        try:
            encoder.load()
        except EncoderError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    app = create_app(encoder, max_batch=config.max_batch)
    uvicorn.run(app, host=args.host, port=config.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
