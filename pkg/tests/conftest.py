import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

from policysum.embedding import HashEmbedder

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def hash_provider() -> HashEmbedder:
    return HashEmbedder(dim=64, seed=7)


class MockEmbedService:
    """Threaded stand-in for the embedding sidecar's wire protocol.

    Deterministic vectors are derived from the text with the hash embedder.
    ``corrupt`` switches the /embed response into a specific bad shape so
    client-side protocol handling can be exercised.
    """

    def __init__(self, dim: int = 8, corrupt: str | None = None):
        self.dim = dim
        self.corrupt = corrupt
        self.embed_calls = 0
        self._encoder = HashEmbedder(dim=dim, seed=99)
        service = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _send(self, status: int, payload: dict):
                body = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                if self.path == "/health":
                    self._send(200, {"status": "ok", "model": "mock-encoder", "dim": service.dim})
                else:
                    self._send(404, {"error": "not found"})

            def do_POST(self):
                if self.path != "/embed":
                    self._send(404, {"error": "not found"})
                    return
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    payload = json.loads(self.rfile.read(length))
                    sentences = payload["sentences"]
                    assert isinstance(sentences, list)
                    assert all(isinstance(s, str) for s in sentences)
                except Exception:
                    self._send(400, {"error": "malformed request"})
                    return
                if not sentences:
                    self._send(400, {"error": "empty batch"})
                    return
                service.embed_calls += 1
                if service.corrupt == "not-json":
                    body = b"definitely not json"
                    self.send_response(200)
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                    return
                vectors = [[float(x) for x in v] for v in service._encoder.embed(sentences)]
                if service.corrupt == "ragged" and vectors:
                    vectors[-1] = vectors[-1][:-1]
                if service.corrupt == "wrong-count" and vectors:
                    vectors = vectors[:-1]
                if service.corrupt == "non-numeric" and vectors:
                    vectors[-1] = ["not", "numbers"] + vectors[-1][2:]
                self._send(200, {"model": "mock-encoder", "dim": service.dim, "vectors": vectors})

        self._server = HTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def endpoint(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def mock_embed_service():
    def factory(dim: int = 8, corrupt: str | None = None) -> MockEmbedService:
        return MockEmbedService(dim=dim, corrupt=corrupt)

    return factory


_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.skipped:
        _acceptance_results.append((name, "SKIP"))
    elif report.when == "call":
        _acceptance_results.append((name, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"{outcome}: {name}")
