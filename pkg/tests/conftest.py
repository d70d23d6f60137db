import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from rit.embed import HashEmbedder


class StubServer:
    """Minimal HTTP stub: a user-supplied callable maps the JSON request body
    to (status, payload). Captures every request body for assertions."""

    def __init__(self, responder):
        self.responder = responder
        self.requests = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                stub.requests.append(body)
                status, payload = stub.responder(body)
                data = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self._server = HTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self._server.server_port}/"
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def stub_server():
    servers = []

    def start(responder):
        server = StubServer(responder)
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.close()


class FakeEmbedder:
    """Maps known texts to preassigned unit vectors; used when tests need
    exact control over similarities."""

    def __init__(self, vectors: dict):
        self.vectors = {k: np.asarray(v, dtype=np.float64) for k, v in vectors.items()}

    def __call__(self, text: str) -> np.ndarray:
        return self.vectors[text]


@pytest.fixture
def hash_embedder():
    return HashEmbedder(dim=64, seed=0)
