"""Stdlib stub of the remote infill service, shared across test modules."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

FILL_TOKEN = "zz"


class _StubInfillHandler(BaseHTTPRequestHandler):
    """Configurable fake of the /infill endpoint.

    The owning server's ``mode`` attribute selects the behavior; the default
    replaces every sentinel with FILL_TOKEN and drops nothing.
    """

    def log_message(self, *args):
        pass

    def do_POST(self):
        mode = self.server.mode
        if self.path != "/infill":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length))
        self.server.requests.append(body)
        if mode == "http-500":
            self.send_error(500, "boom")
            return
        if mode == "bad-json":
            self._respond(200, b"this is not json")
            return
        if mode == "wrong-shape":
            self._respond(200, json.dumps({"not_tokens": []}).encode())
            return
        tokens = body["tokens"]
        if mode == "keep-sentinel":
            out = list(tokens)
        elif mode == "empty":
            out = []
        else:
            out = [FILL_TOKEN if t == "<mask>" else t for t in tokens]
        self._respond(200, json.dumps({"tokens": out}).encode())

    def _respond(self, status, payload):
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


class StubInfillServer:
    def __init__(self):
        self._httpd = HTTPServer(("127.0.0.1", 0), _StubInfillHandler)
        self._httpd.mode = "fill"
        self._httpd.requests = []
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, daemon=True
        )
        self._thread.start()

    @property
    def endpoint(self) -> str:
        host, port = self._httpd.server_address
        return f"http://{host}:{port}"

    @property
    def requests(self) -> list:
        return self._httpd.requests

    def set_mode(self, mode: str) -> None:
        self._httpd.mode = mode

    def close(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5)
