"""NDJSON server loops (stdio and HTTP) shared by both adapters.

One JSON object per line; the handshake line is emitted before any
response; a malformed request line yields an error response carrying the
offending id when recoverable, else "unknown". Responses are per-id and
clients must not rely on arrival order.
"""

from __future__ import annotations

import json
import select
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def _emit(stream, obj: dict) -> None:
    stream.write(json.dumps(obj, ensure_ascii=False) + "\n")
    stream.flush()


def _dispatch(line: str, handler) -> dict:
    try:
        request = json.loads(line)
    except json.JSONDecodeError:
        return {"id": "unknown", "error": "malformed request line"}
    if not isinstance(request, dict):
        return {"id": "unknown", "error": "request must be a JSON object"}
    rid = request.get("id")
    if not isinstance(rid, str):
        return {"id": "unknown", "error": "missing or invalid id"}
    try:
        return {"id": rid, **handler(request)}
    except Exception as exc:  # per-item error, never kill the server
        return {"id": rid, "error": f"{type(exc).__name__}: {exc}"}


def _drain_ready_lines(limit: int) -> list[str]:
    """Non-blocking read of up to ``limit`` additional buffered lines."""
    lines: list[str] = []
    while len(lines) < limit:
        ready, _, _ = select.select([sys.stdin], [], [], 0)
        if not ready:
            break
        line = sys.stdin.readline()
        if not line:
            break
        lines.append(line)
    return lines


def serve_stdio(protocol: str, handler, max_batch: int = 16) -> int:
    """Serve until stdin EOF; requests already buffered are handled as one
    internal batch of up to ``max_batch``."""
    _emit(sys.stdout, {"protocol": protocol})
    while True:
        line = sys.stdin.readline()
        if not line:
            return 0
        batch = [line] + _drain_ready_lines(max_batch - 1)
        for item in batch:
            if item.strip():
                _emit(sys.stdout, _dispatch(item, handler))


def serve_http(protocol: str, handler, host: str = "127.0.0.1", port: int = 0) -> None:
    """Serve POSTed NDJSON bodies; the response body starts with the
    handshake line. Blocks forever; the bound port is printed on startup."""

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", "0"))
            body = self.rfile.read(length).decode("utf-8")
            out = [json.dumps({"protocol": protocol}, ensure_ascii=False)]
            for line in body.splitlines():
                if line.strip():
                    out.append(json.dumps(_dispatch(line, handler), ensure_ascii=False))
            payload = ("\n".join(out) + "\n").encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/x-ndjson")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer((host, port), Handler)
    print(json.dumps({"protocol": protocol, "port": server.server_address[1]}), flush=True)
    server.serve_forever()
