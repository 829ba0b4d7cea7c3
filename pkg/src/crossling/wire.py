"""NDJSON wire-protocol client transports (stdio child process, HTTP POST).

Shared by the scorer (``scorer/1``) and judge (``judge/1``) clients.
Requests and responses are one JSON object per line, matched by id;
response arrival order is irrelevant. A batch aborts only on transport
failure; everything else degrades to per-item errors.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
import time
import urllib.error
import urllib.request

from .errors import TransportError

DEFAULT_TIMEOUT = 60.0

_EOF = object()


def _absorb(line: str, pending: set[str], responses: dict[str, dict]) -> None:
    line = line.strip()
    if not line:
        return
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        return  # unattributable; missing ids surface as per-item errors
    if isinstance(obj, dict):
        rid = obj.get("id")
        if rid in pending and rid not in responses:
            responses[rid] = obj


def stdio_exchange(
    command: list[str],
    protocol: str,
    requests: list[dict],
    timeout: float = DEFAULT_TIMEOUT,
) -> dict[str, dict]:
    """Run one request batch against a child-process server.

    Returns {id: response}; ids with no valid response are simply absent
    (per-item errors for the caller). Raises TransportError on handshake
    failure or when the server dies before completing the batch.
    """
    deadline = time.monotonic() + timeout
    try:
        proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
        )
    except OSError as exc:
        raise TransportError(f"cannot start server process {command!r}: {exc}") from exc

    inbox: queue.Queue = queue.Queue()

    def _reader():
        assert proc.stdout is not None
        for line in proc.stdout:
            inbox.put(line)
        inbox.put(_EOF)

    threading.Thread(target=_reader, daemon=True).start()

    def _next():
        """Next stdout line, _EOF on end of stream, None on deadline."""
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            return None
        try:
            return inbox.get(timeout=remaining)
        except queue.Empty:
            return None

    responses: dict[str, dict] = {}
    pending = {req["id"] for req in requests}
    try:
        first = _next()
        if first is None or first is _EOF:
            raise TransportError(f"no handshake from {command!r}")
        try:
            handshake = json.loads(first)
        except json.JSONDecodeError as exc:
            raise TransportError(f"invalid handshake line {first!r}") from exc
        if not isinstance(handshake, dict) or handshake.get("protocol") != protocol:
            raise TransportError(f"expected protocol {protocol!r}, got {first.strip()!r}")

        assert proc.stdin is not None
        for req in requests:
            proc.stdin.write(json.dumps(req, ensure_ascii=False) + "\n")
        proc.stdin.flush()
        proc.stdin.close()

        saw_eof = False
        while len(responses) < len(pending):
            line = _next()
            if line is None:
                break  # deadline: missing ids become per-item timeouts
            if line is _EOF:
                saw_eof = True
                break
            _absorb(line, pending, responses)

        if saw_eof and len(responses) < len(pending):
            rc = proc.wait(timeout=5)
            if rc != 0:
                raise TransportError(f"server {command!r} exited with status {rc} mid-batch")
        return responses
    finally:
        try:
            if proc.stdin and not proc.stdin.closed:
                proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


def http_exchange(
    url: str,
    protocol: str,
    requests: list[dict],
    timeout: float = DEFAULT_TIMEOUT,
) -> dict[str, dict]:
    """POST an NDJSON body; the response body is NDJSON, optionally led by a
    handshake line which is checked when present."""
    body = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in requests)
    req = urllib.request.Request(
        url, data=body.encode("utf-8"), headers={"Content-Type": "application/x-ndjson"}
    )
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            payload = resp.read().decode("utf-8")
    except (urllib.error.URLError, OSError) as exc:
        raise TransportError(f"HTTP exchange with {url} failed: {exc}") from exc
    out_lines = payload.splitlines()
    if out_lines:
        try:
            head = json.loads(out_lines[0])
        except json.JSONDecodeError:
            head = None
        if isinstance(head, dict) and "protocol" in head:
            if head["protocol"] != protocol:
                raise TransportError(f"expected protocol {protocol!r}, got {head!r}")
            out_lines = out_lines[1:]
    pending = {r["id"] for r in requests}
    responses: dict[str, dict] = {}
    for line in out_lines:
        _absorb(line, pending, responses)
    return responses
