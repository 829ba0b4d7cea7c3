"""Protocol conformance harness for scorer/1 and judge/1 servers.

The same checks the experiment toolkit applies to its reference stubs:
a correct handshake, exactly one id-matched response per request with no
drops, byte-identical responses for repeated inputs, and an error
response (not a crash) for malformed request lines. The harness speaks
the wire protocol directly so it can drive any server command.
"""

from __future__ import annotations

import argparse
import json
import subprocess
from dataclasses import dataclass


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _exchange(command: list[str], lines: list[str], timeout: float = 120.0) -> list[str]:
    """Send raw request lines, return all stdout lines (handshake first)."""
    proc = subprocess.Popen(
        command, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, encoding="utf-8"
    )
    try:
        payload = "".join(line + "\n" for line in lines)
        out, _ = proc.communicate(payload, timeout=timeout)
    except subprocess.TimeoutExpired:
        proc.kill()
        raise
    return out.splitlines()


def _requests_for(kind: str, texts: list[str]) -> list[str]:
    if kind == "scorer":
        return [
            json.dumps({"id": f"r{i:04d}", "text": t}, ensure_ascii=False)
            for i, t in enumerate(texts)
        ]
    return [
        json.dumps(
            {"id": f"r{i:04d}", "claim": t, "document": f"context around {t} here"},
            ensure_ascii=False,
        )
        for i, t in enumerate(texts)
    ]


def _validate_response(kind: str, obj: dict) -> str | None:
    if "error" in obj:
        return f"server error: {obj['error']}"
    if kind == "scorer":
        if not isinstance(obj.get("logprob"), (int, float)):
            return "missing/invalid logprob"
        if not isinstance(obj.get("tokens"), int) or obj["tokens"] < 1:
            return "missing/invalid tokens"
    else:
        if not isinstance(obj.get("entails"), bool):
            return "missing/invalid entails"
    return None


def run_conformance(command: list[str], kind: str, n_requests: int = 100) -> list[CheckResult]:
    if kind not in ("scorer", "judge"):
        raise ValueError("kind must be scorer or judge")
    protocol = "scorer/1" if kind == "scorer" else "judge/1"
    results: list[CheckResult] = []
    texts = [f"probe text number {i} with marker yes" for i in range(n_requests)]
    requests = _requests_for(kind, texts)

    out = _exchange(command, requests)
    # 1. handshake
    handshake_ok = False
    detail = "no output"
    if out:
        try:
            head = json.loads(out[0])
            handshake_ok = head.get("protocol") == protocol
            detail = out[0]
        except json.JSONDecodeError:
            detail = f"unparseable first line {out[0]!r}"
    results.append(CheckResult("handshake", handshake_ok, detail))

    # 2. id matching: one valid response per request, no drops, no strays
    responses: dict[str, dict] = {}
    stray = 0
    for line in out[1:]:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            stray += 1
            continue
        rid = obj.get("id")
        if isinstance(rid, str) and rid.startswith("r") and rid not in responses:
            responses[rid] = obj
        else:
            stray += 1
    expected_ids = {f"r{i:04d}" for i in range(n_requests)}
    missing = expected_ids - set(responses)
    invalid = {rid: _validate_response(kind, obj) for rid, obj in responses.items()}
    invalid = {rid: why for rid, why in invalid.items() if why}
    results.append(
        CheckResult(
            "id matching",
            not missing and not invalid and stray == 0,
            f"{len(missing)} missing, {len(invalid)} invalid, {stray} stray",
        )
    )

    # 3. determinism on repeated texts
    repeat = _requests_for(kind, texts[:10])
    first = _exchange(command, repeat)[1:]
    second = _exchange(command, repeat)[1:]
    results.append(
        CheckResult(
            "determinism",
            first == second,
            "identical bytes" if first == second else "responses differ between runs",
        )
    )

    # 4. malformed request line -> error response, server keeps running
    good = _requests_for(kind, ["after the bad line"])
    out = _exchange(command, ["this is not json", *good])
    error_seen = False
    good_seen = False
    for line in out[1:]:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            continue
        if obj.get("id") == "unknown" and "error" in obj:
            error_seen = True
        if obj.get("id") == "r0000" and _validate_response(kind, obj) is None:
            good_seen = True
    results.append(
        CheckResult(
            "malformed request handling",
            error_seen and good_seen,
            f"error_response={error_seen} subsequent_request_served={good_seen}",
        )
    )
    return results


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="wire-protocol conformance harness")
    parser.add_argument("--kind", choices=("scorer", "judge"), required=True)
    parser.add_argument("--requests", type=int, default=100)
    parser.add_argument("command", nargs=argparse.REMAINDER, help="server command after --")
    args = parser.parse_args(argv)
    command = [c for c in args.command if c != "--"]
    if not command:
        parser.error("server command required after --")
    results = run_conformance(command, args.kind, args.requests)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[conformance] {r.name}: {status} ({r.detail})")
        failed += 0 if r.passed else 1
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
