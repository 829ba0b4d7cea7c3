"""Reference ``judge/1`` stub server over stdio.

Modes: ``contains`` (entails iff the claim appears verbatim in the
document) and ``lexical`` (the baseline content-term-overlap judge).
Run as ``python -m crossling.stub_judge``.
"""

from __future__ import annotations

import argparse
import json
import sys

from .retrieval import JUDGE_PROTOCOL, BaselineLexicalJudge


def _respond(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, ensure_ascii=False) + "\n")
    sys.stdout.flush()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="judge/1 stub server")
    parser.add_argument("--mode", choices=("contains", "lexical"), default="contains")
    parser.add_argument("--lang", default="en")
    parser.add_argument("--threshold", type=float, default=0.5)
    parser.add_argument("--scramble", type=int, default=0, metavar="N")
    args = parser.parse_args(argv)

    lexical = BaselineLexicalJudge(args.lang, args.threshold) if args.mode == "lexical" else None

    _respond({"protocol": JUDGE_PROTOCOL})
    buffer: list[dict] = []
    for line in sys.stdin:
        if not line.strip():
            continue
        try:
            req = json.loads(line)
            rid = req["id"]
            claim = req["claim"]
            document = req["document"]
        except (json.JSONDecodeError, KeyError, TypeError):
            _respond({"id": "unknown", "error": "malformed request line"})
            continue
        if args.mode == "contains":
            entails = claim in document
        else:
            entails = lexical.judge(claim, document)
        resp = {"id": rid, "entails": entails}
        if args.scramble > 0:
            buffer.append(resp)
            if len(buffer) >= args.scramble:
                for item in reversed(buffer):
                    _respond(item)
                buffer = []
        else:
            _respond(resp)
    for item in reversed(buffer):
        _respond(item)
    return 0


if __name__ == "__main__":
    sys.exit(main())
