"""Reference ``scorer/1`` stub server over stdio.

Modes:
  constant  fixed logprob/tokens for every text (default -1.0 / 1)
  length    logprob = -len(text), tokens = len(text) + 1
  ngram     backed by a saved character n-gram model file

``--scramble N`` buffers N requests and answers them in reverse order, to
exercise client-side id matching. Run as ``python -m crossling.stub_scorer``.
"""

from __future__ import annotations

import argparse
import json
import sys

from .scoring import SCORER_PROTOCOL, CharNGramModel


def _respond(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, ensure_ascii=False) + "\n")
    sys.stdout.flush()


def _handle(line: str, args, model: CharNGramModel | None) -> dict:
    try:
        req = json.loads(line)
        rid = req["id"]
        text = req["text"]
    except (json.JSONDecodeError, KeyError, TypeError):
        rid = "unknown"
        if isinstance(line, str):
            try:
                maybe = json.loads(line)
                if isinstance(maybe, dict) and isinstance(maybe.get("id"), str):
                    rid = maybe["id"]
            except json.JSONDecodeError:
                pass
        return {"id": rid, "error": "malformed request line"}
    if not isinstance(text, str):
        return {"id": rid, "error": "text must be a string"}
    if args.mode == "constant":
        return {"id": rid, "logprob": args.logprob, "tokens": args.tokens}
    if args.mode == "length":
        return {"id": rid, "logprob": -float(len(text)), "tokens": len(text) + 1}
    result = model.score(text)
    return {"id": rid, "logprob": result.logprob_sum, "tokens": result.token_count}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="scorer/1 stub server")
    parser.add_argument("--mode", choices=("constant", "length", "ngram"), default="constant")
    parser.add_argument("--logprob", type=float, default=-1.0)
    parser.add_argument("--tokens", type=int, default=1)
    parser.add_argument("--model", help="saved n-gram model path (mode=ngram)")
    parser.add_argument("--scramble", type=int, default=0, metavar="N",
                        help="buffer N requests, reply in reverse order")
    args = parser.parse_args(argv)

    model = None
    if args.mode == "ngram":
        if not args.model:
            parser.error("--model is required for mode=ngram")
        model = CharNGramModel.load(args.model)

    _respond({"protocol": SCORER_PROTOCOL})
    buffer: list[dict] = []
    for line in sys.stdin:
        if not line.strip():
            continue
        resp = _handle(line, args, model)
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
