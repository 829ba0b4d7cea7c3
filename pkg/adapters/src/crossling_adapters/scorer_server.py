"""Causal-LM scorer speaking ``scorer/1``.

logprob is the natural-log sum of next-token log-probabilities under the
wrapped model; tokens is the scored-token count under the model's own
tokenizer. Scoring is greedy and sampling-free, so repeated texts yield
identical responses (CPU float32; residual nondeterminism on accelerators
is a property of the runtime, not of this server).
"""

from __future__ import annotations

import argparse

from .config import AdapterConfig
from .serving import serve_http, serve_stdio

SCORER_PROTOCOL = "scorer/1"
MAX_TEXT_CODEPOINTS = 32768


class CausalLMScorer:
    def __init__(self, config: AdapterConfig):
        import torch
        from transformers import AutoModelForCausalLM, AutoTokenizer

        config.validate()
        self.config = config
        torch.manual_seed(0)
        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(config.model)
        self.model = AutoModelForCausalLM.from_pretrained(config.model).to(config.device)
        self.model.eval()

    def _input_ids(self, text: str) -> list[int]:
        ids = self.tokenizer.encode(text, add_special_tokens=False)
        bos = self.tokenizer.bos_token_id
        if bos is None:
            bos = self.tokenizer.eos_token_id
        if bos is not None:
            return [bos] + ids
        return ids

    def score(self, text: str) -> tuple[float, int]:
        if len(text) > MAX_TEXT_CODEPOINTS:
            raise ValueError(f"text exceeds {MAX_TEXT_CODEPOINTS} code points")
        input_ids = self._input_ids(text)
        if len(input_ids) < 2:
            raise ValueError("text yields no scorable tokens under this tokenizer")
        torch = self._torch
        with torch.no_grad():
            tensor = torch.tensor([input_ids], device=self.config.device)
            logits = self.model(tensor).logits[0].float()
        logprobs = torch.log_softmax(logits[:-1], dim=-1)
        targets = torch.tensor(input_ids[1:], device=self.config.device)
        # accumulate in float64; the per-token values are float32 either way
        total = logprobs.gather(1, targets.unsqueeze(1)).double().sum().item()
        return total, len(input_ids) - 1

    def handle(self, request: dict) -> dict:
        text = request.get("text")
        if not isinstance(text, str):
            raise ValueError("text must be a string")
        logprob, tokens = self.score(text)
        return {"logprob": logprob, "tokens": tokens}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="scorer/1 causal-LM server")
    parser.add_argument("--model", required=True, help="model path or hub reference")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-batch", type=int, default=16, dest="max_batch")
    parser.add_argument("--transport", choices=("stdio", "http"), default="stdio")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=0)
    args = parser.parse_args(argv)

    scorer = CausalLMScorer(
        AdapterConfig(model=args.model, device=args.device, max_batch=args.max_batch)
    )
    if args.transport == "stdio":
        return serve_stdio(SCORER_PROTOCOL, scorer.handle, max_batch=args.max_batch)
    serve_http(SCORER_PROTOCOL, scorer.handle, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
