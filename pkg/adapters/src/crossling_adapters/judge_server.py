"""Instruction-model entailment judge speaking ``judge/1``.

The model never generates freely: the prompt is scored against the two
continuations " yes" and " no" and the higher-likelihood readout wins
(ties resolve to no). Deterministic for a fixed model and template.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from .config import DEFAULT_JUDGE_TEMPLATE, AdapterConfig
from .serving import serve_http, serve_stdio

JUDGE_PROTOCOL = "judge/1"


class YesNoJudge:
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
        self._yes = self.tokenizer.encode(" yes", add_special_tokens=False) or \
            self.tokenizer.encode("yes", add_special_tokens=False)
        self._no = self.tokenizer.encode(" no", add_special_tokens=False) or \
            self.tokenizer.encode("no", add_special_tokens=False)
        if not self._yes or not self._no:
            raise ValueError("tokenizer cannot encode the yes/no readouts")

    def _continuation_logprob(self, prompt_ids: list[int], readout: list[int]) -> float:
        torch = self._torch
        input_ids = prompt_ids + readout
        with torch.no_grad():
            tensor = torch.tensor([input_ids], device=self.config.device)
            logits = self.model(tensor).logits[0].float()
        logprobs = torch.log_softmax(logits[:-1], dim=-1)
        total = 0.0
        for offset, token in enumerate(readout):
            position = len(prompt_ids) - 1 + offset
            total += logprobs[position, token].item()
        return total

    def judge(self, claim: str, document: str) -> bool:
        prompt = self.config.judge_template.replace("{claim}", claim).replace(
            "{document}", document
        )
        prompt_ids = self.tokenizer.encode(prompt, add_special_tokens=False)
        bos = self.tokenizer.bos_token_id
        if bos is not None:
            prompt_ids = [bos] + prompt_ids
        if not prompt_ids:
            raise ValueError("empty prompt after tokenization")
        yes = self._continuation_logprob(prompt_ids, self._yes)
        no = self._continuation_logprob(prompt_ids, self._no)
        return yes > no

    def handle(self, request: dict) -> dict:
        claim = request.get("claim")
        document = request.get("document")
        if not isinstance(claim, str) or not isinstance(document, str):
            raise ValueError("claim and document must be strings")
        return {"entails": self.judge(claim, document)}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="judge/1 entailment server")
    parser.add_argument("--model", required=True, help="model path or hub reference")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-batch", type=int, default=16, dest="max_batch")
    parser.add_argument("--template-file", help="prompt template with {claim} and {document}")
    parser.add_argument("--transport", choices=("stdio", "http"), default="stdio")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=0)
    args = parser.parse_args(argv)

    template = DEFAULT_JUDGE_TEMPLATE
    if args.template_file:
        template = Path(args.template_file).read_text(encoding="utf-8")
    judge = YesNoJudge(
        AdapterConfig(
            model=args.model,
            device=args.device,
            max_batch=args.max_batch,
            judge_template=template,
        )
    )
    if args.transport == "stdio":
        return serve_stdio(JUDGE_PROTOCOL, judge.handle, max_batch=args.max_batch)
    serve_http(JUDGE_PROTOCOL, judge.handle, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
