"""Adapter configuration shared by the scorer and judge servers."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_JUDGE_TEMPLATE = (
    "Decide whether the passage entails the claim. Answer yes or no.\n"
    "Passage: {document}\n"
    "Claim: {claim}\n"
    "Answer:"
)


@dataclass(frozen=True)
class AdapterConfig:
    model: str
    device: str = "cpu"
    max_batch: int = 16
    judge_template: str = DEFAULT_JUDGE_TEMPLATE

    def validate(self) -> None:
        if not self.model:
            raise ValueError("model reference must be non-empty")
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        for slot in ("{claim}", "{document}"):
            if self.judge_template.count(slot) != 1:
                raise ValueError(f"judge template must contain {slot} exactly once")
