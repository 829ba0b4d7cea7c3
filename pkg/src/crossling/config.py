"""Experiment configuration: JSON schema, validation, hashing, handle
resolution.

The config hash covers everything except ``output_dir`` so reruns into a
different directory still produce byte-identical artifacts; every artifact
carries the hash so mismatched pieces cannot be combined silently.
"""

from __future__ import annotations

from pathlib import Path

import jsonschema

from .errors import ConfigError, DataError
from .io import canonical_json, read_json, sha256_hex
from .retrieval import BaselineLexicalJudge, ExternalJudge
from .scoring import CharNGramModel, ExternalScorer

_HANDLE_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["builtin-ngram", "external"]},
        "model": {"type": "string"},
        "command": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "url": {"type": "string"},
        "identity": {"type": "string"},
        "timeout": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "version": {"const": 1},
        "seed": {"type": "integer"},
        "lang": {"type": "string", "minLength": 2, "maxLength": 3},
        "culture": {"type": "string"},
        "output_dir": {"type": "string"},
        "script_policy": {
            "type": "object",
            "properties": {
                "en_allowed": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "xx_allowed": {"type": "array", "items": {"type": "string"}, "minItems": 1},
            },
            "required": ["en_allowed", "xx_allowed"],
            "additionalProperties": False,
        },
        "corpora": {
            "type": "object",
            "properties": {"en": {"type": "string"}, "xx": {"type": "string"}},
            "additionalProperties": False,
        },
        "pairs": {"type": "string"},
        "bridge_template": {
            "type": "object",
            "properties": {
                "lang": {"type": "string"},
                "pattern": {"type": "string"},
                "display_name": {"type": "string"},
            },
            "required": ["lang", "pattern"],
            "additionalProperties": False,
        },
        "mix_plan": {
            "type": "object",
            "properties": {
                "mono_char_budget": {"type": "integer", "exclusiveMinimum": 0},
                "parallel_char_budget": {"type": "integer", "exclusiveMinimum": 0},
                "ratio": {"type": "string", "pattern": "^[1-9][0-9]*:[1-9][0-9]*$"},
            },
            "required": ["mono_char_budget", "parallel_char_budget"],
            "additionalProperties": False,
        },
        "questions": {
            "type": "object",
            "properties": {"en": {"type": "string"}, "xx": {"type": "string"}},
            "additionalProperties": False,
        },
        "scorers": {
            "type": "object",
            "properties": {
                "bridge": {"type": "object", "additionalProperties": _HANDLE_SCHEMA},
                "no_bridge": {"type": "object", "additionalProperties": _HANDLE_SCHEMA},
            },
            "additionalProperties": False,
        },
        "retrieval": {
            "type": "object",
            "properties": {
                "k": {"type": "integer", "minimum": 1},
                "max_chars": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "judge": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["baseline-lexical", "external"]},
                "threshold": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "command": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "url": {"type": "string"},
                "identity": {"type": "string"},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "ema_weight": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
    },
    "required": ["version", "seed", "lang"],
    "additionalProperties": False,
}


def validate_raw(raw: dict, where: str = "config") -> None:
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        location = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {location}: {exc.message}") from exc


class ExperimentConfig:
    def __init__(self, raw: dict, base_dir: Path):
        self.raw = raw
        self.base_dir = base_dir
        hashed = {k: v for k, v in raw.items() if k != "output_dir"}
        self.config_hash = sha256_hex(canonical_json(hashed))

    def with_updates(self, updates) -> "ExperimentConfig":
        """New config with flag overrides folded in (and re-validated) so
        the hash always reflects the effective experiment parameters."""
        import copy

        raw = copy.deepcopy(self.raw)
        for path, value in updates:
            node = raw
            for key in path[:-1]:
                node = node.setdefault(key, {})
            node[path[-1]] = value
        validate_raw(raw, where="config after flag overrides")
        return ExperimentConfig(raw, self.base_dir)

    @property
    def seed(self) -> int:
        return self.raw["seed"]

    @property
    def lang(self) -> str:
        return self.raw["lang"]

    @property
    def culture(self) -> str:
        return self.raw.get("culture", self.lang)

    @property
    def ema_weight(self) -> float:
        return self.raw.get("ema_weight", 0.8)

    @property
    def retrieval_k(self) -> int:
        return self.raw.get("retrieval", {}).get("k", 50)

    @property
    def max_chars(self) -> int:
        return self.raw.get("retrieval", {}).get("max_chars", 5000)

    def path(self, *keys: str, required: bool = True) -> Path | None:
        """Resolve a config path relative to the config file, requiring it
        to exist."""
        node = self.raw
        for key in keys:
            if not isinstance(node, dict) or key not in node:
                if required:
                    raise ConfigError(f"config is missing {'.'.join(keys)}")
                return None
            node = node[key]
        path = (self.base_dir / node).resolve()
        if required and not path.exists():
            raise ConfigError(f"{'.'.join(keys)}: path does not exist: {path}")
        return path

    def allowed_scripts(self, side: str) -> list[str]:
        policy = self.raw.get("script_policy")
        if policy is None:
            raise ConfigError("config is missing script_policy")
        return policy[f"{side}_allowed"]

    def scorer_handle(self, setting: str, step: int) -> dict:
        scorers = self.raw.get("scorers", {})
        table = scorers.get(setting)
        if table is None:
            raise ConfigError(f"config has no scorers for setting {setting!r}")
        handle = table.get(str(step))
        if handle is None:
            raise ConfigError(f"no scorer for setting {setting!r} at step {step}")
        return handle

    def resolve_scorer(self, setting: str, step: int):
        handle = self.scorer_handle(setting, step)
        if handle["kind"] == "builtin-ngram":
            if "model" not in handle:
                raise ConfigError("builtin-ngram handle needs a model path")
            model_path = (self.base_dir / handle["model"]).resolve()
            if not model_path.exists():
                raise ConfigError(f"scorer model does not exist: {model_path}")
            return CharNGramModel.load(model_path)
        return ExternalScorer(
            command=handle.get("command"),
            url=handle.get("url"),
            identity=handle.get("identity"),
            timeout=handle.get("timeout", 60.0),
        )

    def resolve_judge(self):
        handle = self.raw.get("judge", {"kind": "baseline-lexical"})
        if handle["kind"] == "baseline-lexical":
            return None  # lang-specific; callers build per side
        return ExternalJudge(
            command=handle.get("command"),
            url=handle.get("url"),
            identity=handle.get("identity"),
        )

    def baseline_judge(self, lang: str) -> BaselineLexicalJudge:
        handle = self.raw.get("judge", {"kind": "baseline-lexical"})
        return BaselineLexicalJudge(lang, handle.get("threshold", 0.5))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path}")
    try:
        raw = read_json(path)
    except DataError as exc:
        raise ConfigError(str(exc)) from exc
    validate_raw(raw, where=f"config {path}")
    return ExperimentConfig(raw, base_dir=path.parent)
