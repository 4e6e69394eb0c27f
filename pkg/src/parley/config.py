"""Engine configuration. Every tunable threshold lives here so ablation runs
can override the defaults from a config file or CLI flag."""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict, fields
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class EngineConfig:
    backend: str = "mock"
    similarity_threshold: float = 0.5
    window_words: int = 50
    ring_seconds: float = 30.0
    gap_seconds: float = 10.0
    suspension_seconds: float = 15.0
    pause_seconds: float = 2.0
    candidate_expiry_seconds: float = 120.0
    ratio_cadence_seconds: float = 30.0
    out_of_order_tolerance: float = 0.5
    embedding_dim: int = 512
    duplicate_overlap_threshold: float = 0.6
    gateway_inflight_cap: int = 4
    gateway_timeout_seconds: float = 20.0
    summary_word_limit: int = 7
    mock_fixture_dir: str | None = None

    def validate(self) -> "EngineConfig":
        positive = [
            "similarity_threshold", "window_words", "ring_seconds",
            "gap_seconds", "suspension_seconds", "pause_seconds",
            "candidate_expiry_seconds", "ratio_cadence_seconds",
            "embedding_dim", "summary_word_limit",
        ]
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.out_of_order_tolerance < 0:
            raise ConfigError("out_of_order_tolerance must be >= 0")
        return self

    def replace(self, **overrides) -> "EngineConfig":
        data = asdict(self)
        data.update(overrides)
        return EngineConfig(**data).validate()

    def to_dict(self) -> dict:
        return asdict(self)


_FIELD_NAMES = {f.name for f in fields(EngineConfig)}


def load_config(path: str | Path | None, **overrides) -> EngineConfig:
    """Load a JSON config file; unknown keys are rejected. Overrides win."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a JSON object")
        unknown = set(data) - _FIELD_NAMES
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return EngineConfig(**data).validate()
