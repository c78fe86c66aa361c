"""Run configuration and per-purpose random streams."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .labeler import LabelConfig
from .signal_backtest import MODES


def derive_seed(seed: int, purpose: str) -> np.random.SeedSequence:
    """Independent stream for ``purpose`` (e.g. ``"tie-break"``) under one run seed."""
    key = int.from_bytes(hashlib.sha256(purpose.encode("utf-8")).digest()[:4], "little")
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(key,))


@dataclass
class RunConfig:
    window_len: int = 1250
    q_low: float = 0.3
    q_high: float = 0.6
    min_history: int = 250
    mode: str = "proportional"
    basket: list[str] | None = None
    seed: int = 0
    out: str = "out"
    headlines: str | None = None
    prices: str | None = None
    predictions: list[str] = field(default_factory=list)
    tagger: str | None = None
    allow_partial: bool = False
    # synthetic corpus used by gen-data and by pipeline when no files are given
    n_tickers: int = 5
    n_days: int = 2000
    n_headlines: int = 1000

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        self.label_config()
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")
        if self.basket is not None and not self.basket:
            raise ValidationError("basket, when given, must list at least one ticker")

    def label_config(self) -> LabelConfig:
        return LabelConfig(self.window_len, self.q_low, self.q_high, self.min_history)

    def stream(self, purpose: str) -> np.random.SeedSequence:
        return derive_seed(self.seed, purpose)

    @classmethod
    def from_file(cls, path) -> RunConfig:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"no such file: {path}")
        with path.open(encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: invalid JSON ({exc.msg})") from None
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown config key(s): {', '.join(unknown)}")
        return cls(**data)

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)
