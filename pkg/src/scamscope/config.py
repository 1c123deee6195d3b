"""Versioned pipeline configuration; unknown keys are rejected."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .corpus import SplitSpec
from .preprocess import ModalityConfig


class ConfigError(Exception):
    def __init__(self, message: str, field_errors: Optional[list] = None):
        self.field_errors = field_errors or []
        super().__init__(message)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SplitSection(_Strict):
    scam_quotas: dict[str, int] = Field(default_factory=dict)
    nonscam_total: int = 0

    def to_spec(self) -> SplitSpec:
        return SplitSpec.from_dict(self.scam_quotas, self.nonscam_total)


class ModalitySection(_Strict):
    use_title_desc: bool = True
    use_transcript: bool = False
    use_frames: bool = False

    def to_modality_config(self) -> ModalityConfig:
        return ModalityConfig(self.use_title_desc, self.use_transcript, self.use_frames)


class AdapterSection(_Strict):
    translator: str = "identity"
    transcriber: str = "none"
    model: str = "mock"
    ruleset_path: Optional[str] = None


class SeedSection(_Strict):
    split: int = 0
    batch: int = 0
    perturb: int = 0


class ApiSection(_Strict):
    host: str = "127.0.0.1"
    port: int = 8787
    token: Optional[str] = None


class PipelineConfig(_Strict):
    schema_version: Literal[1] = 1
    corpus_dir: str = "corpus"
    cache_dir: str = "cache"
    split: SplitSection = Field(default_factory=SplitSection)
    modalities: ModalitySection = Field(default_factory=ModalitySection)
    adapters: AdapterSection = Field(default_factory=AdapterSection)
    seeds: SeedSection = Field(default_factory=SeedSection)
    daily_quota: int = 50
    api: ApiSection = Field(default_factory=ApiSection)


def load_config(path) -> PipelineConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as exc:
        errors = [
            {"field": ".".join(str(p) for p in e["loc"]), "message": e["msg"]}
            for e in exc.errors()
        ]
        raise ConfigError(f"invalid config {path}", errors) from exc
