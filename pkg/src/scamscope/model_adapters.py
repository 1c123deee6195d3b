"""Classifier adapter contract, output parsing, LoRA job specs, and a mock.

The detection model itself runs out of process (GPU fine-tuning and
inference are not part of this toolkit); everything crosses the adapter
boundary as raw text whose first token is Yes or No followed by free-form
reasoning. The mock model gives the pipeline a deterministic stand-in for
offline tests and smoke runs.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol, Sequence

import jsonschema

from .corpus import Corpus, Label, SplitAssignment
from .policy import BROAD_CRITERIA, criterion_text, parse_criteria_mentions
from .preprocess import ArtifactCache, ModalityConfig, PromptBundle

TRAIN_SPEC_SCHEMA_VERSION = 1

# Low-rank adaptation defaults; at these settings the adapted layers hold
# 55.71 MB of trainable weights out of 8086.05 MB total (0.69%).
DEFAULT_LORA_RANK = 128
DEFAULT_LORA_ALPHA = 32
REFERENCE_TRAINABLE = {"trainable_mb": 55.71, "total_mb": 8086.05, "trainable_pct": 0.69}


class AdapterError(Exception):
    pass


class UnparseableOutputError(AdapterError):
    def __init__(self, raw_text: str):
        self.raw_text = raw_text
        super().__init__(f"model output does not start with yes/no: {raw_text!r}")


class MissingArtifactsError(AdapterError):
    def __init__(self, missing_by_video: dict[str, list[str]]):
        self.missing_by_video = missing_by_video
        detail = "; ".join(f"{vid}: {', '.join(files)}" for vid, files in missing_by_video.items())
        super().__init__(f"missing preprocess artifacts: {detail}")


@dataclass(frozen=True)
class AdapterDescriptor:
    name: str
    modality_support: tuple[str, ...]


class ModelAdapter(Protocol):
    descriptor: AdapterDescriptor

    def classify(self, bundle: PromptBundle) -> str: ...


@dataclass
class Prediction:
    label: str  # "yes" | "no"
    reasoning: str
    criteria: frozenset[str] = frozenset()
    latency_s: float = 0.0
    peak_memory_gb: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "reasoning": self.reasoning,
            "criteria": sorted(self.criteria),
            "latency_s": self.latency_s,
            "peak_memory_gb": self.peak_memory_gb,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Prediction":
        return cls(
            label=d["label"],
            reasoning=d["reasoning"],
            criteria=frozenset(d.get("criteria", ())),
            latency_s=float(d.get("latency_s", 0.0)),
            peak_memory_gb=d.get("peak_memory_gb"),
        )


def parse_prediction(raw_text: str, latency_s: float = 0.0) -> Prediction:
    """Parse raw adapter output into a Prediction.

    The label comes only from the leading token, case-insensitively and
    with surrounding punctuation stripped ("Yes,", "yes.", "YES:" all
    parse). The remainder is the reasoning; criteria references are the
    broad criteria whose canonical sentences the reasoning quotes.
    """
    parts = raw_text.strip().split(None, 1)
    if not parts:
        raise UnparseableOutputError(raw_text)
    token = parts[0].strip(string.punctuation).lower()
    if token not in ("yes", "no"):
        raise UnparseableOutputError(raw_text)
    reasoning = parts[1] if len(parts) > 1 else ""
    criteria = frozenset(
        cid for cid in parse_criteria_mentions(reasoning) if cid in BROAD_CRITERIA
    )
    return Prediction(label=token, reasoning=reasoning, criteria=criteria, latency_s=latency_s)


def format_prediction(label: str, reasoning: str) -> str:
    """Inverse of parse_prediction for well-formed (label, reasoning) pairs."""
    if label not in ("yes", "no"):
        raise ValueError(f"label must be yes or no, got {label!r}")
    lead = "Yes" if label == "yes" else "No"
    return f"{lead}. {reasoning}" if reasoning else f"{lead}."


def trainable_fraction(trainable_mb: float, total_mb: float) -> float:
    """Percent of parameters that are trainable, 2-decimal rounding."""
    if trainable_mb <= 0 or total_mb <= 0:
        raise ValueError("sizes must be positive")
    return round(100.0 * trainable_mb / total_mb, 2)


@dataclass(frozen=True)
class LoraConfig:
    rank: int = DEFAULT_LORA_RANK
    alpha: int = DEFAULT_LORA_ALPHA
    target_layer_selector: str = ""
    # epochs / learning rate / anything else the trainer understands
    passthrough: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        if self.rank <= 0:
            raise ValueError("rank must be positive")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "alpha": self.alpha,
            "target_layer_selector": self.target_layer_selector,
            "passthrough": {k: v for k, v in self.passthrough},
        }


TRAIN_SPEC_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["schema_version", "kind", "lora", "modality_config", "dataset_ref", "samples"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": TRAIN_SPEC_SCHEMA_VERSION},
        "kind": {"const": "train_job"},
        "dataset_ref": {"type": "string"},
        "instruction_template_ref": {"type": "string"},
        "lora": {
            "type": "object",
            "required": ["rank", "alpha"],
            "properties": {
                "rank": {"type": "integer", "exclusiveMinimum": 0},
                "alpha": {"type": "integer", "exclusiveMinimum": 0},
                "target_layer_selector": {"type": "string"},
                "passthrough": {"type": "object"},
            },
        },
        "modality_config": {
            "type": "object",
            "required": ["use_title_desc", "use_transcript", "use_frames"],
        },
        "samples": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["video_id", "bundle", "target"],
                "properties": {
                    "video_id": {"type": "string"},
                    "bundle": {"type": "object"},
                    "target": {"type": "string"},
                },
            },
        },
        "warnings": {"type": "array", "items": {"type": "string"}},
    },
}


@dataclass
class EmitResult:
    path: Path
    n_samples: int
    warnings: list[str]


def _target_for(record, reasoning: Optional[str], criteria: Optional[Sequence[str]],
                warnings: list[str]) -> str:
    label = "yes" if record.effective_label == Label.SCAM else "no"
    if reasoning:
        return format_prediction(label, reasoning)
    if criteria:
        sentences = " ".join(f"[{criterion_text(c)}]" for c in sorted(criteria))
        warnings.append(f"{record.video_id}: no reasoning text, synthesized from criteria")
        return format_prediction(label, sentences)
    warnings.append(f"{record.video_id}: no reasoning or criteria, bare-label target")
    return format_prediction(label, "")


def emit_train_spec(
    split: SplitAssignment,
    corpus: Corpus,
    cache: ArtifactCache,
    modality_config: ModalityConfig,
    lora: LoraConfig,
    out_path,
    dataset_ref: str = "corpus",
    reasonings: Optional[dict[str, str]] = None,
    annotations: Optional[dict[str, Sequence[str]]] = None,
) -> EmitResult:
    """Serialize an instruction-tuning job: one (prompt bundle, target) pair
    per train video.

    Targets are "Yes"/"No" plus reasoning text when one is known (human or
    generated), else the video's annotated criteria sentences, else the
    bare label; anything below the first tier is reported in the warnings
    list, never silently. The written file validates against
    TRAIN_SPEC_SCHEMA and is byte-stable for identical inputs.
    """
    if not split.train_ids:
        raise AdapterError("split has an empty train set")
    reasonings = reasonings or {}
    annotations = annotations or {}
    missing: dict[str, list[str]] = {}
    for vid in sorted(split.train_ids):
        record = corpus.get(vid)
        files = cache.missing(vid, modality_config)
        if files:
            missing[vid] = files
    if missing:
        raise MissingArtifactsError(missing)

    warnings: list[str] = []
    samples = []
    for vid in sorted(split.train_ids):
        record = corpus.get(vid)
        bundle = cache.load_bundle(record, modality_config)
        target = _target_for(record, reasonings.get(vid), annotations.get(vid), warnings)
        samples.append({"video_id": vid, "bundle": bundle.to_dict(), "target": target})

    spec = {
        "schema_version": TRAIN_SPEC_SCHEMA_VERSION,
        "kind": "train_job",
        "dataset_ref": dataset_ref,
        "instruction_template_ref": "instruction:v1",
        "lora": lora.to_dict(),
        "modality_config": modality_config.to_dict(),
        "samples": samples,
        "warnings": warnings,
    }
    jsonschema.validate(spec, TRAIN_SPEC_SCHEMA)
    out_path = Path(out_path)
    out_path.write_text(json.dumps(spec, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    return EmitResult(out_path, len(samples), warnings)


@dataclass(frozen=True)
class MockRule:
    keyword: str
    label: str  # "yes" | "no"
    criteria: tuple[str, ...] = ()


class MockModel:
    """Deterministic keyword-rule classifier used as a test double.

    Rules are checked in order against the bundle's text fields; the first
    match wins and the emitted reasoning quotes the rule's criteria
    sentences so downstream parsing recovers them. No match yields "No.".
    """

    def __init__(self, rules: Sequence[MockRule]):
        if not rules:
            raise AdapterError("mock model needs a non-empty ruleset")
        self.rules = tuple(rules)
        self.descriptor = AdapterDescriptor(name="mock", modality_support=("text",))

    def classify(self, bundle: PromptBundle) -> str:
        hay = " ".join(
            part
            for part in (bundle.title_norm, bundle.description_norm, bundle.transcript or "")
            if part
        ).lower()
        for rule in self.rules:
            if rule.keyword.lower() in hay:
                if rule.label == "yes":
                    sentences = " ".join(f"[{criterion_text(c)}]" for c in rule.criteria)
                    reasoning = sentences if sentences else f"matched {rule.keyword!r}"
                    return format_prediction("yes", reasoning)
                return format_prediction("no", f"matched {rule.keyword!r}")
        return "No."


def mock_model(ruleset: Sequence[MockRule] | dict) -> MockModel:
    """Build the mock adapter from MockRules or a {keyword: (label, criteria)} map."""
    if isinstance(ruleset, dict):
        rules = [
            MockRule(keyword=k, label=v[0], criteria=tuple(v[1]) if len(v) > 1 else ())
            for k, v in ruleset.items()
        ]
    else:
        rules = list(ruleset)
    return MockModel(rules)


def load_ruleset(path) -> list[MockRule]:
    """Read mock rules from a JSON file: [{keyword, label, criteria}]."""
    data = json.loads(Path(path).read_text())
    return [
        MockRule(
            keyword=row["keyword"],
            label=row["label"],
            criteria=tuple(row.get("criteria", ())),
        )
        for row in data
    ]
