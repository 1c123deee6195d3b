"""Confusion-based metrics, reasoning similarity, cost profiles, reports.

Percentages are carried at full precision internally and rounded to two
decimals only at report serialization. Published reference rows (prior
runs of the text/visual/multimodal detectors on the merged corpus) ship
as constants so reports can juxtapose a fresh run against them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from .corpus import Label, Source
from .model_adapters import Prediction

POSITIVE_LABELS = {"yes", "scam", Label.SCAM}


class EvaluateError(Exception):
    pass


def _is_positive(value) -> bool:
    if isinstance(value, Prediction):
        value = value.label
    if isinstance(value, Label):
        return value == Label.SCAM
    return str(value).lower() in ("yes", "scam")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(preds: Sequence, truths: Sequence) -> ConfusionMatrix:
    """Count the confusion matrix; scam/yes is the positive class."""
    if len(preds) != len(truths):
        raise EvaluateError(f"length mismatch: {len(preds)} predictions vs {len(truths)} truths")
    tp = fp = tn = fn = 0
    for pred, truth in zip(preds, truths):
        p = _is_positive(pred)
        t = _is_positive(truth)
        if p and t:
            tp += 1
        elif p and not t:
            fp += 1
        elif not p and t:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, tn, fn)


@dataclass(frozen=True)
class CoreMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    degenerate: tuple[str, ...] = ()

    def rounded(self) -> dict[str, float]:
        return {
            "accuracy": round(self.accuracy, 2),
            "precision": round(self.precision, 2),
            "recall": round(self.recall, 2),
            "f1": round(self.f1, 2),
        }


def metrics(cm: ConfusionMatrix) -> CoreMetrics:
    """Accuracy/precision/recall/F1 as percentages at full precision.

    Zero-denominator cases report 0 with the affected metric flagged
    rather than NaN.
    """
    if cm.total == 0:
        raise EvaluateError("empty confusion matrix")
    degenerate: list[str] = []
    accuracy = 100.0 * (cm.tp + cm.tn) / cm.total
    if cm.tp + cm.fp == 0:
        precision = 0.0
        degenerate.append("precision")
    else:
        precision = 100.0 * cm.tp / (cm.tp + cm.fp)
    if cm.tp + cm.fn == 0:
        recall = 0.0
        degenerate.append("recall")
    else:
        recall = 100.0 * cm.tp / (cm.tp + cm.fn)
    if precision + recall == 0:
        f1 = 0.0
        degenerate.append("f1")
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return CoreMetrics(accuracy, precision, recall, f1, tuple(degenerate))


def f1_from_pr(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall (both as percentages)."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def reasoning_similarity(
    reference: str, candidate: str, scorer: Callable[[str, str], float]
) -> float:
    """Score reasoning similarity through a pluggable scorer, clamped to [0, 1].

    Production uses an embedding-based semantic scorer behind this
    callable; tests plug in a token-overlap mock. Scorer failures
    propagate to the caller.
    """
    score = float(scorer(reference, candidate))
    return min(1.0, max(0.0, score))


@dataclass(frozen=True)
class CostProfile:
    mean_latency_s: float
    peak_memory_gb: Optional[float]
    n_samples: int


def cost_profile(run_log: Sequence[dict]) -> CostProfile:
    """Mean per-sample latency and peak memory over a run log."""
    if not run_log:
        raise EvaluateError("empty run log")
    latencies = [float(entry["latency_s"]) for entry in run_log]
    memories = [float(entry["memory_gb"]) for entry in run_log if entry.get("memory_gb") is not None]
    peak = max(memories) if memories else None
    return CostProfile(sum(latencies) / len(latencies), peak, len(run_log))


def per_source_breakdown(
    preds: Sequence, truths: Sequence, sources: Sequence
) -> dict[str, CoreMetrics]:
    """Metrics computed independently over each source's subset."""
    if not (len(preds) == len(truths) == len(sources)):
        raise EvaluateError("preds, truths, and sources must align")
    known = {s.value for s in Source}
    by_source: dict[str, tuple[list, list]] = {}
    for pred, truth, source in zip(preds, truths, sources):
        key = source.value if hasattr(source, "value") else str(source)
        if key not in known:
            raise EvaluateError(f"unknown source label {key!r}")
        by_source.setdefault(key, ([], []))[0].append(pred)
        by_source[key][1].append(truth)
    return {src: metrics(confusion(p, t)) for src, (p, t) in sorted(by_source.items())}


@dataclass(frozen=True)
class ResultRow:
    input_modality: str
    model: str
    input_feature: str
    finetuned: bool
    accuracy: float
    precision: float
    recall: float
    f1: float


# Published detector results on the merged corpus, by modality configuration.
REFERENCE_RESULTS: tuple[ResultRow, ...] = (
    ResultRow("Text", "3Layer NN", "Title, Description", True, 88.20, 64.64, 85.08, 73.46),
    ResultRow("Text", "BERT", "Title, Description", True, 90.21, 70.75, 83.52, 76.61),
    ResultRow("Text", "3Layer NN", "Transcription", True, 86.15, 62.14, 71.21, 66.39),
    ResultRow("Text", "BERT", "Transcription", True, 87.99, 65.38, 79.51, 71.76),
    ResultRow("Text", "3Layer NN", "Title, Description, Transcription", True, 90.94, 74.43, 80.40, 77.30),
    ResultRow("Text", "BERT", "Title, Description, Transcription", True, 90.68, 71.35, 85.97, 77.98),
    ResultRow("Visual", "LLaVA-Video-7B", "Video Frames", False, 76.78, 27.40, 12.69, 17.35),
    ResultRow("Visual", "LLaVA-Video-7B", "Video Frames", True, 91.88, 76.81, 82.63, 79.61),
    ResultRow("Multimodal", "LLaVA-Video-7B", "Video Frames + Transcription", True, 91.11, 71.33, 89.76, 79.49),
    ResultRow("Multimodal", "LLaVA-Video-7B", "Video Frames + Title, Description", False, 76.91, 17.27, 5.35, 8.16),
    ResultRow("Multimodal", "LLaVA-Video-7B", "Video Frames + Title, Description", True, 91.87, 74.57, 87.53, 80.53),
)


@dataclass(frozen=True)
class CostRow:
    model: str
    input_feature: str
    inference_s_per_sample: float
    memory_gb: float


REFERENCE_COSTS: tuple[CostRow, ...] = (
    CostRow("3 layer NN", "Title, Description", 0.0004, 0.08),
    CostRow("Bert", "Title, Description", 0.09, 0.99),
    CostRow("3 layer NN", "Transcription", 0.001, 0.09),
    CostRow("Bert", "Transcription", 0.10, 1.00),
    CostRow("3 layer NN", "Title, Description, Transcription", 0.001, 0.10),
    CostRow("Bert", "Title, Description, Transcription", 0.13, 1.00),
    CostRow("LLaVA-Video", "Video Frames", 2.00, 55.58),
    CostRow("LLaVA-Video", "Video Frames, Transcription", 2.09, 66.81),
    CostRow("LLaVA-Video", "Video Frames, Title, Description", 2.05, 57.12),
)

# A scam-type-specific text model generalizes poorly once other scam types
# are merged in; kept for report comparison.
PRIOR_TEXT_MODEL_REFERENCE = {
    "crypto_only": {"accuracy": 94.36, "precision": 95.98, "recall": 88.40, "f1": 92.03},
    "merged_corpus": {"accuracy": 86.53, "precision": 96.53, "recall": 30.96, "f1": 46.88},
}


def build_report(
    core: CoreMetrics,
    per_source: Optional[dict[str, CoreMetrics]] = None,
    cost: Optional[CostProfile] = None,
    model: str = "mock",
    input_feature: str = "Title, Description",
    input_modality: str = "Text",
    finetuned: bool = False,
) -> dict:
    """Serializable evaluation report mirroring the reference table columns."""
    report = {
        "schema_version": 1,
        "row": {
            "input_modality": input_modality,
            "model": model,
            "input_feature": input_feature,
            "finetuned": finetuned,
            **core.rounded(),
        },
        "degenerate": list(core.degenerate),
        "per_source": {
            src: m.rounded() for src, m in (per_source or {}).items()
        },
        "reference_results": [
            {
                "input_modality": r.input_modality,
                "model": r.model,
                "input_feature": r.input_feature,
                "finetuned": r.finetuned,
                "accuracy": r.accuracy,
                "precision": r.precision,
                "recall": r.recall,
                "f1": r.f1,
            }
            for r in REFERENCE_RESULTS
        ],
        "prior_text_model_reference": PRIOR_TEXT_MODEL_REFERENCE,
    }
    if cost is not None:
        report["cost"] = {
            "mean_latency_s_per_sample": round(cost.mean_latency_s, 4),
            "peak_memory_gb": cost.peak_memory_gb,
            "n_samples": cost.n_samples,
        }
        report["reference_costs"] = [
            {
                "model": r.model,
                "input_feature": r.input_feature,
                "inference_s_per_sample": r.inference_s_per_sample,
                "memory_gb": r.memory_gb,
            }
            for r in REFERENCE_COSTS
        ]
    return report


def write_report(path, report: dict) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
