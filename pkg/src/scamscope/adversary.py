"""Adversarial perturbations and robustness measurement.

Perturbations imitate evasion tactics seen in the wild: leet character
substitution and keyword obfuscation against text detectors, Gaussian
frame noise against visual ones. All transforms are seeded and pure, so
per-sample application can run in parallel with seeds derived per index.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .model_adapters import ModelAdapter, parse_prediction
from .preprocess import PromptBundle

DEFAULT_LEET_MAP: dict[str, tuple[str, ...]] = {
    "a": ("@",),
    "e": ("3",),
    "i": ("!", "1"),
    "o": ("0",),
    "s": ("$",),
    "t": ("7",),
}

# Observed accuracy drops at the reference operating points: leet text on
# the text-only detector, frame noise on the visual-only one.
REFERENCE_ACCURACY_DROPS = {"text_leet": 33.0, "visual_frame_noise": 3.0}


class AdversaryError(Exception):
    pass


class BaselineAccuracyError(AdversaryError):
    def __init__(self, misclassified: list[str]):
        self.misclassified = misclassified
        super().__init__(
            f"robustness eval requires a 100% baseline; misclassified: {misclassified}"
        )


def derive_seed(seed: int, index: int) -> int:
    """Per-sample seed so parallel application stays deterministic."""
    return seed ^ index


def leet_transform(
    text: str,
    intensity: float,
    seed: int,
    leet_map: Optional[dict[str, tuple[str, ...]]] = None,
) -> str:
    """Substitute mappable characters with visually similar glyphs.

    Each mappable character (matched case-insensitively) is independently
    replaced with probability ``intensity`` using the seeded generator;
    everything else is untouched. Intensity 0 is a bitwise identity.
    """
    if not 0.0 <= intensity <= 1.0:
        raise AdversaryError(f"intensity must be in [0, 1], got {intensity}")
    table = leet_map or DEFAULT_LEET_MAP
    rng = random.Random(seed)
    out = []
    for ch in text:
        subs = table.get(ch.lower())
        if subs and rng.random() < intensity:
            out.append(subs[0] if len(subs) == 1 else rng.choice(subs))
        else:
            out.append(ch)
    return "".join(out)


class ObfuscationMode(str, Enum):
    REMOVE = "remove"
    MISSPELL = "misspell"


def _keyword_pattern(keyword: str) -> re.Pattern:
    escaped = re.escape(keyword).replace(r"\ ", r"\s+")
    return re.compile(rf"(?<!\w){escaped}(?!\w)", re.IGNORECASE)


def keyword_obfuscate(
    text: str,
    keywords: Sequence[str],
    mode: ObfuscationMode | str,
    seed: int,
) -> str:
    """Remove or misspell whole-word keyword matches.

    ``remove`` deletes matches and renormalizes whitespace; ``misspell``
    swaps one seeded pair of adjacent differing characters inside each
    match. Text without matches comes back unchanged.
    """
    mode = ObfuscationMode(mode)
    if mode == ObfuscationMode.REMOVE:
        result = text
        for kw in keywords:
            result = _keyword_pattern(kw).sub(" ", result)
        return " ".join(result.split())

    rng = random.Random(seed)
    spans: list[tuple[int, int]] = []
    for kw in keywords:
        for m in _keyword_pattern(kw).finditer(text):
            spans.append(m.span())
    chars = list(text)
    # Apply right to left so earlier spans keep their offsets.
    for start, end in sorted(spans, reverse=True):
        word = text[start:end]
        candidates = [i for i in range(len(word) - 1) if word[i] != word[i + 1]]
        if not candidates:
            continue
        i = rng.choice(candidates)
        swapped = list(word)
        swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
        chars[start:end] = swapped
    return "".join(chars)


def frame_noise(
    frames: np.ndarray,
    sigma: float,
    seed: int,
    value_range: tuple[float, float] = (0.0, 255.0),
) -> np.ndarray:
    """Add per-pixel zero-mean Gaussian noise, clamped to the pixel range.

    Shape and dtype are preserved; sigma 0 returns a bit-identical copy.
    """
    if sigma < 0:
        raise AdversaryError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0:
        return frames.copy()
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=frames.shape)
    lo, hi = value_range
    noisy = np.clip(frames.astype(np.float64) + noise, lo, hi)
    return noisy.astype(frames.dtype)


@dataclass(frozen=True)
class Perturbation:
    descriptor: str
    apply: Callable[[PromptBundle], PromptBundle]


def text_perturbation(descriptor: str, fn: Callable[[str], str]) -> Perturbation:
    """Lift a string transform onto a bundle's text fields."""

    def apply(bundle: PromptBundle) -> PromptBundle:
        return replace(
            bundle,
            title_norm=fn(bundle.title_norm),
            description_norm=fn(bundle.description_norm),
            transcript=fn(bundle.transcript) if bundle.transcript is not None else None,
        )

    return Perturbation(descriptor, apply)


def leet_perturbation(intensity: float, seed: int) -> Perturbation:
    return text_perturbation(
        f"leet(intensity={intensity},seed={seed})",
        lambda s: leet_transform(s, intensity, seed),
    )


def keyword_perturbation(keywords: Sequence[str], mode: ObfuscationMode | str, seed: int) -> Perturbation:
    return text_perturbation(
        f"keyword({ObfuscationMode(mode).value},seed={seed})",
        lambda s: keyword_obfuscate(s, keywords, mode, seed),
    )


def identity_perturbation() -> Perturbation:
    return Perturbation("identity", lambda bundle: bundle)


@dataclass(frozen=True)
class PerturbationReport:
    model_descriptor: str
    perturbation_descriptor: str
    baseline_accuracy: float
    perturbed_accuracy: float
    drop_pct: float

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "model_descriptor": self.model_descriptor,
            "perturbation_descriptor": self.perturbation_descriptor,
            "baseline_accuracy": self.baseline_accuracy,
            "perturbed_accuracy": self.perturbed_accuracy,
            "drop_pct": self.drop_pct,
            "reference_drops": REFERENCE_ACCURACY_DROPS,
        }


def _truth_token(truth) -> str:
    value = truth.value if hasattr(truth, "value") else str(truth)
    return "yes" if value.lower() in ("yes", "scam") else "no"


def robustness_eval(
    model: ModelAdapter,
    dataset: Sequence[tuple[PromptBundle, str]],
    perturbation: Perturbation,
) -> PerturbationReport:
    """Measure the accuracy drop a perturbation causes.

    The dataset must contain only samples the model already classifies
    correctly; the baseline is re-verified and must be 100%, so the drop
    is exactly the fraction of samples flipped by the perturbation.
    """
    if not dataset:
        raise AdversaryError("empty dataset")
    misclassified = []
    for i, (bundle, truth) in enumerate(dataset):
        pred = parse_prediction(model.classify(bundle))
        if pred.label != _truth_token(truth):
            misclassified.append(getattr(bundle, "title_norm", f"sample[{i}]"))
    if misclassified:
        raise BaselineAccuracyError(misclassified)

    correct = 0
    for bundle, truth in dataset:
        perturbed = perturbation.apply(bundle)
        pred = parse_prediction(model.classify(perturbed))
        if pred.label == _truth_token(truth):
            correct += 1
    perturbed_accuracy = 100.0 * correct / len(dataset)
    return PerturbationReport(
        model_descriptor=model.descriptor.name,
        perturbation_descriptor=perturbation.descriptor,
        baseline_accuracy=100.0,
        perturbed_accuracy=perturbed_accuracy,
        drop_pct=100.0 - perturbed_accuracy,
    )
