"""Scam criteria taxonomy, reasoning prompts, and criteria matching.

The seven broad criteria are derived from YouTube's policy on spam,
deceptive practices, and scams; the three narrow criteria refine them by
lure type. Canonical sentences are the single source of truth: prompts,
annotation forms, and reasoning parsers all reference them by id.
"""

from __future__ import annotations

import re
from enum import Enum
from importlib import resources
from typing import Iterable

BROAD_CRITERIA: dict[str, str] = {
    "C1": "Claims to commit a crime on behalf of the user, regardless of whether it actually does.",
    "C2": "Purports to provide an unbounded giveaway that offers unlimited free items without rules, limit or end.",
    "C3": "Promises viewers they'll see something but instead directs them off-site.",
    "C4": "Gets clicks, views, or traffic off YouTube by promising viewers that they'll make money fast.",
    "C5": "Sends audiences to sites that can spread malware, try to gather personal information or other sites that have a negative impact.",
    "C6": "Offers cash gifts, get rich quick schemes, or pyramid schemes.",
    "C7": "Impersonates an individual, company, or organization.",
}

NARROW_CRITERIA: dict[str, str] = {
    "N1": "Financial or material gain",
    "N2": "In game financial or asset gain",
    "N3": "Redirect to website or app that can be malware or collect personal information",
}

ALL_CRITERIA: dict[str, str] = {**BROAD_CRITERIA, **NARROW_CRITERIA}

# Representative examples shown as annotator tooltips next to each criterion.
CRITERIA_EXAMPLES: dict[str, str] = {
    "C1": "Video instructing viewers to manipulate a company's customer service to obtain free goods or sharing content that directly violates platform policies.",
    "C2": "Claiming to generate unlimited gift card codes or infinite in-game currency through third-party applications.",
    "C3": "Video that promises a movie clip but instead links to an external streaming site.",
    "C4": 'Video that advertises rapid financial or in-game gains in order to redirect users to malicious applications or external websites (e.g., "Get a free $200 Nike Gift Card", "Make $50 per day using Crypto arbitrage bot").',
    "C5": "Video that explicitly instructs viewers to follow links in the description or visit external sites that are potentially harmful.",
    "C6": "Video that promotes unrealistic promises of financial or in-game rewards, such as fraudulent mobile game hacks or earning money by playing games.",
    "C7": "Video that advertises fake customer support number posing as Amazon support.",
}


class Modality(str, Enum):
    """Channel carrying a scam cue. Title and description jointly form `text`."""

    TEXT = "text"
    AUDIO = "audio"
    VIDEO = "video"


class PromptKind(str, Enum):
    SCAM = "scam"
    NONSCAM = "nonscam"


class UnknownCriterionError(KeyError):
    pass


def criterion_text(criterion_id: str) -> str:
    """Return the canonical sentence for a broad (C1..C7) or narrow (N1..N3) id."""
    try:
        return ALL_CRITERIA[criterion_id]
    except KeyError:
        raise UnknownCriterionError(criterion_id) from None


_TEMPLATE_FILES = {
    PromptKind.SCAM: "scam_reasoning_prompt.txt",
    PromptKind.NONSCAM: "nonscam_reasoning_prompt.txt",
}


def build_reasoning_prompt(kind: PromptKind | str) -> str:
    """Load the reasoning-generation prompt for scam or non-scam videos.

    Prompts live in versioned template files under ``scamscope/templates``
    so their wording is a data change, not a code change.
    """
    kind = PromptKind(kind)
    ref = resources.files("scamscope").joinpath("templates", _TEMPLATE_FILES[kind])
    return ref.read_text(encoding="utf-8")


_NON_ALNUM = re.compile(r"[^0-9a-z]+")


def _normalize(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace."""
    return _NON_ALNUM.sub(" ", text.lower()).strip()


_NORMALIZED_CRITERIA = {cid: _normalize(text) for cid, text in ALL_CRITERIA.items()}


def parse_criteria_mentions(reasoning_text: str) -> set[str]:
    """Find which criteria sentences are quoted in free-form reasoning text.

    Matching is canonical-sentence containment after lowercasing and
    punctuation stripping; paraphrases are intentionally not detected.
    An empty result is valid (e.g. non-scam captions).
    """
    hay = f" {_normalize(reasoning_text)} "
    return {
        cid
        for cid, needle in _NORMALIZED_CRITERIA.items()
        if f" {needle} " in hay
    }


def tally_distribution(annotations: Iterable) -> dict[str, int]:
    """Count how often each criterion id was assigned across annotations.

    Accepts any objects exposing ``broad`` and ``narrow`` id collections.
    Criteria absent from every annotation report 0.
    """
    counts = {cid: 0 for cid in ALL_CRITERIA}
    for ann in annotations:
        for cid in getattr(ann, "broad", ()) or ():
            counts[cid] += 1
        for cid in getattr(ann, "narrow", ()) or ():
            counts[cid] += 1
    return counts


def criteria_schema() -> dict:
    """Machine-readable criteria table consumed by the annotation workbench."""
    return {
        "schema_version": 1,
        "broad": [
            {"id": cid, "text": text, "example": CRITERIA_EXAMPLES[cid]}
            for cid, text in BROAD_CRITERIA.items()
        ],
        "narrow": [{"id": cid, "text": text} for cid, text in NARROW_CRITERIA.items()],
        "modalities": [m.value for m in Modality],
    }
