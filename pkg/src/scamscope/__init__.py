"""Toolkit for building, annotating, and evaluating a multimodal
scam-video detection pipeline grounded in seven policy-derived criteria."""

__version__ = "0.1.0"

from .corpus import Corpus, Label, Source, SplitSpec, VideoRecord, build_split
from .policy import (
    BROAD_CRITERIA,
    NARROW_CRITERIA,
    Modality,
    criterion_text,
    parse_criteria_mentions,
)
from .preprocess import INSTRUCTION, ModalityConfig, PromptBundle, assemble_prompt, sample_frames

__all__ = [
    "BROAD_CRITERIA",
    "Corpus",
    "INSTRUCTION",
    "Label",
    "Modality",
    "ModalityConfig",
    "NARROW_CRITERIA",
    "PromptBundle",
    "Source",
    "SplitSpec",
    "VideoRecord",
    "assemble_prompt",
    "build_split",
    "criterion_text",
    "parse_criteria_mentions",
    "sample_frames",
]
