import json
import random

import pytest

from scamscope.corpus import Corpus, Label, Source, SplitSpec, VideoRecord

# Per-source composition of the merged corpus: original scam / non-scam
# ground truth counts and how many scams were later relabeled non-scam.
SOURCE_PROFILE = {
    Source.MONETARY: {"scam": 278, "nonscam": 910, "relabeled": 9},
    Source.GIVEAWAY: {"scam": 146, "nonscam": 1925, "relabeled": 5},
    Source.CRYPTO: {"scam": 580, "nonscam": 0, "relabeled": 41},
}

TRAIN_SCAM_QUOTAS = {Source.MONETARY: 200, Source.GIVEAWAY: 100, Source.CRYPTO: 200}
TRAIN_NONSCAM_TOTAL = 1000


def make_record(video_id, source=Source.MONETARY, label=Label.SCAM, title=None,
                description=None, duration_s=120.0, media_path=None):
    return VideoRecord(
        video_id=video_id,
        source=source,
        title=title if title is not None else f"title {video_id}",
        description=description if description is not None else f"description {video_id}",
        ground_truth=label,
        duration_s=duration_s,
        media_path=media_path,
    )


def build_merged_corpus(apply_relabels=True) -> Corpus:
    """Synthetic corpus matching the merged-dataset totals source by source."""
    corpus = Corpus()
    for source, profile in SOURCE_PROFILE.items():
        tag = source.value.lower()
        for i in range(profile["scam"]):
            corpus.add_record(make_record(f"{tag}-scam-{i:04d}", source, Label.SCAM))
        for i in range(profile["nonscam"]):
            corpus.add_record(make_record(f"{tag}-non-{i:04d}", source, Label.NONSCAM))
    if apply_relabels:
        for source, profile in SOURCE_PROFILE.items():
            tag = source.value.lower()
            for i in range(profile["relabeled"]):
                corpus.apply_relabel(
                    f"{tag}-scam-{i:04d}",
                    Label.NONSCAM,
                    "legitimate content on review",
                    "reviewer-1",
                )
    return corpus


def reference_split_spec() -> SplitSpec:
    return SplitSpec.from_dict(
        {s.value: q for s, q in TRAIN_SCAM_QUOTAS.items()}, TRAIN_NONSCAM_TOTAL
    )


def write_manifest(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps({"schema_version": 1, **row}) + "\n")


def manifest_row(video_id, label="scam", title=None, description=None, **extra):
    row = {
        "video_id": video_id,
        "title": title if title is not None else f"title {video_id}",
        "description": description if description is not None else f"description {video_id}",
        "label": label,
    }
    row.update(extra)
    return row


@pytest.fixture
def merged_corpus():
    return build_merged_corpus()


@pytest.fixture
def rng():
    return random.Random(1234)
