"""Video corpus: ingestion, relabel ledger, availability, and split construction.

A corpus directory holds a line-delimited manifest (original ground truth,
one JSON record per line), an append-only relabel ledger, and a media
subdirectory keyed by video id. Relabels never mutate the original label;
the effective label is derived, so replaying the ledger over the manifest
reproduces the corpus exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator, Optional

MANIFEST_SCHEMA_VERSION = 1

MANIFEST_FILE = "manifest.jsonl"
LEDGER_FILE = "relabels.jsonl"
MEDIA_DIR = "media"


class Source(str, Enum):
    MONETARY = "MonetaryScam"
    GIVEAWAY = "GiveawayScam"
    CRYPTO = "CryptoScam"
    WILD = "Wild"


class Label(str, Enum):
    SCAM = "scam"
    NONSCAM = "nonscam"


class CorpusError(Exception):
    pass


class ManifestError(CorpusError):
    """Raised when a manifest cannot be ingested; carries per-line problems."""

    def __init__(self, path, problems: list[tuple[int, str]]):
        self.path = str(path)
        self.problems = problems
        lines = "; ".join(f"line {n}: {msg}" for n, msg in problems)
        super().__init__(f"{path}: {lines}")


class DuplicateVideoError(CorpusError):
    def __init__(self, video_id: str, existing_source: Source, new_source: Source):
        self.video_id = video_id
        self.existing_source = existing_source
        self.new_source = new_source
        super().__init__(
            f"video_id {video_id!r} already ingested from {existing_source.value}, "
            f"rejected duplicate from {new_source.value}"
        )


class UnknownVideoError(CorpusError):
    pass


class RelabelError(CorpusError):
    pass


class UndefinedRateError(CorpusError):
    pass


class StratumShortfallError(CorpusError):
    def __init__(self, stratum: str, needed: int, available: int):
        self.stratum = stratum
        self.needed = needed
        self.available = available
        super().__init__(f"stratum {stratum}: need {needed}, have {available}")


@dataclass
class Relabel:
    new_label: Label
    reason_text: str
    relabeled_by: str


@dataclass
class VideoRecord:
    video_id: str
    source: Source
    title: str
    description: str
    ground_truth: Label
    relabel: Optional[Relabel] = None
    media_path: Optional[str] = None
    duration_s: float = 0.0
    available: bool = True

    @property
    def effective_label(self) -> Label:
        return self.relabel.new_label if self.relabel else self.ground_truth

    def manifest_dict(self) -> dict:
        """Original-manifest view of this record (relabels excluded)."""
        row = {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "video_id": self.video_id,
            "source": self.source.value,
            "title": self.title,
            "description": self.description,
            "label": self.ground_truth.value,
            "duration_s": self.duration_s,
            "available": self.available,
        }
        if self.media_path is not None:
            row["media_path"] = self.media_path
        return row


@dataclass
class AvailabilityReport:
    removed_ids: list[str]
    unknown_ids: list[str]
    still_available_count: int


def _parse_manifest_line(line: str) -> dict:
    row = json.loads(line)
    if not isinstance(row, dict):
        raise ValueError("record is not an object")
    if row.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {row.get('schema_version')!r}")
    for key in ("video_id", "title", "description", "label"):
        if key not in row:
            raise ValueError(f"missing field {key!r}")
    Label(row["label"])
    return row


class Corpus:
    """In-memory corpus with a single logical writer; reads are snapshots."""

    def __init__(self) -> None:
        self._records: dict[str, VideoRecord] = {}
        self._ledger: list[dict] = []

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[VideoRecord]:
        return iter(self._records.values())

    def __contains__(self, video_id: str) -> bool:
        return video_id in self._records

    def get(self, video_id: str) -> VideoRecord:
        try:
            return self._records[video_id]
        except KeyError:
            raise UnknownVideoError(video_id) from None

    def ids(self) -> list[str]:
        return list(self._records)

    def add_record(self, record: VideoRecord) -> None:
        existing = self._records.get(record.video_id)
        if existing is not None:
            raise DuplicateVideoError(record.video_id, existing.source, record.source)
        self._records[record.video_id] = record

    def ingest_source(self, manifest_path, source: Source | str | None = None) -> int:
        """Ingest a line-delimited manifest, atomically.

        All lines are validated before anything is committed: a malformed
        line or an id collision rejects the whole file with a report.
        Returns the number of records added.
        """
        source = Source(source) if source is not None else None
        path = Path(manifest_path)
        problems: list[tuple[int, str]] = []
        staged: list[VideoRecord] = []
        staged_ids: set[str] = set()
        with path.open(encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = _parse_manifest_line(line)
                    rec_source = source if source is not None else Source(row["source"])
                except (ValueError, KeyError) as exc:
                    problems.append((line_no, str(exc)))
                    continue
                vid = row["video_id"]
                if vid in self._records:
                    raise DuplicateVideoError(vid, self._records[vid].source, rec_source)
                if vid in staged_ids:
                    problems.append((line_no, f"duplicate video_id {vid!r} within manifest"))
                    continue
                # Fresh ingests assert media implies availability; loading a
                # persisted corpus (source=None) may carry post-scan state.
                if (
                    source is not None
                    and row.get("media_path")
                    and not row.get("available", True)
                ):
                    problems.append(
                        (line_no, f"{vid!r} has media_path but available=false at ingest")
                    )
                    continue
                staged_ids.add(vid)
                staged.append(
                    VideoRecord(
                        video_id=vid,
                        source=rec_source,
                        title=row["title"],
                        description=row["description"],
                        ground_truth=Label(row["label"]),
                        media_path=row.get("media_path"),
                        duration_s=float(row.get("duration_s", 0.0)),
                        available=bool(row.get("available", True)),
                    )
                )
        if problems:
            raise ManifestError(path, problems)
        for record in staged:
            self._records[record.video_id] = record
        return len(staged)

    def apply_relabel(
        self, video_id: str, new_label: Label | str, reason_text: str, relabeled_by: str
    ) -> VideoRecord:
        """Record a ledger entry and update the effective label.

        The original ground truth is never mutated; a no-op relabel
        (same effective label) is rejected.
        """
        new_label = Label(new_label)
        record = self.get(video_id)
        if record.effective_label == new_label:
            raise RelabelError(
                f"relabel of {video_id!r} to {new_label.value!r} matches its current effective label"
            )
        # Relabeling back to the original label clears the override; the
        # ledger still records the event, so replay stays faithful.
        if new_label == record.ground_truth:
            record.relabel = None
        else:
            record.relabel = Relabel(new_label, reason_text, relabeled_by)
        self._ledger.append(
            {
                "schema_version": MANIFEST_SCHEMA_VERSION,
                "video_id": video_id,
                "new_label": new_label.value,
                "reason_text": reason_text,
                "relabeled_by": relabeled_by,
            }
        )
        return record

    def ledger(self) -> list[dict]:
        return list(self._ledger)

    def mislabel_rate(self, source: Source | str) -> float:
        """Percent of a source's originally-scam records relabeled non-scam."""
        source = Source(source)
        originally_scam = [
            r for r in self if r.source == source and r.ground_truth == Label.SCAM
        ]
        if not originally_scam:
            raise UndefinedRateError(f"{source.value} has no originally-scam records")
        relabeled = sum(
            1
            for r in originally_scam
            if r.relabel is not None and r.relabel.new_label == Label.NONSCAM
        )
        return round(100.0 * relabeled / len(originally_scam), 2)

    def availability_scan(self, prober: Callable[[str], bool]) -> AvailabilityReport:
        """Probe every record; flag removed videos without deleting them.

        Prober failures are isolated per id and reported as unknown.
        """
        removed: list[str] = []
        unknown: list[str] = []
        still = 0
        for record in self:
            try:
                alive = bool(prober(record.video_id))
            except Exception:
                unknown.append(record.video_id)
                continue
            if alive:
                still += 1
            else:
                record.available = False
                removed.append(record.video_id)
        return AvailabilityReport(removed, unknown, still)

    def count(self, source: Source | None = None, label: Label | None = None) -> int:
        n = 0
        for r in self:
            if source is not None and r.source != source:
                continue
            if label is not None and r.effective_label != label:
                continue
            n += 1
        return n

    # On-disk layout: manifest.jsonl (originals) + relabels.jsonl (ledger).

    def save(self, corpus_dir) -> None:
        corpus_dir = Path(corpus_dir)
        corpus_dir.mkdir(parents=True, exist_ok=True)
        (corpus_dir / MEDIA_DIR).mkdir(exist_ok=True)
        with (corpus_dir / MANIFEST_FILE).open("w", encoding="utf-8") as fh:
            for record in self:
                fh.write(json.dumps(record.manifest_dict(), sort_keys=True) + "\n")
        with (corpus_dir / LEDGER_FILE).open("w", encoding="utf-8") as fh:
            for entry in self._ledger:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")

    @classmethod
    def load(cls, corpus_dir) -> "Corpus":
        corpus_dir = Path(corpus_dir)
        corpus = cls()
        manifest = corpus_dir / MANIFEST_FILE
        if not manifest.exists():
            raise CorpusError(f"no {MANIFEST_FILE} in {corpus_dir}")
        corpus.ingest_source(manifest, source=None)
        ledger = corpus_dir / LEDGER_FILE
        if ledger.exists():
            with ledger.open(encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    entry = json.loads(line)
                    corpus.apply_relabel(
                        entry["video_id"],
                        entry["new_label"],
                        entry["reason_text"],
                        entry["relabeled_by"],
                    )
        return corpus

    def snapshot_bytes(self) -> bytes:
        """Canonical serialization of the effective corpus, for replay checks."""
        rows = []
        for record in self:
            row = record.manifest_dict()
            row["effective_label"] = record.effective_label.value
            rows.append(row)
        return json.dumps(rows, sort_keys=True).encode("utf-8")


@dataclass(frozen=True)
class SplitSpec:
    """Per-source scam quotas for the train set plus a pooled non-scam total."""

    scam_quotas: tuple[tuple[Source, int], ...]
    nonscam_total: int

    @classmethod
    def from_dict(cls, quotas: dict, nonscam_total: int) -> "SplitSpec":
        items = tuple(sorted(((Source(k), int(v)) for k, v in quotas.items()),
                             key=lambda kv: kv[0].value))
        return cls(items, int(nonscam_total))


@dataclass
class SplitAssignment:
    train_ids: frozenset[str]
    test_ids: frozenset[str]
    seed: int
    spec: SplitSpec

    def to_dict(self) -> dict:
        return {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "seed": self.seed,
            "spec": {
                "scam_quotas": {s.value: q for s, q in self.spec.scam_quotas},
                "nonscam_total": self.spec.nonscam_total,
            },
            "train_ids": sorted(self.train_ids),
            "test_ids": sorted(self.test_ids),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "SplitAssignment":
        data = json.loads(Path(path).read_text())
        spec = SplitSpec.from_dict(data["spec"]["scam_quotas"], data["spec"]["nonscam_total"])
        return cls(
            train_ids=frozenset(data["train_ids"]),
            test_ids=frozenset(data["test_ids"]),
            seed=data["seed"],
            spec=spec,
        )


def build_split(corpus: Corpus, spec: SplitSpec, seed: int) -> SplitAssignment:
    """Stratified train/test split over the eligible (available) corpus.

    Train gets exactly the per-source scam quotas plus the pooled non-scam
    total, sampled uniformly with the given seed over sorted id lists, so
    the result depends only on (corpus contents, spec, seed). Test is the
    remainder of the eligible corpus.
    """
    eligible = [r for r in corpus if r.available]
    train: set[str] = set()
    rng = random.Random(seed)
    for source, quota in spec.scam_quotas:
        pool = sorted(
            r.video_id
            for r in eligible
            if r.source == source and r.effective_label == Label.SCAM
        )
        if len(pool) < quota:
            raise StratumShortfallError(f"{source.value}/scam", quota, len(pool))
        train.update(rng.sample(pool, quota))
    nonscam_pool = sorted(
        r.video_id for r in eligible if r.effective_label == Label.NONSCAM
    )
    if len(nonscam_pool) < spec.nonscam_total:
        raise StratumShortfallError("nonscam", spec.nonscam_total, len(nonscam_pool))
    train.update(rng.sample(nonscam_pool, spec.nonscam_total))
    test = {r.video_id for r in eligible} - train
    return SplitAssignment(frozenset(train), frozenset(test), seed, spec)
