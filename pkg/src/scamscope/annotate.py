"""Annotation sessions, inter-annotator agreement, and URL adjudication.

Agreement is Krippendorff's alpha in its general form (coincidence matrix
with an arbitrary distance), with nominal 0/1 distance for scalar columns
and one-minus-Dice for the multi-label criteria/modality columns. Batches
are 10-20 videos; alpha is recomputed per column after each batch and a
configurable column gates the stopping rule at alpha > 0.8.
"""

from __future__ import annotations

import json
import random
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Hashable, Iterable, Optional, Sequence

from .corpus import Corpus, Label
from .policy import BROAD_CRITERIA, NARROW_CRITERIA, Modality

BATCH_SIZE_MIN = 10
BATCH_SIZE_MAX = 20

ALPHA_STOP_THRESHOLD = 0.8

AGREEMENT_COLUMNS = ("agrees_with_gt", "label", "broad", "narrow", "modality")


class AnnotateError(Exception):
    pass


class BatchSizeError(AnnotateError):
    pass


class PoolExhaustionError(AnnotateError):
    pass


class InsufficientRatingsError(AnnotateError):
    pass


class IncompleteSessionError(AnnotateError):
    pass


class InvalidAnnotationError(AnnotateError):
    def __init__(self, field_errors: dict[str, str]):
        self.field_errors = field_errors
        super().__init__("; ".join(f"{k}: {v}" for k, v in field_errors.items()))


class AnnotationLabel(str, Enum):
    SCAM = "scam"
    NONSCAM = "nonscam"
    POTENTIAL = "potential"


class BatchComposition(str, Enum):
    BY_CLASS = "by_class"
    RANDOMIZED = "randomized"


@dataclass
class CriteriaAnnotation:
    annotator_id: str
    video_id: str
    label: AnnotationLabel
    agrees_with_ground_truth: bool
    broad: frozenset[str] = frozenset()
    narrow: frozenset[str] = frozenset()
    modalities: frozenset[Modality] = frozenset()
    note: str = ""

    def validate(self) -> None:
        errors: dict[str, str] = {}
        bad_broad = set(self.broad) - set(BROAD_CRITERIA)
        if bad_broad:
            errors["broad"] = f"unknown criteria {sorted(bad_broad)}"
        bad_narrow = set(self.narrow) - set(NARROW_CRITERIA)
        if bad_narrow:
            errors["narrow"] = f"unknown criteria {sorted(bad_narrow)}"
        if self.label == AnnotationLabel.NONSCAM:
            if not self.note.strip():
                errors["note"] = "non-scam annotations require a descriptive note"
        else:
            if not self.broad:
                errors["broad"] = "required unless label is nonscam"
            if not self.narrow:
                errors["narrow"] = "required unless label is nonscam"
            if not self.modalities:
                errors["modalities"] = "required unless label is nonscam"
        if errors:
            raise InvalidAnnotationError(errors)

    def to_dict(self) -> dict:
        return {
            "annotator_id": self.annotator_id,
            "video_id": self.video_id,
            "label": self.label.value,
            "agrees_with_ground_truth": self.agrees_with_ground_truth,
            "broad": sorted(self.broad),
            "narrow": sorted(self.narrow),
            "modalities": sorted(m.value for m in self.modalities),
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CriteriaAnnotation":
        return cls(
            annotator_id=d["annotator_id"],
            video_id=d["video_id"],
            label=AnnotationLabel(d["label"]),
            agrees_with_ground_truth=bool(d["agrees_with_ground_truth"]),
            broad=frozenset(d.get("broad", ())),
            narrow=frozenset(d.get("narrow", ())),
            modalities=frozenset(Modality(m) for m in d.get("modalities", ())),
            note=d.get("note", ""),
        )


@dataclass
class AnnotationSession:
    session_no: int
    batch: list[str]
    composition: BatchComposition
    seed: int
    # annotator_id -> video_id -> annotation
    records: dict[str, dict[str, CriteriaAnnotation]] = field(default_factory=dict)
    alpha_by_column: dict[str, Optional[float]] = field(default_factory=dict)

    def add_annotation(self, ann: CriteriaAnnotation) -> None:
        if ann.video_id not in self.batch:
            raise InvalidAnnotationError({"video_id": f"{ann.video_id} not in session batch"})
        ann.validate()
        self.records.setdefault(ann.annotator_id, {})[ann.video_id] = ann

    def completed_annotators(self) -> list[str]:
        want = set(self.batch)
        return [a for a, recs in self.records.items() if want <= set(recs)]

    def annotated_by(self, annotator_id: str) -> set[str]:
        return set(self.records.get(annotator_id, {}))

    def to_dict(self) -> dict:
        return {
            "session_no": self.session_no,
            "batch": list(self.batch),
            "composition": self.composition.value,
            "seed": self.seed,
            "records": {
                a: {v: ann.to_dict() for v, ann in recs.items()}
                for a, recs in self.records.items()
            },
            "alpha_by_column": dict(self.alpha_by_column),
        }


def create_batch(
    corpus: Corpus,
    size: int,
    composition: BatchComposition | str,
    seed: int,
    session_no: int = 1,
    label: Label | str | None = None,
    exclude_ids: Iterable[str] = (),
) -> AnnotationSession:
    """Draw an annotation batch deterministically from the eligible corpus.

    ``by_class`` draws a single-label batch (the label argument picks the
    class); ``randomized`` mixes classes. Already-annotated ids can be
    excluded so successive sessions never overlap.
    """
    composition = BatchComposition(composition)
    if not (BATCH_SIZE_MIN <= size <= BATCH_SIZE_MAX):
        raise BatchSizeError(
            f"batch size {size} outside [{BATCH_SIZE_MIN}, {BATCH_SIZE_MAX}]"
        )
    excluded = set(exclude_ids)
    eligible = [r for r in corpus if r.available and r.video_id not in excluded]
    if composition == BatchComposition.BY_CLASS:
        if label is None:
            raise AnnotateError("by_class batches need a target label")
        label = Label(label)
        pool = sorted(r.video_id for r in eligible if r.effective_label == label)
    else:
        pool = sorted(r.video_id for r in eligible)
    if len(pool) < size:
        raise PoolExhaustionError(f"need {size} videos, pool has {len(pool)}")
    rng = random.Random(seed)
    batch = rng.sample(pool, size)
    return AnnotationSession(session_no, batch, composition, seed)


def dice(a: frozenset | set, b: frozenset | set) -> float:
    """Dice similarity 2|a∩b| / (|a|+|b|); two empty sets count as agreeing."""
    if not a and not b:
        return 1.0
    return 2.0 * len(set(a) & set(b)) / (len(a) + len(b))


def nominal_distance(a: Hashable, b: Hashable) -> float:
    return 0.0 if a == b else 1.0


def dice_distance(a, b) -> float:
    return 1.0 - dice(a, b)


def _canonical(value):
    """Hashable key for a rating value (sets become frozensets)."""
    if isinstance(value, (set, frozenset)):
        return frozenset(value)
    return value


def krippendorff_alpha(
    matrix: Sequence[Sequence],
    distance: Callable[[Hashable, Hashable], float] | str = "nominal",
) -> Optional[float]:
    """Krippendorff's alpha over an items x raters matrix with missing values.

    ``matrix[i][j]`` is rater j's value for item i, or None when missing.
    ``distance`` is ``"nominal"``, ``"dice"`` (for set values), or any
    callable metric with d(v, v) = 0. Computed via the coincidence-matrix
    formulation over unique values: alpha = 1 - D_observed / D_expected.
    Returns None (not computable) when expected disagreement is zero.
    """
    if isinstance(distance, str):
        distance = {"nominal": nominal_distance, "dice": dice_distance}[distance]

    units = [[_canonical(v) for v in row if v is not None] for row in matrix]
    total_ratings = sum(len(u) for u in units)
    if total_ratings < 2:
        raise InsufficientRatingsError(f"{total_ratings} ratings in total")
    units = [u for u in units if len(u) >= 2]
    if not units:
        raise InsufficientRatingsError("no item was rated by two or more raters")

    values: list = []
    index: dict = {}
    for u in units:
        for v in u:
            if v not in index:
                index[v] = len(values)
                values.append(v)
    m = len(values)

    # Coincidence matrix: ordered within-unit value pairs, weighted 1/(m_u - 1).
    coincidence = [[0.0] * m for _ in range(m)]
    for u in units:
        counts: dict[int, int] = {}
        for v in u:
            counts[index[v]] = counts.get(index[v], 0) + 1
        weight = 1.0 / (len(u) - 1)
        for c, n_c in counts.items():
            for k, n_k in counts.items():
                pairs = n_c * (n_c - 1) if c == k else n_c * n_k
                coincidence[c][k] += pairs * weight

    n = sum(len(u) for u in units)
    marginals = [sum(coincidence[c]) for c in range(m)]

    dist = [[float(distance(values[c], values[k])) for k in range(m)] for c in range(m)]

    d_observed = sum(
        coincidence[c][k] * dist[c][k] for c in range(m) for k in range(m)
    ) / n
    d_expected = sum(
        marginals[c] * (marginals[k] - (1 if c == k else 0)) * dist[c][k]
        for c in range(m)
        for k in range(m)
    ) / (n * (n - 1))

    if d_expected == 0.0:
        return None
    return 1.0 - d_observed / d_expected


@dataclass
class AgreementReport:
    session_no: int
    n_items: int
    n_annotators: int
    alpha_by_column: dict[str, Optional[float]]

    def display(self) -> dict[str, str]:
        """Formatted values, with '-' for not-computable columns."""
        return {
            col: ("-" if a is None else f"{a:.2f}")
            for col, a in self.alpha_by_column.items()
        }

    def to_dict(self) -> dict:
        return {
            "session_no": self.session_no,
            "n_items": self.n_items,
            "n_annotators": self.n_annotators,
            "alpha": dict(self.alpha_by_column),
            "display": self.display(),
        }


def _column_value(ann: CriteriaAnnotation, column: str):
    if column == "agrees_with_gt":
        return ann.agrees_with_ground_truth
    if column == "label":
        return ann.label.value
    if column == "broad":
        return frozenset(ann.broad)
    if column == "narrow":
        return frozenset(ann.narrow)
    if column == "modality":
        return frozenset(m.value for m in ann.modalities)
    raise KeyError(column)


def agreement_report(session: AnnotationSession) -> AgreementReport:
    """Per-column alpha for a session completed by at least two annotators.

    Scalar columns use nominal distance; set columns use one-minus-Dice.
    Columns with zero expected disagreement come back as None and render
    as '-'.
    """
    annotators = session.completed_annotators()
    if len(annotators) < 2:
        raise IncompleteSessionError(
            f"session {session.session_no}: {len(annotators)} annotator(s) completed"
        )
    annotators = sorted(annotators)
    alphas: dict[str, Optional[float]] = {}
    for column in AGREEMENT_COLUMNS:
        matrix = [
            [_column_value(session.records[a][vid], column) for a in annotators]
            for vid in session.batch
        ]
        metric = dice_distance if column in ("broad", "narrow", "modality") else nominal_distance
        alphas[column] = krippendorff_alpha(matrix, metric)
    report = AgreementReport(session.session_no, len(session.batch), len(annotators), alphas)
    session.alpha_by_column = dict(alphas)
    return report


def stopping_rule_met(report: AgreementReport, column: str = "label") -> bool:
    """Iterative annotation stops once the gating column exceeds 0.8."""
    alpha = report.alpha_by_column.get(column)
    return alpha is not None and alpha > ALPHA_STOP_THRESHOLD


class UrlVerdict(str, Enum):
    BENIGN = "benign"
    MALICIOUS = "malicious"
    AMBIGUOUS = "ambiguous"


@dataclass
class UrlAdjudication:
    url: str
    verdict: UrlVerdict
    causes: list[str] = field(default_factory=list)


def adjudicate_url(url: str, checkers: Sequence[Callable[[str], bool]]) -> UrlAdjudication:
    """Combine URL reputation checkers: any flag wins, all-clear is benign,
    and errors or timeouts downgrade the verdict to ambiguous."""
    if not checkers:
        raise AnnotateError("at least one URL checker is required")
    flagged = False
    causes: list[str] = []
    clear_count = 0
    for i, checker in enumerate(checkers):
        try:
            if checker(url):
                flagged = True
            else:
                clear_count += 1
        except Exception as exc:
            causes.append(f"checker {i}: {exc}")
    if flagged:
        return UrlAdjudication(url, UrlVerdict.MALICIOUS, causes)
    if clear_count == len(checkers):
        return UrlAdjudication(url, UrlVerdict.BENIGN)
    return UrlAdjudication(url, UrlVerdict.AMBIGUOUS, causes)


class AnnotationStore:
    """Session store backing the workbench API.

    A single lock serializes mutations per store; alpha is computed on a
    snapshot. Annotations submitted for the same (session, annotator,
    video) replace the previous value, which makes retries idempotent.
    """

    def __init__(self) -> None:
        self._sessions: dict[int, AnnotationSession] = {}
        self._lock = threading.Lock()
        self._next_session_no = 1

    def create_session(
        self,
        corpus: Corpus,
        size: int,
        composition: BatchComposition | str,
        seed: int,
        label: Label | str | None = None,
    ) -> AnnotationSession:
        with self._lock:
            annotated = {vid for s in self._sessions.values() for vid in s.batch}
            session = create_batch(
                corpus,
                size,
                composition,
                seed,
                session_no=self._next_session_no,
                label=label,
                exclude_ids=annotated,
            )
            self._sessions[session.session_no] = session
            self._next_session_no += 1
            return session

    def get(self, session_no: int) -> AnnotationSession:
        try:
            return self._sessions[session_no]
        except KeyError:
            raise AnnotateError(f"unknown session {session_no}") from None

    def sessions(self) -> list[AnnotationSession]:
        return [self._sessions[k] for k in sorted(self._sessions)]

    def submit(self, session_no: int, ann: CriteriaAnnotation) -> AnnotationSession:
        with self._lock:
            session = self.get(session_no)
            session.add_annotation(ann)
            return session

    def export_jsonl(self, path) -> int:
        """Write all annotations as line-delimited records; returns the count."""
        n = 0
        with Path(path).open("w", encoding="utf-8") as fh:
            for session in self.sessions():
                for annotator in sorted(session.records):
                    for vid in session.batch:
                        ann = session.records[annotator].get(vid)
                        if ann is None:
                            continue
                        row = {"session_no": session.session_no, **ann.to_dict()}
                        fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
                        n += 1
        return n
