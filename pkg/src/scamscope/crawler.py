"""Keyword-driven wild-data crawler with quota-limited download scheduling.

Search and download run behind adapters so the whole crawler is testable
offline. A single scheduler loop owns the crawl state: discovery appends
candidates, and downloads proceed oldest-first under a per-calendar-day
quota, tolerating the lag between metadata collection and video download.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

CRAWL_STATE_SCHEMA_VERSION = 1

# Reference outcome of a three-month wild run, embedded in report footers.
REFERENCE_WILD_RUN = {
    "downloaded": 6374,
    "flagged_scam": 2389,
    "removed_after_flagging": 291,
}


class CrawlerError(Exception):
    pass


class RetryableQueryError(CrawlerError):
    pass


class KeywordCategory(str, Enum):
    GIVEAWAY = "giveaway"
    MONETARY = "monetary"
    CRYPTO = "crypto"


@dataclass(frozen=True)
class KeywordSet:
    category: KeywordCategory
    keywords: tuple[str, ...]


def load_keyword_sets(path=None) -> list[KeywordSet]:
    """Load keyword sets from a JSON file; defaults to the packaged list
    (70 queries across the three scam categories)."""
    if path is None:
        text = resources.files("scamscope").joinpath("data", "wild_keywords.json").read_text(
            encoding="utf-8"
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    data = json.loads(text)
    return [
        KeywordSet(KeywordCategory(cat), tuple(words))
        for cat, words in data["categories"].items()
    ]


def plan_queries(keyword_sets: Sequence[KeywordSet]) -> list[str]:
    """One query per keyword, round-robin across categories, fixed order."""
    if not keyword_sets or not any(ks.keywords for ks in keyword_sets):
        raise CrawlerError("empty keyword set")
    ordered = sorted(keyword_sets, key=lambda ks: list(KeywordCategory).index(ks.category))
    queries: list[str] = []
    longest = max(len(ks.keywords) for ks in ordered)
    for i in range(longest):
        for ks in ordered:
            if i < len(ks.keywords):
                queries.append(ks.keywords[i])
    return queries


class DownloadOutcome(str, Enum):
    OK = "ok"
    UNAVAILABLE = "unavailable"
    TRANSIENT = "transient"


@dataclass
class Candidate:
    video_id: str
    title: str
    description: str
    discovered_at: int  # day index
    order: int  # discovery sequence number, FIFO tiebreak


@dataclass
class DownloadEvent:
    day: int
    video_id: str
    outcome: DownloadOutcome


@dataclass
class DaySummary:
    day: int
    attempted: int
    downloaded: int
    unavailable: int
    transient: int


class CrawlState:
    """Mutable crawl bookkeeping with lossless save/load."""

    def __init__(self, daily_quota: int) -> None:
        if daily_quota <= 0:
            raise CrawlerError("daily_quota must be positive")
        self.daily_quota = daily_quota
        self.discovered: dict[str, Candidate] = {}
        self.downloaded: set[str] = set()
        self.unavailable_at_download: set[str] = set()
        self.removed_since: set[str] = set()
        self.download_log: list[DownloadEvent] = []
        self._order = 0

    def pending(self) -> list[str]:
        """Undownloaded, not-unavailable candidates, oldest first."""
        done = self.downloaded | self.unavailable_at_download
        rest = [c for vid, c in self.discovered.items() if vid not in done]
        rest.sort(key=lambda c: (c.discovered_at, c.order))
        return [c.video_id for c in rest]

    def attempts_on(self, day: int) -> int:
        return sum(1 for e in self.download_log if e.day == day)

    def state_hash(self) -> str:
        import hashlib

        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    def to_dict(self) -> dict:
        return {
            "schema_version": CRAWL_STATE_SCHEMA_VERSION,
            "daily_quota": self.daily_quota,
            "discovered": {
                vid: {
                    "title": c.title,
                    "description": c.description,
                    "discovered_at": c.discovered_at,
                    "order": c.order,
                }
                for vid, c in self.discovered.items()
            },
            "downloaded": sorted(self.downloaded),
            "unavailable_at_download": sorted(self.unavailable_at_download),
            "removed_since": sorted(self.removed_since),
            "download_log": [
                {"day": e.day, "video_id": e.video_id, "outcome": e.outcome.value}
                for e in self.download_log
            ],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_dict(cls, data: dict) -> "CrawlState":
        state = cls(data["daily_quota"])
        for vid, c in data["discovered"].items():
            state.discovered[vid] = Candidate(
                vid, c["title"], c["description"], c["discovered_at"], c["order"]
            )
        state._order = 1 + max((c.order for c in state.discovered.values()), default=-1)
        state.downloaded = set(data["downloaded"])
        state.unavailable_at_download = set(data["unavailable_at_download"])
        state.removed_since = set(data.get("removed_since", ()))
        state.download_log = [
            DownloadEvent(e["day"], e["video_id"], DownloadOutcome(e["outcome"]))
            for e in data["download_log"]
        ]
        return state

    @classmethod
    def load(cls, path) -> "CrawlState":
        return cls.from_dict(json.loads(Path(path).read_text()))


def discover(
    state: CrawlState,
    query: str,
    search_adapter: Callable[[str], Sequence[tuple[str, str, str]]],
    today: int = 0,
) -> int:
    """Run one search query and record unseen candidates.

    The adapter returns (video_id, title, description) tuples. Adapter
    failure marks the query retryable and leaves the state untouched.
    """
    try:
        results = list(search_adapter(query))
    except Exception as exc:
        raise RetryableQueryError(f"query {query!r} failed: {exc}") from exc
    added = 0
    for video_id, title, description in results:
        if video_id in state.discovered:
            continue
        state.discovered[video_id] = Candidate(video_id, title, description, today, state._order)
        state._order += 1
        added += 1
    return added


def schedule_downloads(
    state: CrawlState,
    today: int,
    downloader: Callable[[str], DownloadOutcome],
) -> DaySummary:
    """Attempt today's downloads, oldest candidates first, up to quota.

    Unavailable videos are excluded permanently; transient failures stay
    pending for later days. Attempts already made today count against the
    quota, so repeated calls on the same day never exceed it.
    """
    remaining = state.daily_quota - state.attempts_on(today)
    summary = DaySummary(today, 0, 0, 0, 0)
    if remaining <= 0:
        return summary
    for video_id in state.pending()[:remaining]:
        outcome = DownloadOutcome(downloader(video_id))
        state.download_log.append(DownloadEvent(today, video_id, outcome))
        summary.attempted += 1
        if outcome == DownloadOutcome.OK:
            state.downloaded.add(video_id)
            summary.downloaded += 1
        elif outcome == DownloadOutcome.UNAVAILABLE:
            state.unavailable_at_download.add(video_id)
            summary.unavailable += 1
        else:
            summary.transient += 1
    return summary


def crawl_report(state: CrawlState) -> dict:
    """Snapshot counts plus the reference wild-run footer."""
    return {
        "schema_version": 1,
        "discovered": len(state.discovered),
        "downloaded": len(state.downloaded),
        "unavailable": len(state.unavailable_at_download),
        "pending": len(state.pending()),
        "removed_since": len(state.removed_since),
        "reference": dict(REFERENCE_WILD_RUN),
    }
