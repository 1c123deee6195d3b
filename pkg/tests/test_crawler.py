import random

import pytest

from scamscope.crawler import (
    REFERENCE_WILD_RUN,
    CrawlerError,
    CrawlState,
    DownloadOutcome,
    KeywordCategory,
    KeywordSet,
    RetryableQueryError,
    crawl_report,
    discover,
    load_keyword_sets,
    plan_queries,
    schedule_downloads,
)


def test_default_keywords_total_seventy():
    sets = load_keyword_sets()
    assert {ks.category for ks in sets} == set(KeywordCategory)
    assert sum(len(ks.keywords) for ks in sets) == 70
    assert len(plan_queries(sets)) == 70


def test_plan_queries_round_robin():
    sets = [
        KeywordSet(KeywordCategory.CRYPTO, ("c1", "c2", "c3")),
        KeywordSet(KeywordCategory.GIVEAWAY, ("g1", "g2")),
        KeywordSet(KeywordCategory.MONETARY, ("m1",)),
    ]
    assert plan_queries(sets) == ["g1", "m1", "c1", "g2", "c2", "c3"]


def test_plan_queries_single_keyword():
    sets = [KeywordSet(KeywordCategory.CRYPTO, ("arbitrage bot",))]
    assert plan_queries(sets) == ["arbitrage bot"]


def test_plan_queries_deterministic():
    sets = load_keyword_sets()
    assert plan_queries(sets) == plan_queries(sets)


def test_plan_queries_empty_rejected():
    with pytest.raises(CrawlerError):
        plan_queries([])
    with pytest.raises(CrawlerError):
        plan_queries([KeywordSet(KeywordCategory.CRYPTO, ())])


def _fresh_adapter(ids):
    return lambda query: [(vid, f"title {vid}", f"desc {vid}") for vid in ids]


def test_discover_fresh_and_repeat():
    state = CrawlState(daily_quota=10)
    ids = [f"v{i}" for i in range(5)]
    assert discover(state, "q", _fresh_adapter(ids)) == 5
    assert discover(state, "q", _fresh_adapter(ids)) == 0
    assert len(state.discovered) == 5


def test_discover_failure_leaves_state_unchanged():
    state = CrawlState(daily_quota=10)
    discover(state, "q", _fresh_adapter(["v0"]))
    before = state.state_hash()

    def broken(query):
        raise RuntimeError("api quota")

    with pytest.raises(RetryableQueryError):
        discover(state, "q2", broken)
    assert state.state_hash() == before


def test_schedule_respects_quota():
    state = CrawlState(daily_quota=4)
    discover(state, "q", _fresh_adapter([f"v{i}" for i in range(10)]))
    summary = schedule_downloads(state, 0, lambda vid: DownloadOutcome.OK)
    assert summary.attempted == 4
    assert len(state.downloaded) == 4
    # second call the same day must not exceed the quota
    summary2 = schedule_downloads(state, 0, lambda vid: DownloadOutcome.OK)
    assert summary2.attempted == 0
    assert state.attempts_on(0) == 4


def test_schedule_unavailable_permanent():
    state = CrawlState(daily_quota=4)
    discover(state, "q", _fresh_adapter([f"v{i}" for i in range(4)]))
    outcomes = {"v1": DownloadOutcome.UNAVAILABLE}
    summary = schedule_downloads(state, 0, lambda vid: outcomes.get(vid, DownloadOutcome.OK))
    assert summary.downloaded == 3
    assert summary.unavailable == 1
    assert state.unavailable_at_download == {"v1"}
    # never retried
    schedule_downloads(state, 1, lambda vid: DownloadOutcome.OK)
    assert "v1" not in state.downloaded


def test_schedule_transient_retried_later():
    state = CrawlState(daily_quota=2)
    discover(state, "q", _fresh_adapter(["v0", "v1"]))
    flaky_days = {0}

    def downloader_for(day):
        def downloader(vid):
            if vid == "v0" and day in flaky_days:
                return DownloadOutcome.TRANSIENT
            return DownloadOutcome.OK

        return downloader

    schedule_downloads(state, 0, downloader_for(0))
    assert state.downloaded == {"v1"}
    schedule_downloads(state, 1, downloader_for(1))
    assert state.downloaded == {"v0", "v1"}


def test_schedule_oldest_first():
    state = CrawlState(daily_quota=1)
    discover(state, "q1", _fresh_adapter(["old"]), today=0)
    discover(state, "q2", _fresh_adapter(["new"]), today=3)
    schedule_downloads(state, 4, lambda vid: DownloadOutcome.OK)
    assert state.downloaded == {"old"}


def test_every_id_in_exactly_one_state(rng):
    state = CrawlState(daily_quota=7)
    ids = [f"v{i}" for i in range(50)]
    discover(state, "q", _fresh_adapter(ids))

    def downloader(vid):
        return rng.choice(
            [DownloadOutcome.OK, DownloadOutcome.OK, DownloadOutcome.UNAVAILABLE,
             DownloadOutcome.TRANSIENT]
        )

    for day in range(10):
        schedule_downloads(state, day, downloader)
    pending = set(state.pending())
    assert state.downloaded | state.unavailable_at_download | pending == set(ids)
    assert not (state.downloaded & state.unavailable_at_download)
    assert not (state.downloaded & pending)
    assert not (state.unavailable_at_download & pending)


def test_state_roundtrip(tmp_path):
    state = CrawlState(daily_quota=3)
    discover(state, "q", _fresh_adapter(["a", "b", "c"]))
    schedule_downloads(state, 0, lambda vid: DownloadOutcome.UNAVAILABLE if vid == "b" else DownloadOutcome.OK)
    path = tmp_path / "state.json"
    state.save(path)
    loaded = CrawlState.load(path)
    assert loaded.to_dict() == state.to_dict()
    path2 = tmp_path / "state2.json"
    loaded.save(path2)
    assert path.read_bytes() == path2.read_bytes()
    # discovery continues with fresh order numbers
    discover(loaded, "q2", _fresh_adapter(["d"]))
    assert loaded.discovered["d"].order == 3


def test_crawl_report_empty():
    report = crawl_report(CrawlState(daily_quota=1))
    assert report["discovered"] == 0
    assert report["downloaded"] == 0
    assert report["unavailable"] == 0
    assert report["pending"] == 0


def test_crawl_report_reference_footer():
    report = crawl_report(CrawlState(daily_quota=1))
    assert report["reference"]["downloaded"] == 6374
    assert report["reference"]["flagged_scam"] == 2389
    assert report["reference"]["removed_after_flagging"] == 291
    assert REFERENCE_WILD_RUN["downloaded"] == 6374


def simulate(n_candidates, quota, days, unavailable_ids, transient_schedule, discover_day):
    """Drive the real scheduler; returns final state."""
    state = CrawlState(daily_quota=quota)
    adapter = _fresh_adapter([f"v{i:05d}" for i in range(n_candidates)])
    discover(state, "bulk", adapter, today=discover_day)

    def downloader_for(day):
        def downloader(vid):
            if vid in transient_schedule and day in transient_schedule[vid]:
                return DownloadOutcome.TRANSIENT
            if vid in unavailable_ids:
                return DownloadOutcome.UNAVAILABLE
            return DownloadOutcome.OK

        return downloader

    for day in range(days):
        schedule_downloads(state, day, downloader_for(day))
    return state


def replay_oracle(n_candidates, quota, days, unavailable_ids, transient_schedule):
    """Independent discrete-event replay: FIFO queue, quota per day."""
    pending = [f"v{i:05d}" for i in range(n_candidates)]
    downloaded, unavailable = set(), set()
    attempts_per_day = {}
    for day in range(days):
        queue = [v for v in pending if v not in downloaded and v not in unavailable]
        for vid in queue[:quota]:
            attempts_per_day[day] = attempts_per_day.get(day, 0) + 1
            if vid in transient_schedule and day in transient_schedule[vid]:
                continue
            if vid in unavailable_ids:
                unavailable.add(vid)
            else:
                downloaded.add(vid)
    return downloaded, unavailable, attempts_per_day


def test_simulation_matches_replay_oracle(rng):
    n, quota, days = 600, 9, 40
    unavailable_ids = {f"v{i:05d}" for i in range(n) if rng.random() < 0.2}
    transient_schedule = {
        f"v{i:05d}": {rng.randint(0, days - 1)} for i in range(n) if rng.random() < 0.05
    }
    state = simulate(n, quota, days, unavailable_ids, transient_schedule, discover_day=0)
    downloaded, unavailable, attempts = replay_oracle(
        n, quota, days, unavailable_ids, transient_schedule
    )
    assert state.downloaded == downloaded
    assert state.unavailable_at_download == unavailable
    for day in range(days):
        assert state.attempts_on(day) <= quota
        assert state.attempts_on(day) == attempts.get(day, 0)
