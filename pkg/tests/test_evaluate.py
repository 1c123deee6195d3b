import random

import pytest

from scamscope.corpus import Label, Source
from scamscope.evaluate import (
    PRIOR_TEXT_MODEL_REFERENCE,
    REFERENCE_COSTS,
    REFERENCE_RESULTS,
    ConfusionMatrix,
    EvaluateError,
    build_report,
    confusion,
    cost_profile,
    f1_from_pr,
    metrics,
    per_source_breakdown,
    reasoning_similarity,
)


def token_overlap(reference, candidate):
    a, b = set(reference.split()), set(candidate.split())
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def test_confusion_perfect():
    preds = ["yes"] * 5 + ["no"] * 5
    truths = ["scam"] * 5 + ["nonscam"] * 5
    cm = confusion(preds, truths)
    assert (cm.tp, cm.tn, cm.fp, cm.fn) == (5, 5, 0, 0)


def test_confusion_all_negative_on_scams():
    cm = confusion(["no"] * 3, ["scam"] * 3)
    assert cm.fn == 3 and cm.tp == 0


def test_confusion_accepts_labels_and_enums():
    cm = confusion(["yes", "no"], [Label.SCAM, Label.SCAM])
    assert (cm.tp, cm.fn) == (1, 1)


def test_confusion_length_mismatch():
    with pytest.raises(EvaluateError):
        confusion(["yes"], [])


def test_confusion_matches_recount(rng):
    preds = [rng.choice(["yes", "no"]) for _ in range(50)]
    truths = [rng.choice(["scam", "nonscam"]) for _ in range(50)]
    cm = confusion(preds, truths)
    # independent pairwise recount
    tp = sum(1 for p, t in zip(preds, truths) if p == "yes" and t == "scam")
    fp = sum(1 for p, t in zip(preds, truths) if p == "yes" and t == "nonscam")
    fn = sum(1 for p, t in zip(preds, truths) if p == "no" and t == "scam")
    tn = sum(1 for p, t in zip(preds, truths) if p == "no" and t == "nonscam")
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == (tp, fp, fn, tn)
    assert cm.total == 50


def test_f1_from_reference_pr_pairs():
    assert abs(f1_from_pr(70.75, 83.52) - 76.61) <= 0.02
    assert abs(f1_from_pr(74.57, 87.53) - 80.53) <= 0.02


def test_metrics_basic():
    cm = ConfusionMatrix(tp=8, fp=2, tn=85, fn=5)
    m = metrics(cm)
    assert m.accuracy == 93.0
    assert m.precision == 80.0
    assert round(m.recall, 4) == round(100 * 8 / 13, 4)
    assert m.f1 == f1_from_pr(m.precision, m.recall)
    assert m.degenerate == ()


def test_metrics_degenerate_precision():
    cm = ConfusionMatrix(tp=0, fp=0, tn=5, fn=3)
    m = metrics(cm)
    assert m.precision == 0.0
    assert "precision" in m.degenerate
    assert "f1" in m.degenerate


def test_metrics_empty_matrix():
    with pytest.raises(EvaluateError):
        metrics(ConfusionMatrix())


def test_metrics_harmonic_mean_bound(rng):
    for _ in range(100):
        cm = ConfusionMatrix(
            tp=rng.randint(1, 40),
            fp=rng.randint(0, 40),
            tn=rng.randint(0, 40),
            fn=rng.randint(0, 40),
        )
        m = metrics(cm)
        if "precision" not in m.degenerate and "recall" not in m.degenerate:
            assert min(m.precision, m.recall) - 1e-9 <= m.f1 <= max(m.precision, m.recall) + 1e-9


def test_metrics_scale_free(rng):
    for _ in range(50):
        tp, fp, tn, fn = (rng.randint(1, 20) for _ in range(4))
        k = rng.randint(2, 9)
        a = metrics(ConfusionMatrix(tp, fp, tn, fn))
        b = metrics(ConfusionMatrix(tp * k, fp * k, tn * k, fn * k))
        for field in ("accuracy", "precision", "recall", "f1"):
            assert abs(getattr(a, field) - getattr(b, field)) < 1e-9


def test_reference_rows_f1_consistent():
    for row in REFERENCE_RESULTS:
        recomputed = round(f1_from_pr(row.precision, row.recall), 2)
        assert abs(recomputed - row.f1) <= 0.02 + 1e-9, row


def test_reasoning_similarity_mock():
    assert reasoning_similarity("a b c", "a b c", token_overlap) == 1.0
    assert reasoning_similarity("a b", "x y", token_overlap) == 0.0


def test_reasoning_similarity_clamps():
    assert reasoning_similarity("a", "a", lambda r, c: 1.3) == 1.0
    assert reasoning_similarity("a", "a", lambda r, c: -0.5) == 0.0


def test_reasoning_similarity_propagates_failure():
    def broken(r, c):
        raise RuntimeError("scorer offline")

    with pytest.raises(RuntimeError):
        reasoning_similarity("a", "b", broken)


def test_cost_profile_constant():
    profile = cost_profile([{"latency_s": 2.0, "memory_gb": 10.0}] * 7)
    assert profile.mean_latency_s == 2.0
    assert profile.peak_memory_gb == 10.0


def test_cost_profile_mean_and_peak():
    profile = cost_profile(
        [{"latency_s": 1.0, "memory_gb": 4.0}, {"latency_s": 3.0, "memory_gb": 9.0}]
    )
    assert profile.mean_latency_s == 2.0
    assert profile.peak_memory_gb == 9.0


def test_cost_profile_empty():
    with pytest.raises(EvaluateError):
        cost_profile([])


def test_reference_cost_row_recorded():
    frames_row = next(
        r for r in REFERENCE_COSTS if r.model == "LLaVA-Video" and r.input_feature == "Video Frames"
    )
    assert frames_row.inference_s_per_sample == 2.00
    assert frames_row.memory_gb == 55.58


def test_per_source_single_source_equals_overall():
    preds = ["yes", "no", "yes"]
    truths = ["scam", "nonscam", "nonscam"]
    sources = [Source.CRYPTO] * 3
    breakdown = per_source_breakdown(preds, truths, sources)
    overall = metrics(confusion(preds, truths))
    assert breakdown[Source.CRYPTO.value] == overall


def test_per_source_two_sources_slice_oracle(rng):
    preds, truths, sources = [], [], []
    for _ in range(60):
        preds.append(rng.choice(["yes", "no"]))
        truths.append(rng.choice(["scam", "nonscam"]))
        sources.append(rng.choice([Source.MONETARY, Source.GIVEAWAY]))
    breakdown = per_source_breakdown(preds, truths, sources)
    for source in (Source.MONETARY, Source.GIVEAWAY):
        sliced = [(p, t) for p, t, s in zip(preds, truths, sources) if s == source]
        expected = metrics(confusion([p for p, _ in sliced], [t for _, t in sliced]))
        assert breakdown[source.value] == expected


def test_per_source_unknown_source():
    with pytest.raises(EvaluateError):
        per_source_breakdown(["yes"], ["scam"], ["MysterySource"])


def test_prior_text_model_gap_constants():
    assert PRIOR_TEXT_MODEL_REFERENCE["crypto_only"]["f1"] == 92.03
    assert PRIOR_TEXT_MODEL_REFERENCE["merged_corpus"]["f1"] == 46.88


def test_build_report_shape():
    cm = confusion(["yes", "no"], ["scam", "nonscam"])
    core = metrics(cm)
    report = build_report(core, cost=cost_profile([{"latency_s": 0.5}]))
    for key in ("accuracy", "precision", "recall", "f1"):
        assert key in report["row"]
    assert report["schema_version"] == 1
    assert len(report["reference_results"]) == 11
    assert report["cost"]["mean_latency_s_per_sample"] == 0.5
    assert report["cost"]["peak_memory_gb"] is None
