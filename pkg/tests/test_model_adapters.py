import json
import random
import string

import jsonschema
import pytest

from scamscope.corpus import Corpus, Label, SplitSpec, build_split
from scamscope.model_adapters import (
    TRAIN_SPEC_SCHEMA,
    AdapterError,
    LoraConfig,
    MissingArtifactsError,
    MockRule,
    UnparseableOutputError,
    emit_train_spec,
    format_prediction,
    mock_model,
    parse_prediction,
    trainable_fraction,
)
from scamscope.policy import BROAD_CRITERIA, criterion_text
from scamscope.preprocess import (
    TEXT_ONLY,
    ArtifactCache,
    IdentityTranslator,
    ModalityConfig,
    assemble_prompt,
    preprocess_video,
)

from conftest import make_record


def test_parse_prediction_with_criteria():
    raw = f"Yes. [{criterion_text('C6')}]: promotes fast money"
    pred = parse_prediction(raw)
    assert pred.label == "yes"
    assert pred.criteria == frozenset({"C6"})


def test_parse_prediction_nonscam_caption():
    pred = parse_prediction("No. This is a tennis sports video")
    assert pred.label == "no"
    assert pred.reasoning == "This is a tennis sports video"
    assert pred.criteria == frozenset()


def test_parse_prediction_unparseable():
    with pytest.raises(UnparseableOutputError) as exc:
        parse_prediction("Maybe?")
    assert exc.value.raw_text == "Maybe?"


@pytest.mark.parametrize("raw", ["Yes, obvious scam", "yes. scam", "YES: scam", "  Yes.\nreason"])
def test_parse_prediction_leading_token_tolerance(raw):
    assert parse_prediction(raw).label == "yes"


def test_parse_prediction_empty_raises():
    with pytest.raises(UnparseableOutputError):
        parse_prediction("   ")


def test_parse_format_roundtrip_random():
    rng = random.Random(11)
    alphabet = string.ascii_letters + string.digits + " .,:;[]()'"
    for _ in range(200):
        label = rng.choice(["yes", "no"])
        reasoning = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 80))).strip()
        if not reasoning:
            reasoning = "x"
        pred = parse_prediction(format_prediction(label, reasoning))
        assert (pred.label, pred.reasoning) == (label, reasoning)


def test_criteria_always_broad_subset_fuzz():
    rng = random.Random(13)
    sentences = [criterion_text(c) for c in BROAD_CRITERIA]
    for _ in range(100):
        chunks = [rng.choice(["yes", "no"])]
        for _ in range(rng.randint(0, 3)):
            chunks.append(rng.choice(sentences + ["random words", "more filler"]))
        pred = parse_prediction(". ".join(chunks))
        assert pred.criteria <= set(BROAD_CRITERIA)


def test_trainable_fraction_values():
    assert trainable_fraction(55.71, 8086.05) == 0.69
    assert trainable_fraction(12.5, 12.5) == 100.00
    assert trainable_fraction(1, 3) == 33.33


def test_trainable_fraction_invalid():
    with pytest.raises(ValueError):
        trainable_fraction(0, 10)
    with pytest.raises(ValueError):
        trainable_fraction(10, -1)


def test_lora_config_validation():
    with pytest.raises(ValueError):
        LoraConfig(rank=0)
    with pytest.raises(ValueError):
        LoraConfig(alpha=-1)
    config = LoraConfig()
    assert (config.rank, config.alpha) == (128, 32)


def _prepared_corpus_and_split(tmp_path, n_scam=2, n_non=1):
    corpus = Corpus()
    for i in range(n_scam):
        corpus.add_record(make_record(f"s{i}", label=Label.SCAM))
    for i in range(n_non):
        corpus.add_record(make_record(f"n{i}", label=Label.NONSCAM))
    spec = SplitSpec.from_dict({"MonetaryScam": n_scam}, n_non)
    split = build_split(corpus, spec, seed=0)
    cache = ArtifactCache(tmp_path / "cache")
    for record in corpus:
        preprocess_video(record, TEXT_ONLY, cache, IdentityTranslator())
    return corpus, split, cache


def test_emit_train_spec_counts_and_instruction(tmp_path):
    corpus, split, cache = _prepared_corpus_and_split(tmp_path)
    out = tmp_path / "train.json"
    result = emit_train_spec(split, corpus, cache, TEXT_ONLY, LoraConfig(), out)
    assert result.n_samples == 3
    spec = json.loads(out.read_text())
    jsonschema.validate(spec, TRAIN_SPEC_SCHEMA)
    for sample in spec["samples"]:
        assert (
            sample["bundle"]["instruction"]
            == "Is this a scam video? Answer Yes/No followed by your reasoning."
        )


def test_emit_train_spec_echoes_lora(tmp_path):
    corpus, split, cache = _prepared_corpus_and_split(tmp_path)
    out = tmp_path / "train.json"
    emit_train_spec(split, corpus, cache, TEXT_ONLY, LoraConfig(rank=128, alpha=32), out)
    spec = json.loads(out.read_text())
    assert spec["lora"]["rank"] == 128
    assert spec["lora"]["alpha"] == 32


def test_emit_train_spec_annotation_concatenation(tmp_path):
    corpus, split, cache = _prepared_corpus_and_split(tmp_path)
    out = tmp_path / "train.json"
    result = emit_train_spec(
        split, corpus, cache, TEXT_ONLY, LoraConfig(), out,
        annotations={"s0": ("C4", "C6")},
    )
    spec = json.loads(out.read_text())
    target = next(s["target"] for s in spec["samples"] if s["video_id"] == "s0")
    # reconstruct by the concatenation rule
    expected = "Yes. " + " ".join(f"[{criterion_text(c)}]" for c in ("C4", "C6"))
    assert target == expected
    assert target.startswith("Yes")
    assert criterion_text("C4") in target and criterion_text("C6") in target
    assert any("s0" in w for w in result.warnings)


def test_emit_train_spec_reasoning_precedence(tmp_path):
    corpus, split, cache = _prepared_corpus_and_split(tmp_path)
    out = tmp_path / "train.json"
    result = emit_train_spec(
        split, corpus, cache, TEXT_ONLY, LoraConfig(), out,
        reasonings={"s0": "streams a gift card generator"},
        annotations={"s0": ("C4",)},
    )
    spec = json.loads(out.read_text())
    target = next(s["target"] for s in spec["samples"] if s["video_id"] == "s0")
    assert target == "Yes. streams a gift card generator"
    assert not any("s0" in w for w in result.warnings)


def test_emit_train_spec_byte_stable(tmp_path):
    corpus, split, cache = _prepared_corpus_and_split(tmp_path)
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    emit_train_spec(split, corpus, cache, TEXT_ONLY, LoraConfig(), out1)
    emit_train_spec(split, corpus, cache, TEXT_ONLY, LoraConfig(), out2)
    assert out1.read_bytes() == out2.read_bytes()


def test_emit_train_spec_missing_artifacts_listed(tmp_path):
    corpus = Corpus()
    corpus.add_record(make_record("s0", label=Label.SCAM))
    corpus.add_record(make_record("n0", label=Label.NONSCAM))
    spec = SplitSpec.from_dict({"MonetaryScam": 1}, 1)
    split = build_split(corpus, spec, seed=0)
    cache = ArtifactCache(tmp_path / "cache")  # empty
    with pytest.raises(MissingArtifactsError) as exc:
        emit_train_spec(split, corpus, cache, TEXT_ONLY, LoraConfig(), tmp_path / "t.json")
    assert set(exc.value.missing_by_video) == {"s0", "n0"}


def test_mock_model_rule_match():
    model = mock_model({"gift card": ("yes", ("C2",))})
    record = make_record("v1", title="Free gift card generator", description="")
    bundle = assemble_prompt(record, TEXT_ONLY)
    raw = model.classify(bundle)
    assert raw.startswith("Yes")
    pred = parse_prediction(raw)
    assert pred.criteria == frozenset({"C2"})


def test_mock_model_default_no():
    model = mock_model([MockRule("gift card", "yes", ("C2",))])
    record = make_record("v1", title="cooking pasta", description="dinner ideas")
    bundle = assemble_prompt(record, TEXT_ONLY)
    assert model.classify(bundle) == "No."


def test_mock_model_deterministic():
    model = mock_model([MockRule("gift card", "yes", ("C2",))])
    record = make_record("v1", title="free GIFT CARD codes", description="")
    bundle = assemble_prompt(record, TEXT_ONLY)
    assert model.classify(bundle) == model.classify(bundle)


def test_mock_model_empty_ruleset_rejected():
    with pytest.raises(AdapterError):
        mock_model([])
