import json
import random
import string
from importlib import resources

import pytest

from scamscope.corpus import Label, Source
from scamscope.preprocess import (
    FRAMES_TITLE_DESC,
    INSTRUCTION,
    TEXT_ONLY,
    ArtifactCache,
    IdentityTranslator,
    MissingArtifactError,
    ModalityConfig,
    PromptBundle,
    TranslationError,
    assemble_prompt,
    collapse_whitespace,
    demojize,
    normalize_text,
    preprocess_video,
    sample_frames,
    truncate_transcript,
)

from conftest import make_record


def _emoji_table():
    ref = resources.files("scamscope").joinpath("data", "emoji_names.json")
    return json.loads(ref.read_text(encoding="utf-8"))["names"]


def test_demojize_gift():
    # oracle: shortname table lookup spliced by hand
    table = _emoji_table()
    assert demojize("Free 🎁 card") == f"Free :{table['🎁']}: card"
    assert demojize("Free 🎁 card") == "Free :wrapped gift: card"


def test_demojize_splices_from_table():
    table = _emoji_table()
    rng = random.Random(99)
    emojis = rng.sample(sorted(table), 25)
    for e in emojis:
        text = f"win {e} now"
        assert demojize(text) == f"win :{table[e]}: now"


def test_demojize_plain_text_identity():
    assert demojize("plain text") == "plain text"


def test_demojize_idempotent():
    rng = random.Random(5)
    table = sorted(_emoji_table())
    for _ in range(50):
        text = "".join(
            rng.choice(table) if rng.random() < 0.2 else rng.choice(string.printable)
            for _ in range(rng.randint(0, 40))
        )
        once = demojize(text)
        assert demojize(once) == once


def test_demojize_ascii_unchanged():
    rng = random.Random(6)
    for _ in range(100):
        text = "".join(rng.choice(string.printable) for _ in range(rng.randint(0, 60)))
        assert demojize(text) == text


def test_demojize_variation_selector_consumed():
    assert demojize("⚠️ stop") == ":warning: stop"


def test_normalize_text_identity_translator():
    out = normalize_text("Free   🎁\n\ncard ", IdentityTranslator())
    assert out == "Free :wrapped gift: card"


def test_normalize_text_translator_passthrough():
    class MarkerTranslator:
        def translate(self, text, target="en"):
            return f"<translated> {text}"

    out = normalize_text("hola", MarkerTranslator())
    assert "<translated>" in out


def test_normalize_text_whitespace_collapse():
    raw = "  Fr33\n\nG!ftC@rd "
    # whitespace-collapse oracle via split/join
    assert normalize_text(raw, IdentityTranslator()) == " ".join(raw.split())
    assert normalize_text(raw, IdentityTranslator()) == "Fr33 G!ftC@rd"


def test_normalize_text_failure_carries_raw():
    class Broken:
        def translate(self, text, target="en"):
            raise RuntimeError("service down")

    with pytest.raises(TranslationError) as exc:
        normalize_text("some title", Broken())
    assert exc.value.raw_text == "some title"


def test_sample_frames_identity_coverage():
    fs = sample_frames(64, k=64, fps=8.0)
    assert fs.indices == tuple(range(64))
    assert fs.timestamps_s == tuple(i / 8.0 for i in range(64))


def test_sample_frames_stride_two():
    fs = sample_frames(128, k=64, fps=1.0)
    assert fs.indices == tuple(range(0, 128, 2))


def test_sample_frames_short_video_duplicates():
    fs = sample_frames(10, k=64, fps=1.0)
    assert len(fs.indices) == 64
    assert all(0 <= i <= 9 for i in fs.indices)
    assert list(fs.indices) == sorted(fs.indices)
    assert len(set(fs.indices)) == 10


def test_sample_frames_floor_formula_oracle():
    rng = random.Random(42)
    for _ in range(100):
        total = rng.randint(1, 5000)
        k = rng.randint(1, 256)
        fs = sample_frames(total, k=k, fps=2.0)
        expected = [int(i * total // k) for i in range(k)]
        assert list(fs.indices) == expected
        assert len(fs.indices) == k
        assert fs.indices[0] == 0
        assert max(fs.indices) < total
        if total >= k:
            assert all(a < b for a, b in zip(fs.indices, fs.indices[1:]))


@pytest.mark.parametrize("total,k,fps", [(0, 64, 1.0), (10, 0, 1.0), (10, 64, 0.0), (-3, 4, 1.0)])
def test_sample_frames_invalid(total, k, fps):
    with pytest.raises(ValueError):
        sample_frames(total, k=k, fps=fps)


def test_assemble_prompt_instruction_exact():
    record = make_record("v1", duration_s=10.0)
    frames = sample_frames(300, k=64, fps=30.0)
    bundle = assemble_prompt(record, FRAMES_TITLE_DESC, frames=frames)
    assert bundle.instruction == "Is this a scam video? Answer Yes/No followed by your reasoning."
    assert bundle.instruction == INSTRUCTION
    assert bundle.render_prompt().endswith(INSTRUCTION)


def test_assemble_prompt_text_only_degenerate():
    record = make_record("v1")
    bundle = assemble_prompt(record, TEXT_ONLY)
    assert bundle.frame_indices == ()
    assert bundle.frame_timestamps_s == ()
    assert bundle.transcript is None


def test_assemble_prompt_deterministic():
    record = make_record("v1", duration_s=10.0)
    frames = sample_frames(300, k=64, fps=30.0)
    a = assemble_prompt(record, FRAMES_TITLE_DESC, frames=frames)
    b = assemble_prompt(record, FRAMES_TITLE_DESC, frames=frames)
    assert a.serialize() == b.serialize()
    assert a.render_prompt() == b.render_prompt()


def test_assemble_prompt_missing_artifacts():
    record = make_record("v1")
    with pytest.raises(MissingArtifactError):
        assemble_prompt(record, FRAMES_TITLE_DESC)  # no frames
    with pytest.raises(MissingArtifactError):
        assemble_prompt(record, ModalityConfig(use_transcript=True))  # no transcript


def test_assemble_prompt_field_order():
    record = make_record("v1", title="T", description="D", duration_s=10.0)
    frames = sample_frames(300, k=4, fps=30.0)
    bundle = assemble_prompt(
        record, ModalityConfig(True, True, True), frames=frames, transcript="spoken words"
    )
    text = bundle.render_prompt()
    order = [text.index("[frames]"), text.index("[title]"), text.index("[description]"),
             text.index("[transcript]"), text.index(INSTRUCTION)]
    assert order == sorted(order)


def test_serialization_injective_sample():
    rng = random.Random(77)
    seen = {}
    for i in range(300):
        record = make_record(
            f"v{i}",
            title="".join(rng.choice("ab\n|,[]:") for _ in range(rng.randint(0, 8))),
            description="".join(rng.choice("cd e|") for _ in range(rng.randint(0, 8))),
        )
        bundle = assemble_prompt(record, TEXT_ONLY)
        key = (bundle.title_norm, bundle.description_norm, bundle.transcript,
               bundle.frame_indices)
        blob = bundle.serialize()
        if blob in seen:
            assert seen[blob] == key
        else:
            seen[blob] = key


def test_bundle_dict_roundtrip():
    record = make_record("v1", duration_s=4.0)
    frames = sample_frames(120, k=8, fps=30.0)
    bundle = assemble_prompt(record, FRAMES_TITLE_DESC, frames=frames)
    again = PromptBundle.from_dict(json.loads(bundle.serialize()))
    assert again.serialize() == bundle.serialize()


def test_truncate_transcript():
    assert truncate_transcript("a b c", 5) == "a b c"
    assert truncate_transcript("a b c d e f", 3) == "a b c [...]"


def test_cache_roundtrip(tmp_path):
    record = make_record("v1", duration_s=10.0)
    cache = ArtifactCache(tmp_path)
    config = ModalityConfig(True, True, True)
    frames = sample_frames(300, k=16, fps=30.0)
    cache.store(
        "v1",
        config,
        title_norm="t",
        description_norm="d",
        transcript="words",
        frames=frames,
    )
    assert cache.has("v1", config)
    bundle = cache.load_bundle(record, config)
    assert bundle.title_norm == "t"
    assert bundle.transcript == "words"
    assert bundle.frame_indices == frames.indices


def test_cache_missing_lists_files(tmp_path):
    record = make_record("v1")
    cache = ArtifactCache(tmp_path)
    config = ModalityConfig(True, True, True)
    missing = cache.missing("v1", config)
    assert missing == ["text.json", "transcript.txt", "frames.json"]
    with pytest.raises(MissingArtifactError):
        cache.load_bundle(record, config)


def test_preprocess_video_populates_cache(tmp_path):
    record = make_record("v1", title="Win 🎁 now", duration_s=12.0)

    class EchoTranscriber:
        def transcribe(self, audio_path):
            return "hello   world"

    cache = ArtifactCache(tmp_path)
    config = ModalityConfig(True, True, True)
    bundle = preprocess_video(record, config, cache, IdentityTranslator(), EchoTranscriber())
    assert ":wrapped gift:" in bundle.title_norm
    assert cache.has("v1", config)
    again = cache.load_bundle(record, config)
    assert again.serialize() == bundle.serialize()
