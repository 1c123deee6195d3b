"""Text normalization, frame sampling, and prompt-bundle assembly.

Per-video preprocessing is pure apart from adapter calls (translation,
transcription), so videos can be processed in parallel. Artifacts are
cached on disk keyed by (video_id, modality-config hash) and consumed by
the training-spec emitter and the prediction runner.
"""

from __future__ import annotations

import hashlib
import json
import math
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Protocol

from .corpus import VideoRecord

INSTRUCTION = "Is this a scam video? Answer Yes/No followed by your reasoning."

DEFAULT_FRAME_COUNT = 64


class PreprocessError(Exception):
    pass


class TranslationError(PreprocessError):
    def __init__(self, raw_text: str, cause: Exception):
        self.raw_text = raw_text
        self.cause = cause
        super().__init__(f"translation failed for {raw_text!r}: {cause}")


class MissingArtifactError(PreprocessError):
    pass


class Translator(Protocol):
    def translate(self, text: str, target: str = "en") -> str: ...


class Transcriber(Protocol):
    def transcribe(self, audio_path: str) -> str: ...


class IdentityTranslator:
    """Pass-through translator; language detection is the adapter's job."""

    def translate(self, text: str, target: str = "en") -> str:
        return text


def _load_emoji_names() -> dict[str, str]:
    ref = resources.files("scamscope").joinpath("data", "emoji_names.json")
    return json.loads(ref.read_text(encoding="utf-8"))["names"]


_EMOJI_NAMES = _load_emoji_names()

# Codepoint blocks treated as emoji even when absent from the name table.
_EMOJI_RANGES = (
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F700, 0x1F7FF),
    (0x1F900, 0x1F9FF),
    (0x1FA00, 0x1FAFF),
    (0x2600, 0x26FF),
    (0x2700, 0x27BF),
)

_VARIATION_SELECTOR = "️"
_ZWJ = "‍"


def _is_emoji(ch: str) -> bool:
    if ch in _EMOJI_NAMES:
        return True
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


def _emoji_name(ch: str) -> str:
    name = _EMOJI_NAMES.get(ch)
    if name is None:
        name = unicodedata.name(ch, f"u+{ord(ch):04x}").lower()
    return name


def demojize(text: str) -> str:
    """Replace every emoji codepoint with its ``:name:`` token.

    Non-emoji content is left byte-identical. Variation selectors and
    joiners attached to a replaced emoji are consumed with it; multi-emoji
    joins are rendered as consecutive tokens. Idempotent, since the tokens
    contain no emoji.
    """
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if _is_emoji(ch):
            out.append(f":{_emoji_name(ch)}:")
            i += 1
            while i < n and text[i] == _VARIATION_SELECTOR:
                i += 1
            if i + 1 < n and text[i] == _ZWJ and _is_emoji(text[i + 1]):
                i += 1
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def collapse_whitespace(text: str) -> str:
    return " ".join(text.split())


def normalize_text(raw: str, translator: Translator) -> str:
    """Translate, replace emojis with textual names, collapse whitespace."""
    try:
        translated = translator.translate(raw)
    except Exception as exc:
        raise TranslationError(raw, exc) from exc
    return collapse_whitespace(demojize(translated))


def truncate_transcript(text: str, max_tokens: int) -> str:
    """Keep the first max_tokens whitespace tokens, marking the cut."""
    tokens = text.split()
    if len(tokens) <= max_tokens:
        return text
    return " ".join(tokens[:max_tokens]) + " [...]"


@dataclass(frozen=True)
class FrameSample:
    indices: tuple[int, ...]
    timestamps_s: tuple[float, ...]
    total_frames: int
    fps: float

    @property
    def duration_s(self) -> float:
        return self.total_frames / self.fps


def sample_frames(total_frames: int, k: int = DEFAULT_FRAME_COUNT, fps: float = 1.0) -> FrameSample:
    """Uniformly sample k frame indices: indices[i] = floor(i * total / k).

    Index 0 is always included and the span is covered end to end. Videos
    shorter than k frames yield duplicate indices rather than padding.
    """
    if total_frames <= 0:
        raise ValueError(f"total_frames must be positive, got {total_frames}")
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    indices = tuple(math.floor(i * total_frames / k) for i in range(k))
    timestamps = tuple(idx / fps for idx in indices)
    return FrameSample(indices, timestamps, total_frames, fps)


@dataclass(frozen=True)
class ModalityConfig:
    use_title_desc: bool = True
    use_transcript: bool = False
    use_frames: bool = False

    def key(self) -> str:
        """Stable short hash used for artifact cache paths."""
        blob = json.dumps(
            {
                "use_title_desc": self.use_title_desc,
                "use_transcript": self.use_transcript,
                "use_frames": self.use_frames,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def to_dict(self) -> dict:
        return {
            "use_title_desc": self.use_title_desc,
            "use_transcript": self.use_transcript,
            "use_frames": self.use_frames,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModalityConfig":
        return cls(
            use_title_desc=bool(d.get("use_title_desc", True)),
            use_transcript=bool(d.get("use_transcript", False)),
            use_frames=bool(d.get("use_frames", False)),
        )


TEXT_ONLY = ModalityConfig(use_title_desc=True, use_transcript=False, use_frames=False)
FRAMES_TITLE_DESC = ModalityConfig(use_title_desc=True, use_transcript=False, use_frames=True)


@dataclass
class PromptBundle:
    """Assembled model input for one video."""

    frame_indices: tuple[int, ...]
    frame_timestamps_s: tuple[float, ...]
    title_norm: str
    description_norm: str
    transcript: Optional[str]
    instruction: str
    duration_s: float
    modality_config: ModalityConfig

    def to_dict(self) -> dict:
        return {
            "frame_indices": list(self.frame_indices),
            "frame_timestamps_s": list(self.frame_timestamps_s),
            "title_norm": self.title_norm,
            "description_norm": self.description_norm,
            "transcript": self.transcript,
            "instruction": self.instruction,
            "duration_s": self.duration_s,
            "modality_config": self.modality_config.to_dict(),
        }

    def serialize(self) -> str:
        """Canonical JSON; distinct field values always serialize distinctly."""
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    def render_prompt(self) -> str:
        """Human-readable prompt text fed to a model adapter.

        Field order is fixed: frames block, title, description, transcript,
        then the instruction sentence.
        """
        parts: list[str] = []
        if self.modality_config.use_frames:
            ts = ",".join(f"{t:.2f}" for t in self.frame_timestamps_s)
            parts.append(
                f"[frames] duration_s={self.duration_s:.2f} n={len(self.frame_indices)} timestamps_s={ts}"
            )
        if self.modality_config.use_title_desc:
            parts.append(f"[title] {self.title_norm}")
            parts.append(f"[description] {self.description_norm}")
        if self.modality_config.use_transcript:
            parts.append(f"[transcript] {self.transcript}")
        parts.append(self.instruction)
        return "\n".join(parts)

    @classmethod
    def from_dict(cls, d: dict) -> "PromptBundle":
        return cls(
            frame_indices=tuple(d["frame_indices"]),
            frame_timestamps_s=tuple(d["frame_timestamps_s"]),
            title_norm=d["title_norm"],
            description_norm=d["description_norm"],
            transcript=d["transcript"],
            instruction=d["instruction"],
            duration_s=d["duration_s"],
            modality_config=ModalityConfig.from_dict(d["modality_config"]),
        )


def assemble_prompt(
    record: VideoRecord,
    config: ModalityConfig,
    frames: Optional[FrameSample] = None,
    transcript: Optional[str] = None,
    title_norm: Optional[str] = None,
    description_norm: Optional[str] = None,
) -> PromptBundle:
    """Build the PromptBundle for one video from preprocessed artifacts.

    Artifacts must match the modality config: frames are required iff
    use_frames, a transcript iff use_transcript. Normalized title and
    description default to demojize + whitespace collapse of the record's
    raw fields (no translation without an adapter).
    """
    if config.use_frames and frames is None:
        raise MissingArtifactError(f"{record.video_id}: frames required by modality config")
    if config.use_transcript and transcript is None:
        raise MissingArtifactError(f"{record.video_id}: transcript required by modality config")

    if title_norm is None:
        title_norm = collapse_whitespace(demojize(record.title))
    if description_norm is None:
        description_norm = collapse_whitespace(demojize(record.description))

    if config.use_frames:
        assert frames is not None
        duration = record.duration_s if record.duration_s > 0 else frames.duration_s
        if frames.timestamps_s and frames.timestamps_s[-1] > duration:
            raise PreprocessError(
                f"{record.video_id}: frame timestamps exceed duration {duration}"
            )
        indices = frames.indices
        timestamps = frames.timestamps_s
    else:
        duration = record.duration_s
        indices = ()
        timestamps = ()

    return PromptBundle(
        frame_indices=indices,
        frame_timestamps_s=timestamps,
        title_norm=title_norm,
        description_norm=description_norm,
        transcript=transcript if config.use_transcript else None,
        instruction=INSTRUCTION,
        duration_s=duration,
        modality_config=config,
    )


class ArtifactCache:
    """Disk cache of per-video preprocessing artifacts.

    Layout: <root>/<video_id>/<config-hash>/{text.json,transcript.txt,frames.json}
    """

    def __init__(self, root) -> None:
        self.root = Path(root)

    def _dir(self, video_id: str, config: ModalityConfig) -> Path:
        return self.root / video_id / config.key()

    def store(
        self,
        video_id: str,
        config: ModalityConfig,
        *,
        title_norm: str,
        description_norm: str,
        transcript: Optional[str] = None,
        frames: Optional[FrameSample] = None,
    ) -> None:
        d = self._dir(video_id, config)
        d.mkdir(parents=True, exist_ok=True)
        (d / "text.json").write_text(
            json.dumps(
                {"title_norm": title_norm, "description_norm": description_norm},
                sort_keys=True,
                ensure_ascii=False,
            )
        )
        if transcript is not None:
            (d / "transcript.txt").write_text(transcript, encoding="utf-8")
        if frames is not None:
            (d / "frames.json").write_text(
                json.dumps(
                    {
                        "indices": list(frames.indices),
                        "timestamps_s": list(frames.timestamps_s),
                        "total_frames": frames.total_frames,
                        "fps": frames.fps,
                    },
                    sort_keys=True,
                )
            )

    def missing(self, video_id: str, config: ModalityConfig) -> list[str]:
        """Artifact files required by the config but absent from the cache."""
        d = self._dir(video_id, config)
        needed = ["text.json"]
        if config.use_transcript:
            needed.append("transcript.txt")
        if config.use_frames:
            needed.append("frames.json")
        return [name for name in needed if not (d / name).exists()]

    def has(self, video_id: str, config: ModalityConfig) -> bool:
        return not self.missing(video_id, config)

    def load_bundle(self, record: VideoRecord, config: ModalityConfig) -> PromptBundle:
        missing = self.missing(record.video_id, config)
        if missing:
            raise MissingArtifactError(f"{record.video_id}: missing {', '.join(missing)}")
        d = self._dir(record.video_id, config)
        text = json.loads((d / "text.json").read_text())
        transcript = None
        if config.use_transcript:
            transcript = (d / "transcript.txt").read_text(encoding="utf-8")
        frames = None
        if config.use_frames:
            fd = json.loads((d / "frames.json").read_text())
            frames = FrameSample(
                tuple(fd["indices"]), tuple(fd["timestamps_s"]), fd["total_frames"], fd["fps"]
            )
        return assemble_prompt(
            record,
            config,
            frames=frames,
            transcript=transcript,
            title_norm=text["title_norm"],
            description_norm=text["description_norm"],
        )


class MediaProbe(Protocol):
    def probe(self, media_path: str) -> tuple[int, float]:
        """Return (total_frames, fps) for a media file."""
        ...


class SyntheticMediaProbe:
    """Derives frame counts from record duration; real codecs live behind
    a media adapter and are out of scope for offline runs."""

    def __init__(self, fps: float = 30.0):
        self.fps = fps

    def probe_record(self, record: VideoRecord) -> tuple[int, float]:
        total = max(1, int(round(record.duration_s * self.fps)))
        return total, self.fps


def preprocess_video(
    record: VideoRecord,
    config: ModalityConfig,
    cache: ArtifactCache,
    translator: Translator,
    transcriber: Optional[Transcriber] = None,
    media_probe: Optional[SyntheticMediaProbe] = None,
    frame_count: int = DEFAULT_FRAME_COUNT,
    transcript_max_tokens: int = 2048,
) -> PromptBundle:
    """Run the normalization pipeline for one video and cache the artifacts."""
    title_norm = normalize_text(record.title, translator)
    description_norm = normalize_text(record.description, translator)
    transcript = None
    if config.use_transcript:
        if transcriber is None:
            raise MissingArtifactError(f"{record.video_id}: transcriber adapter required")
        transcript = truncate_transcript(
            transcriber.transcribe(record.media_path or record.video_id),
            transcript_max_tokens,
        )
    frames = None
    if config.use_frames:
        probe = media_probe or SyntheticMediaProbe()
        total, fps = probe.probe_record(record)
        frames = sample_frames(total, k=frame_count, fps=fps)
    cache.store(
        record.video_id,
        config,
        title_norm=title_norm,
        description_norm=description_norm,
        transcript=transcript,
        frames=frames,
    )
    return assemble_prompt(
        record,
        config,
        frames=frames,
        transcript=transcript,
        title_norm=title_norm,
        description_norm=description_norm,
    )
