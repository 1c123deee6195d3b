"""Command-line entry points for every pipeline stage.

Each subcommand delegates to exactly one module operation chain and exits
0 on success; failures print a structured JSON error to stderr and exit
nonzero. All randomness flows from explicit seeds so reruns with the same
config produce byte-identical artifacts (wall-clock timing is opt-in).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import adversary, crawler, evaluate
from .annotate import AnnotationStore, BatchComposition
from .config import PipelineConfig, load_config
from .corpus import Corpus, Label, SplitAssignment, build_split
from .model_adapters import (
    LoraConfig,
    MockRule,
    emit_train_spec,
    load_ruleset,
    mock_model,
    parse_prediction,
)
from .preprocess import (
    ArtifactCache,
    IdentityTranslator,
    ModalityConfig,
    assemble_prompt,
    preprocess_video,
)

DEFAULT_RULESET = [
    MockRule("gift card", "yes", ("C2", "C5")),
    MockRule("get rich", "yes", ("C6",)),
    MockRule("make money fast", "yes", ("C4",)),
    MockRule("arbitrage bot", "yes", ("C4", "C6")),
    MockRule("tech support", "yes", ("C7",)),
]


class FixedTranscriber:
    """Offline stand-in for the speech-to-text adapter."""

    def transcribe(self, audio_path: str) -> str:
        return f"transcript for {audio_path}"


def _load_pipeline_config(path: str | None) -> PipelineConfig:
    return load_config(path) if path else PipelineConfig()


def _model_from_args(args) -> object:
    if args.model != "mock":
        raise SystemExit(f"unknown model adapter {args.model!r}; only 'mock' runs offline")
    rules = load_ruleset(args.ruleset) if getattr(args, "ruleset", None) else DEFAULT_RULESET
    return mock_model(rules)


def _subset_ids(split: SplitAssignment, subset: str) -> list[str]:
    if subset == "train":
        return sorted(split.train_ids)
    if subset == "test":
        return sorted(split.test_ids)
    return sorted(split.train_ids | split.test_ids)


def cmd_ingest(args) -> int:
    corpus_dir = Path(args.corpus)
    corpus = Corpus.load(corpus_dir) if (corpus_dir / "manifest.jsonl").exists() else Corpus()
    added = corpus.ingest_source(args.manifest, args.source)
    corpus.save(corpus_dir)
    print(json.dumps({"added": added, "total": len(corpus)}))
    return 0


def cmd_relabel(args) -> int:
    corpus = Corpus.load(args.corpus)
    record = corpus.apply_relabel(args.video_id, args.new_label, args.reason, args.by)
    corpus.save(args.corpus)
    print(
        json.dumps(
            {
                "video_id": record.video_id,
                "effective_label": record.effective_label.value,
                "original_label": record.ground_truth.value,
            }
        )
    )
    return 0


def cmd_split(args) -> int:
    config = _load_pipeline_config(args.config)
    corpus = Corpus.load(args.corpus or config.corpus_dir)
    seed = args.seed if args.seed is not None else config.seeds.split
    assignment = build_split(corpus, config.split.to_spec(), seed)
    assignment.save(args.out)
    print(
        json.dumps(
            {"train": len(assignment.train_ids), "test": len(assignment.test_ids), "seed": seed}
        )
    )
    return 0


def cmd_preprocess(args) -> int:
    config = _load_pipeline_config(args.config)
    corpus = Corpus.load(args.corpus or config.corpus_dir)
    modality = config.modalities.to_modality_config()
    cache = ArtifactCache(args.cache or config.cache_dir)
    translator = IdentityTranslator()
    transcriber = FixedTranscriber() if modality.use_transcript else None
    ids = None
    if args.split:
        ids = set(_subset_ids(SplitAssignment.load(args.split), args.subset))
    done = 0
    skipped = 0
    for record in corpus:
        if ids is not None and record.video_id not in ids:
            continue
        if not record.available:
            skipped += 1
            continue
        preprocess_video(record, modality, cache, translator, transcriber)
        done += 1
    print(json.dumps({"preprocessed": done, "skipped_unavailable": skipped}))
    return 0


def cmd_emit_train_spec(args) -> int:
    config = _load_pipeline_config(args.config)
    corpus = Corpus.load(args.corpus or config.corpus_dir)
    split = SplitAssignment.load(args.split)
    cache = ArtifactCache(args.cache or config.cache_dir)
    modality = config.modalities.to_modality_config()
    reasonings = None
    if args.reasonings:
        reasonings = {
            row["video_id"]: row["reasoning"]
            for row in map(json.loads, Path(args.reasonings).read_text().splitlines())
            if row
        }
    lora = LoraConfig(rank=args.lora_rank, alpha=args.lora_alpha)
    result = emit_train_spec(
        split,
        corpus,
        cache,
        modality,
        lora,
        args.out,
        dataset_ref=str(args.corpus or config.corpus_dir),
        reasonings=reasonings,
    )
    print(json.dumps({"samples": result.n_samples, "warnings": len(result.warnings)}))
    return 0


def cmd_predict(args) -> int:
    config = _load_pipeline_config(args.config)
    corpus = Corpus.load(args.corpus or config.corpus_dir)
    modality = config.modalities.to_modality_config()
    model = _model_from_args(args)
    cache = ArtifactCache(args.cache or config.cache_dir)
    if args.split:
        ids = _subset_ids(SplitAssignment.load(args.split), args.subset)
    else:
        ids = sorted(r.video_id for r in corpus if r.available)
    n = 0
    with Path(args.out).open("w", encoding="utf-8") as fh:
        for vid in ids:
            record = corpus.get(vid)
            if not record.available:
                continue
            if cache.has(vid, modality):
                bundle = cache.load_bundle(record, modality)
            else:
                bundle = assemble_prompt(record, modality)
            start = time.perf_counter()
            raw = model.classify(bundle)
            latency = time.perf_counter() - start if args.timing else 0.0
            pred = parse_prediction(raw, latency_s=latency)
            fh.write(
                json.dumps({"video_id": vid, **pred.to_dict()}, sort_keys=True, ensure_ascii=False)
                + "\n"
            )
            n += 1
    print(json.dumps({"predicted": n, "out": str(args.out)}))
    return 0


def cmd_evaluate(args) -> int:
    corpus = Corpus.load(args.corpus)
    rows = [json.loads(line) for line in Path(args.preds).read_text().splitlines() if line]
    preds = [row["label"] for row in rows]
    truths = [corpus.get(row["video_id"]).effective_label for row in rows]
    sources = [corpus.get(row["video_id"]).source for row in rows]
    cm = evaluate.confusion(preds, truths)
    core = evaluate.metrics(cm)
    per_source = evaluate.per_source_breakdown(preds, truths, sources)
    cost = evaluate.cost_profile(
        [{"latency_s": row.get("latency_s", 0.0), "memory_gb": row.get("peak_memory_gb")} for row in rows]
    )
    report = evaluate.build_report(core, per_source, cost, model=args.model_name)
    evaluate.write_report(args.out, report)
    print(json.dumps(report["row"]))
    return 0


def _synthetic_frames(video_id: str, scam: bool) -> np.ndarray:
    """Deterministic stand-in frames: scam videos render bright, non-scam dark."""
    seed = int.from_bytes(hashlib.sha256(video_id.encode()).digest()[:4], "big")
    rng = np.random.default_rng(seed)
    base = 200.0 if scam else 60.0
    return np.clip(rng.normal(base, 5.0, size=(8, 16, 16)), 0, 255).astype(np.uint8)


class _LuminanceModel:
    """Visual-lane mock: thresholds mean frame brightness."""

    def __init__(self):
        self.descriptor = type("D", (), {"name": "luminance-mock"})()

    def classify(self, frames: np.ndarray) -> str:
        return "Yes. Bright frames." if float(frames.mean()) > 130.0 else "No. Dark frames."


def cmd_perturb(args) -> int:
    corpus = Corpus.load(args.corpus)
    records = [r for r in corpus if r.available]

    if args.kind == "noise":
        model = _LuminanceModel()
        dataset = []
        for r in records:
            scam = r.effective_label == Label.SCAM
            frames = _synthetic_frames(r.video_id, scam)
            pred = parse_prediction(model.classify(frames))
            if pred.label == ("yes" if scam else "no"):
                dataset.append((frames, "yes" if scam else "no"))
        perturbation = adversary.Perturbation(
            f"noise(sigma={args.intensity},seed={args.seed})",
            lambda frames: adversary.frame_noise(frames, args.intensity, args.seed),
        )
        report = adversary.robustness_eval(model, dataset, perturbation)
    else:
        model = _model_from_args(args)
        modality = ModalityConfig()
        dataset = []
        for r in records:
            bundle = assemble_prompt(r, modality)
            truth = "yes" if r.effective_label == Label.SCAM else "no"
            pred = parse_prediction(model.classify(bundle))
            if pred.label == truth:
                dataset.append((bundle, truth))
        if not dataset:
            raise SystemExit("no correctly-classified samples to perturb")
        if args.kind == "leet":
            perturbation = adversary.leet_perturbation(args.intensity, args.seed)
        else:
            keywords = args.keywords or [r.keyword for r in DEFAULT_RULESET]
            perturbation = adversary.keyword_perturbation(keywords, args.keyword_mode, args.seed)
        report = adversary.robustness_eval(model, dataset, perturbation)

    Path(args.out).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    print(json.dumps({"drop_pct": report.drop_pct, "out": str(args.out)}))
    return 0


def cmd_crawl(args) -> int:
    state = crawler.CrawlState(args.quota)
    if args.fixture:
        fixture = json.loads(Path(args.fixture).read_text())
        search_results = fixture.get("search_results", {})
        availability = fixture.get("availability", {})

        def search(query):
            return [tuple(item) for item in search_results.get(query, [])]

        def download(video_id):
            return crawler.DownloadOutcome(availability.get(video_id, "ok"))

    else:
        # Self-contained synthetic run: deterministic candidates per query.
        rng_seed = args.seed

        def search(query):
            digest = hashlib.sha256(f"{rng_seed}:{query}".encode()).hexdigest()[:8]
            return [
                (f"wild-{digest}-{i}", f"{query} result {i}", f"video about {query}")
                for i in range(args.per_query)
            ]

        def download(video_id):
            h = int.from_bytes(hashlib.sha256(video_id.encode()).digest()[:2], "big")
            return (
                crawler.DownloadOutcome.UNAVAILABLE
                if (h % 100) < int(args.unavailable_rate * 100)
                else crawler.DownloadOutcome.OK
            )

    keyword_sets = crawler.load_keyword_sets(args.keywords)
    queries = crawler.plan_queries(keyword_sets)
    for query in queries:
        crawler.discover(state, query, search, today=0)
    for day in range(args.days):
        crawler.schedule_downloads(state, day, download)
    if args.state_out:
        state.save(args.state_out)
    report = crawler.crawl_report(state)
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(json.dumps({k: report[k] for k in ("discovered", "downloaded", "unavailable", "pending")}))
    return 0


def cmd_annotate_serve(args) -> int:
    import uvicorn

    from .api import create_app

    config = _load_pipeline_config(args.config)
    corpus = Corpus.load(args.corpus or config.corpus_dir)
    store = AnnotationStore()
    if args.batch_size:
        store.create_session(
            corpus,
            args.batch_size,
            BatchComposition(args.batch_composition),
            config.seeds.batch,
            label=args.batch_label,
        )
    predictions = {}
    if args.preds:
        for line in Path(args.preds).read_text().splitlines():
            if not line:
                continue
            row = json.loads(line)
            predictions[row["video_id"]] = parse_prediction(
                f"{'Yes' if row['label'] == 'yes' else 'No'}. {row['reasoning']}"
                if row.get("reasoning")
                else ("Yes." if row["label"] == "yes" else "No.")
            )
    media_dir = Path(args.corpus or config.corpus_dir) / "media"
    app = create_app(
        corpus,
        store,
        predictions=predictions,
        media_dir=media_dir if media_dir.is_dir() else None,
        token=config.api.token,
    )
    host = args.host or config.api.host
    port = args.port or config.api.port
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def cmd_report(args) -> int:
    data = json.loads(Path(args.evaluation).read_text())
    lines = [
        "# Evaluation report",
        "",
        "| Input Modality | Model | Input Feature | Finetuned | Accuracy | Precision | Recall | F1 |",
        "|---|---|---|---|---|---|---|---|",
    ]
    row = data["row"]
    lines.append(
        f"| {row['input_modality']} | {row['model']} | {row['input_feature']} | "
        f"{'yes' if row['finetuned'] else 'no'} | {row['accuracy']:.2f} | "
        f"{row['precision']:.2f} | {row['recall']:.2f} | {row['f1']:.2f} |"
    )
    for ref in data.get("reference_results", []):
        lines.append(
            f"| {ref['input_modality']} | {ref['model']} (reference) | {ref['input_feature']} | "
            f"{'yes' if ref['finetuned'] else 'no'} | {ref['accuracy']:.2f} | "
            f"{ref['precision']:.2f} | {ref['recall']:.2f} | {ref['f1']:.2f} |"
        )
    if "per_source" in data and data["per_source"]:
        lines += ["", "## Per-source breakdown", ""]
        for src, m in sorted(data["per_source"].items()):
            lines.append(
                f"- {src}: accuracy {m['accuracy']:.2f}, precision {m['precision']:.2f}, "
                f"recall {m['recall']:.2f}, F1 {m['f1']:.2f}"
            )
    if "cost" in data:
        cost = data["cost"]
        lines += [
            "",
            "## Cost",
            "",
            f"- mean latency: {cost['mean_latency_s_per_sample']} s/sample over {cost['n_samples']} samples",
            f"- peak memory: {cost['peak_memory_gb']} GB",
        ]
    lines.append("")
    Path(args.out).write_text("\n".join(lines))
    print(json.dumps({"out": str(args.out)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scamscope", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a line-delimited manifest into a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--source", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("relabel", help="append a relabel ledger entry")
    p.add_argument("--corpus", required=True)
    p.add_argument("--video-id", required=True)
    p.add_argument("--new-label", required=True, choices=[l.value for l in Label])
    p.add_argument("--reason", required=True)
    p.add_argument("--by", required=True)
    p.set_defaults(func=cmd_relabel)

    p = sub.add_parser("split", help="build a deterministic train/test split")
    p.add_argument("--corpus")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("preprocess", help="normalize text and cache prompt artifacts")
    p.add_argument("--corpus")
    p.add_argument("--config")
    p.add_argument("--cache")
    p.add_argument("--split")
    p.add_argument("--subset", default="all", choices=["train", "test", "all"])
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("emit-train-spec", help="serialize an instruction-tuning job spec")
    p.add_argument("--corpus")
    p.add_argument("--config")
    p.add_argument("--cache")
    p.add_argument("--split", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--reasonings")
    p.add_argument("--lora-rank", type=int, default=128)
    p.add_argument("--lora-alpha", type=int, default=32)
    p.set_defaults(func=cmd_emit_train_spec)

    p = sub.add_parser("predict", help="classify videos through a model adapter")
    p.add_argument("--corpus")
    p.add_argument("--config")
    p.add_argument("--cache")
    p.add_argument("--split")
    p.add_argument("--subset", default="test", choices=["train", "test", "all"])
    p.add_argument("--model", default="mock")
    p.add_argument("--ruleset")
    p.add_argument("--timing", action="store_true", help="record wall-clock latency per sample")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against corpus labels")
    p.add_argument("--preds", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--model-name", default="mock")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("perturb", help="measure accuracy under a perturbation")
    p.add_argument("--corpus", required=True)
    p.add_argument("--kind", required=True, choices=["leet", "keyword", "noise"])
    p.add_argument("--intensity", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", default="mock")
    p.add_argument("--ruleset")
    p.add_argument("--keywords", nargs="*")
    p.add_argument("--keyword-mode", default="remove", choices=["remove", "misspell"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("crawl", help="run the quota-limited crawl loop offline")
    p.add_argument("--keywords")
    p.add_argument("--quota", type=int, required=True)
    p.add_argument("--days", type=int, required=True)
    p.add_argument("--fixture")
    p.add_argument("--per-query", type=int, default=5)
    p.add_argument("--unavailable-rate", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--state-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_crawl)

    p = sub.add_parser("annotate-serve", help="serve the annotation workbench API")
    p.add_argument("--corpus")
    p.add_argument("--config")
    p.add_argument("--preds")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--batch-composition", default="randomized")
    p.add_argument("--batch-label")
    p.set_defaults(func=cmd_annotate_serve)

    p = sub.add_parser("report", help="render an evaluation report as markdown")
    p.add_argument("--evaluation", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
