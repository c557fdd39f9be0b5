"""Subcommand implementations. Each takes the parsed argparse namespace and returns an exit code."""
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from baseline.retriever import ResponseRetriever, load_candidates
from cli.run_record import RunRecord, record_path, write_output
from corpus_io.babi import write_origin_sidecar
from corpus_io.formats import parse_corpus, serialize
from corpus_io.manifest import (
    export_manifest,
    read_manifest,
    read_predictions,
    write_manifest,
    write_predictions,
)
from corpus_io.raw_file import RawFile
from dialog_model.dialog import DialogCorpus
from errors import PlanError
from injection_planner.planner import InjectionPlan, InjectionPlanner, PlanConfig, write_plan
from injection_planner.presets import Preset, load_preset
from injection_planner.review import sample_review
from logging_utils.logger import setup_logger
from metrics.report import compare, evaluate, read_report, render_comparison, scored_responses
from pattern_engine.catalog import export_catalog_table
from pattern_engine.recipes import RECIPES
from stats.corpus_stats import check_histogram, compute_stats, render_stats

logger = setup_logger()


def _load_corpus(record: RunRecord, path, fmt: str, origin: Optional[str] = None) -> DialogCorpus:
    raw = RawFile.read(path)
    record.add_input(path, raw.data)
    sidecar = None
    if fmt == "babi":
        # an updated bAbI corpus keeps its origin flags next to it
        origin_path = Path(origin) if origin else Path(f"{path}.origin")
        if origin_path.exists():
            sidecar = RawFile.read(origin_path)
            record.add_input(origin_path, sidecar.data)
            logger.info(f"Reading origin flags from {origin_path}")
        elif origin:
            raise FileNotFoundError(f"origin sidecar not found: {origin}")
    corpus = parse_corpus(raw, fmt, origin_sidecar=sidecar)
    logger.info(f"Parsed {len(corpus)} {fmt} dialogs from {path}")
    return corpus


def _finish(record: RunRecord, output: Optional[str], data: bytes) -> None:
    """Write data to --output with its run record next to it, or to stdout when --output is absent."""
    if output:
        write_output(record, output, data)
        record_path(output).write_text(record.to_json(), encoding="utf-8")
        logger.info(f"Wrote {output}")
    else:
        sys.stdout.write(data.decode("utf-8"))
        sys.stdout.flush()
        logger.debug(f"Run record:\n{record.to_json()}")


def _resolve_plan_config(args, record: RunRecord, fmt: str) -> Preset:
    source = args.config or args.preset
    preset = load_preset(source)
    if args.config:
        record.add_input(args.config, Path(args.config).read_bytes())
    if preset.dataset and preset.dataset != fmt:
        raise PlanError(f"preset {preset.name} is for {preset.dataset} corpora, not {fmt}")
    cfg: PlanConfig = preset.config
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.allow_shortfall:
        cfg = replace(cfg, allow_shortfall=True)
    record.seed = cfg.seed
    record.config.update({"format": fmt, "preset": preset.name, "plan_config": cfg.to_dict()})
    return replace(preset, config=cfg)


def _write_updated(
    record: RunRecord, output: str, updated: DialogCorpus, plan: Optional[InjectionPlan] = None
) -> None:
    write_output(record, output, serialize(updated))
    if updated.source_format == "babi":
        write_output(record, f"{output}.origin", write_origin_sidecar(updated))
    manifest = export_manifest(updated, corpus_tag=f"{updated.source_format}-updated")
    write_output(record, f"{output}.manifest.tsv", write_manifest(manifest))
    if plan is not None:
        write_output(record, f"{output}.plan.tsv", write_plan(plan))
        if plan.shortfalls:
            record.notes["shortfalls"] = [
                {"pattern": name, "target": target, "eligible": eligible}
                for name, target, eligible in plan.shortfalls
            ]
    record_path(output).write_text(record.to_json(), encoding="utf-8")


def cmd_inject(args) -> int:
    record = RunRecord(subcommand="inject")
    preset = _resolve_plan_config(args, record, args.format)
    corpus = _load_corpus(record, args.input, args.format, args.origin)
    planner = InjectionPlanner(jobs=args.jobs)
    record.notes["phrase_bank_digest"] = planner.engine.phrase_bank.digest

    plan = planner.plan(corpus, preset.config)
    updated = planner.execute(corpus, plan, preset.config.seed)
    stats = compute_stats(updated)
    if preset.config.histogram_targets:
        for k, actual, target in check_histogram(stats.overlap_histogram, preset.config.histogram_targets):
            logger.warning(f"Dialogs with at least {k} patterns: {actual}, target {target}")
    record.notes["per_pattern_counts"] = dict(plan.counts())
    _write_updated(record, args.output, updated, plan)
    logger.info(f"Injected {len(plan)} patterns; updated corpus written to {args.output}")
    return 0


def ablation_output(output_dir, input_path, pattern: str) -> Path:
    source = Path(input_path)
    return Path(output_dir) / f"{source.stem}.{pattern}{source.suffix}"


def cmd_ablate(args) -> int:
    fmt = args.format
    if args.all:
        patterns = [name for name, recipe in RECIPES.items() if fmt in recipe.datasets]
    else:
        patterns = list(args.pattern or [])
        if not patterns:
            raise PlanError("name at least one --pattern or pass --all")
    for name in patterns:
        if name not in RECIPES:
            raise PlanError(f"unknown pattern {name!r}; recipe-bearing patterns: {', '.join(RECIPES)}")
        if fmt not in RECIPES[name].datasets:
            raise PlanError(f"pattern not applicable to {fmt}: {name}")

    base = RunRecord(subcommand="ablate")
    preset = _resolve_plan_config(args, base, fmt)
    corpus = _load_corpus(base, args.input, fmt, args.origin)
    planner = InjectionPlanner(jobs=args.jobs)
    for name in patterns:
        record = replace(base, config=dict(base.config, pattern=name), inputs=dict(base.inputs), outputs={})
        record.notes = {"phrase_bank_digest": planner.engine.phrase_bank.digest}
        output = ablation_output(args.output, args.input, name)
        updated = planner.ablate(corpus, preset.config, name)
        _write_updated(record, str(output), updated)
        logger.info(f"Ablation corpus for {name} written to {output}")
    return 0


def cmd_stats(args) -> int:
    record = RunRecord(subcommand="stats", config={"format": args.format})
    corpus = _load_corpus(record, args.input, args.format, args.origin)
    histogram_targets = reference_means = pattern_targets = None
    if args.preset:
        preset = load_preset(args.preset)
        record.config["preset"] = preset.name
        histogram_targets = preset.config.histogram_targets
        reference_means = preset.reference_means
        pattern_targets = preset.config.targets
    stats = compute_stats(corpus, input_checksum=record.inputs[str(args.input)])
    text = render_stats(
        stats,
        histogram_targets=histogram_targets,
        reference_means=reference_means,
        pattern_targets=pattern_targets,
    )
    _finish(record, args.output, text.encode("utf-8"))
    return 0


def cmd_manifest(args) -> int:
    record = RunRecord(subcommand="manifest", config={"format": args.format})
    corpus = _load_corpus(record, args.input, args.format, args.origin)
    manifest = export_manifest(corpus, corpus_tag=args.corpus_tag)
    _finish(record, args.output, write_manifest(manifest))
    return 0


def cmd_eval(args) -> int:
    record = RunRecord(subcommand="eval", config={"entity_scope": args.entity_scope})
    manifest_file = RawFile.read(args.manifest)
    record.add_input(args.manifest, manifest_file.data)
    manifest = read_manifest(manifest_file)
    predictions_file = RawFile.read(args.predictions)
    record.add_input(args.predictions, predictions_file.data)
    preds = read_predictions(predictions_file, manifest)

    corpus = None
    corpus_checksum = ""
    if args.corpus:
        if not args.format:
            raise PlanError("--corpus needs --format")
        record.config["format"] = args.format
        corpus = _load_corpus(record, args.corpus, args.format, args.origin)
        corpus_checksum = record.inputs[str(args.corpus)]
    report = evaluate(
        preds,
        manifest,
        corpus,
        entity_scope=args.entity_scope,
        corpus_checksum=corpus_checksum,
        predictions_checksum=predictions_file.checksum,
    )
    if args.label:
        report = replace(report, label=args.label)
    text = report.render()
    if args.compare:
        other_file = RawFile.read(args.compare)
        record.add_input(args.compare, other_file.data)
        other = read_report(other_file.text())
        labels = (other.label or Path(args.compare).stem, report.label or "this run")
        scored = scored_responses(other, report)
        text += "\n" + render_comparison(compare(other, report), labels=labels, scored=scored)
    _finish(record, args.output, text.encode("utf-8"))
    return 0


def cmd_compare(args) -> int:
    record = RunRecord(subcommand="compare")
    reports = []
    for path in (args.original, args.updated):
        raw = RawFile.read(path)
        record.add_input(path, raw.data)
        reports.append(read_report(raw.text()))
    original, updated = reports
    labels = (original.label or Path(args.original).stem, updated.label or Path(args.updated).stem)
    scored = scored_responses(original, updated)
    table = render_comparison(compare(original, updated), labels=labels, scored=scored)
    _finish(record, args.output, table.encode("utf-8"))
    return 0


def cmd_review(args) -> int:
    record = RunRecord(subcommand="review", seed=args.seed, config={"fraction": args.fraction})
    record.config["format"] = args.format
    corpus = _load_corpus(record, args.input, args.format, args.origin)
    sheet = sample_review(corpus, args.fraction, args.seed)
    _finish(record, args.output, sheet.render().encode("utf-8"))
    return 0


def cmd_baseline(args) -> int:
    record = RunRecord(subcommand="baseline", config={"format": args.format})
    corpus = _load_corpus(record, args.corpus, args.format, args.origin)
    candidates_format = args.candidates_format or args.format
    record.config["candidates_format"] = candidates_format
    candidates_file = RawFile.read(args.candidates)
    record.add_input(args.candidates, candidates_file.data)
    candidates = load_candidates(candidates_file, candidates_format)

    if args.manifest:
        manifest_file = RawFile.read(args.manifest)
        record.add_input(args.manifest, manifest_file.data)
        manifest = read_manifest(manifest_file)
    else:
        manifest = export_manifest(corpus)
    predictions = ResponseRetriever(candidates).predict(corpus, manifest)
    _finish(record, args.output, write_predictions(predictions))
    return 0


def cmd_patterns(args) -> int:
    record = RunRecord(subcommand="patterns")
    _finish(record, args.output, export_catalog_table().encode("utf-8"))
    return 0
