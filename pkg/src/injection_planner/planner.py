import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from tqdm import tqdm

from config import get_bool_config, get_config
from corpus_io.formats import corpus_digest
from dialog_model.dialog import Dialog, DialogCorpus
from errors import PlanError, PlanShortfallError
from logging_utils.logger import setup_logger
from pattern_engine.context import PatternContext
from pattern_engine.engine import Anchor, PatternEngine
from pattern_engine.recipes import RECIPES, PATTERN_ORDER
from seeding import keyed_rng, seeded_order

# keeps dialogs whose histogram bucket is already full selectable
_MIN_WEIGHT = 1e-3


@dataclass(frozen=True)
class PlanConfig:
    targets: Mapping[str, int]
    seed: int = 0
    max_patterns_per_dialog: int = 4
    pattern_order: Tuple[str, ...] = PATTERN_ORDER
    # k -> desired number of dialogs carrying at least k patterns
    histogram_targets: Optional[Mapping[int, int]] = None
    allow_shortfall: bool = False

    def validate(self, dataset: Optional[str] = None):
        if self.max_patterns_per_dialog < 1:
            raise PlanError("max_patterns_per_dialog must be positive")
        for name, target in self.targets.items():
            if name not in RECIPES:
                raise PlanError(f"target names a pattern without a recipe: {name}")
            if not isinstance(target, int) or target < 0:
                raise PlanError(f"target for {name} must be a non-negative integer, got {target!r}")
            if target and name not in self.pattern_order:
                raise PlanError(f"{name} has a target but is missing from pattern_order")
            if target and dataset and dataset not in RECIPES[name].datasets:
                raise PlanError(f"{name} does not apply to {dataset} corpora")

    def to_dict(self) -> Dict:
        return {
            "targets": {k: int(v) for k, v in sorted(self.targets.items())},
            "seed": int(self.seed),
            "max_patterns_per_dialog": self.max_patterns_per_dialog,
            "pattern_order": list(self.pattern_order),
            "histogram_targets": (
                {str(k): int(v) for k, v in sorted(self.histogram_targets.items())} if self.histogram_targets else None
            ),
            "allow_shortfall": self.allow_shortfall,
        }

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Assignment:
    dialog_id: str
    pattern: str
    anchor: Anchor


@dataclass(frozen=True)
class InjectionPlan:
    assignments: Tuple[Assignment, ...]
    config_digest: str
    corpus_digest: str
    seed: int
    # (pattern, target, eligible) for every pattern that could not reach its target
    shortfalls: Tuple[Tuple[str, int, int], ...] = ()

    def __len__(self):
        return len(self.assignments)

    def counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for a in self.assignments:
            counts[a.pattern] = counts.get(a.pattern, 0) + 1
        return counts

    def added_turns(self) -> int:
        return sum(RECIPES[a.pattern].added_turn_count for a in self.assignments)


def ablation_config(cfg: PlanConfig, pattern: str) -> PlanConfig:
    """Every target zeroed except the named pattern's."""
    if pattern not in RECIPES:
        raise PlanError(f"no recipe for pattern {pattern!r}")
    return replace(cfg, targets={pattern: cfg.targets.get(pattern, 0)}, histogram_targets=None)


def overlap_histogram(updated: DialogCorpus, max_k: int = 0) -> Dict[int, int]:
    """k -> number of dialogs carrying at least k patterns, for k = 1 .. max(most + 1, max_k)."""
    per_dialog = [len(d.applied_patterns) for d in updated.dialogs]
    top = max([max(per_dialog, default=0) + 1, max_k, 1])
    return {k: sum(1 for n in per_dialog if n >= k) for k in range(1, top + 1)}


def write_plan(plan: InjectionPlan) -> bytes:
    lines = [
        f"# config_digest: {plan.config_digest}",
        f"# corpus_digest: {plan.corpus_digest}",
        "dialog_id\tpattern\tturn_index",
    ]
    lines.extend(f"{a.dialog_id}\t{a.pattern}\t{a.anchor.turn_index}" for a in plan.assignments)
    return ("\n".join(lines) + "\n").encode("utf-8")


class InjectionPlanner:
    def __init__(self, engine: Optional[PatternEngine] = None, jobs: Optional[int] = None, show_progress=None):
        self.logger = setup_logger()
        self.engine = engine or PatternEngine()
        self.jobs = int(jobs or get_config("NCF_JOBS", default="1"))
        self.show_progress = get_bool_config("NCF_SHOW_PROGRESS") if show_progress is None else show_progress

    def _weights(self, candidates: List[str], counts: Dict[str, int], cfg: PlanConfig) -> np.ndarray:
        if not cfg.histogram_targets:
            return np.ones(len(candidates))
        achieved: Dict[int, int] = {}
        for n in counts.values():
            for k in range(1, n + 1):
                achieved[k] = achieved.get(k, 0) + 1
        need = {
            k: max(int(cfg.histogram_targets.get(k, 0)) - achieved.get(k, 0), 0)
            for k in range(1, cfg.max_patterns_per_dialog + 2)
        }
        return np.array([need[counts[d] + 1] + _MIN_WEIGHT for d in candidates], dtype=float)

    def plan(self, corpus: DialogCorpus, cfg: PlanConfig) -> InjectionPlan:
        cfg.validate(corpus.source_format)
        self.logger.info(
            f"Planning injections for {len(corpus)} {corpus.source_format} dialogs "
            f"(seed={cfg.seed}, cap={cfg.max_patterns_per_dialog})"
        )
        context = PatternContext.from_corpus(corpus)
        working: Dict[str, Dialog] = corpus.by_id()
        order = [d.id for d in corpus.dialogs]
        counts = {d: 0 for d in order}
        rng = keyed_rng(cfg.seed, "plan")
        assignments: List[Assignment] = []
        shortfalls = []

        for name in cfg.pattern_order:
            target = int(cfg.targets.get(name, 0))
            if target == 0:
                continue
            recipe = RECIPES[name]
            anchors_by_dialog = {}
            for dialog_id in tqdm(order, desc=name, disable=not self.show_progress, file=sys.stderr):
                d = working[dialog_id]
                if counts[dialog_id] >= cfg.max_patterns_per_dialog or name in d.applied_patterns:
                    continue
                anchors = self.engine.find_anchors(recipe, d, context=context, seed=cfg.seed)
                if anchors:
                    anchors_by_dialog[dialog_id] = anchors
            eligible = [d for d in order if d in anchors_by_dialog]
            if len(eligible) < target:
                shortfalls.append((name, target, len(eligible)))
                self.logger.warning(f"{name}: eligible {len(eligible)} < target {target}")

            remaining = list(eligible)
            for _ in range(min(target, len(eligible))):
                weights = self._weights(remaining, counts, cfg)
                pick = int(rng.choice(len(remaining), p=weights / weights.sum()))
                dialog_id = remaining.pop(pick)
                anchor = seeded_order(anchors_by_dialog[dialog_id], keyed_rng(cfg.seed, dialog_id, name, "choose"))[0]
                working[dialog_id] = self.engine.inject(working[dialog_id], recipe, anchor, cfg.seed)
                counts[dialog_id] += 1
                assignments.append(Assignment(dialog_id=dialog_id, pattern=name, anchor=anchor))
            self.logger.info(f"{name}: {min(target, len(eligible))}/{target} dialogs from {len(eligible)} eligible")

        if shortfalls and not cfg.allow_shortfall:
            raise PlanShortfallError(shortfalls)
        digest = corpus_digest(corpus)
        config_digest = hashlib.sha256((cfg.digest() + digest).encode("utf-8")).hexdigest()
        return InjectionPlan(
            assignments=tuple(assignments),
            config_digest=config_digest,
            corpus_digest=digest,
            seed=cfg.seed,
            shortfalls=tuple(shortfalls),
        )

    def _apply(self, dialog: Dialog, assignments: List[Assignment], seed: int) -> Dialog:
        for a in assignments:
            dialog = self.engine.inject(dialog, RECIPES[a.pattern], a.anchor, seed)
        return dialog

    def execute(self, corpus: DialogCorpus, plan: InjectionPlan, seed: Optional[int] = None) -> DialogCorpus:
        if corpus_digest(corpus) != plan.corpus_digest:
            raise PlanError("plan/corpus mismatch")
        if not plan.assignments:
            return corpus
        seed = plan.seed if seed is None else seed
        by_dialog: Dict[str, List[Assignment]] = {}
        for a in plan.assignments:
            by_dialog.setdefault(a.dialog_id, []).append(a)
        unknown = set(by_dialog) - {d.id for d in corpus.dialogs}
        if unknown:
            raise PlanError(f"plan/corpus mismatch: unknown dialogs {sorted(unknown)[:3]}")

        def run(d: Dialog) -> Dialog:
            return self._apply(d, by_dialog.get(d.id, []), seed)

        with ThreadPoolExecutor(max_workers=max(self.jobs, 1)) as pool:
            # map keeps corpus order whatever the completion order
            updated = list(
                tqdm(
                    pool.map(run, corpus.dialogs),
                    total=len(corpus),
                    desc="inject",
                    disable=not self.show_progress,
                    file=sys.stderr,
                )
            )
        self.logger.info(f"Applied {len(plan)} injections (+{plan.added_turns()} turns) to {len(by_dialog)} dialogs")
        return corpus.with_dialogs(updated)

    def ablate(self, corpus: DialogCorpus, cfg: PlanConfig, pattern: str) -> DialogCorpus:
        if pattern not in RECIPES or corpus.source_format not in RECIPES[pattern].datasets:
            raise PlanError(f"{pattern} has no recipe for {corpus.source_format} corpora")
        ablated = ablation_config(cfg, pattern)
        return self.execute(corpus, self.plan(corpus, ablated), ablated.seed)
