from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from dialog_model.dialog import DialogCorpus, utterance_count
from injection_planner.planner import overlap_histogram
from metrics.entity_f1 import global_lexicon
from pattern_engine.recipes import RECIPES

ADDED_TURNS_ASSUMPTION = (
    "bAbI injections reuse the SMD added-turn counts per pattern; no bAbI utterance table is published"
)


@dataclass(frozen=True)
class CorpusStats:
    source_format: str
    n_dialogs: int
    n_utterances: int
    mean_utterances: float
    per_pattern_counts: Mapping[str, int]
    overlap_histogram: Mapping[int, int]
    added_turns_by_pattern: Mapping[str, int]
    entity_lexicon_size: int
    input_checksum: str = ""
    assumptions: Tuple[str, ...] = field(default=(ADDED_TURNS_ASSUMPTION,))


def compute_stats(corpus: DialogCorpus, input_checksum: Optional[str] = None, max_k: int = 5) -> CorpusStats:
    counts = {name: 0 for name in RECIPES}
    added = {name: 0 for name in RECIPES}
    for dialog in corpus.dialogs:
        for name in dialog.applied_patterns:
            counts[name] = counts.get(name, 0) + 1
        for turn in dialog.turns:
            if turn.origin.is_injected:
                added[turn.origin.pattern] = added.get(turn.origin.pattern, 0) + 1
    n_utterances = sum(utterance_count(d) for d in corpus.dialogs)
    return CorpusStats(
        source_format=corpus.source_format,
        n_dialogs=len(corpus),
        n_utterances=n_utterances,
        mean_utterances=n_utterances / len(corpus) if len(corpus) else 0.0,
        per_pattern_counts=counts,
        overlap_histogram=overlap_histogram(corpus, max_k=max_k),
        added_turns_by_pattern=added,
        entity_lexicon_size=len(global_lexicon(corpus)),
        input_checksum=input_checksum or "",
    )


def check_histogram(
    histogram: Mapping[int, int], targets: Mapping[int, int], tolerance: float = 0.05
) -> List[Tuple[int, int, int]]:
    """(k, actual, target) for every bucket off by more than tolerance x max(target, 1)."""
    deviations = []
    for k, target in sorted(targets.items()):
        actual = histogram.get(k, 0)
        if abs(actual - target) > tolerance * max(target, 1):
            deviations.append((k, actual, target))
    return deviations


def render_stats(
    stats: CorpusStats,
    histogram_targets: Optional[Mapping[int, int]] = None,
    reference_means: Optional[Mapping[str, float]] = None,
    pattern_targets: Optional[Mapping[str, int]] = None,
) -> str:
    lines = [
        f"source_format: {stats.source_format}",
        f"input_checksum: {stats.input_checksum}" if stats.input_checksum else None,
        f"dialogs: {stats.n_dialogs}",
        f"utterances: {stats.n_utterances}",
        f"mean_utterances_per_dialog: {stats.mean_utterances:.2f}",
        f"entity_lexicon_size: {stats.entity_lexicon_size}",
    ]
    for name, count in stats.per_pattern_counts.items():
        lines.append(f"pattern.{name}: {count} dialogs, +{stats.added_turns_by_pattern.get(name, 0)} turns")
    for k, count in stats.overlap_histogram.items():
        target = f" (target {histogram_targets[k]})" if histogram_targets and k in histogram_targets else ""
        lines.append(f"dialogs_with_at_least_{k}_patterns: {count}{target}")
    if histogram_targets:
        deviations = check_histogram(stats.overlap_histogram, histogram_targets)
        lines.append(
            "histogram_within_5pct: "
            + ("yes" if not deviations else "no (" + ", ".join(f">={k}: {a} vs {t}" for k, a, t in deviations) + ")")
        )
        if pattern_targets:
            # each dialog with exactly j patterns contributes j assignments
            ordered = sorted(histogram_targets.items())
            implied = sum(k * (count - dict(ordered).get(k + 1, 0)) for k, count in ordered)
            lines.append(
                f"table_consistency: sum of per-pattern targets {sum(pattern_targets.values())} "
                f"vs assignments implied by overlap targets {implied}"
            )
    for name, mean in (reference_means or {}).items():
        lines.append(f"reference_mean_utterances.{name}: {mean}")
    lines.extend(f"assumption: {a}" for a in stats.assumptions)
    return "\n".join(line for line in lines if line is not None) + "\n"
