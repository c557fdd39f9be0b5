from dataclasses import dataclass
from typing import AbstractSet

from corpus_io.manifest import EvalManifest, PredictionSet
from dialog_model.dialog import DialogCorpus
from dialog_model.entities import entities_in
from errors import AlignmentError
from logging_utils.logger import setup_logger
from metrics.alignment import check_aligned

logger = setup_logger()

ENTITY_SCOPES = ("global", "dialog")


@dataclass(frozen=True)
class EntityCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "EntityCounts") -> "EntityCounts":
        return EntityCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    @property
    def f1(self) -> float:
        denominator = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denominator if denominator else 0.0


def entry_counts(gold: AbstractSet[str], pred: AbstractSet[str]) -> EntityCounts:
    if not gold:
        # responses without gold entities can only add false positives
        return EntityCounts(fp=len(pred))
    return EntityCounts(tp=len(gold & pred), fp=len(pred - gold), fn=len(gold - pred))


def global_lexicon(corpus: DialogCorpus) -> frozenset:
    lexicon = set(corpus.global_entities)
    for dialog in corpus.dialogs:
        lexicon |= dialog.kb.entities()
    return frozenset(lexicon)


def entity_f1(preds: PredictionSet, manifest: EvalManifest, corpus: DialogCorpus, scope: str = "global") -> float:
    """Micro-averaged F1 over KB entity mentions in gold vs predicted responses."""
    check_aligned(preds, manifest)
    if scope not in ENTITY_SCOPES:
        raise ValueError(f"unknown entity scope {scope!r}; expected one of {ENTITY_SCOPES}")
    lexicon = global_lexicon(corpus)
    if not lexicon:
        raise ValueError("entity lexicon is empty; the corpus has no KB entities")
    dialogs = corpus.by_id()

    total = EntityCounts()
    gold_mentions = 0
    for entry, pred in zip(manifest.entries, preds.responses):
        if scope == "dialog":
            if entry.dialog_id not in dialogs:
                raise AlignmentError(f"manifest names dialog {entry.dialog_id} that is not in the corpus")
            scoped = dialogs[entry.dialog_id].kb.entities()
        else:
            scoped = lexicon
        gold = entities_in(entry.gold_text, scoped)
        gold_mentions += len(gold)
        total += entry_counts(gold, entities_in(pred, scoped))
    if gold_mentions == 0:
        logger.warning("no scoreable entities: no gold response mentions a KB entity; entity F1 is 0")
        return 0.0
    return total.f1
