from dataclasses import dataclass, field
from typing import List, Mapping, Optional

import numpy as np

from dialog_model.dialog import Dialog, Origin, Speaker, Turn, alternation_errors
from errors import AnchorError
from logging_utils.logger import setup_logger
from pattern_engine.context import PatternContext
from pattern_engine.heuristics import FINDERS, splits_block, touches_pattern
from pattern_engine.phrase_bank import PhraseBank
from pattern_engine.recipes import AnchorKind, PatternRecipe
from seeding import keyed_rng


@dataclass(frozen=True)
class Anchor:
    dialog_id: str
    turn_index: int
    bound: Mapping[str, str] = field(default_factory=dict)


class PatternEngine:
    def __init__(self, phrase_bank: Optional[PhraseBank] = None):
        self.logger = setup_logger()
        self.phrase_bank = phrase_bank or PhraseBank.load()
        gaps = self.phrase_bank.coverage_gaps()
        if gaps:
            self.logger.warning(f"Phrase bank has no entries for: {', '.join(gaps)}")

    def find_anchors(
        self, recipe: PatternRecipe, d: Dialog, context: Optional[PatternContext] = None, seed: int = 0
    ) -> List[Anchor]:
        """All places in d where the recipe applies, ordered by insertion index.

        Distractors and examples are drawn from the dialog's KB first, then from the
        corpus-wide context (built from d alone when none is given).
        """
        if d.dataset not in recipe.datasets:
            return []
        context = context or PatternContext.from_dialogs([d])
        rng = keyed_rng(seed, d.id, recipe.name, "anchors")
        anchors = {}
        for k, bound in FINDERS[recipe.name](d, context, rng):
            if k in anchors or splits_block(d.turns, k) or touches_pattern(d.turns, k, recipe.name):
                continue
            anchors[k] = Anchor(dialog_id=d.id, turn_index=k, bound=dict(bound))
        return [anchors[k] for k in sorted(anchors)]

    def _check_anchor(self, d: Dialog, recipe: PatternRecipe, a: Anchor):
        turns, k = d.turns, a.turn_index
        if a.dialog_id != d.id:
            raise AnchorError(f"anchor belongs to dialog {a.dialog_id}, not {d.id}")
        if d.dataset not in recipe.datasets:
            raise AnchorError(f"{recipe.name} does not apply to {d.dataset} dialogs")
        if not 0 <= k <= len(turns):
            raise AnchorError(f"anchor index {k} out of range for {len(turns)} turns")
        if touches_pattern(turns, k, recipe.name):
            raise AnchorError(f"pattern already applied at anchor: {recipe.name} at {d.id}:{k}")
        if splits_block(turns, k):
            raise AnchorError(f"anchor {d.id}:{k} falls inside an injected block")
        at = turns[k].speaker if k < len(turns) else None
        before = turns[k - 1].speaker if k > 0 else None
        valid = {
            AnchorKind.DIALOG_START: at is Speaker.USER,
            AnchorKind.BEFORE_AGENT_TURN: at is Speaker.AGENT,
            AnchorKind.AFTER_AGENT_TURN: before is Speaker.AGENT,
            AnchorKind.BEFORE_USER_TURN: at is Speaker.USER,
            AnchorKind.DIALOG_END: k == len(turns) and before is not Speaker.USER,
        }[recipe.anchor_kind]
        if not valid:
            raise AnchorError(f"invalid {recipe.anchor_kind.value} anchor for {recipe.name} at {d.id}:{k}")

    def inject(self, d: Dialog, recipe: PatternRecipe, a: Anchor, seed: int) -> Dialog:
        self._check_anchor(d, recipe, a)
        rng = keyed_rng(seed, d.id, recipe.name, "realize")
        origin = Origin.injected(recipe.name)
        block = []
        for step in recipe.template:
            try:
                values = step.phrase_values(a.bound)
            except KeyError as e:
                raise AnchorError(f"{recipe.name}: unresolvable realization slot {e.args[0]!r}") from None
            text = self.realize(recipe, step.action, d.domain, values, rng)
            block.append(Turn(speaker=step.speaker, text=text, origin=origin))
        k = a.turn_index
        turns = d.turns[:k] + tuple(block) + d.turns[k:]
        broken = alternation_errors(turns)
        if broken:
            raise AnchorError(f"{recipe.name} at {d.id}:{k} breaks speaker alternation at turn {broken[0]}")
        self.logger.debug(f"Injected {recipe.name} into {d.id} at turn {k} (+{len(block)})")
        return d.with_turns(turns)

    def realize(
        self,
        recipe: PatternRecipe,
        action: str,
        domain: str,
        bound: Mapping[str, str],
        draw: Optional[np.random.Generator] = None,
    ) -> str:
        return self.phrase_bank.realize(recipe, action, domain, bound, draw)
