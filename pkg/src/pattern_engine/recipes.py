import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Mapping, Tuple

from dialog_model.dialog import Speaker
from pattern_engine.catalog import PatternId, lookup

U, A = Speaker.USER, Speaker.AGENT


class AnchorKind(str, Enum):
    DIALOG_START = "DialogStart"
    BEFORE_AGENT_TURN = "BeforeAgentTurn"
    AFTER_AGENT_TURN = "AfterAgentTurn"
    BEFORE_USER_TURN = "BeforeUserTurn"
    DIALOG_END = "DialogEnd"


_NUMBERED = re.compile(r"_\d+$")


@dataclass(frozen=True)
class TemplateStep:
    speaker: Speaker
    action: str
    slots: Tuple[str, ...] = ()

    def phrase_values(self, bound: Mapping[str, str]) -> Dict[str, str]:
        """Values for this step's phrase fields; numbered slots (capability_2) fill the plain field."""
        values = {}
        for slot in self.slots:
            if slot not in bound:
                raise KeyError(slot)
            values[_NUMBERED.sub("", slot)] = bound[slot]
        return values


@dataclass(frozen=True)
class PatternRecipe:
    id: PatternId
    added_turn_count: int
    anchor_kind: AnchorKind
    template: Tuple[TemplateStep, ...]
    datasets: FrozenSet[str]

    def __post_init__(self):
        if len(self.template) != self.added_turn_count:
            raise ValueError(f"{self.name}: template length {len(self.template)} != {self.added_turn_count}")
        for first, second in zip(self.template, self.template[1:]):
            if first.speaker is second.speaker:
                raise ValueError(f"{self.name}: template speakers must alternate")

    @property
    def name(self) -> str:
        return self.id.name


def _recipe(name, anchor_kind, template, datasets=("babi", "smd")):
    return PatternRecipe(
        id=lookup(name).id,
        added_turn_count=len(template),
        anchor_kind=anchor_kind,
        template=tuple(TemplateStep(*step) for step in template),
        datasets=frozenset(datasets),
    )


_RECIPIENT_CYCLE = (
    (U, "SIDE-REMARK"),
    (A, "MISTAKEN-REPLY"),
    (U, "CORRECTION"),
    (A, "APOLOGY"),
)

RECIPES: Dict[str, PatternRecipe] = {
    r.name: r
    for r in (
        _recipe(
            "open_request_screening",
            AnchorKind.DIALOG_START,
            [(U, "PRE-REQUEST", ("intent",)), (A, "GO-AHEAD")],
        ),
        _recipe(
            "open_request_user_detail_request",
            AnchorKind.BEFORE_USER_TURN,
            [(U, "DETAIL-REQUEST"), (A, "DETAIL", ("slot_label", "options"))],
            datasets=("babi",),
        ),
        _recipe(
            "example_request",
            AnchorKind.AFTER_AGENT_TURN,
            [(U, "EXAMPLE-REQUEST"), (A, "EXAMPLE", ("example_subject", "example_detail"))],
            datasets=("smd",),
        ),
        _recipe(
            "misunderstanding_report",
            AnchorKind.BEFORE_AGENT_TURN,
            [
                (A, "MISUNDERSTOOD-ANSWER", ("corrupted_answer",)),
                (U, "REPORT"),
                (A, "REPEAT-REQUEST"),
                (U, "RESTATEMENT", ("prior_request",)),
            ],
        ),
        _recipe(
            "other_correction",
            AnchorKind.BEFORE_USER_TURN,
            [(U, "SLIP", ("value", "distractor")), (A, "CORRECTION", ("value", "distractor"))],
        ),
        _recipe(
            "sequence_closer_not_helped",
            AnchorKind.AFTER_AGENT_TURN,
            [(U, "CLOSER"), (A, "RECEIPT")],
        ),
        _recipe(
            "sequence_closer_repaired",
            AnchorKind.AFTER_AGENT_TURN,
            [(U, "APPRECIATION"), (A, "RECEIPT")],
        ),
        _recipe(
            "capability_expansion",
            AnchorKind.DIALOG_START,
            [
                (U, "CAPABILITY-CHECK"),
                (A, "CAPABILITY-LIST", ("capabilities",)),
                (U, "EXPANSION-REQUEST", ("capability_1",)),
                (A, "EXPANSION", ("capability_1", "examples_1")),
                (U, "EXPANSION-REQUEST", ("capability_2",)),
                (A, "EXPANSION", ("capability_2", "examples_2")),
                (U, "EXPANSION-REQUEST", ("capability_3",)),
                (A, "EXPANSION", ("capability_3", "examples_3")),
                (U, "ACKNOWLEDGEMENT"),
                (A, "RECEIPT"),
            ],
        ),
        _recipe(
            "recipient_correction",
            AnchorKind.BEFORE_USER_TURN,
            list(_RECIPIENT_CYCLE + _RECIPIENT_CYCLE),
            datasets=("smd",),
        ),
    )
}

# assignment priority for the planner
PATTERN_ORDER: Tuple[str, ...] = tuple(RECIPES)


def get_recipe(name: str) -> PatternRecipe:
    try:
        return RECIPES[name]
    except KeyError:
        raise KeyError(f"no recipe for pattern {name!r}; recipe-bearing patterns: {', '.join(RECIPES)}") from None
