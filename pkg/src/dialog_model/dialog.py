from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, FrozenSet, Mapping, Optional, Tuple

SLOT_PREFIX = "slot:"
DOMAINS = ("schedule", "weather", "navigate", "restaurant")


class Speaker(str, Enum):
    USER = "User"
    AGENT = "Agent"

    @classmethod
    def from_smd(cls, tag: str) -> "Speaker":
        if tag == "driver":
            return cls.USER
        if tag == "assistant":
            return cls.AGENT
        raise ValueError(f"unknown SMD speaker tag: {tag!r}")

    def to_smd(self) -> str:
        return "driver" if self is Speaker.USER else "assistant"


@dataclass(frozen=True)
class Origin:
    """Original when pattern is None, otherwise injected by the named pattern."""

    pattern: Optional[str] = None

    @property
    def is_injected(self) -> bool:
        return self.pattern is not None

    @classmethod
    def injected(cls, pattern: str) -> "Origin":
        return cls(pattern=pattern)


ORIGINAL = Origin()


@dataclass(frozen=True)
class Turn:
    speaker: Speaker
    text: str
    origin: Origin = ORIGINAL
    annotations: Mapping[str, str] = field(default_factory=dict)
    # untouched source object, kept for lossless SMD serialization
    raw: Optional[Dict[str, Any]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.text:
            raise ValueError("turn text must be non-empty")
        if "\n" in self.text or "\r" in self.text:
            raise ValueError(f"turn text contains a line break: {self.text!r}")

    @property
    def is_original(self) -> bool:
        return not self.origin.is_injected

    def slots(self) -> Dict[str, str]:
        return {k[len(SLOT_PREFIX):]: v for k, v in self.annotations.items() if k.startswith(SLOT_PREFIX)}


@dataclass(frozen=True)
class KbFact:
    subject: str
    attribute: str
    value: str
    # bAbI only: the verbatim line body and the ordinal (among Original turns) of the turn it precedes
    source_line: Optional[str] = None
    before_original: Optional[int] = None


@dataclass(frozen=True)
class KbRecord:
    entries: Tuple[KbFact, ...] = ()

    def __len__(self):
        return len(self.entries)

    def entities(self) -> FrozenSet[str]:
        found = set()
        for fact in self.entries:
            found.add(fact.subject)
            found.add(fact.value)
        return frozenset(found)

    def attributes_of(self, entity: str) -> Tuple[str, ...]:
        """Attributes under which an entity appears; subjects are reported as "name"."""
        attrs = []
        for fact in self.entries:
            if fact.subject == entity and "name" not in attrs:
                attrs.append("name")
            if fact.value == entity and fact.attribute not in attrs:
                attrs.append(fact.attribute)
        return tuple(attrs)

    def values_of(self, attribute: str) -> Tuple[str, ...]:
        """Distinct values of an attribute in KB order; "name" yields the subjects."""
        seen = []
        for fact in self.entries:
            value = fact.subject if attribute == "name" else (fact.value if fact.attribute == attribute else None)
            if value is not None and value not in seen:
                seen.append(value)
        return tuple(seen)

    def subjects(self) -> Tuple[str, ...]:
        return self.values_of("name")


@dataclass(frozen=True)
class Dialog:
    id: str
    domain: str
    turns: Tuple[Turn, ...] = ()
    kb: KbRecord = field(default_factory=KbRecord)
    raw: Optional[Dict[str, Any]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain: {self.domain!r}")

    @property
    def dataset(self) -> str:
        return "babi" if self.domain == "restaurant" else "smd"

    @property
    def applied_patterns(self) -> FrozenSet[str]:
        return frozenset(t.origin.pattern for t in self.turns if t.origin.is_injected)

    def original_turns(self) -> Tuple[Turn, ...]:
        return tuple(t for t in self.turns if t.is_original)

    def original_only(self) -> "Dialog":
        return replace(self, turns=self.original_turns())

    def injected_indices(self) -> Tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.turns) if t.origin.is_injected)

    def with_turns(self, turns) -> "Dialog":
        return replace(self, turns=tuple(turns))


@dataclass(frozen=True)
class DialogCorpus:
    dialogs: Tuple[Dialog, ...]
    source_format: str
    global_entities: FrozenSet[str] = frozenset()
    # serializer layout hints recorded at parse time (trailing text, JSON indent ...)
    layout: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.source_format not in ("babi", "smd"):
            raise ValueError(f"unknown source format: {self.source_format!r}")
        ids = [d.id for d in self.dialogs]
        if len(set(ids)) != len(ids):
            raise ValueError("dialog ids must be unique")

    def __len__(self):
        return len(self.dialogs)

    def by_id(self) -> Dict[str, Dialog]:
        return {d.id: d for d in self.dialogs}

    def with_dialogs(self, dialogs) -> "DialogCorpus":
        return replace(self, dialogs=tuple(dialogs))


def utterance_count(d: Dialog) -> int:
    return len(d.turns)


def alternation_errors(turns) -> list:
    """Positions that break strict U/A alternation starting with the user."""
    problems = []
    for i, turn in enumerate(turns):
        expected = Speaker.USER if i % 2 == 0 else Speaker.AGENT
        if turn.speaker is not expected:
            problems.append(i)
    return problems


def validate_dialog(d: Dialog) -> None:
    problems = alternation_errors(d.turns)
    if problems:
        raise ValueError(f"dialog {d.id}: speaker alternation broken at turn {problems[0]}")
    if alternation_errors(d.original_turns()):
        raise ValueError(f"dialog {d.id}: original turns do not alternate")
