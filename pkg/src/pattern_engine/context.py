from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Tuple

from dialog_model.dialog import Dialog, DialogCorpus
from dialog_model.entities import normalize_entity


def _add(table: Dict[str, list], key: str, value: str):
    bucket = table.setdefault(key, [])
    if value not in bucket:
        bucket.append(value)


@dataclass(frozen=True)
class PatternContext:
    """Corpus-wide value pools that anchors draw distractors and enumerations from.

    A single bAbI dialog's KB usually lists restaurants of one cuisine in one city,
    so alternatives for a slot have to come from the rest of the corpus.
    """

    attribute_values: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    slot_values: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    entity_attributes: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    subjects_by_domain: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    global_entities: FrozenSet[str] = frozenset()

    @classmethod
    def from_dialogs(cls, dialogs: Iterable[Dialog], extra_entities: Iterable[str] = ()) -> "PatternContext":
        attribute_values: Dict[str, list] = {}
        slot_values: Dict[str, list] = {}
        entity_attributes: Dict[str, list] = {}
        subjects: Dict[str, list] = {}
        entities = set(extra_entities)
        for dialog in dialogs:
            for fact in dialog.kb.entries:
                _add(attribute_values, "name", fact.subject)
                _add(attribute_values, fact.attribute, fact.value)
                _add(entity_attributes, fact.subject, "name")
                _add(entity_attributes, fact.value, fact.attribute)
                _add(subjects, dialog.domain, fact.subject)
            entities |= dialog.kb.entities()
            for turn in dialog.turns:
                if not turn.is_original:
                    continue
                for name, value in turn.slots().items():
                    try:
                        entity = normalize_entity(value)
                    except ValueError:
                        continue
                    _add(slot_values, name, entity)
                    entities.add(entity)
        return cls(
            attribute_values={k: tuple(v) for k, v in attribute_values.items()},
            slot_values={k: tuple(v) for k, v in slot_values.items()},
            entity_attributes={k: tuple(v) for k, v in entity_attributes.items()},
            subjects_by_domain={k: tuple(v) for k, v in subjects.items()},
            global_entities=frozenset(entities),
        )

    @classmethod
    def from_corpus(cls, corpus: DialogCorpus) -> "PatternContext":
        return cls.from_dialogs(corpus.dialogs, extra_entities=corpus.global_entities)

    def values_for(self, attribute: str) -> Tuple[str, ...]:
        return self.attribute_values.get(attribute, ())

    def slot_pool(self, slot: str) -> Tuple[str, ...]:
        return self.slot_values.get(slot, ())

    def attributes_for(self, entity: str) -> Tuple[str, ...]:
        return self.entity_attributes.get(entity, ())

    def subjects_for(self, domain: str) -> Tuple[str, ...]:
        return self.subjects_by_domain.get(domain, ())
