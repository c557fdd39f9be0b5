"""Where each recipe can be applied in a dialog, and the values its template needs there.

Every finder takes (dialog, context, rng) and returns (insertion index, bound values)
pairs. Insertion index k means the injected block goes between turns k-1 and k.
"""
import re
from itertools import chain
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from corpus_io.babi import API_CALL, KB_ATTRIBUTE_FOR_SLOT
from dialog_model.dialog import Dialog, Speaker, Turn
from dialog_model.entities import entity_spans, normalize_entity, replace_entity, surface_form
from pattern_engine.context import PatternContext
from seeding import seeded_order

Finding = Tuple[int, Dict[str, str]]

SILENCE = "<SILENCE>"
_GREETING = re.compile(r"^(hi|hello|hey|good (morning|afternoon|evening))( there)?[.!,]?$", re.IGNORECASE)
_GENERIC = re.compile(
    r"\b(several|multiple|options|a few|there are|nearby|around|which one|any of|some|all of|places|locations)\b",
    re.IGNORECASE,
)
_NEGATIVE = re.compile(
    r"\b(sorry|unfortunately|no (results?|information|record|data|such)|not (able|available|find|found|sure|see)|"
    r"unable|can't|cannot|couldn't|don't have|do not have|there (is|are) no|nothing)\b",
    re.IGNORECASE,
)
_REJECTION = re.compile(r"\b(no|not|don't|doesn't)\b.*\b(work|like|want|good|interested)\b", re.IGNORECASE)
_CORRECTION_CUE = re.compile(r"\b(actually|instead|i meant|i mean|rather|change|update|wrong)\b", re.IGNORECASE)
_PARAPHRASE_CUE = re.compile(r"\b(to clarify|in other words|i mean|updated|changed)\b", re.IGNORECASE)

INTENTS = {
    "restaurant": "a restaurant reservation",
    "schedule": "scheduling",
    "weather": "the weather",
    "navigate": "navigation",
}
SLOT_LABELS = {"cuisine": "cuisine", "location": "location", "party_size": "party size", "price": "price range"}
# (capability label, where its examples come from); "domain:" pools are KB subjects of that domain
CAPABILITIES = {
    "babi": (
        ("restaurant recommendations", "R_cuisine"),
        ("table reservations", "R_location"),
        ("price ranges", "R_price"),
    ),
    "smd": (
        ("calendar scheduling", "domain:schedule"),
        ("weather information", "domain:weather"),
        ("navigation", "domain:navigate"),
    ),
}
FALLBACK_EXAMPLES = {
    "restaurant recommendations": "cuisines and locations",
    "table reservations": "booking a table for your party",
    "price ranges": "cheap moderate and expensive places",
    "calendar scheduling": "meetings and appointments",
    "weather information": "daily forecasts for your city",
    "navigation": "directions to nearby places",
}
# patterns whose injected block ends with an agent repair the user can acknowledge
REPAIR_BLOCKS = ("open_request_user_detail_request", "example_request", "other_correction")


def is_silence(turn: Turn) -> bool:
    return turn.text.strip() == SILENCE


def is_api_call(turn: Turn) -> bool:
    return turn.annotations.get("act") == API_CALL or turn.text.startswith(API_CALL + " ")


def splits_block(turns: Sequence[Turn], k: int) -> bool:
    """True if inserting at k would cut an injected block in two."""
    if k <= 0 or k >= len(turns):
        return False
    before, after = turns[k - 1].origin, turns[k].origin
    return before.is_injected and before == after


def touches_pattern(turns: Sequence[Turn], k: int, pattern: str) -> bool:
    neighbours = [turns[i] for i in (k - 1, k) if 0 <= i < len(turns)]
    return any(t.origin.pattern == pattern for t in neighbours)


def _dedup(*pools: Iterable[str]) -> List[str]:
    return list(dict.fromkeys(chain.from_iterable(pools)))


def _pick(candidates: Sequence[str], rng: np.random.Generator) -> Optional[str]:
    if not candidates:
        return None
    return candidates[int(rng.integers(len(candidates)))]


def _lexicon(d: Dialog, context: PatternContext):
    return d.kb.entities() | context.global_entities


def _distractor(original: str, pools: Iterable[Iterable[str]], rng: np.random.Generator) -> Optional[str]:
    return _pick([v for v in _dedup(*pools) if v != original], rng)


def _prior_request(turns: Sequence[Turn], before: int) -> Optional[str]:
    """The original user turn the agent answers at `before`; None when the user stayed silent."""
    for turn in reversed(turns[:before]):
        if turn.speaker is Speaker.USER and turn.is_original:
            return None if is_silence(turn) else turn.text
    return None


def _join(values: Sequence[str], dataset: str, last: str = "and") -> str:
    forms = [surface_form(v, dataset) for v in values]
    if len(forms) <= 1:
        return "".join(forms)
    # bAbI utterances carry no punctuation
    separator = " " if dataset == "babi" else ", "
    return separator.join(forms[:-1]) + f" {last} " + forms[-1]


def _screening(d: Dialog, context: PatternContext, rng) -> List[Finding]:
    for k, turn in enumerate(d.turns):
        if turn.speaker is not Speaker.USER or not turn.is_original:
            continue
        if is_silence(turn) or _GREETING.match(turn.text.strip()):
            continue
        return [(k, {"intent": INTENTS[d.domain]})]
    return []


def _user_detail(d: Dialog, context: PatternContext, rng) -> List[Finding]:
    found = []
    for k in range(1, len(d.turns)):
        turn, question = d.turns[k], d.turns[k - 1]
        if turn.speaker is not Speaker.USER or not turn.is_original or not question.is_original:
            continue
        act = question.annotations.get("act", "")
        if not act.startswith("request:"):
            continue
        slot = act.split(":", 1)[1]
        attribute = KB_ATTRIBUTE_FOR_SLOT.get(slot, slot)
        options = _dedup(d.kb.values_of(attribute), context.values_for(attribute), context.slot_pool(slot))
        if len(options) < 2:
            continue
        label = SLOT_LABELS.get(slot, slot.replace("_", " "))
        found.append((k, {"slot_label": label, "options": _join(options, d.dataset, "or")}))
    return found


def _example(d: Dialog, context: PatternContext, rng) -> List[Finding]:
    subjects = d.kb.subjects()
    if not subjects:
        return []
    found = []
    for k, turn in enumerate(d.turns):
        if turn.speaker is not Speaker.AGENT or not turn.is_original or not _GENERIC.search(turn.text):
            continue
        subject = _pick(subjects, rng)
        facts = [f for f in d.kb.entries if f.subject == subject]
        fact = facts[int(rng.integers(len(facts)))]
        found.append(
            (
                k + 1,
                {
                    "example_subject": surface_form(subject, d.dataset),
                    "example_detail": f"{fact.attribute.replace('_', ' ')} {surface_form(fact.value, d.dataset)}",
                },
            )
        )
    return found


def _misunderstanding(d: Dialog, context: PatternContext, rng) -> List[Finding]:
    lexicon = _lexicon(d, context)
    found = []
    for k, turn in enumerate(d.turns):
        if k == 0 or turn.speaker is not Speaker.AGENT or not turn.is_original or is_api_call(turn):
            continue
        prior = _prior_request(d.turns, k)
        if prior is None:
            continue
        for span in entity_spans(turn.text, lexicon):
            entity = span[2]
            attributes = _dedup(d.kb.attributes_of(entity), context.attributes_for(entity))
            pools = [d.kb.values_of(a) for a in attributes] + [context.values_for(a) for a in attributes]
            distractor = _distractor(entity, pools, rng)
            if distractor is None:
                continue
            corrupted = replace_entity(turn.text, span, surface_form(distractor, d.dataset))
            found.append((k, {"corrupted_answer": corrupted, "prior_request": prior}))
            break
    return found


def _stated_values(d: Dialog, k: int) -> List[Tuple[str, str]]:
    """(slot, value) pairs the user states in turn k."""
    turn = d.turns[k]
    if d.dataset == "babi":
        return sorted(turn.slots().items())
    # SMD annotates the assistant turn that follows; keep the values the user actually said
    if k + 1 >= len(d.turns) or not d.turns[k + 1].is_original:
        return []
    said = turn.text.lower()
    stated = []
    for slot, value in sorted(d.turns[k + 1].slots().items()):
        if re.search(r"\b" + re.escape(value.lower()) + r"\b", said):
            stated.append((slot, value))
    return stated


def _other_correction(d: Dialog, context: PatternContext, rng) -> List[Finding]:
    found = []
    for k, turn in enumerate(d.turns):
        if turn.speaker is not Speaker.USER or not turn.is_original:
            continue
        for slot, value in seeded_order(_stated_values(d, k), rng):
            try:
                entity = normalize_entity(value)
            except ValueError:
                continue
            attribute = KB_ATTRIBUTE_FOR_SLOT.get(slot, slot) if d.dataset == "babi" else slot
            pools = [context.slot_pool(slot), d.kb.values_of(attribute), context.values_for(attribute)]
            distractor = _distractor(entity, pools, rng)
            if distractor is None:
                continue
            found.append(
                (
                    k,
                    {
                        "value": surface_form(entity, d.dataset),
                        "distractor": surface_form(distractor, d.dataset),
                    },
                )
            )
            break
    return found


def _not_helped(d: Dialog, context: PatternContext, rng) -> List[Finding]:
    found = []
    for k, turn in enumerate(d.turns):
        if turn.speaker is not Speaker.AGENT or not turn.is_original or is_api_call(turn):
            continue
        rejected = k > 0 and d.turns[k - 1].is_original and _REJECTION.search(d.turns[k - 1].text)
        if _NEGATIVE.search(turn.text) or rejected:
            found.append((k + 1, {}))
    return found


def _repaired(d: Dialog, context: PatternContext, rng) -> List[Finding]:
    turns = d.turns
    found = []
    for k, turn in enumerate(turns):
        if turn.speaker is not Speaker.AGENT or is_api_call(turn):
            continue
        block_end = turn.origin.pattern in REPAIR_BLOCKS and (
            k + 1 >= len(turns) or turns[k + 1].origin != turn.origin
        )
        after_report = (
            turn.is_original and k > 0 and turns[k - 1].origin.pattern == "misunderstanding_report"
        )
        corrected = (
            turn.is_original
            and k > 0
            and turns[k - 1].is_original
            and (_CORRECTION_CUE.search(turns[k - 1].text) or _PARAPHRASE_CUE.search(turn.text))
        )
        if block_end or after_report or corrected:
            found.append((k + 1, {}))
    return found


def _capability_examples(label: str, source: str, d: Dialog, context: PatternContext, rng) -> str:
    if source.startswith("domain:"):
        domain = source.split(":", 1)[1]
        own = d.kb.subjects() if d.domain == domain else ()
        pool = _dedup(own, context.subjects_for(domain))
    else:
        pool = _dedup(d.kb.values_of(source), context.values_for(source))
    picked = seeded_order(pool, rng)[:2]
    return _join(picked, d.dataset) if picked else FALLBACK_EXAMPLES[label]


def _capability(d: Dialog, context: PatternContext, rng) -> List[Finding]:
    if not d.turns or d.turns[0].speaker is not Speaker.USER:
        return []
    capabilities = CAPABILITIES[d.dataset]
    bound = {"capabilities": _join([label for label, _ in capabilities], d.dataset)}
    for i, (label, source) in enumerate(capabilities, start=1):
        bound[f"capability_{i}"] = label
        bound[f"examples_{i}"] = _capability_examples(label, source, d, context, rng)
    return [(0, bound)]


def _recipient(d: Dialog, context: PatternContext, rng) -> List[Finding]:
    return [(k, {}) for k, t in enumerate(d.turns) if t.speaker is Speaker.USER and t.is_original]


FINDERS: Dict[str, Callable[[Dialog, PatternContext, np.random.Generator], List[Finding]]] = {
    "open_request_screening": _screening,
    "open_request_user_detail_request": _user_detail,
    "example_request": _example,
    "misunderstanding_report": _misunderstanding,
    "other_correction": _other_correction,
    "sequence_closer_not_helped": _not_helped,
    "sequence_closer_repaired": _repaired,
    "capability_expansion": _capability,
    "recipient_correction": _recipient,
}
