import re
from typing import Dict, List, Optional, Tuple

from corpus_io.raw_file import RawFile
from dialog_model.dialog import (
    ORIGINAL,
    SLOT_PREFIX,
    Dialog,
    DialogCorpus,
    KbFact,
    KbRecord,
    Origin,
    Speaker,
    Turn,
    validate_dialog,
)
from dialog_model.entities import normalize_entity
from errors import CorpusParseError
from logging_utils.logger import setup_logger
from pattern_engine.catalog import is_registered

logger = setup_logger()

_LINE = re.compile(r"^(\d+) (.*)$")
API_CALL = "api_call"
# argument positions of "api_call <cuisine> <location> <party size> <price>"
API_CALL_SLOTS = ("cuisine", "location", "party_size", "price")
# the agent's slot questions in task 5
SLOT_QUESTIONS = {
    "any preference on a type of cuisine": "cuisine",
    "where should it be": "location",
    "how many people would be in your party": "party_size",
    "which price range are looking for": "price",
}
KB_ATTRIBUTE_FOR_SLOT = {
    "cuisine": "R_cuisine",
    "location": "R_location",
    "party_size": "R_number",
    "price": "R_price",
}


def _annotate(turns: List[Tuple[Speaker, str, Origin]]) -> List[Turn]:
    """Derive act and slot annotations from the api_call arguments of the dialog."""
    slot_values: Dict[str, List[str]] = {}
    for speaker, text, _ in turns:
        tokens = text.split()
        if speaker is Speaker.AGENT and tokens and tokens[0] == API_CALL:
            for name, value in zip(API_CALL_SLOTS, tokens[1:]):
                slot_values.setdefault(name, [])
                if value not in slot_values[name]:
                    slot_values[name].append(value)

    annotated = []
    for speaker, text, origin in turns:
        annotations = {}
        tokens = text.split()
        if origin.is_injected:
            # injected turns carry no annotations, so reparsing an updated corpus is lossless
            tokens = []
        if speaker is Speaker.AGENT:
            if tokens and tokens[0] == API_CALL:
                annotations["act"] = API_CALL
                for name, value in zip(API_CALL_SLOTS, tokens[1:]):
                    annotations[SLOT_PREFIX + name] = value
            elif tokens and text.strip() in SLOT_QUESTIONS:
                annotations["act"] = "request:" + SLOT_QUESTIONS[text.strip()]
        else:
            token_set = set(tokens)
            for name, values in slot_values.items():
                for value in values:
                    if value in token_set:
                        annotations[SLOT_PREFIX + name] = value
        annotated.append(Turn(speaker=speaker, text=text, origin=origin, annotations=annotations))
    return annotated


def _check_injected_runs(dialog_id: str, injected: Dict[int, str], n_turns: int, start_line: int) -> None:
    """Injected turns arrive as whole blocks of user/agent pairs inside the dialog."""
    outside = sorted(i for i in injected if i >= n_turns)
    if outside:
        raise CorpusParseError(
            f"origin sidecar marks turn {outside[0]} of {dialog_id}, which has {n_turns} turns", line=start_line
        )
    run = 0
    for i in range(n_turns + 1):
        if i in injected:
            run += 1
            continue
        if run % 2:
            raise CorpusParseError(
                f"origin sidecar marks an odd run of {run} turns ending at {i - 1} in {dialog_id}", line=start_line
            )
        run = 0


def _build_dialog(index: int, turns, facts, injected: Dict[int, str], start_line: int) -> Dialog:
    dialog_id = f"babi-{index}"
    origin_turns = []
    for pattern in injected.values():
        if not is_registered(pattern):
            raise CorpusParseError(f"origin sidecar names unregistered pattern {pattern!r}", line=start_line)
    _check_injected_runs(dialog_id, injected, len(turns), start_line)
    for i, (speaker, text) in enumerate(turns):
        origin = Origin.injected(injected[i]) if i in injected else ORIGINAL
        origin_turns.append((speaker, text, origin))
    try:
        built = _annotate(origin_turns)
    except ValueError as e:
        raise CorpusParseError(str(e), line=start_line) from e

    kb_entries = []
    for position, subject, attribute, value, body in facts:
        ordinal = sum(1 for t in built[:position] if t.is_original)
        kb_entries.append(
            KbFact(
                subject=normalize_entity(subject),
                attribute=attribute,
                value=normalize_entity(value),
                source_line=body,
                before_original=ordinal,
            )
        )
    dialog = Dialog(id=dialog_id, domain="restaurant", turns=tuple(built), kb=KbRecord(tuple(kb_entries)))
    try:
        validate_dialog(dialog)
    except ValueError as e:
        raise CorpusParseError(str(e), line=start_line) from e
    return dialog


def parse_babi(file: RawFile, origin_sidecar: Optional[RawFile] = None) -> DialogCorpus:
    text = file.text()
    body = text.rstrip("\n")
    tail = text[len(body):]
    injected_by_dialog = read_origin_sidecar(origin_sidecar) if origin_sidecar is not None else {}

    dialogs = []
    turns: List[Tuple[Speaker, str]] = []
    facts = []
    previous_index = 0
    block_start = 1

    def close_block():
        nonlocal turns, facts, previous_index
        if turns or facts:
            index = len(dialogs)
            injected = injected_by_dialog.get(f"babi-{index}", {})
            dialogs.append(_build_dialog(index, turns, facts, injected, block_start))
        turns, facts, previous_index = [], [], 0

    lines = body.split("\n") if body else []
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            close_block()
            block_start = line_number + 1
            continue
        match = _LINE.match(line)
        if not match:
            raise CorpusParseError("missing line index", line=line_number)
        index, rest = int(match.group(1)), match.group(2)
        if index <= previous_index:
            raise CorpusParseError(f"non-monotone line index {index} after {previous_index}", line=line_number)
        previous_index = index
        if "\t" in rest:
            user, agent = rest.split("\t", 1)
            if "\t" in agent:
                raise CorpusParseError("more than one tab on an utterance line", line=line_number)
            if not user:
                raise CorpusParseError("empty user utterance", line=line_number)
            turns.append((Speaker.USER, user))
            if agent:
                turns.append((Speaker.AGENT, agent))
            continue
        parts = rest.split(" ")
        if len(parts) == 3 and all(parts):
            facts.append((len(turns), parts[0], parts[1], parts[2], rest))
            continue
        raise CorpusParseError("line is neither an utterance (missing tab) nor a KB fact", line=line_number)
    close_block()

    unknown = set(injected_by_dialog) - {d.id for d in dialogs}
    if unknown:
        raise CorpusParseError(f"origin sidecar names unknown dialogs: {sorted(unknown)[:3]}")

    lexicon = set()
    for dialog in dialogs:
        lexicon |= dialog.kb.entities()
        for turn in dialog.turns:
            if turn.annotations.get("act") == API_CALL:
                lexicon |= {normalize_entity(v) for v in turn.slots().values()}
    logger.info(f"Parsed {len(dialogs)} bAbI dialogs from {file.path}")
    return DialogCorpus(
        dialogs=tuple(dialogs),
        source_format="babi",
        global_entities=frozenset(lexicon),
        layout={"tail": tail},
    )


def _dialog_lines(dialog: Dialog) -> List[str]:
    ordinals = {}
    count = 0
    for i, turn in enumerate(dialog.turns):
        if turn.is_original:
            ordinals[i] = count
            count += 1
    facts_before: Dict[int, List[KbFact]] = {}
    for fact in dialog.kb.entries:
        position = fact.before_original if fact.before_original is not None else count
        facts_before.setdefault(position, []).append(fact)

    def fact_line(fact: KbFact) -> str:
        return fact.source_line or f"{fact.subject} {fact.attribute} {fact.value}"

    lines = []
    for start in range(0, len(dialog.turns), 2):
        pair = dialog.turns[start:start + 2]
        for offset in range(len(pair)):
            ordinal = ordinals.get(start + offset)
            if ordinal is not None:
                lines.extend(fact_line(f) for f in facts_before.pop(ordinal, []))
        agent_text = pair[1].text if len(pair) > 1 else ""
        lines.append(f"{pair[0].text}\t{agent_text}")
    for position in sorted(facts_before):
        lines.extend(fact_line(f) for f in facts_before[position])
    return [f"{n} {line}" for n, line in enumerate(lines, start=1)]


def serialize_babi(corpus: DialogCorpus) -> bytes:
    blocks = ["\n".join(_dialog_lines(d)) for d in corpus.dialogs]
    tail = corpus.layout.get("tail", "\n\n" if blocks else "")
    return ("\n\n".join(blocks) + tail).encode("utf-8")


def write_origin_sidecar(corpus: DialogCorpus) -> bytes:
    """One line per dialog: "<dialog_id>: <index>=<pattern>,..." for every injected turn."""
    lines = []
    for dialog in corpus.dialogs:
        marks = ",".join(f"{i}={dialog.turns[i].origin.pattern}" for i in dialog.injected_indices())
        lines.append(f"{dialog.id}: {marks}".rstrip())
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def read_origin_sidecar(file: RawFile) -> Dict[str, Dict[int, str]]:
    injected: Dict[str, Dict[int, str]] = {}
    for line_number, line in enumerate(file.text().split("\n"), start=1):
        if not line.strip():
            continue
        dialog_id, sep, marks = line.partition(":")
        if not sep:
            raise CorpusParseError("origin sidecar line lacks ':'", line=line_number)
        entries = {}
        for mark in filter(None, (m.strip() for m in marks.split(","))):
            index, eq, pattern = mark.partition("=")
            if not eq or not index.isdigit() or not pattern:
                raise CorpusParseError(f"bad origin mark {mark!r}, expected <index>=<pattern>", line=line_number)
            entries[int(index)] = pattern
        injected[dialog_id.strip()] = entries
    return injected


def read_candidates(file: RawFile) -> List[str]:
    """bAbI candidate file: one response per line, optionally prefixed by an index."""
    candidates = []
    for line in file.text().split("\n"):
        if not line.strip():
            continue
        match = _LINE.match(line)
        candidates.append(match.group(2) if match else line)
    return candidates
