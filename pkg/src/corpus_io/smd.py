import json
from typing import Any, Dict, List

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
    alternation_errors,
)
from dialog_model.entities import normalize_entity
from errors import CorpusParseError
from logging_utils.logger import setup_logger
from pattern_engine.catalog import is_registered

logger = setup_logger()

SMD_DOMAINS = ("schedule", "weather", "navigate")
# the column naming the row entity of each KB table
PRIMARY_COLUMN = {"navigate": "poi", "schedule": "event", "weather": "location"}
KB_TITLES = {"navigate": "location information", "schedule": "calendar", "weather": "weekly forecast"}
MISSING_VALUES = ("", "-")


def _clean(value: Any):
    if value is None:
        return None
    text = str(value).strip()
    return None if text in MISSING_VALUES else text


def flatten_kb(items, domain: str) -> KbRecord:
    """Turn SMD KB rows into (subject, attribute, value) triples."""
    entries = []
    for row in items or []:
        if not isinstance(row, dict) or not row:
            continue
        primary = PRIMARY_COLUMN[domain] if PRIMARY_COLUMN[domain] in row else next(iter(row))
        subject = _clean(row.get(primary))
        if subject is None:
            continue
        for column, value in row.items():
            value = _clean(value)
            if column == primary or value is None:
                continue
            entries.append(KbFact(subject=normalize_entity(subject), attribute=column, value=normalize_entity(value)))
    return KbRecord(tuple(entries))


def _turn_annotations(data: Dict[str, Any]) -> Dict[str, str]:
    annotations = {}
    for name, value in (data.get("slots") or {}).items():
        value = _clean(value)
        if value is not None:
            annotations[SLOT_PREFIX + name] = value
    requested = [name for name, flag in (data.get("requested") or {}).items() if flag]
    if requested:
        annotations["requested"] = ",".join(requested)
    return annotations


def _parse_dialog(index: int, obj: Any) -> Dialog:
    if not isinstance(obj, dict):
        raise CorpusParseError("dialogue entry is not an object", dialog_index=index)
    scenario = obj.get("scenario") or {}
    domain = (scenario.get("task") or {}).get("intent")
    if domain not in SMD_DOMAINS:
        raise CorpusParseError(f"unknown domain {domain!r}", dialog_index=index)
    turns = []
    for position, turn_obj in enumerate(obj.get("dialogue") or []):
        try:
            speaker = Speaker.from_smd(turn_obj["turn"])
            data = turn_obj["data"]
            text = data["utterance"]
            origin = ORIGINAL
            if turn_obj.get("injected"):
                pattern = turn_obj.get("pattern")
                if not is_registered(pattern):
                    raise ValueError(f"unregistered pattern {pattern!r}")
                origin = Origin.injected(pattern)
            turns.append(
                Turn(speaker=speaker, text=text, origin=origin, annotations=_turn_annotations(data), raw=turn_obj)
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CorpusParseError(f"malformed turn {position}: {e}", dialog_index=index) from e
    broken = alternation_errors(turns)
    if broken:
        raise CorpusParseError(f"speaker alternation broken at turn {broken[0]}", dialog_index=index)
    kb = flatten_kb((scenario.get("kb") or {}).get("items"), domain)
    dialog_id = scenario.get("uuid") or f"smd-{index}"
    return Dialog(id=str(dialog_id), domain=domain, turns=tuple(turns), kb=kb, raw=obj)


def detect_json_layout(text: str) -> Dict[str, Any]:
    body = text.rstrip("\n")
    lines = body.split("\n")
    indent = None
    if len(lines) > 1:
        second = lines[1]
        if second.startswith("\t"):
            indent = "\t"
        elif second.startswith(" "):
            indent = len(second) - len(second.lstrip(" "))
    compact = indent is None and '": ' not in body[:400]
    return {
        "indent": indent,
        "compact": compact,
        "ensure_ascii": body.isascii(),
        "tail": text[len(body):],
    }


def parse_smd(file: RawFile) -> DialogCorpus:
    text = file.text()
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise CorpusParseError(f"invalid JSON: {e}", line=e.lineno) from e
    if not isinstance(document, list):
        raise CorpusParseError("SMD file must hold a JSON array of dialogues")

    dialogs = [_parse_dialog(index, obj) for index, obj in enumerate(document)]
    lexicon = set()
    for dialog in dialogs:
        lexicon |= dialog.kb.entities()
        for turn in dialog.turns:
            lexicon |= {normalize_entity(v) for v in turn.slots().values()}
    logger.info(f"Parsed {len(dialogs)} SMD dialogs from {file.path}")
    return DialogCorpus(
        dialogs=tuple(dialogs),
        source_format="smd",
        global_entities=frozenset(lexicon),
        layout=detect_json_layout(text),
    )


def _turn_object(turn: Turn) -> Dict[str, Any]:
    if turn.raw is not None:
        return turn.raw
    data: Dict[str, Any] = {"end_dialogue": False, "utterance": turn.text}
    obj: Dict[str, Any] = {"turn": turn.speaker.to_smd(), "data": data}
    if turn.origin.is_injected:
        obj["injected"] = True
        obj["pattern"] = turn.origin.pattern
    return obj


def _scenario_from_kb(dialog: Dialog) -> Dict[str, Any]:
    primary = PRIMARY_COLUMN[dialog.domain]
    rows: Dict[str, Dict[str, str]] = {}
    columns: List[str] = [primary]
    for fact in dialog.kb.entries:
        rows.setdefault(fact.subject, {primary: fact.subject})[fact.attribute] = fact.value
        if fact.attribute not in columns:
            columns.append(fact.attribute)
    kb = {"items": list(rows.values()) or None, "column_names": columns, "kb_title": KB_TITLES[dialog.domain]}
    return {"kb": kb, "task": {"intent": dialog.domain}, "uuid": dialog.id}


def _dialog_object(dialog: Dialog) -> Dict[str, Any]:
    obj = dict(dialog.raw) if dialog.raw is not None else {"dialogue": [], "scenario": _scenario_from_kb(dialog)}
    obj["dialogue"] = [_turn_object(t) for t in dialog.turns]
    return obj


def serialize_smd(corpus: DialogCorpus) -> bytes:
    layout = corpus.layout or {}
    document = [_dialog_object(d) for d in corpus.dialogs]
    indent = layout.get("indent", 2) if layout else 2
    kwargs = {"ensure_ascii": layout.get("ensure_ascii", True)}
    if indent is None:
        kwargs["separators"] = (",", ":") if layout.get("compact") else (", ", ": ")
    text = json.dumps(document, indent=indent, **kwargs)
    return (text + layout.get("tail", "\n")).encode("utf-8")
