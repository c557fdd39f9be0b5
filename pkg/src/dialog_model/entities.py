import re
from typing import AbstractSet, List, Set, Tuple

_WHITESPACE = re.compile(r"\s+")
_EDGE_PUNCT = ".,!?;:\"'()"


def normalize_entity(s: str) -> str:
    """Lowercase, strip, and join internal whitespace runs with a single underscore."""
    stripped = s.strip() if s is not None else ""
    if not stripped:
        raise ValueError("empty entity")
    return _WHITESPACE.sub("_", stripped.lower())


def _tokens(text: str) -> List[str]:
    return text.split()


def _core(token: str) -> str:
    return token.lower().strip(_EDGE_PUNCT)


def entity_spans(text: str, lexicon: AbstractSet[str]) -> List[Tuple[int, int, str]]:
    """Non-overlapping (start, end, entity) token spans, longest match first, left to right."""
    if not lexicon:
        return []
    tokens = _tokens(text)
    cores = [_core(t) for t in tokens]
    max_len = max(entity.count("_") + 1 for entity in lexicon)
    spans = []
    i = 0
    while i < len(tokens):
        matched = None
        for j in range(min(len(tokens), i + max_len), i, -1):
            parts = cores[i:j]
            if not all(parts):
                continue
            candidate = "_".join(parts)
            if candidate in lexicon:
                matched = (i, j, candidate)
                break
        if matched:
            spans.append(matched)
            i = matched[1]
        else:
            i += 1
    return spans


def entities_in(text: str, lexicon: AbstractSet[str]) -> Set[str]:
    return {entity for _, _, entity in entity_spans(text, lexicon)}


def replace_entity(text: str, span: Tuple[int, int, str], surface: str) -> str:
    """Swap the tokens of one span for a surface form, keeping edge punctuation."""
    start, end, _ = span
    tokens = _tokens(text)
    first, last = tokens[start], tokens[end - 1]
    lead = first[: len(first) - len(first.lstrip(_EDGE_PUNCT))]
    trail = last[len(last.rstrip(_EDGE_PUNCT)):]
    return " ".join(tokens[:start] + [lead + surface + trail] + tokens[end:])


def surface_form(entity: str, dataset: str) -> str:
    """bAbI entities are written with underscores; SMD ones with spaces."""
    return entity if dataset == "babi" else entity.replace("_", " ")
