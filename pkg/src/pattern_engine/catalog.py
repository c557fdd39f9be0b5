"""The 32 NCF patterns relevant to goal-oriented dialog; nine of them carry injection recipes."""
from dataclasses import dataclass
from typing import Dict, Tuple

PATTERN_CLASSES = {
    "A": "conversational activity",
    "B": "sequence-level management",
    "C": "conversation-level management",
}


@dataclass(frozen=True)
class PatternId:
    cls: str
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PatternCatalogEntry:
    id: PatternId
    ncf_code: str
    description: str
    has_recipe: bool


def _entry(code, name, description, has_recipe=False):
    return PatternCatalogEntry(PatternId(code[0], name), code, description, has_recipe)


CATALOG: Tuple[PatternCatalogEntry, ...] = (
    _entry("A1.1", "inquiry_user_confirmation", "Inquiry (User) Confirmation"),
    _entry("A1.2", "inquiry_user_disconfirmation", "Inquiry (User) Disconfirmation"),
    _entry("A1.3", "inquiry_user_repairs", "Inquiry (User) Repairs"),
    _entry("A2.2", "open_request_continuer", "Open Request Continuer"),
    _entry(
        "A2.3",
        "open_request_screening",
        "The user asks a preliminary question to a complex request to find out whether the agent can help.",
        True,
    ),
    _entry(
        "A2.5",
        "open_request_user_detail_request",
        "The user requests additional information when attempting to answer an agent question.",
        True,
    ),
    _entry("A2.6", "open_request_summary", "Open Request Summary"),
    _entry("A2.11", "open_request_repairs", "Open Request Repairs"),
    _entry("A3.0", "extended_telling_with_repair", "Extended Telling with Repair"),
    _entry("A3.1", "extended_telling_abort", "Extended Telling Abort"),
    _entry("B1.2.2", "agent_continuer", "Agent Continuer"),
    _entry(
        "B2.6.0",
        "example_request",
        "The user requests clarification of the agent's prior utterance in the form of an example.",
        True,
    ),
    _entry(
        "B3.1.1",
        "misunderstanding_report",
        "The user tells the agent that it misunderstood what was said.",
        True,
    ),
    _entry(
        "B3.2.0",
        "other_correction",
        "The agent corrects the user's second to last utterance based on the user's last utterance.",
        True,
    ),
    _entry("B4.0", "sequence_closer_helped", "Sequence Closer (helped)"),
    _entry(
        "B4.1",
        "sequence_closer_not_helped",
        "The user acknowledges an unhelpful agent response in a negative way.",
        True,
    ),
    _entry("B4.2", "sequence_closer_appreciation", "Sequence Closer Appreciation"),
    _entry(
        "B4.4",
        "sequence_closer_repaired",
        "The user acknowledges the repair of a part of a sequence.",
        True,
    ),
    _entry("C1.4", "opening_welfare_check_agent", "Opening Welfare Check (Agent)"),
    _entry("C1.5", "opening_organization_offer_of_help_agent", "Opening Organization Offer of Help (Agent)"),
    _entry("C1.7", "organizational_problem_request_agent", "Organizational Problem Request (Agent)"),
    _entry("C2.1", "summons_user", "Summons (User)"),
    _entry("C2.2", "welfare_check_user", "Welfare Check (User)"),
    _entry("C2.9", "name_correction_user", "Name Correction (User)"),
    _entry("C3.0", "general_capability_check", "General Capability Check"),
    _entry(
        "C3.1",
        "capability_expansion",
        "The user asks the agent to expand on one of the capabilities it mentioned.",
        True,
    ),
    _entry("C3.2", "specific_capability_check", "Specific Capability Check"),
    _entry("C4.7", "closing_success_check_disaffirmed", "Closing Success Check (Disaffirmed)"),
    _entry("C4.8", "closing_success_check_reopened", "Closing Success Check Reopened"),
    _entry("C4.9", "closing_offer_affirmed", "Closing Offer (Affirmed)"),
    _entry("C4.10", "closing_offer_disaffirmed", "Closing Offer (Disaffirmed)"),
    _entry(
        "C5.2",
        "recipient_correction",
        "The user indicates that he or she is talking to someone other than the agent.",
        True,
    ),
)

_BY_NAME: Dict[str, PatternCatalogEntry] = {e.id.name: e for e in CATALOG}
_BY_CODE: Dict[str, PatternCatalogEntry] = {e.ncf_code: e for e in CATALOG}


def list_patterns() -> Tuple[PatternCatalogEntry, ...]:
    return CATALOG


def lookup(key: str) -> PatternCatalogEntry:
    """Find an entry by canonical name or NCF code."""
    entry = _BY_NAME.get(key) or _BY_CODE.get(key)
    if entry is None:
        raise KeyError(f"unknown pattern: {key}")
    return entry


def is_registered(name) -> bool:
    return name in _BY_NAME


def recipe_names() -> Tuple[str, ...]:
    return tuple(e.id.name for e in CATALOG if e.has_recipe)


def export_catalog_table() -> str:
    rows = [("code", "class", "name", "recipe")]
    rows += [(e.ncf_code, e.id.cls, e.id.name, "yes" if e.has_recipe else "-") for e in CATALOG]
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows) + "\n"
