from pathlib import Path
from string import Formatter
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import yaml

from config import resolved_settings
from corpus_io.raw_file import sha256_hex
from errors import AnchorError, PhraseBankError
from logging_utils.logger import setup_logger
from pattern_engine.recipes import RECIPES, PatternRecipe

DEFAULT_DOMAIN = "default"


def template_fields(template: str) -> List[str]:
    return [name for _, name, _, _ in Formatter().parse(template) if name is not None]


class PhraseBank:
    """Surface forms keyed by (pattern, social action, domain), loaded from YAML."""

    def __init__(self, entries: Mapping[str, Mapping[str, Mapping[str, List[str]]]], digest: str = ""):
        self.logger = setup_logger()
        self.entries = entries
        self.digest = digest
        self._check()

    @classmethod
    def load(cls, path: Optional[str] = None) -> "PhraseBank":
        path = Path(path or resolved_settings()["NCF_PHRASE_BANK_PATH"])
        try:
            data = path.read_bytes()
        except OSError as e:
            raise PhraseBankError(f"cannot read phrase bank {path}: {e}") from e
        try:
            entries = yaml.safe_load(data) or {}
        except yaml.YAMLError as e:
            raise PhraseBankError(f"phrase bank {path} is not valid YAML: {e}") from e
        bank = cls(entries, digest=sha256_hex(data))
        bank.logger.info(f"Loaded phrase bank {path} ({len(bank.entries)} patterns)")
        return bank

    def _check(self):
        if not isinstance(self.entries, dict):
            raise PhraseBankError("phrase bank must map pattern -> action -> domain -> [surface forms]")
        for pattern, actions in self.entries.items():
            if not isinstance(actions, dict):
                raise PhraseBankError(f"{pattern}: expected a mapping of social actions")
            for action, domains in actions.items():
                if not isinstance(domains, dict):
                    raise PhraseBankError(f"{pattern}/{action}: expected a mapping of domains")
                for domain, forms in domains.items():
                    if not isinstance(forms, list) or not forms or not all(isinstance(f, str) and f for f in forms):
                        raise PhraseBankError(f"{pattern}/{action}/{domain}: expected a non-empty list of strings")
                    for form in forms:
                        try:
                            template_fields(form)
                        except ValueError as e:
                            raise PhraseBankError(f"{pattern}/{action}/{domain}: bad template {form!r}: {e}") from e

    def variants(self, pattern: str, action: str, domain: str) -> Tuple[str, ...]:
        domains = self.entries.get(pattern, {}).get(action, {})
        forms = domains.get(domain) or domains.get(DEFAULT_DOMAIN)
        if not forms:
            raise PhraseBankError(f"no phrase bank entry for {pattern}/{action}/{domain}")
        return tuple(forms)

    def coverage_gaps(self, recipes=None, domains_by_dataset=None) -> List[str]:
        """(pattern/action/domain) triples a recipe needs that the bank cannot serve."""
        domains_by_dataset = domains_by_dataset or {
            "babi": ("restaurant",),
            "smd": ("schedule", "weather", "navigate"),
        }
        gaps = []
        for recipe in recipes or RECIPES.values():
            for step in recipe.template:
                for dataset in sorted(recipe.datasets):
                    for domain in domains_by_dataset[dataset]:
                        try:
                            self.variants(recipe.name, step.action, domain)
                        except PhraseBankError:
                            gaps.append(f"{recipe.name}/{step.action}/{domain}")
        return sorted(set(gaps))

    def realize(
        self,
        recipe: PatternRecipe,
        action: str,
        domain: str,
        bound: Mapping[str, str],
        draw: Optional[np.random.Generator] = None,
    ) -> str:
        forms = self.variants(recipe.name, action, domain)
        index = 0 if draw is None else int(draw.integers(len(forms)))
        template = forms[index]
        values: Dict[str, str] = {}
        for name in template_fields(template):
            if name not in bound:
                raise AnchorError(f"{recipe.name}/{action}: unresolvable realization slot {name!r}")
            values[name] = bound[name]
        text = template.format(**values)
        return " ".join(text.split())
