import math
from dataclasses import dataclass
from typing import Tuple

from dialog_model.dialog import Dialog, DialogCorpus
from errors import PlanError
from logging_utils.logger import setup_logger
from seeding import keyed_rng

logger = setup_logger()


@dataclass(frozen=True)
class ReviewSheet:
    dialogs: Tuple[Dialog, ...]
    sample_fraction: float
    seed: int
    updated_count: int

    @property
    def dialog_ids(self) -> Tuple[str, ...]:
        return tuple(d.id for d in self.dialogs)

    def render(self) -> str:
        lines = [
            "# Review sheet",
            "",
            f"- sample_fraction: {self.sample_fraction}",
            f"- seed: {self.seed}",
            f"- sampled: {len(self.dialogs)} of {self.updated_count} updated dialogs",
        ]
        for dialog in self.dialogs:
            patterns = ", ".join(sorted(dialog.applied_patterns))
            lines += ["", f"## {dialog.id} ({dialog.domain}; patterns: {patterns})", ""]
            for turn in dialog.turns:
                mark = f"[+{turn.origin.pattern}] " if turn.origin.is_injected else ""
                lines.append(f"- {mark}{turn.speaker.value}: {turn.text}")
        return "\n".join(lines) + "\n"


def review_size(fraction: float, updated_count: int) -> int:
    # half-up, not banker's rounding
    return int(math.floor(fraction * updated_count + 0.5))


def sample_review(updated: DialogCorpus, fraction: float, seed: int) -> ReviewSheet:
    if not 0 < fraction <= 1:
        raise PlanError(f"review fraction must be in (0, 1], got {fraction}")
    candidates = [d for d in updated.dialogs if d.applied_patterns]
    if not candidates:
        raise PlanError("corpus has no updated dialogs to review")
    size = review_size(fraction, len(candidates))
    rng = keyed_rng(seed, "review")
    picked = sorted(int(i) for i in rng.choice(len(candidates), size=size, replace=False))
    logger.info(f"Sampled {size} of {len(candidates)} updated dialogs for review")
    return ReviewSheet(
        dialogs=tuple(candidates[i] for i in picked),
        sample_fraction=fraction,
        seed=seed,
        updated_count=len(candidates),
    )
