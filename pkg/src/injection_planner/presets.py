from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

import yaml

from config import resolved_settings
from errors import PlanError
from injection_planner.planner import PlanConfig
from pattern_engine.recipes import PATTERN_ORDER

PRESETS = ("smd-table1", "babi-table1")
DEFAULT_CAPS = {"smd": 4, "babi": 5}


@dataclass(frozen=True)
class Preset:
    name: str
    dataset: Optional[str]
    config: PlanConfig
    reference_means: Dict[str, float] = field(default_factory=dict)


def preset_path(name_or_path: str) -> Path:
    path = Path(name_or_path)
    if path.suffix in (".yaml", ".yml") or path.exists():
        return path
    return Path(resolved_settings()["NCF_PRESET_DIR"]) / f"{name_or_path}.yaml"


def parse_preset(data: dict, name: str = "") -> Preset:
    if not isinstance(data, dict):
        raise PlanError(f"plan config {name} must be a mapping")
    dataset = data.get("dataset")
    targets = data.get("targets") or {}
    if not isinstance(targets, dict):
        raise PlanError(f"plan config {name}: targets must map pattern -> count")
    histogram = data.get("histogram_targets")
    try:
        config = PlanConfig(
            targets={str(k): int(v) for k, v in targets.items()},
            seed=int(data.get("seed", 0)),
            max_patterns_per_dialog=int(data.get("max_patterns_per_dialog", DEFAULT_CAPS.get(dataset, 4))),
            pattern_order=tuple(data.get("pattern_order") or PATTERN_ORDER),
            histogram_targets={int(k): int(v) for k, v in histogram.items()} if histogram else None,
            allow_shortfall=bool(data.get("allow_shortfall", False)),
        )
    except (TypeError, ValueError) as e:
        raise PlanError(f"plan config {name}: {e}") from e
    config.validate(dataset)
    means = {str(k): float(v) for k, v in (data.get("reference_mean_utterances") or {}).items()}
    return Preset(name=str(data.get("name", name)), dataset=dataset, config=config, reference_means=means)


def load_preset(name_or_path: str) -> Preset:
    path = preset_path(name_or_path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise PlanError(f"unknown preset or unreadable plan config {name_or_path!r}: {e}") from e
    except yaml.YAMLError as e:
        raise PlanError(f"plan config {path} is not valid YAML: {e}") from e
    return parse_preset(data, name=path.stem)
