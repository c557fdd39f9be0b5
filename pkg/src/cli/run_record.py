import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from config import resolved_settings
from corpus_io.raw_file import sha256_hex

TOOL_NAME = "ncf-testbed"
TOOL_VERSION = "0.1.0"


@dataclass
class RunRecord:
    """What a run read, how it was configured, and what it wrote. No timestamps, so reruns compare equal."""

    subcommand: str
    config: Dict[str, Any] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    seed: Optional[int] = None
    tool: str = f"{TOOL_NAME} {TOOL_VERSION}"
    settings: Dict[str, str] = field(default_factory=resolved_settings)
    notes: Dict[str, Any] = field(default_factory=dict)

    def add_input(self, path, data: bytes):
        self.inputs[str(path)] = sha256_hex(data)

    def add_output(self, path, data: bytes):
        self.outputs[str(path)] = sha256_hex(data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def write_output(record: RunRecord, path, data: bytes) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    record.add_output(path, data)


def record_path(output_path) -> Path:
    return Path(f"{output_path}.run.json")
