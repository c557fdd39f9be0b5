import json
from dataclasses import asdict, dataclass, fields
from typing import List, Optional, Tuple

from corpus_io.manifest import EvalManifest, PredictionSet, manifest_digest
from dialog_model.dialog import DialogCorpus
from logging_utils.logger import setup_logger
from metrics.accuracy import response_accuracy
from metrics.bleu import BLEU_CONFIG, corpus_bleu
from metrics.entity_f1 import entity_f1, global_lexicon

logger = setup_logger()

ENTITY_F1_CONFIG = "micro|exact-normalized-spans"
_METRICS = ("bleu", "entity_f1", "per_response_acc", "per_dialog_acc")


@dataclass(frozen=True)
class EvalReport:
    bleu: Optional[float] = None
    entity_f1: Optional[float] = None
    per_response_acc: Optional[float] = None
    per_dialog_acc: Optional[float] = None
    n_responses: Optional[int] = None
    n_dialogs: Optional[int] = None
    corpus_tag: str = ""
    manifest_digest: str = ""
    predictions_checksum: str = ""
    corpus_checksum: str = ""
    bleu_config: str = BLEU_CONFIG
    entity_f1_config: str = ENTITY_F1_CONFIG
    entity_scope: str = "global"
    label: str = ""

    def __post_init__(self):
        for name in ("entity_f1", "per_response_acc", "per_dialog_acc"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a ratio in [0, 1], got {value}")
        if self.bleu is not None and not 0.0 <= self.bleu <= 100.0:
            raise ValueError(f"bleu must be a percentage in [0, 100], got {self.bleu}")

    def render(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None or value == "":
                continue
            if isinstance(value, float):
                value = f"{value:.6f}".rstrip("0").rstrip(".") if value else "0"
            lines.append(f"{f.name}: {value}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def read_report(text: str) -> EvalReport:
    """Inverse of EvalReport.render (and accepts the JSON record); absent metrics stay None."""
    stripped = text.strip()
    if stripped.startswith("{"):
        return EvalReport(**json.loads(stripped))
    known = {f.name for f in fields(EvalReport)}
    values = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if not sep or key not in known:
            raise ValueError(f"report line {line_number}: expected '<field>: <value>', got {line!r}")
        if key in _METRICS:
            values[key] = float(value)
        elif key in ("n_responses", "n_dialogs"):
            values[key] = int(value)
        else:
            values[key] = value
    return EvalReport(**values)


def evaluate(
    preds: PredictionSet,
    manifest: EvalManifest,
    corpus: Optional[DialogCorpus] = None,
    entity_scope: str = "global",
    corpus_checksum: str = "",
    predictions_checksum: str = "",
) -> EvalReport:
    """All four measures over the manifest's responses; entity F1 needs the corpus KBs."""
    dialog_ids = [d.id for d in corpus.dialogs] if corpus is not None else manifest.dialog_ids()
    per_response, per_dialog = response_accuracy(preds, manifest, dialog_ids=dialog_ids)
    f1 = None
    if corpus is not None and global_lexicon(corpus):
        f1 = entity_f1(preds, manifest, corpus, scope=entity_scope)
    elif corpus is not None:
        logger.warning("Entity F1 skipped: the corpus has no KB entities")
    report = EvalReport(
        bleu=corpus_bleu(preds, manifest),
        entity_f1=f1,
        per_response_acc=per_response,
        per_dialog_acc=per_dialog,
        n_responses=len(manifest),
        n_dialogs=len(dialog_ids),
        corpus_tag=manifest.corpus_tag,
        manifest_digest=manifest_digest(manifest),
        predictions_checksum=predictions_checksum,
        corpus_checksum=corpus_checksum,
        entity_scope=entity_scope,
    )
    logger.info(f"Evaluated {len(manifest)} responses over {len(dialog_ids)} dialogs")
    return report


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    original: float
    updated: float

    @property
    def delta(self) -> float:
        return self.updated - self.original

    @property
    def relative_drop(self) -> float:
        """Percent of the original value lost; 0 when the original is 0."""
        if self.original == 0:
            return 0.0
        return (self.original - self.updated) / self.original * 100.0


# (field, display label, scale to the published percentage)
_DISPLAY = (
    ("bleu", "BLEU", 1.0),
    ("entity_f1", "Ent. F1", 100.0),
    ("per_response_acc", "Per-response acc.", 100.0),
    ("per_dialog_acc", "Per-dialog acc.", 100.0),
)


def compare(report_original: EvalReport, report_updated: EvalReport) -> List[ComparisonRow]:
    if report_original.bleu_config != report_updated.bleu_config:
        logger.warning("Compared reports use different BLEU configurations")
    if report_original.entity_scope != report_updated.entity_scope:
        logger.warning("Compared reports use different entity scopes")
    rows = []
    for name, label, scale in _DISPLAY:
        original, updated = getattr(report_original, name), getattr(report_updated, name)
        if original is None or updated is None:
            continue
        rows.append(ComparisonRow(metric=label, original=original * scale, updated=updated * scale))
    return rows


def scored_responses(report_original: EvalReport, report_updated: EvalReport) -> Optional[Tuple[int, int]]:
    """Size of the masked subset each report was scored on, when both reports record it."""
    if report_original.n_responses is None or report_updated.n_responses is None:
        return None
    if report_original.n_responses != report_updated.n_responses:
        logger.warning(
            "Compared reports scored different response sets "
            f"({report_original.n_responses} vs {report_updated.n_responses})"
        )
    return report_original.n_responses, report_updated.n_responses


def render_comparison(
    rows: List[ComparisonRow],
    labels: Tuple[str, str] = ("original", "updated"),
    scored: Optional[Tuple[int, int]] = None,
) -> str:
    table = [("metric", labels[0], labels[1], "delta", "rel. drop")]
    for row in rows:
        table.append(
            (
                row.metric,
                f"{row.original:.2f}",
                f"{row.updated:.2f}",
                f"{row.delta:+.2f}",
                f"{row.relative_drop:.1f}%",
            )
        )
    if scored is not None:
        # only agent turns present in the original corpus are scored
        table.append(("Scored responses", str(scored[0]), str(scored[1]), "", ""))
    widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
    out = []
    for row in table:
        cells = [row[0].ljust(widths[0])] + [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        out.append("  ".join(cells).rstrip())
    return "\n".join(out) + "\n"
