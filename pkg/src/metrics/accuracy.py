from typing import Iterable, Optional, Tuple

from corpus_io.manifest import EvalManifest, PredictionSet
from metrics.alignment import check_aligned


def normalize_response(text: str) -> str:
    return " ".join(text.lower().split())


def response_accuracy(
    preds: PredictionSet, manifest: EvalManifest, dialog_ids: Optional[Iterable[str]] = None
) -> Tuple[float, float]:
    """(per-response, per-dialog) exact-match accuracy.

    dialog_ids lists every dialog of the corpus; those with no scored response count as correct.
    """
    check_aligned(preds, manifest)
    dialog_ok = {d: True for d in (dialog_ids or [])}
    correct = 0
    for entry, pred in zip(manifest.entries, preds.responses):
        hit = normalize_response(pred) == normalize_response(entry.gold_text)
        correct += hit
        dialog_ok[entry.dialog_id] = dialog_ok.get(entry.dialog_id, True) and hit
    per_response = correct / len(manifest) if len(manifest) else 1.0
    per_dialog = sum(dialog_ok.values()) / len(dialog_ok) if dialog_ok else 1.0
    return per_response, per_dialog
