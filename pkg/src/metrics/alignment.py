from corpus_io.manifest import EvalManifest, PredictionSet, manifest_digest
from errors import AlignmentError


def check_aligned(preds: PredictionSet, manifest: EvalManifest) -> None:
    if len(preds) != len(manifest):
        raise AlignmentError(f"expected {len(manifest)} predictions, got {len(preds)}")
    if preds.manifest_digest != manifest_digest(manifest):
        raise AlignmentError("predictions were aligned to a different manifest (digest mismatch)")
