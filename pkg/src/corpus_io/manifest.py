import hashlib
from dataclasses import dataclass
from typing import Optional, Tuple

from corpus_io.raw_file import RawFile
from dialog_model.dialog import DialogCorpus, Speaker
from errors import AlignmentError, CorpusParseError


@dataclass(frozen=True)
class ManifestEntry:
    dialog_id: str
    turn_index: int
    gold_text: str


@dataclass(frozen=True)
class EvalManifest:
    entries: Tuple[ManifestEntry, ...]
    corpus_tag: str = ""

    def __len__(self):
        return len(self.entries)

    def gold_sequence(self):
        return [(e.dialog_id, e.gold_text) for e in self.entries]

    def dialog_ids(self):
        seen = []
        for entry in self.entries:
            if not seen or seen[-1] != entry.dialog_id:
                seen.append(entry.dialog_id)
        return seen


@dataclass(frozen=True)
class PredictionSet:
    responses: Tuple[str, ...]
    manifest_digest: str

    def __len__(self):
        return len(self.responses)


def manifest_digest(manifest: EvalManifest) -> str:
    """Digest of the scored (dialog_id, gold_text) sequence; turn positions are excluded."""
    h = hashlib.sha256()
    for dialog_id, gold in manifest.gold_sequence():
        h.update(f"{dialog_id}\t{gold}\n".encode("utf-8"))
    return h.hexdigest()


def export_manifest(corpus: DialogCorpus, corpus_tag: Optional[str] = None) -> EvalManifest:
    entries = []
    for dialog in corpus.dialogs:
        for index, turn in enumerate(dialog.turns):
            if turn.speaker is Speaker.AGENT and turn.is_original:
                entries.append(ManifestEntry(dialog_id=dialog.id, turn_index=index, gold_text=turn.text))
    return EvalManifest(entries=tuple(entries), corpus_tag=corpus_tag or corpus.source_format)


def write_manifest(manifest: EvalManifest) -> bytes:
    lines = [f"# corpus_tag: {manifest.corpus_tag}"]
    lines.extend(f"{e.dialog_id}\t{e.turn_index}\t{e.gold_text}" for e in manifest.entries)
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_manifest(file: RawFile) -> EvalManifest:
    corpus_tag = ""
    entries = []
    for line_number, line in enumerate(file.text().split("\n"), start=1):
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            if key.strip() == "corpus_tag":
                corpus_tag = value.strip()
            continue
        parts = line.split("\t", 2)
        if len(parts) != 3 or not parts[1].isdigit():
            raise CorpusParseError("manifest line must be dialog_id<TAB>turn_index<TAB>gold_text", line=line_number)
        entries.append(ManifestEntry(dialog_id=parts[0], turn_index=int(parts[1]), gold_text=parts[2]))
    return EvalManifest(entries=tuple(entries), corpus_tag=corpus_tag)


def read_predictions(file: RawFile, manifest: EvalManifest) -> PredictionSet:
    try:
        text = file.data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise AlignmentError(f"invalid UTF-8 in {file.path} at byte offset {e.start}") from e
    text = text.replace("\r\n", "\n")
    if text.endswith("\n"):
        text = text[:-1]
    lines = text.split("\n") if file.data else []
    if len(lines) != len(manifest):
        raise AlignmentError(f"expected {len(manifest)} predictions, got {len(lines)}")
    return PredictionSet(responses=tuple(lines), manifest_digest=manifest_digest(manifest))


def write_predictions(predictions: PredictionSet) -> bytes:
    return "".join(f"{line}\n" for line in predictions.responses).encode("utf-8")
