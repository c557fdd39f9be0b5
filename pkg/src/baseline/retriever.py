import sys
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer
from tqdm import tqdm

from config import get_bool_config
from corpus_io.babi import read_candidates
from corpus_io.manifest import EvalManifest, PredictionSet, manifest_digest
from corpus_io.raw_file import RawFile
from corpus_io.smd import parse_smd
from dialog_model.dialog import DialogCorpus, Speaker, Turn
from errors import AlignmentError
from logging_utils.logger import setup_logger

_BATCH = 512


@dataclass(frozen=True)
class CandidateSet:
    responses: Tuple[str, ...]

    def __post_init__(self):
        if not self.responses:
            raise ValueError("candidate set is empty")

    def __len__(self):
        return len(self.responses)

    @classmethod
    def from_responses(cls, responses: Sequence[str]) -> "CandidateSet":
        # first occurrence wins
        return cls(tuple(dict.fromkeys(r for r in responses if r.strip())))


def load_candidates(file: RawFile, fmt: str) -> CandidateSet:
    """bAbI: the task's candidate file; SMD: every assistant turn of a training split."""
    if fmt == "babi":
        return CandidateSet.from_responses(read_candidates(file))
    corpus = parse_smd(file)
    return CandidateSet.from_responses(
        [t.text for d in corpus.dialogs for t in d.turns if t.speaker is Speaker.AGENT and t.is_original]
    )


def history_text(turns: Sequence[Turn]) -> str:
    return " ".join(t.text for t in turns)


class ResponseRetriever:
    """TF-IDF cosine ranking of candidate responses against the dialog history."""

    def __init__(self, candidates: CandidateSet, show_progress=None):
        self.logger = setup_logger()
        self.candidates = candidates
        self.show_progress = get_bool_config("NCF_SHOW_PROGRESS") if show_progress is None else show_progress
        self.vectorizer = TfidfVectorizer(lowercase=True, tokenizer=str.split, token_pattern=None)
        self.candidate_matrix = self.vectorizer.fit_transform(candidates.responses)
        self.logger.info(
            f"Fitted TF-IDF over {len(candidates)} candidates ({len(self.vectorizer.vocabulary_)} terms)"
        )

    def scores(self, histories: Sequence[str]) -> np.ndarray:
        """Cosine similarity of each history to every candidate (rows l2-normalised by the vectorizer)."""
        queries = self.vectorizer.transform(list(histories))
        return (queries @ self.candidate_matrix.T).toarray()

    def score(self, history: Sequence[Turn], candidate: str) -> float:
        if not history:
            raise ValueError("history must be non-empty")
        query = self.vectorizer.transform([history_text(history)])
        return float((query @ self.vectorizer.transform([candidate]).T).toarray()[0, 0])

    def rank(self, history: Sequence[Turn]) -> List[int]:
        row = self.scores([history_text(history)])[0]
        # stable sort keeps the lowest index first among ties
        return [int(i) for i in np.argsort(-row, kind="stable")]

    def predict(self, corpus: DialogCorpus, manifest: EvalManifest) -> PredictionSet:
        dialogs = corpus.by_id()
        histories = []
        for entry in manifest.entries:
            dialog = dialogs.get(entry.dialog_id)
            if dialog is None or entry.turn_index >= len(dialog.turns):
                raise AlignmentError(f"manifest entry {entry.dialog_id}:{entry.turn_index} is not in the corpus")
            if dialog.turns[entry.turn_index].text != entry.gold_text:
                raise AlignmentError(f"manifest entry {entry.dialog_id}:{entry.turn_index} does not match the corpus")
            histories.append(history_text(dialog.turns[: entry.turn_index]))

        picks: List[int] = []
        batches = range(0, len(histories), _BATCH)
        for start in tqdm(batches, desc="baseline", disable=not self.show_progress, file=sys.stderr):
            picks.extend(int(i) for i in np.argmax(self.scores(histories[start:start + _BATCH]), axis=1))
        self.logger.info(f"Predicted {len(picks)} responses for {len(dialogs)} dialogs")
        return PredictionSet(
            responses=tuple(self.candidates.responses[i] for i in picks),
            manifest_digest=manifest_digest(manifest),
        )
