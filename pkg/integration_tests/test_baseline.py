import math
import os
import sys
from collections import Counter
import pytest
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))
from baseline.retriever import CandidateSet, ResponseRetriever, history_text, load_candidates
from corpus_io.manifest import export_manifest, manifest_digest
from corpus_io.raw_file import RawFile
from errors import AlignmentError


class BruteForceTfidf:
    """Smoothed idf, raw term counts, l2-normalised rows; fitted on the candidates only."""

    def __init__(self, documents):
        docs = [Counter(d.lower().split()) for d in documents]
        n = len(docs)
        df = Counter(term for doc in docs for term in doc)
        self.idf = {term: math.log((1 + n) / (1 + count)) + 1 for term, count in df.items()}
        self.rows = [self.vector(d) for d in documents]

    def vector(self, text):
        counts = Counter(t for t in text.lower().split() if t in self.idf)
        weights = {t: c * self.idf[t] for t, c in counts.items()}
        norm = math.sqrt(sum(w * w for w in weights.values()))
        return {t: w / norm for t, w in weights.items()} if norm else {}

    def scores(self, query):
        q = self.vector(query)
        return [sum(w * row.get(t, 0.0) for t, w in q.items()) for row in self.rows]


def _candidates(candidates_path):
    return load_candidates(RawFile.read(candidates_path), 'babi')


def test_scores_match_brute_force_tfidf(candidates_path):
    candidates = _candidates(candidates_path)
    retriever = ResponseRetriever(candidates, show_progress=False)
    oracle = BruteForceTfidf(candidates.responses)
    queries = [
        'good morning hello what can i help you with today can you book a table in rome',
        'may i have the phone number of the restaurant',
        'nothing in common here',
    ]
    matrix = retriever.scores(queries)
    for row, query in zip(matrix, queries):
        assert list(row) == pytest.approx(oracle.scores(query), abs=1e-9)


def test_predictions_follow_the_manifest(babi_corpus, candidates_path):
    candidates = _candidates(candidates_path)
    manifest = export_manifest(babi_corpus)
    preds = ResponseRetriever(candidates, show_progress=False).predict(babi_corpus, manifest)
    assert len(preds) == len(manifest)
    assert preds.manifest_digest == manifest_digest(manifest)
    assert set(preds.responses) <= set(candidates.responses)

    oracle = BruteForceTfidf(candidates.responses)
    dialogs = babi_corpus.by_id()
    for entry, predicted in zip(manifest.entries, preds.responses):
        history = history_text(dialogs[entry.dialog_id].turns[: entry.turn_index])
        scores = oracle.scores(history)
        assert scores[candidates.responses.index(predicted)] == pytest.approx(max(scores), abs=1e-9)


def test_ties_go_to_the_lowest_index(babi_corpus):
    candidates = CandidateSet.from_responses(['book a table', 'a table book', 'you are welcome'])
    retriever = ResponseRetriever(candidates, show_progress=False)
    history = babi_corpus.dialogs[0].turns[:4]
    assert retriever.rank(history)[:2] == [0, 1]
    # no shared terms: every score is zero, so the first candidate wins
    assert retriever.scores(['zzz'])[0].tolist() == [0.0, 0.0, 0.0]


def test_single_pair_score(babi_corpus, candidates_path):
    candidates = _candidates(candidates_path)
    retriever = ResponseRetriever(candidates, show_progress=False)
    history = babi_corpus.dialogs[0].turns[:3]
    oracle = BruteForceTfidf(candidates.responses)
    q, c = oracle.vector(history_text(history)), oracle.vector(candidates.responses[2])
    expected = sum(w * c.get(t, 0.0) for t, w in q.items())
    assert retriever.score(history, candidates.responses[2]) == pytest.approx(expected, abs=1e-9)
    with pytest.raises(ValueError):
        retriever.score([], candidates.responses[0])


def test_mismatched_manifest_is_rejected(babi_corpus, smd_corpus, candidates_path):
    retriever = ResponseRetriever(_candidates(candidates_path), show_progress=False)
    with pytest.raises(AlignmentError):
        retriever.predict(babi_corpus, export_manifest(smd_corpus))


def test_smd_candidates_come_from_agent_turns(smd_file, smd_corpus):
    candidates = load_candidates(smd_file, 'smd')
    assert candidates.responses[0].startswith('There are several gas stations')
    assert len(candidates) == len(export_manifest(smd_corpus))
    preds = ResponseRetriever(candidates, show_progress=False).predict(smd_corpus, export_manifest(smd_corpus))
    assert len(preds) == len(candidates)


def test_candidate_set_dedups_and_rejects_empty():
    assert CandidateSet.from_responses(['a', 'b', 'a', ' ']).responses == ('a', 'b')
    with pytest.raises(ValueError):
        CandidateSet.from_responses([])
