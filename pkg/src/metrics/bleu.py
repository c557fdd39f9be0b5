from sacrebleu.metrics import BLEU

from corpus_io.manifest import EvalManifest, PredictionSet
from metrics.alignment import check_aligned

# lowercase, whitespace tokens, orders 1-4, no smoothing
BLEU_CONFIG = "corpus-bleu|n=4|lowercase|tok=whitespace|smooth=none"


class BleuScorer:
    def __init__(self):
        self.bleu_model = BLEU(lowercase=True, tokenize="none", smooth_method="none", force=True)

    def score(self, hypotheses, references) -> float:
        if not hypotheses:
            return 0.0
        result = self.bleu_model.corpus_score(list(hypotheses), [list(references)])
        return min(max(float(result.score), 0.0), 100.0)


def corpus_bleu(preds: PredictionSet, manifest: EvalManifest) -> float:
    check_aligned(preds, manifest)
    return BleuScorer().score(preds.responses, [e.gold_text for e in manifest.entries])
