# Regenerates golden.json from golden.hyp / golden.ref with sacrebleu 2.6.0.
import json
import sacrebleu
from sacrebleu.metrics import BLEU, CHRF, TER

hyp = open("golden.hyp", encoding="utf-8").read().splitlines()
ref = open("golden.ref", encoding="utf-8").read().splitlines()
bleu = BLEU(tokenize="none", smooth_method="none").corpus_score(hyp, [ref])
ter = TER(case_sensitive=True).corpus_score(hyp, [ref])
chrf3 = CHRF(beta=3).corpus_score(hyp, [ref])
chrf1 = CHRF(beta=1).corpus_score(hyp, [ref])
out = {
    "sacrebleu_version": sacrebleu.__version__,
    "bleu": bleu.score / 100.0,
    "ter": ter.score / 100.0,
    "chrf3": chrf3.score,
    "chrf1": chrf1.score,
    "ter_segments": [
        TER(case_sensitive=True).sentence_score(h, [r]).score / 100.0 for h, r in zip(hyp, ref)
    ],
    "chrf3_segments": [CHRF(beta=3).sentence_score(h, [r]).score for h, r in zip(hyp, ref)],
}
with open("golden.json", "w", encoding="utf-8") as f:
    json.dump(out, f, indent=2)
    f.write("\n")
