#!/usr/bin/env python3
"""Regenerates tests/data/metric_fixtures.json.

Expected BLEU values come from NLTK's sentence_bleu (uniform weights over
orders 1..min(4, |candidate|), zero precisions floored at 1e-9); expected
ROUGE-L F1 values come from the rouge-score package's LCS scorer. Both are
computed directly on token lists, so the library tokenizer is not involved.

    pip install nltk rouge-score
    python3 tests/oracles/metric_oracle.py > tests/data/metric_fixtures.json
"""

import json
import random

from nltk.translate.bleu_score import sentence_bleu
from rouge_score.rouge_scorer import _score_lcs

EPS = 1e-9
VOCAB = ("the a cat dog sat lay down on mat i you we can't wait to see it "
         "really , . ! ? so what do think about that yes no maybe").split()


def floor_smoothing(p_n, **_):
    return [float(p) if p.numerator else EPS for p in p_n]


def bleu(candidate, reference):
    if not candidate:
        return 0.0
    n = min(4, len(candidate))
    return sentence_bleu([reference], candidate, weights=tuple([1.0 / n] * n),
                         smoothing_function=floor_smoothing)


def rouge_l(candidate, reference):
    if not candidate:
        return 0.0
    return _score_lcs(reference, candidate).fmeasure


def mutate(rng, tokens):
    out = list(tokens)
    for _ in range(rng.randint(0, 4)):
        op = rng.choice("sdi")
        if op == "s" and out:
            out[rng.randrange(len(out))] = rng.choice(VOCAB)
        elif op == "d" and len(out) > 1:
            del out[rng.randrange(len(out))]
        elif op == "i":
            out.insert(rng.randrange(len(out) + 1), rng.choice(VOCAB))
    return out


def main():
    rng = random.Random(20201)
    pairs = [
        (["the", "cat", "sat", "down"], ["the", "cat", "lay", "down"]),
        (["the", "cat", "sat"], ["the", "cat", "sat"]),
        (["the", "cat", "sat"], ["the", "cat", "jumped"]),
        (["hello"], ["goodbye", "now"]),
        (["i"], ["i", "can", "'", "t", "wait", "."]),
    ]
    while len(pairs) < 50:
        ref = [rng.choice(VOCAB) for _ in range(rng.randint(1, 12))]
        pairs.append((mutate(rng, ref), ref))

    fixtures = []
    for cand, ref in pairs:
        fixtures.append({
            "candidate": cand,
            "reference": ref,
            "bleu4": bleu(cand, ref),
            "rouge_l_f1": rouge_l(cand, ref),
        })
    print(json.dumps({"pairs": fixtures}, indent=1))


if __name__ == "__main__":
    main()
