"""Corpus-level caption metrics: BLEU-1/4, ROUGE-L, CIDEr-D.

Definitions pinned here:
- BLEU: modified n-gram precisions pooled over the whole corpus, geometric
  mean, brevity penalty exp(1 - r/c) for c <= r where r sums each
  candidate's closest reference length (ties toward the shorter). No
  smoothing: a zero pooled precision zeroes the score.
- ROUGE-L: per pair, max over references of the LCS F-score with beta=1.2;
  corpus score is the mean over pairs.
- CIDEr-D: tf-idf n-gram vectors for n=1..4 with idf = log(N / max(1, df)),
  df counted once per pair whose reference set contains the n-gram;
  per-reference similarity clips candidate tf-idf at the reference's and
  applies a Gaussian length penalty (sigma=6); average over references and
  n, times 10; corpus score is the mean over pairs.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass

from .errors import EmptyEvalSet, MissingReference
from .io import load_candidates, load_references
from .tokenizer import tokenize

ROUGE_BETA = 1.2
CIDER_SIGMA = 6.0
CIDER_MAX_N = 4

METRIC_NAMES = ("bleu1", "bleu4", "rougeL", "cider")


@dataclass(frozen=True)
class EvalPair:
    id: int
    candidate: tuple[str, ...]
    references: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not self.references:
            raise MissingReference(self.id)


@dataclass(frozen=True)
class MetricReport:
    scores: dict[str, float]
    pairs: int

    def to_json(self) -> str:
        """Canonical serialization: sorted keys, scores rounded to 10 dp so
        the golden fixture stays byte-stable."""
        payload = {
            "pairs": self.pairs,
            "metrics": {k: round(v, 10) for k, v in sorted(self.scores.items())},
        }
        return json.dumps(payload, sort_keys=True)


def _ngram_counts(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(pairs: list[EvalPair], n: int) -> float:
    if not pairs:
        raise EmptyEvalSet("no pairs to evaluate")
    if not 1 <= n <= 4:
        raise ValueError(f"BLEU order must be in 1..4, got {n}")
    clipped = [0] * n
    total = [0] * n
    cand_len = 0
    ref_len = 0
    for pair in pairs:
        cand = pair.candidate
        cand_len += len(cand)
        # closest reference length; ties resolve to the shorter reference
        ref_len += min((abs(len(r) - len(cand)), len(r)) for r in pair.references)[1]
        for order in range(1, n + 1):
            counts = _ngram_counts(cand, order)
            max_ref: Counter = Counter()
            for ref in pair.references:
                for gram, cnt in _ngram_counts(ref, order).items():
                    if cnt > max_ref[gram]:
                        max_ref[gram] = cnt
            clipped[order - 1] += sum(min(cnt, max_ref[gram]) for gram, cnt in counts.items())
            total[order - 1] += max(len(cand) - order + 1, 0)
    if cand_len == 0:
        return 0.0
    log_precision = 0.0
    for i in range(n):
        if clipped[i] == 0 or total[i] == 0:
            return 0.0
        log_precision += math.log(clipped[i] / total[i]) / n
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_precision)


def _lcs_length(a, b) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            curr[j] = prev[j - 1] + 1 if x == y else max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(pairs: list[EvalPair]) -> float:
    if not pairs:
        raise EmptyEvalSet("no pairs to evaluate")
    beta_sq = ROUGE_BETA * ROUGE_BETA
    total = 0.0
    for pair in pairs:
        best = 0.0
        for ref in pair.references:
            lcs = _lcs_length(pair.candidate, ref)
            if lcs == 0:
                continue
            p = lcs / len(pair.candidate)
            r = lcs / len(ref)
            f = (1 + beta_sq) * p * r / (r + beta_sq * p)
            best = max(best, f)
        total += best
    return total / len(pairs)


def cider_d(pairs: list[EvalPair]) -> float:
    if not pairs:
        raise EmptyEvalSet("no pairs to evaluate")
    n_docs = len(pairs)
    doc_freq = [Counter() for _ in range(CIDER_MAX_N)]
    for pair in pairs:
        for order in range(1, CIDER_MAX_N + 1):
            grams = set()
            for ref in pair.references:
                grams.update(_ngram_counts(ref, order))
            doc_freq[order - 1].update(grams)

    def tfidf(tokens, order):
        vec = {
            gram: cnt * math.log(n_docs / max(1, doc_freq[order - 1][gram]))
            for gram, cnt in _ngram_counts(tokens, order).items()
        }
        norm = math.sqrt(sum(v * v for v in vec.values()))
        return vec, norm

    score = 0.0
    for pair in pairs:
        cand_vecs = [tfidf(pair.candidate, order) for order in range(1, CIDER_MAX_N + 1)]
        accum = 0.0
        for ref in pair.references:
            delta = len(pair.candidate) - len(ref)
            penalty = math.exp(-(delta * delta) / (2 * CIDER_SIGMA * CIDER_SIGMA))
            for order in range(1, CIDER_MAX_N + 1):
                h_vec, h_norm = cand_vecs[order - 1]
                r_vec, r_norm = tfidf(ref, order)
                if h_norm == 0 or r_norm == 0:
                    continue
                num = sum(min(h_val, r_vec.get(gram, 0.0)) * r_vec.get(gram, 0.0)
                          for gram, h_val in h_vec.items())
                accum += penalty * num / (h_norm * r_norm)
        score += 10.0 * accum / CIDER_MAX_N / len(pair.references)
    return score / n_docs


_DISPATCH = {
    "bleu1": lambda pairs: bleu(pairs, 1),
    "bleu4": lambda pairs: bleu(pairs, 4),
    "rougeL": rouge_l,
    "cider": cider_d,
}


def make_pairs(candidates: dict[int, str], references: dict[int, list[str]]) -> list[EvalPair]:
    """Join candidate and reference maps by id, tokenizing both sides."""
    if not candidates:
        raise EmptyEvalSet("no candidates to evaluate")
    pairs = []
    for pair_id in sorted(candidates):
        if pair_id not in references:
            raise MissingReference(pair_id)
        pairs.append(
            EvalPair(
                id=pair_id,
                candidate=tuple(tokenize(candidates[pair_id])),
                references=tuple(tuple(tokenize(r)) for r in references[pair_id]),
            )
        )
    return pairs


def evaluate_pairs(pairs: list[EvalPair], metrics=METRIC_NAMES) -> MetricReport:
    for name in metrics:
        if name not in _DISPATCH:
            raise ValueError(f"unknown metric {name!r}; expected one of {METRIC_NAMES}")
    return MetricReport(
        scores={name: float(_DISPATCH[name](pairs)) for name in metrics},
        pairs=len(pairs),
    )


def evaluate_corpus(candidates_path, references_path, metrics=METRIC_NAMES) -> MetricReport:
    pairs = make_pairs(load_candidates(candidates_path), load_references(references_path))
    return evaluate_pairs(pairs, metrics)
