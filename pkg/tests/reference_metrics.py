"""Plain loop-based caption-metric oracles.

Written directly from the metric definitions and kept deliberately naive —
dicts, explicit loops, no shared helpers with the package — so they can
serve as an independent cross-check for knight.metrics.

All functions take pairs: list of (candidate_tokens, [reference_tokens...]).
"""

import math


def _ngrams(tokens, n):
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def _count(items):
    out = {}
    for item in items:
        out[item] = out.get(item, 0) + 1
    return out


def ref_bleu(pairs, n):
    """Corpus BLEU-n: pooled clipped precisions, geometric mean, brevity
    penalty from closest reference lengths (ties to shorter)."""
    clipped_total = [0] * n
    cand_total = [0] * n
    c_len = 0
    r_len = 0
    for cand, refs in pairs:
        c_len += len(cand)
        best_diff = None
        best_len = None
        for ref in refs:
            diff = abs(len(ref) - len(cand))
            if best_diff is None or diff < best_diff or (diff == best_diff and len(ref) < best_len):
                best_diff = diff
                best_len = len(ref)
        r_len += best_len
        for order in range(1, n + 1):
            cand_counts = _count(_ngrams(cand, order))
            max_ref = {}
            for ref in refs:
                for gram, cnt in _count(_ngrams(ref, order)).items():
                    if cnt > max_ref.get(gram, 0):
                        max_ref[gram] = cnt
            for gram, cnt in cand_counts.items():
                clipped_total[order - 1] += min(cnt, max_ref.get(gram, 0))
            cand_total[order - 1] += len(_ngrams(cand, order))
    if c_len == 0:
        return 0.0
    log_sum = 0.0
    for i in range(n):
        if cand_total[i] == 0 or clipped_total[i] == 0:
            return 0.0
        log_sum += math.log(clipped_total[i] / cand_total[i]) / n
    bp = 1.0 if c_len > r_len else math.exp(1.0 - r_len / c_len)
    return bp * math.exp(log_sum)


def _lcs(a, b):
    rows = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                rows[i][j] = rows[i - 1][j - 1] + 1
            else:
                rows[i][j] = max(rows[i - 1][j], rows[i][j - 1])
    return rows[len(a)][len(b)]


def ref_rouge_l(pairs, beta=1.2):
    """Mean over pairs of (max over references) LCS F-score."""
    total = 0.0
    for cand, refs in pairs:
        best = 0.0
        for ref in refs:
            lcs = _lcs(cand, ref)
            if lcs == 0:
                continue
            p = lcs / len(cand)
            r = lcs / len(ref)
            f = (1 + beta * beta) * p * r / (r + beta * beta * p)
            if f > best:
                best = f
        total += best
    return total / len(pairs)


def ref_cider_d(pairs, sigma=6.0):
    """CIDEr-D: tf-idf n-gram cosine (n=1..4) with count clipping and a
    Gaussian length penalty, averaged over references and n, times 10."""
    big_n = len(pairs)
    df = [{} for _ in range(4)]
    for _, refs in pairs:
        for order in range(1, 5):
            seen = set()
            for ref in refs:
                seen.update(_ngrams(ref, order))
            for gram in seen:
                df[order - 1][gram] = df[order - 1].get(gram, 0) + 1

    def tfidf(tokens, order):
        vec = {}
        for gram, cnt in _count(_ngrams(tokens, order)).items():
            idf = math.log(big_n / max(1, df[order - 1].get(gram, 0)))
            vec[gram] = cnt * idf
        return vec

    total = 0.0
    for cand, refs in pairs:
        per_n = [0.0] * 4
        for ref in refs:
            penalty = math.exp(-((len(cand) - len(ref)) ** 2) / (2 * sigma * sigma))
            for order in range(1, 5):
                h = tfidf(cand, order)
                r = tfidf(ref, order)
                num = 0.0
                for gram, h_val in h.items():
                    r_val = r.get(gram, 0.0)
                    num += min(h_val, r_val) * r_val
                norm_h = math.sqrt(sum(v * v for v in h.values()))
                norm_r = math.sqrt(sum(v * v for v in r.values()))
                if norm_h > 0 and norm_r > 0:
                    per_n[order - 1] += penalty * num / (norm_h * norm_r)
        total += 10.0 * sum(per_n) / 4.0 / len(refs)
    return total / big_n
