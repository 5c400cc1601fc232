"""Skip-gram negative-sampling update loop for one sentence.

The caller pre-draws all randomness for the sentence (subsampling uniforms,
window shrinks, negative-sample uniforms) with fixed, data-independent
shapes, so the compiled and uncompiled paths consume the same stream and
produce the same parameters.  Negative samples are drawn by binary search
over the cumulative unigram^0.75 table; a draw that collides with the
positive target is skipped, not redrawn.
"""

import math

import numpy as np

from . import njit, numba_enabled


def _sgns_sentence_loop(syn0, syn1, sent, keep_prob, sub_u, shrink, neg_u,
                        neg_cum, window, negatives, alpha):
    dim = syn0.shape[1]
    n_vocab = neg_cum.shape[0]
    length = sent.shape[0]

    kept = np.empty(length, dtype=np.int64)
    n_kept = 0
    for i in range(length):
        w = sent[i]
        if keep_prob[w] >= 1.0 or sub_u[i] < keep_prob[w]:
            kept[n_kept] = w
            n_kept += 1

    grad_ctx = np.empty(dim)
    loss = 0.0
    n_terms = 0
    for pos in range(n_kept):
        center = kept[pos]
        reach = window - shrink[pos]
        for off in range(-reach, reach + 1):
            j = pos + off
            if off == 0 or j < 0 or j >= n_kept:
                continue
            ctx = kept[j]
            slot = off + window
            if off > 0:
                slot -= 1
            for k in range(dim):
                grad_ctx[k] = 0.0
            for neg in range(negatives + 1):
                if neg == 0:
                    target = center
                    label = 1.0
                else:
                    u = neg_u[(pos * 2 * window + slot) * negatives + neg - 1]
                    lo = 0
                    hi = n_vocab
                    while lo < hi:
                        mid = (lo + hi) // 2
                        if neg_cum[mid] <= u:
                            lo = mid + 1
                        else:
                            hi = mid
                    target = lo
                    if target >= n_vocab:
                        target = n_vocab - 1
                    if target == center:
                        continue
                    label = 0.0
                dot = 0.0
                for k in range(dim):
                    dot += syn0[ctx, k] * syn1[target, k]
                if dot > 30.0:
                    dot = 30.0
                elif dot < -30.0:
                    dot = -30.0
                sig = 1.0 / (1.0 + math.exp(-dot))
                if label > 0.5:
                    loss -= math.log(sig)
                else:
                    loss -= math.log(1.0 - sig)
                n_terms += 1
                g = (label - sig) * alpha
                for k in range(dim):
                    grad_ctx[k] += g * syn1[target, k]
                for k in range(dim):
                    syn1[target, k] += g * syn0[ctx, k]
            for k in range(dim):
                syn0[ctx, k] += grad_ctx[k]
    return loss, n_terms


_sgns_sentence_nb = njit(cache=True, nogil=True)(_sgns_sentence_loop)


def sgns_sentence(syn0, syn1, sent, keep_prob, sub_u, shrink, neg_u, neg_cum,
                  window, negatives, alpha):
    impl = _sgns_sentence_nb if numba_enabled() else _sgns_sentence_loop
    return impl(syn0, syn1, sent, keep_prob, sub_u, shrink, neg_u, neg_cum,
                window, negatives, alpha)
