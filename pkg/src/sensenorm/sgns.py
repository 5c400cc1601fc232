"""Skip-gram with negative sampling over sentence streams.

Follows the canonical reference trainer: vocabulary sorted by frequency,
input vectors initialized uniformly in [-0.5/dim, 0.5/dim) and output
vectors at zero, frequency^0.75 negative sampling, per-center window
shrink, aggressive-subsampling keep probabilities, and a learning rate
decaying linearly over all epochs to 1e-4 of its initial value.  With
``workers=1`` the result is bit-reproducible for a fixed seed; with more
workers sentence shards race on the shared matrices and the result is
merely statistically stable.
"""

from __future__ import annotations

import concurrent.futures
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingMatrix
from .kernels.sgns import sgns_sentence

MAX_SENTENCE_LEN = 1000
NEG_POWER = 0.75
LR_FLOOR_FACTOR = 1e-4


@dataclass(frozen=True)
class SgnsConfig:
    dim: int = 300
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    min_count: int = 1
    subsample_threshold: float = 1e-3
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("dim", "window", "negatives", "epochs", "min_count", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.initial_lr <= 0:
            raise ValueError("initial_lr must be positive")
        if self.subsample_threshold < 0:
            raise ValueError("subsample_threshold must be non-negative")


@dataclass
class SgnsReport:
    epoch_losses: list[float]
    n_pairs_per_epoch: list[int]


def _build_vocab(sentences, min_count):
    counts = Counter()
    for sent in sentences:
        counts.update(sent)
    tokens = sorted((t for t, c in counts.items() if c >= min_count),
                    key=lambda t: (-counts[t], t))
    if len(tokens) < 2:
        raise ValueError("stream too small: need >= 2 distinct tokens meeting min_count")
    return tokens, counts


def _keep_probs(tokens, counts, threshold, total):
    keep = np.ones(len(tokens))
    if threshold <= 0:
        return keep
    tn = threshold * total
    for i, tok in enumerate(tokens):
        f = counts[tok]
        ran = (math.sqrt(f / tn) + 1.0) * tn / f
        keep[i] = min(1.0, ran)
    return keep


def _negative_cumulative(tokens, counts):
    pow_freq = np.array([counts[t] for t in tokens], dtype=np.float64) ** NEG_POWER
    cum = np.cumsum(pow_freq)
    cum /= cum[-1]
    cum[-1] = 1.0
    return cum


def _encode_sentences(sentences, token_to_id):
    encoded = []
    for sent in sentences:
        ids = [token_to_id[t] for t in sent if t in token_to_id]
        for start in range(0, len(ids), MAX_SENTENCE_LEN):
            block = ids[start:start + MAX_SENTENCE_LEN]
            if len(block) >= 2:
                encoded.append(np.asarray(block, dtype=np.int64))
    return encoded


def _alpha_at(initial_lr, words_done, total_words):
    alpha = initial_lr * (1.0 - words_done / (total_words + 1.0))
    return max(alpha, initial_lr * LR_FLOOR_FACTOR)


def _run_shard(syn0, syn1, encoded, keep_prob, neg_cum, cfg, rng, total_words,
               words_done_start, progress_step):
    words_done = words_done_start
    loss = 0.0
    n_terms = 0
    draw_block = 2 * cfg.window * cfg.negatives
    for sent in encoded:
        length = len(sent)
        sub_u = rng.random(length)
        shrink = rng.integers(0, cfg.window, size=length)
        neg_u = rng.random(length * draw_block)
        alpha = _alpha_at(cfg.initial_lr, words_done, total_words)
        sent_loss, sent_terms = sgns_sentence(
            syn0, syn1, sent, keep_prob, sub_u, shrink, neg_u, neg_cum,
            cfg.window, cfg.negatives, alpha)
        loss += sent_loss
        n_terms += sent_terms
        words_done += length * progress_step
    return loss, n_terms, words_done


def train_sgns(stream, cfg: SgnsConfig, with_report: bool = False):
    """Train embeddings over ``stream`` (a sequence of token-list sentences).

    Returns the input-side matrix, covering exactly the tokens with
    frequency >= ``cfg.min_count``; with ``with_report=True`` also returns
    per-epoch mean pair losses.
    """
    sentences = [list(s) for s in stream]
    tokens, counts = _build_vocab(sentences, cfg.min_count)
    token_to_id = {t: i for i, t in enumerate(tokens)}
    total = sum(counts[t] for t in tokens)

    keep_prob = _keep_probs(tokens, counts, cfg.subsample_threshold, total)
    neg_cum = _negative_cumulative(tokens, counts)
    encoded = _encode_sentences(sentences, token_to_id)
    if not encoded:
        raise ValueError("stream too small: no sentence has 2 in-vocabulary tokens")

    rng = np.random.default_rng(cfg.seed)
    syn0 = rng.uniform(-0.5 / cfg.dim, 0.5 / cfg.dim, (len(tokens), cfg.dim))
    syn1 = np.zeros((len(tokens), cfg.dim))
    total_words = cfg.epochs * total

    report = SgnsReport(epoch_losses=[], n_pairs_per_epoch=[])
    if cfg.workers == 1:
        words_done = 0
        for _ in range(cfg.epochs):
            loss, n_terms, words_done = _run_shard(
                syn0, syn1, encoded, keep_prob, neg_cum, cfg, rng,
                total_words, words_done, progress_step=1)
            report.epoch_losses.append(loss / max(n_terms, 1))
            report.n_pairs_per_epoch.append(n_terms)
    else:
        shards = [encoded[w::cfg.workers] for w in range(cfg.workers)]
        child_rngs = rng.spawn(cfg.workers)
        shard_done = [0] * cfg.workers
        with concurrent.futures.ThreadPoolExecutor(cfg.workers) as pool:
            for _ in range(cfg.epochs):
                futures = [
                    pool.submit(_run_shard, syn0, syn1, shards[w], keep_prob,
                                neg_cum, cfg, child_rngs[w], total_words,
                                shard_done[w], cfg.workers)
                    for w in range(cfg.workers)
                ]
                losses, terms = 0.0, 0
                for w, fut in enumerate(futures):
                    loss, n_terms, done = fut.result()
                    losses += loss
                    terms += n_terms
                    shard_done[w] = done
                report.epoch_losses.append(losses / max(terms, 1))
                report.n_pairs_per_epoch.append(terms)

    emb = EmbeddingMatrix(tokens, syn0)
    return (emb, report) if with_report else emb


def sgns_pair_objective(target, context, label):
    """Loss and exact gradients for one (target, context, +-1 label) sample.

    loss = -log(sigmoid(label * target . context)).
    """
    target = np.asarray(target, dtype=np.float64)
    context = np.asarray(context, dtype=np.float64)
    if target.shape != context.shape:
        raise ValueError("target and context must share a dimension")
    if label not in (1, -1):
        raise ValueError("label must be +1 or -1")
    margin = label * float(target @ context)
    # log(1 + exp(-m)) evaluated stably on either side
    if margin >= 0:
        loss = math.log1p(math.exp(-margin))
    else:
        loss = -margin + math.log1p(math.exp(margin))
    coeff = -label / (1.0 + math.exp(margin))
    return loss, coeff * context, coeff * target
