"""Windowed co-occurrence counting and GloVe weighted-least-squares training.

Co-occurrence windows never cross sentence boundaries and each ordered pair
at distance k contributes 1/k.  Training runs AdaGrad over the non-zero
entries in a per-epoch shuffled order; the returned embedding is the sum of
focus and context vectors.
"""

from __future__ import annotations

import concurrent.futures
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingMatrix, format_floats
from .kernels.glove import glove_epoch


@dataclass(frozen=True)
class GloveConfig:
    dim: int = 300
    window: int = 10
    x_max: float = 100.0
    alpha: float = 0.75
    epochs: int = 30
    initial_lr: float = 0.05
    workers: int = 2
    seed: int = 0

    def __post_init__(self):
        for name in ("dim", "window", "epochs", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.x_max <= 0 or self.initial_lr <= 0:
            raise ValueError("x_max and initial_lr must be positive")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")


@dataclass
class CoocTable:
    """Sparse symmetric co-occurrence weights in COO layout.

    ``keys[i]`` is the token with row/column id ``i``; ids are assigned by
    decreasing stream frequency with lexicographic tie-break.
    """

    keys: list[str]
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    _key_ids: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if not (len(self.rows) == len(self.cols) == len(self.weights)):
            raise ValueError("rows, cols, weights must align")
        if len(self.weights) and (not np.all(np.isfinite(self.weights))
                                  or np.any(self.weights <= 0)):
            raise ValueError("weights must be positive and finite")
        self._key_ids = {k: i for i, k in enumerate(self.keys)}

    @property
    def nnz(self) -> int:
        return len(self.weights)

    def weight(self, focus: str, context: str) -> float:
        """Weight of one ordered pair (0.0 when the pair never co-occurs)."""
        i = self._key_ids.get(focus)
        j = self._key_ids.get(context)
        if i is None or j is None:
            return 0.0
        lo = np.searchsorted(self.rows, i, side="left")
        hi = np.searchsorted(self.rows, i, side="right")
        k = lo + np.searchsorted(self.cols[lo:hi], j, side="left")
        if k < hi and self.cols[k] == j:
            return float(self.weights[k])
        return 0.0

    def to_mapping(self) -> dict[tuple[str, str], float]:
        return {
            (self.keys[i], self.keys[j]): float(w)
            for i, j, w in zip(self.rows, self.cols, self.weights)
        }

    def total_mass(self) -> float:
        return float(self.weights.sum())


def build_cooc(stream, window: int) -> CoocTable:
    """Accumulate 1/distance weights for all ordered pairs within ``window``."""
    if window < 1:
        raise ValueError("window must be >= 1")
    sentences = [list(s) for s in stream]
    counts = Counter()
    for sent in sentences:
        counts.update(sent)
    if not counts:
        raise ValueError("empty stream")
    keys = sorted(counts, key=lambda t: (-counts[t], t))
    key_ids = {t: i for i, t in enumerate(keys)}
    n = len(keys)

    ids = np.concatenate([
        np.asarray([key_ids[t] for t in sent], dtype=np.int64)
        for sent in sentences
    ])
    sent_of = np.concatenate([
        np.full(len(sent), si, dtype=np.int64) for si, sent in enumerate(sentences)
    ])

    enc_parts = []
    w_parts = []
    for k in range(1, window + 1):
        if k >= len(ids):
            break
        same = sent_of[:-k] == sent_of[k:]
        left = ids[:-k][same]
        right = ids[k:][same]
        if len(left) == 0:
            continue
        enc_parts.append(left * n + right)
        enc_parts.append(right * n + left)
        w = np.full(2 * len(left), 1.0 / k)
        w_parts.append(w)
    if not enc_parts:
        return CoocTable(keys, np.empty(0, np.int64), np.empty(0, np.int64),
                         np.empty(0, np.float64))
    enc = np.concatenate(enc_parts)
    wts = np.concatenate(w_parts)
    uniq, inverse = np.unique(enc, return_inverse=True)
    agg = np.zeros(len(uniq))
    np.add.at(agg, inverse, wts)
    return CoocTable(keys, uniq // n, uniq % n, agg)


def write_cooc(table: CoocTable, path) -> None:
    entries = sorted(
        (table.keys[i], table.keys[j], w)
        for i, j, w in zip(table.rows, table.cols, table.weights)
    )
    with open(path, "w", encoding="utf-8") as fh:
        for focus, context, w in entries:
            fh.write(f"{focus}\t{context}\t{format_floats([w])}\n")


def read_cooc(path) -> CoocTable:
    pairs = {}
    order = Counter()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip() or line.startswith("#"):
                continue
            focus, context, w = line.rstrip("\n").split("\t")
            pairs[(focus, context)] = float(w)
            order[focus] += 1
    keys = sorted({k for pair in pairs for k in pair},
                  key=lambda t: (-order[t], t))
    key_ids = {t: i for i, t in enumerate(keys)}
    n = len(keys)
    enc = np.array([key_ids[a] * n + key_ids[b] for a, b in pairs], dtype=np.int64)
    wts = np.array(list(pairs.values()))
    srt = np.argsort(enc)
    return CoocTable(keys, enc[srt] // n, enc[srt] % n, wts[srt])


@dataclass
class GloveReport:
    epoch_losses: list[float]


def loss_weight(x, x_max: float, alpha: float):
    """GloVe weighting f(x) = min(1, (x/x_max)^alpha)."""
    return np.minimum(1.0, (np.asarray(x, dtype=np.float64) / x_max) ** alpha)


def train_glove(table: CoocTable, cfg: GloveConfig, with_report: bool = False):
    """Fit vectors to log co-occurrence weights; returns focus+context sums."""
    if table.nnz == 0:
        raise ValueError("empty co-occurrence table")
    n = len(table.keys)
    rng = np.random.default_rng(cfg.seed)
    w_focus = rng.uniform(-0.5 / cfg.dim, 0.5 / cfg.dim, (n, cfg.dim))
    w_ctx = rng.uniform(-0.5 / cfg.dim, 0.5 / cfg.dim, (n, cfg.dim))
    b_focus = np.zeros(n)
    b_ctx = np.zeros(n)
    sq_focus = np.ones((n, cfg.dim))
    sq_ctx = np.ones((n, cfg.dim))
    sq_bf = np.ones(n)
    sq_bc = np.ones(n)

    logx = np.log(table.weights)
    fweight = loss_weight(table.weights, cfg.x_max, cfg.alpha)
    args = (w_focus, w_ctx, b_focus, b_ctx, sq_focus, sq_ctx, sq_bf, sq_bc,
            table.rows, table.cols, logx, fweight)

    report = GloveReport(epoch_losses=[])
    if cfg.workers == 1:
        for _ in range(cfg.epochs):
            order = rng.permutation(table.nnz)
            report.epoch_losses.append(glove_epoch(*args, order, cfg.initial_lr))
    else:
        with concurrent.futures.ThreadPoolExecutor(cfg.workers) as pool:
            for _ in range(cfg.epochs):
                order = rng.permutation(table.nnz)
                shards = np.array_split(order, cfg.workers)
                futures = [pool.submit(glove_epoch, *args, shard, cfg.initial_lr)
                           for shard in shards]
                report.epoch_losses.append(sum(f.result() for f in futures))

    emb = EmbeddingMatrix(list(table.keys), w_focus + w_ctx)
    return (emb, report) if with_report else emb


def glove_pair_objective(wi, wj, bi, bj, xij, x_max: float = 100.0,
                         alpha: float = 0.75):
    """Loss and exact gradients for a single table entry.

    loss = f(x) * (wi . wj + bi + bj - log x)^2 with the standard cap
    f(x) = min(1, (x/x_max)^alpha).
    """
    wi = np.asarray(wi, dtype=np.float64)
    wj = np.asarray(wj, dtype=np.float64)
    if xij <= 0:
        raise ValueError("co-occurrence weight must be positive")
    f = float(loss_weight(xij, x_max, alpha))
    resid = float(wi @ wj + bi + bj - np.log(xij))
    loss = f * resid * resid
    common = 2.0 * f * resid
    return loss, common * wj, common * wi, common, common
