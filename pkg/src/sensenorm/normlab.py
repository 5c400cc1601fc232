"""Diagnostics tying vector geometry to corpus frequency.

Three analyses over any embedding matrix plus a frequency table: partition
sums over random unit contexts (self-normalization), the correlation of
log frequency with squared norm, and the per-frequency-bin fraction of
ambiguous words whose top sense out-norms the runner-up sense.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .corpus import SenseInventory
from .embeddings import EmbeddingMatrix

# Direct exp would overflow past this dot product; the log-sum-exp shift
# always runs, this only decides the report flag.
_EXP_LIMIT = 709.0
_CONTEXT_CHUNK = 256


def sample_unit_sphere(n: int, dim: int, rng) -> np.ndarray:
    mat = rng.standard_normal((n, dim))
    return mat / np.linalg.norm(mat, axis=1, keepdims=True)


def log_partition_values(emb: EmbeddingMatrix, contexts: np.ndarray) -> tuple[np.ndarray, bool]:
    """log Z_c for each given context row, by max-shifted log-sum-exp.

    Returns the log values and whether direct summation would have
    overflowed (i.e. the shift was actually needed).
    """
    contexts = np.atleast_2d(np.asarray(contexts, dtype=np.float64))
    dots = contexts @ emb.vectors.T
    mx = dots.max(axis=1, keepdims=True)
    log_z = mx[:, 0] + np.log(np.exp(dots - mx).sum(axis=1))
    shift_needed = bool(mx.max() > _EXP_LIMIT or log_z.max() > _EXP_LIMIT)
    return log_z, shift_needed


def partition_values(emb: EmbeddingMatrix, contexts: np.ndarray) -> tuple[np.ndarray, bool]:
    """Z_c per context row (re-exponentiated log-sum-exp totals)."""
    log_z, shift_needed = log_partition_values(emb, contexts)
    return np.exp(log_z), shift_needed


@dataclass
class PartitionReport:
    samples: np.ndarray
    mean: float
    coefficient_of_variation: float
    hist_counts: np.ndarray
    hist_edges: np.ndarray
    shift_needed: bool
    context_scale: float

    def to_json_dict(self):
        return {
            "n_contexts": len(self.samples),
            "mean": self.mean,
            "coefficient_of_variation": self.coefficient_of_variation,
            "shift_needed": self.shift_needed,
            "context_scale": self.context_scale,
            "samples": [float(z) for z in self.samples],
            "histogram": {
                "normalized_by_mean": True,
                "edges": [float(e) for e in self.hist_edges],
                "counts": [int(c) for c in self.hist_counts],
            },
        }

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_left", "bin_right", "count"])
            for left, right, count in zip(self.hist_edges[:-1], self.hist_edges[1:],
                                          self.hist_counts):
                writer.writerow([repr(float(left)), repr(float(right)), int(count)])


def partition_samples(emb: EmbeddingMatrix, n: int = 1000, seed: int = 0,
                      bins: int = 50, context_scale: float = 1.0) -> PartitionReport:
    """Z_c = sum over keys of exp(c . v) for n random unit-sphere contexts.

    Contexts are drawn per-sample from independent child generators derived
    from (seed, index), so the sample list does not depend on evaluation
    order.  Each Z_c is computed by max-shifted log-sum-exp and then
    re-exponentiated.
    """
    if len(emb) == 0:
        raise ValueError("empty embedding matrix")
    if n < 1:
        raise ValueError("need at least one context sample")
    seeds = np.random.SeedSequence(seed).spawn(n)
    log_samples = np.empty(n)
    shift_needed = False
    for start in range(0, n, _CONTEXT_CHUNK):
        stop = min(start + _CONTEXT_CHUNK, n)
        contexts = np.vstack([
            sample_unit_sphere(1, emb.dim, np.random.default_rng(seeds[i]))
            for i in range(start, stop)
        ]) * context_scale
        log_samples[start:stop], shifted = log_partition_values(emb, contexts)
        shift_needed = shift_needed or shifted
    # mean normalization happens in log space so the histogram and the
    # coefficient of variation stay finite even when Z itself overflows
    mx = log_samples.max()
    log_mean = mx + math.log(np.exp(log_samples - mx).mean())
    normalized = np.exp(log_samples - log_mean)
    cv = float(normalized.std())
    counts, edges = np.histogram(normalized, bins=bins)
    with np.errstate(over="ignore"):  # raw Z may exceed the float range
        samples = np.exp(log_samples)
        mean = float(np.exp(log_mean))
    return PartitionReport(
        samples=samples,
        mean=mean,
        coefficient_of_variation=cv,
        hist_counts=counts,
        hist_edges=edges,
        shift_needed=shift_needed,
        context_scale=context_scale,
    )


@dataclass
class CorrelationReport:
    keys: list[str]
    log_freq: np.ndarray
    sq_norm: np.ndarray
    pearson_rho: float
    fit_slope: float
    fit_intercept: float
    min_freq: int

    @property
    def n_points(self) -> int:
        return len(self.keys)

    def to_json_dict(self):
        return {
            "n_points": self.n_points,
            "pearson_rho": self.pearson_rho,
            "fit_slope": self.fit_slope,
            "fit_intercept": self.fit_intercept,
            "min_freq": self.min_freq,
        }

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["key", "log_freq", "squared_norm"])
            for key, lf, sn in zip(self.keys, self.log_freq, self.sq_norm):
                writer.writerow([key, repr(float(lf)), repr(float(sn))])


def fit_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Ordinary least squares of y on x: (slope, intercept)."""
    xm = x.mean()
    ym = y.mean()
    dx = x - xm
    var = float(dx @ dx)
    if var == 0.0:
        raise ValueError("x values are constant; no line fit")
    slope = float(dx @ (y - ym)) / var
    return slope, ym - slope * xm


def norm_freq_correlation(emb: EmbeddingMatrix, freqs: dict[str, int],
                          min_freq: int = 1) -> CorrelationReport:
    """Pearson correlation and line fit of squared norm against log count."""
    keys = sorted(k for k, f in freqs.items() if f >= min_freq and k in emb)
    if len(keys) < 2:
        raise ValueError("need at least 2 keys present in both inputs")
    log_freq = np.log(np.array([freqs[k] for k in keys], dtype=np.float64))
    sq_norm = np.array([emb.squared_norm(k) for k in keys])
    if sq_norm.std() == 0.0:
        rho = 0.0  # constant norms carry no frequency signal
    else:
        rho = float(np.corrcoef(log_freq, sq_norm)[0, 1])
    slope, intercept = fit_line(log_freq, sq_norm)
    return CorrelationReport(
        keys=keys,
        log_freq=log_freq,
        sq_norm=sq_norm,
        pearson_rho=rho,
        fit_slope=slope,
        fit_intercept=intercept,
        min_freq=min_freq,
    )


@dataclass
class FreqBin:
    max_freq: int
    min_freq: int
    word_count: int
    alpha: int

    @property
    def ratio(self) -> float:
        return self.alpha / self.word_count


@dataclass
class BinReport:
    bins: list[FreqBin]
    excluded: int
    n_ambiguous: int

    @property
    def overall_alpha(self) -> int:
        return sum(b.alpha for b in self.bins)

    @property
    def overall_ratio(self) -> float:
        counted = sum(b.word_count for b in self.bins)
        return self.overall_alpha / counted

    def to_json_dict(self):
        return {
            "n_ambiguous": self.n_ambiguous,
            "excluded": self.excluded,
            "overall_alpha": self.overall_alpha,
            "overall_ratio": self.overall_ratio,
            "bins": [
                {
                    "bin": i + 1,
                    "max_freq": b.max_freq,
                    "min_freq": b.min_freq,
                    "word_count": b.word_count,
                    "alpha": b.alpha,
                    "ratio": b.ratio,
                }
                for i, b in enumerate(self.bins)
            ],
        }

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin", "max_freq", "min_freq", "word_count",
                             "alpha", "ratio"])
            for i, b in enumerate(self.bins, start=1):
                writer.writerow([i, b.max_freq, b.min_freq, b.word_count,
                                 b.alpha, repr(b.ratio)])


def _top_two_senses(senses, sense_freq):
    ranked = sorted(senses, key=lambda s: (-sense_freq.get(s, 0), s))
    return ranked[0], ranked[1]


def bin_analysis(inventory: SenseInventory, sense_freq: dict[str, int],
                 emb: EmbeddingMatrix, n_bins: int = 10) -> BinReport:
    """Frequency-bin trend of top-sense vs runner-up-sense norm dominance.

    Ambiguous words (>= 2 senses) are sorted by total annotated frequency,
    split into ``n_bins`` near-equal bins (larger bins first), and each word
    counts towards its bin's alpha when its most frequent sense has strictly
    larger norm than the next most frequent one.  Words whose top-two senses
    are not both embedded are excluded from binning but reported.
    """
    ambiguous = inventory.ambiguous_entries()
    eligible = []
    excluded = 0
    for (lemma, pos), senses in ambiguous.items():
        total = sum(sense_freq.get(s, 0) for s in senses)
        top, runner = _top_two_senses(senses, sense_freq)
        if top in emb and runner in emb:
            eligible.append((total, lemma, pos, top, runner))
        else:
            excluded += 1
    if len(eligible) < n_bins:
        raise ValueError(
            f"need at least {n_bins} ambiguous embedded words, have {len(eligible)}")

    eligible.sort(key=lambda rec: (-rec[0], rec[1], rec[2]))
    base, rem = divmod(len(eligible), n_bins)
    bins = []
    start = 0
    for b in range(n_bins):
        size = base + (1 if b < rem else 0)
        chunk = eligible[start:start + size]
        start += size
        alpha = 0
        for _, _, _, top, runner in chunk:
            if np.linalg.norm(emb[top]) > np.linalg.norm(emb[runner]):
                alpha += 1
        bins.append(FreqBin(
            max_freq=chunk[0][0],
            min_freq=chunk[-1][0],
            word_count=len(chunk),
            alpha=alpha,
        ))
    return BinReport(bins=bins, excluded=excluded, n_ambiguous=len(ambiguous))


def write_json_report(report, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
