"""Most-frequent-sense prediction by vector norm, and its evaluation.

The predictor picks the candidate sense with the largest squared norm; the
evaluation compares that pick against the corpus-frequency argmax over
either all polysemous (lemma, pos) entries or the polysemous-noun subset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import SensenormError
from .corpus import Corpus, SenseInventory, build_inventory, build_vocab, gold_mfs
from .embeddings import EmbeddingMatrix

ALL_WORDS = "ALL_WORDS"
NOUN_SAMPLE = "NOUN_SAMPLE"


class UnknownWordError(SensenormError):
    """(lemma, pos) has no inventory entry."""


class NoEmbeddedCandidateError(SensenormError):
    """The inventory entry exists but none of its senses has a vector."""


@dataclass(frozen=True)
class MfsEvalConfig:
    subset: str = ALL_WORDS
    noun_sample_min_freq: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.subset not in (ALL_WORDS, NOUN_SAMPLE):
            raise ValueError(f"subset must be {ALL_WORDS} or {NOUN_SAMPLE}")
        if self.noun_sample_min_freq < 1:
            raise ValueError("noun_sample_min_freq must be >= 1")


def predict_mfs(lemma: str, pos: str, inventory: SenseInventory,
                emb: EmbeddingMatrix) -> str:
    """Candidate sense with the largest squared norm (ties: lexicographic).

    Candidates without a vector are skipped.
    """
    key = (lemma, pos)
    if key not in inventory:
        raise UnknownWordError(f"no inventory entry for {key}")
    best = None
    best_norm = -1.0
    for sense in inventory[key]:
        vec = emb.get(sense)
        if vec is None:
            continue
        sq = float(vec @ vec)
        if sq > best_norm:
            best, best_norm = sense, sq
    if best is None:
        raise NoEmbeddedCandidateError(f"no candidate of {key} has a vector")
    return best


@dataclass
class WordRecord:
    lemma: str
    pos: str
    gold: str
    predicted: str | None
    correct: bool
    gold_tied: bool


@dataclass
class MfsResult:
    subset: str
    accuracy: float
    n_evaluated: int
    n_excluded: int
    n_gold_ties: int
    per_pos: dict[str, tuple[int, int]]
    records: list[WordRecord] = field(repr=False)

    def to_json_dict(self):
        return {
            "subset": self.subset,
            "accuracy": self.accuracy,
            "n_evaluated": self.n_evaluated,
            "n_excluded": self.n_excluded,
            "n_gold_ties": self.n_gold_ties,
            "per_pos": {
                pos: {"correct": c, "total": t, "accuracy": c / t}
                for pos, (c, t) in sorted(self.per_pos.items())
            },
        }


def _eval_keys(inventory: SenseInventory, sense_freq: dict[str, int],
               cfg: MfsEvalConfig) -> list[tuple[str, str]]:
    keys = sorted(inventory.ambiguous_entries())
    if cfg.subset == NOUN_SAMPLE:
        keys = [
            (lemma, pos) for lemma, pos in keys
            if pos == "NOUN"
            and sum(sense_freq.get(s, 0) for s in inventory[(lemma, pos)])
            >= cfg.noun_sample_min_freq
        ]
    return keys


def evaluate_mfs(corpus: Corpus, inventory: SenseInventory,
                 emb: EmbeddingMatrix, cfg: MfsEvalConfig) -> MfsResult:
    """Accuracy of the norm-argmax prediction against corpus gold MFS.

    Words where no candidate sense is embedded are excluded from the
    denominator and reported separately.
    """
    vocab = build_vocab(corpus)
    gold = gold_mfs(corpus, inventory, vocab)
    keys = _eval_keys(inventory, vocab.sense_freq, cfg)
    if not keys:
        raise ValueError("evaluation set is empty")

    records = []
    per_pos: dict[str, list[int]] = {}
    excluded = 0
    ties = 0
    correct_total = 0
    evaluated = 0
    for lemma, pos in keys:
        entry = gold[(lemma, pos)]
        if entry.tied:
            ties += 1
        try:
            predicted = predict_mfs(lemma, pos, inventory, emb)
        except NoEmbeddedCandidateError:
            excluded += 1
            records.append(WordRecord(lemma, pos, entry.sense, None, False, entry.tied))
            continue
        correct = predicted == entry.sense
        evaluated += 1
        correct_total += int(correct)
        bucket = per_pos.setdefault(pos, [0, 0])
        bucket[0] += int(correct)
        bucket[1] += 1
        records.append(WordRecord(lemma, pos, entry.sense, predicted, correct,
                                  entry.tied))
    if evaluated == 0:
        raise ValueError("no evaluable words: all candidates lack vectors")
    return MfsResult(
        subset=cfg.subset,
        accuracy=correct_total / evaluated,
        n_evaluated=evaluated,
        n_excluded=excluded,
        n_gold_ties=ties,
        per_pos={pos: (c, t) for pos, (c, t) in per_pos.items()},
        records=records,
    )


@dataclass
class RandomBaselineResult:
    mean_accuracy: float
    std_accuracy: float
    analytic_expectation: float
    n_trials: int
    n_words: int

    def to_json_dict(self):
        return {
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "analytic_expectation": self.analytic_expectation,
            "n_trials": self.n_trials,
            "n_words": self.n_words,
        }


def random_baseline(corpus: Corpus, inventory: SenseInventory,
                    cfg: MfsEvalConfig, trials: int = 100) -> RandomBaselineResult:
    """Uniform-choice baseline over the same evaluation set as evaluate_mfs.

    Protocol: for every word, pick one candidate sense uniformly at random
    and score it against the tie-broken gold; repeat over ``trials`` seeds.
    The analytic expectation is the mean of 1/n_candidates over words.
    """
    vocab = build_vocab(corpus)
    gold = gold_mfs(corpus, inventory, vocab)
    keys = _eval_keys(inventory, vocab.sense_freq, cfg)
    if not keys:
        raise ValueError("evaluation set is empty")
    candidates = [inventory[key] for key in keys]
    gold_idx = np.array([
        candidates[i].index(gold[key].sense) for i, key in enumerate(keys)
    ])
    sizes = np.array([len(c) for c in candidates])

    rng = np.random.default_rng(cfg.seed)
    accs = np.empty(trials)
    for t in range(trials):
        picks = rng.integers(0, sizes)
        accs[t] = float(np.mean(picks == gold_idx))
    return RandomBaselineResult(
        mean_accuracy=float(accs.mean()),
        std_accuracy=float(accs.std()),
        analytic_expectation=float(np.mean(1.0 / sizes)),
        n_trials=trials,
        n_words=len(keys),
    )


def build_eval_inputs(corpus: Corpus):
    """Convenience: (inventory, vocab, gold) straight from a corpus."""
    inventory = build_inventory(corpus)
    vocab = build_vocab(corpus)
    return inventory, vocab, gold_mfs(corpus, inventory, vocab)
