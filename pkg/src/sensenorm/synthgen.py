"""Synthetic sense-annotated corpora with known ground-truth vectors.

Sense vectors are drawn i.i.d. Gaussian; a context vector performs a
drifting walk on the unit sphere and emits one sense per step from the
exact softmax over context/sense dot products.  Because the emission model
is exact, the generated frequencies follow the log-linear law in
expectation, which makes these corpora a ground-truth oracle for the
norm/frequency diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Token
from .embeddings import EmbeddingMatrix, read_vectors, write_vectors
from .kernels.walk import walk_sample

DEFAULT_SENSES_PER_WORD = (0.45, 0.35, 0.20)

# The per-chunk draw interleaving (directions, then uniforms) is part of the
# random stream, so the chunk size must depend only on the parameters.
def _chunk_steps(n_senses: int) -> int:
    return max(64, min(8192, 2_000_000 // max(n_senses, 1)))


@dataclass(frozen=True)
class WalkParams:
    dim: int
    n_senses: int
    steps: int
    drift: float = 0.1
    vector_scale: float = 1.0
    senses_per_word: tuple[float, ...] = DEFAULT_SENSES_PER_WORD
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.n_senses < 1:
            raise ValueError("n_senses must be >= 1")
        if self.n_senses > 10_000:
            raise ValueError("n_senses above 10000 makes per-step softmax impractical")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 0.0 < self.drift <= 1.0:
            raise ValueError("drift must lie in (0, 1]")
        if self.vector_scale <= 0.0:
            raise ValueError("vector_scale must be positive")
        if not self.senses_per_word or any(w < 0 for w in self.senses_per_word) \
                or sum(self.senses_per_word) <= 0:
            raise ValueError("senses_per_word must be non-negative weights, not all zero")


@dataclass
class GroundTruth:
    sense_vectors: EmbeddingMatrix
    sense_to_word: dict[str, str]


def _label_width(n: int) -> int:
    return max(5, len(str(n - 1)))


def _assign_words(n_senses, weights, rng):
    """Greedily carve consecutive sense ids into words of 1..k_max senses."""
    probs = np.asarray(weights, dtype=np.float64)
    probs = probs / probs.sum()
    k_max = len(probs)
    width = _label_width(n_senses)
    sense_to_word = {}
    word_of_sense = np.empty(n_senses, dtype=np.int64)
    next_sense = 0
    word = 0
    while next_sense < n_senses:
        k = int(rng.choice(k_max, p=probs)) + 1
        k = min(k, n_senses - next_sense)
        for _ in range(k):
            sense_to_word[f"s{next_sense:0{width}d}"] = f"w{word:0{width}d}"
            word_of_sense[next_sense] = word
            next_sense += 1
        word += 1
    return sense_to_word, word_of_sense


def _unit_rows(mat):
    return mat / np.linalg.norm(mat, axis=1, keepdims=True)


def generate(params: WalkParams, sentence_len: int = 50) -> tuple[Corpus, GroundTruth]:
    """Run the walk for ``params.steps`` emissions and package them as a corpus.

    Deterministic for a fixed seed.  Tokens carry the owning word as surface
    and lemma, NOUN as PoS, and the emitted sense id.
    """
    if sentence_len < 1:
        raise ValueError("sentence_len must be >= 1")
    rng = np.random.default_rng(params.seed)
    vectors = rng.normal(0.0, params.vector_scale, (params.n_senses, params.dim))
    sense_to_word, word_of_sense = _assign_words(
        params.n_senses, params.senses_per_word, rng)

    c = _unit_rows(rng.standard_normal((1, params.dim)))[0]
    senses = np.empty(params.steps, dtype=np.int64)
    chunk = _chunk_steps(params.n_senses)
    done = 0
    while done < params.steps:
        m = min(chunk, params.steps - done)
        gauss = _unit_rows(rng.standard_normal((m, params.dim)))
        uniforms = rng.random(m)
        senses[done:done + m] = walk_sample(vectors, c, gauss, params.drift, uniforms)
        done += m

    width = _label_width(params.n_senses)
    sense_labels = [f"s{i:0{width}d}" for i in range(params.n_senses)]
    word_labels = [f"w{i:0{width}d}" for i in range(int(word_of_sense.max()) + 1)]

    sentences = []
    for start in range(0, params.steps, sentence_len):
        block = senses[start:start + sentence_len]
        sentences.append([
            Token(
                surface=word_labels[word_of_sense[s]],
                lemma=word_labels[word_of_sense[s]],
                pos="NOUN",
                sense_id=sense_labels[s],
            )
            for s in block
        ])
    corpus = Corpus(sentences)
    truth = GroundTruth(
        sense_vectors=EmbeddingMatrix(sense_labels, vectors),
        sense_to_word=sense_to_word,
    )
    return corpus, truth


def closed_form_logp(truth: GroundTruth, dim: int | None = None) -> dict[str, float]:
    """Model log-probability of each sense: squared norm over 2*dim, normalized.

    The normalizer is chosen so the probabilities sum to exactly one.
    """
    emb = truth.sense_vectors
    if dim is None:
        dim = emb.dim
    raw = emb.squared_norms() / (2.0 * dim)
    mx = raw.max()
    log_z = mx + np.log(np.exp(raw - mx).sum())
    return {key: float(r - log_z) for key, r in zip(emb.keys, raw)}


def write_ground_truth(truth: GroundTruth, vectors_path, mapping_path) -> None:
    write_vectors(truth.sense_vectors, vectors_path)
    with open(mapping_path, "w", encoding="utf-8") as fh:
        for sense in truth.sense_vectors.keys:
            fh.write(f"{sense}\t{truth.sense_to_word[sense]}\n")


def read_ground_truth(vectors_path, mapping_path) -> GroundTruth:
    vectors = read_vectors(vectors_path)
    mapping = {}
    with open(mapping_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            sense, word = line.rstrip("\n").split("\t")
            mapping[sense] = word
    return GroundTruth(sense_vectors=vectors, sense_to_word=mapping)
