"""Run sentences through a masked language model and pool token vectors.

Each token's contextual vector is the mean of the model's last four hidden
layers at that token's word pieces, with the pieces themselves mean-pooled
(or just the first piece, behind a flag).  Exports are deterministic: the
model runs in eval mode with gradients disabled.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass

import numpy as np
import torch

from .corpusio import CorpusToken

log = logging.getLogger("ctxport")

MEAN_POOL = "mean"
FIRST_POOL = "first"


@dataclass
class ExportConfig:
    model: str = "bert-large-cased"
    layers: tuple[int, ...] = (-4, -3, -2, -1)
    subword_pooling: str = MEAN_POOL
    batch_size: int = 8
    max_length: int = 512
    revision: str | None = None

    def __post_init__(self):
        if not self.layers:
            raise ValueError("layers must be non-empty")
        if self.subword_pooling not in (MEAN_POOL, FIRST_POOL):
            raise ValueError(f"unknown subword_pooling {self.subword_pooling!r}")
        if self.batch_size < 1 or self.max_length < 8:
            raise ValueError("invalid batch_size or max_length")


class Exporter:
    """Loads the model once and pools per-token vectors on demand."""

    def __init__(self, cfg: ExportConfig):
        from transformers import AutoModel, AutoTokenizer

        self.cfg = cfg
        self.tokenizer = AutoTokenizer.from_pretrained(
            cfg.model, revision=cfg.revision)
        if not self.tokenizer.is_fast:
            raise ValueError("a fast tokenizer is required for word alignment")
        self.model = AutoModel.from_pretrained(cfg.model, revision=cfg.revision)
        self.model.eval()
        self.dim = int(self.model.config.hidden_size)

    def token_vectors(self, sentences: list[list[CorpusToken]]):
        """Yields (sentence_index, token_index, vector) for alignable tokens."""
        for start in range(0, len(sentences), self.cfg.batch_size):
            batch = sentences[start:start + self.cfg.batch_size]
            words = [[t.surface for t in sent] for sent in batch]
            enc = self.tokenizer(
                words, is_split_into_words=True, padding=True,
                truncation=True, max_length=self.cfg.max_length,
                return_tensors="pt")
            with torch.no_grad():
                out = self.model(**enc, output_hidden_states=True)
            stacked = torch.stack([out.hidden_states[i] for i in self.cfg.layers])
            layer_mean = stacked.mean(dim=0)  # (batch, seq, dim)
            for b, sent in enumerate(batch):
                word_ids = enc.word_ids(batch_index=b)
                positions: dict[int, list[int]] = {}
                for k, wid in enumerate(word_ids):
                    if wid is not None:
                        positions.setdefault(wid, []).append(k)
                for i in range(len(sent)):
                    pieces = positions.get(i)
                    if not pieces:
                        log.warning("sentence %d token %d (%r) not alignable; skipped",
                                    start + b, i, sent[i].surface)
                        continue
                    if self.cfg.subword_pooling == FIRST_POOL:
                        vec = layer_mean[b, pieces[0]]
                    else:
                        vec = layer_mean[b, pieces].mean(dim=0)
                    yield start + b, i, vec.numpy().astype(np.float64)


def export_context(sentences, cfg: ExportConfig, exporter: Exporter | None = None):
    """One contextual vector per token that carries an instance id."""
    exporter = exporter or Exporter(cfg)
    entries: dict[str, np.ndarray] = {}
    skipped = 0
    wanted = sum(1 for s in sentences for t in s if t.instance_id is not None)
    for si, ti, vec in exporter.token_vectors(sentences):
        token = sentences[si][ti]
        if token.instance_id is not None:
            entries[token.instance_id] = vec
    skipped = wanted - len(entries)
    return entries, exporter.dim, skipped


def export_static(sentences, cfg: ExportConfig, key_by: str = "word",
                  exporter: Exporter | None = None):
    """Static vectors: the mean of each key's occurrence vectors.

    ``key_by='word'`` averages over every occurrence of a surface form;
    ``key_by='sense'`` averages annotated occurrences per sense id.
    """
    if key_by not in ("word", "sense"):
        raise ValueError("key_by must be 'word' or 'sense'")
    exporter = exporter or Exporter(cfg)
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for si, ti, vec in exporter.token_vectors(sentences):
        token = sentences[si][ti]
        key = token.surface if key_by == "word" else token.sense_id
        if key is None:
            continue
        if key in sums:
            sums[key] += vec
            counts[key] += 1
        else:
            sums[key] = vec.copy()
            counts[key] = 1
    entries = {k: sums[k] / counts[k] for k in sums}
    return entries, exporter.dim, counts


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(cfg: ExportConfig, corpus_path, out_path, mode: str,
                   dim: int, count: int, manifest_path) -> None:
    payload = {
        "mode": mode,
        "model": cfg.model,
        "revision": cfg.revision,
        "layers": list(cfg.layers),
        "subword_pooling": cfg.subword_pooling,
        "corpus_sha256": _sha256(corpus_path),
        "output": str(out_path),
        "hidden_dim": dim,
        "entries": count,
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def store_comments(cfg: ExportConfig) -> list[str]:
    return [
        f"model: {cfg.model}",
        f"revision: {cfg.revision or 'default'}",
        f"layers: {','.join(str(i) for i in cfg.layers)}",
        f"subword_pooling: {cfg.subword_pooling}",
    ]
