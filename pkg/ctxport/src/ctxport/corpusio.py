"""Readers and writers for the toolkit's text interchange formats.

These mirror the formats consumed and produced by the main toolkit:
the 4/5-column corpus TSV, the ``<count> <dim>`` embedding file, and the
``CTXSTORE 1 <count> <dim>`` contextual store.  Floats are written with
shortest round-trip precision.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CorpusToken:
    surface: str
    lemma: str
    pos: str
    sense_id: str | None = None
    instance_id: str | None = None


def read_corpus(path) -> list[list[CorpusToken]]:
    """Sentences of tokens from the corpus TSV (comments and blanks handled)."""
    sentences: list[list[CorpusToken]] = []
    current: list[CorpusToken] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if line.startswith("#"):
                continue
            if not line.strip():
                if current:
                    sentences.append(current)
                    current = []
                continue
            fields = line.split("\t")
            if len(fields) not in (4, 5):
                raise ValueError(
                    f"{path}: line {line_no}: expected 4 or 5 fields, got {len(fields)}")
            surface, lemma, pos, sense = fields[:4]
            instance = fields[4] if len(fields) == 5 and fields[4] != "-" else None
            current.append(CorpusToken(
                surface=surface, lemma=lemma, pos=pos,
                sense_id=None if sense == "-" else sense,
                instance_id=instance))
    if current:
        sentences.append(current)
    return sentences


def _fmt(vec) -> str:
    return " ".join(repr(float(x)) for x in vec)


def write_ctxstore(entries: dict, dim: int, path, comments=()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"CTXSTORE 1 {len(entries)} {dim}\n")
        for comment in comments:
            fh.write(f"# {comment}\n")
        for key, vec in entries.items():
            fh.write(f"{key} {_fmt(vec)}\n")


def write_embeddings(entries: dict, dim: int, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(entries)} {dim}\n")
        for key, vec in entries.items():
            fh.write(f"{key} {_fmt(vec)}\n")
