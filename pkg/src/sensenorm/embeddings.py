"""Keyed dense vector matrices and the text vector-file format.

File format: header line ``<count> <dim>`` followed by one line per key,
``<key> <f1> ... <f_dim>``, space separated.  Floats are written with
shortest round-trip precision, so write -> read -> write is byte stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import SensenormError


class VectorFormatError(SensenormError):
    pass


@dataclass
class EmbeddingMatrix:
    keys: list[str]
    vectors: np.ndarray
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d array")
        if len(self.keys) != self.vectors.shape[0]:
            raise ValueError("one vector per key required")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("vectors must be finite")
        self._index = {k: i for i, k in enumerate(self.keys)}
        if len(self._index) != len(self.keys):
            raise ValueError("keys must be unique")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.keys)

    def __contains__(self, key):
        return key in self._index

    def __getitem__(self, key) -> np.ndarray:
        return self.vectors[self._index[key]]

    def get(self, key):
        i = self._index.get(key)
        return None if i is None else self.vectors[i]

    def squared_norms(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.vectors, self.vectors)

    def squared_norm(self, key) -> float:
        v = self[key]
        return float(v @ v)

    @classmethod
    def from_dict(cls, mapping: dict[str, np.ndarray]) -> "EmbeddingMatrix":
        keys = list(mapping)
        return cls(keys, np.array([mapping[k] for k in keys], dtype=np.float64))


def format_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def write_vectors(emb: EmbeddingMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(emb)} {emb.dim}\n")
        for key, vec in zip(emb.keys, emb.vectors):
            if any(ch.isspace() for ch in key):
                raise ValueError(f"key contains whitespace: {key!r}")
            fh.write(f"{key} {format_floats(vec)}\n")


def read_vectors(path) -> EmbeddingMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise VectorFormatError("expected header '<count> <dim>'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise VectorFormatError(f"bad header: {exc}") from exc
        keys = []
        vectors = np.empty((count, dim), dtype=np.float64)
        row = 0
        for line_no, line in enumerate(fh, start=2):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != dim + 1:
                raise VectorFormatError(
                    f"line {line_no}: expected {dim + 1} fields, got {len(parts)}"
                )
            if row >= count:
                raise VectorFormatError(f"line {line_no}: more rows than declared")
            keys.append(parts[0])
            vectors[row] = [float(x) for x in parts[1:]]
            row += 1
        if row != count:
            raise VectorFormatError(f"expected {count} rows, found {row}")
    return EmbeddingMatrix(keys, vectors)
