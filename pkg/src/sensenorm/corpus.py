"""Sense-annotated corpora: parsing, vocabularies, inventories, gold MFS.

Corpus file format (UTF-8): one token per line as
``surface<TAB>lemma<TAB>pos<TAB>sense`` with an optional fifth
``instance_id`` column.  ``sense`` is ``-`` for unannotated tokens, a blank
line ends a sentence, and lines starting with ``#`` are comments.
"""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field

from . import SensenormError

COARSE_POS = ("NOUN", "VERB", "ADJ", "ADV", "OTHER")

# Finer tagsets (Penn treebank prefixes, WordNet single letters) collapse
# onto the coarse five-tag set used everywhere in this package.
_POS_TABLE = {
    "NOUN": "NOUN", "VERB": "VERB", "ADJ": "ADJ", "ADV": "ADV", "OTHER": "OTHER",
    "N": "NOUN", "V": "VERB", "A": "ADJ", "R": "ADV", "S": "ADJ",
    "n": "NOUN", "v": "VERB", "a": "ADJ", "r": "ADV", "s": "ADJ",
}
_POS_PREFIXES = (("NN", "NOUN"), ("VB", "VERB"), ("JJ", "ADJ"), ("RB", "ADV"))


def normalize_pos(tag: str) -> str:
    """Map a raw PoS tag onto the coarse tag set (unknown tags -> OTHER)."""
    if tag in _POS_TABLE:
        return _POS_TABLE[tag]
    for prefix, coarse in _POS_PREFIXES:
        if tag.startswith(prefix):
            return coarse
    return "OTHER"


class CorpusFormatError(SensenormError):
    """Malformed corpus input; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


def _check_field(name, value, line_no=None):
    if not value:
        raise CorpusFormatError(f"empty {name} field", line_no)
    if any(ch.isspace() for ch in value):
        raise CorpusFormatError(f"{name} contains whitespace: {value!r}", line_no)


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    pos: str
    sense_id: str | None = None
    instance_id: str | None = None

    def __post_init__(self):
        _check_field("surface", self.surface)
        _check_field("lemma", self.lemma)
        if self.pos not in COARSE_POS:
            raise ValueError(f"pos must be one of {COARSE_POS}, got {self.pos!r}")
        if self.sense_id is not None:
            _check_field("sense", self.sense_id)
        if self.instance_id is not None:
            _check_field("instance_id", self.instance_id)


@dataclass
class Corpus:
    """An ordered list of sentences, each a non-empty list of tokens."""

    sentences: list[list[Token]]

    def __post_init__(self):
        seen = set()
        for sent in self.sentences:
            if not sent:
                raise ValueError("corpus contains an empty sentence")
            for tok in sent:
                if tok.instance_id is not None:
                    if tok.instance_id in seen:
                        raise ValueError(f"duplicate instance_id {tok.instance_id!r}")
                    seen.add(tok.instance_id)

    def __len__(self):
        return len(self.sentences)

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    def tokens(self):
        for sent in self.sentences:
            yield from sent

    def word_stream(self) -> list[list[str]]:
        """Surface form of every token."""
        return [[t.surface for t in s] for s in self.sentences]

    def sense_stream(self) -> list[list[str]]:
        """Sense ids of annotated tokens only; drops unannotated positions."""
        out = []
        for sent in self.sentences:
            ids = [t.sense_id for t in sent if t.sense_id is not None]
            if ids:
                out.append(ids)
        return out

    def mixed_stream(self) -> list[list[str]]:
        """Sense id where annotated, surface form elsewhere (positions kept)."""
        return [
            [t.sense_id if t.sense_id is not None else t.surface for t in s]
            for s in self.sentences
        ]


def parse_corpus(stream) -> Corpus:
    """Parse the corpus file format from a text stream or string."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    sentences: list[list[Token]] = []
    current: list[Token] = []
    for line_no, raw in enumerate(stream, start=1):
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
            raise CorpusFormatError(
                f"expected 4 or 5 tab-separated fields, got {len(fields)}", line_no
            )
        surface, lemma, pos, sense = fields[:4]
        instance_id = fields[4] if len(fields) == 5 and fields[4] != "-" else None
        try:
            token = Token(
                surface=surface,
                lemma=lemma,
                pos=normalize_pos(pos),
                sense_id=None if sense == "-" else sense,
                instance_id=instance_id,
            )
        except ValueError as exc:
            raise CorpusFormatError(str(exc), line_no) from exc
        current.append(token)
    if current:
        sentences.append(current)
    try:
        return Corpus(sentences)
    except ValueError as exc:
        raise CorpusFormatError(str(exc)) from exc


def parse_corpus_file(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh)


def serialize_corpus(corpus: Corpus) -> str:
    lines = []
    for sent in corpus.sentences:
        for t in sent:
            fields = [t.surface, t.lemma, t.pos, t.sense_id or "-"]
            if t.instance_id is not None:
                fields.append(t.instance_id)
            lines.append("\t".join(fields))
        lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


def write_corpus_file(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_corpus(corpus))


@dataclass
class Vocab:
    """Frequency tables and contiguous id maps for words and senses.

    Ids are assigned by decreasing frequency with lexicographic tie-break,
    so they are deterministic for a given corpus.
    """

    word_freq: dict[str, int]
    sense_freq: dict[str, int]
    total_tokens: int
    word_ids: dict[str, int] = field(repr=False)
    sense_ids: dict[str, int] = field(repr=False)


def _id_map(freq: dict[str, int]) -> dict[str, int]:
    ordered = sorted(freq, key=lambda k: (-freq[k], k))
    return {key: i for i, key in enumerate(ordered)}


def build_vocab(corpus: Corpus) -> Vocab:
    """Count surface-form and sense frequencies over the whole corpus."""
    if len(corpus.sentences) == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    word_freq: Counter[str] = Counter()
    sense_freq: Counter[str] = Counter()
    total = 0
    for tok in corpus.tokens():
        word_freq[tok.surface] += 1
        total += 1
        if tok.sense_id is not None:
            sense_freq[tok.sense_id] += 1
    return Vocab(
        word_freq=dict(word_freq),
        sense_freq=dict(sense_freq),
        total_tokens=total,
        word_ids=_id_map(word_freq),
        sense_ids=_id_map(sense_freq),
    )


@dataclass
class SenseInventory:
    """(lemma, pos) -> lexicographically sorted list of candidate sense ids."""

    entries: dict[tuple[str, str], list[str]]

    def __contains__(self, key):
        return key in self.entries

    def __getitem__(self, key) -> list[str]:
        return self.entries[key]

    def get(self, key, default=None):
        return self.entries.get(key, default)

    def __len__(self):
        return len(self.entries)

    def ambiguous_entries(self) -> dict[tuple[str, str], list[str]]:
        return {k: v for k, v in self.entries.items() if len(v) >= 2}


def build_inventory(corpus: Corpus) -> SenseInventory:
    """Collect the distinct senses observed for each (lemma, pos)."""
    observed: dict[tuple[str, str], set[str]] = {}
    for tok in corpus.tokens():
        if tok.sense_id is None:
            continue
        observed.setdefault((tok.lemma, tok.pos), set()).add(tok.sense_id)
    if not observed:
        raise ValueError("corpus has no sense-annotated tokens")
    return SenseInventory({key: sorted(vals) for key, vals in observed.items()})


@dataclass(frozen=True)
class GoldMfs:
    sense: str
    tied: bool


def gold_mfs(corpus: Corpus, inventory: SenseInventory | None = None,
             vocab: Vocab | None = None) -> dict[tuple[str, str], GoldMfs]:
    """Most frequent sense per (lemma, pos), ties broken lexicographically.

    A tie between the top senses is flagged rather than hidden so that
    downstream accuracy numbers can report how many golds were tie-broken.
    """
    if inventory is None:
        inventory = build_inventory(corpus)
    if vocab is None:
        vocab = build_vocab(corpus)
    out = {}
    for key, senses in inventory.entries.items():
        best = min(senses, key=lambda s: (-vocab.sense_freq.get(s, 0), s))
        top = vocab.sense_freq.get(best, 0)
        tied = sum(1 for s in senses if vocab.sense_freq.get(s, 0) == top) > 1
        out[key] = GoldMfs(sense=best, tied=tied)
    return out
