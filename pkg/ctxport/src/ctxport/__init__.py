"""Contextual-embedding export for the sensenorm toolkit.

Feeds sense-annotated corpora through a pretrained masked language model
and writes the toolkit's ContextStore and embedding text files: per-token
contextual vectors (mean of the last four hidden layers, subwords pooled),
and static vectors obtained by averaging a word's or sense's occurrence
vectors over the corpus.
"""

__version__ = "0.1.0"
