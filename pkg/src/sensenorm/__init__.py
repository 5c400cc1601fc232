"""Toolkit for static sense embeddings and the norm/frequency law.

Trains sense embeddings (SGNS, GloVe) over sense-annotated token streams,
generates synthetic corpora from a log-linear random-walk model with known
ground-truth vectors, measures the relationship between log sense frequency
and squared vector norm, and applies that norm as a feature for
most-frequent-sense prediction, Word-in-Context, and WSD.
"""

__version__ = "0.1.0"


class SensenormError(Exception):
    """Base class for errors raised by this package."""
