"""Offline extraction of contextualized target-word vectors and pair scores."""

from .embed import EmbedJob, EmbedResult, apply_toklem, embed, resolve_layers
from .pairs import ScoreJob, ScoreResult, score_pairs
from .storefmt import write_store
from .uses_io import Use, parse_pairs, parse_uses

__version__ = "0.1.0"
