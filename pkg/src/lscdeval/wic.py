"""Pair generation and graded word-in-context scoring.

Scores use a single internal orientation: similarity, larger = more
related.  Distances are negated (or, for cosine, converted to cosine
similarity) on entry, so downstream averaging never mixes signs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations, product
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataFormatError, DegenerateInputError, IngestionError
from .store import EmbeddingRecord, PoolingSpec, usage_vector
from .wug import (
    PAIR_ALL,
    PAIR_COMPARE,
    PAIR_EARLIER,
    PAIR_LATER,
    PAIR_TYPES,
    Usage,
    UsagePair,
    canonical_pair,
)

DISTANCE_METRICS = ("cosine", "euclidean", "manhattan")

SOURCE_EMBEDDING = "embedding-distance"
SOURCE_EXTERNAL = "external"


@dataclass(frozen=True, slots=True)
class PairScore:
    """Similarity score for one usage pair (larger = more related)."""

    pair: UsagePair
    score: float
    source: str

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValueError(f"non-finite score for pair {self.pair.key}")


@dataclass(frozen=True, slots=True)
class ThresholdSpec:
    """Three strictly increasing cut points on the similarity scale.

    ``discretize`` maps scores below t1 to 1, then one ordinal step per
    interval, with lower-inclusive boundaries.
    """

    t1: float
    t2: float
    t3: float

    def __post_init__(self):
        if not (self.t1 < self.t2 < self.t3):
            raise ConfigError(
                f"thresholds must be strictly increasing, got ({self.t1}, {self.t2}, {self.t3})"
            )


def generate_pairs(
    usages: Sequence[Usage],
    pair_type: str,
    max_pairs: int | None = None,
    seed: int = 0,
) -> list[UsagePair]:
    """Enumerate usage pairs of the given type, optionally subsampled.

    COMPARE yields all cross-grouping pairs, EARLIER/LATER the
    within-grouping pairs, ALL every unordered pair.  With ``max_pairs``
    set, a uniform sample without replacement is drawn with the seed.
    Output is canonically ordered and deduplicated; the full enumeration
    is deterministic regardless of input order.
    """
    if pair_type not in PAIR_TYPES:
        raise ConfigError(f"unknown pair type {pair_type!r}")
    by_id = {u.id: u for u in usages}
    lemmas = {u.lemma for u in by_id.values()}
    if len(lemmas) > 1:
        raise ConfigError(f"pair generation across lemmas: {sorted(lemmas)}")

    ids = sorted(by_id)
    if pair_type == PAIR_ALL:
        raw = combinations(ids, 2)
    elif pair_type == PAIR_COMPARE:
        earlier = [i for i in ids if by_id[i].grouping == 1]
        later = [i for i in ids if by_id[i].grouping == 2]
        raw = (canonical_pair(a, b) for a, b in product(earlier, later))
    else:
        grouping = 1 if pair_type == PAIR_EARLIER else 2
        members = [i for i in ids if by_id[i].grouping == grouping]
        raw = combinations(members, 2)

    pairs = sorted(set(raw))
    if max_pairs is not None and max_pairs < len(pairs):
        rng = np.random.default_rng(seed)
        chosen = rng.choice(len(pairs), size=max_pairs, replace=False)
        pairs = [pairs[i] for i in sorted(chosen)]
    return [UsagePair(a, b, pair_type) for a, b in pairs]


def pairs_from_judged(usages: Sequence[Usage], judged_pairs: Iterable[tuple[str, str]]) -> list[UsagePair]:
    """Turn the pairs that were actually annotated into typed UsagePairs."""
    grouping = {u.id: u.grouping for u in usages}
    out = []
    for id1, id2 in sorted(set(canonical_pair(a, b) for a, b in judged_pairs)):
        g1, g2 = grouping[id1], grouping[id2]
        if g1 != g2:
            ptype = PAIR_COMPARE
        else:
            ptype = PAIR_EARLIER if g1 == 1 else PAIR_LATER
        out.append(UsagePair(id1, id2, ptype))
    return out


def vector_distance(v1: np.ndarray, v2: np.ndarray, metric: str = "cosine") -> float:
    """Distance between two equal-dimension vectors.

    cosine distance = 1 - cos(v1, v2); euclidean and manhattan are the
    usual norms of the difference.  Cosine requires both vectors nonzero.
    """
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    if v1.shape != v2.shape or v1.ndim != 1:
        raise ValueError(f"vectors must share one dimension, got {v1.shape} vs {v2.shape}")
    if metric == "cosine":
        n1 = np.linalg.norm(v1)
        n2 = np.linalg.norm(v2)
        if n1 == 0.0 or n2 == 0.0:
            raise DegenerateInputError("cosine distance undefined for zero vectors")
        return float(1.0 - float(v1 @ v2) / (n1 * n2))
    if metric == "euclidean":
        # math.dist rescales internally, so tiny differences survive squaring
        return math.dist(v1.tolist(), v2.tolist())
    if metric == "manhattan":
        return float(np.abs(v1 - v2).sum())
    raise ConfigError(f"unknown metric {metric!r}")


def similarity_from_distance(distance: float, metric: str) -> float:
    """Convert a distance to the internal similarity orientation."""
    if metric == "cosine":
        return 1.0 - distance
    return -distance


def distance_from_similarity(score: float, metric: str) -> float:
    """Invert ``similarity_from_distance`` (exact for all three metrics)."""
    if metric == "cosine":
        return 1.0 - score
    return -score


def score_pairs_from_embeddings(
    pairs: Sequence[UsagePair],
    records: Mapping[str, EmbeddingRecord],
    spec: PoolingSpec = PoolingSpec(),
    metric: str = "cosine",
) -> list[PairScore]:
    """Score pairs by distance between pooled usage vectors.

    The score is the negated distance, except cosine where it is the
    cosine similarity; either way larger means more related.
    """
    if metric not in DISTANCE_METRICS:
        raise ConfigError(f"unknown metric {metric!r}")
    needed = sorted({i for p in pairs for i in p.key})
    missing = [i for i in needed if i not in records]
    if missing:
        raise IngestionError("embedding store lacks usage ids: " + ", ".join(missing))
    vectors = {i: usage_vector(records[i], spec) for i in needed}
    scores = []
    for pair in pairs:
        dist = vector_distance(vectors[pair.id1], vectors[pair.id2], metric)
        scores.append(
            PairScore(pair=pair, score=similarity_from_distance(dist, metric), source=SOURCE_EMBEDDING)
        )
    return scores


def load_external_scores(path: str | Path, scores_are_distances: bool = False) -> list[PairScore]:
    """Load pair scores produced outside the toolkit.

    Expects TSV columns identifier1, identifier2, score.  Pairs are
    canonicalized; duplicate pairs are resolved by arithmetic mean with a
    warning.  With ``scores_are_distances`` the scores are negated on load
    to restore the similarity orientation.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        raise DataFormatError(f"{path}: file not found")
    if not lines:
        raise DataFormatError(f"{path}: empty file, expected a header row")
    header = lines[0].split("\t")
    for col in ("identifier1", "identifier2", "score"):
        if col not in header:
            raise DataFormatError(f"{path}: missing required column {col!r}")
    idx = {name: header.index(name) for name in header}
    collected: dict[tuple[str, str], list[float]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        row = line.split("\t")
        if len(row) != len(header):
            raise DataFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            value = float(row[idx["score"]])
        except ValueError:
            raise DataFormatError(f"{path}:{lineno}: non-numeric score {row[idx['score']]!r}")
        if not np.isfinite(value):
            raise DataFormatError(f"{path}:{lineno}: non-finite score")
        pair = canonical_pair(row[idx["identifier1"]], row[idx["identifier2"]])
        collected.setdefault(pair, []).append(value)
    duplicates = [p for p, vs in collected.items() if len(vs) > 1]
    if duplicates:
        warnings.warn(
            f"{path}: {len(duplicates)} pair(s) scored more than once; using the mean",
            stacklevel=2,
        )
    out = []
    for (id1, id2), values in sorted(collected.items()):
        score = float(np.mean(values))
        if scores_are_distances:
            score = -score
        out.append(PairScore(pair=UsagePair(id1, id2, PAIR_ALL), score=score, source=SOURCE_EXTERNAL))
    return out


def write_scores(scores: Iterable[PairScore], path: str | Path) -> None:
    """Serialize pair scores in the external-scores TSV format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("identifier1\tidentifier2\tscore\n")
        for s in scores:
            fh.write(f"{s.pair.id1}\t{s.pair.id2}\t{s.score:.12g}\n")


def discretize(score: float, thresholds: ThresholdSpec) -> int:
    """Map a graded similarity score onto the 1..4 ordinal scale.

    Intervals are lower-inclusive: a score equal to a threshold lands in
    the higher bin.  Total and monotone non-decreasing in the score.
    """
    if score < thresholds.t1:
        return 1
    if score < thresholds.t2:
        return 2
    if score < thresholds.t3:
        return 3
    return 4
