"""Per-lemma change predictions from clusterings or aggregated pair scores.

Cluster-based measures compare the two periods' sense frequency
distributions (Jensen-Shannon distance, exclusive-cluster tests,
same-cluster rates).  Aggregate measures skip clustering and average pair
scores directly (APD and friends) or compare period prototype vectors.

Every measure has a natural orientation: similarity (larger = more
related), distance (larger = further apart) or change (larger = more
change).  Callers align orientations before comparing against gold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateInputError
from .wic import PairScore, ThresholdSpec, discretize, vector_distance
from .wug import SenseClustering, UsagePair

NOISE_LABEL = -1

ORIENTATION_SIMILARITY = "similarity"
ORIENTATION_DISTANCE = "distance"
ORIENTATION_CHANGE = "change"

#: Natural orientation of each measure's output.
MEASURE_ORIENTATION = {
    "jsd": ORIENTATION_CHANGE,
    "binary": None,
    "compare-clusters": ORIENTATION_SIMILARITY,
    "apd": ORIENTATION_SIMILARITY,
    "apd-thresholded": ORIENTATION_SIMILARITY,
    "cos": ORIENTATION_DISTANCE,
    "diasense": ORIENTATION_DISTANCE,
}


@dataclass(frozen=True, slots=True)
class SenseDistribution:
    """Probability of each sense cluster within one period's usages."""

    probs: Mapping[int, float]
    support: int

    def __post_init__(self):
        if self.support < 1 or not self.probs:
            raise DegenerateInputError("sense distribution needs at least one usage")
        total = sum(self.probs.values())
        if any(p < 0 for p in self.probs.values()) or abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities must be non-negative and sum to 1, got {total!r}")

    def prob(self, label: int) -> float:
        return self.probs.get(label, 0.0)


def sense_distribution(
    clustering: SenseClustering,
    usage_ids: Iterable[str],
    include_noise: bool = False,
) -> SenseDistribution:
    """Cluster frequencies of one grouping's usages, as probabilities.

    Noise-labeled usages are excluded unless ``include_noise``; an empty
    grouping after exclusion is an error.
    """
    counts: dict[int, int] = {}
    for uid in usage_ids:
        label = clustering.label(uid)
        if label == NOISE_LABEL and not include_noise:
            continue
        counts[label] = counts.get(label, 0) + 1
    total = sum(counts.values())
    if total == 0:
        raise DegenerateInputError("no usages left after noise removal")
    return SenseDistribution(
        probs={lab: c / total for lab, c in counts.items()}, support=total
    )


def jsd_distance(p: SenseDistribution, q: SenseDistribution) -> float:
    """Jensen-Shannon distance between two sense distributions.

    Square root of the Jensen-Shannon divergence with base-2 logarithms,
    so the value lies in [0, 1] with 1 for disjoint supports.  Absent
    labels count as probability 0 and 0*log(0) is 0.
    """
    labels = sorted(set(p.probs) | set(q.probs))
    pv = np.array([p.prob(l) for l in labels], dtype=np.float64)
    qv = np.array([q.prob(l) for l in labels], dtype=np.float64)
    mv = (pv + qv) / 2.0

    def entropy_bits(dist: np.ndarray) -> float:
        nz = dist[dist > 0]
        return float(-(nz * np.log2(nz)).sum())

    divergence = entropy_bits(mv) - (entropy_bits(pv) + entropy_bits(qv)) / 2.0
    divergence = min(1.0, max(0.0, divergence))  # clip float noise at the ends
    return math.sqrt(divergence)


class BinaryChange(NamedTuple):
    binary: int
    gain: int
    loss: int


def binary_change(
    clustering: SenseClustering,
    grouping_by_id: Mapping[str, int],
    min_attestations: int = 1,
    max_other_attestations: int = 0,
    include_noise: bool = False,
) -> BinaryChange:
    """Exclusive-cluster test for sense gain and loss.

    Gain fires when some cluster holds at least ``min_attestations``
    later-period usages and at most ``max_other_attestations``
    earlier-period ones; loss is the mirror image; binary is their OR.
    Defaults (1, 0) demand strictly exclusive clusters.
    """
    if min_attestations < 1:
        raise ValueError(f"min_attestations must be >= 1, got {min_attestations}")
    if max_other_attestations < 0:
        raise ValueError(f"max_other_attestations must be >= 0, got {max_other_attestations}")
    counts: dict[int, list[int]] = {}
    for uid, grouping in grouping_by_id.items():
        label = clustering.label(uid)
        if label == NOISE_LABEL and not include_noise:
            continue
        pair = counts.setdefault(label, [0, 0])
        pair[grouping - 1] += 1
    gain = loss = 0
    for old_count, new_count in counts.values():
        if new_count >= min_attestations and old_count <= max_other_attestations:
            gain = 1
        if old_count >= min_attestations and new_count <= max_other_attestations:
            loss = 1
    return BinaryChange(binary=int(gain or loss), gain=gain, loss=loss)


def compare_from_clusters(
    clustering: SenseClustering,
    compare_pairs: Sequence[UsagePair],
    include_noise: bool = False,
) -> float:
    """Fraction of cross-period pairs whose members share a cluster.

    Pairs touching a noise-labeled usage are dropped unless
    ``include_noise``.  Invariant under cluster relabeling.
    """
    same = 0
    counted = 0
    for pair in compare_pairs:
        l1 = clustering.label(pair.id1)
        l2 = clustering.label(pair.id2)
        if not include_noise and NOISE_LABEL in (l1, l2):
            continue
        counted += 1
        same += int(l1 == l2)
    if counted == 0:
        raise DegenerateInputError("no usable cross-period pairs")
    return same / counted


def apd(scores: Sequence[PairScore]) -> float:
    """Mean pair score (average pairwise distance/similarity).

    Works on whichever orientation the scores carry; the caller tracks it.
    """
    if not scores:
        raise DegenerateInputError("no pair scores to average")
    return float(np.mean([s.score for s in scores]))


def apd_thresholded(scores: Sequence[PairScore], thresholds: ThresholdSpec) -> float:
    """Mean of the discretized (1..4) pair scores."""
    if not scores:
        raise DegenerateInputError("no pair scores to average")
    return float(np.mean([discretize(s.score, thresholds) for s in scores]))


def cos_prototype(
    earlier_vectors: Sequence[np.ndarray],
    later_vectors: Sequence[np.ndarray],
    metric: str = "cosine",
) -> float:
    """Distance between the two periods' mean usage vectors."""
    if not earlier_vectors or not later_vectors:
        raise DegenerateInputError("both periods need at least one usage vector")
    proto1 = np.mean(np.stack([np.asarray(v, dtype=np.float64) for v in earlier_vectors]), axis=0)
    proto2 = np.mean(np.stack([np.asarray(v, dtype=np.float64) for v in later_vectors]), axis=0)
    return vector_distance(proto1, proto2, metric)


def diasense(
    cross_distances: Sequence[float],
    earlier_distances: Sequence[float],
    later_distances: Sequence[float],
    variant: str = "ratio",
) -> float:
    """Cross-period mean distance normalized by a within-period polysemy term.

    ratio: APD_cross / mean of the two within-period APDs;
    difference: APD_cross - that mean.  Inputs must be distances, not
    similarities; the ratio variant additionally needs all three pair
    populations non-empty and a nonzero denominator.
    """
    if not cross_distances:
        raise DegenerateInputError("no cross-period distances")
    cross = float(np.mean(cross_distances))
    if variant == "difference":
        within = []
        if earlier_distances:
            within.append(float(np.mean(earlier_distances)))
        if later_distances:
            within.append(float(np.mean(later_distances)))
        if not within:
            raise DegenerateInputError("no within-period distances")
        return cross - float(np.mean(within))
    if variant == "ratio":
        if not earlier_distances or not later_distances:
            raise DegenerateInputError("ratio variant needs both within-period populations")
        denom = (float(np.mean(earlier_distances)) + float(np.mean(later_distances))) / 2.0
        if denom == 0.0:
            raise DegenerateInputError("zero within-period distance, ratio undefined")
        return cross / denom
    raise ValueError(f"unknown diasense variant {variant!r}")


@dataclass(frozen=True, slots=True)
class ChangeScores:
    """One lemma's change predictions; fields stay None when not computed."""

    lemma: str
    graded: float | None = None
    binary: int | None = None
    binary_gain: int | None = None
    binary_loss: int | None = None
    compare: float | None = None
