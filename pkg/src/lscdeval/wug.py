"""Core types for word usages, pairwise judgments and word usage graphs.

A word usage graph (WUG) has one node per attested usage of a target word
and one weighted edge per judged usage pair.  Edge weights live on the
4-point DURel relatedness scale (1 = unrelated, 4 = identical) and are the
aggregate of one or more annotator ratings, or of model scores.

All types are immutable after construction and safe to share across
threads.  A rating of ``None`` means MISSING ("cannot decide") and is
excluded from aggregation.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import DegenerateInputError, IngestionError, StructuralError

GROUPING_EARLIER = 1
GROUPING_LATER = 2

#: Valid ordinal ratings on the relatedness scale.
RATING_VALUES = (1, 2, 3, 4)

AGGREGATIONS = ("median", "mean")

PAIR_COMPARE = "COMPARE"
PAIR_EARLIER = "EARLIER"
PAIR_LATER = "LATER"
PAIR_ALL = "ALL"
PAIR_TYPES = (PAIR_COMPARE, PAIR_EARLIER, PAIR_LATER, PAIR_ALL)


def canonical_pair(id1: str, id2: str) -> tuple[str, str]:
    """Order a usage-id pair lexicographically (the storage convention)."""
    return (id1, id2) if id1 < id2 else (id2, id1)


@dataclass(frozen=True, slots=True)
class Usage:
    """One attested occurrence of a target word in a dated text fragment.

    ``target_span`` is a half-open character interval [start, end) into
    ``context``; ``grouping`` is 1 for the earlier corpus and 2 for the
    later one.
    """

    id: str
    lemma: str
    grouping: int
    context: str
    target_span: tuple[int, int]
    pos: str | None = None
    date: str | None = None
    sentence_span: tuple[int, int] | None = None

    def __post_init__(self):
        if self.grouping not in (GROUPING_EARLIER, GROUPING_LATER):
            raise ValueError(
                f"usage {self.id!r}: grouping must be 1 or 2, got {self.grouping!r}"
            )
        start, end = self.target_span
        if not (0 <= start < end <= len(self.context)):
            raise ValueError(
                f"usage {self.id!r}: target span [{start}, {end}) out of bounds "
                f"for context of length {len(self.context)}"
            )
        if self.sentence_span is not None:
            s, e = self.sentence_span
            if not (0 <= s < e <= len(self.context)):
                raise ValueError(
                    f"usage {self.id!r}: sentence span [{s}, {e}) out of bounds"
                )

    @property
    def target_text(self) -> str:
        start, end = self.target_span
        return self.context[start:end]


@dataclass(frozen=True, slots=True)
class Judgment:
    """One annotator's ordinal rating of a usage pair.

    The pair is stored in canonical order regardless of construction
    order.  ``rating`` is an integer in 1..4 or ``None`` for MISSING.
    """

    id1: str
    id2: str
    annotator: str
    rating: int | None

    def __post_init__(self):
        if self.rating is not None and self.rating not in RATING_VALUES:
            raise ValueError(f"rating must be in 1..4 or None, got {self.rating!r}")
        a, b = canonical_pair(self.id1, self.id2)
        object.__setattr__(self, "id1", a)
        object.__setattr__(self, "id2", b)

    @property
    def pair(self) -> tuple[str, str]:
        return (self.id1, self.id2)


@dataclass(frozen=True, slots=True)
class UsagePair:
    """An unordered usage pair with its sampling type.

    COMPARE pairs cross the two groupings, EARLIER/LATER pairs stay within
    grouping 1/2, ALL pairs carry no restriction.
    """

    id1: str
    id2: str
    pair_type: str

    def __post_init__(self):
        if self.pair_type not in PAIR_TYPES:
            raise ValueError(f"unknown pair type {self.pair_type!r}")
        a, b = canonical_pair(self.id1, self.id2)
        object.__setattr__(self, "id1", a)
        object.__setattr__(self, "id2", b)

    @property
    def key(self) -> tuple[str, str]:
        return (self.id1, self.id2)


@dataclass(frozen=True, slots=True)
class EdgeData:
    """Aggregate weight of one edge plus the ratings behind it.

    ``judgments`` is empty when the edge was built from model scores
    rather than annotator ratings.
    """

    weight: float
    judgments: tuple[int, ...] = ()


@dataclass(frozen=True, slots=True)
class WordUsageGraph:
    """Usages of one lemma as nodes, aggregated pair judgments as edges.

    ``edges`` is keyed by canonically ordered id pairs; there are no
    self-edges and at most one edge per unordered pair.  Treat the
    contained mappings as read-only.
    """

    lemma: str
    nodes: Mapping[str, Usage]
    edges: Mapping[tuple[str, str], EdgeData]

    @property
    def node_ids(self) -> list[str]:
        return sorted(self.nodes)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def weight(self, id1: str, id2: str) -> float | None:
        edge = self.edges.get(canonical_pair(id1, id2))
        return None if edge is None else edge.weight

    def grouping_ids(self, grouping: int) -> list[str]:
        return sorted(u.id for u in self.nodes.values() if u.grouping == grouping)


@dataclass(frozen=True, slots=True)
class SenseClustering:
    """Partition of a word's usages into sense clusters.

    Labels are integers >= 0; -1 marks noise (accepted from gold data only,
    never produced by the optimizer).  Labels need not be contiguous.
    """

    assignment: Mapping[str, int]

    def __post_init__(self):
        for uid, label in self.assignment.items():
            if not isinstance(label, int) or (label < 0 and label != -1):
                raise ValueError(f"usage {uid!r}: bad cluster label {label!r}")

    def label(self, usage_id: str) -> int:
        return self.assignment[usage_id]

    @property
    def ids(self) -> list[str]:
        return sorted(self.assignment)

    def clusters(self, include_noise: bool = False) -> dict[int, frozenset[str]]:
        by_label: dict[int, set[str]] = {}
        for uid, lab in self.assignment.items():
            if lab == -1 and not include_noise:
                continue
            by_label.setdefault(lab, set()).add(uid)
        return {lab: frozenset(ids) for lab, ids in by_label.items()}

    def restrict(self, ids: Iterable[str]) -> "SenseClustering":
        keep = set(ids)
        return SenseClustering({u: l for u, l in self.assignment.items() if u in keep})

    def as_partition(self, include_noise: bool = False) -> frozenset[frozenset[str]]:
        """Label-free view, for comparing clusterings up to relabeling."""
        return frozenset(self.clusters(include_noise=include_noise).values())


def edge_weight(ratings: Iterable[int | None], method: str = "median") -> float:
    """Aggregate a list of ordinal ratings into one edge weight.

    MISSING ratings are dropped first; the median of an even-length list is
    the arithmetic midpoint of the two central values.
    """
    if method not in AGGREGATIONS:
        raise ValueError(f"unknown aggregation {method!r}")
    values = [r for r in ratings if r is not None]
    if not values:
        raise DegenerateInputError("no valid judgments to aggregate")
    if method == "median":
        return float(statistics.median(values))
    return float(statistics.fmean(values))


def build_graph(
    usages: Iterable[Usage],
    judgments: Iterable[Judgment],
    aggregation: str = "median",
) -> WordUsageGraph:
    """Assemble a word usage graph from usages and annotator judgments.

    One edge per judged pair; the edge weight is the aggregation over the
    pair's non-missing ratings.  Pairs whose ratings are all MISSING
    produce no edge.  Deterministic and order-independent in its inputs.
    """
    nodes: dict[str, Usage] = {}
    lemmas = set()
    for u in usages:
        if u.id in nodes:
            raise StructuralError(f"duplicate usage id {u.id!r}")
        nodes[u.id] = u
        lemmas.add(u.lemma)
    if len(lemmas) > 1:
        raise StructuralError(f"usages mix lemmas: {sorted(lemmas)}")
    lemma = next(iter(lemmas)) if lemmas else ""

    by_pair: dict[tuple[str, str], list[int]] = {}
    dangling = set()
    for j in judgments:
        if j.id1 not in nodes:
            dangling.add(j.id1)
        if j.id2 not in nodes:
            dangling.add(j.id2)
        if dangling:
            continue
        if j.id1 == j.id2:
            raise StructuralError(f"self-judgment on usage {j.id1!r}")
        ratings = by_pair.setdefault(j.pair, [])
        if j.rating is not None:
            ratings.append(j.rating)
    if dangling:
        raise IngestionError(
            "judgments reference unknown usage ids: " + ", ".join(sorted(dangling))
        )

    edges = {}
    for pair, ratings in sorted(by_pair.items()):
        if not ratings:
            continue  # all MISSING: sparse observation, not evidence
        edges[pair] = EdgeData(
            weight=edge_weight(ratings, aggregation),
            judgments=tuple(sorted(ratings)),
        )
    return WordUsageGraph(lemma=lemma, nodes=nodes, edges=edges)


def build_graph_from_scores(
    usages: Iterable[Usage],
    scored_pairs: Iterable[tuple[tuple[str, str], float]],
    lemma: str | None = None,
) -> WordUsageGraph:
    """Assemble a graph whose edge weights are model pair scores.

    ``scored_pairs`` yields (canonical id pair, score).  Score provenance is
    the caller's business; edges carry no ratings.
    """
    nodes: dict[str, Usage] = {}
    for u in usages:
        if u.id in nodes:
            raise StructuralError(f"duplicate usage id {u.id!r}")
        nodes[u.id] = u
    lemmas = {u.lemma for u in nodes.values()}
    if len(lemmas) > 1:
        raise StructuralError(f"usages mix lemmas: {sorted(lemmas)}")
    if lemma is None:
        lemma = next(iter(lemmas)) if lemmas else ""

    edges = {}
    for (id1, id2), score in scored_pairs:
        pair = canonical_pair(id1, id2)
        if pair[0] == pair[1]:
            raise StructuralError(f"self-edge on usage {pair[0]!r}")
        missing = [i for i in pair if i not in nodes]
        if missing:
            raise IngestionError(
                "scored pairs reference unknown usage ids: " + ", ".join(sorted(missing))
            )
        edges[pair] = EdgeData(weight=float(score))
    return WordUsageGraph(lemma=lemma, nodes=nodes, edges=dict(sorted(edges.items())))


def subgraph_by_grouping(g: WordUsageGraph, grouping: int) -> WordUsageGraph:
    """Restrict a graph to one time period.

    Keeps the nodes of the grouping and the edges with both endpoints
    retained; cross-period edges appear in neither subgraph.
    """
    if grouping not in (GROUPING_EARLIER, GROUPING_LATER):
        raise ValueError(f"grouping must be 1 or 2, got {grouping!r}")
    nodes = {uid: u for uid, u in g.nodes.items() if u.grouping == grouping}
    edges = {
        pair: data
        for pair, data in g.edges.items()
        if pair[0] in nodes and pair[1] in nodes
    }
    return WordUsageGraph(lemma=g.lemma, nodes=nodes, edges=edges)
