"""Correlation clustering of word usage graphs.

Edges act as attractive above the scale threshold and repulsive below it:
a partition pays (threshold - weight) for every low edge it keeps inside a
cluster and (weight - threshold) for every high edge it cuts.  Minimizing
this loss is NP-hard, so ``correlation_cluster`` runs seeded simulated
annealing with greedy refinement over several restarts, while
``brute_force_cluster`` enumerates all partitions of small graphs as an
exact oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import StructuralError
from .wug import SenseClustering, WordUsageGraph

#: Midpoint of the 1..4 relatedness scale; edges above attract, below repel.
DEFAULT_THRESHOLD = 2.5

BRUTE_FORCE_MAX_NODES = 12


@dataclass(frozen=True, slots=True)
class ClusteringParams:
    """Knobs for the stochastic optimizer.

    ``threshold`` splits attractive from repulsive edge weights;
    ``restarts`` independent runs are derived deterministically from
    ``seed`` and the best result wins (ties: lowest restart index).
    """

    threshold: float = DEFAULT_THRESHOLD
    restarts: int = 10
    max_iterations: int = 100
    seed: int = 0
    allow_singletons: bool = True
    initial_temperature: float | None = None
    cooling: float = 0.95

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not (0.0 < self.cooling < 1.0):
            raise ValueError(f"cooling must be in (0, 1), got {self.cooling}")


def clustering_loss(g: WordUsageGraph, c: SenseClustering, threshold: float = DEFAULT_THRESHOLD) -> float:
    """Disagreement of a clustering with a graph's edge weights.

    Intra-cluster edges below the threshold cost (threshold - weight);
    inter-cluster edges at or above it cost (weight - threshold).  Edges
    exactly at the threshold are free either way, and unjudged pairs
    contribute nothing.  Invariant under relabeling.
    """
    unassigned = [uid for uid in g.nodes if uid not in c.assignment]
    if unassigned:
        raise StructuralError(
            "clustering leaves nodes unassigned: " + ", ".join(sorted(unassigned))
        )
    loss = 0.0
    for (id1, id2), edge in g.edges.items():
        if c.assignment[id1] == c.assignment[id2]:
            if edge.weight < threshold:
                loss += threshold - edge.weight
        else:
            if edge.weight >= threshold:
                loss += edge.weight - threshold
    return loss


def _adjacency(g: WordUsageGraph, threshold: float) -> tuple[list[str], list[str], list[list[tuple[int, float]]]]:
    """Split nodes into connected/isolated and index attraction lists.

    Attraction of an edge is weight - threshold: positive pulls the
    endpoints together, negative pushes them apart.
    """
    ids = g.node_ids
    degree = {uid: 0 for uid in ids}
    for id1, id2 in g.edges:
        degree[id1] += 1
        degree[id2] += 1
    connected = [uid for uid in ids if degree[uid] > 0]
    isolated = [uid for uid in ids if degree[uid] == 0]
    index = {uid: i for i, uid in enumerate(connected)}
    neighbors: list[list[tuple[int, float]]] = [[] for _ in connected]
    for (id1, id2), edge in g.edges.items():
        a = edge.weight - threshold
        i, j = index[id1], index[id2]
        neighbors[i].append((j, a))
        neighbors[j].append((i, a))
    return connected, isolated, neighbors


def _attraction_by_cluster(neigh: list[tuple[int, float]], assign: list[int]) -> dict[int, float]:
    contrib: dict[int, float] = {}
    for j, a in neigh:
        lab = assign[j]
        contrib[lab] = contrib.get(lab, 0.0) + a
    return contrib


def _greedy_descent(neighbors: list[list[tuple[int, float]]], assign: list[int], sizes: list[int]) -> None:
    """Move nodes to their most attractive cluster until a local optimum.

    Moving a node to cluster k changes the loss by (attraction to own
    cluster) - (attraction to k), so the best target maximizes attraction;
    a fresh singleton scores 0.  Strict improvement only, hence
    terminating.
    """
    n = len(assign)
    improved = True
    while improved:
        improved = False
        for v in range(n):
            contrib = _attraction_by_cluster(neighbors[v], assign)
            current = assign[v]
            best_label = current
            best_value = contrib.get(current, 0.0)
            for lab in sorted(contrib):
                if lab != current and contrib[lab] > best_value + 1e-12:
                    best_label, best_value = lab, contrib[lab]
            if sizes[current] > 1 and best_value < -1e-12:
                best_label, best_value = sizes.index(0), 0.0
            if best_label != current:
                sizes[current] -= 1
                sizes[best_label] += 1
                assign[v] = best_label
                improved = True


def _anneal_restart(
    neighbors: list[list[tuple[int, float]]],
    rng: np.random.Generator,
    sweeps: int,
    t0: float,
    cooling: float,
) -> list[int]:
    """One seeded annealing run plus greedy refinement; returns labels."""
    n = len(neighbors)
    assign = [int(x) for x in rng.integers(0, n, size=n)]
    sizes = [0] * (n + 1)  # one spare slot so a fresh label always exists
    for lab in assign:
        sizes[lab] += 1
    temperature = t0
    for _ in range(sweeps):
        for _ in range(n):
            v = int(rng.integers(n))
            current = assign[v]
            contrib = _attraction_by_cluster(neighbors[v], assign)
            candidates = [lab for lab in range(n + 1) if sizes[lab] > 0 and lab != current]
            if sizes[current] > 1:
                for lab in range(n + 1):  # first empty slot acts as the fresh cluster
                    if sizes[lab] == 0:
                        candidates.append(lab)
                        break
            if not candidates:
                continue
            target = candidates[int(rng.integers(len(candidates)))]
            delta = contrib.get(current, 0.0) - contrib.get(target, 0.0)
            if delta <= 0.0 or rng.random() < math.exp(-delta / temperature):
                sizes[current] -= 1
                sizes[target] += 1
                assign[v] = target
        temperature *= cooling
    _greedy_descent(neighbors, assign, sizes)
    return assign


def _compact_labels(ids: list[str], labels: list[int], next_label: int = 0) -> dict[str, int]:
    remap: dict[int, int] = {}
    out = {}
    for uid, lab in zip(ids, labels):
        if lab not in remap:
            remap[lab] = next_label
            next_label += 1
        out[uid] = remap[lab]
    return out


def correlation_cluster(g: WordUsageGraph, params: ClusteringParams = ClusteringParams()) -> SenseClustering:
    """Cluster a word usage graph by correlation-clustering loss.

    Deterministic for a given seed: restart sub-seeds are spawned from the
    master seed and the lowest-loss restart wins, ties broken by restart
    index.  Isolated nodes never enter the optimizer and come back as
    singleton clusters, so adding one cannot disturb the rest.
    """
    if g.n_nodes == 0:
        raise StructuralError("cannot cluster an empty graph")
    connected, isolated, neighbors = _adjacency(g, params.threshold)

    assignment: dict[str, int] = {}
    next_label = 0
    if connected:
        attraction_scale = float(
            np.mean([abs(a) for neigh in neighbors for (_, a) in neigh]) or 1.0
        )
        t0 = params.initial_temperature if params.initial_temperature is not None else max(
            attraction_scale, 1e-9
        )
        seeds = np.random.SeedSequence(params.seed).spawn(params.restarts)
        best_labels: list[int] | None = None
        best_loss = math.inf
        for child in seeds:
            rng = np.random.default_rng(child)
            labels = _anneal_restart(neighbors, rng, params.max_iterations, t0, params.cooling)
            loss = _loss_on_indexed(neighbors, labels)
            if loss < best_loss - 1e-12:
                best_loss = loss
                best_labels = labels
        assert best_labels is not None
        if not params.allow_singletons:
            _merge_singletons(neighbors, best_labels)
        assignment = _compact_labels(connected, best_labels)
        next_label = max(assignment.values()) + 1 if assignment else 0
    for uid in isolated:
        assignment[uid] = next_label
        next_label += 1
    return SenseClustering(assignment)


def _loss_on_indexed(neighbors: list[list[tuple[int, float]]], assign: list[int]) -> float:
    loss = 0.0
    for i, neigh in enumerate(neighbors):
        for j, a in neigh:
            if j <= i:
                continue
            if assign[i] == assign[j]:
                if a < 0:
                    loss -= a
            elif a > 0:
                loss += a
    return loss


def _merge_singletons(neighbors: list[list[tuple[int, float]]], assign: list[int]) -> None:
    """Force singleton clusters into their most attractive other cluster.

    Clusters without edges to the node score 0 attraction; ties go to the
    lowest label.  Runs in index order (sorted node ids) and may raise the
    loss, which is the documented price of disallowing singletons.
    """
    sizes: dict[int, int] = {}
    for lab in assign:
        sizes[lab] = sizes.get(lab, 0) + 1
    for v in range(len(assign)):
        lab = assign[v]
        if sizes[lab] != 1 or len(sizes) < 2:
            continue
        contrib = _attraction_by_cluster(neighbors[v], assign)
        candidates = sorted(l for l in sizes if l != lab)
        target = max(candidates, key=lambda l: contrib.get(l, 0.0))
        del sizes[lab]
        sizes[target] += 1
        assign[v] = target


def _iter_rgs(n: int, batch: int = 65536) -> Iterator[np.ndarray]:
    """Restricted growth strings of length n in lexicographic order.

    Each row encodes one set partition with canonical first-appearance
    labels; enumeration covers every partition exactly once.
    """
    a = [0] * n
    m = [0] * n
    buf = np.empty((batch, n), dtype=np.int8)
    filled = 0
    while True:
        buf[filled] = a
        filled += 1
        if filled == batch:
            yield buf[:filled].copy()
            filled = 0
        # advance to the next string
        i = n - 1
        while i > 0 and a[i] > m[i - 1]:
            i -= 1
        if i == 0:
            break
        a[i] += 1
        m[i] = max(m[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            m[j] = m[j - 1]
    if filled:
        yield buf[:filled].copy()


def brute_force_cluster(
    g: WordUsageGraph, threshold: float = DEFAULT_THRESHOLD
) -> tuple[SenseClustering, float]:
    """Exact minimum-loss clustering by enumerating all set partitions.

    Usable up to 12 nodes (Bell-number growth).  Ties are broken by fewest
    clusters, then by lexicographically smallest assignment over sorted
    node ids.
    """
    ids = g.node_ids
    n = len(ids)
    if n == 0:
        raise StructuralError("cannot cluster an empty graph")
    if n > BRUTE_FORCE_MAX_NODES:
        raise ValueError(
            f"brute force is limited to {BRUTE_FORCE_MAX_NODES} nodes, got {n}"
        )
    index = {uid: i for i, uid in enumerate(ids)}
    if g.edges:
        ei = np.array([index[p[0]] for p in g.edges], dtype=np.int64)
        ej = np.array([index[p[1]] for p in g.edges], dtype=np.int64)
        weights = np.array([e.weight for e in g.edges.values()], dtype=np.float64)
        intra_cost = np.maximum(0.0, threshold - weights)  # paid when kept together
        inter_cost = np.maximum(0.0, weights - threshold)  # paid when split apart
    else:
        ei = ej = np.empty(0, dtype=np.int64)
        intra_cost = inter_cost = np.empty(0, dtype=np.float64)

    best_loss = math.inf
    best_ncl = n + 1
    best_row: np.ndarray | None = None
    for block in _iter_rgs(n):
        if len(ei):
            same = block[:, ei] == block[:, ej]
            losses = same @ intra_cost + (~same) @ inter_cost
        else:
            losses = np.zeros(len(block))
        ncl = block.max(axis=1).astype(np.int64) + 1
        order = np.lexsort((ncl, losses))
        cand = order[0]
        if losses[cand] < best_loss or (
            losses[cand] == best_loss and ncl[cand] < best_ncl
        ):
            best_loss = float(losses[cand])
            best_ncl = int(ncl[cand])
            best_row = block[cand].copy()
    assert best_row is not None
    clustering = SenseClustering({uid: int(best_row[i]) for uid, i in index.items()})
    return clustering, clustering_loss(g, clustering, threshold)
