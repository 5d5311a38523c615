"""Cluster a word usage graph into senses by correlation clustering.

Edges above the scale midpoint (2.5) pull usages together, edges below
push them apart; the optimizer searches for the partition with the least
disagreement.  On small graphs the exhaustive oracle confirms optimality.
"""

import itertools

import numpy as np

from lscdeval import (
    ClusteringParams,
    brute_force_cluster,
    clustering_loss,
    correlation_cluster,
)
from lscdeval.wug import Usage, build_graph_from_scores


def toy_graph(weights, lemma="plane"):
    ids = sorted({i for pair in weights for i in pair})
    usages = []
    for uid in ids:
        text = f"a plane usage {uid}"
        usages.append(Usage(id=uid, lemma=lemma, grouping=1, context=text,
                            target_span=(2, 7)))
    return build_graph_from_scores(usages, list(weights.items()))


# two planted senses, one stray low-weight edge between them
weights = {}
for group in (("a1", "a2", "a3"), ("b1", "b2", "b3")):
    for x, y in itertools.combinations(group, 2):
        weights[(x, y)] = 4.0
weights[("a1", "b1")] = 1.0
graph = toy_graph(weights)

clustering = correlation_cluster(graph, ClusteringParams(seed=0, restarts=10))
print("clusters found:", sorted(sorted(c) for c in clustering.as_partition()))
print("loss:", clustering_loss(graph, clustering))

oracle_clustering, oracle_loss = brute_force_cluster(graph)
print("exhaustive optimum loss:", oracle_loss)

# a frustrated triangle: two strong edges, one weak closing edge
triangle = toy_graph({("a", "b"): 4, ("b", "c"): 4, ("a", "c"): 2})
single = clustering_loss(triangle, correlation_cluster(triangle, ClusteringParams(seed=1)))
_, best = brute_force_cluster(triangle)
print(f"\nfrustrated triangle: optimizer loss {single:g}, optimum {best:g} "
      "(keeping all three together costs 0.5, splitting costs 1.5)")

# random graphs: the optimizer should track the oracle closely
rng = np.random.default_rng(3)
hits = 0
for _ in range(30):
    n = int(rng.integers(3, 8))
    w = {
        (f"v{i}", f"v{j}"): float(rng.uniform(1, 4))
        for i, j in itertools.combinations(range(n), 2)
        if rng.random() < 0.9
    }
    g = toy_graph(w)
    found = clustering_loss(g, correlation_cluster(g, ClusteringParams(seed=int(rng.integers(1 << 30)))))
    _, opt = brute_force_cluster(g)
    hits += abs(found - opt) < 1e-9
print(f"\nrandom graphs: optimizer matched the oracle on {hits}/30 instances")
