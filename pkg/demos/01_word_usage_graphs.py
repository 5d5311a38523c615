"""Build a word usage graph from usages and annotator judgments.

Usages of one target word become nodes; each judged pair becomes a
weighted edge, the weight being the median (or mean) of the annotators'
1..4 relatedness ratings.
"""

from lscdeval import Judgment, Usage, build_graph, edge_weight, subgraph_by_grouping


def usage(uid, grouping, text):
    start = text.index("plane")
    return Usage(id=uid, lemma="plane", grouping=grouping, context=text,
                 target_span=(start, start + len("plane")))


usages = [
    usage("old-1", 1, "he had such faith in the plane that he let his son fly it"),
    usage("old-2", 1, "the rays pass through the perspective plane at the seat"),
    usage("new-1", 2, "the plane taxied onto the runway before dawn"),
    usage("new-2", 2, "points on a plane can be described by two coordinates"),
]

judgments = [
    Judgment("old-1", "new-1", "annA", 4),   # both the aircraft sense
    Judgment("old-1", "new-1", "annB", 4),
    Judgment("old-2", "new-2", "annA", 4),   # both the geometry sense
    Judgment("old-2", "new-2", "annB", 3),
    Judgment("old-1", "old-2", "annA", 1),   # across senses
    Judgment("old-1", "new-2", "annA", 2),
    Judgment("old-1", "new-2", "annB", 1),
    Judgment("old-2", "new-1", "annA", None),  # annotator could not decide
]

graph = build_graph(usages, judgments, aggregation="median")

print(f"graph for {graph.lemma!r}: {graph.n_nodes} nodes, {graph.n_edges} edges")
for (id1, id2), edge in sorted(graph.edges.items()):
    print(f"  {id1} -- {id2}: weight {edge.weight:g} from ratings {list(edge.judgments)}")

print("\nmedian of an even number of ratings is the midpoint:",
      edge_weight([4, 3, 4, 1], "median"))

earlier = subgraph_by_grouping(graph, 1)
later = subgraph_by_grouping(graph, 2)
print(f"\nperiod subgraphs: earlier {earlier.n_nodes} nodes / {earlier.n_edges} edges, "
      f"later {later.n_nodes} nodes / {later.n_edges} edges")
print("cross-period edges are in neither subgraph.")
