"""Derive change predictions from a sense clustering or from raw pair scores.

Cluster measures compare period-wise sense frequencies (Jensen-Shannon
distance, exclusive-cluster tests, same-cluster rates); aggregate measures
skip clustering and average pair scores directly.
"""

from lscdeval import (
    SenseClustering,
    ThresholdSpec,
    apd,
    apd_thresholded,
    binary_change,
    compare_from_clusters,
    diasense,
    jsd_distance,
    sense_distribution,
)
from lscdeval.wic import PairScore
from lscdeval.wug import UsagePair

# a word with two senses; the second sense appears only in the later period
assignment = {}
groupings = {}
for i in range(6):
    assignment[f"old-{i}"] = 0
    groupings[f"old-{i}"] = 1
for i in range(4):
    assignment[f"new-{i}"] = 0
    groupings[f"new-{i}"] = 2
for i in range(4, 7):
    assignment[f"new-{i}"] = 1  # the gained sense
    groupings[f"new-{i}"] = 2
clustering = SenseClustering(assignment)

earlier_ids = [u for u, g in groupings.items() if g == 1]
later_ids = [u for u, g in groupings.items() if g == 2]
p_old = sense_distribution(clustering, earlier_ids)
p_new = sense_distribution(clustering, later_ids)
print("earlier sense distribution:", p_old.probs)
print("later sense distribution:  ", p_new.probs)
print("graded change (JSD):", round(jsd_distance(p_old, p_new), 6))

flags = binary_change(clustering, groupings, min_attestations=1, max_other_attestations=0)
print(f"binary change: binary={flags.binary} gain={flags.gain} loss={flags.loss}")

pairs = [UsagePair(o, n, "COMPARE") for o in earlier_ids for n in later_ids]
print("COMPARE from clusters (same-cluster rate):",
      round(compare_from_clusters(clustering, pairs), 4))

# aggregate measures work straight off pair scores
scores = [PairScore(pair=p, score=4.0 if clustering.label(p.id1) == clustering.label(p.id2) else 1.0,
                    source="external") for p in pairs]
print("\nAPD over cross-period scores:", round(apd(scores), 4))
print("APD after discretizing at (1.5, 2.5, 3.5):",
      round(apd_thresholded(scores, ThresholdSpec(1.5, 2.5, 3.5)), 4))

cross = [1.0 - s.score / 4.0 for s in scores]      # as distances
within = [0.2] * 10
print("DiaSense ratio (cross vs within distances):",
      round(diasense(cross, within, within, "ratio"), 4))
