"""Score predictions against gold labels with the task metrics.

Rank correlations for graded tasks, Krippendorff's alpha for the ordinal
formulation, adjusted Rand index for sense induction, F1 for binary
change.
"""

from lscdeval import (
    PairedSeries,
    SenseClustering,
    adjusted_rand_index,
    f1_binary,
    krippendorff_alpha_ordinal,
    pearson,
    spearman,
)

gold = {"plane": 0.82, "graph": 0.11, "cell": 0.45, "mouse": 0.67, "disk": 0.29}
pred = {"plane": 0.67, "graph": 0.05, "cell": 0.52, "mouse": 0.61, "disk": 0.20}

series = PairedSeries.build(gold, pred)
rho, coverage = spearman(series)
r, _ = pearson(series)
print(f"spearman {rho:.4f}, pearson {r:.4f}, coverage {coverage:.0%}")

# a model missing one lemma: drop it but report the reduced coverage
partial = dict(pred, mouse=None)
series = PairedSeries.build(gold, partial, missing_policy="drop-with-coverage")
rho, coverage = spearman(series)
print(f"with one missing prediction: spearman {rho:.4f} at coverage {coverage:.0%}")

# ordinal agreement: units x raters, last column a model
units = [
    [4, 4, 4],
    [1, 1, 1],
    [3, 3, 2],
    [2, None, 2],  # one annotator skipped this pair
    [4, 3, 4],
]
print("Krippendorff's alpha (ordinal):",
      round(krippendorff_alpha_ordinal(units), 4))

gold_senses = SenseClustering({"u1": 0, "u2": 0, "u3": 1, "u4": 1, "u5": 2})
pred_senses = SenseClustering({"u1": 7, "u2": 7, "u3": 4, "u4": 4, "u5": 4})
print("ARI (one sense merged):", round(adjusted_rand_index(gold_senses, pred_senses), 4))

result = f1_binary([1, 0, 1, 1, 0, 0], [1, 0, 0, 1, 1, 0])
print(f"binary change F1: {result.f1_positive:.4f} (macro {result.macro_f1:.4f}), "
      f"confusion tp={result.tp} fp={result.fp} fn={result.fn} tn={result.tn}")
