"""Task-level evaluation metrics comparing predictions to gold labels.

Implemented directly (fractional-rank Spearman, product-moment Pearson,
pooled ordinal Krippendorff's alpha, pair-counting adjusted Rand index,
binary F1) so degenerate cases behave exactly as documented: constant
series raise and name the offending side, missing predictions either
raise or are dropped with the coverage reported, never silently imputed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import DegenerateInputError, StructuralError, UndefinedMetricError
from .wug import SenseClustering

MISSING_POLICIES = ("error", "drop-with-coverage")


@dataclass(frozen=True)
class PairedSeries:
    """Gold and predicted values aligned by item id (pair id or lemma)."""

    ids: tuple[Hashable, ...]
    gold: np.ndarray
    pred: np.ndarray
    coverage: float

    @classmethod
    def build(
        cls,
        gold: Mapping[Hashable, float],
        pred: Mapping[Hashable, float | None],
        missing_policy: str = "error",
    ) -> "PairedSeries":
        """Align predictions to gold items.

        Items whose prediction is absent or None follow the policy:
        ``error`` raises listing them, ``drop-with-coverage`` excludes
        them and reports coverage = aligned / total gold items.
        """
        if missing_policy not in MISSING_POLICIES:
            raise ValueError(f"unknown missing policy {missing_policy!r}")
        ids = sorted(gold, key=str)
        missing = [i for i in ids if pred.get(i) is None]
        if missing and missing_policy == "error":
            raise DegenerateInputError(
                "missing predictions for: " + ", ".join(str(i) for i in missing)
            )
        kept = [i for i in ids if pred.get(i) is not None]
        return cls(
            ids=tuple(kept),
            gold=np.array([float(gold[i]) for i in kept], dtype=np.float64),
            pred=np.array([float(pred[i]) for i in kept], dtype=np.float64),
            coverage=(len(kept) / len(ids)) if ids else 0.0,
        )

    def __len__(self) -> int:
        return len(self.ids)


def _check_series(series: PairedSeries, what: str) -> None:
    if len(series) < 2:
        raise UndefinedMetricError(f"{what} needs at least 2 aligned items, got {len(series)}")
    if np.ptp(series.gold) == 0.0:
        raise UndefinedMetricError(f"{what} undefined: gold values are constant")
    if np.ptp(series.pred) == 0.0:
        raise UndefinedMetricError(f"{what} undefined: predicted values are constant")


def fractional_ranks(values: Sequence[float]) -> np.ndarray:
    """Average ranks, ties sharing the mean rank of their block (1-based)."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _pearson_core(x: np.ndarray, y: np.ndarray) -> float:
    xd = x - x.mean()
    yd = y - y.mean()
    # normalize before the products so subnormal deviations survive squaring
    xd /= np.abs(xd).max()
    yd /= np.abs(yd).max()
    denom = np.sqrt((xd @ xd) * (yd @ yd))
    return float((xd @ yd) / denom)


def spearman(series: PairedSeries) -> tuple[float, float]:
    """Rank correlation: Pearson over fractional ranks.

    Returns (rho, coverage).  Raises when either side is constant after
    alignment, naming the side.
    """
    _check_series(series, "spearman")
    rho = _pearson_core(fractional_ranks(series.gold), fractional_ranks(series.pred))
    return rho, series.coverage


def pearson(series: PairedSeries) -> tuple[float, float]:
    """Product-moment correlation; returns (r, coverage)."""
    _check_series(series, "pearson")
    return _pearson_core(series.gold, series.pred), series.coverage


def krippendorff_alpha_ordinal(
    ratings: Sequence[Sequence[int | None]],
    categories: Sequence[int] = (1, 2, 3, 4),
) -> float:
    """Krippendorff's alpha with the ordinal difference function.

    ``ratings`` is units x raters with None for missing cells; one "rater"
    column may be a model.  Computed on the coincidence matrix pooled over
    all units (units with fewer than two values drop out).  The ordinal
    squared difference between categories c <= k is
    (sum of the marginals of c..k minus (n_c + n_k) / 2) squared.
    """
    cats = sorted(categories)
    cat_index = {c: i for i, c in enumerate(cats)}
    k = len(cats)
    coincidence = np.zeros((k, k), dtype=np.float64)
    pairable_units = 0
    for unit in ratings:
        values = [v for v in unit if v is not None]
        for v in values:
            if v not in cat_index:
                raise ValueError(f"rating {v!r} outside categories {cats}")
        m_u = len(values)
        if m_u < 2:
            continue
        pairable_units += 1
        # every ordered pair of distinct cells in the unit
        for i, a in enumerate(values):
            for j, b in enumerate(values):
                if i != j:
                    coincidence[cat_index[a], cat_index[b]] += 1.0 / (m_u - 1)
    if pairable_units < 2:
        raise UndefinedMetricError(
            "alpha undefined: fewer than 2 units with at least 2 ratings"
        )
    marginals = coincidence.sum(axis=1)
    n = marginals.sum()

    def delta2(ci: int, ki: int) -> float:
        lo, hi = (ci, ki) if ci <= ki else (ki, ci)
        span = marginals[lo : hi + 1].sum() - (marginals[ci] + marginals[ki]) / 2.0
        return span * span

    observed = 0.0
    expected = 0.0
    for ci in range(k):
        for ki in range(k):
            if ci == ki:
                continue
            d = delta2(ci, ki)
            observed += coincidence[ci, ki] * d
            expected += marginals[ci] * marginals[ki] * d
    observed /= n
    expected /= n * (n - 1)
    if expected == 0.0:
        # all mass on one category: perfect agreement by construction
        return 1.0
    return 1.0 - observed / expected


def _pair_count(counts: np.ndarray) -> float:
    return float((counts * (counts - 1) / 2).sum())


def adjusted_rand_index(
    gold: SenseClustering,
    pred: SenseClustering,
    drop_gold_noise: bool = True,
) -> float:
    """Chance-corrected partition agreement over a shared id domain.

    Gold noise items (label -1) are dropped by default; the remaining id
    domains must match exactly.  When the correction denominator collapses
    (both partitions all singletons or both one cluster) the partitions
    are necessarily identical and the index is 1.
    """
    gold_items = {
        uid: lab for uid, lab in gold.assignment.items()
        if not (drop_gold_noise and lab == -1)
    }
    pred_items = dict(pred.assignment)
    if drop_gold_noise:
        pred_items = {u: l for u, l in pred_items.items() if u in gold_items}
    if set(gold_items) != set(pred_items):
        diff = sorted(set(gold_items) ^ set(pred_items))
        raise StructuralError("clusterings cover different usage ids: " + ", ".join(diff))
    if not gold_items:
        raise DegenerateInputError("no items to compare after noise removal")

    ids = sorted(gold_items)
    gold_labels = {lab: i for i, lab in enumerate(sorted(set(gold_items.values())))}
    pred_labels = {lab: i for i, lab in enumerate(sorted(set(pred_items.values())))}
    table = np.zeros((len(gold_labels), len(pred_labels)), dtype=np.int64)
    for uid in ids:
        table[gold_labels[gold_items[uid]], pred_labels[pred_items[uid]]] += 1

    n = len(ids)
    index = _pair_count(table)
    sum_a = _pair_count(table.sum(axis=1))
    sum_b = _pair_count(table.sum(axis=0))
    total_pairs = n * (n - 1) / 2
    expected = sum_a * sum_b / total_pairs if total_pairs else 0.0
    maximum = (sum_a + sum_b) / 2.0
    if maximum == expected:
        return 1.0
    return float((index - expected) / (maximum - expected))


@dataclass(frozen=True, slots=True)
class F1Result:
    f1_positive: float
    macro_f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    degenerate: tuple[str, ...] = ()


def f1_binary(gold: Sequence[int], pred: Sequence[int]) -> F1Result:
    """Binary F1 for class 1 plus the macro average over both classes.

    0/0 cases score 0 for the affected class and are flagged in
    ``degenerate`` rather than raising.
    """
    if len(gold) != len(pred):
        raise StructuralError(f"series lengths differ: {len(gold)} vs {len(pred)}")
    if not gold:
        raise DegenerateInputError("empty series")
    for value in list(gold) + list(pred):
        if value not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got {value!r}")
    tp = sum(1 for g, p in zip(gold, pred) if g == 1 and p == 1)
    fp = sum(1 for g, p in zip(gold, pred) if g == 0 and p == 1)
    fn = sum(1 for g, p in zip(gold, pred) if g == 1 and p == 0)
    tn = sum(1 for g, p in zip(gold, pred) if g == 0 and p == 0)

    degenerate: list[str] = []

    def f1_of(tp_: int, fp_: int, fn_: int, name: str) -> float:
        denom = 2 * tp_ + fp_ + fn_
        if denom == 0:
            degenerate.append(name)
            return 0.0
        return 2 * tp_ / denom

    f1_pos = f1_of(tp, fp, fn, "class-1")
    f1_neg = f1_of(tn, fn, fp, "class-0")
    return F1Result(
        f1_positive=f1_pos,
        macro_f1=(f1_pos + f1_neg) / 2.0,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        degenerate=tuple(degenerate),
    )
