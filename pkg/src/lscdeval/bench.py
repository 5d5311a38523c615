"""Config-driven pipeline runs: dataset + split + components -> report.

A run executes the staged pipeline in order (select uses, build or take
pairs, score them, optionally cluster, apply a change measure, evaluate
against gold) for exactly one (task, measure, dataset) triple.  Reports
are deterministic: identical config, inputs and seed produce byte-identical
TSV and JSON output, so sweeps can be diffed.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import ingest, measures, metrics, wic
from .clustering import ClusteringParams, correlation_cluster
from .errors import (
    ConfigError,
    DegenerateInputError,
    UndefinedMetricError,
)
from .ingest import DatasetManifest
from .measures import MEASURE_ORIENTATION, ORIENTATION_CHANGE, ORIENTATION_SIMILARITY
from .store import EmbeddingRecord, PoolingSpec, read_store, usage_vector
from .wic import PairScore, ThresholdSpec
from .wug import PAIR_ALL, PAIR_COMPARE, PAIR_EARLIER, PAIR_LATER, Usage, build_graph, build_graph_from_scores

TASKS = ("wic-graded", "wic-ordinal", "wsi", "lscd-graded", "lscd-binary", "compare")

TASK_MEASURES = {
    "wic-graded": (None,),
    "wic-ordinal": (None,),
    "wsi": (None,),
    "lscd-graded": ("jsd", "apd", "apd-thresholded", "cos", "diasense"),
    "lscd-binary": ("binary",),
    "compare": ("apd", "compare-clusters", "apd-thresholded"),
}

DEFAULT_MEASURE = {
    "lscd-graded": "jsd",
    "lscd-binary": "binary",
    "compare": "apd",
}

#: manifest task required to evaluate each run task
TASK_BACKING = {
    "wic-graded": "wic",
    "wic-ordinal": "wic",
    "wsi": "wsi",
    "lscd-graded": "lscd-graded",
    "lscd-binary": "lscd-binary",
    "compare": "compare",
}

CLUSTER_MEASURES = ("jsd", "binary", "compare-clusters")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; flag overrides beat config-file values."""

    dataset: str
    task: str
    split: str = "all"
    use_source: str = "golden-uses"
    n_uses: int | None = None
    pair_source: str = "golden-pairs"
    max_pairs: int | None = None
    scorer: str | None = None
    scores_path: str | None = None
    scores_are_distances: bool = False
    embeddings_path: str | None = None
    metric: str = "cosine"
    subword_pooling: str = "mean"
    layers: tuple[int, ...] = (-1,)
    layer_aggregation: str = "average"
    thresholds: tuple[float, float, float] | None = None
    cluster_threshold: float = 2.5
    restarts: int = 10
    max_iterations: int = 100
    allow_singletons: bool = True
    measure: str | None = None
    diasense_variant: str = "ratio"
    binary_min_new: int | None = None
    binary_max_old: int | None = None
    include_noise: bool = False
    missing_policy: str = "error"
    alpha_mode: str = "aggregated"
    seed: int = 0
    label: str | None = None
    out: str | None = None

    def resolved_measure(self) -> str | None:
        return self.measure if self.measure is not None else DEFAULT_MEASURE.get(self.task)

    def as_canonical_dict(self) -> dict[str, Any]:
        """Input-defining fields only: the output directory is excluded."""
        doc = {
            "dataset": self.dataset,
            "task": self.task,
            "split": self.split,
            "use_source": self.use_source,
            "n_uses": self.n_uses,
            "pair_source": self.pair_source,
            "max_pairs": self.max_pairs,
            "scorer": self.scorer,
            "scores_path": self.scores_path,
            "scores_are_distances": self.scores_are_distances,
            "embeddings_path": self.embeddings_path,
            "metric": self.metric,
            "subword_pooling": self.subword_pooling,
            "layers": list(self.layers),
            "layer_aggregation": self.layer_aggregation,
            "thresholds": list(self.thresholds) if self.thresholds else None,
            "cluster_threshold": self.cluster_threshold,
            "restarts": self.restarts,
            "max_iterations": self.max_iterations,
            "allow_singletons": self.allow_singletons,
            "measure": self.resolved_measure(),
            "diasense_variant": self.diasense_variant,
            "binary_min_new": self.binary_min_new,
            "binary_max_old": self.binary_max_old,
            "include_noise": self.include_noise,
            "missing_policy": self.missing_policy,
            "alpha_mode": self.alpha_mode,
            "seed": self.seed,
            "label": self.label,
        }
        return doc

    def config_hash(self) -> str:
        canonical = json.dumps(self.as_canonical_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def config_from_dict(doc: Mapping[str, Any]) -> RunConfig:
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError("unknown config keys: " + ", ".join(unknown))
    doc = dict(doc)
    if "layers" in doc and doc["layers"] is not None:
        doc["layers"] = tuple(int(x) for x in doc["layers"])
    if "thresholds" in doc and doc["thresholds"] is not None:
        values = tuple(float(x) for x in doc["thresholds"])
        if len(values) != 3:
            raise ConfigError(f"thresholds must have 3 values, got {len(values)}")
        doc["thresholds"] = values
    try:
        return RunConfig(**doc)
    except TypeError as exc:
        raise ConfigError(str(exc))


def _lemma_seed(seed: int, lemma: str) -> int:
    digest = hashlib.sha256(f"{seed}:{lemma}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def sample_uses(usages: Sequence[Usage], n: int, seed: int) -> list[Usage]:
    """Uniform sample of n usages without replacement, id-sorted output.

    Deterministic for a seed; returns everything when n covers the set.
    """
    if n < 1:
        raise ConfigError(f"sample size must be >= 1, got {n}")
    ordered = sorted(usages, key=lambda u: u.id)
    if n >= len(ordered):
        return ordered
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(ordered), size=n, replace=False)
    return [ordered[i] for i in sorted(chosen)]


def validate_config(config: RunConfig, manifest: DatasetManifest) -> None:
    """Reject incompatible task/measure/scorer combinations up front."""
    if config.task not in TASKS:
        raise ConfigError(f"unknown task {config.task!r}; expected one of {TASKS}")
    measure = config.resolved_measure()
    if measure not in TASK_MEASURES[config.task]:
        raise ConfigError(
            f"measure {measure!r} incompatible with task {config.task!r}; "
            f"allowed: {TASK_MEASURES[config.task]}"
        )
    backing = TASK_BACKING[config.task]
    if backing not in manifest.tasks:
        raise ConfigError(
            f"dataset {manifest.name!r} does not support evaluation task "
            f"{config.task!r} (declared: {manifest.tasks})"
        )
    if config.use_source not in ("golden-uses", "corpus-sample"):
        raise ConfigError(f"unknown use source {config.use_source!r}")
    if config.use_source == "corpus-sample" and config.n_uses is None:
        raise ConfigError("corpus-sample needs n_uses")
    if config.pair_source not in ("golden-pairs", "generated"):
        raise ConfigError(f"unknown pair source {config.pair_source!r}")
    if config.task in ("wic-graded", "wic-ordinal") and config.pair_source != "golden-pairs":
        raise ConfigError("WiC evaluation needs golden pairs (only they carry gold labels)")
    if config.missing_policy not in metrics.MISSING_POLICIES:
        raise ConfigError(f"unknown missing policy {config.missing_policy!r}")
    if config.alpha_mode not in ("aggregated", "annotators"):
        raise ConfigError(f"unknown alpha mode {config.alpha_mode!r}")

    needs_scores = config.task in ("wic-graded", "wic-ordinal", "wsi") or measure in (
        "jsd", "binary", "compare-clusters", "apd", "apd-thresholded", "diasense",
    )
    if measure == "cos":
        if not config.embeddings_path:
            raise ConfigError("measure 'cos' needs an embedding store (embeddings_path)")
    elif needs_scores:
        if config.scorer not in ("embedding", "external-file"):
            raise ConfigError(
                f"task {config.task!r} needs a scorer (embedding or external-file), "
                f"got {config.scorer!r}"
            )
        if config.scorer == "embedding" and not config.embeddings_path:
            raise ConfigError("scorer 'embedding' needs embeddings_path")
        if config.scorer == "external-file" and not config.scores_path:
            raise ConfigError("scorer 'external-file' needs scores_path")
    if config.task == "wic-ordinal" or measure == "apd-thresholded":
        if config.thresholds is None:
            raise ConfigError("this run discretizes scores and needs thresholds (t1 < t2 < t3)")
    if measure == "diasense" and config.diasense_variant == "ratio":
        if config.scorer == "external-file" and not config.scores_are_distances:
            raise ConfigError(
                "diasense ratio needs true distances; external similarity scores "
                "cannot be converted (use scores_are_distances or the difference variant)"
            )
    if config.diasense_variant not in ("ratio", "difference"):
        raise ConfigError(f"unknown diasense variant {config.diasense_variant!r}")


@dataclass
class EvalReport:
    """Run outcome: metadata, per-item predictions, metric results, timing.

    ``timing_seconds`` stays out of the serialized report so reruns are
    byte-identical.
    """

    dataset_name: str
    dataset_version: str
    task: str
    split: str
    measure: str | None
    config: dict[str, Any]
    config_hash: str
    seed: int
    predictions: list[dict[str, Any]] = field(default_factory=list)
    metrics: dict[str, dict[str, Any]] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    timing_seconds: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset_name": self.dataset_name,
            "dataset_version": self.dataset_version,
            "task": self.task,
            "split": self.split,
            "measure": self.measure,
            "config": self.config,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "predictions": self.predictions,
            "metrics": self.metrics,
            "notes": self.notes,
        }


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _select_lemmas(config: RunConfig, manifest: DatasetManifest) -> list[str]:
    if config.split == "all":
        return sorted(manifest.lemmas)
    split_file = manifest.split_file()
    if split_file is None or not split_file.exists():
        raise ConfigError(
            f"split {config.split!r} requested but dataset has no split file"
        )
    split = ingest.load_split(split_file)
    selected = set(split.lemmas(config.split)) & set(manifest.lemmas)
    return sorted(selected)


def _load_external(config: RunConfig) -> dict[tuple[str, str], float]:
    scores = wic.load_external_scores(config.scores_path, config.scores_are_distances)
    return {s.pair.key: s.score for s in scores}


class _Scorer:
    """Scores typed pairs for one lemma from the configured source."""

    def __init__(self, config: RunConfig,
                 external: dict[tuple[str, str], float] | None,
                 records: dict[str, EmbeddingRecord] | None):
        self.config = config
        self.external = external
        self.records = records
        self.pooling = PoolingSpec(
            subword_pooling=config.subword_pooling,
            layer_selection=tuple(config.layers),
            layer_aggregation=config.layer_aggregation,
        )

    def score(self, pairs: list[wic.UsagePair]) -> list[PairScore]:
        if self.config.scorer == "embedding":
            return wic.score_pairs_from_embeddings(
                pairs, self.records, self.pooling, self.config.metric
            )
        scored = []
        for pair in pairs:
            value = self.external.get(pair.key)
            if value is not None:
                scored.append(PairScore(pair=pair, score=value, source=wic.SOURCE_EXTERNAL))
        return scored

    def distance_of(self, score: PairScore) -> float:
        """Recover a distance from a similarity score, when well-defined."""
        if self.config.scorer == "embedding":
            return wic.distance_from_similarity(score.score, self.config.metric)
        return -score.score  # external: exact only when loaded as distances


def _pairs_for(config: RunConfig, data: ingest.LemmaData, usages: list[Usage],
               needed_type: str, seed: int) -> list[wic.UsagePair]:
    selected = {u.id for u in usages}
    if config.pair_source == "golden-pairs":
        judged = [
            j.pair for j in data.judgments
            if j.id1 in selected and j.id2 in selected
        ]
        pairs = wic.pairs_from_judged(usages, judged)
        if needed_type == PAIR_COMPARE:
            pairs = [p for p in pairs if p.pair_type == PAIR_COMPARE]
        return pairs
    return wic.generate_pairs(usages, needed_type, config.max_pairs, seed)


def run(config: RunConfig, formats: Sequence[str] = ("json", "tsv")) -> EvalReport:
    """Execute one configured run end to end.

    When the config names an output directory the report is written there
    in the requested formats.
    """
    started = time.perf_counter()
    manifest = ingest.load_manifest(config.dataset)
    validate_config(config, manifest)
    lemmas = _select_lemmas(config, manifest)
    if not lemmas:
        raise ConfigError(f"no lemmas selected for split {config.split!r}")
    measure = config.resolved_measure()

    external = _load_external(config) if config.scorer == "external-file" else None
    records = None
    if config.embeddings_path:
        records = read_store(config.embeddings_path)
    scorer = _Scorer(config, external, records)

    report = EvalReport(
        dataset_name=manifest.name,
        dataset_version=manifest.version,
        task=config.task,
        split=config.split,
        measure=measure,
        config=config.as_canonical_dict(),
        config_hash=config.config_hash(),
        seed=config.seed,
    )

    if config.task in ("wic-graded", "wic-ordinal"):
        _run_wic(config, manifest, lemmas, scorer, report)
    elif config.task == "wsi":
        _run_wsi(config, manifest, lemmas, scorer, report)
    else:
        _run_lscd(config, manifest, lemmas, scorer, report, measure)

    report.timing_seconds = time.perf_counter() - started
    if config.out:
        write_report(report, config.out, formats=formats)
    return report


def _selected_usages(config: RunConfig, data: ingest.LemmaData, seed: int) -> list[Usage]:
    usages = sorted(data.usages, key=lambda u: u.id)
    if config.use_source == "corpus-sample":
        usages = sample_uses(usages, config.n_uses, seed)
    return usages


def _cluster_params(config: RunConfig, seed: int) -> ClusteringParams:
    return ClusteringParams(
        threshold=config.cluster_threshold,
        restarts=config.restarts,
        max_iterations=config.max_iterations,
        seed=seed,
        allow_singletons=config.allow_singletons,
    )


def _run_wic(config: RunConfig, manifest: DatasetManifest, lemmas: list[str],
             scorer: _Scorer, report: EvalReport) -> None:
    gold_by_pair: dict[tuple[str, str], float] = {}
    ratings_by_pair: dict[tuple[str, str], dict[str, int | None]] = {}
    pred_by_pair: dict[tuple[str, str], float | None] = {}
    type_by_pair: dict[tuple[str, str], str] = {}

    for lemma in lemmas:
        seed = _lemma_seed(config.seed, lemma)
        data = ingest.load_lemma(manifest, lemma)
        usages = _selected_usages(config, data, seed)
        graph = build_graph(
            usages,
            [j for j in data.judgments
             if j.id1 in {u.id for u in usages} and j.id2 in {u.id for u in usages}],
            manifest.aggregation,
        )
        pairs = wic.pairs_from_judged(usages, graph.edges.keys())
        scored = {s.pair.key: s.score for s in scorer.score(pairs)}
        annotator_ratings: dict[tuple[str, str], dict[str, int | None]] = {}
        if config.task == "wic-ordinal":
            for j in data.judgments:
                annotator_ratings.setdefault(j.pair, {})[j.annotator] = j.rating
        for pair in pairs:
            gold_by_pair[pair.key] = graph.edges[pair.key].weight
            pred_by_pair[pair.key] = scored.get(pair.key)
            type_by_pair[pair.key] = pair.pair_type
            if config.task == "wic-ordinal":
                ratings_by_pair[pair.key] = annotator_ratings.get(pair.key, {})

    for (id1, id2) in sorted(gold_by_pair):
        row = {
            "identifier1": id1,
            "identifier2": id2,
            "pair_type": type_by_pair[(id1, id2)],
            "gold": gold_by_pair[(id1, id2)],
            "score": pred_by_pair[(id1, id2)],
        }
        if config.task == "wic-ordinal" and pred_by_pair[(id1, id2)] is not None:
            row["ordinal"] = wic.discretize(
                pred_by_pair[(id1, id2)], ThresholdSpec(*config.thresholds)
            )
        report.predictions.append(row)

    if config.task == "wic-graded":
        _correlations(report, gold_by_pair, pred_by_pair, config, {})
        for pair_type in (PAIR_COMPARE, PAIR_EARLIER, PAIR_LATER):
            subset_ids = [k for k, t in type_by_pair.items() if t == pair_type]
            if not subset_ids:
                continue
            sub_gold = {k: gold_by_pair[k] for k in subset_ids}
            sub_pred = {k: pred_by_pair[k] for k in subset_ids}
            try:
                sub_series = metrics.PairedSeries.build(sub_gold, sub_pred, config.missing_policy)
                sub_rho, sub_cov = metrics.spearman(sub_series)
            except (UndefinedMetricError, DegenerateInputError) as exc:
                report.notes.append(f"spearman[{pair_type}] skipped: {exc}")
                continue
            report.metrics[f"spearman_{pair_type.lower()}"] = {
                "value": sub_rho, "coverage": sub_cov, "n": len(sub_series),
            }
    else:
        thresholds = ThresholdSpec(*config.thresholds)
        units: list[list[int | None]] = []
        total = len(gold_by_pair)
        scored_pairs = 0
        missing = [str(k) for k in sorted(gold_by_pair) if pred_by_pair[k] is None]
        if missing and config.missing_policy == "error":
            raise DegenerateInputError("missing predictions for: " + ", ".join(missing))
        for key in sorted(gold_by_pair):
            if pred_by_pair[key] is None:
                continue
            scored_pairs += 1
            model = wic.discretize(pred_by_pair[key], thresholds)
            if config.alpha_mode == "aggregated":
                gold_ordinal = _round_half_up(gold_by_pair[key])
                units.append([gold_ordinal, model])
            else:
                per_annotator = ratings_by_pair[key]
                unit = [per_annotator[a] for a in sorted(per_annotator)]
                unit.append(model)
                units.append(unit)
        alpha = metrics.krippendorff_alpha_ordinal(units)
        report.metrics["krippendorff_alpha"] = {
            "value": alpha,
            "coverage": (scored_pairs / total) if total else 0.0,
            "n": scored_pairs,
        }


def _round_half_up(value: float) -> int:
    return max(1, min(4, int(np.floor(value + 0.5))))


def _run_wsi(config: RunConfig, manifest: DatasetManifest, lemmas: list[str],
             scorer: _Scorer, report: EvalReport) -> None:
    per_lemma_ari: dict[str, float | None] = {}
    for lemma in lemmas:
        seed = _lemma_seed(config.seed, lemma)
        data = ingest.load_lemma(manifest, lemma, with_clusters=True)
        usages = _selected_usages(config, data, seed)
        try:
            clustering = _predict_clustering(config, data, usages, scorer, seed)
        except DegenerateInputError as exc:
            per_lemma_ari[lemma] = None
            report.notes.append(f"{lemma}: clustering failed: {exc}")
            continue
        for uid in clustering.ids:
            report.predictions.append(
                {"lemma": lemma, "identifier": uid, "cluster": clustering.assignment[uid]}
            )
        gold = data.gold_clusters.restrict(clustering.ids)
        per_lemma_ari[lemma] = metrics.adjusted_rand_index(
            gold, clustering.restrict(set(gold.assignment)), drop_gold_noise=not config.include_noise
        )
    evaluated = {l: v for l, v in per_lemma_ari.items() if v is not None}
    if not evaluated and config.missing_policy == "error":
        raise DegenerateInputError("no lemma produced a clustering")
    missing = sorted(set(per_lemma_ari) - set(evaluated))
    if missing and config.missing_policy == "error":
        raise DegenerateInputError("missing predictions for: " + ", ".join(missing))
    report.metrics["ari"] = {
        "value": float(np.mean(sorted(evaluated.values()))) if evaluated else None,
        "coverage": len(evaluated) / len(per_lemma_ari) if per_lemma_ari else 0.0,
        "n": len(evaluated),
        "per_lemma": {l: evaluated.get(l) for l in sorted(per_lemma_ari)},
    }


def _predict_clustering(config: RunConfig, data: ingest.LemmaData, usages: list[Usage],
                        scorer: _Scorer, seed: int):
    pairs = _pairs_for(config, data, usages, PAIR_ALL, seed)
    scored = scorer.score(pairs)
    if not scored:
        raise DegenerateInputError("no scored pairs to cluster")
    graph = build_graph_from_scores(
        usages, [(s.pair.key, s.score) for s in scored], lemma=data.lemma
    )
    return correlation_cluster(graph, _cluster_params(config, seed))


def _run_lscd(config: RunConfig, manifest: DatasetManifest, lemmas: list[str],
              scorer: _Scorer, report: EvalReport, measure: str) -> None:
    gold_file = manifest.gold_file()
    if gold_file is None or not gold_file.exists():
        raise ConfigError("dataset has no gold file for change evaluation")
    gold_all = ingest.parse_gold_lscd(gold_file)
    min_new = config.binary_min_new if config.binary_min_new is not None else manifest.binary_min_new
    max_old = config.binary_max_old if config.binary_max_old is not None else manifest.binary_max_old

    predictions: dict[str, measures.ChangeScores] = {}
    for lemma in lemmas:
        seed = _lemma_seed(config.seed, lemma)
        data = ingest.load_lemma(manifest, lemma)
        usages = _selected_usages(config, data, seed)
        try:
            predictions[lemma] = _predict_change(
                config, data, usages, scorer, seed, measure, min_new, max_old
            )
        except DegenerateInputError as exc:
            predictions[lemma] = measures.ChangeScores(lemma=lemma)
            report.notes.append(f"{lemma}: measure failed: {exc}")

    orientation = MEASURE_ORIENTATION[measure]
    for lemma in sorted(predictions):
        pred = predictions[lemma]
        if measure == "binary":
            for name, value in (("binary", pred.binary), ("binary_gain", pred.binary_gain),
                                ("binary_loss", pred.binary_loss)):
                report.predictions.append(
                    {"lemma": lemma, "measure": name, "value": value, "orientation": ""}
                )
        else:
            value = pred.graded if measure != "compare-clusters" else pred.compare
            if measure in ("apd", "apd-thresholded") and config.task == "compare":
                value = pred.compare
            report.predictions.append(
                {"lemma": lemma, "measure": measure, "value": value,
                 "orientation": orientation or ""}
            )

    if config.task == "lscd-binary":
        _eval_binary(config, gold_all, predictions, report)
    else:
        _eval_graded(config, gold_all, predictions, report, measure, orientation)


def _predict_change(config: RunConfig, data: ingest.LemmaData, usages: list[Usage],
                    scorer: _Scorer, seed: int, measure: str,
                    min_new: int, max_old: int) -> measures.ChangeScores:
    lemma = data.lemma
    grouping_by_id = {u.id: u.grouping for u in usages}

    if measure == "cos":
        missing = [u.id for u in usages if u.id not in scorer.records]
        if missing:
            raise DegenerateInputError("embedding store lacks usage ids: " + ", ".join(missing))
        vectors = {u.id: usage_vector(scorer.records[u.id], scorer.pooling) for u in usages}
        value = measures.cos_prototype(
            [vectors[u.id] for u in usages if u.grouping == 1],
            [vectors[u.id] for u in usages if u.grouping == 2],
            config.metric,
        )
        return measures.ChangeScores(lemma=lemma, graded=value)

    if measure in ("apd", "apd-thresholded"):
        pairs = _pairs_for(config, data, usages, PAIR_COMPARE, seed)
        scored = [s for s in scorer.score(pairs) if s.pair.pair_type == PAIR_COMPARE]
        if measure == "apd":
            value = measures.apd(scored)
        else:
            value = measures.apd_thresholded(scored, ThresholdSpec(*config.thresholds))
        return measures.ChangeScores(lemma=lemma, graded=value, compare=value)

    if measure == "diasense":
        pairs = _pairs_for(config, data, usages, PAIR_ALL, seed)
        scored = scorer.score(pairs)
        # classify by endpoint groupings: generated ALL pairs carry no type
        by_type: dict[str, list[float]] = {PAIR_COMPARE: [], PAIR_EARLIER: [], PAIR_LATER: []}
        for s in scored:
            g1, g2 = grouping_by_id[s.pair.id1], grouping_by_id[s.pair.id2]
            kind = PAIR_COMPARE if g1 != g2 else (PAIR_EARLIER if g1 == 1 else PAIR_LATER)
            by_type[kind].append(scorer.distance_of(s))
        value = measures.diasense(
            by_type[PAIR_COMPARE], by_type[PAIR_EARLIER], by_type[PAIR_LATER],
            config.diasense_variant,
        )
        return measures.ChangeScores(lemma=lemma, graded=value)

    # cluster-based measures
    clustering = _predict_clustering(config, data, usages, scorer, seed)
    if measure == "jsd":
        earlier = [uid for uid, g in grouping_by_id.items() if g == 1 and uid in clustering.assignment]
        later = [uid for uid, g in grouping_by_id.items() if g == 2 and uid in clustering.assignment]
        if not earlier or not later:
            raise DegenerateInputError("a period has no clustered usages")
        value = measures.jsd_distance(
            measures.sense_distribution(clustering, earlier, config.include_noise),
            measures.sense_distribution(clustering, later, config.include_noise),
        )
        return measures.ChangeScores(lemma=lemma, graded=value)
    if measure == "binary":
        flags = measures.binary_change(
            clustering,
            {uid: g for uid, g in grouping_by_id.items() if uid in clustering.assignment},
            min_new, max_old, config.include_noise,
        )
        return measures.ChangeScores(
            lemma=lemma, binary=flags.binary, binary_gain=flags.gain, binary_loss=flags.loss
        )
    if measure == "compare-clusters":
        compare_pairs = [
            p for p in _pairs_for(config, data, usages, PAIR_COMPARE, seed)
            if p.pair_type == PAIR_COMPARE and p.id1 in clustering.assignment
            and p.id2 in clustering.assignment
        ]
        value = measures.compare_from_clusters(clustering, compare_pairs, config.include_noise)
        return measures.ChangeScores(lemma=lemma, compare=value)
    raise ConfigError(f"unknown measure {measure!r}")


def _eval_binary(config: RunConfig, gold_all: dict[str, ingest.GoldLabels],
                 predictions: dict[str, measures.ChangeScores], report: EvalReport) -> None:
    tracks = (
        ("f1", "change_binary", "binary"),
        ("f1_gain", "change_binary_gain", "binary_gain"),
        ("f1_loss", "change_binary_loss", "binary_loss"),
    )
    for metric_name, gold_attr, pred_attr in tracks:
        gold = {
            l: getattr(g, gold_attr)
            for l, g in gold_all.items()
            if l in predictions and getattr(g, gold_attr) is not None
        }
        if not gold:
            if metric_name == "f1":
                raise ConfigError("gold file lacks change_binary labels")
            continue
        pred = {l: getattr(predictions[l], pred_attr) for l in gold}
        missing = sorted(l for l, v in pred.items() if v is None)
        if missing and config.missing_policy == "error":
            raise DegenerateInputError("missing predictions for: " + ", ".join(missing))
        kept = sorted(l for l in gold if pred[l] is not None)
        result = metrics.f1_binary([gold[l] for l in kept], [pred[l] for l in kept])
        report.metrics[metric_name] = {
            "value": result.f1_positive,
            "macro_f1": result.macro_f1,
            "coverage": len(kept) / len(gold),
            "n": len(kept),
            "confusion": {"tp": result.tp, "fp": result.fp, "fn": result.fn, "tn": result.tn},
            "degenerate": list(result.degenerate),
        }


def _correlations(report: EvalReport, gold: Mapping[str, float],
                  pred: Mapping[str, float | None], config: RunConfig,
                  extras: dict[str, Any]) -> None:
    """Spearman+Pearson into the report; under the drop policy a series too
    degenerate to correlate yields a value-less entry instead of an abort."""
    series = metrics.PairedSeries.build(gold, pred, config.missing_policy)
    try:
        rho, coverage = metrics.spearman(series)
        r, _ = metrics.pearson(series)
    except UndefinedMetricError as exc:
        if config.missing_policy == "error":
            raise
        entry = {"value": None, "coverage": series.coverage, "n": len(series),
                 "note": str(exc), **extras}
        report.metrics["spearman"] = dict(entry)
        report.metrics["pearson"] = dict(entry)
        return
    report.metrics["spearman"] = {"value": rho, "coverage": coverage, "n": len(series), **extras}
    report.metrics["pearson"] = {"value": r, "coverage": coverage, "n": len(series), **extras}


def _eval_graded(config: RunConfig, gold_all: dict[str, ingest.GoldLabels],
                 predictions: dict[str, measures.ChangeScores], report: EvalReport,
                 measure: str, orientation: str | None) -> None:
    if config.task == "compare":
        gold_attr, gold_orientation = "compare", ORIENTATION_SIMILARITY
    else:
        gold_attr, gold_orientation = "change_graded", ORIENTATION_CHANGE
    gold = {
        l: getattr(g, gold_attr)
        for l, g in gold_all.items()
        if l in predictions and getattr(g, gold_attr) is not None
    }
    if not gold:
        raise ConfigError(f"gold file lacks {gold_attr} labels for the selected lemmas")

    def value_of(p: measures.ChangeScores) -> float | None:
        if config.task == "compare" and measure in ("apd", "apd-thresholded", "compare-clusters"):
            return p.compare
        return p.graded

    flip = orientation == ORIENTATION_SIMILARITY and gold_orientation == ORIENTATION_CHANGE
    pred: dict[str, float | None] = {}
    for lemma in gold:
        value = value_of(predictions[lemma])
        pred[lemma] = None if value is None else (-value if flip else value)
    extras = {"orientation": orientation, "gold_orientation": gold_orientation,
              "predictions_negated": flip}
    _correlations(report, gold, pred, config, extras)


# ---------------------------------------------------------------------------
# serialization


def write_report(report: EvalReport, out_dir: str | Path, formats: Sequence[str] = ("json", "tsv")) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    doc = report.to_dict()
    if "json" in formats:
        path = out_dir / "report.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    if "tsv" in formats:
        written.extend(render_tsv(doc, out_dir))
    if "plot" in formats:
        written.append(render_plot([doc], out_dir / "report.png"))
    return written


def render_tsv(doc: Mapping[str, Any], out_dir: str | Path) -> list[Path]:
    """Write metrics.tsv and predictions.tsv for one report dict."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / "metrics.tsv"
    with open(metrics_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("dataset\ttask\tmeasure\tmetric\tvalue\tcoverage\tn\n")
        for name in sorted(doc["metrics"]):
            entry = doc["metrics"][name]
            fh.write(
                "\t".join(
                    [
                        doc["dataset_name"],
                        doc["task"],
                        _fmt(doc["measure"]),
                        name,
                        _fmt(entry.get("value")),
                        _fmt(entry.get("coverage")),
                        _fmt(entry.get("n")),
                    ]
                )
                + "\n"
            )
    predictions_path = out_dir / "predictions.tsv"
    rows = doc["predictions"]
    with open(predictions_path, "w", encoding="utf-8", newline="") as fh:
        if rows and "identifier1" in rows[0]:
            columns = ["identifier1", "identifier2", "pair_type", "gold", "score"]
            if any("ordinal" in r for r in rows):
                columns.append("ordinal")
        elif rows and "identifier" in rows[0]:
            columns = ["lemma", "identifier", "cluster"]
        else:
            columns = ["lemma", "measure", "value", "orientation"]
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(row.get(c)) for c in columns) + "\n")
    return [metrics_path, predictions_path]


PRIMARY_METRIC = {
    "wic-graded": "spearman",
    "wic-ordinal": "krippendorff_alpha",
    "wsi": "ari",
    "lscd-graded": "spearman",
    "lscd-binary": "f1",
    "compare": "spearman",
}


def render_plot(docs: Sequence[Mapping[str, Any]], out_path: str | Path) -> Path:
    """Grouped bar chart: one bar per (config label, dataset)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    tasks = sorted({d["task"] for d in docs})
    if len(tasks) != 1:
        raise ConfigError(f"plot expects reports of one task, got {tasks}")
    metric_name = PRIMARY_METRIC[tasks[0]]
    datasets = sorted({d["dataset_name"] for d in docs})
    labels = []
    for d in docs:
        label = d["config"].get("label") or f"{d['measure'] or d['task']}-{d['config_hash'][:6]}"
        if label not in labels:
            labels.append(label)

    width = 0.8 / max(1, len(labels))
    fig, ax = plt.subplots(figsize=(max(4.0, 1.5 * len(datasets)), 3.5))
    x = np.arange(len(datasets))
    for i, label in enumerate(labels):
        values = []
        for dataset in datasets:
            value = np.nan
            for d in docs:
                d_label = d["config"].get("label") or f"{d['measure'] or d['task']}-{d['config_hash'][:6]}"
                if d["dataset_name"] == dataset and d_label == label:
                    entry = d["metrics"].get(metric_name, {})
                    if entry.get("value") is not None:
                        value = entry["value"]
            values.append(value)
        ax.bar(x + (i - (len(labels) - 1) / 2) * width, values, width, label=label)
    ax.set_xticks(x)
    ax.set_xticklabels(datasets, rotation=20, ha="right")
    ax.set_ylabel(metric_name)
    ax.set_title(f"{tasks[0]} results")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
