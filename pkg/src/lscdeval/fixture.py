"""Synthetic planted-change datasets for desk-scale evaluation.

Each lemma gets a planted sense inventory: stable lemmas keep the same
senses in both periods (with shifting proportions), gain lemmas add a
later-period-only sense, loss lemmas the mirror image.  Annotator
judgments follow the planted truth (4 within a sense, 1 across senses)
with optional uniform corruption noise, and the gold files are derived
from the planted structure with this toolkit's own measure definitions,
so a faithful pipeline can reproduce them exactly at zero noise.

The planted structure depends only on the seed, never on the noise level:
two fixtures that differ only in noise share lemmas, usages and clusters,
and differ purely in judgments.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from . import ingest
from .measures import BinaryChange, binary_change, jsd_distance, sense_distribution
from .store import EmbeddingRecord, write_store
from .wug import Judgment, SenseClustering, Usage

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class FixtureSpec:
    """Planted-change parameters.

    ``n_stable`` lemmas keep their senses in both periods, ``n_gain``
    lemmas get one later-only sense, ``n_loss`` lemmas one earlier-only
    sense.  ``noise`` is the per-judgment probability of replacing the
    true rating with a uniform draw from 1..4.
    """

    n_stable: int = 5
    n_gain: int = 4
    n_loss: int = 1
    annotators: int = 3
    noise: float = 0.0
    name: str = "synthetic-planted"
    version: str = "1.0.0"
    language: str = "xx"

    def __post_init__(self):
        if self.n_stable + self.n_gain + self.n_loss < 2:
            raise ValueError("a fixture needs at least 2 lemmas")
        if not (0.0 <= self.noise <= 1.0):
            raise ValueError(f"noise must be in [0, 1], got {self.noise}")
        if self.annotators < 1:
            raise ValueError("need at least one annotator")

    @property
    def n_lemmas(self) -> int:
        return self.n_stable + self.n_gain + self.n_loss


def _pseudo_word(rng: np.random.Generator, taken: set[str], syllables: int = 3) -> str:
    while True:
        word = "".join(
            _CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))]
            for _ in range(syllables)
        )
        if word not in taken:
            taken.add(word)
            return word


def _sense_plan(kind: str, magnitude: int) -> list[tuple[int, int]]:
    """Counts (earlier, later) per sense for one lemma."""
    if kind == "stable":
        return [(8, max(2, 8 - 2 * magnitude)), (4, 4 + 2 * magnitude)]
    if kind == "gain":
        return [(8, 6), (4, 3), (0, 3 + 2 * magnitude)]
    if kind == "loss":
        # deliberately not the mirror of "gain": distinct planted change values
        return [(6, 8), (3, 4), (4 + 2 * magnitude, 0)]
    raise ValueError(f"unknown lemma kind {kind!r}")


def _make_usages(
    lemma: str,
    plan: list[tuple[int, int]],
    markers: list[str],
    rng: np.random.Generator,
) -> tuple[list[Usage], SenseClustering]:
    usages: list[Usage] = []
    assignment: dict[str, int] = {}
    serial = 0
    for sense, (n_old, n_new) in enumerate(plan):
        for grouping, count in ((1, n_old), (2, n_new)):
            for _ in range(count):
                year = (1850 if grouping == 1 else 1980) + int(rng.integers(40))
                prefix = f"In {year} the "
                context = (
                    prefix
                    + lemma
                    + f" was mentioned beside the {markers[sense]} during episode {serial}."
                )
                uid = f"{lemma}-{grouping}-{serial:03d}"
                usages.append(
                    Usage(
                        id=uid,
                        lemma=lemma,
                        grouping=grouping,
                        context=context,
                        target_span=(len(prefix), len(prefix) + len(lemma)),
                        pos="NN",
                        date=str(year),
                        sentence_span=(0, len(context)),
                    )
                )
                assignment[uid] = sense
                serial += 1
    return usages, SenseClustering(assignment)


def _make_judgments(
    usages: list[Usage],
    planted: SenseClustering,
    annotators: int,
    noise: float,
    noise_rng: np.random.Generator,
) -> list[Judgment]:
    judgments = []
    ids = sorted(u.id for u in usages)
    for id1, id2 in combinations(ids, 2):
        true_rating = 4 if planted.label(id1) == planted.label(id2) else 1
        for a in range(annotators):
            rating = true_rating
            if noise > 0.0 and noise_rng.random() < noise:
                rating = int(noise_rng.integers(1, 5))
            judgments.append(Judgment(id1=id1, id2=id2, annotator=f"ann{a + 1}", rating=rating))
    return judgments


def _gold_for_lemma(
    usages: list[Usage],
    planted: SenseClustering,
    lemma: str,
) -> ingest.GoldLabels:
    earlier = [u.id for u in usages if u.grouping == 1]
    later = [u.id for u in usages if u.grouping == 2]
    graded = jsd_distance(
        sense_distribution(planted, earlier), sense_distribution(planted, later)
    )
    flags: BinaryChange = binary_change(planted, {u.id: u.grouping for u in usages})
    same = sum(
        1 for a in earlier for b in later if planted.label(a) == planted.label(b)
    )
    n_cross = len(earlier) * len(later)
    compare = (4.0 * same + 1.0 * (n_cross - same)) / n_cross
    return ingest.GoldLabels(
        lemma=lemma,
        change_graded=graded,
        change_binary=flags.binary,
        change_binary_gain=flags.gain,
        change_binary_loss=flags.loss,
        compare=compare,
    )


def _median_scores(judgments: list[Judgment]) -> list[tuple[str, str, float]]:
    by_pair: dict[tuple[str, str], list[int]] = {}
    for j in judgments:
        if j.rating is not None:
            by_pair.setdefault(j.pair, []).append(j.rating)
    return [
        (id1, id2, float(statistics.median(ratings)))
        for (id1, id2), ratings in sorted(by_pair.items())
    ]


def _store_records(
    usages: list[Usage],
    planted: SenseClustering,
    rng: np.random.Generator,
    dim: int,
    layers: int,
) -> list[EmbeddingRecord]:
    records = []
    for u in sorted(usages, key=lambda x: x.id):
        base = np.zeros(dim, dtype=np.float32)
        base[planted.label(u.id) % dim] = 1.0
        tokens = int(rng.integers(1, 4))
        values = np.empty((layers, tokens, dim), dtype=np.float32)
        for layer in range(layers):
            for t in range(tokens):
                jitter = rng.normal(0.0, 0.05, size=dim).astype(np.float32)
                values[layer, t] = base + jitter
        records.append(EmbeddingRecord(usage_id=u.id, values=values))
    return records


def make_fixture(
    spec: FixtureSpec,
    seed: int,
    out_dir: str | Path,
    with_store: bool = False,
    store_dim: int = 16,
    store_layers: int = 2,
) -> Path:
    """Write a complete synthetic dataset; returns the manifest path.

    Emits per-lemma uses/judgments/clusters files, dataset-level gold,
    split, per-pair median scores (``gold_scores.tsv``), a stats file with
    the expected node/edge counts, and optionally a synthetic embedding
    store aligned with the planted senses.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    structure_seq, noise_seq, store_seq = np.random.SeedSequence(seed).spawn(3)
    structure_rng = np.random.default_rng(structure_seq)
    noise_rng = np.random.default_rng(noise_seq)

    taken: set[str] = set()
    kinds = (
        ["stable"] * spec.n_stable + ["gain"] * spec.n_gain + ["loss"] * spec.n_loss
    )
    lemmas: list[str] = []
    gold: dict[str, ingest.GoldLabels] = {}
    stats: dict[str, dict] = {}
    all_scores: list[tuple[str, str, float]] = []
    all_records: list[EmbeddingRecord] = []
    store_rng = np.random.default_rng(store_seq)

    magnitude_counters = {"stable": 0, "gain": 0, "loss": 0}
    for kind in kinds:
        magnitude = magnitude_counters[kind]
        magnitude_counters[kind] += 1
        lemma = _pseudo_word(structure_rng, taken)
        lemmas.append(lemma)
        plan = _sense_plan(kind, magnitude)
        markers = [_pseudo_word(structure_rng, taken) for _ in plan]
        usages, planted = _make_usages(lemma, plan, markers, structure_rng)
        judgments = _make_judgments(usages, planted, spec.annotators, spec.noise, noise_rng)

        lemma_dir = out_dir / "data" / lemma
        ingest.write_uses(usages, lemma_dir / "uses.tsv")
        ingest.write_judgments(judgments, lemma_dir / "judgments.tsv")
        ingest.write_clusters(planted, lemma_dir / "clusters.tsv")
        gold[lemma] = _gold_for_lemma(usages, planted, lemma)
        all_scores.extend(_median_scores(judgments))
        stats[lemma] = {
            "kind": kind,
            "n_usages": len(usages),
            "n_edges": len(usages) * (len(usages) - 1) // 2,
            "n_senses": len(plan),
        }
        if with_store:
            all_records.extend(
                _store_records(usages, planted, store_rng, store_dim, store_layers)
            )

    lemmas_sorted = sorted(lemmas)
    ingest.write_gold_lscd(gold, out_dir / "gold.tsv")
    ingest.write_split(ingest.make_split(lemmas_sorted, seed), out_dir / "split.tsv")
    with open(out_dir / "gold_scores.tsv", "w", encoding="utf-8") as fh:
        fh.write("identifier1\tidentifier2\tscore\n")
        for id1, id2, score in sorted(all_scores):
            fh.write(f"{id1}\t{id2}\t{score:.12g}\n")
    with open(out_dir / "stats.json", "w", encoding="utf-8") as fh:
        json.dump(
            {"seed": seed, "noise": spec.noise, "lemmas": stats}, fh, indent=2, sort_keys=True
        )
        fh.write("\n")
    if with_store:
        write_store(all_records, out_dir / "embeddings.bin")

    manifest = ingest.DatasetManifest(
        name=spec.name,
        version=spec.version,
        language=spec.language,
        tasks=("wic", "wsi", "lscd-binary", "lscd-graded", "compare"),
        root=out_dir,
        lemmas=tuple(lemmas_sorted),
        aggregation="median",
        binary_min_new=1,
        binary_max_old=0,
    )
    manifest_path = out_dir / "manifest.json"
    ingest.write_manifest(manifest, manifest_path)
    return manifest_path
