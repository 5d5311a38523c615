"""Parsing and writing of WUG-style dataset releases.

All files are tab-separated UTF-8 with a header row.  Span columns use
"start:end" half-open, 0-based character offsets.  Unknown extra columns
are preserved on read but ignored.

A dataset release is described by a JSON manifest: name, version,
language, supported tasks, per-lemma file patterns and dataset-level gold
and split files.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, DataFormatError, IngestionError
from .wug import Judgment, SenseClustering, Usage

SPLIT_VALUES = ("train", "dev", "test")

#: Tasks a dataset can declare; each needs backing gold data.
DATASET_TASKS = ("wic", "wsi", "lscd-binary", "lscd-graded", "compare")

USES_REQUIRED = ("lemma", "identifier", "context", "grouping", "indexes_target_token")
USES_OPTIONAL = ("pos", "date", "indexes_target_sentence")
GOLD_LABEL_COLUMNS = (
    "change_graded",
    "change_binary",
    "change_binary_gain",
    "change_binary_loss",
    "COMPARE",
)


def _read_rows(path: str | Path, required: Sequence[str]) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
            rows = list(reader)
    except FileNotFoundError:
        raise DataFormatError(f"{path}: file not found")
    if not rows:
        raise DataFormatError(f"{path}: empty file, expected a header row")
    header = rows[0]
    for col in required:
        if col not in header:
            raise DataFormatError(f"{path}: missing required column {col!r}")
    body = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and row[0] == ""):
            continue
        if len(row) != len(header):
            raise DataFormatError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
            )
        body.append(row)
    return header, body


def _writer_check(path: Path, fields: Iterable[str], lineno: int) -> None:
    for value in fields:
        if "\t" in value or "\n" in value or "\r" in value:
            raise DataFormatError(
                f"{path}:{lineno}: field contains a tab or newline; "
                "cannot be represented in the tabular format"
            )


def _write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(header) + "\n")
        for lineno, row in enumerate(rows, start=2):
            _writer_check(path, row, lineno)
            fh.write("\t".join(row) + "\n")


def _parse_span(text: str, path: Path, lineno: int, column: str) -> tuple[int, int]:
    parts = text.split(":")
    if len(parts) != 2:
        raise DataFormatError(f"{path}:{lineno}: {column} must be 'start:end', got {text!r}")
    try:
        start, end = int(parts[0]), int(parts[1])
    except ValueError:
        raise DataFormatError(f"{path}:{lineno}: non-integer span {text!r} in {column}")
    return start, end


def parse_uses(path: str | Path) -> list[Usage]:
    """Parse a uses file into Usage records.

    Required columns: lemma, identifier, context, grouping,
    indexes_target_token; optional: pos, date, indexes_target_sentence.
    """
    path = Path(path)
    header, body = _read_rows(path, USES_REQUIRED)
    col = {name: header.index(name) for name in header}
    usages = []
    seen: set[tuple[str, str]] = set()
    for lineno, row in enumerate(body, start=2):
        lemma = row[col["lemma"]]
        uid = row[col["identifier"]]
        if (lemma, uid) in seen:
            raise DataFormatError(f"{path}:{lineno}: duplicate identifier {uid!r} for {lemma!r}")
        seen.add((lemma, uid))
        grouping_text = row[col["grouping"]]
        if grouping_text not in ("1", "2"):
            raise DataFormatError(
                f"{path}:{lineno}: grouping must be 1 or 2, got {grouping_text!r}; "
                "multi-period releases must be pre-split into period pairs"
            )
        context = row[col["context"]]
        span = _parse_span(row[col["indexes_target_token"]], path, lineno, "indexes_target_token")
        sentence_span = None
        if "indexes_target_sentence" in col and row[col["indexes_target_sentence"]]:
            sentence_span = _parse_span(
                row[col["indexes_target_sentence"]], path, lineno, "indexes_target_sentence"
            )
        pos = row[col["pos"]] if "pos" in col and row[col["pos"]] else None
        date = row[col["date"]] if "date" in col and row[col["date"]] else None
        try:
            usage = Usage(
                id=uid,
                lemma=lemma,
                grouping=int(grouping_text),
                context=context,
                target_span=span,
                pos=pos,
                date=date,
                sentence_span=sentence_span,
            )
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}")
        usages.append(usage)
    return usages


def write_uses(usages: Iterable[Usage], path: str | Path) -> None:
    header = list(USES_REQUIRED) + list(USES_OPTIONAL)
    rows = []
    for u in usages:
        rows.append(
            [
                u.lemma,
                u.id,
                u.context,
                str(u.grouping),
                f"{u.target_span[0]}:{u.target_span[1]}",
                u.pos or "",
                u.date or "",
                f"{u.sentence_span[0]}:{u.sentence_span[1]}" if u.sentence_span else "",
            ]
        )
    _write_rows(path, header, rows)


def _parse_rating(text: str, path: Path, lineno: int) -> int | None:
    if text in ("-", "0", "0.0"):
        return None
    try:
        value = float(text)
    except ValueError:
        raise DataFormatError(f"{path}:{lineno}: rating must be 0-4 or '-', got {text!r}")
    if value != int(value):
        raise DataFormatError(f"{path}:{lineno}: fractional rating {text!r}")
    value = int(value)
    if value == 0:
        return None
    if value not in (1, 2, 3, 4):
        raise DataFormatError(f"{path}:{lineno}: rating out of range: {text!r}")
    return value


def parse_judgments(path: str | Path) -> list[Judgment]:
    """Parse a judgments file; 0 or '-' ratings become MISSING."""
    path = Path(path)
    header, body = _read_rows(path, ("identifier1", "identifier2", "annotator", "judgment"))
    col = {name: header.index(name) for name in header}
    judgments = []
    for lineno, row in enumerate(body, start=2):
        rating = _parse_rating(row[col["judgment"]], path, lineno)
        judgments.append(
            Judgment(
                id1=row[col["identifier1"]],
                id2=row[col["identifier2"]],
                annotator=row[col["annotator"]],
                rating=rating,
            )
        )
    return judgments


def write_judgments(judgments: Iterable[Judgment], path: str | Path) -> None:
    rows = [
        [j.id1, j.id2, j.annotator, str(j.rating) if j.rating is not None else "0"]
        for j in judgments
    ]
    _write_rows(path, ("identifier1", "identifier2", "annotator", "judgment"), rows)


def parse_clusters(path: str | Path) -> SenseClustering:
    """Parse a gold clustering; label -1 marks noise."""
    path = Path(path)
    header, body = _read_rows(path, ("identifier", "cluster"))
    col = {name: header.index(name) for name in header}
    assignment: dict[str, int] = {}
    for lineno, row in enumerate(body, start=2):
        uid = row[col["identifier"]]
        if uid in assignment:
            raise DataFormatError(f"{path}:{lineno}: duplicate identifier {uid!r}")
        try:
            label = int(row[col["cluster"]])
        except ValueError:
            raise DataFormatError(f"{path}:{lineno}: non-integer cluster label {row[col['cluster']]!r}")
        if label < -1:
            raise DataFormatError(f"{path}:{lineno}: cluster label must be >= 0 or -1")
        assignment[uid] = label
    return SenseClustering(assignment)


def write_clusters(clustering: SenseClustering, path: str | Path) -> None:
    rows = [[uid, str(clustering.assignment[uid])] for uid in clustering.ids]
    _write_rows(path, ("identifier", "cluster"), rows)


@dataclass(frozen=True, slots=True)
class GoldLabels:
    """Per-lemma gold change labels; absent tasks stay None."""

    lemma: str
    change_graded: float | None = None
    change_binary: int | None = None
    change_binary_gain: int | None = None
    change_binary_loss: int | None = None
    compare: float | None = None

    def __post_init__(self):
        if self.change_graded is not None and not (0.0 <= self.change_graded <= 1.0):
            raise ValueError(f"{self.lemma}: change_graded {self.change_graded} outside [0, 1]")
        for name in ("change_binary", "change_binary_gain", "change_binary_loss"):
            value = getattr(self, name)
            if value is not None and value not in (0, 1):
                raise ValueError(f"{self.lemma}: {name} must be 0 or 1, got {value!r}")
        if all(
            getattr(self, f) is None
            for f in ("change_graded", "change_binary", "change_binary_gain",
                      "change_binary_loss", "compare")
        ):
            raise ValueError(f"{self.lemma}: gold row carries no labels")


def parse_gold_lscd(path: str | Path) -> dict[str, GoldLabels]:
    """Parse dataset-level gold change labels, one row per lemma."""
    path = Path(path)
    header, body = _read_rows(path, ("lemma",))
    present = [c for c in GOLD_LABEL_COLUMNS if c in header]
    if not present:
        raise DataFormatError(f"{path}: no gold label columns found")
    col = {name: header.index(name) for name in header}
    gold: dict[str, GoldLabels] = {}
    for lineno, row in enumerate(body, start=2):
        lemma = row[col["lemma"]]
        if lemma in gold:
            raise DataFormatError(f"{path}:{lineno}: duplicate lemma {lemma!r}")
        values: dict[str, float | int | None] = {}
        for name in present:
            cell = row[col[name]]
            if cell == "":
                values[name] = None
                continue
            try:
                num = float(cell)
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: non-numeric {name} value {cell!r}")
            if name in ("change_binary", "change_binary_gain", "change_binary_loss"):
                if num not in (0.0, 1.0):
                    raise DataFormatError(f"{path}:{lineno}: {name} must be 0 or 1, got {cell!r}")
                values[name] = int(num)
            else:
                values[name] = num
        try:
            gold[lemma] = GoldLabels(
                lemma=lemma,
                change_graded=values.get("change_graded"),
                change_binary=values.get("change_binary"),
                change_binary_gain=values.get("change_binary_gain"),
                change_binary_loss=values.get("change_binary_loss"),
                compare=values.get("COMPARE"),
            )
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}")
    return gold


def write_gold_lscd(gold: Mapping[str, GoldLabels], path: str | Path) -> None:
    def fmt(value) -> str:
        return "" if value is None else f"{value:.12g}"

    rows = []
    for lemma in sorted(gold):
        g = gold[lemma]
        rows.append(
            [lemma, fmt(g.change_graded), fmt(g.change_binary), fmt(g.change_binary_gain),
             fmt(g.change_binary_loss), fmt(g.compare)]
        )
    _write_rows(path, ("lemma",) + GOLD_LABEL_COLUMNS, rows)


@dataclass(frozen=True, slots=True)
class Split:
    """Lemma-level train/dev/test assignment."""

    assignment: Mapping[str, str]

    def lemmas(self, part: str) -> list[str]:
        if part == "all":
            return sorted(self.assignment)
        if part not in SPLIT_VALUES:
            raise ValueError(f"unknown split {part!r}")
        return sorted(l for l, p in self.assignment.items() if p == part)


def load_split(path: str | Path) -> Split:
    """Parse a split file with columns lemma, split."""
    path = Path(path)
    header, body = _read_rows(path, ("lemma", "split"))
    col = {name: header.index(name) for name in header}
    assignment: dict[str, str] = {}
    for lineno, row in enumerate(body, start=2):
        lemma, part = row[col["lemma"]], row[col["split"]]
        if part not in SPLIT_VALUES:
            raise DataFormatError(f"{path}:{lineno}: unknown split value {part!r}")
        if lemma in assignment:
            raise DataFormatError(f"{path}:{lineno}: lemma {lemma!r} listed twice")
        assignment[lemma] = part
    return Split(assignment)


def write_split(split: Split, path: str | Path) -> None:
    rows = [[lemma, split.assignment[lemma]] for lemma in sorted(split.assignment)]
    _write_rows(path, ("lemma", "split"), rows)


def make_split(
    lemmas: Sequence[str],
    seed: int,
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2),
) -> Split:
    """Deterministic lemma-level split for datasets without published splits."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigError(f"split fractions must sum to 1, got {fractions}")
    order = sorted(lemmas)
    random.Random(seed).shuffle(order)
    n = len(order)
    n_train = round(n * fractions[0])
    n_dev = round(n * fractions[1])
    assignment = {}
    for i, lemma in enumerate(order):
        if i < n_train:
            assignment[lemma] = "train"
        elif i < n_train + n_dev:
            assignment[lemma] = "dev"
        else:
            assignment[lemma] = "test"
    return Split(assignment)


@dataclass(frozen=True, slots=True)
class DatasetManifest:
    """Description of one dataset release and where its files live.

    Path patterns may contain a ``{lemma}`` placeholder and are resolved
    relative to the manifest's directory.
    """

    name: str
    version: str
    language: str
    tasks: tuple[str, ...]
    root: Path
    uses_pattern: str = "data/{lemma}/uses.tsv"
    judgments_pattern: str = "data/{lemma}/judgments.tsv"
    clusters_pattern: str = "data/{lemma}/clusters.tsv"
    gold_path: str | None = "gold.tsv"
    split_path: str | None = "split.tsv"
    lemmas: tuple[str, ...] = ()
    aggregation: str = "median"
    binary_min_new: int = 1
    binary_max_old: int = 0

    def uses_file(self, lemma: str) -> Path:
        return self.root / self.uses_pattern.format(lemma=lemma)

    def judgments_file(self, lemma: str) -> Path:
        return self.root / self.judgments_pattern.format(lemma=lemma)

    def clusters_file(self, lemma: str) -> Path:
        return self.root / self.clusters_pattern.format(lemma=lemma)

    def gold_file(self) -> Path | None:
        return self.root / self.gold_path if self.gold_path else None

    def split_file(self) -> Path | None:
        return self.root / self.split_path if self.split_path else None


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: manifest not found")
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON: {exc}")
    for key in ("name", "version", "language", "tasks", "lemmas"):
        if key not in raw:
            raise DataFormatError(f"{path}: manifest missing key {key!r}")
    tasks = tuple(raw["tasks"])
    for task in tasks:
        if task not in DATASET_TASKS:
            raise DataFormatError(f"{path}: unknown task {task!r}")
    if raw.get("aggregation", "median") not in ("median", "mean"):
        raise DataFormatError(f"{path}: unknown aggregation {raw['aggregation']!r}")
    return DatasetManifest(
        name=raw["name"],
        version=raw["version"],
        language=raw["language"],
        tasks=tasks,
        root=path.parent,
        uses_pattern=raw.get("uses", "data/{lemma}/uses.tsv"),
        judgments_pattern=raw.get("judgments", "data/{lemma}/judgments.tsv"),
        clusters_pattern=raw.get("clusters", "data/{lemma}/clusters.tsv"),
        gold_path=raw.get("gold"),
        split_path=raw.get("split"),
        lemmas=tuple(raw["lemmas"]),
        aggregation=raw.get("aggregation", "median"),
        binary_min_new=int(raw.get("binary_min_new", 1)),
        binary_max_old=int(raw.get("binary_max_old", 0)),
    )


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    doc = {
        "name": manifest.name,
        "version": manifest.version,
        "language": manifest.language,
        "tasks": list(manifest.tasks),
        "lemmas": list(manifest.lemmas),
        "uses": manifest.uses_pattern,
        "judgments": manifest.judgments_pattern,
        "clusters": manifest.clusters_pattern,
        "gold": manifest.gold_path,
        "split": manifest.split_path,
        "aggregation": manifest.aggregation,
        "binary_min_new": manifest.binary_min_new,
        "binary_max_old": manifest.binary_max_old,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True, slots=True)
class LemmaData:
    """One lemma's parsed files, cross-checked for dangling references."""

    lemma: str
    usages: tuple[Usage, ...]
    judgments: tuple[Judgment, ...]
    gold_clusters: SenseClustering | None = None


def load_lemma(manifest: DatasetManifest, lemma: str, with_clusters: bool = False) -> LemmaData:
    """Load one lemma's uses and judgments, verifying id integrity.

    Every judgment (and gold cluster) id must resolve to a parsed usage;
    otherwise ingestion fails listing all dangling ids.
    """
    usages = tuple(parse_uses(manifest.uses_file(lemma)))
    known = {u.id for u in usages}
    judgments = tuple(parse_judgments(manifest.judgments_file(lemma)))
    dangling = sorted(
        {i for j in judgments for i in (j.id1, j.id2) if i not in known}
    )
    if dangling:
        raise IngestionError(
            f"{lemma}: judgments reference unknown usage ids: " + ", ".join(dangling)
        )
    clusters = None
    if with_clusters:
        clusters = parse_clusters(manifest.clusters_file(lemma))
        dangling = sorted(set(clusters.assignment) - known)
        if dangling:
            raise IngestionError(
                f"{lemma}: clusters reference unknown usage ids: " + ", ".join(dangling)
            )
    return LemmaData(lemma=lemma, usages=usages, judgments=judgments, gold_clusters=clusters)


def validate_manifest(manifest: DatasetManifest) -> list[str]:
    """Check that declared tasks are backed by files and gold columns.

    Returns a list of problems (empty when the manifest is consistent).
    """
    problems = []
    if not manifest.lemmas:
        problems.append("manifest lists no lemmas")
    for lemma in manifest.lemmas:
        if not manifest.uses_file(lemma).exists():
            problems.append(f"{lemma}: missing uses file {manifest.uses_file(lemma)}")
        if "wic" in manifest.tasks and not manifest.judgments_file(lemma).exists():
            problems.append(f"{lemma}: missing judgments file")
        if "wsi" in manifest.tasks and not manifest.clusters_file(lemma).exists():
            problems.append(f"{lemma}: missing clusters file")
    needs_gold = {"lscd-binary": "change_binary", "lscd-graded": "change_graded",
                  "compare": "COMPARE"}
    declared_gold_tasks = [t for t in manifest.tasks if t in needs_gold]
    if declared_gold_tasks:
        gold_file = manifest.gold_file()
        if gold_file is None or not gold_file.exists():
            problems.append("gold file missing but gold-based tasks declared")
        else:
            try:
                gold = parse_gold_lscd(gold_file)
            except DataFormatError as exc:
                problems.append(str(exc))
                gold = {}
            if gold:
                attr = {"change_binary": "change_binary", "change_graded": "change_graded",
                        "COMPARE": "compare"}
                for task in declared_gold_tasks:
                    column = needs_gold[task]
                    if not any(getattr(g, attr[column]) is not None for g in gold.values()):
                        problems.append(f"task {task!r} declared but column {column} is empty")
    split_file = manifest.split_file()
    if split_file is not None and split_file.exists():
        try:
            load_split(split_file)
        except DataFormatError as exc:
            problems.append(str(exc))
    return problems
