"""Minimal reader for the uses TSV format.

Implemented independently of the core package: the tabular layout is the
interchange contract between the two, so the embedder carries its own
(small) parser rather than a library dependency.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Use:
    id: str
    lemma: str
    grouping: int
    context: str
    start: int
    end: int


def parse_uses(path: str | Path) -> list[Use]:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: empty file, expected a header row")
    header = rows[0]
    for column in ("lemma", "identifier", "context", "grouping", "indexes_target_token"):
        if column not in header:
            raise ValueError(f"{path}: missing required column {column!r}")
    col = {name: header.index(name) for name in header}
    uses = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0]):
            continue
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        span = row[col["indexes_target_token"]].split(":")
        if len(span) != 2:
            raise ValueError(f"{path}:{lineno}: bad span {row[col['indexes_target_token']]!r}")
        start, end = int(span[0]), int(span[1])
        context = row[col["context"]]
        if not (0 <= start < end <= len(context)):
            raise ValueError(f"{path}:{lineno}: span [{start}, {end}) out of bounds")
        uses.append(
            Use(
                id=row[col["identifier"]],
                lemma=row[col["lemma"]],
                grouping=int(row[col["grouping"]]),
                context=context,
                start=start,
                end=end,
            )
        )
    return uses


def parse_pairs(path: str | Path) -> list[tuple[str, str]]:
    """Pairs TSV: columns identifier1, identifier2 (extra columns ignored)."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: empty file, expected a header row")
    header = rows[0]
    for column in ("identifier1", "identifier2"):
        if column not in header:
            raise ValueError(f"{path}: missing required column {column!r}")
    col = {name: header.index(name) for name in header}
    return [
        (row[col["identifier1"]], row[col["identifier2"]])
        for row in rows[1:]
        if row and any(cell for cell in row)
    ]
