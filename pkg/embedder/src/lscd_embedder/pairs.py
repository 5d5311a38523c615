"""Cross-encoder scoring of usage pairs.

A pair classifier jointly reads both contexts and returns the probability
that the target word keeps its meaning; the output TSV plugs into the
core's external-scores loader.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import torch
from transformers import AutoModelForSequenceClassification, AutoTokenizer

from .uses_io import parse_pairs, parse_uses


@dataclass(frozen=True)
class ScoreJob:
    model_id: str
    uses_path: str
    pairs_path: str
    out_path: str
    batch_size: int = 16
    device: str = "cpu"
    max_length: int = 512


@dataclass
class ScoreResult:
    written: int
    failures: list[tuple[str, str]] = field(default_factory=list)


def score_pairs(job: ScoreJob) -> ScoreResult:
    """Score every pair; ids missing from the uses file are recorded."""
    tokenizer = AutoTokenizer.from_pretrained(job.model_id, use_fast=True)
    model = AutoModelForSequenceClassification.from_pretrained(job.model_id)
    model.to(job.device)
    model.eval()

    contexts = {u.id: u.context for u in parse_uses(job.uses_path)}
    pairs = parse_pairs(job.pairs_path)
    failures: list[tuple[str, str]] = []
    usable: list[tuple[str, str]] = []
    for id1, id2 in pairs:
        missing = [i for i in (id1, id2) if i not in contexts]
        if missing:
            failures.append((f"{id1}|{id2}", "unknown usage ids: " + ", ".join(missing)))
        else:
            usable.append((id1, id2))

    out_path = Path(job.out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    written = 0
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("identifier1\tidentifier2\tscore\n")
        with torch.no_grad():
            for batch_start in range(0, len(usable), job.batch_size):
                batch = usable[batch_start : batch_start + job.batch_size]
                encoding = tokenizer(
                    [contexts[a] for a, _ in batch],
                    [contexts[b] for _, b in batch],
                    padding=True,
                    truncation=True,
                    max_length=job.max_length,
                    return_tensors="pt",
                ).to(job.device)
                logits = model(**encoding).logits
                if logits.shape[-1] == 1:
                    probs = torch.sigmoid(logits[:, 0])
                else:
                    probs = torch.softmax(logits, dim=-1)[:, 1]
                for (id1, id2), p in zip(batch, probs.tolist()):
                    fh.write(f"{id1}\t{id2}\t{p:.8g}\n")
                    written += 1
    return ScoreResult(written=written, failures=failures)
