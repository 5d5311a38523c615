"""Extract per-layer target-word vectors from a transformer checkpoint.

The embedder exports raw per-layer vectors for exactly the subword tokens
covering the target span and performs no pooling or aggregation itself,
so those stay sweepable downstream without re-running inference.
Inference is deterministic: eval mode, no dropout, fixed precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from .storefmt import write_store
from .uses_io import Use, parse_uses


@dataclass(frozen=True)
class EmbedJob:
    """One extraction run: checkpoint, uses file, layers, span handling.

    ``layers`` indexes transformer layers 0-based (negatives from the
    end), or the string "all".  ``toklem`` replaces the target surface
    form with its lemma before tokenization, adjusting the span.
    """

    model_id: str
    uses_path: str
    out_path: str
    layers: tuple[int, ...] | str = (-1,)
    toklem: bool = False
    batch_size: int = 16
    device: str = "cpu"
    max_length: int = 512


@dataclass
class EmbedResult:
    written: int
    failures: list[tuple[str, str]] = field(default_factory=list)


def resolve_layers(spec: tuple[int, ...] | str, n_layers: int) -> list[int]:
    if spec == "all":
        return list(range(n_layers))
    resolved = []
    for idx in spec:
        real = idx + n_layers if idx < 0 else idx
        if not (0 <= real < n_layers):
            raise ValueError(f"layer index {idx} out of range for a {n_layers}-layer encoder")
        resolved.append(real)
    return resolved


def apply_toklem(use: Use) -> Use:
    """Substitute the target surface form with the lemma, fixing the span."""
    context = use.context[: use.start] + use.lemma + use.context[use.end :]
    return Use(
        id=use.id,
        lemma=use.lemma,
        grouping=use.grouping,
        context=context,
        start=use.start,
        end=use.start + len(use.lemma),
    )


def target_token_indices(offsets, special_mask, start: int, end: int) -> list[int]:
    """Tokens whose character offsets overlap the half-open target span."""
    indices = []
    for i, ((tok_start, tok_end), special) in enumerate(zip(offsets, special_mask)):
        if special or tok_start == tok_end:
            continue
        if tok_start < end and tok_end > start:
            indices.append(i)
    return indices


def embed(job: EmbedJob) -> EmbedResult:
    """Run extraction; per-usage alignment failures are recorded, not fatal."""
    tokenizer = AutoTokenizer.from_pretrained(job.model_id, use_fast=True)
    model = AutoModel.from_pretrained(job.model_id, output_hidden_states=True)
    model.to(job.device)
    model.eval()
    n_layers = model.config.num_hidden_layers
    layer_indices = resolve_layers(job.layers, n_layers)

    uses = parse_uses(job.uses_path)
    if job.toklem:
        uses = [apply_toklem(u) for u in uses]

    failures: list[tuple[str, str]] = []
    records: list[tuple[str, np.ndarray]] = []
    with torch.no_grad():
        for batch_start in range(0, len(uses), job.batch_size):
            batch = uses[batch_start : batch_start + job.batch_size]
            encoding = tokenizer(
                [u.context for u in batch],
                return_offsets_mapping=True,
                return_special_tokens_mask=True,
                padding=True,
                truncation=True,
                max_length=job.max_length,
                return_tensors="pt",
            )
            offsets = encoding.pop("offset_mapping").tolist()
            special = encoding.pop("special_tokens_mask").tolist()
            encoding = {k: v.to(job.device) for k, v in encoding.items()}
            outputs = model(**encoding)
            # hidden_states[0] is the embedding layer; transformer layer i
            # lives at hidden_states[i + 1]
            hidden = [outputs.hidden_states[i + 1] for i in layer_indices]
            for row, use in enumerate(batch):
                token_ids = target_token_indices(
                    offsets[row], special[row], use.start, use.end
                )
                if not token_ids:
                    failures.append((use.id, "target span maps to no subword token"))
                    continue
                per_layer = [
                    layer[row, token_ids, :].cpu().numpy().astype(np.float32)
                    for layer in hidden
                ]
                records.append((use.id, np.stack(per_layer)))
    written = write_store(records, job.out_path)
    return EmbedResult(written=written, failures=failures)
