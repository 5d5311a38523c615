from __future__ import annotations

from pathlib import Path

import pytest
import torch
from transformers import (
    BertConfig,
    BertForSequenceClassification,
    BertModel,
    BertTokenizerFast,
)

DATA_DIR = Path(__file__).parent / "data"
USES = DATA_DIR / "uses.tsv"

# wordpiece vocabulary at the character level: every word splits into
# several subwords, which exercises span alignment properly
VOCAB = (
    ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    + list("abcdefghijklmnopqrstuvwxyz")
    + ["##" + c for c in "abcdefghijklmnopqrstuvwxyz"]
    + list("0123456789")
    + ["##" + d for d in "0123456789"]
    + [".", ",", "-"]
)


def _tokenizer(out: Path) -> BertTokenizerFast:
    (out / "vocab.txt").write_text("\n".join(VOCAB), encoding="utf-8")
    # positional: the parameter was renamed vocab_file -> vocab across
    # transformers major versions
    return BertTokenizerFast(str(out / "vocab.txt"), do_lower_case=True)


def _config(n_layers: int) -> BertConfig:
    return BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=n_layers,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=256,
    )


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory) -> Path:
    """Small local 4-layer encoder with deterministic weights."""
    out = tmp_path_factory.mktemp("ckpt4")
    tokenizer = _tokenizer(out)
    torch.manual_seed(1234)
    model = BertModel(_config(4))
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    return out


@pytest.fixture(scope="session")
def deep_checkpoint(tmp_path_factory) -> Path:
    """12-layer sibling for layer-selection checks."""
    out = tmp_path_factory.mktemp("ckpt12")
    tokenizer = _tokenizer(out)
    torch.manual_seed(1234)
    model = BertModel(_config(12))
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    return out


@pytest.fixture(scope="session")
def classifier_checkpoint(tmp_path_factory) -> Path:
    """Tiny pair classifier standing in for a trained cross-encoder.

    Sanity-trained on the test domain (identical contexts -> same meaning,
    different contexts -> different) so that score-pairs runs produce
    sensible probabilities; seeded, a few seconds on CPU.
    """
    from lscd_embedder.uses_io import parse_uses

    out = tmp_path_factory.mktemp("ckpt-cls")
    tokenizer = _tokenizer(out)
    torch.manual_seed(99)
    model = BertForSequenceClassification(_config(2))

    contexts = [u.context for u in parse_uses(USES)]
    contexts += [
        "the plane flew over the hill.",
        "she broke her arm on the ice.",
        "points on a plane satisfy one equation.",
        "the arm of the chair was carved.",
    ]
    examples = [(c, c, 1) for c in contexts]
    examples += [
        (contexts[i], contexts[(i + 3) % len(contexts)], 0) for i in range(len(contexts))
    ]
    encoding = tokenizer(
        [a for a, _, _ in examples],
        [b for _, b, _ in examples],
        padding=True,
        truncation=True,
        return_tensors="pt",
    )
    labels = torch.tensor([y for _, _, y in examples])
    optimizer = torch.optim.AdamW(model.parameters(), lr=5e-3)
    model.train()
    for _ in range(300):
        optimizer.zero_grad()
        output = model(**encoding, labels=labels)
        output.loss.backward()
        optimizer.step()
        predictions = output.logits.argmax(dim=-1)
        if bool((predictions == labels).all()) and output.loss.item() < 0.05:
            break
    model.eval()
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    return out
