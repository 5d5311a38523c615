from __future__ import annotations

from pathlib import Path

import pytest

from lscdeval.wug import Judgment, Usage, WordUsageGraph, build_graph

DATA_DIR = Path(__file__).parent / "data"
MINIFIX = DATA_DIR / "minifix"


def make_usage(uid: str, grouping: int = 1, lemma: str = "plane", word: str | None = None) -> Usage:
    word = word or lemma
    context = f"the {word} over there"
    start = context.index(word)
    return Usage(
        id=uid,
        lemma=lemma,
        grouping=grouping,
        context=context,
        target_span=(start, start + len(word)),
    )


def graph_from_weights(
    weights: dict[tuple[str, str], float],
    groupings: dict[str, int] | None = None,
    extra_ids: tuple[str, ...] = (),
) -> WordUsageGraph:
    """Tiny graph builder with arbitrary real edge weights."""
    from lscdeval.wug import build_graph_from_scores

    ids = sorted({i for pair in weights for i in pair} | set(extra_ids))
    groupings = groupings or {}
    usages = [make_usage(uid, groupings.get(uid, 1)) for uid in ids]
    return build_graph_from_scores(usages, [(pair, w) for pair, w in weights.items()])


@pytest.fixture(scope="session")
def minifix_manifest() -> Path:
    assert MINIFIX.exists(), "committed mini fixture missing"
    return MINIFIX / "manifest.json"


def judged(id1: str, id2: str, *ratings: int | None, annotator_prefix: str = "ann") -> list[Judgment]:
    return [
        Judgment(id1=id1, id2=id2, annotator=f"{annotator_prefix}{i}", rating=r)
        for i, r in enumerate(ratings, start=1)
    ]


def simple_graph(ratings_by_pair: dict[tuple[str, str], list[int | None]],
                 groupings: dict[str, int] | None = None,
                 aggregation: str = "median") -> WordUsageGraph:
    ids = sorted({i for pair in ratings_by_pair for i in pair})
    groupings = groupings or {}
    usages = [make_usage(uid, groupings.get(uid, 1)) for uid in ids]
    judgments = []
    for (a, b), ratings in ratings_by_pair.items():
        judgments.extend(judged(a, b, *ratings))
    return build_graph(usages, judgments, aggregation)
