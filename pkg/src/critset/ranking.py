"""Contributor rankings and their text/CSV serialization."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .bigraph import BipartiteGraph, GraphError

__all__ = ["Ranking", "RankingError", "rank_by_scores", "write_ranking", "read_ranking"]


class RankingError(GraphError):
    pass


@dataclass(eq=False)
class Ranking:
    """A full ordering of contributor ids, most critical first.

    ``scores`` is indexed by contributor id (not by rank position) and is
    ``None`` for purely ordinal methods.
    """

    order: np.ndarray
    method: str
    scores: np.ndarray | None = None
    info: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.order)

    def labels(self, g: BipartiteGraph) -> list[str]:
        lab = g.contributor_labels
        return [lab[c] for c in self.order]

    def is_permutation(self, n: int) -> bool:
        if len(self.order) != n:
            return False
        seen = np.zeros(n, dtype=bool)
        o = np.asarray(self.order)
        if n and (o.min() < 0 or o.max() >= n):
            return False
        seen[o] = True
        return bool(seen.all())

    def ordered_scores(self) -> np.ndarray | None:
        return None if self.scores is None else self.scores[self.order]


def rank_by_scores(scores: np.ndarray) -> np.ndarray:
    """Order ids by score descending, breaking ties by ascending id."""
    scores = np.asarray(scores, dtype=np.float64)
    ids = np.arange(len(scores))
    return np.lexsort((ids, -scores))


def _format_score(x: float) -> str:
    return repr(float(x))


def write_ranking(g: BipartiteGraph, r: Ranking, dest, fmt: str = "csv") -> None:
    """Write ``r`` as CSV (``rank,contributor,score``) or as plain labels."""
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            write_ranking(g, r, fh, fmt)
        return
    labels = g.contributor_labels
    if fmt == "text":
        for c in r.order:
            dest.write(f"{labels[c]}\n")
        return
    if fmt != "csv":
        raise ValueError(f"unknown ranking format {fmt!r}")
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["rank", "contributor", "score"])
    for k, c in enumerate(r.order, start=1):
        score = "" if r.scores is None else _format_score(r.scores[c])
        w.writerow([k, labels[c], score])


def read_ranking(g: BipartiteGraph, source, method: str = "file") -> Ranking:
    """Read a ranking written by :func:`write_ranking` (either format).

    Every contributor of ``g`` must appear exactly once.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return read_ranking(g, fh, method)
    text = source.read()
    lines = text.splitlines()
    labels: list[str] = []
    scores: list[str] = []
    if lines and lines[0].strip() == "rank,contributor,score":
        for row in csv.reader(io.StringIO("\n".join(lines[1:]))):
            if not row:
                continue
            labels.append(row[1])
            scores.append(row[2] if len(row) > 2 else "")
    else:
        labels = [ln.strip() for ln in lines if ln.strip()]
    index = {lab: k for k, lab in enumerate(g.contributor_labels)}
    order = np.empty(len(labels), dtype=np.int64)
    seen: set[int] = set()
    for k, lab in enumerate(labels):
        c = index.get(lab)
        if c is None:
            raise RankingError(f"ranking label {lab!r} is not a contributor of the graph")
        if c in seen:
            raise RankingError(f"ranking label {lab!r} appears more than once")
        seen.add(c)
        order[k] = c
    if len(order) != g.num_contributors:
        missing = next(lab for c, lab in enumerate(g.contributor_labels) if c not in seen)
        raise RankingError(f"ranking is missing contributor {missing!r}")
    score_arr = None
    if scores and all(s != "" for s in scores):
        score_arr = np.empty(g.num_contributors)
        score_arr[order] = np.array(scores, dtype=np.float64)
    return Ranking(order, method, score_arr)
