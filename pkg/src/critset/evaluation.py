"""Coverage objective, coverage curves and their normalized area."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .bigraph import BipartiteGraph, GraphError
from .ranking import Ranking, RankingError

__all__ = ["cov", "CoverageCurve", "coverage_curve", "auc_of", "completion_times"]


def _selection_mask(g: BipartiteGraph, S: Iterable[int]) -> np.ndarray:
    ids = np.fromiter((int(c) for c in S), dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= g.num_contributors):
        bad = ids[(ids < 0) | (ids >= g.num_contributors)][0]
        raise GraphError(f"unknown contributor id {bad}")
    mask = np.zeros(g.num_contributors, dtype=bool)
    mask[ids] = True
    return mask


def cov(g: BipartiteGraph, S: Iterable[int]) -> int:
    """Number of items whose contributors all lie in ``S``."""
    mask = _selection_mask(g, S)
    selected = np.add.reduceat(mask[g.item_adj].astype(np.int64), g.item_ptr[:-1])
    return int(np.count_nonzero(selected == g.item_degrees))


def completion_times(g: BipartiteGraph, order: np.ndarray) -> np.ndarray:
    """0-based prefix position at which each item becomes fully covered."""
    pos = np.empty(g.num_contributors, dtype=np.int64)
    pos[order] = np.arange(g.num_contributors)
    return np.maximum.reduceat(pos[g.item_adj], g.item_ptr[:-1])


@dataclass(frozen=True, eq=False)
class CoverageCurve:
    """``covered[k-1]`` is the coverage of the first ``k`` ranked contributors."""

    covered: np.ndarray
    total_items: int
    method: str = ""

    @property
    def num_contributors(self) -> int:
        return len(self.covered)

    @property
    def auc(self) -> float:
        return auc_of(self)

    def fractions(self) -> np.ndarray:
        return self.covered / self.total_items

    def write_csv(self, dest) -> None:
        """Write ``k,covered,fraction`` rows, starting with the empty prefix."""
        if isinstance(dest, (str, os.PathLike)):
            with open(dest, "w", encoding="utf-8", newline="\n") as fh:
                self.write_csv(fh)
            return
        dest.write("k,covered,fraction\n")
        dest.write("0,0,0.0\n")
        n = self.total_items
        for k, v in enumerate(self.covered.tolist(), start=1):
            dest.write(f"{k},{v},{v / n!r}\n")

    def summary(self) -> dict:
        return {
            "method": self.method,
            "auc": self.auc,
            "num_contributors": self.num_contributors,
            "num_items": self.total_items,
        }

    def write_summary(self, dest) -> None:
        text = json.dumps(self.summary()) + "\n"
        if isinstance(dest, (str, os.PathLike)):
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            dest.write(text)


def coverage_curve(g: BipartiteGraph, r: Ranking | np.ndarray) -> CoverageCurve:
    """Coverage of every prefix of ``r`` in one pass over the edges.

    Each item is counted from the prefix that contains its last contributor
    onwards, so the curve comes from a histogram of completion positions.
    """
    order = r.order if isinstance(r, Ranking) else np.asarray(r)
    method = r.method if isinstance(r, Ranking) else ""
    n = g.num_contributors
    if len(order) != n:
        raise RankingError(f"ranking has {len(order)} entries, graph has {n} contributors")
    seen = np.zeros(n, dtype=bool)
    if n and (order.min() < 0 or order.max() >= n):
        raise RankingError("ranking contains ids outside the contributor range")
    seen[order] = True
    if not seen.all():
        raise RankingError("ranking is not a permutation of the contributors")
    done = completion_times(g, order)
    covered = np.cumsum(np.bincount(done, minlength=n))
    return CoverageCurve(covered, g.num_items, method)


def auc_of(curve: CoverageCurve) -> float:
    """Mean covered fraction over all prefix lengths ``1..|C|``."""
    return float(curve.covered.sum()) / (curve.num_contributors * curve.total_items)
