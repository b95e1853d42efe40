"""Synthetic bipartite graphs.

* :func:`generate_powerlaw` -- configuration model on truncated power-law
  degree sequences, ``p(d) ~ d**-alpha`` for ``d = 1..D``.
* :func:`generate_er` -- Erdos-Renyi bipartite graphs.
* :func:`dks_to_criticalset` -- densest-k-subgraph instance to a coverage
  instance via the incidence transform.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .bigraph import (
    BipartiteGraph,
    EmptyGraphError,
    GraphError,
    from_edges,
    incidence_transform,
)

__all__ = [
    "GenerationError",
    "GenerationReport",
    "PowerLawConfig",
    "ErConfig",
    "powerlaw_degrees",
    "reconcile_degrees",
    "generate_powerlaw",
    "generate_er",
    "generate_uniform_edges",
    "dks_to_criticalset",
    "TABLE3_CONFIGS",
]

log = logging.getLogger(__name__)


class GenerationError(GraphError):
    pass


@dataclass
class GenerationReport:
    requested_edges: int = 0
    realized_edges: int = 0
    duplicates_collapsed: int = 0
    dropped_items: int = 0
    isolated_contributors: int = 0


@dataclass(frozen=True)
class PowerLawConfig:
    n_contributors: int
    n_items: int
    alpha_C: float
    alpha_I: float
    D_C: int
    D_I: int
    seed: int = 0
    min_degree_C: int = 1
    min_degree_I: int = 1

    def __post_init__(self):
        if self.n_contributors <= 0 or self.n_items <= 0:
            raise GenerationError("node counts must be positive")
        if self.alpha_C <= 0 or self.alpha_I <= 0:
            raise GenerationError("exponents must be positive")
        if not 1 <= self.min_degree_C <= self.D_C or not 1 <= self.min_degree_I <= self.D_I:
            raise GenerationError("minimum degrees must lie in [1, D]")
        if not 1 <= self.D_C <= self.n_items:
            raise GenerationError("D_C must lie in [1, n_items]")
        if not 1 <= self.D_I <= self.n_contributors:
            raise GenerationError("D_I must lie in [1, n_contributors]")


@dataclass(frozen=True)
class ErConfig:
    n_contributors: int
    n_items: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if self.n_contributors <= 0 or self.n_items <= 0:
            raise GenerationError("node counts must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise GenerationError("p must lie in [0, 1]")


def powerlaw_degrees(
    n: int, alpha: float, dmax: int, rng: np.random.Generator, dmin: int = 1
) -> np.ndarray:
    support = np.arange(dmin, dmax + 1)
    w = support.astype(np.float64) ** -alpha
    return rng.choice(support, size=n, p=w / w.sum()).astype(np.int64)


def reconcile_degrees(
    dc: np.ndarray,
    di: np.ndarray,
    rng: np.random.Generator,
    min_c: int = 1,
    min_i: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Equalize stub totals by decrementing random heavy-side nodes.

    Only nodes above their side's minimum degree are decremented, so the
    minimum (1 by default) is preserved.
    """
    dc, di = dc.copy(), di.copy()
    diff = int(dc.sum() - di.sum())
    heavy, floor = (dc, min_c) if diff > 0 else (di, min_i)
    need = abs(diff)
    while need:
        candidates = np.flatnonzero(heavy > floor)
        if len(candidates) == 0:
            raise GenerationError(
                "cannot reconcile degree sums: every node on the heavier side is at its minimum"
            )
        # a batch of uniform draws, each applied only while the node stays above the floor
        picks = rng.choice(candidates, size=min(need, len(candidates)))
        for v in picks:
            if heavy[v] > floor:
                heavy[v] -= 1
                need -= 1
                if not need:
                    break
    return dc, di


def _finish(
    src: np.ndarray, dst: np.ndarray, nc: int, ni: int, report: GenerationReport
) -> BipartiteGraph:
    g, dups = from_edges(src, dst, nc, ni, return_duplicates=True)
    report.duplicates_collapsed = dups
    report.realized_edges = g.num_edges
    report.isolated_contributors = int(np.count_nonzero(g.contributor_degrees == 0))
    return _relabel_canonical(g)


def _relabel_canonical(g: BipartiteGraph) -> BipartiteGraph:
    """Give generated graphs ``c<k>``/``i<k>`` labels in canonical id order.

    Contributors keep their ids (isolated ones included); items are renumbered
    by first appearance in contributor-major order so the graph survives a
    write/read round trip whenever it has no isolated contributors.
    """
    src, dst = g.edge_arrays()
    _, first = np.unique(dst, return_index=True)
    item_order = np.argsort(first, kind="stable")
    imap = np.empty(g.num_items, dtype=np.int64)
    imap[item_order] = np.arange(g.num_items)
    return from_edges(
        src,
        imap[dst],
        g.num_contributors,
        g.num_items,
        [f"c{k}" for k in range(g.num_contributors)],
        [f"i{k}" for k in range(g.num_items)],
    )


def generate_powerlaw(cfg: PowerLawConfig, report: GenerationReport | None = None) -> BipartiteGraph:
    """Bipartite configuration model with truncated power-law degrees.

    Stub lists are paired after shuffling the item side; repeated pairs are
    collapsed (the count is recorded in ``report``).
    """
    report = report if report is not None else GenerationReport()
    rng = np.random.default_rng(cfg.seed)
    dc = powerlaw_degrees(cfg.n_contributors, cfg.alpha_C, cfg.D_C, rng, cfg.min_degree_C)
    di = powerlaw_degrees(cfg.n_items, cfg.alpha_I, cfg.D_I, rng, cfg.min_degree_I)
    dc, di = reconcile_degrees(dc, di, rng, cfg.min_degree_C, cfg.min_degree_I)
    cstubs = np.repeat(np.arange(cfg.n_contributors, dtype=np.int64), dc)
    istubs = np.repeat(np.arange(cfg.n_items, dtype=np.int64), di)
    rng.shuffle(istubs)
    report.requested_edges = len(cstubs)
    g = _finish(cstubs, istubs, cfg.n_contributors, cfg.n_items, report)
    log.debug("powerlaw %s -> %r (%d duplicates)", cfg, g, report.duplicates_collapsed)
    return g


def _sample_pairs(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in ``range(total)`` kept independently with probability ``p``."""
    if p <= 0.0 or total == 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    out = []
    last = -1
    chunk = max(1024, int(total * p * 1.1) + 64)
    while last < total:
        # gaps between kept pairs are geometric
        steps = rng.geometric(p, size=chunk).astype(np.int64)
        idx = last + np.cumsum(steps)
        out.append(idx[idx < total])
        last = int(idx[-1])
    return np.concatenate(out)


def generate_er(cfg: ErConfig, report: GenerationReport | None = None) -> BipartiteGraph:
    """Every contributor/item pair present independently with probability ``p``.

    Items left without contributors are dropped (counted in ``report``);
    isolated contributors are kept.
    """
    report = report if report is not None else GenerationReport()
    rng = np.random.default_rng(cfg.seed)
    nc, ni = cfg.n_contributors, cfg.n_items
    idx = _sample_pairs(nc * ni, cfg.p, rng)
    report.requested_edges = len(idx)
    if len(idx) == 0:
        raise EmptyGraphError()
    src, dst = idx // ni, idx % ni
    present = np.zeros(ni, dtype=bool)
    present[dst] = True
    report.dropped_items = int(ni - present.sum())
    remap = np.cumsum(present) - 1
    return _finish(src, remap[dst], nc, int(present.sum()), report)


def generate_uniform_edges(
    n_contributors: int, n_items: int, num_edges: int, seed: int
) -> BipartiteGraph:
    """Exactly ``num_edges`` distinct pairs drawn uniformly (used for timing sweeps)."""
    total = n_contributors * n_items
    if num_edges > total:
        raise GenerationError("more edges requested than contributor/item pairs")
    rng = np.random.default_rng(seed)
    keys = np.empty(0, dtype=np.int64)
    while len(keys) < num_edges:
        extra = rng.integers(0, total, size=int((num_edges - len(keys)) * 1.05) + 16)
        keys = np.unique(np.concatenate([keys, extra]))
    keys = rng.permutation(keys)[:num_edges]
    src, dst = keys // n_items, keys % n_items
    del keys
    present = np.zeros(n_items, dtype=bool)
    present[dst] = True
    remap = np.cumsum(present) - 1
    return from_edges(src, remap[dst], n_contributors, int(present.sum()))


def dks_to_criticalset(
    edges: Iterable[tuple[Hashable, Hashable]],
    k: int,
    vertices: Sequence[Hashable] | None = None,
) -> tuple[BipartiteGraph, int]:
    """Coverage instance whose ``cov(S)`` equals the induced edge count of ``S``."""
    if k < 0:
        raise GenerationError("budget must be non-negative")
    return incidence_transform(edges, vertices), k


# Synthetic configurations (a)-(f); 5 000 nodes per side.
TABLE3_CONFIGS: dict[str, dict] = {
    "a": dict(kind="pl", alpha_C=0.5, alpha_I=0.5, D_C=20, D_I=100),
    "b": dict(kind="pl", alpha_C=0.5, alpha_I=0.5, D_C=100, D_I=20),
    "c": dict(kind="pl", alpha_C=0.5, alpha_I=0.5, D_C=100, D_I=100),
    "d": dict(kind="pl", alpha_C=0.5, alpha_I=0.7, D_C=100, D_I=100),
    "e": dict(kind="pl", alpha_C=0.7, alpha_I=0.5, D_C=100, D_I=100),
    "f": dict(kind="er", p=0.004),
}


def table3_graph(name: str, seed: int, n: int = 5000) -> BipartiteGraph:
    spec = dict(TABLE3_CONFIGS[name])
    kind = spec.pop("kind")
    if kind == "er":
        return generate_er(ErConfig(n, n, seed=seed, **spec))
    return generate_powerlaw(PowerLawConfig(n, n, seed=seed, **spec))
