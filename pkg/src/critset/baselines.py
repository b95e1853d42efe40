"""Comparison rankings: degree, PageRank, betweenness, bipartite peeling
and forward greedy coverage maximization."""

from __future__ import annotations

import heapq
import warnings

import numpy as np
import scipy.sparse as sp
from numba import njit

from .bigraph import BipartiteGraph
from .ranking import Ranking, rank_by_scores
from .rankcore import bq_build, bq_decrease, bq_pop

__all__ = [
    "SizeGuardError",
    "ConvergenceWarning",
    "degree_rank",
    "pagerank_scores",
    "pagerank_rank",
    "betweenness_scores",
    "betweenness_rank",
    "dspeel_removal_order",
    "dspeel_rank",
    "forward_greedy_rank",
]

DEFAULT_SIZE_GUARD = 50_000


class SizeGuardError(RuntimeError):
    """A method refused to run because the input exceeds a resource guard."""

    def __init__(self, msg: str, flag: str):
        self.flag = flag
        super().__init__(f"{msg} (raise {flag} to override)")


class ConvergenceWarning(RuntimeWarning):
    pass


def degree_rank(g: BipartiteGraph) -> Ranking:
    deg = g.contributor_degrees.astype(np.float64)
    return Ranking(rank_by_scores(deg), "degree", deg)


def _union_adjacency(g: BipartiteGraph) -> sp.csr_matrix:
    """Symmetric adjacency over contributors ``0..|C|-1`` then items."""
    nc, ni = g.num_contributors, g.num_items
    n = nc + ni
    ptr = np.concatenate([g.contributor_ptr, g.item_ptr[1:] + g.num_edges])
    adj = np.concatenate([g.contributor_adj.astype(np.int64) + nc, g.item_adj.astype(np.int64)])
    data = np.ones(len(adj), dtype=np.float64)
    return sp.csr_matrix((data, adj, ptr), shape=(n, n))


def pagerank_scores(
    g: BipartiteGraph,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iters: int = 200,
):
    """Power-iteration PageRank over contributors and items together.

    Every edge is walkable in both directions and teleportation is uniform
    over all nodes; the mass of isolated contributors is spread uniformly.
    Returns ``(scores, converged, iterations)`` with ``scores`` over all
    ``|C| + |I|`` nodes.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must lie strictly between 0 and 1")
    A = _union_adjacency(g)
    n = A.shape[0]
    deg = np.asarray(A.sum(axis=1)).ravel()
    dangling = deg == 0
    inv = np.zeros(n)
    inv[~dangling] = 1.0 / deg[~dangling]
    x = np.full(n, 1.0 / n)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        y = damping * (A @ (x * inv))
        y += (damping * x[dangling].sum() + (1.0 - damping)) / n
        err = np.abs(y - x).sum()
        x = y
        if err < tol:
            converged = True
            break
    return x, converged, it


def pagerank_rank(
    g: BipartiteGraph,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iters: int = 200,
) -> Ranking:
    x, converged, it = pagerank_scores(g, damping, tol, max_iters)
    if not converged:
        warnings.warn(
            f"PageRank did not converge within {max_iters} iterations", ConvergenceWarning
        )
    scores = x[: g.num_contributors].copy()
    return Ranking(
        rank_by_scores(scores),
        "pagerank",
        scores,
        {"converged": converged, "iterations": it, "damping": damping},
    )


@njit(cache=True)
def _brandes_kernel(ptr, adj):
    n = len(ptr) - 1
    bc = np.zeros(n, dtype=np.float64)
    sigma = np.zeros(n, dtype=np.float64)
    dist = np.full(n, -1, dtype=np.int64)
    delta = np.zeros(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    for s in range(n):
        if ptr[s + 1] == ptr[s]:
            continue
        # BFS; `order` doubles as the queue and the non-increasing-distance stack
        sigma[s] = 1.0
        dist[s] = 0
        order[0] = s
        qh = 0
        qt = 1
        while qh < qt:
            v = order[qh]
            qh += 1
            dv = dist[v]
            for e in range(ptr[v], ptr[v + 1]):
                w = adj[e]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    order[qt] = w
                    qt += 1
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
        for k in range(qt - 1, -1, -1):
            w = order[k]
            dw = dist[w]
            coeff = (1.0 + delta[w]) / sigma[w]
            for e in range(ptr[w], ptr[w + 1]):
                v = adj[e]
                if dist[v] == dw - 1:
                    delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
        for k in range(qt):
            w = order[k]
            sigma[w] = 0.0
            dist[w] = -1
            delta[w] = 0.0
    return bc * 0.5


def betweenness_scores(g: BipartiteGraph, size_guard: int = DEFAULT_SIZE_GUARD) -> np.ndarray:
    """Exact shortest-path betweenness of every node (contributors first).

    Unnormalized, with each unordered source/target pair counted once.
    """
    n = g.num_contributors + g.num_items
    if n > size_guard:
        raise SizeGuardError(
            f"betweenness on {n} nodes exceeds the size guard of {size_guard}", "--size-guard"
        )
    A = _union_adjacency(g)
    return _brandes_kernel(A.indptr.astype(np.int64), A.indices.astype(np.int64))


def betweenness_rank(g: BipartiteGraph, size_guard: int = DEFAULT_SIZE_GUARD) -> Ranking:
    scores = betweenness_scores(g, size_guard)[: g.num_contributors].copy()
    return Ranking(rank_by_scores(scores), "betweenness", scores)


@njit(cache=True)
def _peel_kernel(ptr, adj):
    n = len(ptr) - 1
    key = np.empty(n, dtype=np.int64)
    for v in range(n):
        key[v] = ptr[v + 1] - ptr[v]
    head, tail, nxt, prv, state = bq_build(key)
    removed = np.zeros(n, dtype=np.bool_)
    out = np.empty(n, dtype=np.int64)
    for t in range(n):
        v = bq_pop(head, tail, nxt, prv, key, state)
        out[t] = v
        removed[v] = True
        for e in range(ptr[v], ptr[v + 1]):
            w = adj[e]
            if not removed[w]:
                bq_decrease(head, tail, nxt, prv, key, state, w)
    return out


def dspeel_removal_order(g: BipartiteGraph) -> np.ndarray:
    """Min-degree peeling order over all nodes; items are offset by ``|C|``."""
    A = _union_adjacency(g)
    return _peel_kernel(A.indptr.astype(np.int64), A.indices.astype(np.int64))


def dspeel_rank(g: BipartiteGraph) -> Ranking:
    """Reverse min-degree peeling of the whole bipartite graph, contributors only.

    Contributors and items are peeled together, contributors before items
    at equal degree.
    """
    removal = dspeel_removal_order(g)
    contrib = removal[removal < g.num_contributors]
    return Ranking(contrib[::-1].copy(), "dspeel")


@njit(cache=True)
def _greedy_kernel(cptr, cadj, iptr, iadj):
    nc = len(cptr) - 1
    ni = len(iptr) - 1
    missing = np.empty(ni, dtype=np.int64)
    for i in range(ni):
        missing[i] = iptr[i + 1] - iptr[i]
    deg = np.empty(nc, dtype=np.int64)
    for c in range(nc):
        deg[c] = cptr[c + 1] - cptr[c]
    gain = np.zeros(nc, dtype=np.int64)
    for i in range(ni):
        if missing[i] == 1:
            gain[iadj[iptr[i]]] += 1
    selected = np.zeros(nc, dtype=np.bool_)
    # lazy max-heap of (-gain, -residual degree on a zero-gain plateau, id)
    heap = [(np.int64(0), np.int64(0), np.int64(0))]
    heap.pop()
    for c in range(nc):
        if gain[c] > 0:
            heap.append((-gain[c], np.int64(0), np.int64(c)))
        else:
            heap.append((np.int64(0), -deg[c], np.int64(c)))
    heapq.heapify(heap)
    order = np.empty(nc, dtype=np.int64)
    t = 0
    while t < nc:
        ng, nd, c = heapq.heappop(heap)
        if selected[c] or -ng != gain[c]:
            continue
        order[t] = c
        t += 1
        selected[c] = True
        for e in range(cptr[c], cptr[c + 1]):
            i = cadj[e]
            missing[i] -= 1
            if missing[i] == 1:
                for f in range(iptr[i], iptr[i + 1]):
                    u = iadj[f]
                    if not selected[u]:
                        gain[u] += 1
                        heapq.heappush(heap, (-gain[u], np.int64(0), u))
                        break
    return order


def forward_greedy_rank(g: BipartiteGraph) -> Ranking:
    """Repeatedly add the contributor with the largest coverage gain.

    Gains are tracked incrementally: an item contributes to the gain of its
    one remaining unselected contributor. When no contributor has positive
    gain, the pick falls back to the largest residual degree (items not yet
    covered; for an unselected contributor this is its degree), then the
    smallest id.
    """
    order = _greedy_kernel(
        g.contributor_ptr,
        g.contributor_adj.astype(np.int64),
        g.item_ptr,
        g.item_adj.astype(np.int64),
    )
    return Ranking(order, "greedy")
