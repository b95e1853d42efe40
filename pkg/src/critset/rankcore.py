"""Shapley coverage centrality and minimum-coverage peeling.

Both run in time linear in the number of edges. The peeling order uses a
bucket queue of FIFO doubly linked lists indexed by priority; the queue
primitives below are shared by :class:`BucketQueue` and the compiled
peeling loops.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .bigraph import BipartiteGraph
from .ranking import Ranking, rank_by_scores

__all__ = ["BucketQueue", "shapley_cov", "shapley_rank", "mincov", "mincov_removal_order"]

# queue state slots
_FLOOR = 0
_SIZE = 1


@njit(cache=True)
def bq_append(head, tail, nxt, prv, key, state, v):
    b = key[v]
    t = tail[b]
    prv[v] = t
    nxt[v] = -1
    if t == -1:
        head[b] = v
    else:
        nxt[t] = v
    tail[b] = v
    if b < state[_FLOOR]:
        state[_FLOOR] = b
    state[_SIZE] += 1


@njit(cache=True)
def bq_unlink(head, tail, nxt, prv, key, state, v):
    b = key[v]
    p = prv[v]
    n = nxt[v]
    if p == -1:
        head[b] = n
    else:
        nxt[p] = n
    if n == -1:
        tail[b] = p
    else:
        prv[n] = p
    nxt[v] = -1
    prv[v] = -1
    state[_SIZE] -= 1


@njit(cache=True)
def bq_pop(head, tail, nxt, prv, key, state):
    b = state[_FLOOR]
    while head[b] == -1:
        b += 1
    state[_FLOOR] = b
    v = head[b]
    bq_unlink(head, tail, nxt, prv, key, state, v)
    return v


@njit(cache=True)
def bq_decrease(head, tail, nxt, prv, key, state, v):
    bq_unlink(head, tail, nxt, prv, key, state, v)
    key[v] -= 1
    bq_append(head, tail, nxt, prv, key, state, v)


@njit(cache=True)
def bq_build(key):
    n = len(key)
    nb = 1
    for v in range(n):
        if key[v] + 1 > nb:
            nb = key[v] + 1
    head = np.full(nb, -1, dtype=np.int64)
    tail = np.full(nb, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    prv = np.full(n, -1, dtype=np.int64)
    state = np.zeros(2, dtype=np.int64)
    state[_FLOOR] = nb - 1
    for v in range(n):
        bq_append(head, tail, nxt, prv, key, state, v)
    state[_FLOOR] = 0
    return head, tail, nxt, prv, state


class BucketQueue:
    """Min-priority queue over ids ``0..n-1`` with small integer keys.

    Initial fill is in ascending id order; each bucket is FIFO and a
    decreased id moves to the tail of its new bucket. All operations are
    O(1) except ``pop``, whose scan for the lowest non-empty bucket is
    amortized against the decrements that lowered the floor.
    """

    def __init__(self, priorities):
        self.key = np.array(priorities, dtype=np.int64)
        if self.key.size and self.key.min() < 0:
            raise ValueError("priorities must be non-negative")
        self._head, self._tail, self._nxt, self._prv, self._state = bq_build(self.key)
        self._live = np.ones(len(self.key), dtype=bool)

    def __len__(self) -> int:
        return int(self._state[_SIZE])

    def __contains__(self, v: int) -> bool:
        return bool(self._live[v])

    @property
    def floor(self) -> int:
        return int(self._state[_FLOOR])

    def priority(self, v: int) -> int:
        return int(self.key[v])

    def bucket(self, b: int) -> list[int]:
        out = []
        v = self._head[b] if b < len(self._head) else -1
        while v != -1:
            out.append(int(v))
            v = self._nxt[v]
        return out

    def pop(self) -> int:
        if not len(self):
            raise IndexError("pop from empty BucketQueue")
        v = int(bq_pop(self._head, self._tail, self._nxt, self._prv, self.key, self._state))
        self._live[v] = False
        return v

    def decrease(self, v: int) -> None:
        if not self._live[v]:
            raise KeyError(v)
        if self.key[v] == 0:
            raise ValueError(f"priority of {v} is already 0")
        bq_decrease(self._head, self._tail, self._nxt, self._prv, self.key, self._state, v)


@njit(cache=True)
def _shapley_kernel(cptr, cadj, iptr):
    nc = len(cptr) - 1
    ni = len(iptr) - 1
    inv = np.empty(ni, dtype=np.float64)
    for i in range(ni):
        inv[i] = 1.0 / (iptr[i + 1] - iptr[i])
    phi = np.zeros(nc, dtype=np.float64)
    for c in range(nc):
        s = 0.0
        for e in range(cptr[c], cptr[c + 1]):
            s += inv[cadj[e]]
        phi[c] = s
    return phi


def shapley_cov(g: BipartiteGraph) -> np.ndarray:
    """Shapley value of every contributor in the coverage game.

    A contributor gains an item exactly when it arrives last among the
    item's contributors, which happens with probability ``1/deg(item)``,
    so ``phi[c]`` is the sum of ``1/deg(i)`` over the items of ``c``.
    Sums run in adjacency order, so the result is bit-reproducible.
    """
    return _shapley_kernel(g.contributor_ptr, g.contributor_adj, g.item_ptr)


def shapley_rank(g: BipartiteGraph) -> Ranking:
    phi = shapley_cov(g)
    return Ranking(rank_by_scores(phi), "shapley", phi)


@njit(cache=True)
def _mincov_kernel(cptr, cadj, iptr, iadj):
    nc = len(cptr) - 1
    ni = len(iptr) - 1
    key = np.empty(nc, dtype=np.int64)
    for c in range(nc):
        key[c] = cptr[c + 1] - cptr[c]
    head, tail, nxt, prv, state = bq_build(key)
    inserted = np.zeros(nc, dtype=np.bool_)
    covered = np.zeros(ni, dtype=np.bool_)
    removal = np.empty(nc, dtype=np.int64)
    for t in range(nc):
        c = bq_pop(head, tail, nxt, prv, key, state)
        removal[t] = c
        inserted[c] = True
        for e in range(cptr[c], cptr[c + 1]):
            i = cadj[e]
            if not covered[i]:
                for f in range(iptr[i], iptr[i + 1]):
                    c2 = iadj[f]
                    if not inserted[c2]:
                        bq_decrease(head, tail, nxt, prv, key, state, c2)
                covered[i] = True
    return removal


def mincov_removal_order(g: BipartiteGraph) -> np.ndarray:
    """Contributors in the order the peeling removes them."""
    return _mincov_kernel(g.contributor_ptr, g.contributor_adj, g.item_ptr, g.item_adj)


def mincov(g: BipartiteGraph) -> Ranking:
    """Rank contributors by reverse minimum-coverage peeling.

    The contributor with the fewest not-yet-covered items is removed
    repeatedly; removing it covers its remaining items, which lowers the
    counts of their other contributors. The last contributor removed is
    ranked first.
    """
    removal = mincov_removal_order(g)
    return Ranking(removal[::-1].copy(), "mincov")
