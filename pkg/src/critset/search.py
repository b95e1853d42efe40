"""Stochastic hill climbing over rankings, plus exhaustive oracles.

The oracles (best size-k set, Shapley values from the characteristic
function, supermodularity chains) only use :func:`critset.evaluation.cov`
semantics through bitmasks and never touch the closed forms they check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np
from numba import njit

from .bigraph import BipartiteGraph
from .evaluation import completion_times
from .ranking import Ranking
from .rankcore import mincov

__all__ = [
    "ShcParams",
    "ShcResult",
    "shc_rank",
    "shc_search",
    "OracleResult",
    "OracleLimitError",
    "brute_force_best_k",
    "brute_force_shapley",
    "SupermodularityWitness",
    "check_supermodular",
    "check_set_function",
]


class OracleLimitError(RuntimeError):
    def __init__(self, msg: str, flag: str = "--limit"):
        self.flag = flag
        super().__init__(msg)


# ---------------------------------------------------------------------------
# stochastic hill climbing


@dataclass(frozen=True)
class ShcParams:
    seed: int
    restarts: int = 4
    max_moves_per_restart: int = 20_000
    patience: int = 20_000
    init_strategy: Literal["random", "mincov"] = "mincov"

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_moves_per_restart < 0 or self.patience < 0:
            raise ValueError("move budgets must be non-negative")
        if self.patience > self.max_moves_per_restart:
            raise ValueError("patience cannot exceed max_moves_per_restart")
        if self.init_strategy not in ("random", "mincov"):
            raise ValueError(f"unknown init strategy {self.init_strategy!r}")


@dataclass
class ShcResult:
    order: np.ndarray
    objective: int
    restart_objectives: list[int] = field(default_factory=list)
    moves: list[int] = field(default_factory=list)
    accepted: list[int] = field(default_factory=list)
    traces: list[np.ndarray] = field(default_factory=list)


@njit(cache=True)
def _shc_chunk(cptr, cadj, iptr, iadj, order, pos, done, pairs, patience, streak, trace, t0, stamp):
    """Apply the swap proposals in ``pairs`` until patience runs out.

    The objective is ``sum(n - done[i])``; a swap only changes the
    completion positions of items adjacent to the two swapped contributors.
    Returns (moves used, objective delta, streak, accepted).
    """
    total_delta = 0
    accepted = 0
    touched = np.empty(len(stamp), dtype=np.int64)
    newdone = np.empty(len(stamp), dtype=np.int64)
    used = 0
    for m in range(pairs.shape[0]):
        if streak >= patience:
            break
        used += 1
        p = pairs[m, 0]
        q = pairs[m, 1]
        a = order[p]
        b = order[q]
        tag = t0 + m + 1
        nt = 0
        delta = 0
        for side in range(2):
            x = a if side == 0 else b
            for e in range(cptr[x], cptr[x + 1]):
                i = cadj[e]
                if stamp[i] == tag:
                    continue
                stamp[i] = tag
                mx = 0
                for f in range(iptr[i], iptr[i + 1]):
                    c = iadj[f]
                    if c == a:
                        pc = q
                    elif c == b:
                        pc = p
                    else:
                        pc = pos[c]
                    if pc > mx:
                        mx = pc
                touched[nt] = i
                newdone[nt] = mx
                nt += 1
                delta += done[i] - mx
        if delta >= 0:
            order[p] = b
            order[q] = a
            pos[a] = q
            pos[b] = p
            for k in range(nt):
                done[touched[k]] = newdone[k]
            total_delta += delta
            accepted += 1
            if delta > 0:
                streak = 0
            else:
                streak += 1
        else:
            streak += 1
        if trace.shape[0] > 0:
            trace[t0 + m] = total_delta
    return used, total_delta, streak, accepted


def _objective(g: BipartiteGraph, order: np.ndarray) -> int:
    done = completion_times(g, order)
    return int(g.num_items * g.num_contributors - done.sum())


def shc_search(
    g: BipartiteGraph,
    params: ShcParams,
    init: np.ndarray | None = None,
    record: bool = False,
    chunk: int = 1 << 15,
) -> ShcResult:
    """Hill-climb over full contributor orderings maximizing the coverage AUC.

    A move swaps two uniformly chosen positions and is kept when the AUC
    does not drop. A restart stops after ``patience`` consecutive moves
    without strict improvement or after ``max_moves_per_restart`` moves.
    Restart ``r`` draws from ``default_rng(seed + r)``. The objective is the
    integer ``AUC * |C| * |I|``.
    """
    n = g.num_contributors
    cptr, cadj = g.contributor_ptr, g.contributor_adj.astype(np.int64)
    iptr, iadj = g.item_ptr, g.item_adj.astype(np.int64)
    if init is None and params.init_strategy == "mincov":
        init = mincov(g).order
    result = ShcResult(order=np.empty(0, dtype=np.int64), objective=-1)
    stamp = np.zeros(g.num_items, dtype=np.int64)
    for r in range(params.restarts):
        rng = np.random.default_rng(params.seed + r)
        order = (rng.permutation(n) if init is None else np.array(init, dtype=np.int64)).astype(
            np.int64
        )
        pos = np.empty(n, dtype=np.int64)
        pos[order] = np.arange(n)
        done = completion_times(g, order).astype(np.int64)
        obj = _objective(g, order)
        budget = params.max_moves_per_restart if n >= 2 else 0
        trace = np.zeros(budget if record else 0, dtype=np.int64)
        streak = moves = acc = 0
        stamp[:] = 0
        while moves < budget and streak < params.patience:
            size = min(chunk, budget - moves)
            p = rng.integers(0, n, size=size)
            q = rng.integers(0, n - 1, size=size)
            q = q + (q >= p)  # distinct positions, uniform over ordered pairs
            pairs = np.stack([np.minimum(p, q), np.maximum(p, q)], axis=1).astype(np.int64)
            used, dobj, streak, a = _shc_chunk(
                cptr, cadj, iptr, iadj, order, pos, done, pairs,
                params.patience, streak, trace, moves, stamp,
            )
            if record:
                trace[moves : moves + used] += obj
            obj += int(dobj)
            moves += int(used)
            acc += int(a)
            if used < size:
                break
        if record:
            result.traces.append(trace[:moves].copy())
        result.restart_objectives.append(obj)
        result.moves.append(moves)
        result.accepted.append(acc)
        if obj > result.objective:
            result.objective = obj
            result.order = order.copy()
    return result


def shc_rank(g: BipartiteGraph, params: ShcParams) -> Ranking:
    res = shc_search(g, params)
    return Ranking(
        res.order,
        "shc",
        None,
        {
            "objective": res.objective,
            "restart_objectives": res.restart_objectives,
            "moves": res.moves,
            "accepted": res.accepted,
        },
    )


# ---------------------------------------------------------------------------
# exhaustive oracles


@dataclass
class OracleResult:
    k: int
    best_set: tuple[int, ...]
    best_cov: int
    evaluated: int

    def to_json(self, g: BipartiteGraph) -> dict:
        lab = g.contributor_labels
        return {
            "k": self.k,
            "best_cov": self.best_cov,
            "best_set": [lab[c] for c in self.best_set],
            "evaluated": self.evaluated,
        }


def _item_masks(g: BipartiteGraph) -> list[int]:
    masks = []
    for i in range(g.num_items):
        m = 0
        for c in g.contributors_of(i):
            m |= 1 << int(c)
        masks.append(m)
    return masks


def _cov_all_subsets(g: BipartiteGraph) -> np.ndarray:
    """Coverage of every subset, indexed by bitmask."""
    n = g.num_contributors
    subsets = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(1 << n, dtype=np.int64)
    for m in _item_masks(g):
        out += (subsets & m) == m
    return out


def brute_force_best_k(g: BipartiteGraph, k: int, limit: int = 5_000_000) -> OracleResult:
    """Maximize coverage over all contributor sets of size ``min(k, |C|)``.

    Coverage is monotone, so sets of exactly that size suffice. Ties go to
    the lexicographically smallest set.
    """
    n = g.num_contributors
    k = max(0, min(k, n))
    total = math.comb(n, k)
    if total > limit:
        raise OracleLimitError(f"C({n},{k}) = {total} subsets exceeds the limit of {limit}")
    masks = _item_masks(g)
    best_set: tuple[int, ...] = ()
    best = -1
    evaluated = 0
    for S in itertools.combinations(range(n), k):
        sm = 0
        for c in S:
            sm |= 1 << c
        value = sum(1 for m in masks if m & sm == m)
        evaluated += 1
        if value > best:
            best, best_set = value, S
    return OracleResult(k, best_set, best, evaluated)


def brute_force_shapley(
    g: BipartiteGraph,
    max_contributors: int = 10,
    method: Literal["subsets", "permutations"] = "subsets",
    exact: bool = False,
):
    """Shapley values of the coverage game computed from the definition.

    ``method="permutations"`` walks every arrival order and averages the
    marginal gains. ``method="subsets"`` groups the same orders by the set
    of predecessors, which gives the weight ``|S|! (n-|S|-1)!`` per set.
    Both accumulate integers and divide once by ``n!``. With ``exact=True``
    a list of :class:`fractions.Fraction` is returned.
    """
    n = g.num_contributors
    if n > max_contributors:
        raise OracleLimitError(
            f"{n} contributors exceeds the enumeration limit of {max_contributors}"
        )
    num = [0] * n
    if method == "permutations":
        masks = _item_masks(g)
        for perm in itertools.permutations(range(n)):
            sm = 0
            before = 0
            for c in perm:
                sm |= 1 << c
                after = sum(1 for m in masks if m & sm == m)
                num[c] += after - before
                before = after
    elif method == "subsets":
        covall = _cov_all_subsets(g).tolist()
        fact = [math.factorial(j) for j in range(n + 1)]
        for S in range(1 << n):
            size = S.bit_count()
            w = fact[size] * fact[n - size - 1] if size < n else 0
            for c in range(n):
                bit = 1 << c
                if not S & bit:
                    num[c] += w * (covall[S | bit] - covall[S])
    else:
        raise ValueError(f"unknown method {method!r}")
    denom = math.factorial(n)
    if exact:
        return [Fraction(v, denom) for v in num]
    return np.array([v / denom for v in num], dtype=np.float64)


@dataclass(frozen=True)
class SupermodularityWitness:
    """A chain ``A <= B`` and ``v`` outside ``B`` breaking the expected inequality.

    ``kind`` is ``"monotone"`` when ``cov(A) > cov(B)``; otherwise
    ``margin_A > margin_B``.
    """

    kind: str
    A: frozenset[int]
    B: frozenset[int]
    v: int
    margin_A: int
    margin_B: int


def _members(mask: int) -> frozenset[int]:
    return frozenset(j for j in range(mask.bit_length()) if mask >> j & 1)


def check_supermodular(
    g: BipartiteGraph,
    trials: int = 1000,
    seed: int = 0,
    exhaustive: bool | None = None,
) -> SupermodularityWitness | None:
    """Look for a violation of monotonicity or supermodularity of ``cov``.

    Exhaustive mode (default for ``|C| <= 16``) tabulates ``cov`` on all
    subsets and checks both properties along every covering pair
    ``S, S + u``; by transitivity this covers every chain ``A <= B``.
    Sampled mode draws ``trials`` random chains. Returns ``None`` on pass.
    """
    n = g.num_contributors
    if exhaustive is None:
        exhaustive = n <= 16
    if exhaustive:
        if n > 16:
            raise OracleLimitError(f"exhaustive check needs |C| <= 16, got {n}")
        return _check_exhaustive(g)
    return _check_sampled(g, trials, seed)


def _check_exhaustive(g: BipartiteGraph) -> SupermodularityWitness | None:
    return check_set_function(_cov_all_subsets(g), g.num_contributors)


def check_set_function(values: np.ndarray, n: int) -> SupermodularityWitness | None:
    """Exhaustive monotonicity/supermodularity check of a tabulated set function.

    ``values[mask]`` is the function on the subset encoded by ``mask``.
    """
    values = np.asarray(values, dtype=np.int64)
    subsets = np.arange(1 << n, dtype=np.int64)
    for u in range(n):
        bu = 1 << u
        S = subsets[(subsets & bu) == 0]
        bad = np.flatnonzero(values[S] > values[S | bu])
        if len(bad):
            s = int(S[bad[0]])
            return SupermodularityWitness(
                "monotone", _members(s), _members(s | bu), -1, int(values[s]), int(values[s | bu])
            )
    for v in range(n):
        bv = 1 << v
        margin = values[subsets | bv] - values
        for u in range(n):
            if u == v:
                continue
            bu = 1 << u
            S = subsets[((subsets & bu) == 0) & ((subsets & bv) == 0)]
            bad = np.flatnonzero(margin[S] > margin[S | bu])
            if len(bad):
                s = int(S[bad[0]])
                return SupermodularityWitness(
                    "supermodular",
                    _members(s),
                    _members(s | bu),
                    v,
                    int(margin[s]),
                    int(margin[s | bu]),
                )
    return None


def _check_sampled(g: BipartiteGraph, trials: int, seed: int) -> SupermodularityWitness | None:
    n = g.num_contributors
    if n < 1:
        return None
    rng = np.random.default_rng(seed)
    ideg = g.item_degrees
    starts = g.item_ptr[:-1]
    iadj = g.item_adj

    def cov_mask(mask: np.ndarray) -> int:
        sel = np.add.reduceat(mask[iadj].astype(np.int64), starts)
        return int(np.count_nonzero(sel == ideg))

    for _ in range(trials):
        v = int(rng.integers(n))
        inB = rng.random(n) < rng.random()
        inB[v] = False
        inA = inB & (rng.random(n) < rng.random())
        A, B = inA.copy(), inB.copy()
        cA, cB = cov_mask(A), cov_mask(B)
        A[v] = B[v] = True
        mA, mB = cov_mask(A) - cA, cov_mask(B) - cB
        sA = frozenset(np.flatnonzero(inA).tolist())
        sB = frozenset(np.flatnonzero(inB).tolist())
        if cA > cB:
            return SupermodularityWitness("monotone", sA, sB, -1, cA, cB)
        if mA > mB:
            return SupermodularityWitness("supermodular", sA, sB, v, mA, mB)
    return None
