import itertools
from collections import deque

import numpy as np
import pytest

from critset.bigraph import from_edges


def random_bigraph(rng, nc, ni, p=0.3, labels=True):
    """Random bipartite graph where every item has at least one contributor."""
    mask = rng.random((nc, ni)) < p
    mask[rng.integers(0, nc, size=ni), np.arange(ni)] = True
    c, i = np.nonzero(mask)
    kw = {}
    if labels:
        kw = dict(
            contributor_labels=[f"c{k}" for k in range(nc)],
            item_labels=[f"i{k}" for k in range(ni)],
        )
    return from_edges(c, i, nc, ni, **kw)


def random_simple_graph(rng, n, m):
    pairs = list(itertools.combinations(range(n), 2))
    m = min(m, len(pairs))
    pick = rng.choice(len(pairs), size=m, replace=False)
    return [pairs[k] for k in sorted(pick)]


def induced_edges(edges, S):
    S = set(S)
    return sum(1 for u, v in edges if u in S and v in S)


def kcore_peel_order(n, edges):
    """Min-degree vertex peeling with FIFO buckets.

    Written independently of the bucket queue: buckets are deques with lazy
    deletion. Vertices start in ascending id order, a vertex whose degree
    drops is re-queued at the tail of its new bucket, and neighbours are
    visited in edge order.
    """
    inc = [[] for _ in range(n)]
    for k, (u, v) in enumerate(edges):
        inc[u].append((k, v))
        inc[v].append((k, u))
    deg = [len(x) for x in inc]
    buckets = [deque() for _ in range(max(deg, default=0) + 1)]
    version = [0] * n
    for v in range(n):
        buckets[deg[v]].append((v, 0))
    removed = [False] * n
    out = []
    while len(out) < n:
        b = 0
        while True:
            while buckets[b] and (
                removed[buckets[b][0][0]] or buckets[b][0][1] != version[buckets[b][0][0]]
            ):
                buckets[b].popleft()
            if buckets[b]:
                break
            b += 1
        v, _ = buckets[b].popleft()
        removed[v] = True
        out.append(v)
        for _, u in sorted(inc[v]):
            if not removed[u]:
                deg[u] -= 1
                version[u] += 1
                buckets[deg[u]].append((u, version[u]))
    return out


def bfs_counts(adj, s):
    dist = {s: 0}
    sigma = {s: 1}
    q = deque([s])
    while q:
        v = q.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                sigma[w] = 0
                q.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
    return dist, sigma


def betweenness_by_pairs(adj):
    """Betweenness from all-pairs shortest path counts.

    For every unordered pair (s, t) and every other node v, add
    sigma_sv * sigma_vt / sigma_st when v lies on a shortest s-t path.
    """
    n = len(adj)
    info = [bfs_counts(adj, s) for s in range(n)]
    bc = [0.0] * n
    for s in range(n):
        ds, ss = info[s]
        for t in range(s + 1, n):
            if t not in ds:
                continue
            dt, st = info[t]
            for v in range(n):
                if v in (s, t) or v not in ds or v not in dt:
                    continue
                if ds[v] + dt[v] == ds[t]:
                    bc[v] += ss[v] * st[v] / ss[t]
    return np.array(bc)


def union_adjacency_lists(g):
    nc = g.num_contributors
    adj = [[nc + int(i) for i in g.items_of(c)] for c in range(nc)]
    adj += [[int(c) for c in g.contributors_of(i)] for i in range(g.num_items)]
    return adj


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance report --------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    """Log one pass/fail line for the acceptance summary, then assert."""
    line = f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
