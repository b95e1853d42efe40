"""Immutable bipartite contributor/item graphs.

Graphs are stored in compressed sparse row form in both directions:
``contributor_ptr``/``contributor_adj`` list the items of every contributor
and ``item_ptr``/``item_adj`` list the contributors of every item. Ids are
dense integers assigned in first-appearance order; adjacency lists are
sorted ascending.
"""

from __future__ import annotations

import io
import os
from array import array
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Hashable, Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "BipartiteGraph",
    "GraphError",
    "EmptyGraphError",
    "ParseError",
    "LoadReport",
    "GraphStats",
    "from_edges",
    "load_edge_list",
    "read_edge_list",
    "write_edge_list",
    "canonicalize",
    "degree_stats",
    "incidence_transform",
]

COMMENT_PREFIXES = ("%", "#")


class GraphError(ValueError):
    """Raised when input data cannot form a valid bipartite graph."""


class EmptyGraphError(GraphError):
    def __init__(self, msg: str = "empty graph"):
        super().__init__(msg)


class ParseError(GraphError):
    def __init__(self, lineno: int, line: str, source: str | None = None):
        self.lineno = lineno
        self.line = line
        self.source = source
        where = f"{source}:" if source else "line "
        super().__init__(f"{where}{lineno}: expected '<contributor> <item>', got {line!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Contributor/item adjacency in both directions.

    Build instances with :func:`from_edges` or :func:`load_edge_list`
    rather than calling the constructor with raw arrays.
    """

    contributor_ptr: np.ndarray
    contributor_adj: np.ndarray
    item_ptr: np.ndarray
    item_adj: np.ndarray
    contributor_labels: Sequence[str] = field(repr=False)
    item_labels: Sequence[str] = field(repr=False)

    @property
    def num_contributors(self) -> int:
        return len(self.contributor_ptr) - 1

    @property
    def num_items(self) -> int:
        return len(self.item_ptr) - 1

    @property
    def num_edges(self) -> int:
        return len(self.contributor_adj)

    def __repr__(self) -> str:
        return (
            f"BipartiteGraph(|C|={self.num_contributors}, |I|={self.num_items}, "
            f"|E|={self.num_edges})"
        )

    @cached_property
    def contributor_degrees(self) -> np.ndarray:
        return _frozen(np.diff(self.contributor_ptr))

    @cached_property
    def item_degrees(self) -> np.ndarray:
        return _frozen(np.diff(self.item_ptr))

    def items_of(self, c: int) -> np.ndarray:
        return self.contributor_adj[self.contributor_ptr[c] : self.contributor_ptr[c + 1]]

    def contributors_of(self, i: int) -> np.ndarray:
        return self.item_adj[self.item_ptr[i] : self.item_ptr[i + 1]]

    @cached_property
    def _contributor_index(self) -> dict[str, int]:
        return {lab: k for k, lab in enumerate(self.contributor_labels)}

    @cached_property
    def _item_index(self) -> dict[str, int]:
        return {lab: k for k, lab in enumerate(self.item_labels)}

    def contributor_id(self, label: str) -> int:
        return self._contributor_index[label]

    def item_id(self, label: str) -> int:
        return self._item_index[label]

    def has_edge(self, c: int, i: int) -> bool:
        adj = self.items_of(c)
        k = np.searchsorted(adj, i)
        return bool(k < len(adj) and adj[k] == i)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield ``(contributor, item)`` pairs in canonical order."""
        for c in range(self.num_contributors):
            for i in self.items_of(c):
                yield c, int(i)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        src = np.repeat(np.arange(self.num_contributors, dtype=np.int64), self.contributor_degrees)
        return src, self.contributor_adj.astype(np.int64)

    def check_invariants(self) -> None:
        """Raise ``AssertionError`` if the two adjacency directions disagree."""
        nc, ni = self.num_contributors, self.num_items
        assert len(self.contributor_labels) == nc
        assert len(self.item_labels) == ni
        assert len(set(self.contributor_labels)) == nc
        assert len(set(self.item_labels)) == ni
        assert self.contributor_ptr[0] == 0 and self.item_ptr[0] == 0
        assert self.contributor_ptr[-1] == self.num_edges == self.item_ptr[-1]
        assert len(self.item_adj) == self.num_edges
        assert int(self.contributor_degrees.sum()) == int(self.item_degrees.sum()) == self.num_edges
        assert (self.item_degrees >= 1).all(), "item with no contributors"
        if self.num_edges:
            assert self.contributor_adj.min() >= 0 and self.contributor_adj.max() < ni
            assert self.item_adj.min() >= 0 and self.item_adj.max() < nc
        src, dst = self.edge_arrays()
        key_c = src * ni + dst
        assert (np.diff(key_c) > 0).all(), "contributor adjacency not strictly sorted"
        isrc = np.repeat(np.arange(ni, dtype=np.int64), self.item_degrees)
        key_i = isrc * nc + self.item_adj.astype(np.int64)
        assert (np.diff(key_i) > 0).all(), "item adjacency not strictly sorted"
        # same edge set from both sides
        assert np.array_equal(np.sort(dst * nc + src), key_i)

    def same_as(self, other: "BipartiteGraph") -> bool:
        """Structural and label equality."""
        return (
            np.array_equal(self.contributor_ptr, other.contributor_ptr)
            and np.array_equal(self.contributor_adj, other.contributor_adj)
            and np.array_equal(self.item_ptr, other.item_ptr)
            and np.array_equal(self.item_adj, other.item_adj)
            and list(self.contributor_labels) == list(other.contributor_labels)
            and list(self.item_labels) == list(other.item_labels)
        )


def _index_dtype(n: int):
    return np.int32 if n < 2**31 - 1 else np.int64


def from_edges(
    contributors: Iterable[int] | np.ndarray,
    items: Iterable[int] | np.ndarray,
    num_contributors: int | None = None,
    num_items: int | None = None,
    contributor_labels: Sequence[str] | None = None,
    item_labels: Sequence[str] | None = None,
    return_duplicates: bool = False,
):
    """Build a graph from parallel arrays of dense contributor and item ids.

    Duplicate pairs are collapsed. Contributors without edges are kept;
    items without edges are rejected. Missing labels default to the
    decimal id.
    """
    c = np.asarray(contributors, dtype=np.int64).ravel()
    i = np.asarray(items, dtype=np.int64).ravel()
    if c.shape != i.shape:
        raise GraphError("contributor and item arrays differ in length")
    if len(c) == 0:
        raise EmptyGraphError()
    nc = int(c.max()) + 1 if num_contributors is None else int(num_contributors)
    ni = int(i.max()) + 1 if num_items is None else int(num_items)
    if c.min() < 0 or c.max() >= nc or i.min() < 0 or i.max() >= ni:
        raise GraphError("edge endpoint id out of range")

    keys = np.unique(c * ni + i)
    duplicates = len(c) - len(keys)
    del c, i
    src = keys // ni
    dst = keys % ni
    del keys

    cdeg = np.bincount(src, minlength=nc)
    ideg = np.bincount(dst, minlength=ni)
    if (ideg == 0).any():
        missing = int(np.flatnonzero(ideg == 0)[0])
        raise GraphError(f"item {missing} has no contributors")

    cptr = np.zeros(nc + 1, dtype=np.int64)
    np.cumsum(cdeg, out=cptr[1:])
    iptr = np.zeros(ni + 1, dtype=np.int64)
    np.cumsum(ideg, out=iptr[1:])

    cadj = dst.astype(_index_dtype(ni))
    order = np.argsort(dst, kind="stable")
    iadj = src[order].astype(_index_dtype(nc))
    del order, src, dst

    if contributor_labels is None:
        contributor_labels = [str(k) for k in range(nc)]
    if item_labels is None:
        item_labels = [str(k) for k in range(ni)]
    if len(contributor_labels) != nc or len(item_labels) != ni:
        raise GraphError("label count does not match node count")

    g = BipartiteGraph(
        _frozen(cptr),
        _frozen(cadj),
        _frozen(iptr),
        _frozen(iadj),
        tuple(contributor_labels),
        tuple(item_labels),
    )
    if return_duplicates:
        return g, duplicates
    return g


@dataclass
class LoadReport:
    lines_read: int = 0
    edges_read: int = 0
    duplicates_dropped: int = 0
    comments_skipped: int = 0
    blank_lines: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


def _open_text(source) -> tuple[IO[str], bool, str | None]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8"), True, os.fspath(source)
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8")), True, None
    if isinstance(source, io.TextIOBase):
        return source, False, getattr(source, "name", None)
    if hasattr(source, "read"):
        # binary stream
        return io.TextIOWrapper(source, encoding="utf-8"), False, getattr(source, "name", None)
    # iterable of lines
    return source, False, None


def read_edge_list(source, comments: Sequence[str] = COMMENT_PREFIXES):
    """Parse an edge list and return ``(graph, report)``.

    ``source`` may be a path, a text or binary stream, raw bytes, or an
    iterable of lines. Fields beyond the first two on a line are ignored.
    """
    fh, close, name = _open_text(source)
    report = LoadReport()
    cindex: dict[str, int] = {}
    iindex: dict[str, int] = {}
    csrc = array("q")
    idst = array("q")
    prefixes = tuple(comments)
    try:
        for lineno, line in enumerate(fh, start=1):
            report.lines_read += 1
            s = line.strip()
            if not s:
                report.blank_lines += 1
                continue
            if s.startswith(prefixes):
                report.comments_skipped += 1
                continue
            parts = s.split(None, 2)
            if len(parts) < 2:
                raise ParseError(lineno, line.rstrip("\n"), name)
            a, b = parts[0], parts[1]
            cid = cindex.get(a)
            if cid is None:
                cid = cindex[a] = len(cindex)
            iid = iindex.get(b)
            if iid is None:
                iid = iindex[b] = len(iindex)
            csrc.append(cid)
            idst.append(iid)
    finally:
        if close:
            fh.close()
    report.edges_read = len(csrc)
    if not csrc:
        raise EmptyGraphError()
    g, dups = from_edges(
        np.frombuffer(csrc, dtype=np.int64),
        np.frombuffer(idst, dtype=np.int64),
        len(cindex),
        len(iindex),
        list(cindex),
        list(iindex),
        return_duplicates=True,
    )
    report.duplicates_dropped = dups
    return g, report


def load_edge_list(source, comments: Sequence[str] = COMMENT_PREFIXES) -> BipartiteGraph:
    return read_edge_list(source, comments)[0]


def iter_canonical_lines(g: BipartiteGraph) -> Iterator[str]:
    clab, ilab = g.contributor_labels, g.item_labels
    for c in range(g.num_contributors):
        lc = clab[c]
        for i in g.items_of(c):
            yield f"{lc}\t{ilab[i]}\n"


def write_edge_list(g: BipartiteGraph, dest) -> None:
    """Write the canonical ``contributor<TAB>item`` listing to a path or stream."""
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(iter_canonical_lines(g))
    else:
        dest.writelines(iter_canonical_lines(g))


def canonicalize(g: BipartiteGraph) -> BipartiteGraph:
    """Relabel so that ids follow first appearance in the canonical listing.

    Canonical graphs survive a write/read round trip unchanged. Contributors
    without edges never appear in an edge list, so they are dropped.
    """
    src, dst = g.edge_arrays()
    cdeg = g.contributor_degrees
    keep_c = np.flatnonzero(cdeg > 0)
    cmap = np.full(g.num_contributors, -1, dtype=np.int64)
    cmap[keep_c] = np.arange(len(keep_c))
    _, first = np.unique(dst, return_index=True)
    item_order = np.argsort(first, kind="stable")  # old ids in new order
    imap = np.empty(g.num_items, dtype=np.int64)
    imap[item_order] = np.arange(g.num_items)
    return from_edges(
        cmap[src],
        imap[dst],
        len(keep_c),
        g.num_items,
        [g.contributor_labels[k] for k in keep_c],
        [g.item_labels[k] for k in item_order],
    )


@dataclass(frozen=True)
class GraphStats:
    num_contributors: int
    num_items: int
    num_edges: int
    mean_contributor_degree: float
    mean_item_degree: float
    phi_C: float
    phi_I: float
    gamma_C: float

    def as_row(self) -> dict[str, float | int]:
        """Column names as in the usual dataset summary table."""
        return {
            "|C|": self.num_contributors,
            "|I|": self.num_items,
            "|E|": self.num_edges,
            "k_C": round(self.mean_contributor_degree, 2),
            "k_I": round(self.mean_item_degree, 2),
            "phi_C": round(self.phi_C, 2),
            "phi_I": round(self.phi_I, 2),
            "gamma_C": round(self.gamma_C, 2),
        }


def degree_stats(g: BipartiteGraph) -> GraphStats:
    nc, ni, ne = g.num_contributors, g.num_items, g.num_edges
    cdeg, ideg = g.contributor_degrees, g.item_degrees
    # sole neighbours: contributors of degree-1 items
    sole = g.item_adj[g.item_ptr[:-1][ideg == 1]]
    n_unique = len(np.unique(sole))
    return GraphStats(
        num_contributors=nc,
        num_items=ni,
        num_edges=ne,
        mean_contributor_degree=ne / nc,
        mean_item_degree=ne / ni,
        phi_C=float(np.count_nonzero(cdeg == 1)) / nc,
        phi_I=float(np.count_nonzero(ideg == 1)) / ni,
        gamma_C=n_unique / nc,
    )


def incidence_transform(
    edges: Iterable[tuple[Hashable, Hashable]],
    vertices: Sequence[Hashable] | None = None,
) -> BipartiteGraph:
    """Map a simple undirected graph to a bipartite graph.

    Vertices become contributors and every edge becomes an item adjacent to
    its two endpoints. Contributor ids follow ``vertices`` when given (so
    isolated vertices are kept), otherwise first appearance; item ids follow
    edge order.
    """
    index: dict[Hashable, int] = {}
    if vertices is not None:
        for v in vertices:
            if v in index:
                raise GraphError(f"duplicate vertex {v!r}")
            index[v] = len(index)
    csrc: list[int] = []
    idst: list[int] = []
    item_labels: list[str] = []
    seen: set[tuple[int, int]] = set()
    for k, (u, v) in enumerate(edges):
        if u == v:
            raise GraphError(f"self-loop at vertex {u!r}")
        for w in (u, v):
            if w not in index:
                if vertices is not None:
                    raise GraphError(f"edge endpoint {w!r} not in vertex list")
                index[w] = len(index)
        a, b = index[u], index[v]
        pair = (min(a, b), max(a, b))
        if pair in seen:
            raise GraphError(f"parallel edge {u!r}-{v!r}")
        seen.add(pair)
        csrc += [a, b]
        idst += [k, k]
        item_labels.append(f"{u}-{v}")
    if not item_labels:
        raise EmptyGraphError()
    return from_edges(
        csrc,
        idst,
        len(index),
        len(item_labels),
        [str(v) for v in index],
        item_labels,
    )
