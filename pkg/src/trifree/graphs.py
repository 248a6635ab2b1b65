"""Bitset graphs, seeded G(n,p) sampling, triangle machinery, and edge-list I/O.

Vertices are 0-indexed integers; adjacency rows are Python ints used as n-bit
vectors.  Graphs are immutable once built and safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .rng import stream_block

MAX_VERTICES = 4096


class GraphParseError(ValueError):
    """Base class for edge-list parsing failures."""


class MalformedHeaderError(GraphParseError):
    pass


class VertexRangeError(GraphParseError):
    pass


class DuplicateEdgeError(GraphParseError):
    pass


class LoopError(GraphParseError):
    pass


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of `mask` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Graph:
    """Immutable simple undirected graph on n labeled vertices.

    `adj[v]` is the neighbor bitmask of v.  `edges` lists the present edges as
    (u, v) with u < v, sorted lexicographically; this canonical ordering is
    what every EdgeSet mask refers to.
    """

    __slots__ = ("n", "adj", "edges", "_rank")

    def __init__(self, n: int, adj: Sequence[int], edges: Sequence[tuple[int, int]]):
        self.n = n
        self.adj = tuple(adj)
        self.edges = tuple(edges)
        self._rank = {e: i for i, e in enumerate(self.edges)}

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if not 1 <= n <= MAX_VERTICES:
            raise ValueError(f"vertex count must be in [1, {MAX_VERTICES}], got {n}")
        adj = [0] * n
        canonical = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            a, b = (u, v) if u < v else (v, u)
            if (a, b) in canonical:
                raise ValueError(f"duplicate edge ({a},{b})")
            canonical.add((a, b))
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        return cls(n, adj, sorted(canonical))

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def edge_rank(self, u: int, v: int) -> int:
        return self._rank[(u, v) if u < v else (v, u)]

    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Graph)
                and self.n == other.n and self.edges == other.edges)

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class EdgeSet:
    """Subset of a host graph's edges as an m-bit mask over the canonical order."""

    __slots__ = ("host", "bits")

    def __init__(self, host: Graph, bits: int = 0):
        if bits < 0 or bits >> host.m:
            raise ValueError("edge mask wider than host edge count")
        self.host = host
        self.bits = bits

    @classmethod
    def from_pairs(cls, host: Graph, pairs: Iterable[tuple[int, int]]) -> "EdgeSet":
        bits = 0
        for u, v in pairs:
            bits |= 1 << host.edge_rank(u, v)
        return cls(host, bits)

    @classmethod
    def full(cls, host: Graph) -> "EdgeSet":
        return cls(host, (1 << host.m) - 1)

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    def pairs(self) -> Iterator[tuple[int, int]]:
        for i in iter_bits(self.bits):
            yield self.host.edges[i]

    def contains(self, u: int, v: int) -> bool:
        return bool(self.bits >> self.host.edge_rank(u, v) & 1)

    def adjacency(self) -> list[int]:
        """Neighbor bitmasks of the spanning subgraph formed by these edges."""
        adj = [0] * self.host.n
        for u, v in self.pairs():
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return adj

    def complement(self) -> "EdgeSet":
        return EdgeSet(self.host, self.bits ^ ((1 << self.host.m) - 1))

    def _check_host(self, other: "EdgeSet") -> None:
        if self.host is not other.host and self.host != other.host:
            raise ValueError("edge sets live on different host graphs")

    def __or__(self, other: "EdgeSet") -> "EdgeSet":
        self._check_host(other)
        return EdgeSet(self.host, self.bits | other.bits)

    def __and__(self, other: "EdgeSet") -> "EdgeSet":
        self._check_host(other)
        return EdgeSet(self.host, self.bits & other.bits)

    def __sub__(self, other: "EdgeSet") -> "EdgeSet":
        self._check_host(other)
        return EdgeSet(self.host, self.bits & ~other.bits)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, EdgeSet)
                and self.host == other.host and self.bits == other.bits)

    def __hash__(self) -> int:
        return hash((self.host, self.bits))

    def __repr__(self) -> str:
        return f"EdgeSet(m={self.size}/{self.host.m})"


@dataclass(frozen=True)
class GnpSpec:
    """Parameters of one seeded Erdős–Rényi sample."""

    n: int
    p: float
    seed: int

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_VERTICES:
            raise ValueError(f"n must be in [1, {MAX_VERTICES}], got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")


@dataclass(frozen=True)
class Cut:
    """Ordered bipartition (A, B) of the vertices 0..n-1."""

    n: int
    a: frozenset[int]
    b: frozenset[int]

    def __post_init__(self) -> None:
        if self.a & self.b or len(self.a) + len(self.b) != self.n:
            raise ValueError("cut sides must partition the vertex set")
        if any(not 0 <= v < self.n for v in self.a | self.b):
            raise ValueError("cut contains out-of-range vertices")

    @classmethod
    def from_a_mask(cls, n: int, a_mask: int) -> "Cut":
        a = frozenset(iter_bits(a_mask))
        b = frozenset(v for v in range(n) if not a_mask >> v & 1)
        return cls(n, a, b)

    def a_mask(self) -> int:
        mask = 0
        for v in self.a:
            mask |= 1 << v
        return mask

    def b_mask(self) -> int:
        return self.a_mask() ^ ((1 << self.n) - 1)

    def swapped(self) -> "Cut":
        return Cut(self.n, self.b, self.a)

    def is_balanced(self, eta: float) -> bool:
        """|A| within (1 ± eta) n/2, checked in exact rational arithmetic."""
        half = Fraction(self.n, 2)
        e = Fraction(eta)
        return (1 - e) * half <= len(self.a) <= (1 + e) * half


def cut_size(g: Graph, cut: Cut) -> int:
    """Number of graph edges crossing the cut."""
    b_mask = cut.b_mask()
    return sum((g.adj[v] & b_mask).bit_count() for v in cut.a)


_CHUNK = 1 << 20


def sample_gnp(spec: GnpSpec) -> Graph:
    """Sample G(n, p) with pair ranks mapped through a counter-based stream.

    Pair rank r (lexicographic over u < v) is included iff the 64-bit stream
    value at counter r, keyed by the seed, falls below p * 2^64.  The result
    therefore depends only on (n, p, seed), not on iteration order or worker
    count.
    """
    n, p = spec.n, spec.p
    total = n * (n - 1) // 2
    if p == 0.0 or total == 0:
        return Graph.from_edges(n, [])
    if p == 1.0:
        return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])
    threshold = np.uint64(int(p * 2.0 ** 64))
    edges: list[tuple[int, int]] = []
    u, v = 0, 0  # rank -1 sentinel: first advance lands on (0, 1)
    cur = -1
    for start in range(0, total, _CHUNK):
        count = min(_CHUNK, total - start)
        hits = np.flatnonzero(stream_block(spec.seed, start, count) < threshold)
        for offset in hits.tolist():
            target = start + offset
            steps = target - cur
            while steps:
                row_left = n - 1 - v
                if steps <= row_left:
                    v += steps
                    steps = 0
                else:
                    steps -= row_left + 1
                    u += 1
                    v = u + 1
            cur = target
            edges.append((u, v))
    return Graph.from_edges(n, edges)


def pair_for_rank(rank: int, n: int) -> tuple[int, int]:
    """Inverse of the lexicographic pair ranking."""
    u = 0
    row = n - 1
    while rank >= row:
        rank -= row
        u += 1
        row -= 1
    return u, u + 1 + rank


def triangles(g: Graph) -> list[tuple[int, int, int]]:
    """All vertex triples spanning a triangle, each once, sorted."""
    out = []
    for u, v in g.edges:
        above = g.adj[u] & (g.adj[v] >> (v + 1) << (v + 1))
        for w in iter_bits(above):
            out.append((u, v, w))
    return out


def edges_in_no_triangle(g: Graph) -> EdgeSet:
    """Mask of edges that lie in no triangle of g."""
    bits = 0
    for i, (u, v) in enumerate(g.edges):
        if not g.adj[u] & g.adj[v]:
            bits |= 1 << i
    return EdgeSet(g, bits)


@dataclass(frozen=True)
class DegreeStats:
    """Degree and codegree summary, with optional window flags against np, np^2.

    The window fields are diagnostics only; at finite n they may be False on a
    perfectly good sample.
    """

    n: int
    m: int
    deg_min: int
    deg_max: int
    deg_mean: float
    codeg_min: int
    codeg_max: int
    codeg_mean: float
    p: Optional[float] = None
    eps: Optional[float] = None
    deg_window_ok: Optional[bool] = None
    codeg_window_ok: Optional[bool] = None


def degree_codegree_stats(g: Graph, p: Optional[float] = None,
                          eps: float = 0.02) -> DegreeStats:
    """Min/max/mean of d(x) and of d(x,y) over all vertex pairs.

    When `p` is given, also report whether every d(x) is within (1±eps)np and
    every d(x,y) within (1±eps)np^2.
    """
    degs = [g.degree(v) for v in range(g.n)]
    codegs = []
    for u in range(g.n):
        for v in range(u + 1, g.n):
            codegs.append((g.adj[u] & g.adj[v]).bit_count())
    if not codegs:
        codegs = [0]
    deg_window = codeg_window = None
    if p is not None:
        np_ = g.n * p
        np2 = g.n * p * p
        deg_window = all(abs(d - np_) <= eps * np_ for d in degs)
        codeg_window = all(abs(c - np2) <= eps * np2 for c in codegs)
    return DegreeStats(
        n=g.n, m=g.m,
        deg_min=min(degs), deg_max=max(degs), deg_mean=sum(degs) / g.n,
        codeg_min=min(codegs), codeg_max=max(codegs),
        codeg_mean=sum(codegs) / len(codegs),
        p=p, eps=None if p is None else eps,
        deg_window_ok=deg_window, codeg_window_ok=codeg_window,
    )


def write_graph(path, g: Graph) -> None:
    """Write the edge-list format: header "n m", then "u v" per edge, canonical order."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{g.n} {g.m}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def read_graph(path) -> Graph:
    """Parse the edge-list format, raising a distinct error per defect kind."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MalformedHeaderError("empty file")
    head = lines[0].split()
    if len(head) != 2:
        raise MalformedHeaderError(f"header must be 'n m', got {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as exc:
        raise MalformedHeaderError(f"non-integer header {lines[0]!r}") from exc
    if not 1 <= n <= MAX_VERTICES or m < 0:
        raise MalformedHeaderError(f"header out of range: n={n}, m={m}")
    if len(lines) - 1 != m:
        raise MalformedHeaderError(
            f"header declares {m} edges but file has {len(lines) - 1} edge lines")
    seen = set()
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        toks = line.split()
        if len(toks) != 2:
            raise GraphParseError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError as exc:
            raise GraphParseError(f"line {lineno}: non-integer endpoint") from exc
        if u == v:
            raise LoopError(f"line {lineno}: loop at vertex {u}")
        if not (0 <= u < v < n):
            raise VertexRangeError(
                f"line {lineno}: edge ({u},{v}) violates 0 <= u < v < {n}")
        if (u, v) in seen:
            raise DuplicateEdgeError(f"line {lineno}: duplicate edge ({u},{v})")
        seen.add((u, v))
        edges.append((u, v))
    return Graph.from_edges(n, edges)


def components(n: int, adj: Sequence[int]) -> list[int]:
    """Connected components of a bitset adjacency, as vertex masks."""
    unseen = (1 << n) - 1
    comps = []
    while unseen:
        root = (unseen & -unseen).bit_length() - 1
        comp = 1 << root
        frontier = comp
        while frontier:
            nxt = 0
            for v in iter_bits(frontier):
                nxt |= adj[v]
            nxt &= ~comp
            comp |= nxt
            frontier = nxt
        comps.append(comp)
        unseen &= ~comp
    return comps


def two_coloring(n: int, adj: Sequence[int]) -> Optional[int]:
    """Bitmask of one color class if the graph is bipartite, else None."""
    color = [-1] * n
    ones = 0
    for root in range(n):
        if color[root] != -1 or adj[root] == 0:
            if color[root] == -1:
                color[root] = 0
            continue
        color[root] = 0
        stack = [root]
        while stack:
            v = stack.pop()
            for w in iter_bits(adj[v]):
                if color[w] == -1:
                    color[w] = color[v] ^ 1
                    if color[w]:
                        ones |= 1 << w
                    stack.append(w)
                elif color[w] == color[v]:
                    return None
    return ones


def odd_cycle(n: int, adj: Sequence[int]) -> Optional[list[int]]:
    """Vertices of one odd cycle if the graph is non-bipartite, else None."""
    color = [-1] * n
    parent = [-1] * n
    for root in range(n):
        if color[root] != -1:
            continue
        color[root] = 0
        queue = [root]
        head = 0
        while head < len(queue):
            v = queue[head]
            head += 1
            for w in iter_bits(adj[v]):
                if color[w] == -1:
                    color[w] = color[v] ^ 1
                    parent[w] = v
                    queue.append(w)
                elif color[w] == color[v]:
                    return _extract_cycle(parent, v, w)
    return None


def _extract_cycle(parent: list[int], u: int, v: int) -> list[int]:
    path_u = [u]
    while parent[path_u[-1]] != -1:
        path_u.append(parent[path_u[-1]])
    anc = set(path_u)
    path_v = [v]
    while path_v[-1] not in anc:
        path_v.append(parent[path_v[-1]])
    meet = path_v[-1]
    cycle = path_u[:path_u.index(meet) + 1]  # u .. meet
    cycle.extend(reversed(path_v[:-1]))      # .. back down to v
    return cycle


def subgraph_on(g: Graph, edge_set: EdgeSet) -> Graph:
    """Spanning subgraph of g restricted to the given edges."""
    return Graph.from_edges(g.n, list(edge_set.pairs()))


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def binomial_pair_count(n: int) -> int:
    return math.comb(n, 2)
