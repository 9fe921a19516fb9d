"""Shortest paths, disjoint path pairs and disjoint-path counting.

All searches run on the bitmask adjacency of :class:`~relnet.network.Network`
(one int per node position), which keeps the per-pair work small enough for
the dynamics engine to evaluate thousands of candidate graphs.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence

import networkx as nx

from .network import Network, _bits

# Symbolic infinite length. Never replaced by a large finite constant.
Q = math.inf

DEFAULT_EXACT_BUDGET = 12


class DisjointMode(enum.Enum):
    NODE = "node"
    LINK = "link"


@dataclass(frozen=True)
class Objective:
    """How the pair of disjoint paths between two players is selected.

    ``min_sum`` minimises d + d'; ``heuristic`` fixes the lexicographically
    smallest shortest path and takes the shortest path disjoint from it;
    ``exact`` minimises d + delta * d' by exhaustive search.
    """

    kind: str
    delta: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.kind not in ("min_sum", "heuristic", "exact"):
            raise ValueError(f"unknown objective {self.kind!r}")
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must lie in [0, 1]")

    @classmethod
    def min_sum(cls) -> "Objective":
        return cls("min_sum")

    @classmethod
    def heuristic(cls) -> "Objective":
        return cls("heuristic")

    @classmethod
    def exact(cls, delta) -> "Objective":
        return cls("exact", Fraction(delta))

    def __str__(self) -> str:
        return f"exact({self.delta})" if self.kind == "exact" else self.kind


class DistancePair(NamedTuple):
    d: float
    d_prime: float
    witness: Optional[tuple[tuple[int, ...], tuple[int, ...]]] = None


class BudgetExceeded(RuntimeError):
    """Raised when an exhaustive computation would exceed its size budget."""


# ---------------------------------------------------------------------------
# bitmask primitives (positions, not node ids)


def _lex_bfs(adj: Sequence[int], src: int) -> tuple[list[int], list[int]]:
    """BFS whose parent pointers spell the lexicographically smallest shortest path.

    Layer members are visited in order of (parent rank, position), so the first
    parent to claim a node is the one whose own path is lexicographically least.
    """
    n = len(adj)
    dist = [-1] * n
    parent = [-1] * n
    dist[src] = 0
    seen = 1 << src
    layer = [src]
    k = 0
    while layer:
        k += 1
        nxt = []
        for u in layer:
            new = adj[u] & ~seen
            if not new:
                continue
            seen |= new
            while new:
                low = new & -new
                v = low.bit_length() - 1
                new ^= low
                dist[v] = k
                parent[v] = u
                nxt.append(v)
        layer = nxt
    return dist, parent


def _trace(parent: Sequence[int], src: int, dst: int) -> list[int]:
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def _bfs_len(adj: Sequence[int], src: int, dst: int, blocked: int, skip_direct: bool) -> float:
    target = 1 << dst
    seen = blocked | (1 << src)
    frontier = adj[src] & ~seen
    if skip_direct:
        frontier &= ~target
    k = 1
    while frontier:
        if frontier & target:
            return k
        seen |= frontier
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= adj[low.bit_length() - 1]
            f ^= low
        frontier = nxt & ~seen
        k += 1
    return Q


def _bfs_path(adj: Sequence[int], src: int, dst: int, blocked: int, skip_direct: bool) -> Optional[list[int]]:
    parent = {src: -1}
    seen = blocked | (1 << src)
    layer = [src]
    while layer:
        nxt = []
        for u in layer:
            new = adj[u] & ~seen
            if u == src and skip_direct:
                new &= ~(1 << dst)
            seen |= new
            for v in _bits(new):
                parent[v] = u
                if v == dst:
                    path = [dst]
                    while path[-1] != src:
                        path.append(parent[path[-1]])
                    return path[::-1]
                nxt.append(v)
        layer = nxt
    return None


def _strip_edges(adj: Sequence[int], path: Sequence[int]) -> list[int]:
    out = list(adj)
    for a, b in zip(path, path[1:]):
        out[a] &= ~(1 << b)
        out[b] &= ~(1 << a)
    return out


def _interior_mask(path: Sequence[int]) -> int:
    m = 0
    for v in path[1:-1]:
        m |= 1 << v
    return m


def _partner_len(adj, path, mode: DisjointMode) -> float:
    """Shortest path disjoint from ``path`` (same endpoints)."""
    src, dst = path[0], path[-1]
    if mode is DisjointMode.NODE:
        return _bfs_len(adj, src, dst, _interior_mask(path), len(path) == 2)
    return _bfs_len(_strip_edges(adj, path), src, dst, 0, False)


def _partner_path(adj, path, mode: DisjointMode) -> Optional[list[int]]:
    src, dst = path[0], path[-1]
    if mode is DisjointMode.NODE:
        return _bfs_path(adj, src, dst, _interior_mask(path), len(path) == 2)
    return _bfs_path(_strip_edges(adj, path), src, dst, 0, False)


# ---------------------------------------------------------------------------
# pair objectives


def _heuristic_pair(adj, src, dst, mode, dist, parent, witness):
    if dist[dst] < 0:
        return DistancePair(Q, Q)
    primary = _trace(parent, src, dst)
    if not witness:
        return DistancePair(dist[dst], _partner_len(adj, primary, mode))
    backup = _partner_path(adj, primary, mode)
    if backup is None:
        return DistancePair(dist[dst], Q, (tuple(primary), ()))
    return DistancePair(dist[dst], len(backup) - 1, (tuple(primary), tuple(backup)))


class _Residual:
    """Unit-capacity residual network for the two-path min-cost flow."""

    __slots__ = ("out", "to", "cap", "cost")

    def __init__(self, n: int) -> None:
        self.out: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[int] = []

    def arc(self, u: int, v: int, cap: int, cost: int) -> None:
        self.out[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.out[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)

    def push_path(self, arcs: Sequence[int]) -> None:
        for e in arcs:
            self.cap[e] -= 1
            self.cap[e ^ 1] += 1

    def cheapest(self, s: int, t: int) -> Optional[list[int]]:
        """Bellman-Ford (queue based); residual arcs may carry negative cost."""
        n = len(self.out)
        INF = 1 << 30
        dist = [INF] * n
        via = [-1] * n
        inq = [False] * n
        dist[s] = 0
        q = deque([s])
        inq[s] = True
        to, cap, cost, out = self.to, self.cap, self.cost, self.out
        while q:
            u = q.popleft()
            inq[u] = False
            du = dist[u]
            for e in out[u]:
                if cap[e] > 0:
                    v = to[e]
                    nd = du + cost[e]
                    if nd < dist[v]:
                        dist[v] = nd
                        via[v] = e
                        if not inq[v]:
                            inq[v] = True
                            q.append(v)
        if dist[t] >= INF:
            return None
        arcs = []
        v = t
        while v != s:
            e = via[v]
            arcs.append(e)
            v = self.to[e ^ 1]
        arcs.reverse()
        return arcs


def _min_sum_pair(adj, src, dst, mode, dist, parent, witness):
    """Suurballe-style pair: shortest path, then one augmenting path in the residual graph."""
    if dist[dst] < 0:
        return DistancePair(Q, Q)
    n = len(adj)
    primary = _trace(parent, src, dst)
    if mode is DisjointMode.NODE:
        # position v -> in-copy 2v, out-copy 2v+1
        res = _Residual(2 * n)
        node_arc = [0] * n
        for v in range(n):
            node_arc[v] = len(res.to)
            res.arc(2 * v, 2 * v + 1, 1, 0)
        edge_arc = {}
        for u in range(n):
            for v in _bits(adj[u]):
                edge_arc[(u, v)] = len(res.to)
                res.arc(2 * u + 1, 2 * v, 1, 1)
        s, t = 2 * src + 1, 2 * dst
        first = []
        for a, b in zip(primary, primary[1:]):
            first.append(edge_arc[(a, b)])
            if b != dst:
                first.append(node_arc[b])
        res.push_path(first)
    else:
        res = _Residual(n)
        edge_arc = {}
        for u in range(n):
            for v in _bits(adj[u]):
                edge_arc[(u, v)] = len(res.to)
                res.arc(u, v, 1, 1)
        s, t = src, dst
        res.push_path([edge_arc[(a, b)] for a, b in zip(primary, primary[1:])])

    second = res.cheapest(s, t)
    if second is None:
        if witness:
            return DistancePair(dist[dst], Q, (tuple(primary), ()))
        return DistancePair(dist[dst], Q)
    res.push_path(second)

    # decompose the two units of flow; forward arcs have even ids
    used = {}
    for e in range(0, len(res.to), 2):
        if res.cap[e] == 0 and res.cost[e] == 1:
            u = res.to[e ^ 1]
            used.setdefault(u, []).append(res.to[e])
    paths = []
    for _ in range(2):
        node = s
        seq = [node]
        while node != t:
            nxt = used[node].pop()
            if mode is DisjointMode.NODE:
                # hop in-copy -> out-copy unless at the sink
                seq.append(nxt)
                node = nxt + 1 if nxt != t else nxt
            else:
                seq.append(nxt)
                node = nxt
        paths.append(seq)
    if mode is DisjointMode.NODE:
        paths = [[v // 2 for v in p] for p in paths]
    paths.sort(key=len)
    d, dp = len(paths[0]) - 1, len(paths[1]) - 1
    if witness:
        return DistancePair(d, dp, (tuple(paths[0]), tuple(paths[1])))
    return DistancePair(d, dp)


def _pair_value(a: float, b: float, delta: Fraction):
    lo, hi = (a, b) if a <= b else (b, a)
    if hi == Q:
        return (1, lo, 0, 0)
    return (0, lo + delta * hi, lo, hi)


def _exact_pair(adj, src, dst, mode, dist, parent, delta, witness):
    """Exhaustive min of d + delta*d', ties broken toward the smaller d, then the smaller d'.

    Every optimal pair contains its shorter path R, and the shortest partner
    of R is never worse, so it is enough to enumerate simple paths up to the
    length bound best/(1+delta) and attach their shortest disjoint partner.
    """
    if dist[dst] < 0:
        return DistancePair(Q, Q)
    seed = _heuristic_pair(adj, src, dst, mode, dist, parent, True)
    if seed.d_prime == Q:
        # the min-sum search settles whether any disjoint pair exists at all
        seed = _min_sum_pair(adj, src, dst, mode, dist, parent, True)
        if seed.d_prime == Q:
            return seed if witness else DistancePair(seed.d, Q)
    best_key = _pair_value(seed.d, seed.d_prime, delta)
    best_primary: Optional[tuple[int, ...]] = None
    to_dst, _ = _lex_bfs(adj, dst)
    path = [src]
    on_path = 1 << src

    def visit(u: int) -> None:
        nonlocal best_key, best_primary, on_path
        for v in _bits(adj[u] & ~on_path):
            if to_dst[v] < 0 or len(path) + to_dst[v] > best_key[1] / (1 + delta):
                continue
            path.append(v)
            on_path |= 1 << v
            if v == dst:
                key = _pair_value(len(path) - 1, _partner_len(adj, path, mode), delta)
                if key < best_key:
                    best_key = key
                    best_primary = tuple(path)
            else:
                visit(v)
            path.pop()
            on_path &= ~(1 << v)

    visit(src)
    if best_primary is None:
        return seed if witness else DistancePair(seed.d, seed.d_prime)
    partner = tuple(_partner_path(adj, list(best_primary), mode))
    short, long_ = sorted((best_primary, partner), key=len)
    return DistancePair(len(short) - 1, len(long_) - 1, (short, long_) if witness else None)


# ---------------------------------------------------------------------------
# public API


def _check(g: Network, *nodes: int) -> list[int]:
    try:
        return [g.index[v] for v in nodes]
    except KeyError as exc:
        raise KeyError(f"unknown node {exc.args[0]!r}") from None


def shortest_path_len(g: Network, i: int, j: int) -> float:
    a, b = _check(g, i, j)
    if a == b:
        return 0
    return _bfs_len(g.adj, a, b, 0, False)


def _pair(adj, a, b, mode, objective, dist, parent, witness, budget):
    if objective.kind == "heuristic":
        return _heuristic_pair(adj, a, b, mode, dist, parent, witness)
    if objective.kind == "min_sum":
        return _min_sum_pair(adj, a, b, mode, dist, parent, witness)
    if len(adj) > budget:
        raise BudgetExceeded(f"exact pair search refuses graphs with more than {budget} nodes (got {len(adj)})")
    return _exact_pair(adj, a, b, mode, dist, parent, objective.delta, witness)


def disjoint_pair(
    g: Network,
    i: int,
    j: int,
    mode: DisjointMode = DisjointMode.NODE,
    objective: Objective = Objective.min_sum(),
    *,
    witness: bool = False,
    node_budget: int = DEFAULT_EXACT_BUDGET,
) -> DistancePair:
    """Lengths (d, d') of the selected disjoint path pair between ``i`` and ``j``.

    d' is ``Q`` when no disjoint pair exists; both are ``Q`` when ``i`` and
    ``j`` are disconnected. Witness paths are reported as node-id sequences.
    """
    a, b = _check(g, i, j)
    if a == b:
        raise ValueError("disjoint_pair needs two distinct nodes")
    adj = g.adj
    dist, parent = _lex_bfs(adj, a)
    res = _pair(adj, a, b, mode, objective, dist, parent, witness, node_budget)
    if witness and res.witness is not None:
        ids = g.nodes
        res = res._replace(witness=tuple(tuple(ids[k] for k in p) for p in res.witness))
    return res


@lru_cache(maxsize=1 << 17)
def _row(adj: tuple[int, ...], src: int, mode: DisjointMode, objective: Objective, budget: int):
    dist, parent = _lex_bfs(adj, src)
    out = []
    for dst in range(len(adj)):
        if dst == src:
            out.append((0, 0))
        else:
            p = _pair(adj, src, dst, mode, objective, dist, parent, False, budget)
            out.append((p.d, p.d_prime))
    return tuple(out)


def pair_row(
    g: Network,
    i: int,
    mode: DisjointMode,
    objective: Objective,
    node_budget: int = DEFAULT_EXACT_BUDGET,
) -> tuple[tuple[float, float], ...]:
    """(d, d') from ``i`` to every node position; the self entry is (0, 0)."""
    return _row(g.adj, g.index[i], mode, objective, node_budget)


@lru_cache(maxsize=1 << 16)
def _dist_row(adj: tuple[int, ...], src: int) -> tuple[float, ...]:
    dist, _ = _lex_bfs(adj, src)
    return tuple(Q if x < 0 else x for x in dist)


def distance_row(g: Network, i: int) -> tuple[float, ...]:
    return _dist_row(g.adj, g.index[i])


def count_disjoint_paths_to_set(
    g: Network,
    i: int,
    core: set[int] | frozenset[int],
    mode: DisjointMode = DisjointMode.NODE,
) -> int:
    """Maximum number of disjoint paths from ``i`` into ``core``.

    Paths end at their first core node and may share that endpoint; interior
    nodes (node mode) or edges (link mode) carry unit capacity.
    """
    _check(g, i, *core)
    if not core:
        raise ValueError("core must be non-empty")
    if i in core:
        raise ValueError(f"node {i} is itself in the core")
    flow = nx.DiGraph()
    sink = ("sink",)
    big = max(len(g.edges), 1)
    for c in core:
        flow.add_edge(("in", c), sink, capacity=big)
    for v in g.nodes:
        if v != i and v not in core:
            cap = 1 if mode is DisjointMode.NODE else big
            flow.add_edge(("in", v), ("out", v), capacity=cap)
    for u, v in g.edges:
        for a, b in ((u, v), (v, u)):
            if a in core or b == i:
                continue
            tail = ("out", a)
            flow.add_edge(tail, ("in", b), capacity=1)
    source = ("out", i)
    if source not in flow:
        return 0
    return int(nx.maximum_flow_value(flow, source, sink))
