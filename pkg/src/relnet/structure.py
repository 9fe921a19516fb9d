"""Recognisers for the structures the dynamics are predicted to reach."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from .cost import GameParams, social_cost
from .network import Network

OPTIMAL_STABLE = "OptimalStable"
DOUBLE_STAR = "DoubleStar"
SINGLE_STAR = "SingleStarUnreliable"
OTHER = "Other"


@dataclass
class StructureClass:
    variant: str
    roles: dict[int, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"variant": self.variant, "roles": {str(k): v for k, v in sorted(self.roles.items())}}


def _majors_clique(g: Network) -> bool:
    return all(g.has_edge(a, b) for a, b in combinations(g.majors, 2))


def _optimal_stable(g: Network) -> Optional[dict[int, str]]:
    minors = g.minors
    if not minors:
        return {v: "clique" for v in g.majors}
    first = frozenset(g.neighbors(minors[0]))
    if len(first) != 2 or any(not _is_major(g, v) for v in first):
        return None
    if any(frozenset(g.neighbors(r)) != first for r in minors[1:]):
        return None
    x, y = sorted(first)
    roles = {v: "clique" for v in g.majors}
    roles.update({x: "k", y: "k'"})
    roles.update({r: "L" for r in minors})
    return roles


def _is_major(g: Network, v: int) -> bool:
    return bool((g.major_mask >> g.index[v]) & 1)


def _double_star_with(g: Network, c1: int, k: int, c2: Optional[int]) -> Optional[dict[int, str]]:
    majors = set(g.majors)
    n1 = set(g.neighbors(c1))
    if k not in n1:
        return None
    s1, s2, loose = [], [], []
    for r in g.minors:
        if r in (c1, c2):
            continue
        nr = set(g.neighbors(r))
        if nr == {c1, k}:
            s1.append(r)
        elif c2 is not None and nr == {c1, c2}:
            s2.append(r)
        elif len(nr) >= 2 and nr <= majors:
            loose.append(r)
        else:
            return None
    if not s1 and not s2:
        return None
    minor_n1 = n1 - majors
    if minor_n1 - set(s1) - set(s2) - {c2}:
        return None
    d1 = n1 & majors
    d2: set[int] = set()
    if c2 is not None:
        n2 = set(g.neighbors(c2))
        if (n2 - majors) - set(s2) - {c1}:
            return None
        d2 = n2 & majors
        if c1 not in n2 and not d2:
            return None
    # the second major of the loose minors, if any
    others = Counter(m for r in loose for m in g.neighbors(r) if m != k)
    k2 = min(others, key=lambda m: (-others[m], m)) if others else None
    for r in loose:
        extra = set(g.neighbors(r)) - {k, k2} - d2
        if extra:
            return None
    roles = {v: "clique" for v in majors}
    for v in d1:
        roles[v] = "D1"
    for v in d2:
        roles[v] = "D2" if v not in d1 else "D1D2"
    if k2 is not None:
        roles[k2] = "k'"
    roles[k] = "k"
    roles[c1] = "center1"
    if c2 is not None:
        roles[c2] = "center2"
    roles.update({r: "S1" for r in s1})
    roles.update({r: "S2" for r in s2})
    roles.update({r: "L" for r in loose})
    return roles


def _double_star(g: Network) -> Optional[dict[int, str]]:
    minors = sorted(g.minors, key=lambda v: (-g.degree(v), v))
    for c1 in minors:
        for k in sorted(v for v in g.neighbors(c1) if _is_major(g, v)):
            seconds: list[Optional[int]] = [None] + [v for v in minors if v != c1]
            for c2 in seconds:
                roles = _double_star_with(g, c1, k, c2)
                if roles is not None:
                    return roles
    return None


def _single_star(g: Network, p: Optional[GameParams]) -> Optional[dict[int, str]]:
    minors = g.minors
    if not minors:
        return None
    if p is not None and social_cost(g, p).q == 0:
        return None
    hubs = {m for r in minors for m in g.neighbors(r) if _is_major(g, m)}
    for k in sorted(hubs):
        for x in [None] + minors:
            roles = _single_star_with(g, k, x)
            if roles is not None:
                return roles
    return None


def _single_star_with(g: Network, k: int, x: Optional[int]) -> Optional[dict[int, str]]:
    roles = {v: "clique" for v in g.majors}
    roles[k] = "k"
    if x is not None:
        if not g.has_edge(x, k):
            return None
        roles[x] = "center1"
        for m in g.neighbors(x):
            if _is_major(g, m) and m != k:
                roles[m] = "D"
    for r in g.minors:
        if r == x:
            continue
        majors_r = {m for m in g.neighbors(r) if _is_major(g, m)}
        if majors_r - {k}:
            return None
        if majors_r:
            roles[r] = "L"
        elif x is not None and g.has_edge(r, x):
            roles[r] = "S"
        else:
            return None
    # besides the star itself only S-L cross links are allowed among minors
    for u, v in g.edges:
        ru, rv = roles.get(u), roles.get(v)
        if ru in ("L", "S", "center1") and rv in ("L", "S", "center1"):
            if {ru, rv} not in ({"center1", "S"}, {"L", "S"}):
                return None
    if x is not None and "S" not in roles.values():
        return None
    return roles


def classify_structure(g: Network, p: Optional[GameParams] = None) -> StructureClass:
    """Match ``g`` against the optimal stable, double-star and single-star patterns.

    The single-star pattern also requires an unbounded social cost when
    ``p`` is supplied.
    """
    if not _majors_clique(g):
        return StructureClass(OTHER)
    for name, fn in ((OPTIMAL_STABLE, _optimal_stable), (DOUBLE_STAR, _double_star)):
        roles = fn(g)
        if roles is not None:
            return StructureClass(name, roles)
    roles = _single_star(g, p)
    if roles is not None:
        return StructureClass(SINGLE_STAR, roles)
    return StructureClass(OTHER)


def double_star_network(n_major: int, s1: int, s2: int, loose: int = 0, *, k: int = 0, k2: int = 1) -> Network:
    """Major clique, centers 1 and 2, primary star on (center 1, k), secondary star on both centers.

    Loose minors sit on ``k`` and ``k2``. Ids: majors, then center 1, center 2, S1, S2, L.
    """
    c1, c2 = n_major, n_major + 1
    n_minor = 2 + s1 + s2 + loose
    edges = list(combinations(range(n_major), 2))
    edges += [(c1, c2), (c1, k), (c2, k)]
    nxt = n_major + 2
    for r in range(nxt, nxt + s1):
        edges += [(r, c1), (r, k)]
    nxt += s1
    for r in range(nxt, nxt + s2):
        edges += [(r, c1), (r, c2)]
    nxt += s2
    for r in range(nxt, nxt + loose):
        edges += [(r, k), (r, k2)]
    return Network.from_counts(n_major, n_minor, edges)
