"""Typed undirected simple graphs used as the game state."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping


class PlayerType(enum.Enum):
    MAJOR = "A"
    MINOR = "B"

    @classmethod
    def parse(cls, value: "str | PlayerType") -> "PlayerType":
        if isinstance(value, PlayerType):
            return value
        key = str(value).strip().upper()
        if key in ("A", "MAJOR", "MAJORA"):
            return cls.MAJOR
        if key in ("B", "MINOR", "MINORB"):
            return cls.MINOR
        raise ValueError(f"unknown player type {value!r}")


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Network:
    """Immutable simple graph over typed players.

    ``nodes`` is kept sorted; ``edges`` holds ``(u, v)`` with ``u < v``.
    Mutators return new instances so networks can be used as cache keys.
    """

    nodes: tuple[int, ...]
    types: tuple[PlayerType, ...]
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.types):
            raise ValueError("nodes and types must align")
        if list(self.nodes) != sorted(set(self.nodes)):
            raise ValueError("nodes must be unique and sorted")
        present = set(self.nodes)
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on {u}")
            if u > v:
                raise ValueError(f"edge {(u, v)} not normalised")
            if u not in present or v not in present:
                raise ValueError(f"edge {(u, v)} references an absent node")

    # construction ---------------------------------------------------------

    @classmethod
    def build(
        cls,
        types: Mapping[int, "PlayerType | str"],
        edges: Iterable[tuple[int, int]] = (),
    ) -> "Network":
        ids = sorted(types)
        norm = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop on {u}")
            norm.add(_edge(u, v))
        return cls(tuple(ids), tuple(PlayerType.parse(types[i]) for i in ids), frozenset(norm))

    @classmethod
    def from_counts(cls, n_major: int, n_minor: int, edges: Iterable[tuple[int, int]] = ()) -> "Network":
        """Majors get ids ``0..n_major-1``, minors follow."""
        types = {i: PlayerType.MAJOR for i in range(n_major)}
        types.update({n_major + i: PlayerType.MINOR for i in range(n_minor)})
        return cls.build(types, edges)

    # queries --------------------------------------------------------------

    @cached_property
    def index(self) -> dict[int, int]:
        return {v: k for k, v in enumerate(self.nodes)}

    @cached_property
    def adj(self) -> tuple[int, ...]:
        """Adjacency as one bitmask per node position."""
        masks = [0] * len(self.nodes)
        ix = self.index
        for u, v in self.edges:
            a, b = ix[u], ix[v]
            masks[a] |= 1 << b
            masks[b] |= 1 << a
        return tuple(masks)

    @cached_property
    def major_mask(self) -> int:
        m = 0
        for k, t in enumerate(self.types):
            if t is PlayerType.MAJOR:
                m |= 1 << k
        return m

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node: object) -> bool:
        return node in self.index

    def type_of(self, node: int) -> PlayerType:
        return self.types[self._pos(node)]

    @property
    def majors(self) -> list[int]:
        return [v for v, t in zip(self.nodes, self.types) if t is PlayerType.MAJOR]

    @property
    def minors(self) -> list[int]:
        return [v for v, t in zip(self.nodes, self.types) if t is PlayerType.MINOR]

    def has_edge(self, u: int, v: int) -> bool:
        return _edge(u, v) in self.edges

    def neighbors(self, node: int) -> list[int]:
        mask = self.adj[self._pos(node)]
        return [self.nodes[k] for k in _bits(mask)]

    def degree(self, node: int) -> int:
        return self.adj[self._pos(node)].bit_count()

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def _pos(self, node: int) -> int:
        try:
            return self.index[node]
        except KeyError:
            raise KeyError(f"unknown node {node!r}") from None

    # functional updates ---------------------------------------------------

    def _derived(self, edges: frozenset, a: int, b: int) -> "Network":
        # skips validation; adjacency is patched instead of rebuilt
        g = object.__new__(Network)
        object.__setattr__(g, "nodes", self.nodes)
        object.__setattr__(g, "types", self.types)
        object.__setattr__(g, "edges", edges)
        d = g.__dict__
        d["index"] = self.index
        d["major_mask"] = self.major_mask
        adj = list(self.adj)
        adj[a] ^= 1 << b
        adj[b] ^= 1 << a
        d["adj"] = tuple(adj)
        return g

    def add_edge(self, u: int, v: int) -> "Network":
        e = _edge(u, v)
        if u == v:
            raise ValueError(f"self-loop on {u}")
        if e in self.edges:
            raise ValueError(f"edge {e} already present")
        return self._derived(self.edges | {e}, self._pos(u), self._pos(v))

    def remove_edge(self, u: int, v: int) -> "Network":
        e = _edge(u, v)
        if e not in self.edges:
            raise ValueError(f"edge {e} not present")
        return self._derived(self.edges - {e}, self._pos(u), self._pos(v))

    def with_edges(self, edges: Iterable[tuple[int, int]]) -> "Network":
        return Network(self.nodes, self.types, frozenset(_edge(u, v) for u, v in edges))

    def add_node(self, node: int, ptype: "PlayerType | str") -> "Network":
        if node in self.index:
            raise ValueError(f"node {node} already present")
        types = dict(zip(self.nodes, self.types))
        types[node] = PlayerType.parse(ptype)
        ids = sorted(types)
        return Network(tuple(ids), tuple(types[i] for i in ids), self.edges)

    def relabel(self, mapping: Mapping[int, int]) -> "Network":
        types = {mapping[v]: t for v, t in zip(self.nodes, self.types)}
        return Network.build(types, ((mapping[u], mapping[v]) for u, v in self.edges))

    # serialisation --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": v, "type": t.value} for v, t in zip(self.nodes, self.types)],
            "edges": [list(e) for e in self.sorted_edges()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Network":
        types = {int(n["id"]): n["type"] for n in data["nodes"]}
        return cls.build(types, (tuple(e) for e in data.get("edges", ())))


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low
