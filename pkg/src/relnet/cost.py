"""Player costs, social cost, link-change deltas and transfer-adjusted costs.

Costs are exact: finite parts are :class:`fractions.Fraction` and every
missing path (or missing backup path) is tallied in a separate integer so
that "unbounded" is decided exactly rather than through a big constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Optional

from .network import Network, PlayerType, _edge
from .paths import DEFAULT_EXACT_BUDGET, Q, DisjointMode, Objective, distance_row, pair_row


def as_fraction(x) -> Fraction:
    """Exact conversion; floats go through their shortest repr so 2.5 -> 5/2."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True, order=True)
class ExtCost:
    """Extended-real cost ``q * Q + finite`` with lexicographic order.

    ``q`` may be negative for differences of costs.
    """

    q: int = 0
    finite: Fraction = Fraction(0)

    def __add__(self, other: "ExtCost") -> "ExtCost":
        return ExtCost(self.q + other.q, self.finite + other.finite)

    def __sub__(self, other: "ExtCost") -> "ExtCost":
        return ExtCost(self.q - other.q, self.finite - other.finite)

    def __neg__(self) -> "ExtCost":
        return ExtCost(-self.q, -self.finite)

    def plus(self, amount) -> "ExtCost":
        return ExtCost(self.q, self.finite + amount)

    @property
    def unbounded(self) -> bool:
        return self.q > 0

    def sign(self) -> int:
        if self.q:
            return 1 if self.q > 0 else -1
        return (self.finite > 0) - (self.finite < 0)

    def to_json(self) -> dict:
        return {"q": self.q, "finite": str(self.finite), "approx": float(self.finite)}

    @classmethod
    def from_json(cls, data: Mapping) -> "ExtCost":
        return cls(int(data["q"]), Fraction(data["finite"]))

    def __str__(self) -> str:
        if self.q == 0:
            return str(self.finite)
        return f"{self.q}Q{'+' if self.finite >= 0 else '-'}{abs(self.finite)}"


ZERO = ExtCost()


@dataclass(frozen=True)
class GameParams:
    A: Fraction
    c_A: Fraction
    c_B: Fraction
    delta: Fraction = Fraction(1)
    tau: int = 1
    mode: DisjointMode = DisjointMode.NODE
    objective: Optional[Objective] = None
    transfers: bool = False
    exact_budget: int = DEFAULT_EXACT_BUDGET

    def __post_init__(self) -> None:
        for name in ("A", "c_A", "c_B", "delta"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", DisjointMode(self.mode))
        if self.A <= 1:
            raise ValueError("A must exceed 1")
        if self.c_A <= 0 or self.c_B <= 0:
            raise ValueError("link prices must be positive")
        if self.c_A > self.c_B:
            raise ValueError("c_A must not exceed c_B")
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must lie in [0, 1]")
        if self.tau not in (0, 1):
            raise ValueError("tau must be 0 or 1")

    @property
    def c(self) -> Fraction:
        return (self.c_A + self.c_B) / 2

    @property
    def pair_objective(self) -> Objective:
        """Explicit objective, or min-sum at delta=1 and the shortest-first heuristic otherwise."""
        if self.objective is not None:
            return self.objective
        return Objective.min_sum() if self.delta == 1 else Objective.heuristic()

    def link_price(self, ptype: PlayerType) -> Fraction:
        return self.c_A if ptype is PlayerType.MAJOR else self.c_B

    def with_(self, **changes) -> "GameParams":
        return replace(self, **changes)

    def to_json(self) -> dict:
        return {
            "A": str(self.A),
            "c_A": str(self.c_A),
            "c_B": str(self.c_B),
            "delta": str(self.delta),
            "tau": self.tau,
            "mode": self.mode.value,
            "objective": None if self.objective is None else str(self.objective),
            "transfers": self.transfers,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "GameParams":
        known = {"A", "c_A", "c_B", "delta", "tau", "mode", "objective", "transfers", "exact_budget"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        kw = dict(data)
        for k in ("A", "c_A", "c_B", "delta"):
            if k in kw:
                kw[k] = Fraction(str(kw[k]))
        if kw.get("objective") is not None:
            kw["objective"] = parse_objective(kw["objective"])
        if "mode" in kw:
            kw["mode"] = DisjointMode(kw["mode"])
        return cls(**kw)


def parse_objective(text: str) -> Objective:
    text = str(text).strip()
    if text.startswith("exact"):
        inner = text[len("exact"):].strip("() ")
        return Objective.exact(Fraction(inner or "1"))
    return Objective(text)


def _tally(g: Network, row, i_pos: int):
    """Return (sum d, sum d', #Q) separately for major and minor targets."""
    major = g.major_mask
    sd = [0, 0]
    sdp = [0, 0]
    qd = [0, 0]
    qdp = [0, 0]
    for j, (d, dp) in enumerate(row):
        if j == i_pos:
            continue
        k = 0 if (major >> j) & 1 else 1
        if d == Q:
            qd[k] += 1
        else:
            sd[k] += d
        if dp == Q:
            qdp[k] += 1
        else:
            sdp[k] += dp
    return sd, sdp, qd, qdp


@lru_cache(maxsize=1 << 18)
def _node_cost(g: Network, p: GameParams, i: int) -> ExtCost:
    pos = g.index[i]
    row = pair_row(g, i, p.mode, p.pair_objective, p.exact_budget)
    sd, sdp, qd, qdp = _tally(g, row, pos)
    w = 1 / (1 + p.delta)
    finite = g.adj[pos].bit_count() * p.link_price(g.types[pos])
    finite += p.A * w * (sd[0] + p.delta * sdp[0])
    q = qd[0] + qdp[0]
    if p.tau:
        finite += w * (sd[1] + p.delta * sdp[1])
        q += qd[1] + qdp[1]
    else:
        finite += sd[1]
        q += qd[1]
    return ExtCost(q, finite)


def node_cost(g: Network, p: GameParams, i: int) -> ExtCost:
    """Cost of player ``i``: own link prices plus weighted disjoint-pair distances."""
    if i not in g:
        raise KeyError(f"unknown node {i!r}")
    return _node_cost(g, p, i)


@lru_cache(maxsize=1 << 16)
def _bare_cost(g: Network, p: GameParams, i: int) -> ExtCost:
    pos = g.index[i]
    row = distance_row(g, i)
    major = g.major_mask
    q = 0
    sa = sb = 0
    for j, d in enumerate(row):
        if j == pos:
            continue
        if d == Q:
            q += 1
        elif (major >> j) & 1:
            sa += d
        else:
            sb += d
    finite = g.adj[pos].bit_count() * p.link_price(g.types[pos]) + p.A * sa + sb
    return ExtCost(q, finite)


def bare_node_cost(g: Network, p: GameParams, i: int) -> ExtCost:
    """Single-path variant: delta and tau set to zero and no backup requirement."""
    if i not in g:
        raise KeyError(f"unknown node {i!r}")
    return _bare_cost(g, p, i)


def player_cost(g: Network, p: GameParams, i: int, bare: bool = False) -> ExtCost:
    return _bare_cost(g, p, i) if bare else _node_cost(g, p, i)


def social_cost(g: Network, p: GameParams, bare: bool = False) -> ExtCost:
    fn = _bare_cost if bare else _node_cost
    total = ZERO
    for v in g.nodes:
        total = total + fn(g, p, v)
    return total


def distance_cost(g: Network, p: GameParams, i: int) -> ExtCost:
    """Cost of ``i`` without its link-price term."""
    c = node_cost(g, p, i)
    return c.plus(-g.degree(i) * p.link_price(g.type_of(i)))


def apply_change(g: Network, edge: tuple[int, int], change: str) -> Network:
    u, v = edge
    if change == "add":
        if g.has_edge(u, v):
            raise ValueError(f"cannot add present edge {_edge(u, v)}")
        return g.add_edge(u, v)
    if change == "remove":
        if not g.has_edge(u, v):
            raise ValueError(f"cannot remove absent edge {_edge(u, v)}")
        return g.remove_edge(u, v)
    raise ValueError(f"change must be 'add' or 'remove', got {change!r}")


def delta_cost(
    g: Network,
    p: GameParams,
    i: int,
    edge: tuple[int, int],
    change: str,
    bare: bool = False,
) -> ExtCost:
    """Cost of ``i`` after the change minus its cost before; negative means ``i`` gains."""
    after = apply_change(g, edge, change)
    return player_cost(after, p, i, bare) - player_cost(g, p, i, bare)


@dataclass
class PaymentMatrix:
    """Payments ``P[(i, j)]`` made by ``i`` to ``j`` for the existing link ``ij``."""

    entries: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for (i, j), amount in self.entries.items():
            amount = as_fraction(amount)
            if amount < 0:
                raise ValueError(f"negative payment on {(i, j)}")
            if amount:
                clean[(i, j)] = amount
        self.entries = clean

    def validate(self, g: Network) -> None:
        for i, j in self.entries:
            if not g.has_edge(i, j):
                raise ValueError(f"payment on absent edge {(i, j)}")

    def set(self, payer: int, payee: int, amount) -> None:
        amount = as_fraction(amount)
        if amount < 0:
            raise ValueError("payments are non-negative")
        if amount:
            self.entries[(payer, payee)] = amount
        else:
            self.entries.pop((payer, payee), None)

    def drop_edge(self, u: int, v: int) -> None:
        self.entries.pop((u, v), None)
        self.entries.pop((v, u), None)

    def net_outflow(self, i: int) -> Fraction:
        total = Fraction(0)
        for (a, b), amount in self.entries.items():
            if a == i:
                total += amount
            elif b == i:
                total -= amount
        return total

    def copy(self) -> "PaymentMatrix":
        return PaymentMatrix(dict(self.entries))

    def to_json(self) -> list:
        return [[a, b, str(x)] for (a, b), x in sorted(self.entries.items())]

    @classmethod
    def from_items(cls, items: Iterable) -> "PaymentMatrix":
        return cls({(int(a), int(b)): Fraction(str(x)) for a, b, x in items})


def transfer_adjusted_cost(g: Network, p: GameParams, pay: PaymentMatrix, i: int) -> ExtCost:
    pay.validate(g)
    return node_cost(g, p, i).plus(pay.net_outflow(i))
