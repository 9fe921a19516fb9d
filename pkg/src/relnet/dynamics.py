"""Turn-based network evolution.

One player acts per turn. It removes links unilaterally and proposes new
ones to counterparties that accept myopically. Two move disciplines are
supported: ``2b`` (every move must strictly lower the actor's cost) and
``2a`` (a removal set followed by a short greedy run of additions, judged
only by the actor's cost at the end of the plan).
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence

from .cost import ZERO, ExtCost, GameParams, PaymentMatrix, distance_cost, node_cost
from .network import Network, PlayerType, _edge

RULE_2A = "2a"
RULE_2B = "2b"

ORDERS = ("round_robin", "random", "explicit")


class PreconditionError(ValueError):
    """Raised when an operation's stated preconditions do not hold."""


@dataclass(frozen=True)
class DynamicRule:
    """Move discipline inside a turn.

    For ``2a`` the removal part of a plan ranges over every subset of the
    actor's links while its degree is at most ``exhaustive_degree``; above
    that, subsets of up to ``removal_limit`` links plus full disconnection.
    """

    variant: str = RULE_2B
    plan_depth: int = 3
    exhaustive_degree: int = 4
    removal_limit: int = 2

    def __post_init__(self) -> None:
        v = str(self.variant).lower().replace("rule", "").replace("#", "").strip()
        if v not in (RULE_2A, RULE_2B):
            raise ValueError(f"unknown rule variant {self.variant!r}")
        object.__setattr__(self, "variant", v)
        if self.plan_depth < 1:
            raise ValueError("plan_depth must be positive")

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "plan_depth": self.plan_depth,
            "exhaustive_degree": self.exhaustive_degree,
            "removal_limit": self.removal_limit,
        }

    @classmethod
    def from_json(cls, data) -> "DynamicRule":
        unknown = set(data) - {"variant", "plan_depth", "exhaustive_degree", "removal_limit"}
        if unknown:
            raise ValueError(f"unknown rule keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class Schedule:
    """Arrival times plus the policy that picks actors on non-arrival turns.

    Each arrival ``(turn, node, type)`` joins with no links and acts on its
    arrival turn (later, if several arrive together).
    """

    arrivals: tuple[tuple[int, int, PlayerType], ...]
    order: str = "round_robin"
    seed: int = 0
    explicit: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        arr = tuple((int(t), int(v), PlayerType.parse(k)) for t, v, k in self.arrivals)
        object.__setattr__(self, "arrivals", arr)
        object.__setattr__(self, "explicit", tuple(int(x) for x in self.explicit))
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}")
        turns = [t for t, _, _ in arr]
        if turns != sorted(turns) or any(t < 0 for t in turns):
            raise ValueError("arrival turns must be non-negative and non-decreasing")
        ids = [v for _, v, _ in arr]
        if len(set(ids)) != len(ids):
            raise ValueError("a node may arrive only once")

    @classmethod
    def sequential(
        cls,
        n_major: int,
        n_minor: int,
        *,
        spacing: int = 1,
        order: str = "round_robin",
        seed: int = 0,
        shuffle_minors: bool = False,
    ) -> "Schedule":
        """Majors (ids ``0..n_major-1``) then minors, one arrival every ``spacing`` turns."""
        minors = list(range(n_major, n_major + n_minor))
        if shuffle_minors:
            random.Random(seed).shuffle(minors)
        seq = [(v, PlayerType.MAJOR) for v in range(n_major)] + [(v, PlayerType.MINOR) for v in minors]
        return cls(tuple((k * spacing, v, t) for k, (v, t) in enumerate(seq)), order, seed)

    @property
    def players(self) -> list[int]:
        return [v for _, v, _ in self.arrivals]

    def to_json(self) -> dict:
        return {
            "arrivals": [[t, v, k.value] for t, v, k in self.arrivals],
            "order": self.order,
            "seed": self.seed,
            "explicit": list(self.explicit),
        }

    @classmethod
    def from_json(cls, data) -> "Schedule":
        unknown = set(data) - {"arrivals", "order", "seed", "explicit"}
        if unknown:
            raise ValueError(f"unknown schedule keys: {sorted(unknown)}")
        return cls(
            tuple(tuple(a) for a in data["arrivals"]),
            data.get("order", "round_robin"),
            int(data.get("seed", 0)),
            tuple(data.get("explicit", ())),
        )


@dataclass(frozen=True)
class Move:
    kind: str
    edge: tuple[int, int]
    actor_delta: ExtCost
    payment: Optional[Fraction] = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "edge": list(self.edge), "actor_delta": self.actor_delta.to_json()}
        if self.payment is not None:
            out["payment"] = str(self.payment)
        return out


def network_hash(g: Network) -> str:
    blob = json.dumps(g.sorted_edges(), separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class TurnLog:
    turn: int
    actor: int
    moves: tuple[Move, ...]
    network_hash: str
    arrival: bool = False

    def to_json(self) -> dict:
        return {
            "turn": self.turn,
            "actor": self.actor,
            "arrival": self.arrival,
            "moves": [m.to_json() for m in self.moves],
            "network_hash": self.network_hash,
        }


def write_jsonl(logs: Iterable[TurnLog], fh) -> None:
    for rec in logs:
        fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# pricing


def _ext(x) -> ExtCost:
    if isinstance(x, ExtCost):
        return x
    return ExtCost(0, Fraction(x))


def _require_transfers(p: GameParams) -> None:
    if not p.transfers:
        raise PreconditionError("strategic pricing needs transfers enabled in the game parameters")


def _link_deltas(g: Network, p: GameParams, actor: int, j: int) -> tuple[ExtCost, ExtCost]:
    h = g.add_edge(actor, j)
    return node_cost(h, p, actor) - node_cost(g, p, actor), node_cost(h, p, j) - node_cost(g, p, j)


def _prices(deltas: dict[int, tuple[ExtCost, ExtCost]]) -> dict[int, ExtCost]:
    if not deltas:
        return {}
    # the least useful link for the actor sets the reference price
    star = max(deltas, key=lambda j: (deltas[j][0], -j))
    d_star, c_star = deltas[star]
    p_star = max(c_star, ZERO)
    out = {}
    for j, (d_i, d_j) in deltas.items():
        alpha = (d_star - d_i) + p_star
        out[j] = max(ZERO, alpha, d_j)
    return out


def strategic_prices(
    g: Network,
    p: GameParams,
    actor: int,
    candidates: Optional[Iterable[int]] = None,
) -> dict[int, ExtCost]:
    """Price each candidate counterparty asks ``actor`` for a new link.

    Candidates default to every present non-neighbour. The reference
    counterparty ``j*`` is the one whose link helps the actor least; its
    price just compensates it. Every other price is raised by the actor's
    extra gain over ``j*``, and no price leaves the counterparty worse off.
    """
    _require_transfers(p)
    if actor not in g:
        raise KeyError(f"unknown node {actor!r}")
    pool = _non_neighbors(g, actor) if candidates is None else list(candidates)
    return _prices({j: _link_deltas(g, p, actor, j) for j in pool})


def _choice_order(candidates: dict[int, tuple], rng: random.Random) -> list[int]:
    keyed = {j: (_ext(d) + _ext(pr), _ext(pr)) for j, (d, pr) in candidates.items()}
    out: list[int] = []
    for key in sorted(set(keyed.values())):
        tied = sorted(j for j, k in keyed.items() if k == key)
        rng.shuffle(tied)
        out += tied
    return out


def choose_link(actor: int, candidates: dict[int, tuple], seed=0) -> Optional[int]:
    """Pick the counterparty minimising delta + price (must be negative), then price, then at random."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    best = None
    for j, (d, pr) in candidates.items():
        total = _ext(d) + _ext(pr)
        if total < ZERO:
            key = (total, _ext(pr))
            if best is None or key < best[0]:
                best = (key, [j])
            elif key == best[0]:
                best[1].append(j)
    if best is None:
        return None
    return rng.choice(sorted(best[1]))


# ---------------------------------------------------------------------------
# turns


def _non_neighbors(g: Network, actor: int) -> list[int]:
    near = set(g.neighbors(actor))
    return [v for v in g.nodes if v != actor and v not in near]


def _outflow(pay: Optional[PaymentMatrix], i: int) -> Fraction:
    return Fraction(0) if pay is None else pay.net_outflow(i)


def _cost(g: Network, p: GameParams, pay: Optional[PaymentMatrix], i: int) -> ExtCost:
    return node_cost(g, p, i).plus(_outflow(pay, i))


def _addition_options(g, p, actor, pay, rng, improving_only):
    """Accepted additions for the actor, best first, as (j, price or None)."""
    base = node_cost(g, p, actor)
    if pay is None:
        scored = []
        for j in _non_neighbors(g, actor):
            d = node_cost(g.add_edge(actor, j), p, actor) - base
            if improving_only and d >= ZERO:
                continue
            scored.append((d, j))
        scored.sort()
        for d, j in scored:
            h = g.add_edge(actor, j)
            if node_cost(h, p, j) < node_cost(g, p, j):
                yield j, None
        return
    deltas = {j: _link_deltas(g, p, actor, j) for j in _non_neighbors(g, actor)}
    prices = _prices(deltas)
    cands = {}
    for j, (d_i, d_j) in deltas.items():
        if (d_i + d_j) >= ZERO or prices[j].q != 0:
            continue
        if improving_only and d_i + prices[j] >= ZERO:
            continue
        cands[j] = (d_i, prices[j])
    for j in _choice_order(cands, rng):
        yield j, prices[j].finite


def _apply(g, p, pay, actor, kind, j, price=None):
    before = _cost(g, p, pay, actor)
    if kind == "remove":
        h = g.remove_edge(actor, j)
        if pay is not None:
            pay = pay.copy()
            pay.drop_edge(actor, j)
    else:
        h = g.add_edge(actor, j)
        if pay is not None and price:
            pay = pay.copy()
            pay.set(actor, j, price)
    move = Move(kind, _edge(actor, j), _cost(h, p, pay, actor) - before, price)
    return h, pay, move


def _single_move(g, p, actor, pay, rng):
    """Best strictly improving single move, or None."""
    options = []
    base = node_cost(g, p, actor)
    for j in g.neighbors(actor):
        h = g.remove_edge(actor, j)
        d_i = node_cost(h, p, actor) - base
        if pay is None:
            if d_i < ZERO:
                options.append((d_i, j, 0, "remove", None))
        else:
            total = d_i + (node_cost(h, p, j) - node_cost(g, p, j))
            if total < ZERO:
                options.append((total, j, 0, "remove", None))
    for j, price in _addition_options(g, p, actor, pay, rng, improving_only=True):
        d_i = node_cost(g.add_edge(actor, j), p, actor) - base
        options.append((d_i.plus(price or 0), j, 1, "add", price))
        break
    if not options:
        return None
    best = min(options, key=lambda o: o[:3])
    return best[3], best[1], best[4]


def _removal_sets(own: Sequence[int], rule: DynamicRule) -> Iterator[tuple[int, ...]]:
    if len(own) <= rule.exhaustive_degree:
        for k in range(len(own) + 1):
            yield from combinations(own, k)
        return
    for k in range(min(rule.removal_limit, len(own)) + 1):
        yield from combinations(own, k)
    if len(own) > rule.removal_limit:
        yield tuple(own)


def _best_plan(g, p, actor, pay, rule, rng):
    current = _cost(g, p, pay, actor)
    best = None
    for removed in _removal_sets(g.neighbors(actor), rule):
        h, hp, moves = g, pay, []
        for j in removed:
            h, hp, m = _apply(h, p, hp, actor, "remove", j)
            moves.append(m)
        steps = [(h, hp, list(moves))]
        for _ in range(rule.plan_depth):
            pick = next(_addition_options(h, p, actor, hp, rng, improving_only=False), None)
            if pick is None:
                break
            h, hp, m = _apply(h, p, hp, actor, "add", pick[0], pick[1])
            moves.append(m)
            steps.append((h, hp, list(moves)))
        for h2, hp2, mv in steps:
            if not mv:
                continue
            key = (_cost(h2, p, hp2, actor), len(mv))
            if best is None or key < best[0]:
                best = (key, h2, hp2, mv)
    if best is None or best[0][0] >= current:
        return None
    return best[1:]


def best_plan(
    g: Network,
    p: GameParams,
    actor: int,
    rule: DynamicRule,
    payments: Optional[PaymentMatrix] = None,
    seed=0,
) -> Optional[tuple[ExtCost, list[Move]]]:
    """The single plan a ``2a`` actor would execute next, with its resulting cost; None if nothing improves."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    pay = (payments or PaymentMatrix()) if p.transfers else None
    plan = _best_plan(g, p, actor, pay, rule, rng)
    if plan is None:
        return None
    h, hp, moves = plan
    return _cost(h, p, hp, actor), moves


def play_turn(
    g: Network,
    p: GameParams,
    actor: int,
    rule: DynamicRule,
    payments: Optional[PaymentMatrix] = None,
    rng: Optional[random.Random] = None,
) -> tuple[Network, Optional[PaymentMatrix], list[Move]]:
    """Run the actor's whole turn; returns the new network, payments and moves made."""
    if actor not in g:
        raise KeyError(f"unknown node {actor!r}")
    rng = rng or random.Random(0)
    pay = payments if p.transfers else None
    if p.transfers and pay is None:
        pay = PaymentMatrix()
    moves: list[Move] = []
    while True:
        if rule.variant == RULE_2B:
            step = _single_move(g, p, actor, pay, rng)
            if step is None:
                break
            g, pay, m = _apply(g, p, pay, actor, step[0], step[1], step[2])
            moves.append(m)
        else:
            plan = _best_plan(g, p, actor, pay, rule, rng)
            if plan is None:
                break
            g, pay, mv = plan
            moves += mv
    return g, pay, moves


def best_turn(
    g: Network,
    p: GameParams,
    actor: int,
    rule: DynamicRule,
    payments: Optional[PaymentMatrix] = None,
    seed=0,
) -> list[Move]:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return play_turn(g, p, actor, rule, payments, rng)[2]


# ---------------------------------------------------------------------------
# simulation


@dataclass
class SimulationResult:
    network: Network
    logs: list[TurnLog]
    converged: bool
    payments: Optional[PaymentMatrix] = None
    last_change_turn: int = -1
    last_arrival_turn: int = -1
    turns: int = 0
    arrival_count: int = 0

    def __iter__(self):
        return iter((self.network, self.logs, self.converged))

    @property
    def rounds_after_arrivals(self) -> float:
        """Full rounds between the last arrival and the last change."""
        n = len(self.network)
        if self.last_change_turn <= self.last_arrival_turn:
            return 0.0
        return (self.last_change_turn - self.last_arrival_turn) / n


class _Picker:
    def __init__(self, s: Schedule) -> None:
        self.s = s
        self.rng = random.Random(s.seed)
        self.last: Optional[int] = None
        self.k = 0

    def next(self, present: Sequence[int]) -> Optional[int]:
        if not present:
            return None
        if self.s.order == "random":
            return self.rng.choice(present)
        if self.s.order == "explicit":
            while self.k < len(self.s.explicit):
                v = self.s.explicit[self.k]
                self.k += 1
                if v in present:
                    return v
            return None
        later = [v for v in present if self.last is None or v > self.last]
        v = later[0] if later else present[0]
        self.last = v
        return v


def simulate(
    p: GameParams,
    schedule: Schedule,
    rule: DynamicRule,
    max_rounds: Optional[int] = None,
    seed: Optional[int] = None,
    *,
    initial: Optional[Network] = None,
    payments: Optional[PaymentMatrix] = None,
) -> SimulationResult:
    """Play turns until every present player passes in a row with nothing left to arrive."""
    g = initial if initial is not None else Network((), (), frozenset())
    for _, v, _ in schedule.arrivals:
        if v in g:
            raise ValueError(f"node {v} arrives but is already present")
    pay = (payments.copy() if payments is not None else PaymentMatrix()) if p.transfers else None
    rng = random.Random(schedule.seed if seed is None else seed)
    picker = _Picker(schedule)
    total = len(g) + len(schedule.arrivals)
    if max_rounds is None:
        max_rounds = 50 * max(total, 1)
    limit = max_rounds * max(total, 1)

    pending = list(schedule.arrivals)
    queue: list[int] = []
    quiet: set[int] = set()
    logs: list[TurnLog] = []
    res = SimulationResult(g, logs, False, pay)
    turn = 0
    while turn < limit:
        while pending and pending[0][0] <= turn:
            _, v, kind = pending.pop(0)
            g = g.add_node(v, kind)
            queue.append(v)
            quiet.discard(v)
        arrival = bool(queue)
        if arrival:
            actor = queue.pop(0)
            res.last_arrival_turn = turn
            res.arrival_count += 1
        else:
            present = list(g.nodes)
            if not pending and present and quiet >= set(present):
                res.converged = True
                break
            actor = picker.next(present)
            if actor is None:
                if pending:
                    turn = pending[0][0]
                    continue
                break
        g, pay, moves = play_turn(g, p, actor, rule, pay, rng)
        logs.append(TurnLog(turn, actor, tuple(moves), network_hash(g), arrival))
        if moves:
            quiet = {actor}
            res.last_change_turn = turn
        else:
            quiet.add(actor)
        turn += 1
    if not res.converged and not pending and not queue and quiet >= set(g.nodes):
        res.converged = True
    res.network, res.payments, res.turns = g, pay, turn
    return res


def replay(initial: Network, schedule: Schedule, logs: Iterable[TurnLog]) -> Iterator[tuple[TurnLog, Network, str]]:
    """Re-apply logged moves; yields each record with the rebuilt network and its hash."""
    g = initial
    kinds = {v: k for _, v, k in schedule.arrivals}
    for rec in logs:
        if rec.actor not in g:
            g = g.add_node(rec.actor, kinds[rec.actor])
        for m in rec.moves:
            g = g.add_edge(*m.edge) if m.kind == "add" else g.remove_edge(*m.edge)
        yield rec, g, network_hash(g)


# ---------------------------------------------------------------------------
# entangled growth


@dataclass
class GrowthResult:
    network: Network
    chain: list[int]
    anchors: tuple[int, int]
    links: dict[int, list[int]]
    payments: PaymentMatrix
    length_bound: float
    bound_respected: bool


def length_bound(p: GameParams, n_major: int) -> float:
    a = float(p.A) * n_major
    return 2 * math.sqrt(a * a + 5 * float(p.A)) - 2 * a


def growth_anchors(g: Network, p: GameParams) -> tuple[int, int]:
    """The two players with the largest distance cost, highest first."""
    ranked = sorted(g.nodes, key=lambda v: (distance_cost(g, p, v), -v), reverse=True)
    if len(ranked) < 2:
        raise PreconditionError("need at least two players")
    return ranked[0], ranked[1]


def entangled_growth(
    p: GameParams,
    existing: Network,
    arrivals: int,
    seed: int = 0,
    *,
    payments: Optional[PaymentMatrix] = None,
) -> GrowthResult:
    """Let ``arrivals`` minors join one after another, each playing its turn on arrival."""
    if not p.transfers:
        raise PreconditionError("entangled growth runs with transfers enabled")
    if len(existing.majors) < 10:
        raise PreconditionError(f"needs at least 10 majors, found {len(existing.majors)}")
    if arrivals < 0:
        raise PreconditionError("arrivals must be non-negative")
    top, second = growth_anchors(existing, p)
    if not existing.has_edge(top, second):
        raise PreconditionError(
            f"the two highest distance-cost players {top} and {second} are not adjacent"
        )
    rng = random.Random(seed)
    rule = DynamicRule(RULE_2B)
    g, pay = existing, (payments.copy() if payments is not None else PaymentMatrix())
    chain: list[int] = []
    links: dict[int, list[int]] = {}
    nxt = max(existing.nodes) + 1
    for k in range(arrivals):
        v = nxt + k
        g = g.add_node(v, PlayerType.MINOR)
        g, pay, moves = play_turn(g, p, v, rule, pay, rng)
        chain.append(v)
        links[v] = [m.edge[0] if m.edge[1] == v else m.edge[1] for m in moves if m.kind == "add"]
    bound = length_bound(p, len(existing.majors))
    return GrowthResult(g, chain, (top, second), links, pay, bound, len(chain) <= bound)
