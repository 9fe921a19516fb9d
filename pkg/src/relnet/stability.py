"""Pairwise stability, exhaustive enumeration and the price metrics."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

import networkx as nx

from .cost import ZERO, ExtCost, GameParams, player_cost, social_cost
from .network import Network, PlayerType

DEFAULT_ENUM_BUDGET = 7

REMOVAL = "BeneficialRemoval"
ADDITION = "BeneficialAddition"


class EnumerationBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str
    edge: tuple[int, int]
    delta_i: ExtCost
    delta_j: ExtCost

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "edge": list(self.edge),
            "delta_i": self.delta_i.to_json(),
            "delta_j": self.delta_j.to_json(),
        }


@dataclass
class StabilityReport:
    stable: bool
    violations: list[Violation] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"stable": self.stable, "violations": [v.to_json() for v in self.violations]}


def _toggle_deltas(g: Network, p: GameParams, u: int, v: int, bare: bool):
    other = g.remove_edge(u, v) if g.has_edge(u, v) else g.add_edge(u, v)
    du = player_cost(other, p, u, bare) - player_cost(g, p, u, bare)
    dv = player_cost(other, p, v, bare) - player_cost(g, p, v, bare)
    return du, dv


def removal_violates(du: ExtCost, dv: ExtCost, transfers: bool) -> bool:
    # an edge survives only if dropping it strictly hurts (each endpoint, or the pair jointly)
    if transfers:
        return (du + dv) <= ZERO
    return du <= ZERO or dv <= ZERO


def addition_violates(du: ExtCost, dv: ExtCost, transfers: bool) -> bool:
    if transfers:
        return (du + dv) < ZERO
    return du < ZERO and dv < ZERO


def is_pairwise_stable(
    g: Network,
    p: GameParams,
    *,
    bare: bool = False,
    transfers: Optional[bool] = None,
    first_only: bool = False,
) -> StabilityReport:
    """Check every present edge for a beneficial removal and every absent one for a beneficial addition."""
    transfers = p.transfers if transfers is None else transfers
    violations: list[Violation] = []
    for u, v in combinations(g.nodes, 2):
        present = g.has_edge(u, v)
        du, dv = _toggle_deltas(g, p, u, v, bare)
        if present and removal_violates(du, dv, transfers):
            violations.append(Violation(REMOVAL, (u, v), du, dv))
        elif not present and addition_violates(du, dv, transfers):
            violations.append(Violation(ADDITION, (u, v), du, dv))
        if violations and first_only:
            break
    return StabilityReport(not violations, violations)


# ---------------------------------------------------------------------------
# exhaustive enumeration


@dataclass(frozen=True)
class ScoredNetwork:
    index: int
    network: Network
    social: ExtCost


def _players(n_A: int, n_B: int) -> Network:
    return Network.from_counts(n_A, n_B)


def _graph(base: Network, pairs, index: int) -> Network:
    return base.with_edges(pairs[k] for k in range(len(pairs)) if (index >> k) & 1)


def _check_budget(n_A: int, n_B: int, budget: int) -> None:
    if n_A < 0 or n_B < 0:
        raise ValueError("player counts must be non-negative")
    if n_A + n_B > budget:
        raise EnumerationBudgetExceeded(
            f"{n_A + n_B} players means 2^{(n_A + n_B) * (n_A + n_B - 1) // 2} labelled graphs; "
            f"the enumeration budget is {budget} players"
        )


def _scan(args) -> list[ScoredNetwork]:
    p, n_A, n_B, bare, lo, hi, want = args
    base = _players(n_A, n_B)
    pairs = list(combinations(base.nodes, 2))
    out = []
    for idx in range(lo, hi):
        g = _graph(base, pairs, idx)
        if want == "stable":
            if not is_pairwise_stable(g, p, bare=bare, first_only=True).stable:
                continue
        out.append(ScoredNetwork(idx, g, social_cost(g, p, bare)))
    return out


def _run_scan(p, n_A, n_B, bare, want, workers) -> list[ScoredNetwork]:
    n = n_A + n_B
    total = 1 << (n * (n - 1) // 2)
    if workers <= 1 or total < 4096:
        return _scan((p, n_A, n_B, bare, 0, total, want))
    step = -(-total // (workers * 4))
    chunks = [(p, n_A, n_B, bare, lo, min(lo + step, total), want) for lo in range(0, total, step)]
    with ProcessPoolExecutor(workers) as ex:
        parts = list(ex.map(_scan, chunks))
    return [s for part in parts for s in part]


def _dedupe(items: list[ScoredNetwork]) -> list[ScoredNetwork]:
    kept: list[tuple[ScoredNetwork, nx.Graph]] = []
    for s in items:
        h = nx.Graph()
        h.add_nodes_from((v, {"t": t}) for v, t in zip(s.network.nodes, s.network.types))
        h.add_edges_from(s.network.edges)
        if not any(
            k.social == s.social and nx.is_isomorphic(h, kg, node_match=lambda a, b: a["t"] == b["t"])
            for k, kg in kept
        ):
            kept.append((s, h))
    return [k for k, _ in kept]


def enumerate_stable(
    p: GameParams,
    n_A: int,
    n_B: int,
    bare: bool = False,
    *,
    budget: int = DEFAULT_ENUM_BUDGET,
    dedupe: bool = False,
    workers: int = 1,
) -> list[ScoredNetwork]:
    """All pairwise-stable labelled graphs on the given players, in index order."""
    _check_budget(n_A, n_B, budget)
    found = _run_scan(p, n_A, n_B, bare, "stable", workers)
    return _dedupe(found) if dedupe else found


def optimal_network(
    p: GameParams,
    n_A: int,
    n_B: int,
    bare: bool = False,
    *,
    budget: int = DEFAULT_ENUM_BUDGET,
    workers: int = 1,
) -> tuple[Network, ExtCost]:
    """A social-cost minimiser over every labelled graph (lowest index on ties)."""
    _check_budget(n_A, n_B, budget)
    best = min(_run_scan(p, n_A, n_B, bare, "all", workers), key=lambda s: (s.social, s.index))
    return best.network, best.social


# ---------------------------------------------------------------------------
# price metrics


def ext_ratio(num: ExtCost, den: ExtCost):
    """Ratio of extended costs: ``inf`` for unbounded over bounded, ``None`` if undefined."""
    if den.q > 0:
        return Fraction(0) if num.q == 0 else None
    if num.q > 0:
        return math.inf
    if den.finite == 0:
        return None if num.finite == 0 else math.inf
    return num.finite / den.finite


def _ratio_json(r):
    if r is None:
        return None
    if r == math.inf:
        return "inf"
    return {"exact": str(r), "approx": float(r)}


@dataclass
class PriceMetrics:
    optimal_social: ExtCost
    best_stable_social: Optional[ExtCost]
    worst_stable_social: Optional[ExtCost]
    pos: object
    poa: object
    por: object
    stable_count: int
    bare_stable_count: int
    witnesses: dict[str, Network] = field(default_factory=dict)
    precondition_warning: bool = False

    @property
    def empty_stable_set(self) -> bool:
        return self.stable_count == 0

    def to_json(self) -> dict:
        def cost(c):
            return None if c is None else c.to_json()

        return {
            "optimal_social": cost(self.optimal_social),
            "best_stable_social": cost(self.best_stable_social),
            "worst_stable_social": cost(self.worst_stable_social),
            "pos": _ratio_json(self.pos),
            "poa": _ratio_json(self.poa),
            "por": _ratio_json(self.por),
            "stable_count": self.stable_count,
            "bare_stable_count": self.bare_stable_count,
            "empty_stable_set": self.empty_stable_set,
            "precondition_warning": self.precondition_warning,
            "witnesses": {k: g.to_dict() for k, g in self.witnesses.items()},
        }


def price_metrics(
    p: GameParams,
    n_A: int,
    n_B: int,
    *,
    budget: int = DEFAULT_ENUM_BUDGET,
    workers: int = 1,
) -> PriceMetrics:
    """PoS and PoA against the optimum; PoR as best reliable stable over best bare stable."""
    _check_budget(n_A, n_B, budget)
    everything = _run_scan(p, n_A, n_B, False, "all", workers)
    opt = min(everything, key=lambda s: (s.social, s.index))
    stable = enumerate_stable(p, n_A, n_B, budget=budget, workers=workers)
    bare_stable = enumerate_stable(p, n_A, n_B, bare=True, budget=budget, workers=workers)
    witnesses = {"optimal": opt.network}
    best = worst = None
    if stable:
        b = min(stable, key=lambda s: (s.social, s.index))
        w = max(stable, key=lambda s: (s.social, -s.index))
        best, worst = b.social, w.social
        witnesses["best_stable"] = b.network
        witnesses["worst_stable"] = w.network
    por = None
    if bare_stable:
        bb = min(bare_stable, key=lambda s: (s.social, s.index))
        witnesses["best_bare_stable"] = bb.network
        if best is not None:
            por = ext_ratio(best, bb.social)
    return PriceMetrics(
        optimal_social=opt.social,
        best_stable_social=best,
        worst_stable_social=worst,
        pos=None if best is None else ext_ratio(best, opt.social),
        poa=None if worst is None else ext_ratio(worst, opt.social),
        por=por,
        stable_count=len(stable),
        bare_stable_count=len(bare_stable),
        witnesses=witnesses,
        precondition_warning=(n_A + n_B) < 3,
    )


def full_bipartite_network(n_A: int, n_B: int) -> Network:
    """Major clique with every minor linked to every major."""
    g = Network.from_counts(n_A, n_B)
    edges = list(combinations(range(n_A), 2))
    edges += [(a, n_A + b) for a in range(n_A) for b in range(n_B)]
    return g.with_edges(edges)


def two_hub_network(n_A: int, n_B: int, hubs: tuple[int, int] = (0, 1)) -> Network:
    """Major clique with every minor linked to the same two majors."""
    g = Network.from_counts(n_A, n_B)
    edges = list(combinations(range(n_A), 2))
    edges += [(h, n_A + b) for h in hubs for b in range(n_B)]
    return g.with_edges(edges)


def single_hub_network(n_A: int, n_B: int, hub: int = 0) -> Network:
    """Major clique with every minor hanging off one major."""
    g = Network.from_counts(n_A, n_B)
    edges = list(combinations(range(n_A), 2)) + [(hub, n_A + b) for b in range(n_B)]
    return g.with_edges(edges)


def is_major(g: Network, v: int) -> bool:
    return g.type_of(v) is PlayerType.MAJOR
