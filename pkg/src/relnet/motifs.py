"""Motif counts, configuration-model nulls and topology summaries."""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

import networkx as nx

from .network import Network, PlayerType, _bits
from .paths import Q, DisjointMode, Objective, count_disjoint_paths_to_set, pair_row

DEFAULT_SAMPLES = 100
SUPPORTED_CYCLE_LENGTHS = (3, 4)


@dataclass(frozen=True)
class MotifKind:
    """``double_star`` with parameter m, or ``entangled_cycle`` with length l."""

    name: str
    size: int

    def __post_init__(self) -> None:
        if self.name == "double_star":
            if self.size < 1:
                raise ValueError("double-star m must be at least 1")
        elif self.name == "entangled_cycle":
            if self.size < 3:
                raise ValueError("entangled-cycle length must be at least 3")
        else:
            raise ValueError(f"unknown motif {self.name!r}")

    @classmethod
    def double_star(cls, m: int) -> "MotifKind":
        return cls("double_star", m)

    @classmethod
    def entangled_cycle(cls, l: int) -> "MotifKind":
        return cls("entangled_cycle", l)

    @classmethod
    def parse(cls, text: str) -> "MotifKind":
        name, _, arg = text.partition(":")
        name = name.strip().replace("-", "_")
        if name in ("double_star", "ds"):
            return cls.double_star(int(arg or 2))
        if name in ("entangled_cycle", "ec", "cycle"):
            return cls.entangled_cycle(int(arg or 3))
        raise ValueError(f"unknown motif {text!r}")

    def count(self, g: Network) -> int:
        if self.name == "double_star":
            return double_star_count(g, self.size)
        return entangled_cycle_count(g, self.size)

    def __str__(self) -> str:
        return f"{self.name}:{self.size}"


def double_star_count(g: Network, m: int) -> int:
    """Adjacent pairs whose degrees both exceed ``m`` and that share at least ``m`` neighbours."""
    if m < 1:
        raise ValueError("m must be at least 1")
    adj = g.adj
    total = 0
    for a, b in g.edges:
        u, v = g.index[a], g.index[b]
        if adj[u].bit_count() > m and adj[v].bit_count() > m:
            if (adj[u] & adj[v]).bit_count() >= m:
                total += 1
    return total


def entangled_cycle_count(g: Network, l: int) -> int:
    """Copies of the square of a path on ``l`` nodes (not necessarily induced).

    Length 3 is the triangle; length 4 is the diamond, counted once per
    central edge and pair of common neighbours.
    """
    if l not in SUPPORTED_CYCLE_LENGTHS:
        raise NotImplementedError(f"entangled-cycle length {l} is not supported; use one of {SUPPORTED_CYCLE_LENGTHS}")
    adj = g.adj
    if l == 3:
        tri = 0
        for a, b in g.edges:
            u, v = g.index[a], g.index[b]
            tri += (adj[u] & adj[v]).bit_count()
        return tri // 3
    total = 0
    for a, b in g.edges:
        c = (adj[g.index[a]] & adj[g.index[b]]).bit_count()
        total += c * (c - 1) // 2
    return total


# ---------------------------------------------------------------------------
# configuration model


@dataclass(frozen=True)
class ErasureReport:
    stubs: int
    multigraph_edges: int
    self_loops: int
    parallel: int
    kept_edges: int

    @property
    def erased_fraction(self) -> float:
        return 0.0 if not self.multigraph_edges else 1 - self.kept_edges / self.multigraph_edges


def configuration_model_sample(
    degrees: Sequence[int],
    seed: int,
    *,
    ids: Optional[Sequence[int]] = None,
    types: Optional[Sequence[PlayerType]] = None,
    report: bool = False,
):
    """Uniform stub matching, then erasure of self-loops and repeated edges.

    Node ``k`` gets ``degrees[k]`` stubs (or ``ids[k]`` as its id). With
    ``report=True`` an :class:`ErasureReport` is returned alongside.
    """
    degrees = [int(d) for d in degrees]
    if any(d < 0 for d in degrees):
        raise ValueError("degrees must be non-negative")
    if sum(degrees) % 2:
        raise ValueError("degree sum must be even")
    ids = list(range(len(degrees))) if ids is None else list(ids)
    types = [PlayerType.MINOR] * len(degrees) if types is None else list(types)
    multi = nx.configuration_model(degrees, seed=seed)
    edges = set()
    loops = 0
    for u, v in multi.edges():
        if u == v:
            loops += 1
        else:
            edges.add((ids[u], ids[v]) if ids[u] < ids[v] else (ids[v], ids[u]))
    m = multi.number_of_edges()
    g = Network.build(dict(zip(ids, types)), edges)
    if not report:
        return g
    rep = ErasureReport(sum(degrees), m, loops, m - loops - len(edges), len(edges))
    return g, rep


def chebyshev_p_bound(observed, mean, std) -> Optional[Fraction]:
    """std^2 / (observed - mean)^2 capped at 1; None when observed does not exceed mean."""
    observed, mean, std = (Fraction(str(x)) if isinstance(x, float) else Fraction(x) for x in (observed, mean, std))
    return _bound_from_var(observed, mean, std * std)


def _bound_from_var(observed: Fraction, mean: Fraction, var: Fraction) -> Optional[Fraction]:
    if observed <= mean:
        return None
    return min(Fraction(1), var / (observed - mean) ** 2)


@dataclass(frozen=True)
class MotifReport:
    kind: str
    observed: int
    null_mean: Fraction
    null_var: Fraction
    samples: int
    p_bound: Optional[Fraction]
    erased_fraction: float = 0.0

    @property
    def null_std(self) -> float:
        return math.sqrt(self.null_var)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "observed": self.observed,
            "null_mean": float(self.null_mean),
            "null_std": self.null_std,
            "samples": self.samples,
            "p_bound": None if self.p_bound is None else float(self.p_bound),
            "p_bound_exact": None if self.p_bound is None else str(self.p_bound),
            "mean_erased_fraction": self.erased_fraction,
        }


def _null_count(args) -> tuple[int, float]:
    degrees, ids, kind, seed = args
    g, rep = configuration_model_sample(degrees, seed, ids=ids, report=True)
    return kind.count(g), rep.erased_fraction


def sample_seeds(seed: int, n: int) -> list[int]:
    rng = random.Random(seed)
    return [rng.getrandbits(32) for _ in range(n)]


def null_model_stats(
    g: Network,
    kind: MotifKind,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    *,
    workers: int = 1,
) -> MotifReport:
    """Observed motif count against configuration-model draws with the same degrees."""
    if samples < 2:
        raise ValueError("need at least two null samples")
    degrees = [g.degree(v) for v in g.nodes]
    jobs = [(degrees, list(g.nodes), kind, s) for s in sample_seeds(seed, samples)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_null_count, jobs, chunksize=max(1, samples // (4 * workers))))
    else:
        results = [_null_count(j) for j in jobs]
    counts = [c for c, _ in results]
    mean = Fraction(sum(counts), samples)
    var = sum((c - mean) ** 2 for c in counts) / (samples - 1)
    observed = kind.count(g)
    return MotifReport(
        str(kind),
        observed,
        mean,
        var,
        samples,
        _bound_from_var(Fraction(observed), mean, var),
        sum(e for _, e in results) / samples,
    )


# ---------------------------------------------------------------------------
# topology metrics


def core_disjoint_ratio(
    g: Network,
    core: Iterable[int],
    mode: DisjointMode = DisjointMode.NODE,
) -> Fraction:
    """Mean number of disjoint paths into the core over the mean degree, both over non-core nodes."""
    core = frozenset(core)
    if not core:
        raise ValueError("core must be non-empty")
    rest = [v for v in g.nodes if v not in core]
    if not rest:
        raise ValueError("every node is in the core")
    paths = sum(count_disjoint_paths_to_set(g, v, core, mode) for v in rest)
    degree = sum(g.degree(v) for v in rest)
    if degree == 0:
        raise ValueError("non-core nodes have no links")
    return Fraction(paths, degree)


@dataclass(frozen=True)
class CycleStats:
    mean: Optional[Fraction]
    pairs: int
    excluded: int

    @property
    def excluded_fraction(self) -> float:
        return self.excluded / self.pairs if self.pairs else 0.0

    def to_json(self) -> dict:
        return {
            "mean": None if self.mean is None else float(self.mean),
            "mean_exact": None if self.mean is None else str(self.mean),
            "pairs": self.pairs,
            "excluded": self.excluded,
            "excluded_fraction": self.excluded_fraction,
        }


def mean_major_minor_cycle(
    g: Network,
    majors: Optional[Iterable[int]] = None,
    minors: Optional[Iterable[int]] = None,
    sample: Optional[int] = None,
    seed: int = 0,
) -> CycleStats:
    """Mean shortest cycle through a major and a minor (min-sum d + d'), over all or sampled pairs."""
    majors = sorted(g.majors if majors is None else majors)
    minors = sorted(g.minors if minors is None else minors)
    if not majors or not minors:
        raise ValueError("need at least one major and one minor")
    total = len(majors) * len(minors)
    if sample is not None and sample < total:
        picks = sorted(random.Random(seed).sample(range(total), sample))
    else:
        picks = range(total)
    by_major: dict[int, list[int]] = {}
    for k in picks:
        by_major.setdefault(majors[k // len(minors)], []).append(minors[k % len(minors)])
    acc = 0
    used = excluded = 0
    for a, targets in by_major.items():
        row = pair_row(g, a, DisjointMode.NODE, Objective.min_sum())
        for b in targets:
            d, dp = row[g.index[b]]
            if dp == Q:
                excluded += 1
            else:
                acc += d + dp
                used += 1
    mean = Fraction(acc, used) if used else None
    return CycleStats(mean, used + excluded, excluded)
