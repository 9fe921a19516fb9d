"""Snapshot parsing, player classification, run configuration and report output."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

from . import __version__
from .cost import GameParams
from .dynamics import DynamicRule, Schedule
from .network import Network, PlayerType

TYPE_TAG = "#@"


class InputError(ValueError):
    """Malformed or inconsistent user input."""


@dataclass
class Snapshot:
    """A parsed topology; ``network`` uses ids ``0..n-1`` and ``original[k]`` is node k's file id."""

    label: str
    network: Network
    source_path: str
    original: tuple[int, ...]
    self_loops: int = 0
    duplicates: int = 0

    def __post_init__(self) -> None:
        self._lookup = {v: k for k, v in enumerate(self.original)}

    def internal(self, original_id: int) -> int:
        return self._lookup[original_id]

    def has(self, original_id: int) -> bool:
        return original_id in self._lookup

    def external(self, node: int) -> int:
        return self.original[node]

    def external_edges(self) -> list[tuple[int, int]]:
        out = []
        for u, v in self.network.edges:
            a, b = self.original[u], self.original[v]
            out.append((a, b) if a < b else (b, a))
        return sorted(out)


def _int_token(tok: str, path, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise InputError(f"{path}:{lineno}: node id {tok!r} is not an integer") from None


def snapshot_label(path) -> str:
    return Path(path).name.split(".")[0]


def parse_edge_list(path, label: Optional[str] = None) -> Snapshot:
    """Read ``u v`` or ``u|v|rel[|...]`` lines; ``#`` starts a comment.

    Self-loops are dropped and counted, repeated edges are collapsed.
    ``#@ A <id>`` lines carry player types written by :func:`write_edge_list`.
    """
    path = str(path)
    edges: set[tuple[int, int]] = set()
    nodes: set[int] = set()
    tags: dict[int, PlayerType] = {}
    loops = dups = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if line.startswith(TYPE_TAG):
                parts = line[len(TYPE_TAG):].split()
                if len(parts) != 2:
                    raise InputError(f"{path}:{lineno}: bad type line {raw.rstrip()!r}")
                try:
                    kind = PlayerType.parse(parts[0])
                except ValueError as exc:
                    raise InputError(f"{path}:{lineno}: {exc}") from None
                tags[_int_token(parts[1], path, lineno)] = kind
                continue
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("|") if "|" in line else line.split()
            if "|" in line:
                if len(parts) < 2:
                    raise InputError(f"{path}:{lineno}: expected 'u|v|rel', got {raw.rstrip()!r}")
            elif len(parts) != 2:
                raise InputError(f"{path}:{lineno}: expected 'u v', got {raw.rstrip()!r}")
            u = _int_token(parts[0].strip(), path, lineno)
            v = _int_token(parts[1].strip(), path, lineno)
            if u == v:
                loops += 1
                nodes.add(u)
                continue
            e = (u, v) if u < v else (v, u)
            if e in edges:
                dups += 1
            edges.add(e)
            nodes.update(e)
    nodes.update(tags)
    if not edges and not nodes:
        raise InputError(f"{path}: no edges found")
    original = tuple(sorted(nodes))
    pos = {v: k for k, v in enumerate(original)}
    types = {pos[v]: tags.get(v, PlayerType.MINOR) for v in original}
    g = Network.build(types, ((pos[u], pos[v]) for u, v in edges))
    return Snapshot(label or snapshot_label(path), g, path, original, loops, dups)


def write_edge_list(s: Snapshot, path, *, with_types: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {s.label}\n")
        if with_types:
            for k, v in enumerate(s.original):
                fh.write(f"{TYPE_TAG} {s.network.types[k].value} {v}\n")
        for u, v in s.external_edges():
            fh.write(f"{u} {v}\n")


def read_ranking(path) -> list[int]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if len(line.split()) != 1:
                raise InputError(f"{path}:{lineno}: expected one id per line")
            out.append(_int_token(line, path, lineno))
    return out


@dataclass
class Classification:
    snapshot: Snapshot
    majors: list[int]
    ranked_absent: int
    warnings: list[str] = field(default_factory=list)

    @property
    def network(self) -> Network:
        return self.snapshot.network


def classify_players(s: Snapshot, ranking_path, top_k: int) -> Classification:
    """The first ``top_k`` ranked ids present in the snapshot become majors; everyone else is a minor."""
    if top_k < 1:
        raise InputError("top_k must be at least 1")
    ranking = read_ranking(ranking_path)
    warnings = []
    if top_k > len(ranking):
        warnings.append(f"top_k={top_k} exceeds the {len(ranking)} ranked ids; all ranked ids considered")
    head = ranking[:top_k]
    majors = [v for v in head if s.has(v)]
    absent = len(head) - len(majors)
    if not majors:
        raise InputError(f"none of the top {len(head)} ranked ids occur in {s.source_path}; check the id space")
    chosen = {s.internal(v) for v in majors}
    types = {k: (PlayerType.MAJOR if k in chosen else PlayerType.MINOR) for k in s.network.nodes}
    g = Network.build(types, s.network.edges)
    typed = Snapshot(s.label, g, s.source_path, s.original, s.self_loops, s.duplicates)
    return Classification(typed, majors, absent, warnings)


def snapshot_paths(path) -> list[Path]:
    """A single file, or every regular file of a directory in name order."""
    p = Path(path)
    if p.is_dir():
        files = sorted(f for f in p.iterdir() if f.is_file() and not f.name.startswith("."))
        if not files:
            raise InputError(f"{path}: directory holds no snapshots")
        return files
    if not p.exists():
        raise InputError(f"{path}: no such file")
    return [p]


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    params: GameParams
    schedule: Optional[Schedule] = None
    rule: Optional[DynamicRule] = None
    seeds: list[int] = field(default_factory=lambda: [0])
    budgets: dict[str, int] = field(default_factory=dict)
    max_rounds: Optional[int] = None

    KEYS = ("params", "schedule", "rule", "seeds", "budgets", "max_rounds")
    BUDGET_KEYS = ("enumeration", "exact_nodes")

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "schedule": None if self.schedule is None else self.schedule.to_json(),
            "rule": None if self.rule is None else self.rule.to_json(),
            "seeds": list(self.seeds),
            "budgets": dict(sorted(self.budgets.items())),
            "max_rounds": self.max_rounds,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RunConfig":
        if not isinstance(data, Mapping):
            raise InputError("configuration must be a JSON object")
        unknown = set(data) - set(cls.KEYS)
        if unknown:
            raise InputError(f"unknown configuration keys: {sorted(unknown)}")
        if "params" not in data:
            raise InputError("configuration needs 'params'")
        budgets = dict(data.get("budgets") or {})
        bad = set(budgets) - set(cls.BUDGET_KEYS)
        if bad:
            raise InputError(f"unknown budget keys: {sorted(bad)}")
        try:
            params = GameParams.from_json(data["params"])
            schedule = Schedule.from_json(data["schedule"]) if data.get("schedule") else None
            rule = DynamicRule.from_json(data["rule"]) if data.get("rule") else None
        except (TypeError, KeyError, ValueError) as exc:
            raise InputError(str(exc)) from None
        if "exact_nodes" in budgets:
            params = params.with_(exact_budget=int(budgets["exact_nodes"]))
        seeds = [int(s) for s in data.get("seeds", [0])]
        mr = data.get("max_rounds")
        return cls(params, schedule, rule, seeds, {k: int(v) for k, v in budgets.items()}, None if mr is None else int(mr))


def load_json_arg(text: str) -> Any:
    """Parse ``text`` as inline JSON, or as the path of a JSON file."""
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None


def load_config(path) -> RunConfig:
    return RunConfig.from_json(load_json_arg(str(path)))


# ---------------------------------------------------------------------------
# reports


def make_report(command: str, config: Mapping, results: Any) -> dict:
    meta = {
        "tool": "relnet",
        "version": __version__,
        "command": command,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    return {"meta": meta, "config": config, "results": results}


def dumps_report(report: Mapping) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def strip_meta(report: Mapping) -> dict:
    """The report without its volatile metadata, for comparisons."""
    return {k: v for k, v in report.items() if k != "meta"}


def write_csv(rows: Iterable[Mapping], fields: list[str], fh) -> None:
    w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
