"""Command-line entry point: ``relnet <command> ...``."""

from __future__ import annotations

import argparse
import io as _io
import json
import os
import sys
from typing import Optional

from .cost import GameParams, node_cost, social_cost
from .dynamics import DynamicRule, Schedule, simulate, write_jsonl
from .io import (
    InputError,
    RunConfig,
    classify_players,
    dumps_report,
    load_config,
    load_json_arg,
    make_report,
    parse_edge_list,
    snapshot_paths,
    write_csv,
)
from .motifs import MotifKind, core_disjoint_ratio, mean_major_minor_cycle, null_model_stats
from .network import Network
from .paths import BudgetExceeded, DisjointMode
from .stability import (
    DEFAULT_ENUM_BUDGET,
    EnumerationBudgetExceeded,
    enumerate_stable,
    is_pairwise_stable,
    price_metrics,
)
from .structure import classify_structure

SEED_ENV = "RELNET_SEED"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _params(text: Optional[str]) -> GameParams:
    if text is None:
        raise InputError("--params is required")
    try:
        return GameParams.from_json(load_json_arg(text))
    except (TypeError, KeyError, ValueError) as exc:
        raise InputError(f"bad parameters: {exc}") from None


class _Loaded:
    def __init__(self, network: Network, label: str, ids=None, info=None) -> None:
        self.network = network
        self.label = label
        self.ids = ids
        self.info = info or {}

    def ext(self, v: int) -> int:
        return v if self.ids is None else self.ids[v]


def _load_one(path, args) -> _Loaded:
    path = str(path)
    if path.endswith(".json"):
        try:
            g = Network.from_dict(load_json_arg(path))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: bad network JSON: {exc}") from None
        return _Loaded(g, os.path.basename(path).split(".")[0])
    snap = parse_edge_list(path)
    info = {"self_loops_dropped": snap.self_loops, "duplicate_edges": snap.duplicates}
    if getattr(args, "ranking", None):
        cls = classify_players(snap, args.ranking, args.top_k)
        snap = cls.snapshot
        info.update(ranked_absent=cls.ranked_absent, warnings=cls.warnings, majors=len(cls.majors))
        for w in cls.warnings:
            print(f"warning: {w}", file=sys.stderr)
    return _Loaded(snap.network, snap.label, snap.original, info)


def _load_many(args) -> list[_Loaded]:
    return [_load_one(p, args) for p in snapshot_paths(args.network)]


def _emit(args, report: dict, csv_rows=None, csv_fields=None) -> None:
    text = dumps_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if getattr(args, "csv", None) and csv_rows is not None:
        with open(args.csv, "w", encoding="utf-8") as fh:
            write_csv(csv_rows, csv_fields, fh)


# ---------------------------------------------------------------------------
# commands


def cmd_cost(args) -> int:
    p = _params(args.params)
    src = _load_one(args.network, args)
    g = src.network
    nodes = [args.node] if args.node is not None else list(g.nodes)
    rows = []
    for v in nodes:
        internal = v
        if src.ids is not None and args.node is not None:
            if v not in src.ids:
                raise InputError(f"node {v} is not in the network")
            internal = src.ids.index(v)
        c = node_cost(g, p, internal)
        rows.append({"node": src.ext(internal), "type": g.type_of(internal).value, "q": c.q, "finite": str(c.finite), "approx": float(c.finite)})
    s = social_cost(g, p)
    results = {"label": src.label, "nodes": rows, "social": s.to_json(), "input": src.info}
    _emit(args, make_report("cost", {"params": p.to_json()}, results), rows, ["node", "type", "q", "finite", "approx"])
    return EXIT_OK


def cmd_stable(args) -> int:
    p = _params(args.params)
    if args.action == "check":
        if not args.network:
            raise InputError("stable check needs --network")
        src = _load_one(args.network, args)
        rep = is_pairwise_stable(src.network, p, bare=args.bare)
        out = rep.to_json()
        for v in out["violations"]:
            v["edge"] = [src.ext(x) for x in v["edge"]]
        results = {"label": src.label, **out}
        rows = [{"kind": v["kind"], "u": v["edge"][0], "v": v["edge"][1]} for v in out["violations"]]
        _emit(args, make_report("stable check", {"params": p.to_json(), "bare": args.bare}, results), rows, ["kind", "u", "v"])
        return EXIT_OK
    if args.n_major is None or args.n_minor is None:
        raise InputError(f"stable {args.action} needs --n-major and --n-minor")
    config = {"params": p.to_json(), "n_major": args.n_major, "n_minor": args.n_minor, "budget": args.budget}
    if args.action == "enumerate":
        found = enumerate_stable(p, args.n_major, args.n_minor, bare=args.bare, budget=args.budget, dedupe=args.dedupe, workers=args.workers)
        config.update(bare=args.bare, dedupe=args.dedupe)
        items = [{"index": s.index, "social": s.social.to_json(), "edges": [list(e) for e in s.network.sorted_edges()]} for s in found]
        rows = [{"index": s.index, "q": s.social.q, "finite": str(s.social.finite), "edges": len(s.network.edges)} for s in found]
        _emit(args, make_report("stable enumerate", config, {"count": len(found), "networks": items}), rows, ["index", "q", "finite", "edges"])
        return EXIT_OK
    m = price_metrics(p, args.n_major, args.n_minor, budget=args.budget, workers=args.workers)
    if m.precondition_warning:
        print("warning: fewer than three players; price ratios are degenerate", file=sys.stderr)
    _emit(args, make_report("stable prices", config, m.to_json()))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config) if args.config else None
    if cfg is None:
        if args.params is None:
            raise InputError("simulate needs --config or --params")
        cfg = RunConfig(_params(args.params))
    elif args.params is not None:
        cfg.params = _params(args.params)
    if cfg.schedule is None:
        if args.n_major is None or args.n_minor is None:
            raise InputError("no schedule in the config; pass --n-major and --n-minor")
        cfg.schedule = Schedule.sequential(args.n_major, args.n_minor, spacing=args.spacing, order=args.order)
    if cfg.rule is None or args.rule:
        cfg.rule = DynamicRule(args.rule or "2b")
    if args.seed is not None:
        cfg.seeds = [args.seed]
    elif args.config is None:
        cfg.seeds = [_default_seed()]
    runs = []
    logs_out = _io.StringIO()
    for seed in cfg.seeds:
        sched = Schedule(cfg.schedule.arrivals, cfg.schedule.order, seed, cfg.schedule.explicit)
        res = simulate(cfg.params, sched, cfg.rule, cfg.max_rounds, seed)
        for rec in res.logs:
            line = rec.to_json()
            line["seed"] = seed
            logs_out.write(json.dumps(line, sort_keys=True) + "\n")
        st = classify_structure(res.network, cfg.params)
        runs.append({
            "seed": seed,
            "converged": res.converged,
            "turns": res.turns,
            "last_arrival_turn": res.last_arrival_turn,
            "last_change_turn": res.last_change_turn,
            "social": social_cost(res.network, cfg.params).to_json(),
            "structure": st.to_json(),
            "network": res.network.to_dict(),
        })
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write(logs_out.getvalue())
    rows = [{"seed": r["seed"], "converged": r["converged"], "turns": r["turns"], "structure": r["structure"]["variant"], "q": r["social"]["q"], "finite": r["social"]["finite"]} for r in runs]
    _emit(args, make_report("simulate", cfg.to_json(), {"runs": runs}), rows, ["seed", "converged", "turns", "structure", "q", "finite"])
    return EXIT_OK


def _motif_kinds(args) -> list[MotifKind]:
    try:
        return [MotifKind.parse(m) for m in (args.motif or ["double_star:2", "entangled_cycle:3"])]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_motifs(args) -> int:
    kinds = _motif_kinds(args)
    seed = _default_seed() if args.seed is None else args.seed
    config = {"motifs": [str(k) for k in kinds]}
    rows, results = [], []
    for src in _load_many(args):
        entry = {"label": src.label, "nodes": len(src.network), "edges": len(src.network.edges)}
        if args.action == "count":
            try:
                counts = {str(k): k.count(src.network) for k in kinds}
            except NotImplementedError as exc:
                raise InputError(str(exc)) from None
            entry["counts"] = counts
            rows += [{"label": src.label, "motif": k, "count": c} for k, c in counts.items()]
        else:
            config.update(samples=args.samples, seed=seed)
            reports = {}
            for k in kinds:
                try:
                    rep = null_model_stats(src.network, k, args.samples, seed, workers=args.workers)
                except NotImplementedError as exc:
                    raise InputError(str(exc)) from None
                reports[str(k)] = rep.to_json()
                rows.append({"label": src.label, "motif": str(k), "count": rep.observed, "null_mean": float(rep.null_mean), "null_std": rep.null_std, "p_bound": rep.to_json()["p_bound"]})
            entry["reports"] = reports
        results.append(entry)
    fields = ["label", "motif", "count"] + (["null_mean", "null_std", "p_bound"] if args.action == "null" else [])
    _emit(args, make_report(f"motifs {args.action}", config, {"snapshots": results}), rows, fields)
    return EXIT_OK


def cmd_topology(args) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    config = {"top_k": args.top_k, "ranking": bool(args.ranking)}
    rows, results = [], []
    for src in _load_many(args):
        g = src.network
        if not g.majors:
            raise InputError(f"{src.label}: no major players; pass --ranking and --top-k")
        entry = {"label": src.label, "majors": len(g.majors), "minors": len(g.minors)}
        if args.action == "cycles":
            config.update(sample=args.sample, seed=seed)
            st = mean_major_minor_cycle(g, sample=args.sample, seed=seed)
            entry.update(st.to_json())
            rows.append({"label": src.label, "mean_cycle": entry["mean"], "pairs": st.pairs, "excluded_fraction": st.excluded_fraction})
        else:
            config.update(mode=args.mode)
            r = core_disjoint_ratio(g, g.majors, DisjointMode(args.mode))
            entry.update(ratio=float(r), ratio_exact=str(r))
            rows.append({"label": src.label, "ratio": float(r)})
        results.append(entry)
    fields = ["label", "mean_cycle", "pairs", "excluded_fraction"] if args.action == "cycles" else ["label", "ratio"]
    _emit(args, make_report(f"topology {args.action}", config, {"series": results}), rows, fields)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(sp, network=True, ranking=True) -> None:
    sp.add_argument("--out", help="write the JSON report here instead of stdout")
    sp.add_argument("--csv", help="also write a flat CSV projection")
    if network:
        sp.add_argument("--network", help="network JSON, edge-list file, or directory of snapshots")
    if ranking:
        sp.add_argument("--ranking", help="ranking file, best first, one id per line")
        sp.add_argument("--top-k", type=int, default=100, dest="top_k")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relnet", description="Reliability-aware network formation game toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("cost", help="node and social cost of a network")
    _common(sp)
    sp.add_argument("--params")
    sp.add_argument("--node", type=int)
    sp.set_defaults(func=cmd_cost)

    sp = sub.add_parser("stable", help="stability check, enumeration and price metrics")
    sp.add_argument("action", choices=["check", "enumerate", "prices"])
    _common(sp)
    sp.add_argument("--params")
    sp.add_argument("--n-major", type=int, dest="n_major")
    sp.add_argument("--n-minor", type=int, dest="n_minor")
    sp.add_argument("--bare", action="store_true")
    sp.add_argument("--dedupe", action="store_true")
    sp.add_argument("--budget", type=int, default=DEFAULT_ENUM_BUDGET)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_stable)

    sp = sub.add_parser("simulate", help="run the turn-based dynamics")
    _common(sp, network=False, ranking=False)
    sp.add_argument("--config")
    sp.add_argument("--params")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--rule", choices=["2a", "2b"])
    sp.add_argument("--n-major", type=int, dest="n_major")
    sp.add_argument("--n-minor", type=int, dest="n_minor")
    sp.add_argument("--spacing", type=int, default=1)
    sp.add_argument("--order", choices=["round_robin", "random"], default="round_robin")
    sp.add_argument("--log", help="write turn logs as JSON lines")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("motifs", help="motif counts and configuration-model significance")
    sp.add_argument("action", choices=["count", "null"])
    _common(sp)
    sp.add_argument("--motif", action="append", help="double_star:M or entangled_cycle:L (repeatable)")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_motifs)

    sp = sub.add_parser("topology", help="cycle lengths and core ratios over snapshots")
    sp.add_argument("action", choices=["cycles", "core-ratio"])
    _common(sp)
    sp.add_argument("--sample", type=int)
    sp.add_argument("--samples", type=int, dest="sample")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--mode", choices=["node", "link"], default="node")
    sp.set_defaults(func=cmd_topology)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if getattr(args, "network", "") is None and args.command in ("cost", "motifs", "topology"):
            raise InputError(f"{args.command} needs --network")
        return args.func(args)
    except (BudgetExceeded, EnumerationBudgetExceeded) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
