import random
from collections import Counter
from fractions import Fraction
from itertools import combinations

import pytest

from relnet.cost import ExtCost, GameParams, PaymentMatrix, node_cost, social_cost
from relnet.dynamics import (
    DynamicRule,
    PreconditionError,
    Schedule,
    TurnLog,
    best_plan,
    best_turn,
    choose_link,
    entangled_growth,
    network_hash,
    replay,
    simulate,
    strategic_prices,
    write_jsonl,
)
from relnet.network import Network, PlayerType
from relnet.stability import two_hub_network, is_pairwise_stable

ZERO = ExtCost()
SYM = GameParams(A=5, c_A=2, c_B=3, delta=0, tau=1)


def test_rule_and_schedule_validation():
    assert DynamicRule("Rule2a").variant == "2a"
    with pytest.raises(ValueError):
        DynamicRule("2c")
    with pytest.raises(ValueError):
        DynamicRule.from_json({"variant": "2b", "extra": 1})
    with pytest.raises(ValueError):
        Schedule(((2, 0, "A"), (1, 1, "B")))
    with pytest.raises(ValueError):
        Schedule(((0, 0, "A"), (1, 0, "B")))
    s = Schedule.sequential(2, 3, spacing=2, order="random", seed=4, shuffle_minors=True)
    assert Schedule.from_json(s.to_json()) == s
    assert sorted(s.players) == list(range(5)) and [t for t, _, _ in s.arrivals] == [0, 2, 4, 6, 8]
    r = DynamicRule("2a", plan_depth=2)
    assert DynamicRule.from_json(r.to_json()) == r


def _price_formula(deltas):
    star = max(deltas, key=lambda j: (deltas[j][0], -j))
    p_star = max(deltas[star][1], ZERO)
    return {j: max(ZERO, (deltas[star][0] - d_i) + p_star, d_j) for j, (d_i, d_j) in deltas.items()}


def _deltas(g, p, actor, js):
    out = {}
    for j in js:
        h = g.add_edge(actor, j)
        out[j] = (node_cost(h, p, actor) - node_cost(g, p, actor), node_cost(h, p, j) - node_cost(g, p, j))
    return out


def test_strategic_prices_need_transfers():
    g = Network.from_counts(2, 1, [(0, 1)])
    with pytest.raises(PreconditionError):
        strategic_prices(g, GameParams(A=2, c_A=1, c_B=1), 2)


def test_single_candidate_price_just_compensates():
    p = GameParams(A=3, c_A=1, c_B=2, delta=1, tau=1, transfers=True)
    g = Network.from_counts(3, 1, [(0, 1), (1, 2), (0, 2), (0, 3)])
    prices = strategic_prices(g, p, 3, [1])
    d_j = _deltas(g, p, 3, [1])[1][1]
    assert prices == {1: max(ZERO, d_j)}


def test_free_reference_link_prices_the_better_one_by_its_advantage():
    # 4-node instance: actor 3 hangs off major 0; majors 1 and 2 are the candidates
    p = GameParams(A=3, c_A="1/2", c_B=2, delta=1, tau=1, transfers=True)
    g = Network.from_counts(3, 1, [(0, 1), (1, 2), (0, 3)])
    deltas = _deltas(g, p, 3, [1, 2])
    prices = strategic_prices(g, p, 3, [1, 2])
    assert prices == _price_formula(deltas)
    worse = max(deltas, key=lambda j: (deltas[j][0], -j))
    better = 3 - worse
    assert deltas[worse][1] <= ZERO and prices[worse] == ZERO
    advantage = deltas[worse][0] - deltas[better][0]
    assert advantage > ZERO and prices[better] == max(advantage, deltas[better][1])


def test_prices_never_hurt_the_counterparty():
    rng = random.Random(31)
    for _ in range(30):
        n = rng.randint(4, 7)
        edges = [e for e in combinations(range(n), 2) if rng.random() < 0.4]
        g = Network.from_counts(2, n - 2, edges)
        p = GameParams(A=3, c_A=1, c_B=2, delta=1, tau=rng.randint(0, 1), transfers=True)
        actor = rng.choice(g.nodes)
        prices = strategic_prices(g, p, actor)
        deltas = _deltas(g, p, actor, prices)
        if prices:
            assert prices == _price_formula(deltas)
        for j, pr in prices.items():
            assert pr >= ZERO and pr >= deltas[j][1]


def test_choose_link_rules():
    assert choose_link(0, {1: (1, 0), 2: (0, 0)}) is None
    assert choose_link(0, {1: (-8, 3), 2: (-8, 5)}) == 1
    # equal delta + price: the cheaper price wins
    assert choose_link(0, {1: (-6, 3), 2: (-4, 1)}) == 2


def test_choose_link_uniform_tie_break():
    counts = Counter(choose_link(0, {1: (-2, 1), 2: (-2, 1), 3: (-2, 1)}, seed=s) for s in range(10_000))
    for j in (1, 2, 3):
        assert abs(counts[j] / 10_000 - 1 / 3) <= 0.05


def test_stable_network_gives_empty_turns():
    g = two_hub_network(3, 3)
    p = GameParams(A=4, c_A="3/2", c_B=2, delta=1, tau=1)
    assert is_pairwise_stable(g, p).stable
    for v in g.nodes:
        assert best_turn(g, p, v, DynamicRule("2b")) == []
        assert best_turn(g, p, v, DynamicRule("2a")) == []


def _greedy_plan_oracle(g, p, actor, depth):
    base = node_cost(g, p, actor)
    own = g.neighbors(actor)
    best = None
    for k in range(len(own) + 1):
        for removed in combinations(own, k):
            h = g
            for j in removed:
                h = h.remove_edge(actor, j)
            steps = [(h, len(removed))]
            for extra in range(depth):
                options = []
                for j in h.nodes:
                    if j == actor or h.has_edge(actor, j):
                        continue
                    t = h.add_edge(actor, j)
                    if node_cost(t, p, j) < node_cost(h, p, j):
                        options.append((node_cost(t, p, actor), j, t))
                if not options:
                    break
                h = min(options, key=lambda o: o[:2])[2]
                steps.append((h, len(removed) + extra + 1))
            for t, moves in steps:
                if moves:
                    c = node_cost(t, p, actor)
                    best = c if best is None or c < best else best
    return None if best is None or best >= base else best


def test_rule2a_plan_matches_exhaustive_oracle():
    rng = random.Random(32)
    checked = 0
    for _ in range(30):
        edges = [e for e in combinations(range(5), 2) if rng.random() < 0.45]
        g = Network.from_counts(2, 3, edges)
        p = GameParams(A=rng.choice([2, 3, 4]), c_A=Fraction(rng.randint(1, 6), 4), c_B=2, delta=rng.choice([0, 1]), tau=rng.randint(0, 1))
        actor = rng.choice(g.nodes)
        got = best_plan(g, p, actor, DynamicRule("2a"))
        want = _greedy_plan_oracle(g, p, actor, 3)
        assert (None if got is None else got[0]) == want
        checked += got is not None
    assert checked > 5


def _sym_schedule(n_minor, seed, order="round_robin"):
    return Schedule.sequential(3, n_minor, spacing=2, order=order, seed=seed, shuffle_minors=True)


def test_simulation_is_deterministic_and_replays():
    s = _sym_schedule(5, 3, "random")
    a = simulate(SYM, s, DynamicRule("2b"))
    b = simulate(SYM, s, DynamicRule("2b"))
    assert [x.to_json() for x in a.logs] == [x.to_json() for x in b.logs]
    empty = Network((), (), frozenset())
    for rec, g, h in replay(empty, s, a.logs):
        assert h == rec.network_hash
    assert network_hash(g) == network_hash(a.network)


def test_turn_log_jsonl(tmp_path):
    r = simulate(SYM, _sym_schedule(2, 0), DynamicRule("2b"))
    path = tmp_path / "log.jsonl"
    with open(path, "w") as fh:
        write_jsonl(r.logs, fh)
    assert len(path.read_text().splitlines()) == len(r.logs)


@pytest.mark.parametrize("variant", ["2a", "2b"])
def test_fixpoint_soundness_and_move_signs(variant):
    for seed in range(3):
        s = _sym_schedule(5, seed, "random")
        r = simulate(SYM, s, DynamicRule(variant), seed=seed)
        assert r.converged
        g = r.network
        for u, v in combinations(g.nodes, 2):
            h = g.remove_edge(u, v) if g.has_edge(u, v) else g.add_edge(u, v)
            du = node_cost(h, SYM, u) - node_cost(g, SYM, u)
            dv = node_cost(h, SYM, v) - node_cost(g, SYM, v)
            if g.has_edge(u, v):
                assert du >= ZERO and dv >= ZERO
            else:
                assert not (du < ZERO and dv < ZERO)
        arrived = {}
        for rec in r.logs:
            arrived.setdefault(rec.actor, rec.turn)
            assert rec.turn >= arrived[rec.actor]
            if variant == "2b":
                assert all(m.actor_delta < ZERO for m in rec.moves)


def test_additions_without_transfers_help_both_ends():
    s = _sym_schedule(5, 1, "random")
    r = simulate(SYM, s, DynamicRule("2b"))
    empty = Network((), (), frozenset())
    prev = empty
    for rec, g, _ in replay(empty, s, r.logs):
        if rec.actor not in prev:
            prev = prev.add_node(rec.actor, g.type_of(rec.actor))
        h = prev
        for m in rec.moves:
            nxt = h.add_edge(*m.edge) if m.kind == "add" else h.remove_edge(*m.edge)
            if m.kind == "add":
                for v in m.edge:
                    assert node_cost(nxt, SYM, v) < node_cost(h, SYM, v)
            h = nxt
        prev = g


def test_round_robin_settles_within_four_rounds():
    for seed in range(3):
        r = simulate(SYM, _sym_schedule(6, seed), DynamicRule("2a"), seed=seed)
        assert r.converged and r.rounds_after_arrivals <= 4


def test_unreliable_regime_keeps_unbounded_cost():
    p = GameParams(A=6, c_A="5/2", c_B=3, delta=1, tau=0)
    s = Schedule.sequential(3, 4, order="random", seed=2, shuffle_minors=True)
    r = simulate(p, s, DynamicRule("2b"), seed=2)
    empty = Network((), (), frozenset())
    minors_seen = 0
    for rec, g, _ in replay(empty, s, r.logs):
        if rec.arrival and g.type_of(rec.actor) is PlayerType.MINOR:
            minors_seen += 1
        if minors_seen >= 2:
            assert social_cost(g, p).q >= 1


def test_transfer_simulation_keeps_social_cost_and_payments_consistent():
    p = GameParams(A=4, c_A="3/2", c_B=2, delta=1, tau=1, transfers=True)
    r = simulate(p, Schedule.sequential(3, 3, seed=1), DynamicRule("2b"), seed=1)
    r.payments.validate(r.network)
    assert sum((r.payments.net_outflow(v) for v in r.network.nodes), Fraction(0)) == 0


def test_growth_preconditions():
    p = GameParams(A=2, c_A="1/2", c_B=20, delta=1, tau=1, transfers=True)
    small = Network.from_counts(3, 0, combinations(range(3), 2))
    with pytest.raises(PreconditionError):
        entangled_growth(p, small, 2)
    with pytest.raises(PreconditionError):
        entangled_growth(p.with_(transfers=False), small, 2)
    g = Network.from_counts(10, 2, list(combinations(range(10), 2)) + [(0, 10), (1, 10), (10, 11), (0, 11)])
    r = entangled_growth(p, g, 0)
    assert r.chain == [] and r.network == g
