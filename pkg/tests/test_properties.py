"""Property-based suites for transfer neutrality and run determinism."""

from fractions import Fraction
from itertools import combinations

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from relnet.cost import GameParams, PaymentMatrix, social_cost, transfer_adjusted_cost
from relnet.dynamics import DynamicRule, Schedule, network_hash, replay, simulate
from relnet.network import Network

CASES = 1000
PROFILE = settings(max_examples=CASES, deadline=None, suppress_health_check=[HealthCheck.too_slow])

fractions = st.fractions(min_value=0, max_value=20, max_denominator=12)


@st.composite
def networks(draw, max_nodes=7):
    n = draw(st.integers(2, max_nodes))
    n_a = draw(st.integers(0, n))
    pairs = list(combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Network.from_counts(n_a, n - n_a, [e for e, keep in zip(pairs, mask) if keep])


@st.composite
def params(draw):
    c_A = draw(st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=4))
    return GameParams(
        A=draw(st.fractions(min_value=Fraction(5, 4), max_value=8, max_denominator=4)),
        c_A=c_A,
        c_B=c_A + draw(st.fractions(min_value=0, max_value=3, max_denominator=4)),
        delta=draw(st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(1)])),
        tau=draw(st.integers(0, 1)),
        transfers=True,
    )


@PROFILE
@given(networks(), params(), st.data())
def test_transfers_cancel_in_social_cost(g, p, data):
    pay = PaymentMatrix()
    for u, v in sorted(g.edges):
        if data.draw(st.booleans()):
            pay.set(u, v, data.draw(fractions))
        if data.draw(st.booleans()):
            pay.set(v, u, data.draw(fractions))
    total = social_cost(g, p.with_(transfers=False))
    adjusted = None
    for v in g.nodes:
        c = transfer_adjusted_cost(g, p, pay, v)
        adjusted = c if adjusted is None else adjusted + c
    assert adjusted == total


@st.composite
def runs(draw):
    n_major = draw(st.integers(1, 3))
    n_minor = draw(st.integers(0, 3))
    order = draw(st.sampled_from(["round_robin", "random"]))
    seed = draw(st.integers(0, 2**31))
    spacing = draw(st.integers(1, 3))
    p = GameParams(
        A=draw(st.sampled_from([2, 3, 5])),
        c_A=draw(st.sampled_from([Fraction(1, 2), Fraction(3, 2), Fraction(5, 2)])),
        c_B=3,
        delta=draw(st.sampled_from([0, 1])),
        tau=draw(st.integers(0, 1)),
        transfers=draw(st.booleans()),
    )
    rule = DynamicRule(draw(st.sampled_from(["2a", "2b"])))
    sched = Schedule.sequential(n_major, n_minor, spacing=spacing, order=order, seed=seed, shuffle_minors=True)
    return p, sched, rule, seed


@PROFILE
@given(runs())
def test_same_seed_same_run(case):
    p, sched, rule, seed = case
    a = simulate(p, sched, rule, max_rounds=6, seed=seed)
    b = simulate(p, sched, rule, max_rounds=6, seed=seed)
    assert [x.to_json() for x in a.logs] == [x.to_json() for x in b.logs]
    assert a.converged == b.converged and a.network == b.network
    empty = Network((), (), frozenset())
    last = empty
    for rec, g, h in replay(empty, sched, a.logs):
        assert h == rec.network_hash
        last = g
    assert network_hash(last) == network_hash(a.network)
    if p.transfers:
        assert social_cost(a.network, p) == sum(
            (transfer_adjusted_cost(a.network, p, a.payments, v) for v in a.network.nodes[1:]),
            transfer_adjusted_cost(a.network, p, a.payments, a.network.nodes[0]),
        )
