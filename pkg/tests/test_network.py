import pytest

from relnet.network import Network, PlayerType


def test_build_normalises_and_sorts():
    g = Network.build({3: "A", 1: "B", 2: "B"}, [(3, 1), (2, 1)])
    assert g.nodes == (1, 2, 3)
    assert g.edges == frozenset({(1, 3), (1, 2)})
    assert g.type_of(3) is PlayerType.MAJOR
    assert g.majors == [3] and g.minors == [1, 2]


def test_rejects_self_loop_and_dangling_edge():
    with pytest.raises(ValueError):
        Network.build({1: "A"}, [(1, 1)])
    with pytest.raises(ValueError):
        Network((1, 2), (PlayerType.MAJOR, PlayerType.MINOR), frozenset({(1, 3)}))


def test_degree_counts_incident_edges():
    g = Network.from_counts(1, 3, [(0, 1), (0, 2), (0, 3), (1, 2)])
    assert [g.degree(v) for v in g.nodes] == [3, 2, 2, 1]
    assert g.neighbors(0) == [1, 2, 3]


def test_updates_are_functional_and_consistent():
    g = Network.from_counts(2, 2, [(0, 1), (1, 2)])
    h = g.add_edge(3, 0)
    assert not g.has_edge(0, 3) and h.has_edge(0, 3)
    fresh = Network.from_counts(2, 2, [(0, 1), (1, 2), (0, 3)])
    assert h == fresh and hash(h) == hash(fresh)
    assert h.adj == fresh.adj
    back = h.remove_edge(0, 3)
    assert back == g and back.adj == g.adj
    with pytest.raises(ValueError):
        g.add_edge(0, 1)
    with pytest.raises(ValueError):
        g.remove_edge(0, 3)


def test_add_node_and_relabel():
    g = Network.from_counts(1, 1, [(0, 1)]).add_node(5, "A")
    assert g.nodes == (0, 1, 5) and g.type_of(5) is PlayerType.MAJOR
    with pytest.raises(ValueError):
        g.add_node(5, "B")
    r = g.relabel({0: 10, 1: 11, 5: 12})
    assert r.edges == frozenset({(10, 11)}) and r.type_of(12) is PlayerType.MAJOR


def test_dict_round_trip():
    g = Network.from_counts(2, 3, [(0, 1), (0, 2), (1, 4)])
    assert Network.from_dict(g.to_dict()) == g


def test_player_type_parse():
    assert PlayerType.parse("major") is PlayerType.MAJOR
    assert PlayerType.parse("b") is PlayerType.MINOR
    with pytest.raises(ValueError):
        PlayerType.parse("C")
