import heapq
import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import TWO_HUB_EDGES, make_network
from railrescue.network import (DisconnectedNetworkError, NetworkFormatError, all_pairs_shortest,
                                dump_network, load_network, neighbors, validate)
from railrescue.synth import random_network


def _doc(stations, edges, parameters=None):
    data = {"stations": stations, "edges": edges}
    if parameters is not None:
        data["parameters"] = parameters
    return json.dumps(data)


def test_load_two_stations():
    net = load_network(_doc([{"id": 1}, {"id": 2}], [{"a": 1, "b": 2, "length_km": 100}]))
    assert net.station_ids == (1, 2)
    assert len(net.edges) == 1
    assert net.edges[0].length_km == 100.0


def test_load_unknown_station_named():
    with pytest.raises(NetworkFormatError, match="9"):
        load_network(_doc([{"id": 1}, {"id": 2}], [{"a": 1, "b": 9, "length_km": 5}]))


def test_load_defaults():
    net = load_network(_doc([{"id": 1}, {"id": 2}, {"id": 3}],
                            [{"a": 1, "b": 2, "length_km": 1}, {"a": 2, "b": 3, "length_km": 1}]))
    assert all(s.accident_probability == 0.02 for s in net.stations)
    assert not any(s.is_depot or s.is_candidate for s in net.stations)
    assert all(s.depot_cost == 600000 for s in net.stations)
    assert net.parameters.objective_sense == "maximize"
    assert net.parameters.network_mileage_km is None
    assert net.mileage_km == 2.0


@pytest.mark.parametrize("text, fragment", [
    ('{"stations": [', "line 1"),
    ('{"stations": [{"id": "a"}], "edges": []}', "stations[0].id"),
    ('{"stations": [{"id": 1}], "edges": [{"a": 1, "b": 1}]}', "length_km"),
    ('{"stations": [{"id": 1}], "edges": [], "parameters": {"speed": 3}}', "parameters.speed"),
    ('{"stations": [{"id": 1}, {"id": 1}], "edges": []}', "duplicate station id 1"),
    ('{"stations": [{"id": 1, "is_depot": 1}], "edges": []}', "is_depot"),
    ('{"edges": []}', "stations"),
])
def test_load_errors_locate_the_problem(text, fragment):
    with pytest.raises(NetworkFormatError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        load_network(text)


def test_parse_error_reports_line():
    with pytest.raises(NetworkFormatError, match="line 3"):
        load_network('{\n "stations": [],\n "edges": [,]\n}')


def test_validate_clean_path(path_net):
    assert validate(path_net) == []


def test_validate_disconnected_lists_component():
    net = make_network([(1, 2, 10), (3, 4, 10)], depots=(1,))
    diags = [d for d in validate(net) if d.code == "disconnected"]
    assert len(diags) == 1
    assert diags[0].stations == (3, 4)


def test_validate_depot_not_candidate():
    from railrescue.network import Network, Station, Edge, Parameters
    net = Network((Station(1, is_depot=True, is_candidate=False), Station(2, is_candidate=True)),
                  (Edge(1, 2, 3.0),), Parameters())
    codes = [d.code for d in validate(net)]
    assert codes == ["depot-not-candidate"]
    assert "depot not in candidate set" in str(validate(net)[0])


@pytest.mark.parametrize("edges, code", [
    ([(1, 2, 10), (2, 1, 12)], "duplicate-edge"),
    ([(1, 2, 10), (2, 2, 3)], "self-loop"),
    ([(1, 2, 0)], "nonpositive-length"),
    ([(1, 2, -4)], "nonpositive-length"),
])
def test_validate_edge_problems(edges, code):
    net = make_network(edges, depots=(1,))
    assert code in [d.code for d in validate(net)]


def test_validate_parameters():
    net = make_network([(1, 2, 10)], depots=(1,), alpha=0.0, beta=-1.0)
    messages = " ".join(str(d) for d in validate(net))
    assert "alpha" in messages and "beta" in messages


def test_shortest_path_sum(path_net):
    sp = all_pairs_shortest(path_net)
    assert sp.distance(1, 3) == 160.0
    assert all(sp.distance(i, i) == 0 for i in path_net.station_ids)


def test_shortest_path_triangle(triangle_net):
    sp = all_pairs_shortest(triangle_net)
    assert sp.distance(1, 3) == 10.0
    assert sp.path(1, 3) == [1, 2, 3]
    assert sp.path(3, 1) == [3, 2, 1]


def test_tie_break_prefers_fewer_hops():
    # 1-4 direct (10) ties with 1-2-4 (4 + 6).
    net = make_network([(1, 2, 4), (2, 4, 6), (1, 4, 10)], depots=(1,))
    assert all_pairs_shortest(net).path(1, 4) == [1, 4]


def test_tie_break_lexicographic():
    # Two equal two-hop routes 1-3-4 and 1-2-4; the smaller id sequence wins.
    net = make_network([(1, 3, 5), (3, 4, 5), (1, 2, 5), (2, 4, 5)], depots=(1,))
    sp = all_pairs_shortest(net)
    assert sp.path(1, 4) == [1, 2, 4]
    assert sp.path(4, 1) == [4, 2, 1]


def test_tie_break_lexicographic_deep_prefix():
    # Routes 1-2-5-6 and 1-3-4-6 tie; the first differing station decides.
    net = make_network([(1, 3, 1), (3, 4, 1), (4, 6, 1), (1, 2, 1), (2, 5, 1), (5, 6, 1)], depots=(1,))
    assert all_pairs_shortest(net).path(1, 6) == [1, 2, 5, 6]


def test_disconnected_raises():
    net = make_network([(1, 2, 10), (3, 4, 10)], depots=(1,))
    with pytest.raises(DisconnectedNetworkError, match=r"\[3, 4\]"):
        all_pairs_shortest(net)


def test_neighbors(two_hub_net, path_net):
    assert neighbors(two_hub_net, 3) == {2, 4, 7, 8}
    assert neighbors(path_net, 1) == {2}
    assert len(neighbors(two_hub_net, 2)) == 4
    star = make_network([(2, 1, 1), (2, 3, 1), (2, 4, 1)], depots=(2,))
    assert len(neighbors(star, 2)) == 3
    with pytest.raises(KeyError):
        neighbors(path_net, 42)


def _dijkstra(net, src):
    dist = {src: 0.0}
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in net.adjacency[u].items():
            if d + w < dist.get(v, np.inf):
                dist[v] = d + w
                heapq.heappush(heap, (d + w, v))
    return dist


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 12))
def test_shortest_path_properties(seed, n):
    net = random_network(seed, n, extra_edges=n)
    sp = all_pairs_shortest(net)
    d = sp.distance_km
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    assert np.all(d[:, :, None] <= d[:, None, :] + d[None, :, :].transpose(0, 2, 1) + 1e-9)
    for e in net.edges:
        assert sp.distance(e.a, e.b) <= e.length_km
    for s in net.station_ids:
        ref = _dijkstra(net, s)
        for t in net.station_ids:
            assert sp.distance(s, t) == pytest.approx(ref[t], rel=1e-12)
            path = sp.path(s, t)
            assert path[0] == s and path[-1] == t
            length = sum(net.adjacency[a][b] for a, b in zip(path, path[1:]))
            assert length == pytest.approx(sp.distance(s, t), rel=1e-12)


def _brute_canonical_path(net, s, t):
    """Smallest (length, hops, id sequence) over all simple paths."""
    best = None
    others = [v for v in net.station_ids if v not in (s, t)]
    for r in range(len(others) + 1):
        for mid in itertools.permutations(others, r):
            seq = (s, *mid, t) if s != t else (s,)
            if any(b not in net.adjacency[a] for a, b in zip(seq, seq[1:])):
                continue
            key = (round(sum(net.adjacency[a][b] for a, b in zip(seq, seq[1:])), 9), len(seq), seq)
            best = key if best is None or key < best else best
    return list(best[2])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 6))
def test_canonical_path_matches_enumeration(seed, n):
    # Small integer lengths make ties common.
    net = random_network(seed, n, extra_edges=n, length_range=(1, 3))
    sp = all_pairs_shortest(net)
    for s in net.station_ids:
        for t in net.station_ids:
            assert sp.path(s, t) == _brute_canonical_path(net, s, t)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 10), k=st.sampled_from([0.5, 3.0, 7.25, 1000.0]))
def test_distances_scale_linearly(seed, n, k):
    net = random_network(seed, n)
    from railrescue.network import Edge, Network
    scaled = Network(net.stations, tuple(Edge(e.a, e.b, e.length_km * k) for e in net.edges), net.parameters)
    d0 = all_pairs_shortest(net).distance_km
    d1 = all_pairs_shortest(scaled).distance_km
    np.testing.assert_allclose(d1, k * d0, rtol=1e-9, atol=0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 9))
def test_serialize_round_trip(seed, n):
    net = random_network(seed, n, n_depots=1, n_candidates=2, probability=0.125)
    again = load_network(dump_network(net))
    assert again.station_ids == net.station_ids
    assert {s.id: s for s in again.stations} == {s.id: s for s in net.stations}
    assert sorted(again.edges, key=lambda e: e.key) == sorted(net.edges, key=lambda e: e.key)
    assert again.parameters == net.parameters
