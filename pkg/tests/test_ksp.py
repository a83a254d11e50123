import itertools

import networkx as nx
import pytest

from fonrev.decalg import path_length, yen_ksp
from fonrev.netmodel import Network


def oracle(network, src, dst, k):
    g = nx.DiGraph()
    for (u, v), km in network.links.items():
        g.add_edge(u, v, weight=km)
    paths = [tuple(p) for p in nx.all_simple_paths(g, src, dst)]
    paths.sort(key=lambda p: (sum(network.links[uv] for uv in zip(p, p[1:])), p))
    return paths[:k]


def test_triangle(triangle):
    assert yen_ksp(triangle, 0, 2, 3) == [(0, 2), (0, 1, 2)]


def test_lengths_match_exhaustive_search(nsf_full):
    nodes = sorted(nsf_full.nodes)
    for s, d in itertools.islice(itertools.permutations(nodes, 2), 0, None, 7):
        got = yen_ksp(nsf_full, s, d, 4)
        want = oracle(nsf_full, s, d, 4)
        assert [path_length(nsf_full, p) for p in got] == pytest.approx(
            [path_length(nsf_full, p) for p in want])
        assert got == want
        for p in got:
            assert p[0] == s and p[-1] == d and len(set(p)) == len(p)


def test_ties_resolved_lexicographically():
    sq = Network.from_edges([(0, 1, 1), (1, 3, 1), (0, 2, 1), (2, 3, 1)], 100)
    assert yen_ksp(sq, 0, 3, 2) == [(0, 1, 3), (0, 2, 3)]
    assert yen_ksp(sq, 0, 3, 2) == oracle(sq, 0, 3, 2)


def test_fewer_paths_than_requested():
    chain = Network.from_edges([(0, 1, 5), (1, 2, 5)], 100)
    assert yen_ksp(chain, 0, 2, 4) == [(0, 1, 2)]


def test_disconnected_and_bad_arguments():
    net = Network.from_edges([(0, 1, 5), (2, 3, 5)], 100)
    assert yen_ksp(net, 0, 3, 2) == []
    assert yen_ksp(net, 0, 99, 2) == []
    with pytest.raises(ValueError):
        yen_ksp(net, 0, 0, 2)
    with pytest.raises(ValueError):
        yen_ksp(net, 0, 1, 0)
