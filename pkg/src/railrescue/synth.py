"""Random connected rail networks for tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .network import Edge, Network, Parameters, Station


def _all_distances(n, edges):
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for (a, b), w in edges.items():
        dist[a - 1, b - 1] = dist[b - 1, a - 1] = w
    for k in range(n):
        np.minimum(dist, dist[:, k, None] + dist[None, k, :], out=dist)
    return dist


def random_network(rng, n_stations, n_depots=1, n_candidates=None, extra_edges=None,
                   length_range=(10, 400), parameters=None, probability=0.02, depot_cost=600000.0):
    """Random spanning tree plus a few chords, integer edge lengths.

    A chord is kept only if every edge, old and new, is still a shortest
    route between its endpoints afterwards.

    The first ``n_candidates`` stations of a random permutation are
    candidates and the first ``n_depots`` of those are depots.
    """
    rng = np.random.default_rng(rng)
    n_candidates = max(n_depots, n_candidates or n_depots)
    ids = list(range(1, n_stations + 1))
    lo, hi = length_range
    edges = {}
    for k in range(1, n_stations):
        a = ids[k]
        b = ids[int(rng.integers(0, k))]
        edges[(min(a, b), max(a, b))] = float(rng.integers(lo, hi + 1))
    if extra_edges is None:
        extra_edges = int(rng.integers(0, n_stations // 2 + 1))
    for _ in range(extra_edges if n_stations > 2 else 0):
        a, b = sorted(int(v) for v in rng.choice(ids, size=2, replace=False))
        w = float(rng.integers(lo, hi + 1))
        if (a, b) in edges:
            continue
        trial = dict(edges)
        trial[(a, b)] = w
        dist = _all_distances(n_stations, trial)
        if all(dist[u - 1, v - 1] == length for (u, v), length in trial.items()):
            edges = trial
    order = [int(v) for v in rng.permutation(ids)]
    candidates = set(order[:n_candidates])
    depots = set(order[:n_depots])
    if callable(probability):
        probs = {s: float(probability(rng)) for s in ids}
    else:
        probs = {s: float(probability) for s in ids}
    stations = tuple(Station(s, str(s), probs[s], s in depots, s in candidates, depot_cost) for s in ids)
    edge_list = tuple(Edge(a, b, w) for (a, b), w in sorted(edges.items()))
    return Network(stations, edge_list, parameters or Parameters())
