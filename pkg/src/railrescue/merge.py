"""Line merging: every station absorbs the half-lines around it.

A rescue station i that serves station j must also reach the far ends of
j's territory. The effective rescue distance is therefore the shortest
distance to j plus half the longest line leaving j away from i.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .network import Network, Parameters, ShortestPathMatrix, all_pairs_shortest, neighbors

# Absolute slack on the distance and time limits.
FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MergedInstance:
    """Dense pairwise matrices indexed ``[i, j]``: rescue station i, served station j."""
    station_ids: tuple[int, ...]
    base_distance_km: np.ndarray
    exclusion_max_km: np.ndarray
    effective_distance_km: np.ndarray
    rescue_time_h: np.ndarray
    feasible: np.ndarray
    parameters: Parameters
    warnings: tuple[str, ...] = ()

    @cached_property
    def index(self):
        return {sid: k for k, sid in enumerate(self.station_ids)}

    def pair(self, i, j):
        return self.index[i], self.index[j]

    def effective_distance(self, i, j) -> float:
        return float(self.effective_distance_km[self.pair(i, j)])

    def rescue_time(self, i, j) -> float:
        return float(self.rescue_time_h[self.pair(i, j)])


def route_stations(matrix: ShortestPathMatrix, from_j: int, to_i: int) -> list[int]:
    """Canonical route from ``from_j`` to ``to_i``, both endpoints included."""
    return matrix.path(from_j, to_i)


def exclusion_set(network: Network, matrix: ShortestPathMatrix, i: int, j: int) -> frozenset[int]:
    """Neighbours of j that do not lie on the route from j to i."""
    return neighbors(network, j) - set(route_stations(matrix, j, i))


def exclusion_max(network: Network, matrix: ShortestPathMatrix, i: int, j: int) -> float:
    adj = network.adjacency[j]
    return max((adj[h] for h in exclusion_set(network, matrix, i, j)), default=0.0)


def _shortcut_warnings(network, matrix):
    out = []
    for e in network.edges:
        d = matrix.distance(e.a, e.b)
        if e.length_km > d * (1 + 1e-12):
            out.append(f"edge {e.a}-{e.b} ({e.length_km:g} km) is longer than the "
                       f"shortest route between its ends ({d:g} km)")
    return tuple(out)


def build_merged_instance(network: Network, matrix: ShortestPathMatrix | None = None) -> MergedInstance:
    if matrix is None:
        matrix = all_pairs_shortest(network)
    p = network.parameters
    indptr, indices, weights = network.csr()
    base = np.array(matrix.distance_km, dtype=float)
    excl = kernels.exclusion_max(np.ascontiguousarray(matrix.predecessor), indptr, indices, weights)
    effective = base + 0.5 * excl
    time_h = effective / p.speed_kmh
    feasible = (effective <= p.max_rescue_km + FEASIBILITY_TOL) & (time_h <= p.max_rescue_hours + FEASIBILITY_TOL)
    notes = _shortcut_warnings(network, matrix)
    for note in notes:
        warnings.warn(note, stacklevel=2)
    for arr in (base, excl, effective, time_h, feasible):
        arr.setflags(write=False)
    return MergedInstance(matrix.station_ids, base, excl, effective, time_h, feasible, p, notes)
