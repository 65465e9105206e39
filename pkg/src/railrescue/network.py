"""Rail network: parsing, validation and shortest paths."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from . import kernels

DEFAULT_ACCIDENT_PROBABILITY = 0.02
DEFAULT_DEPOT_COST = 600000.0
# Relative slack used when testing whether an edge lies on a shortest path.
PATH_TOL = 1e-9


class NetworkFormatError(ValueError):
    """The input document is malformed or violates the schema."""


class DisconnectedNetworkError(ValueError):
    def __init__(self, components):
        self.components = [sorted(c) for c in components]
        detached = [s for comp in self.components[1:] for s in comp]
        super().__init__(f"network is disconnected; unreachable stations {detached}")


@dataclass(frozen=True)
class Station:
    id: int
    name: str = ""
    accident_probability: float = DEFAULT_ACCIDENT_PROBABILITY
    is_depot: bool = False
    is_candidate: bool = False
    depot_cost: float = DEFAULT_DEPOT_COST


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    length_km: float

    @property
    def key(self):
        return (min(self.a, self.b), max(self.a, self.b))


@dataclass(frozen=True)
class Parameters:
    """Global planning parameters.

    Defaults are the national-scale values of the reference case study.
    ``network_mileage_km=None`` means "sum of the instance's edge lengths".
    ``hot_emu_rounding`` is ``"none"`` (keep alpha * fleet real-valued) or
    ``"floor"``.
    """
    alpha: float = 0.025
    gamma: float = 0.8
    speed_kmh: float = 300.0
    max_rescue_km: float = 800.0
    max_rescue_hours: float = 2.5
    network_mileage_km: float | None = None
    emu_fleet_size: int = 4194
    beta: float = 200.0
    objective_sense: str = "maximize"
    hot_emu_rounding: str = "none"


PARAMETER_NAMES = tuple(f.name for f in fields(Parameters))


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    stations: tuple = ()

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class Network:
    stations: tuple[Station, ...]
    edges: tuple[Edge, ...]
    parameters: Parameters = field(default_factory=Parameters)

    @cached_property
    def station_ids(self) -> tuple[int, ...]:
        return tuple(sorted(s.id for s in self.stations))

    @cached_property
    def index(self) -> dict[int, int]:
        return {sid: k for k, sid in enumerate(self.station_ids)}

    @cached_property
    def by_id(self) -> dict[int, Station]:
        return {s.id: s for s in self.stations}

    def station(self, sid) -> Station:
        try:
            return self.by_id[sid]
        except KeyError:
            raise KeyError(f"unknown station id {sid}") from None

    @cached_property
    def adjacency(self) -> dict[int, dict[int, float]]:
        adj = {sid: {} for sid in self.station_ids}
        for e in self.edges:
            if e.a in adj and e.b in adj and e.a != e.b:
                adj[e.a][e.b] = e.length_km
                adj[e.b][e.a] = e.length_km
        return adj

    @property
    def depot_ids(self):
        return tuple(s for s in self.station_ids if self.by_id[s].is_depot)

    @property
    def candidate_ids(self):
        return tuple(s for s in self.station_ids if self.by_id[s].is_candidate)

    @property
    def mileage_km(self) -> float:
        if self.parameters.network_mileage_km is not None:
            return float(self.parameters.network_mileage_km)
        return float(sum(e.length_km for e in self.edges))

    def csr(self):
        """Adjacency in CSR form over station indices, neighbours ascending."""
        indptr = [0]
        indices, weights = [], []
        for sid in self.station_ids:
            for h, w in sorted(self.adjacency[sid].items()):
                indices.append(self.index[h])
                weights.append(w)
            indptr.append(len(indices))
        return (np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64),
                np.asarray(weights, dtype=float))

    def with_parameters(self, **overrides) -> Network:
        return replace(self, parameters=replace(self.parameters, **overrides))


# ------------------------------------------------------------------ documents

def _expect(value, kinds, where):
    if isinstance(value, bool) and bool not in kinds:
        raise NetworkFormatError(f"{where}: expected {_kind_name(kinds)}, got boolean")
    if not isinstance(value, kinds):
        raise NetworkFormatError(f"{where}: expected {_kind_name(kinds)}, got {type(value).__name__}")
    if isinstance(value, float) and not math.isfinite(value):
        raise NetworkFormatError(f"{where}: non-finite number")
    return value


def _kind_name(kinds):
    names = {int: "integer", float: "number", str: "string", bool: "boolean",
             dict: "object", list: "array"}
    return " or ".join(names.get(k, k.__name__) for k in kinds)


_REAL = (int, float)

_PARAM_KINDS = {
    "alpha": _REAL, "gamma": _REAL, "speed_kmh": _REAL, "max_rescue_km": _REAL,
    "max_rescue_hours": _REAL, "network_mileage_km": _REAL, "emu_fleet_size": (int,),
    "beta": _REAL, "objective_sense": (str,), "hot_emu_rounding": (str,),
}


def parse_parameters(data, where="parameters") -> Parameters:
    _expect(data, (dict,), where)
    kwargs = {}
    for key, value in data.items():
        if key not in _PARAM_KINDS:
            raise NetworkFormatError(f"{where}.{key}: unknown parameter")
        if value is None and key == "network_mileage_km":
            continue
        _expect(value, _PARAM_KINDS[key], f"{where}.{key}")
        kwargs[key] = float(value) if _PARAM_KINDS[key] is _REAL else value
    if kwargs.get("objective_sense", "maximize") not in ("maximize", "minimize"):
        raise NetworkFormatError(f"{where}.objective_sense: must be 'maximize' or 'minimize'")
    if kwargs.get("hot_emu_rounding", "none") not in ("none", "floor"):
        raise NetworkFormatError(f"{where}.hot_emu_rounding: must be 'none' or 'floor'")
    return Parameters(**kwargs)


def network_from_dict(data) -> Network:
    _expect(data, (dict,), "document")
    unknown = set(data) - {"parameters", "stations", "edges"}
    if unknown:
        raise NetworkFormatError(f"document: unknown field(s) {sorted(unknown)}")
    for key in ("stations", "edges"):
        if key not in data:
            raise NetworkFormatError(f"document: missing field '{key}'")
    params = parse_parameters(data.get("parameters", {}))

    stations = []
    seen = set()
    for k, raw in enumerate(_expect(data["stations"], (list,), "stations")):
        where = f"stations[{k}]"
        _expect(raw, (dict,), where)
        if "id" not in raw:
            raise NetworkFormatError(f"{where}: missing field 'id'")
        extra = set(raw) - {f.name for f in fields(Station)}
        if extra:
            raise NetworkFormatError(f"{where}: unknown field(s) {sorted(extra)}")
        sid = _expect(raw["id"], (int,), f"{where}.id")
        if sid in seen:
            raise NetworkFormatError(f"{where}.id: duplicate station id {sid}")
        seen.add(sid)
        stations.append(Station(
            id=sid,
            name=_expect(raw.get("name", str(sid)), (str,), f"{where}.name"),
            accident_probability=float(_expect(raw.get("accident_probability", DEFAULT_ACCIDENT_PROBABILITY),
                                               _REAL, f"{where}.accident_probability")),
            is_depot=_expect(raw.get("is_depot", False), (bool,), f"{where}.is_depot"),
            is_candidate=_expect(raw.get("is_candidate", False), (bool,), f"{where}.is_candidate"),
            depot_cost=float(_expect(raw.get("depot_cost", DEFAULT_DEPOT_COST), _REAL, f"{where}.depot_cost")),
        ))

    edges = []
    for k, raw in enumerate(_expect(data["edges"], (list,), "edges")):
        where = f"edges[{k}]"
        _expect(raw, (dict,), where)
        for key in ("a", "b", "length_km"):
            if key not in raw:
                raise NetworkFormatError(f"{where}: missing field '{key}'")
        extra = set(raw) - {"a", "b", "length_km"}
        if extra:
            raise NetworkFormatError(f"{where}: unknown field(s) {sorted(extra)}")
        for key in ("a", "b"):
            _expect(raw[key], (int,), f"{where}.{key}")
            if raw[key] not in seen:
                raise NetworkFormatError(f"{where}.{key}: unknown station id {raw[key]}")
        length = float(_expect(raw["length_km"], _REAL, f"{where}.length_km"))
        edges.append(Edge(raw["a"], raw["b"], length))

    return Network(tuple(stations), tuple(edges), params)


def load_network(document: str) -> Network:
    """Parse a JSON network document."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return network_from_dict(data)


def load_network_file(path) -> Network:
    try:
        return load_network(Path(path).read_text())
    except NetworkFormatError as exc:
        raise NetworkFormatError(f"{path}: {exc}") from None


def network_to_dict(network: Network) -> dict:
    params = asdict(network.parameters)
    if params["network_mileage_km"] is None:
        del params["network_mileage_km"]
    return {
        "parameters": params,
        "stations": [asdict(network.by_id[s]) for s in network.station_ids],
        "edges": [{"a": e.a, "b": e.b, "length_km": e.length_km} for e in network.edges],
    }


def dump_network(network: Network) -> str:
    return json.dumps(network_to_dict(network), indent=2) + "\n"


# ----------------------------------------------------------------- validation

def _components(network):
    adj = network.adjacency
    remaining = set(network.station_ids)
    comps = []
    while remaining:
        root = min(remaining)
        comp, stack = {root}, [root]
        while stack:
            for h in adj[stack.pop()]:
                if h not in comp:
                    comp.add(h)
                    stack.append(h)
        remaining -= comp
        comps.append(comp)
    return comps


def validate(network: Network) -> list[Diagnostic]:
    """Check every network invariant; an empty list means the network is valid."""
    out = []
    ids = [s.id for s in network.stations]
    dup_ids = sorted({s for s in ids if ids.count(s) > 1})
    if dup_ids:
        out.append(Diagnostic("duplicate-station", f"station ids repeated: {dup_ids}", tuple(dup_ids)))
    known = set(ids)

    for s in network.stations:
        if not 0.0 <= s.accident_probability <= 1.0:
            out.append(Diagnostic("bad-probability",
                                  f"station {s.id}: accident probability {s.accident_probability} outside [0, 1]",
                                  (s.id,)))
        if s.depot_cost < 0:
            out.append(Diagnostic("negative-cost", f"station {s.id}: depot cost {s.depot_cost} < 0", (s.id,)))
        if s.is_depot and not s.is_candidate:
            out.append(Diagnostic("depot-not-candidate",
                                  f"station {s.id}: depot not in candidate set", (s.id,)))

    seen = set()
    for e in network.edges:
        if e.a not in known or e.b not in known:
            bad = tuple(x for x in (e.a, e.b) if x not in known)
            out.append(Diagnostic("unknown-station", f"edge {e.a}-{e.b} references unknown station(s) {list(bad)}", bad))
            continue
        if e.a == e.b:
            out.append(Diagnostic("self-loop", f"edge {e.a}-{e.b} is a self-loop", (e.a,)))
            continue
        if not e.length_km > 0:
            out.append(Diagnostic("nonpositive-length", f"edge {e.a}-{e.b} has length {e.length_km}", e.key))
        if e.key in seen:
            out.append(Diagnostic("duplicate-edge", f"edge {e.key[0]}-{e.key[1]} appears more than once", e.key))
        seen.add(e.key)

    if not network.stations:
        out.append(Diagnostic("empty", "network has no stations"))
    elif not dup_ids:
        comps = _components(network)
        if len(comps) > 1:
            for comp in comps[1:]:
                members = tuple(sorted(comp))
                out.append(Diagnostic("disconnected",
                                      f"stations {list(members)} are not connected to station {min(comps[0])}",
                                      members))
    if not any(s.is_candidate for s in network.stations):
        out.append(Diagnostic("no-candidate", "no candidate station"))

    p = network.parameters
    for name in ("speed_kmh", "max_rescue_km", "max_rescue_hours", "emu_fleet_size"):
        if not getattr(p, name) > 0:
            out.append(Diagnostic("bad-parameter", f"{name} must be positive"))
    if p.network_mileage_km is not None and not p.network_mileage_km > 0:
        out.append(Diagnostic("bad-parameter", "network_mileage_km must be positive"))
    for name in ("alpha", "gamma"):
        if not 0 < getattr(p, name) <= 1:
            out.append(Diagnostic("bad-parameter", f"{name} must lie in (0, 1]"))
    if p.beta < 0:
        out.append(Diagnostic("bad-parameter", "beta must be nonnegative"))
    if p.objective_sense not in ("maximize", "minimize"):
        out.append(Diagnostic("bad-parameter", f"unknown objective sense {p.objective_sense!r}"))
    if p.hot_emu_rounding not in ("none", "floor"):
        out.append(Diagnostic("bad-parameter", f"unknown rounding mode {p.hot_emu_rounding!r}"))
    return out


def neighbors(network: Network, j: int) -> frozenset[int]:
    if j not in network.adjacency:
        raise KeyError(f"unknown station id {j}")
    return frozenset(network.adjacency[j])


# ------------------------------------------------------------- shortest paths

@dataclass(frozen=True, eq=False)
class ShortestPathMatrix:
    """All-pairs shortest distances with canonical path trees.

    ``predecessor[s, t]`` is the station index preceding t on the canonical
    path from s (``-1`` on the diagonal). Canonical means: shortest length,
    then fewest hops, then lexicographically smallest station-id sequence.
    """
    station_ids: tuple[int, ...]
    distance_km: np.ndarray
    predecessor: np.ndarray

    @cached_property
    def index(self):
        return {sid: k for k, sid in enumerate(self.station_ids)}

    def _idx(self, sid):
        try:
            return self.index[sid]
        except KeyError:
            raise KeyError(f"unknown station id {sid}") from None

    def distance(self, i, j) -> float:
        return float(self.distance_km[self._idx(i), self._idx(j)])

    def path(self, source, target) -> list[int]:
        s, t = self._idx(source), self._idx(target)
        seq = [t]
        while t != s:
            t = int(self.predecessor[s, t])
            seq.append(t)
        return [self.station_ids[k] for k in reversed(seq)]


def _canonical_tree(src, dist_row, adj_idx, ids):
    """Predecessor array of the canonical shortest-path tree rooted at ``src``."""
    n = len(dist_row)
    order = sorted(range(n), key=lambda t: dist_row[t])
    hops = np.full(n, -1, dtype=np.int64)
    hops[src] = 0
    tight = [[] for _ in range(n)]
    for t in order:
        if t == src:
            continue
        dt = dist_row[t]
        best = None
        for u, w in adj_idx[t]:
            if hops[u] < 0:
                continue
            if abs(dist_row[u] + w - dt) <= PATH_TOL * max(1.0, dt):
                tight[t].append(u)
                if best is None or hops[u] < best:
                    best = hops[u]
        hops[t] = best + 1
    pred = np.full(n, -1, dtype=np.int64)
    rank = np.zeros(n, dtype=np.int64)
    levels = {}
    for t in range(n):
        levels.setdefault(int(hops[t]), []).append(t)
    # Paths of equal hop count compare lexicographically by (prefix, last id),
    # so ranking level by level yields the lexicographic order of full paths.
    for h in sorted(levels):
        if h == 0:
            continue
        for t in levels[h]:
            pred[t] = min((u for u in tight[t] if hops[u] == h - 1), key=lambda u: rank[u])
        ranked = sorted(levels[h], key=lambda t: (rank[pred[t]], ids[t]))
        for r, t in enumerate(ranked):
            rank[t] = r
    return pred


def all_pairs_shortest(network: Network) -> ShortestPathMatrix:
    ids = network.station_ids
    n = len(ids)
    comps = _components(network)
    if len(comps) > 1:
        raise DisconnectedNetworkError(comps)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    adj_idx = [[] for _ in range(n)]
    for sid in ids:
        i = network.index[sid]
        for h, w in sorted(network.adjacency[sid].items()):
            j = network.index[h]
            dist[i, j] = min(dist[i, j], w)
            adj_idx[i].append((j, w))
    dist = kernels.floyd_warshall(dist)
    dist = np.minimum(dist, dist.T)
    pred = np.empty((n, n), dtype=np.int64)
    for s in range(n):
        pred[s] = _canonical_tree(s, dist[s], adj_idx, ids)
    dist.setflags(write=False)
    pred.setflags(write=False)
    return ShortestPathMatrix(ids, dist, pred)
