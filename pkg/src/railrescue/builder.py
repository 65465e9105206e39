"""Fleet constants and the coverage / location binary programs.

Variable naming is stable: ``x_{i}_{j}`` is 1 when rescue station i serves
station j, ``y_{k}`` is 1 when station k hosts a hot standby unit. Program
variables are ordered by served station, then rescue station, with the
``y`` variables last in candidate order.
"""
from __future__ import annotations

import math
from decimal import Decimal
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .merge import MergedInstance
from .network import Network, Parameters


class UncoverableStationError(ValueError):
    """Some stations have no rescue station within the distance/time limits."""

    def __init__(self, stations):
        self.stations = tuple(sorted(stations))
        super().__init__(f"uncoverable station(s): {list(self.stations)}")


@dataclass(frozen=True)
class ProblemConstants:
    hot_emu_count: float
    workload_cap_km: float


def fleet_constants(parameters: Parameters, mileage_km: float | None = None,
                    rounding: str | None = None) -> ProblemConstants:
    """Hot standby fleet size and the per-depot workload cap.

    ``mileage_km`` overrides ``parameters.network_mileage_km``; one of them
    must be set. By default the fleet size stays real-valued.
    """
    rounding = rounding or parameters.hot_emu_rounding
    mileage = parameters.network_mileage_km if mileage_km is None else mileage_km
    if mileage is None:
        raise ValueError("network mileage is not set")
    for name, value in (("alpha", parameters.alpha), ("gamma", parameters.gamma),
                        ("emu_fleet_size", parameters.emu_fleet_size), ("network_mileage_km", mileage)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")
    # Decimal product rounds once, so 0.025 * 4194 gives the double nearest 104.85.
    count = float(Decimal(repr(float(parameters.alpha))) * Decimal(int(parameters.emu_fleet_size)))
    if rounding == "floor":
        count = float(math.floor(count))
    elif rounding != "none":
        raise ValueError(f"unknown rounding mode {rounding!r}")
    if not count > 0:
        raise ValueError("hot standby fleet rounds down to zero")
    return ProblemConstants(count, 0.5 * parameters.gamma * mileage / count)


@dataclass(frozen=True, eq=False)
class CoverageInstance:
    """Assignment of every station to one fixed depot.

    ``coefficient_km[a, b]`` is the effective distance from ``depot_ids[a]``
    to ``station_ids[b]``, NaN for pairs outside the distance/time limits.
    """
    depot_ids: tuple[int, ...]
    station_ids: tuple[int, ...]
    coefficient_km: np.ndarray
    workload_weight_km: np.ndarray
    workload_cap_km: float
    objective_sense: str
    accident_probability: np.ndarray
    merged: MergedInstance
    constants: ProblemConstants

    def feasible_pairs(self):
        """``(i, j)`` ids of usable pairs, ordered by j then i."""
        out = []
        for b, j in enumerate(self.station_ids):
            for a, i in enumerate(self.depot_ids):
                if not np.isnan(self.coefficient_km[a, b]):
                    out.append((i, j))
        return out

    def uncoverable(self):
        ok = ~np.isnan(self.coefficient_km)
        return tuple(j for b, j in enumerate(self.station_ids) if not ok[:, b].any())

    @cached_property
    def depot_index(self):
        return {i: a for a, i in enumerate(self.depot_ids)}

    @cached_property
    def station_index(self):
        return {j: b for b, j in enumerate(self.station_ids)}


@dataclass(frozen=True, eq=False)
class LocationInstance(CoverageInstance):
    """Joint choice of rescue stations among candidates plus the assignment.

    ``depot_ids`` holds the candidate set; ``forced_open`` the stations that
    already host a unit.
    """
    forced_open: frozenset = frozenset()
    open_cost_yuan: np.ndarray = None
    beta: float = 0.0

    @property
    def candidate_ids(self):
        return self.depot_ids


@dataclass(frozen=True)
class Constraint:
    indices: tuple[int, ...]
    coefficients: tuple[float, ...]
    comparator: str  # "<=" or "="
    rhs: float
    kind: str = ""


@dataclass(frozen=True, eq=False)
class BinaryProgram:
    names: tuple[str, ...]
    objective: np.ndarray
    sense: str
    constraints: tuple[Constraint, ...]
    source: CoverageInstance | None = None

    @property
    def n_vars(self):
        return len(self.names)

    def dense(self):
        """``(A, rhs, is_equality)`` as numpy arrays."""
        a = np.zeros((len(self.constraints), self.n_vars))
        for r, row in enumerate(self.constraints):
            for k, v in zip(row.indices, row.coefficients):
                a[r, k] += v
        rhs = np.array([row.rhs for row in self.constraints], dtype=float)
        eq = np.array([row.comparator == "=" for row in self.constraints], dtype=bool)
        return a, rhs, eq

    def evaluate(self, x) -> float:
        """Objective at a 0/1 vector, summed sequentially in variable order."""
        total = 0.0
        for k, bit in enumerate(x):
            if bit:
                total += float(self.objective[k])
        return total

    def violated_rows(self, x, tol=1e-9):
        bad = []
        for r, row in enumerate(self.constraints):
            act = sum(v * x[k] for k, v in zip(row.indices, row.coefficients))
            slack = tol * (1 + abs(row.rhs))
            if (row.comparator == "=" and abs(act - row.rhs) > slack) or \
                    (row.comparator == "<=" and act > row.rhs + slack):
                bad.append(r)
        return bad


def _coverage_arrays(merged, network, source_ids):
    rows = [merged.index[i] for i in source_ids]
    d = merged.effective_distance_km[rows, :]
    ok = merged.feasible[rows, :]
    coef = np.where(ok, d, np.nan)
    prob = np.array([network.station(j).accident_probability for j in merged.station_ids])
    return coef, coef * prob[None, :], prob


def build_cmhse(merged: MergedInstance, network: Network, check: bool = True) -> CoverageInstance:
    """Coverage model over the fixed depots.

    Pairs outside the distance or time limit are dropped. With ``check`` an
    :class:`UncoverableStationError` names every station left without a depot.
    """
    depots = network.depot_ids
    if not depots:
        raise ValueError("network has no depot")
    coef, weight, prob = _coverage_arrays(merged, network, depots)
    constants = fleet_constants(network.parameters, network.mileage_km)
    inst = CoverageInstance(depots, merged.station_ids, coef, weight, constants.workload_cap_km,
                            network.parameters.objective_sense, prob, merged, constants)
    if check and inst.uncoverable():
        raise UncoverableStationError(inst.uncoverable())
    return inst


def build_lchse(merged: MergedInstance, network: Network, check: bool = True) -> LocationInstance:
    """Location-and-coverage model over the candidate set."""
    candidates = network.candidate_ids
    if not candidates:
        raise ValueError("candidate set is empty")
    forced = frozenset(network.depot_ids)
    if not forced <= set(candidates):
        raise ValueError(f"depots {sorted(forced - set(candidates))} are not candidates")
    coef, weight, prob = _coverage_arrays(merged, network, candidates)
    constants = fleet_constants(network.parameters, network.mileage_km)
    cost = np.array([network.station(k).depot_cost for k in candidates], dtype=float)
    inst = LocationInstance(candidates, merged.station_ids, coef, weight, constants.workload_cap_km,
                            "minimize", prob, merged, constants,
                            forced_open=forced, open_cost_yuan=cost, beta=network.parameters.beta)
    if check and inst.uncoverable():
        raise UncoverableStationError(inst.uncoverable())
    return inst


def _x_block(inst, explicit_feasibility):
    """Variables, per-station assignment rows, and per-depot workload terms."""
    names, pairs = [], []
    d_full = inst.merged.effective_distance_km
    for b, j in enumerate(inst.station_ids):
        for a, i in enumerate(inst.depot_ids):
            if explicit_feasibility or not np.isnan(inst.coefficient_km[a, b]):
                names.append(f"x_{i}_{j}")
                pairs.append((a, b, float(d_full[inst.merged.index[i], inst.merged.index[j]])))
    return names, pairs


def _assemble(inst, explicit_feasibility, x_cost, with_y, sense):
    names, pairs = _x_block(inst, explicit_feasibility)
    nx = len(names)
    obj = [x_cost(d) for _, _, d in pairs]
    y_index = {}
    if with_y:
        for a, k in enumerate(inst.depot_ids):
            y_index[a] = len(names)
            names.append(f"y_{k}")
            obj.append(float(inst.open_cost_yuan[a]))

    rows = []
    by_station = {b: [] for b in range(len(inst.station_ids))}
    by_depot = {a: [] for a in range(len(inst.depot_ids))}
    for k, (a, b, _) in enumerate(pairs):
        by_station[b].append(k)
        by_depot[a].append(k)
    for b in range(len(inst.station_ids)):
        idx = by_station[b]
        rows.append(Constraint(tuple(idx), (1.0,) * len(idx), "=", 1.0, "assign"))
    if with_y:
        for a, k in enumerate(inst.depot_ids):
            if k in inst.forced_open:
                rows.append(Constraint((y_index[a],), (1.0,), "=", 1.0, "open"))
        for k, (a, b, _) in enumerate(pairs):
            rows.append(Constraint((k, y_index[a]), (1.0, -1.0), "<=", 0.0, "link"))
    if explicit_feasibility:
        p = inst.merged.parameters
        for k, (a, b, d) in enumerate(pairs):
            rows.append(Constraint((k,), (d,), "<=", float(p.max_rescue_km), "distance"))
            rows.append(Constraint((k,), (d / p.speed_kmh,), "<=", float(p.max_rescue_hours), "time"))
    for a in range(len(inst.depot_ids)):
        idx = by_depot[a]
        coefs = tuple(pairs[k][2] * float(inst.accident_probability[pairs[k][1]]) for k in idx)
        rows.append(Constraint(tuple(idx), coefs, "<=", float(inst.workload_cap_km), "workload"))
    assert nx == len(pairs)
    return BinaryProgram(tuple(names), np.array(obj, dtype=float), sense, tuple(rows), inst)


def scalarize(location: LocationInstance, explicit_feasibility: bool = False) -> BinaryProgram:
    """Single minimization: ``-beta * distance + opening cost``."""
    beta = float(location.beta)
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    return _assemble(location, explicit_feasibility, lambda d: -beta * d, True, "minimize")


def to_binary_program(instance: CoverageInstance, explicit_feasibility: bool = False) -> BinaryProgram:
    """Lossless translation; location instances go through :func:`scalarize`.

    ``explicit_feasibility`` keeps every pair and adds the distance and time
    rows instead of dropping infeasible pairs (used to cross-check the
    reduction).
    """
    if isinstance(instance, LocationInstance):
        return scalarize(instance, explicit_feasibility)
    return _assemble(instance, explicit_feasibility, lambda d: d, False, instance.objective_sense)
