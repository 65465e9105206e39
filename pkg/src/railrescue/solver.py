"""Exact solution of the coverage and location programs.

``solve_exact`` runs a structured depth-first branch and bound over station
assignments; ``solve_bruteforce`` enumerates every binary vector of a
:class:`BinaryProgram` and serves as the independent oracle. Both return the
lexicographically smallest optimal assignment vector (stations ascending,
smaller depot id first), preferring fewer openings on equal assignments.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .builder import BinaryProgram, CoverageInstance, LocationInstance
from .merge import FEASIBILITY_TOL

BOUND_TOL = 1e-9
VERIFY_RTOL = 1e-6


@dataclass(frozen=True)
class AssignmentPlan:
    assignment: dict  # station id -> rescue station id
    opened: frozenset
    objective_value: float
    rescue_distance_total_km: float
    opening_cost_total_yuan: float
    depot_workload_km: dict = field(default_factory=dict)

    def assignment_vector(self):
        return tuple(self.assignment[j] for j in sorted(self.assignment))

    def coverage_areas(self):
        areas = {}
        for j in sorted(self.assignment):
            areas.setdefault(self.assignment[j], []).append(j)
        return dict(sorted(areas.items()))


@dataclass(frozen=True)
class SolveReport:
    status: str  # "optimal" or "infeasible"
    plan: AssignmentPlan | None = None
    infeasibility_witness: frozenset = frozenset()
    nodes_explored: int = 0
    wall_time: float = 0.0
    method: str = "branch-and-bound"

    @property
    def optimal(self):
        return self.status == "optimal"


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


def evaluate_plan(instance: CoverageInstance, assignment: dict, opened) -> AssignmentPlan:
    """Recompute every objective component of a plan from the instance data.

    Sums run in station order, then candidate order, which is the variable
    order of the corresponding :class:`BinaryProgram`.
    """
    merged = instance.merged
    d = merged.effective_distance_km
    opened = frozenset(opened)
    z1 = 0.0
    scalar = 0.0
    load = {i: 0.0 for i in instance.depot_ids}
    for b, j in enumerate(instance.station_ids):
        i = assignment[j]
        dij = float(d[merged.index[i], merged.index[j]])
        z1 += dij
        if isinstance(instance, LocationInstance):
            scalar += -float(instance.beta) * dij
        if i in load:
            load[i] += dij * float(instance.accident_probability[b])
    z2 = 0.0
    if isinstance(instance, LocationInstance):
        for a, k in enumerate(instance.depot_ids):
            if k in opened:
                cost = float(instance.open_cost_yuan[a])
                z2 += cost
                scalar += cost
        objective = scalar
    else:
        objective = z1
    return AssignmentPlan(dict(assignment), opened, objective, z1, z2, load)


def _options(instance):
    is_location = isinstance(instance, LocationInstance)
    coef = instance.coefficient_km
    ptr, depot, value, weight = [0], [], [], []
    for b in range(len(instance.station_ids)):
        for a in range(len(instance.depot_ids)):
            c = coef[a, b]
            if np.isnan(c):
                continue
            depot.append(a)
            if is_location:
                value.append(float(instance.beta) * c)
            else:
                value.append(c if instance.objective_sense == "maximize" else -c)
            weight.append(instance.workload_weight_km[a, b])
        ptr.append(len(depot))
    n_dep = len(instance.depot_ids)
    if is_location:
        cost = np.asarray(instance.open_cost_yuan, dtype=float)
        forced = np.array([k in instance.forced_open for k in instance.depot_ids], dtype=np.bool_)
    else:
        cost = np.zeros(n_dep)
        forced = np.ones(n_dep, dtype=np.bool_)
    return (np.array(ptr, dtype=np.int64), np.array(depot, dtype=np.int64),
            np.array(value, dtype=float), np.array(weight, dtype=float),
            np.full(n_dep, float(instance.workload_cap_km)), cost, forced)


def solve_exact(instance: CoverageInstance, prune: bool = True) -> SolveReport:
    """Provably optimal plan, or infeasibility with a witness station set.

    ``prune=False`` disables the bound and the workload look-ahead; the
    result is identical, only slower.
    """
    if not isinstance(instance, CoverageInstance):
        raise TypeError(f"expected a coverage or location instance, got {type(instance).__name__}")
    if instance.objective_sense not in ("maximize", "minimize"):
        raise ValueError(f"malformed instance: objective sense {instance.objective_sense!r}")
    t0 = time.perf_counter()
    uncovered = instance.uncoverable()
    if uncovered:
        return SolveReport("infeasible", infeasibility_witness=frozenset(uncovered),
                           nodes_explored=0, wall_time=time.perf_counter() - t0)
    ptr, depot, value, weight, cap, cost, forced = _options(instance)
    found, choice, _, nodes, fail = kernels.bnb_search(
        ptr, depot, value, weight, cap, cost, forced, prune, BOUND_TOL)
    elapsed = time.perf_counter() - t0
    if not found:
        witness = frozenset([instance.station_ids[fail]]) if fail >= 0 else frozenset()
        return SolveReport("infeasible", infeasibility_witness=witness,
                           nodes_explored=int(nodes), wall_time=elapsed)
    assignment = {j: instance.depot_ids[depot[choice[b]]] for b, j in enumerate(instance.station_ids)}
    if isinstance(instance, LocationInstance):
        opened = set(instance.forced_open) | set(assignment.values())
    else:
        opened = set(instance.depot_ids)
    plan = evaluate_plan(instance, assignment, opened)
    return SolveReport("optimal", plan, nodes_explored=int(nodes), wall_time=elapsed)


def _parse_name(name):
    parts = name.split("_")
    if parts[0] == "x" and len(parts) == 3:
        return "x", int(parts[1]), int(parts[2])
    if parts[0] == "y" and len(parts) == 2:
        return "y", int(parts[1]), None
    raise ValueError(f"unrecognised variable name {name!r}")


def solve_bruteforce(program: BinaryProgram, variable_limit: int = 24) -> SolveReport:
    """Exhaustive enumeration of all ``2**n`` binary vectors.

    The tie-break key prefers ``x`` variables set early in variable order
    and ``y`` variables unset, which reproduces the lexicographic rule of
    :func:`solve_exact` for programs built by :mod:`railrescue.builder`.
    """
    n = program.n_vars
    if n > variable_limit:
        raise ValueError(f"{n} variables exceed the brute-force limit of {variable_limit}")
    t0 = time.perf_counter()
    cols = [[] for _ in range(n)]
    for r, row in enumerate(program.constraints):
        for k, v in zip(row.indices, row.coefficients):
            cols[k].append((r, v))
    col_ptr = np.cumsum([0] + [len(c) for c in cols]).astype(np.int64)
    col_rows = np.array([r for c in cols for r, _ in c], dtype=np.int64)
    col_vals = np.array([v for c in cols for _, v in c], dtype=float)
    _, rhs, is_eq = program.dense()
    sign = 1.0 if program.sense == "maximize" else -1.0
    c = sign * np.asarray(program.objective, dtype=float)
    prefer_one = np.array([1 if name.startswith("x_") else 0 for name in program.names], dtype=np.int64)
    found, mask, _ = kernels.bruteforce(n, col_ptr, col_rows, col_vals, c, rhs, is_eq,
                                        prefer_one, BOUND_TOL)
    elapsed = time.perf_counter() - t0
    nodes = 1 << n
    src = program.source
    if not found:
        witness = frozenset(src.uncoverable()) if src is not None else frozenset()
        return SolveReport("infeasible", infeasibility_witness=witness, nodes_explored=nodes,
                           wall_time=elapsed, method="bruteforce")
    x = [(int(mask) >> k) & 1 for k in range(n)]
    objective = program.evaluate(x)
    assignment, opened = {}, set()
    for bit, name in zip(x, program.names):
        if not bit:
            continue
        kind, a, b = _parse_name(name)
        if kind == "x":
            assignment[b] = a
        else:
            opened.add(a)
    if src is not None:
        if not isinstance(src, LocationInstance):
            opened = set(src.depot_ids)
        ref = evaluate_plan(src, assignment, opened)
        plan = AssignmentPlan(ref.assignment, ref.opened, objective, ref.rescue_distance_total_km,
                              ref.opening_cost_total_yuan, ref.depot_workload_km)
    else:
        plan = AssignmentPlan(assignment, frozenset(opened), objective, float("nan"), float("nan"))
    return SolveReport("optimal", plan, nodes_explored=nodes, wall_time=elapsed, method="bruteforce")


def _close(a, b, rtol=VERIFY_RTOL):
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def verify_plan(instance: CoverageInstance, plan: AssignmentPlan) -> list[Violation]:
    """Re-check a plan against the raw merged data, independent of any solver."""
    out = []
    merged = instance.merged
    p = merged.parameters
    is_location = isinstance(instance, LocationInstance)
    sources = set(instance.depot_ids)
    stations = set(instance.station_ids)

    missing = sorted(stations - set(plan.assignment))
    if missing:
        out.append(Violation("assignment", f"stations {missing} are not assigned to any rescue station"))
    extra = sorted(set(plan.assignment) - stations)
    if extra:
        out.append(Violation("unknown-station", f"assignment names unknown stations {extra}"))

    load = {i: 0.0 for i in instance.depot_ids}
    for b, j in enumerate(instance.station_ids):
        if j not in plan.assignment:
            continue
        i = plan.assignment[j]
        if i not in sources:
            kind = "candidate" if is_location else "depot"
            out.append(Violation("not-a-source", f"station {j} assigned to {i}, which is not a {kind}"))
            continue
        d = float(merged.effective_distance_km[merged.index[i], merged.index[j]])
        tau = d / p.speed_kmh
        if d > p.max_rescue_km + FEASIBILITY_TOL:
            out.append(Violation("distance", f"x_{i}_{j}: rescue distance {d:g} km exceeds {p.max_rescue_km:g} km"))
        if tau > p.max_rescue_hours + FEASIBILITY_TOL:
            out.append(Violation("time", f"x_{i}_{j}: rescue time {tau:g} h exceeds {p.max_rescue_hours:g} h"))
        if is_location and i not in plan.opened:
            out.append(Violation("link", f"x_{i}_{j} = 1 but y_{i} = 0 (station {i} not opened)"))
        load[i] += d * float(instance.accident_probability[b])

    for i, w in load.items():
        if w > instance.workload_cap_km * (1 + VERIFY_RTOL):
            out.append(Violation("workload", f"rescue station {i}: workload {w:.6g} km exceeds cap "
                                             f"{instance.workload_cap_km:.6g} km"))
        stored = plan.depot_workload_km.get(i)
        if stored is not None and not _close(stored, w):
            out.append(Violation("workload-mismatch", f"rescue station {i}: stored workload {stored} vs {w}"))

    if is_location:
        for k in sorted(instance.forced_open - plan.opened):
            out.append(Violation("forced-open", f"y_{k} must be 1 (station {k} already hosts a unit)"))
        stray = sorted(set(plan.opened) - sources)
        if stray:
            out.append(Violation("not-a-source", f"opened stations {stray} are not candidates"))

    if missing or extra:
        return out
    ref = evaluate_plan(instance, plan.assignment, set(plan.opened) & sources)
    for label, stored, fresh in (("objective", plan.objective_value, ref.objective_value),
                                 ("rescue distance", plan.rescue_distance_total_km, ref.rescue_distance_total_km),
                                 ("opening cost", plan.opening_cost_total_yuan, ref.opening_cost_total_yuan)):
        if not _close(stored, fresh):
            out.append(Violation("objective-mismatch", f"{label}: stored {stored} vs recomputed {fresh}"))
    return out
