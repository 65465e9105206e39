import dataclasses
import itertools

import numpy as np
import pytest

from helpers import make_network, random_case
from railrescue.builder import (BinaryProgram, Constraint, UncoverableStationError, build_cmhse,
                                build_lchse, to_binary_program)
from railrescue.merge import build_merged_instance
from railrescue.network import Edge, Network
from railrescue.solver import evaluate_plan, solve_bruteforce, solve_exact, verify_plan


def _build(net, location=False, check=True):
    merged = build_merged_instance(net)
    return (build_lchse if location else build_cmhse)(merged, net, check=check)


def _cases(location, seeds=range(60)):
    for seed in seeds:
        try:
            yield _build(random_case(seed, location=location), location)
        except UncoverableStationError:
            continue


def test_single_depot_single_station():
    inst = _build(make_network([(1, 2, 130)], depots=(1,)))
    report = solve_exact(inst)
    assert report.optimal
    assert report.plan.assignment == {1: 1, 2: 1}
    assert report.plan.objective_value == 130 + 65
    assert verify_plan(inst, report.plan) == []


def test_uncoverable_gives_witness(path_net):
    inst = _build(path_net.with_parameters(max_rescue_km=150), check=False)
    report = solve_exact(inst)
    assert report.status == "infeasible"
    assert report.infeasibility_witness == {3}
    assert report.plan is None
    brute = solve_bruteforce(to_binary_program(inst))
    assert brute.status == "infeasible" and brute.infeasibility_witness == {3}


def test_workload_infeasible_reports_a_station(path_net):
    inst = _build(path_net.with_parameters(network_mileage_km=1.0))
    report = solve_exact(inst)
    assert report.status == "infeasible"
    assert len(report.infeasibility_witness) == 1
    assert report.infeasibility_witness <= set(path_net.station_ids)


def test_bruteforce_empty_program():
    prog = BinaryProgram((), np.zeros(0), "maximize", ())
    report = solve_bruteforce(prog)
    assert report.optimal and report.plan.objective_value == 0


def test_bruteforce_forced_zero():
    prog = BinaryProgram(("x_1_1",), np.array([5.0]), "maximize",
                         (Constraint((0,), (1.0,), "<=", 0.0),))
    report = solve_bruteforce(prog)
    assert report.optimal
    assert report.plan.objective_value == 0
    assert report.plan.assignment == {}


def test_bruteforce_limit():
    prog = BinaryProgram(tuple(f"x_1_{k}" for k in range(5)), np.ones(5), "maximize", ())
    with pytest.raises(ValueError, match="limit"):
        solve_bruteforce(prog, variable_limit=4)


def _itertools_optimum(inst):
    """Enumerate all 2^(depots*stations) x-vectors directly from the merged data."""
    m = inst.merged
    p = m.parameters
    sign = 1 if inst.objective_sense == "maximize" else -1
    dep, sts = inst.depot_ids, inst.station_ids
    best = None
    for bits in itertools.product((0, 1), repeat=len(dep) * len(sts)):
        x = np.array(bits).reshape(len(sts), len(dep))
        if not np.all(x.sum(axis=1) == 1):
            continue
        ok, z, load = True, 0.0, {i: 0.0 for i in dep}
        for b, j in enumerate(sts):
            i = dep[int(np.argmax(x[b]))]
            d = m.effective_distance(i, j)
            if d > p.max_rescue_km + 1e-9 or d / p.speed_kmh > p.max_rescue_hours + 1e-9:
                ok = False
                break
            z += d
            load[i] += d * inst.accident_probability[b]
        if ok and all(w <= inst.workload_cap_km + 1e-9 for w in load.values()):
            best = z if best is None else (max(best, z) if sign > 0 else min(best, z))
    return best


def test_two_depots_three_stations_match_enumeration():
    rng = np.random.default_rng(7)
    checked = 0
    for trial in range(25):
        a, b = rng.integers(10, 400, size=2)
        net = make_network([(1, 2, int(a)), (2, 3, int(b))], depots=(1, 3),
                           max_rescue_km=float(rng.integers(100, 800)),
                           network_mileage_km=float(rng.integers(20, 2000)) * 1000,
                           objective_sense=["maximize", "minimize"][trial % 2])
        inst = _build(net, check=False)
        expected = _itertools_optimum(inst)
        report = solve_exact(inst)
        if expected is None:
            assert report.status == "infeasible"
        else:
            assert report.plan.rescue_distance_total_km == pytest.approx(expected, rel=1e-12)
            checked += 1
    assert checked >= 10


@pytest.mark.parametrize("location", [False, True])
def test_small_instances_match_bruteforce(location):
    for inst in _cases(location):
        prog = to_binary_program(inst)
        if sum(n.startswith("x_") for n in prog.names) > 12:
            continue
        a, b = solve_exact(inst), solve_bruteforce(prog)
        assert a.status == b.status
        if a.optimal:
            assert a.plan.objective_value == b.plan.objective_value
            assert a.plan.assignment == b.plan.assignment


@pytest.mark.parametrize("location", [False, True])
def test_pruning_is_sound(location):
    for inst in _cases(location):
        a, b = solve_exact(inst), solve_exact(inst, prune=False)
        assert a.status == b.status
        assert a.nodes_explored <= b.nodes_explored
        if a.optimal:
            assert a.plan == b.plan


def test_linking_holds_on_location_plans():
    for inst in _cases(True):
        report = solve_exact(inst)
        if report.optimal:
            assert set(report.plan.assignment.values()) <= report.plan.opened
            assert inst.forced_open <= report.plan.opened
            assert verify_plan(inst, report.plan) == []


def test_monotone_in_reach_limits():
    for seed in range(60):
        net = random_case(seed).with_parameters(objective_sense="maximize")
        base = solve_exact(_build(net, check=False))
        if not base.optimal:
            continue
        p = net.parameters
        for wider in (net.with_parameters(max_rescue_km=p.max_rescue_km * 1.5),
                      net.with_parameters(max_rescue_hours=p.max_rescue_hours * 1.5)):
            grown = solve_exact(_build(wider))
            assert grown.plan.objective_value >= base.plan.objective_value - 1e-9


def _scaled(net, k):
    p = net.parameters
    return Network(net.stations, tuple(Edge(e.a, e.b, e.length_km * k) for e in net.edges),
                   dataclasses.replace(p, max_rescue_km=p.max_rescue_km * k,
                                       max_rescue_hours=p.max_rescue_hours * k,
                                       network_mileage_km=p.network_mileage_km * k))


def test_scaling_equivariance():
    for seed in range(40):
        net = random_case(seed)
        base = solve_exact(_build(net, check=False))
        scaled = solve_exact(_build(_scaled(net, 3.0), check=False))
        assert base.status == scaled.status
        if base.optimal:
            assert base.plan.assignment_vector() == scaled.plan.assignment_vector()
            assert scaled.plan.rescue_distance_total_km == pytest.approx(
                3 * base.plan.rescue_distance_total_km, rel=1e-9)


def test_verify_flags_link_violation():
    net = make_network([(1, 2, 100), (2, 3, 60)], depots=(1,), candidates=(3,))
    inst = _build(net, location=True)
    plan = evaluate_plan(inst, {1: 1, 2: 1, 3: 3}, {1})
    codes = [v.code for v in verify_plan(inst, plan)]
    assert codes == ["link"]
    assert "y_3" in str(verify_plan(inst, plan)[0])


def test_verify_flags_objective_mismatch(path_net):
    inst = _build(path_net)
    plan = solve_exact(inst).plan
    bad = dataclasses.replace(plan, objective_value=plan.objective_value + 1)
    problems = verify_plan(inst, bad)
    assert [v.code for v in problems] == ["objective-mismatch"]
    assert str(plan.objective_value + 1) in problems[0].message
    assert str(plan.objective_value) in problems[0].message


def test_verify_flags_limits_and_structure(path_net):
    inst = _build(path_net.with_parameters(max_rescue_km=150, max_rescue_hours=0.4), check=False)
    plan = evaluate_plan(inst, {1: 1, 2: 1, 3: 1}, {1})
    codes = {v.code for v in verify_plan(inst, plan)}
    assert {"distance", "time"} <= codes
    partial = evaluate_plan(inst, {1: 1, 2: 1, 3: 1}, {1})
    partial = dataclasses.replace(partial, assignment={1: 1, 2: 1})
    assert "assignment" in {v.code for v in verify_plan(inst, partial)}
    stray = dataclasses.replace(plan, assignment={1: 1, 2: 2, 3: 1})
    assert "not-a-source" in {v.code for v in verify_plan(inst, stray)}


def test_verify_flags_workload_and_forced(path_net):
    inst = _build(path_net.with_parameters(network_mileage_km=1.0), location=True)
    plan = evaluate_plan(inst, {1: 1, 2: 1, 3: 1}, set())
    codes = {v.code for v in verify_plan(inst, plan)}
    assert {"workload", "forced-open", "link"} <= codes
