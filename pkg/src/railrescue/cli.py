"""Command-line entry point.

Exit status: 0 optimal (or plain success), 1 input error, 2 infeasible.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from .builder import (LocationInstance, UncoverableStationError, build_cmhse, build_lchse,
                      to_binary_program)
from .dot import render_dot
from .lpformat import export_lp
from .merge import build_merged_instance
from .network import (PARAMETER_NAMES, DisconnectedNetworkError, NetworkFormatError, load_network_file,
                      validate)
from .solver import solve_bruteforce, solve_exact, verify_plan

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2
SUBCOMMANDS = ("merge", "solve-coverage", "solve-location", "export-lp", "render")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    input_path: str
    output_path: str | None = None
    overrides: dict = field(default_factory=dict)
    model: str = "coverage"
    oracle: bool = False


def _coerce(name, text):
    if name not in PARAMETER_NAMES:
        raise InputError(f"unknown parameter {name!r}")
    if name in ("objective_sense", "hot_emu_rounding"):
        return text
    if name == "network_mileage_km" and text.lower() in ("none", ""):
        return None
    try:
        return int(text) if name == "emu_fleet_size" else float(text)
    except ValueError:
        raise InputError(f"parameter {name}: cannot parse {text!r}") from None


def parse_overrides(pairs):
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise InputError(f"override {pair!r} is not of the form name=value")
        name, value = pair.split("=", 1)
        name = name.strip()
        out[name] = _coerce(name, value.strip())
    return out


def _load(config):
    try:
        network = load_network_file(config.input_path)
    except FileNotFoundError:
        raise InputError(f"{config.input_path}: no such file") from None
    except NetworkFormatError as exc:
        raise InputError(str(exc)) from None
    unknown = sorted(set(config.overrides) - set(PARAMETER_NAMES))
    if unknown:
        raise InputError(f"unknown parameter(s) {unknown}")
    if config.overrides:
        try:
            network = network.with_parameters(**config.overrides)
        except TypeError as exc:
            raise InputError(str(exc)) from None
    problems = validate(network)
    if problems:
        raise InputError("invalid network:\n" + "\n".join(f"  {d}" for d in problems))
    return network


def _matrix_table(ids, matrix, fmt):
    width = max(8, max(len(fmt(v)) for v in matrix.ravel()) + 1) if matrix.size else 8
    head = "i\\j".rjust(6) + "".join(str(j).rjust(width) for j in ids)
    rows = [head]
    for a, i in enumerate(ids):
        rows.append(str(i).rjust(6) + "".join(fmt(v).rjust(width) for v in matrix[a]))
    return "\n".join(rows)


def _merge(network, config, out):
    merged = build_merged_instance(network)
    ids = merged.station_ids
    num = lambda v: f"{v:.2f}"
    for title, mat, fmt in (("shortest distance L_ij (km)", merged.base_distance_km, num),
                            ("exclusion maximum l_ij^max (km)", merged.exclusion_max_km, num),
                            ("effective distance D_ij (km)", merged.effective_distance_km, num),
                            ("rescue time tau_ij (h)", merged.rescue_time_h, lambda v: f"{v:.4f}"),
                            ("feasible", merged.feasible, lambda v: "yes" if v else "-")):
        out.write(f"{title}  [row i = rescue station, column j = served station]\n")
        out.write(_matrix_table(ids, np.asarray(mat), fmt) + "\n\n")
    if config.output_path:
        doc = {"station_ids": list(ids),
               "base_distance_km": merged.base_distance_km.tolist(),
               "exclusion_max_km": merged.exclusion_max_km.tolist(),
               "effective_distance_km": merged.effective_distance_km.tolist(),
               "rescue_time_h": merged.rescue_time_h.tolist(),
               "feasible": merged.feasible.tolist()}
        with open(config.output_path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def _instance(network, model):
    merged = build_merged_instance(network)
    if model == "location":
        return build_lchse(merged, network)
    return build_cmhse(merged, network)


def _solve(instance, oracle):
    if oracle:
        return solve_bruteforce(to_binary_program(instance))
    return solve_exact(instance)


def format_report(instance, report) -> str:
    lines = []
    location = isinstance(instance, LocationInstance)
    if not report.optimal:
        lines.append(f"status: infeasible ({report.method}, {report.nodes_explored} nodes)")
        lines.append(f"witness stations: {sorted(report.infeasibility_witness)}")
        return "\n".join(lines) + "\n"
    plan = report.plan
    merged = instance.merged
    lines.append(f"status: optimal ({report.method}, {report.nodes_explored} nodes, "
                 f"{report.wall_time:.3f} s)")
    lines.append(f"{'station':>8} {'rescue':>8} {'D_ij km':>12} {'tau_ij h':>10}")
    for j in sorted(plan.assignment):
        i = plan.assignment[j]
        lines.append(f"{j:>8} {i:>8} {merged.effective_distance(i, j):>12.2f} {merged.rescue_time(i, j):>10.4f}")
    lines.append("")
    lines.append(f"workload cap Q: {instance.workload_cap_km:.4f} km "
                 f"(hot standby units {instance.constants.hot_emu_count:g})")
    for i in instance.depot_ids:
        if i in plan.opened:
            lines.append(f"  rescue station {i}: workload {plan.depot_workload_km[i]:.4f} km")
    lines.append("")
    for i, covered in plan.coverage_areas().items():
        lines.append(f"rescue station {i} covers stations {', '.join(map(str, covered))}")
    lines.append("")
    if location:
        lines.append(f"opened: {sorted(plan.opened)}")
        lines.append(f"Z1 (total rescue distance): {plan.rescue_distance_total_km:.2f} km")
        lines.append(f"Z2 (opening cost): {plan.opening_cost_total_yuan:.2f} yuan")
        lines.append(f"Z (scalarized): {plan.objective_value:.2f} yuan")
    else:
        lines.append(f"Z (total rescue distance, {instance.objective_sense}): {plan.objective_value:.2f} km")
    return "\n".join(lines) + "\n"


def _plan_json(instance, report):
    plan = report.plan
    return {"status": report.status,
            "assignment": {str(j): i for j, i in sorted(plan.assignment.items())},
            "opened": sorted(plan.opened),
            "objective_value": plan.objective_value,
            "rescue_distance_total_km": plan.rescue_distance_total_km,
            "opening_cost_total_yuan": plan.opening_cost_total_yuan,
            "depot_workload_km": {str(i): w for i, w in plan.depot_workload_km.items()},
            "workload_cap_km": instance.workload_cap_km}


def run(config: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        if config.subcommand not in SUBCOMMANDS:
            raise InputError(f"unknown subcommand {config.subcommand!r}")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            network = _load(config)
            if config.subcommand == "merge":
                status = _merge(network, config, out)
            else:
                status = _dispatch(network, config, out, err)
        for w in caught:
            err.write(f"warning: {w.message}\n")
        return status
    except InputError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except DisconnectedNetworkError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except UncoverableStationError as exc:
        err.write(f"infeasible: {exc}\n")
        out.write(f"status: infeasible\nwitness stations: {list(exc.stations)}\n")
        return EXIT_INFEASIBLE
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT


def _dispatch(network, config, out, err):
    cmd = config.subcommand
    model = "location" if cmd == "solve-location" else "coverage" if cmd == "solve-coverage" else config.model
    instance = _instance(network, model)
    if cmd == "export-lp":
        text = export_lp(to_binary_program(instance), config.output_path)
        if not config.output_path:
            out.write(text)
        return EXIT_OK

    report = _solve(instance, config.oracle)
    if report.optimal:
        problems = verify_plan(instance, report.plan)
        if problems:
            for v in problems:
                err.write(f"verification: {v}\n")
            raise RuntimeError("solver returned a plan that fails verification")
    if cmd == "render":
        if not report.optimal:
            out.write(format_report(instance, report))
            return EXIT_INFEASIBLE
        text = render_dot(network, report.plan)
        if config.output_path:
            with open(config.output_path, "w") as fh:
                fh.write(text)
        else:
            out.write(text)
        return EXIT_OK

    out.write(format_report(instance, report))
    if report.optimal and config.output_path:
        with open(config.output_path, "w") as fh:
            json.dump(_plan_json(instance, report), fh, indent=2)
            fh.write("\n")
    return EXIT_OK if report.optimal else EXIT_INFEASIBLE


def build_parser():
    parser = argparse.ArgumentParser(prog="railrescue",
                                     description="Hot standby EMU location and coverage planning.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {"merge": "print merged distance matrices",
             "solve-coverage": "assign stations to the fixed rescue stations",
             "solve-location": "choose rescue stations among candidates and assign stations",
             "export-lp": "write the binary program in LP format",
             "render": "solve and write a Graphviz DOT rendering of the plan"}
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--input", "-i", required=True, help="network JSON document")
        p.add_argument("--output", "-o", help="output file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="NAME=VALUE",
                       help="override a parameter (repeatable)")
        p.add_argument("--sense", choices=("maximize", "minimize"),
                       help="objective sense of the coverage model")
        p.add_argument("--oracle", action="store_true",
                       help="solve by exhaustive enumeration (small instances only)")
        if name in ("export-lp", "render"):
            p.add_argument("--model", choices=("coverage", "location"), default="coverage")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        overrides = parse_overrides(args.overrides)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    if args.sense:
        overrides["objective_sense"] = args.sense
    config = RunConfig(args.subcommand, args.input, args.output, overrides,
                       getattr(args, "model", "coverage"), args.oracle)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
