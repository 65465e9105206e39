"""Graphviz DOT rendering of a coverage plan."""
from __future__ import annotations

from .lpformat import format_number
from .network import Network
from .solver import AssignmentPlan


def _quote(text):
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(network: Network, plan: AssignmentPlan) -> str:
    """Stations as nodes, track as labelled undirected edges, coverage as dashed arrows.

    A rescue station that covers itself is drawn with a bold double outline
    instead of a self-loop.
    """
    lines = ["digraph coverage {",
             "  graph [overlap=false, splines=true];",
             "  node [shape=circle, fontname=Helvetica];"]
    for sid in network.station_ids:
        st = network.by_id[sid]
        attrs = [f"label={_quote(st.name or sid)}"]
        if sid in plan.opened:
            attrs += ["style=filled", "fillcolor=palegreen"]
        if plan.assignment.get(sid) == sid:
            attrs += ["shape=doublecircle", "penwidth=2", 'comment="self-rescue"']
        lines.append(f"  {sid} [{', '.join(attrs)}];")
    for e in network.edges:
        lines.append(f"  {e.a} -> {e.b} [dir=none, label={_quote(format_number(e.length_km) + ' km')}];")
    for j in sorted(plan.assignment):
        i = plan.assignment[j]
        if i != j:
            lines.append(f"  {i} -> {j} [style=dashed, color=blue, constraint=false];")
    lines.append("}")
    return "\n".join(lines) + "\n"
