"""CPLEX LP text export of binary programs, plus a minimal reader.

The reader understands exactly what :func:`export_lp` writes and exists for
round-trip checks; it is not a general LP parser.
"""
from __future__ import annotations

import re

import numpy as np

from .builder import BinaryProgram, Constraint

MAX_LINE = 78
_COMPARATORS = {"<=": "<=", "=<": "<=", "=": "=", ">=": ">=", "=>": ">="}


def format_number(value: float) -> str:
    """Up to 9 significant digits, never scientific notation."""
    value = float(value)
    if value == 0:
        return "0"
    return np.format_float_positional(value, precision=9, unique=False, fractional=False, trim="-")


def _terms(indices, coefficients, names):
    out = []
    for k, v in zip(indices, coefficients):
        mag = format_number(abs(v))
        sign = "-" if v < 0 else "+"
        term = names[k] if mag == "1" else f"{mag} {names[k]}"
        out.append((sign, term))
    return out


def _wrap(head, pieces):
    lines, line = [], head
    for piece in pieces:
        if len(line) + 1 + len(piece) > MAX_LINE and line.strip():
            lines.append(line)
            line = "  " + piece
        else:
            line = f"{line} {piece}" if line else piece
    lines.append(line)
    return lines


def _expression(indices, coefficients, names):
    pieces = []
    for n, (sign, term) in enumerate(_terms(indices, coefficients, names)):
        if n == 0:
            pieces.append(term if sign == "+" else f"-{term}")
        else:
            pieces.append(f"{sign} {term}")
    return pieces or ["0"]


def export_lp(program: BinaryProgram, destination=None) -> str:
    """Render ``program``; also write it to ``destination`` (path or file) if given."""
    names = program.names
    lines = ["\\ binary program: rescue station coverage",
             "Maximize" if program.sense == "maximize" else "Minimize"]
    obj_idx = range(len(names))
    lines += _wrap(" obj:", _expression(obj_idx, program.objective, names))
    lines.append("Subject To")
    for r, row in enumerate(program.constraints, start=1):
        pieces = _expression(row.indices, row.coefficients, names)
        pieces += [row.comparator, format_number(row.rhs)]
        lines += _wrap(f" c{r}:", pieces)
    lines.append("Binary")
    lines += _wrap("", list(names)) if names else []
    lines.append("End")
    text = "\n".join(lines) + "\n"
    if destination is not None:
        if hasattr(destination, "write"):
            destination.write(text)
        else:
            with open(destination, "w") as fh:
                fh.write(text)
    return text


_TOKEN = re.compile(r"<=|=<|>=|=>|=|[+-]|[^\s+\-<>=]+")


def _parse_linear(tokens, index):
    """Terms of a linear expression as ``{var: coef}`` and a constant."""
    coefs, const = {}, 0.0
    sign, number = 1.0, None
    for tok in tokens:
        if tok == "+":
            continue
        if tok == "-":
            sign = -sign
            continue
        try:
            value = float(tok)
        except ValueError:
            if tok not in index:
                index[tok] = len(index)
            coefs[tok] = coefs.get(tok, 0.0) + sign * (1.0 if number is None else number)
            sign, number = 1.0, None
            continue
        if number is not None:
            raise ValueError(f"two numbers in a row near {tok!r}")
        number = value
    if number is not None:
        const += sign * number
    return coefs, const


def read_lp(text: str) -> BinaryProgram:
    sections = {"maximize": [], "minimize": [], "subject to": [], "binary": []}
    current, sense = None, None
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].rstrip()
        key = line.strip().lower()
        if not key:
            continue
        if key in ("maximize", "minimize"):
            current, sense = key, key
            continue
        if key in ("subject to", "binary", "binaries"):
            current = "binary" if key.startswith("binar") else key
            continue
        if key == "end":
            break
        if current is None:
            raise ValueError(f"content before any section: {raw!r}")
        if line.startswith("  ") and sections[current]:
            sections[current][-1] += " " + line.strip()
        else:
            sections[current].append(line.strip())
    if sense is None:
        raise ValueError("no objective section")

    index = {}
    obj_line = sections[sense][0] if sections[sense] else "obj: 0"
    obj_coefs, _ = _parse_linear(_TOKEN.findall(obj_line.split(":", 1)[1]), index)
    rows = []
    for stmt in sections["subject to"]:
        body = stmt.split(":", 1)[1]
        toks = _TOKEN.findall(body)
        cmp_pos = next(k for k, t in enumerate(toks) if t in _COMPARATORS)
        lhs, _ = _parse_linear(toks[:cmp_pos], index)
        _, rhs = _parse_linear(toks[cmp_pos + 1:], index)
        rows.append((lhs, _COMPARATORS[toks[cmp_pos]], rhs))
    binaries = " ".join(sections["binary"]).split()
    for name in binaries:
        index.setdefault(name, len(index))
    order = binaries + [n for n in index if n not in set(binaries)]
    pos = {n: k for k, n in enumerate(order)}
    objective = np.array([obj_coefs.get(n, 0.0) for n in order], dtype=float)
    constraints = []
    for lhs, comparator, rhs in rows:
        if comparator == ">=":
            lhs = {n: -v for n, v in lhs.items()}
            comparator, rhs = "<=", -rhs
        constraints.append(Constraint(tuple(pos[n] for n in lhs), tuple(lhs.values()), comparator, rhs))
    return BinaryProgram(tuple(order), objective, sense, tuple(constraints))
