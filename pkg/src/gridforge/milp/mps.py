"""Fixed-format MPS writer."""
from __future__ import annotations

import math
import re

from .model import MipModel, ModelError


class NameCollision(ModelError):
    pass


_ILLEGAL = re.compile(r"[^A-Za-z0-9_.\-\[\]()]")
OBJ_ROW = "OBJ"


def sanitize(name: str) -> str:
    out = _ILLEGAL.sub("_", name)
    if not out or out[0] in "$*":
        out = "_" + out
    return out


def _num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return format(v, ".12g")


def _line(f1="", f2="", f3="", f4="", f5="", f6="") -> str:
    # field starts: 2, 5, 15, 25, 40, 50 (1-based); long names push later fields right
    s = " " + f"{f1:<2}" + " " + f"{f2:<8}"
    if f3 or f4:
        s += "  " + f"{f3:<8}" + "  " + f"{f4:>12}"
    if f5 or f6:
        s += "   " + f"{f5:<8}" + "  " + f"{f6:>12}"
    return s.rstrip()


def export_mps(model: MipModel) -> str:
    """Render ``model`` as fixed-format MPS text.

    Binary variables are wrapped in INTORG/INTEND markers and carry a BV
    bound (FX when their bounds are collapsed). A max objective emits an
    OBJSENSE section. Names longer than eight characters are written whole.
    """
    vnames = [sanitize(v.name) for v in model.variables]
    cnames = [sanitize(c.name) for c in model.constraints]
    seen = {OBJ_ROW: "<objective>"}
    for orig, new in zip([v.name for v in model.variables] + [c.name for c in model.constraints],
                         vnames + cnames):
        if new in seen and seen[new] != orig:
            raise NameCollision(f"{orig!r} and {seen[new]!r} both sanitize to {new!r}")
        seen[new] = orig

    out = [f"NAME          {sanitize(model.name)}"]
    if model.sense == "max":
        out += ["OBJSENSE", "    MAX"]
    out.append("ROWS")
    out.append(_line("N", OBJ_ROW))
    tag = {"<=": "L", ">=": "G", "==": "E"}
    for con, name in zip(model.constraints, cnames):
        out.append(_line(tag[con.sense], name))

    columns = [[] for _ in model.variables]
    for j, c in sorted(model.objective.items()):
        columns[j].append((OBJ_ROW, c))
    for i, con in enumerate(model.constraints):
        for j, a in con.coeffs:
            columns[j].append((cnames[i], a))

    out.append("COLUMNS")
    in_int = False
    marker = 0
    for j, v in enumerate(model.variables):
        if v.binary and not in_int:
            out.append(_line("", f"MARKER{marker}", "'MARKER'", "", "'INTORG'"))
            in_int = True
        elif not v.binary and in_int:
            out.append(_line("", f"MARKER{marker}", "'MARKER'", "", "'INTEND'"))
            marker += 1
            in_int = False
        entries = columns[j]
        if not entries:
            # keep the column declared
            entries = [(OBJ_ROW, 0.0)]
        for k in range(0, len(entries), 2):
            r1, a1 = entries[k]
            if k + 1 < len(entries):
                r2, a2 = entries[k + 1]
                out.append(_line("", vnames[j], r1, _num(a1), r2, _num(a2)))
            else:
                out.append(_line("", vnames[j], r1, _num(a1)))
    if in_int:
        out.append(_line("", f"MARKER{marker}", "'MARKER'", "", "'INTEND'"))

    out.append("RHS")
    rhs = [(cnames[i], con.rhs) for i, con in enumerate(model.constraints) if con.rhs != 0.0]
    if model.objective_constant:
        rhs.insert(0, (OBJ_ROW, -model.objective_constant))
    for k in range(0, len(rhs), 2):
        r1, a1 = rhs[k]
        if k + 1 < len(rhs):
            r2, a2 = rhs[k + 1]
            out.append(_line("", "RHS", r1, _num(a1), r2, _num(a2)))
        else:
            out.append(_line("", "RHS", r1, _num(a1)))

    bounds = []
    for v, name in zip(model.variables, vnames):
        lo, hi = v.lb, v.ub
        if v.binary:
            if lo == hi:
                bounds.append(("FX", name, lo))
            elif (lo, hi) == (0.0, 1.0):
                bounds.append(("BV", name, None))
            else:
                bounds.append(("LO", name, lo))
                bounds.append(("UP", name, hi))
            continue
        if lo == hi:
            bounds.append(("FX", name, lo))
            continue
        if lo == -math.inf and hi == math.inf:
            bounds.append(("FR", name, None))
            continue
        if lo == -math.inf:
            bounds.append(("MI", name, None))
        elif lo != 0.0:
            bounds.append(("LO", name, lo))
        if hi != math.inf:
            bounds.append(("UP", name, hi))
    if bounds:
        out.append("BOUNDS")
        for kind, name, val in bounds:
            out.append(_line(kind, "BND", name, "" if val is None else _num(val)))
    out.append("ENDATA")
    return "\n".join(out) + "\n"
