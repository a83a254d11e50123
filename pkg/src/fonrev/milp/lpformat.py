"""CPLEX-style LP text export and ``name value`` solution import."""

from __future__ import annotations

import math

from .model import MilpModel

__all__ = ["export_lp", "parse_solution", "format_solution"]

_WRAP = 200


def _num(x: float) -> str:
    return format(x, ".17g")


def _expr(terms, indent: str) -> list[str]:
    parts = []
    for v, c in terms:
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        parts.append(f"{sign} {v}" if mag == 1.0 else f"{sign} {_num(mag)} {v}")
    lines, cur = [], indent
    for p in parts:
        if len(cur) + len(p) + 1 > _WRAP and cur.strip():
            lines.append(cur.rstrip())
            cur = indent
        cur += p + " "
    lines.append(cur.rstrip())
    return lines


def export_lp(model: MilpModel, title: str = "rmax") -> str:
    out = [f"\\ {title}"]
    out.append("Maximize")
    if model.objective:
        body = _expr(model.objective, " ")
        body[0] = " obj: " + body[0].strip()
        out.extend(body)
    elif model.variables:
        out.append(f" obj: 0 {next(iter(model.variables))}")
    out.append("Subject To")
    for r in model.rows:
        body = _expr(r.terms, "   ")
        body[0] = f" {r.name}: " + body[0].strip()
        body[-1] += f" {r.sense} {_num(r.rhs)}"
        out.extend(body)
    bounds = []
    binaries = []
    for v in model.variables.values():
        if v.binary:
            binaries.append(v.name)
            continue
        if v.lb == -math.inf and v.ub == math.inf:
            bounds.append(f" {v.name} free")
        else:
            lo = "-inf" if v.lb == -math.inf else _num(v.lb)
            hi = "+inf" if v.ub == math.inf else _num(v.ub)
            bounds.append(f" {lo} <= {v.name} <= {hi}")
    out.append("Bounds")
    out.extend(bounds)
    out.append("Binary")
    out.extend(f" {b}" for b in binaries)
    out.append("End")
    return "\n".join(out) + "\n"


def parse_solution(text: str) -> dict[str, float]:
    """Read whitespace-separated ``name value`` lines; ``#`` starts a comment."""
    sol = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<name> <value>'")
        try:
            sol[parts[0]] = float(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: bad value {parts[1]!r}") from None
    return sol


def format_solution(values: dict[str, float], model: MilpModel | None = None) -> str:
    order = list(model.variables) if model is not None else sorted(values)
    return "".join(f"{k} {_num(values.get(k, 0.0))}\n" for k in order)
