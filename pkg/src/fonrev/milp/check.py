"""Feasibility checking and translation of lightpath plans into solution vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..pli import Assignment, ase_nsr, sci_nsr
from .model import MilpModel
from .rmax import names as n

__all__ = ["Violation", "CheckReport", "check_solution", "assignment_to_solution"]


@dataclass(frozen=True)
class Violation:
    name: str
    amount: float
    kind: str = "row"


@dataclass(frozen=True)
class CheckReport:
    violations: tuple[Violation, ...]
    objective: float
    unknown: tuple[str, ...] = field(default=())

    @property
    def feasible(self) -> bool:
        return not self.violations

    def by_family(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for v in self.violations:
            fam = v.name.split("_", 1)[0]
            out[fam] = out.get(fam, 0) + 1
        return out


def check_solution(model: MilpModel, sol: Mapping[str, float], tol: float = 1e-6) -> CheckReport:
    """Every violated row and bound at absolute tolerance ``tol``; missing values read as 0."""
    viol = []
    unknown = tuple(sorted(k for k in sol if k not in model.variables))
    for name, var in model.variables.items():
        val = sol.get(name, 0.0)
        if not math.isfinite(val):
            viol.append(Violation(name, math.inf, "bound"))
            continue
        if val < var.lb - tol:
            viol.append(Violation(name, var.lb - val, "bound"))
        elif val > var.ub + tol:
            viol.append(Violation(name, val - var.ub, "bound"))
        if var.binary and abs(val - round(val)) > tol:
            viol.append(Violation(name, abs(val - round(val)), "integrality"))
    for row in model.rows:
        amount = row.violation(sol)
        if amount > tol:
            viol.append(Violation(row.name, amount))
    return CheckReport(tuple(viol), model.objective_value(sol), unknown)


def assignment_to_solution(assignments: Sequence[Assignment], model: MilpModel) -> dict[str, float]:
    """Self-consistent vector for a lightpath plan (requests absent from the plan are blocked)."""
    ctx = model.meta["context"]
    net, catalog, fit, const = ctx.network, ctx.catalog, ctx.fit, ctx.constants
    ids = [d.id for d in ctx.demands]
    by_id = {d.id: d for d in ctx.demands}
    plan: dict[int, Assignment] = {}
    for a in assignments:
        if not a.accepted:
            continue
        if a.id not in by_id:
            raise KeyError(f"assignment for unknown request {a.id}")
        if a.id in plan:
            raise ValueError(f"request {a.id} assigned twice")
        net.route_links(a.route)
        plan[a.id] = a
    sol = {name: 0.0 for name in model.variables}
    mode_idx: dict[int, int] = {}
    F = net.spectrum_ghz

    for i, a in plan.items():
        try:
            c = catalog.names.index(a.mode.name)
        except ValueError:
            raise ValueError(f"request {i} uses mode {a.mode.name} outside the catalog") from None
        mode_idx[i] = c
        sol[n.B(i)] = 1.0
        sol[n.m(i, c)] = 1.0
        for u, v in a.links:
            sol[n.x(i, u, v)] = 1.0
            sol[n.xm(i, u, v, c)] = 1.0
        for v in a.route[:-1]:
            sol[n.p(i, v)] = 1.0
        for v in a.route[1:]:
            sol[n.q(i, v)] = 1.0
        sol[n.f(i)] = a.channel.center
        sol[n.df(i)] = a.channel.width
        spans = net.route_spans(a.route)
        d = by_id[i]
        sol[n.tase(i)] = ase_nsr(spans, d.psd_w_per_ghz, const)
        sol[n.tsci(i)] = sci_nsr(spans, d.psd_w_per_ghz, d.rate_gbps / catalog[c].se, const)

    for i in ids:
        for j in ids:
            if i == j:
                continue
            fi, fj = sol[n.f(i)], sol[n.f(j)]
            sol[n.w(i, j)] = 1.0 if (fi > fj or (fi == fj and i < j)) else 0.0
            dist = abs(fi - fj)
            sol[n.fd(i, j)] = dist
            fx = max(0.0, 0.5 * (sol[n.df(i)] + sol[n.df(j)]) - dist)
            sol[n.fx(i, j)] = fx
            sol[n.ov(i, j)] = min(sol[n.df(i)], sol[n.df(j)], fx)
            rj = by_id[j].rate_gbps
            for c in range(len(catalog)):
                sol[n.h(i, j, c)] = fit(2.0 * catalog[c].se * dist / rj)
    for i in ids:
        for j in ids:
            if i < j:
                cand = (sol[n.df(i)], sol[n.df(j)], sol[n.fx(i, j)])
                low = min(range(3), key=lambda k: (cand[k], k))
                for k in range(3):
                    sol[n.a(k + 1, i, j)] = 0.0 if k == low else 1.0

    for i, a in plan.items():
        di = by_id[i]
        total = sol[n.tase(i)] + sol[n.tsci(i)]
        for j in ids:
            if j == i:
                continue
            b = plan.get(j)
            gj = by_id[j].psd_w_per_ghz
            acc_x = acc_a = 0.0
            arrivals = set(b.route[1:]) if b is not None else set()
            if b is not None:
                cj = mode_idx[j]
                ov = sol[n.ov(i, j)]
                k_ad = const.eps_x * gj * catalog[mode_idx[i]].se / (di.rate_gbps * di.psd_w_per_ghz)
            for u, v in a.links:
                if b is not None and (u, v) in b.link_set:
                    acc_x += const.mu * gj**2 * net.span_count(u, v) * sol[n.h(i, j, cj)]
                if b is not None and u in arrivals:
                    acc_a += k_ad * ov
                sol[n.txci(i, j, v)] = acc_x
                sol[n.tad(i, j, v)] = acc_a
            total += acc_x + acc_a
        sol[n.tpli(i)] = total
    return sol
