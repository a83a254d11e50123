"""Solver-agnostic MILP container."""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

__all__ = ["Var", "Row", "MilpModel", "ModelBuilder"]

SENSES = ("<=", ">=", "=")


@dataclass(frozen=True)
class Var:
    name: str
    binary: bool = False
    lb: float = 0.0
    ub: float = math.inf

    def __post_init__(self):
        if self.binary:
            object.__setattr__(self, "lb", 0.0)
            object.__setattr__(self, "ub", 1.0)
        if self.lb > self.ub:
            raise ValueError(f"{self.name}: lb > ub")


@dataclass(frozen=True)
class Row:
    name: str
    terms: tuple[tuple[str, float], ...]
    sense: str
    rhs: float
    # big-M rows carry theta*(k - sum(binaries)); stored as (k, binaries)
    indicator: tuple[int, tuple[str, ...]] | None = None

    def disabled(self, values: Mapping[str, float]) -> bool:
        """True when the big-M indicator relaxes this row."""
        if self.indicator is None:
            return False
        k, names = self.indicator
        return k - sum(round(values.get(v, 0.0)) for v in names) >= 1

    def activity(self, values: Mapping[str, float]) -> float:
        return math.fsum(c * values.get(v, 0.0) for v, c in self.terms)

    def violation(self, values: Mapping[str, float]) -> float:
        """Amount by which the row is violated (<= 0 when satisfied)."""
        lhs = self.activity(values)
        if self.sense == "<=":
            return lhs - self.rhs
        if self.sense == ">=":
            return self.rhs - lhs
        return abs(lhs - self.rhs)


@dataclass(frozen=True)
class MilpModel:
    """Maximization model: named variables, linear rows, linear objective."""

    variables: Mapping[str, Var]
    rows: tuple[Row, ...]
    objective: tuple[tuple[str, float], ...]
    meta: Mapping[str, object]

    def objective_value(self, values: Mapping[str, float]) -> float:
        return math.fsum(c * values.get(v, 0.0) for v, c in self.objective)

    def row_families(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self.rows:
            fam = r.name.split("_", 1)[0]
            counts[fam] = counts.get(fam, 0) + 1
        return counts

    def var_families(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for name in self.variables:
            fam = name.split("_", 1)[0]
            counts[fam] = counts.get(fam, 0) + 1
        return counts


class ModelBuilder:
    def __init__(self):
        self._vars: dict[str, Var] = {}
        self._rows: list[Row] = []
        self._row_names: set[str] = set()
        self._obj: dict[str, float] = {}

    def var(self, name: str, binary: bool = False, lb: float = 0.0, ub: float = math.inf) -> str:
        if name in self._vars:
            raise ValueError(f"duplicate variable {name}")
        if len(name) > 255:
            raise ValueError(f"name too long: {name[:40]}...")
        self._vars[name] = Var(name, binary, lb, ub)
        return name

    def row(self, name: str, terms: Iterable[tuple[str, float]], sense: str, rhs: float,
            indicator: tuple[int, tuple[str, ...]] | None = None) -> None:
        if sense not in SENSES:
            raise ValueError(f"bad sense {sense!r}")
        if name in self._row_names:
            raise ValueError(f"duplicate row {name}")
        merged: dict[str, float] = {}
        for v, c in terms:
            if v not in self._vars:
                raise KeyError(f"row {name} references undeclared variable {v}")
            merged[v] = merged.get(v, 0.0) + c
        clean = tuple((v, c) for v, c in merged.items() if c != 0.0)
        self._row_names.add(name)
        self._rows.append(Row(name, clean, sense, float(rhs), indicator))

    def objective(self, var: str, coef: float) -> None:
        if var not in self._vars:
            raise KeyError(var)
        self._obj[var] = self._obj.get(var, 0.0) + coef

    def build(self, **meta) -> MilpModel:
        return MilpModel(
            MappingProxyType(dict(self._vars)),
            tuple(self._rows),
            tuple((v, c) for v, c in self._obj.items() if c != 0.0),
            MappingProxyType(meta),
        )
