"""The decomposition heuristic, its single-shot benchmark, and result CSV."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Sequence

from sklearn.base import BaseEstimator

from ..netmodel import DEFAULT_CONSTANTS, ModeCatalog, Network, PhysicsConstants, Request
from ..pli import evaluate
from ..pwlfit import PwlFit, default_fit
from .ksp import yen_ksp
from .rtma import RoutePair, RtmaSolution, excluding_constraint, lock_constraints, precalc_pairs, solve_rtma
from .sa import SaState, spectrum_assign

__all__ = [
    "DecAlgConfig",
    "HeuristicResult",
    "build_pairs",
    "dec_alg",
    "ref_a",
    "DecAlg",
    "RefA",
    "results_csv",
    "RESULT_COLUMNS",
    "SUMMARY_COLUMNS",
]

RESULT_COLUMNS = ("id", "accepted", "route", "mode", "b_ghz", "e_ghz", "snr_db")
SUMMARY_COLUMNS = ("revenue", "blocked_count", "runtime_ms")


@dataclass(frozen=True)
class DecAlgConfig:
    k: int = 4
    n_rtma: int = 40
    n_round: int = 2
    phi: float = 0.5
    eps2: float = 0.001
    policy: str = "sa-ra"
    guard_ghz: float = 12.5
    step_ghz: float | None = None
    seed: int = 0
    xci_model: str = "rmax"
    first_offset_db: float = 1.0
    max_nodes: int | None = 5000

    def __post_init__(self):
        if self.k < 1 or self.n_rtma < 1 or self.n_round < 1:
            raise ValueError("k, n_rtma and n_round must be >= 1")
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError("phi must lie in [0, 1]")
        if self.eps2 < 0:
            raise ValueError("eps2 must be >= 0")


@dataclass
class HeuristicResult:
    state: SaState
    rtma: RtmaSolution
    demands: tuple[Request, ...]
    runtime_ms: float
    candidates: int = 1
    trace: list[tuple[str, float]] = field(default_factory=list)

    @property
    def revenue(self) -> float:
        return self.state.revenue

    @property
    def plan(self):
        return self.state.plan

    @property
    def blocked(self) -> list[int]:
        return [d.id for d in self.demands if d.id not in self.state.assignments]


def build_pairs(network: Network, demands: Sequence[Request], catalog: ModeCatalog, k: int, phi: float,
                constants: PhysicsConstants = DEFAULT_CONSTANTS) -> dict[int, list[RoutePair]]:
    out = {}
    for d in demands:
        routes = yen_ksp(network, d.src, d.dst, k)
        out[d.id] = precalc_pairs(d, routes, catalog, phi, network, constants)
    return out


def _assign(sol, network, cfg, fit, constants):
    return spectrum_assign(
        sol, network, cfg.policy, cfg.n_round, cfg.guard_ghz, cfg.seed, cfg.step_ghz,
        cfg.xci_model, fit, cfg.first_offset_db, constants,
    )


def _check_ids(demands):
    ids = [d.id for d in demands]
    if len(set(ids)) != len(ids):
        raise ValueError("request ids must be unique")


def ref_a(network: Network, demands: Sequence[Request], catalog: ModeCatalog,
          config: DecAlgConfig = DecAlgConfig(), fit: PwlFit | None = None,
          constants: PhysicsConstants = DEFAULT_CONSTANTS) -> HeuristicResult:
    """One RTMA optimum followed by one spectrum-assignment pass."""
    _check_ids(demands)
    t0 = time.perf_counter()
    fit = fit if fit is not None else default_fit()
    pairs = build_pairs(network, demands, catalog, config.k, config.phi, constants)
    sol = solve_rtma(pairs, network, config.eps2, (), config.max_nodes)
    state = _assign(sol, network, config, fit, constants)
    ms = (time.perf_counter() - t0) * 1e3
    return HeuristicResult(state, sol, tuple(demands), ms, 1, [("base", state.revenue)])


def dec_alg(network: Network, demands: Sequence[Request], catalog: ModeCatalog,
            config: DecAlgConfig = DecAlgConfig(), fit: PwlFit | None = None,
            constants: PhysicsConstants = DEFAULT_CONSTANTS) -> HeuristicResult:
    """Best spectrum assignment over a family of RTMA optima.

    Candidates are the unrestricted optimum plus, for each catalog prefix
    1..l with mode l forced in, a chain of up to ``n_rtma`` optima each
    excluded from the next. Identical pair vectors are assigned only once.
    """
    _check_ids(demands)
    t0 = time.perf_counter()
    fit = fit if fit is not None else default_fit()
    pairs = build_pairs(network, demands, catalog, config.k, config.phi, constants)
    seen: dict[frozenset, SaState] = {}
    best: tuple[SaState, RtmaSolution] | None = None
    trace: list[tuple[str, float]] = []

    def consider(sol: RtmaSolution, label: str):
        nonlocal best
        g = sol.g_vector
        if g in seen:
            return
        state = _assign(sol, network, config, fit, constants)
        seen[g] = state
        trace.append((label, state.revenue))
        if best is None or state.revenue > best[0].revenue:
            best = (state, sol)

    consider(solve_rtma(pairs, network, config.eps2, (), config.max_nodes), "base")
    for l in range(1, len(catalog) + 1):
        rows = lock_constraints(l, pairs, catalog)
        for n in range(1, config.n_rtma + 1):
            sol = solve_rtma(pairs, network, config.eps2, rows, config.max_nodes)
            if not sol.feasible:
                break
            consider(sol, f"l{l}n{n}")
            rows = rows + [excluding_constraint(sol, config.k, len(catalog), f"excl_{l}_{n}")]
    assert best is not None
    ms = (time.perf_counter() - t0) * 1e3
    return HeuristicResult(best[0], best[1], tuple(demands), ms, len(seen), trace)


def results_csv(result: HeuristicResult) -> str:
    """Per-request rows, a blank line, then the summary block."""
    snr = {}
    plan = result.plan
    if plan:
        for a, br in zip(plan, evaluate(plan, result.state.network)):
            snr[a.id] = br.snr_db
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for d in sorted(result.demands, key=lambda d: d.id):
        a = result.state.assignments.get(d.id)
        if a is None:
            w.writerow([d.id, 0, "", "", "", "", ""])
        else:
            w.writerow([
                d.id, 1, "-".join(map(str, a.route)), a.mode.name,
                f"{a.channel.begin_ghz:.6g}", f"{a.channel.end_ghz:.6g}", f"{snr[d.id]:.4f}",
            ])
    w.writerow([])
    w.writerow(SUMMARY_COLUMNS)
    w.writerow([f"{result.revenue:.6g}", len(result.blocked), f"{result.runtime_ms:.1f}"])
    return buf.getvalue()


class _HeuristicEstimator(BaseEstimator):
    _runner = None

    def __init__(self, k=4, n_rtma=40, n_round=2, phi=0.5, eps2=0.001, policy="sa-ra",
                 guard_ghz=12.5, step_ghz=None, seed=0, xci_model="rmax", max_nodes=5000):
        self.k = k
        self.n_rtma = n_rtma
        self.n_round = n_round
        self.phi = phi
        self.eps2 = eps2
        self.policy = policy
        self.guard_ghz = guard_ghz
        self.step_ghz = step_ghz
        self.seed = seed
        self.xci_model = xci_model
        self.max_nodes = max_nodes

    def config(self) -> DecAlgConfig:
        return DecAlgConfig(**{k: v for k, v in self.get_params().items()})

    def fit(self, demands: Sequence[Request], network: Network, catalog: ModeCatalog, pwl: PwlFit | None = None):
        self.result_ = type(self)._runner(network, demands, catalog, self.config(), pwl)
        self.revenue_ = self.result_.revenue
        self.plan_ = self.result_.plan
        self.blocked_ = self.result_.blocked
        return self

    def to_csv(self) -> str:
        return results_csv(self.result_)


class DecAlg(_HeuristicEstimator):
    """Estimator-style wrapper: ``DecAlg(k=2).fit(demands, network, catalog).revenue_``."""

    _runner = staticmethod(dec_alg)


class RefA(_HeuristicEstimator):
    _runner = staticmethod(ref_a)
