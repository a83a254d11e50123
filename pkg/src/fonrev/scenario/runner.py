"""Sweep configuration, execution and CSV emission."""

from __future__ import annotations

import csv
import io
import itertools
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib.resources import files
from pathlib import Path
from typing import Sequence

from ..decalg import DecAlgConfig, dec_alg, ref_a
from ..milp import build_rmax, export_lp
from ..netmodel import (
    ModeCatalog, Network, Request, dbm_to_w, default_table, load_catalog, load_demands, load_topology, w_to_dbm,
)
from ..pwlfit import default_fit
from .demands import gen_demands

__all__ = [
    "ALGORITHMS",
    "CSV_COLUMNS",
    "ScenarioConfig",
    "RunRecord",
    "load_network",
    "run_scenario",
    "emit_csv",
    "summarize",
]

ALGORITHMS = ("decalg", "refa", "milp-export")
CSV_COLUMNS = (
    "point", "psd_dbm_per_ghz", "algorithm", "catalog", "n_requests", "run", "seed",
    "revenue", "accepted", "blocked", "runtime_ms", "status", "revenue_sd",
)
BUILTIN_PREFIX = "builtin:"


def _resolve(path: str) -> str:
    if path.startswith(BUILTIN_PREFIX):
        name = path[len(BUILTIN_PREFIX):]
        res = files("fonrev.data").joinpath(name if name.endswith(".txt") else name + ".txt")
        if not res.is_file():
            raise FileNotFoundError(f"no bundled file {name!r}")
        return res.read_text()
    return Path(path).read_text()


def load_network(path: str, length_scale: float = 1.0) -> Network:
    """Read a topology from disk or ``builtin:<name>`` (``nsf``, ``six_node``)."""
    return load_topology(_resolve(path), length_scale=length_scale)


@dataclass(frozen=True)
class ScenarioConfig:
    topology: str
    length_scale: float = 1.0
    demands: str | None = None
    n_requests: tuple[int, ...] = (10,)
    rates: tuple[float, ...] = (1000.0,)
    # None keeps the PSD written in a demand file (generated demands default to -18)
    psd_dbm_per_ghz: tuple[float, ...] | None = None
    catalogs: tuple[str, ...] = ("adaptive:2,2",)
    catalog_file: str | None = None
    algorithm: str = "decalg"
    runs: int = 10
    seed: int = 0
    heuristic: DecAlgConfig = field(default_factory=DecAlgConfig)
    eps1: float = 0.01
    lp_dir: str | None = None
    jobs: int = 1

    def __post_init__(self):
        for name in ("n_requests", "rates", "catalogs"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")
        if self.psd_dbm_per_ghz is not None:
            object.__setattr__(self, "psd_dbm_per_ghz", tuple(self.psd_dbm_per_ghz))
            if not self.psd_dbm_per_ghz:
                raise ValueError("psd sweep must not be empty")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if any(n < 1 for n in self.n_requests):
            raise ValueError("request counts must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        for p in (self.topology, self.demands, self.catalog_file):
            if p is not None and not p.startswith(BUILTIN_PREFIX) and not Path(p).is_file():
                raise FileNotFoundError(f"no such file: {p}")
        if self.algorithm == "milp-export" and self.lp_dir is None:
            raise ValueError("milp-export needs lp_dir")

    def points(self) -> list[tuple[float | None, str, int | None]]:
        psds = self.psd_dbm_per_ghz if self.psd_dbm_per_ghz is not None else (
            (None,) if self.demands else (-18.0,))
        counts = (None,) if self.demands else self.n_requests
        return list(itertools.product(psds, self.catalogs, counts))


@dataclass(frozen=True)
class RunRecord:
    point: int
    psd_dbm_per_ghz: float | None
    algorithm: str
    catalog: str
    n_requests: int
    run: int
    seed: int
    revenue: float
    accepted: int
    blocked: int
    runtime_ms: float
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _demands_for(cfg: ScenarioConfig, net: Network, psd, n, seed) -> list[Request]:
    if cfg.demands is not None:
        reqs = load_demands(_resolve(cfg.demands), net)
        if psd is not None:
            reqs = [replace(r, psd_w_per_ghz=dbm_to_w(psd)) for r in reqs]
        return reqs
    return gen_demands(seed, n, cfg.rates, net, psd)


def _one_run(cfg: ScenarioConfig, point: int, psd, cat_spec: str, n, run: int) -> RunRecord:
    seed = cfg.seed + run
    t0 = time.perf_counter()
    n_req = n if n is not None else 0
    try:
        net = load_network(cfg.topology, cfg.length_scale)
        table = load_catalog(_resolve(cfg.catalog_file)) if cfg.catalog_file else default_table()
        catalog = ModeCatalog.parse(table, cat_spec)
        demands = _demands_for(cfg, net, psd, n, seed)
        n_req = len(demands)
        if psd is None:
            psd = w_to_dbm(demands[0].psd_w_per_ghz)
        if cfg.algorithm == "milp-export":
            model = build_rmax(net, demands, catalog, default_fit(), cfg.eps1)
            out = Path(cfg.lp_dir) / f"rmax_p{point}_r{run}.lp"
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(export_lp(model, f"rmax point {point} run {run}"))
            ms = (time.perf_counter() - t0) * 1e3
            return RunRecord(point, psd, cfg.algorithm, cat_spec, n_req, run, seed,
                             math.nan, 0, 0, ms, f"exported {out}")
        algo = dec_alg if cfg.algorithm == "decalg" else ref_a
        res = algo(net, demands, catalog, replace(cfg.heuristic, seed=seed))
        return RunRecord(point, psd, cfg.algorithm, cat_spec, n_req, run, seed, res.revenue,
                         len(res.plan), len(res.blocked), res.runtime_ms)
    except Exception as exc:  # a failed run is recorded, the sweep goes on
        ms = (time.perf_counter() - t0) * 1e3
        return RunRecord(point, psd, cfg.algorithm, cat_spec, n_req, run, seed,
                         math.nan, 0, 0, ms, f"failed: {type(exc).__name__}: {exc}")


def _star(args):
    return _one_run(*args)


def run_scenario(config: ScenarioConfig) -> list[RunRecord]:
    """Every (sweep point, run) executed and ordered by point then run."""
    jobs = [
        (config, p, psd, cat, n, r)
        for p, (psd, cat, n) in enumerate(config.points())
        for r in range(config.runs)
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            recs = list(pool.map(_star, jobs))
    else:
        recs = [_star(j) for j in jobs]
    return sorted(recs, key=lambda r: (r.point, r.run))


def summarize(records: Sequence[RunRecord]) -> dict[int, tuple[float, float, int]]:
    """Per point: (mean revenue, sample sd, successful run count)."""
    out = {}
    for point, grp in itertools.groupby(sorted(records, key=lambda r: r.point), key=lambda r: r.point):
        vals = [r.revenue for r in grp if r.ok]
        if not vals:
            out[point] = (math.nan, math.nan, 0)
            continue
        sd = statistics.stdev(vals) if len(vals) > 1 else 0.0
        out[point] = (statistics.fmean(vals), sd, len(vals))
    return out


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "" if math.isnan(x) else format(x, ".10g")
    return str(x)


def emit_csv(records: Sequence[RunRecord]) -> str:
    """Header, one row per run, then a ``run=mean`` row for every point with several runs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    records = sorted(records, key=lambda r: (r.point, r.run))
    for r in records:
        w.writerow([_fmt(v) for v in (
            r.point, r.psd_dbm_per_ghz, r.algorithm, r.catalog, r.n_requests, r.run, r.seed,
            r.revenue, r.accepted, r.blocked, r.runtime_ms, r.status, None,
        )])
    stats = summarize(records)
    for point, grp in itertools.groupby(records, key=lambda r: r.point):
        grp = list(grp)
        if len(grp) < 2:
            continue
        ok = [r for r in grp if r.ok]
        mean, sd, count = stats[point]
        first = grp[0]
        acc = statistics.fmean(r.accepted for r in ok) if ok else math.nan
        blk = statistics.fmean(r.blocked for r in ok) if ok else math.nan
        rt = statistics.fmean(r.runtime_ms for r in grp)
        w.writerow([_fmt(v) for v in (
            first.point, first.psd_dbm_per_ghz, first.algorithm, first.catalog, first.n_requests,
            "mean", None, mean, acc, blk, rt, f"summary of {count}/{len(grp)}", sd,
        )])
    return buf.getvalue()
