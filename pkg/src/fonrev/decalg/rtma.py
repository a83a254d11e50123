"""Route and transmission-mode assignment solved exactly by branch and bound.

Decision per request: one (route, mode) pair or blocked. Constraints are
per-link bandwidth capacity, non-negative margin of the chosen pair, and any
number of extra linear rows over the pair indicators (excluding and lock rows).
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp
from scipy.sparse import coo_matrix, lil_matrix

from ..netmodel import DEFAULT_CONSTANTS, ModeCatalog, Network, PhysicsConstants, Request, TransmissionMode
from ..pli import ase_nsr, sci_nsr

__all__ = [
    "RoutePair",
    "GRow",
    "RtmaSolution",
    "pair_margin",
    "precalc_pairs",
    "solve_rtma",
    "rtma_objective",
    "excluding_constraint",
    "lock_constraints",
]

PairKey = tuple[int, int, int]  # (request id, route index, mode index)


@dataclass(frozen=True)
class RoutePair:
    request: Request
    route_index: int
    route: tuple[int, ...]
    mode: TransmissionMode
    mode_index: int
    bandwidth_ghz: float
    margin: float
    links: tuple[tuple[int, int], ...]

    @property
    def key(self) -> PairKey:
        return (self.request.id, self.route_index, self.mode_index)


def pair_margin(request: Request, route: Sequence[int], mode: TransmissionMode, network: Network,
                phi: float, constants: PhysicsConstants = DEFAULT_CONSTANTS) -> float:
    spans = network.route_spans(route)
    width = mode.bandwidth(request.rate_gbps)
    node_term = sum((network.degree(v) + 1) / 2.0 for v in route)
    return (
        phi / mode.snr_th_linear
        - ase_nsr(spans, request.psd_w_per_ghz, constants)
        - sci_nsr(spans, request.psd_w_per_ghz, width, constants)
        - constants.eps_x * node_term
    )


def precalc_pairs(request: Request, routes: Sequence[Sequence[int]], catalog: ModeCatalog, phi: float,
                  network: Network, constants: PhysicsConstants = DEFAULT_CONSTANTS) -> list[RoutePair]:
    """Every (route, mode) pair with its residual margin, route-major order."""
    if not 0.0 <= phi <= 1.0:
        raise ValueError("phi must lie in [0, 1]")
    out = []
    for xi, route in enumerate(routes, start=1):
        route = tuple(route)
        links = network.route_links(route)
        for c, mode in enumerate(catalog):
            out.append(RoutePair(
                request, xi, route, mode, c, mode.bandwidth(request.rate_gbps),
                pair_margin(request, route, mode, network, phi, constants), links,
            ))
    return out


@dataclass(frozen=True)
class GRow:
    """``sum(coef * g) + constant  <sense>  rhs`` over pair indicators."""

    name: str
    coefs: Mapping[PairKey, float]
    sense: str
    rhs: float
    constant: float = 0.0

    def lhs(self, picks: Iterable[PairKey]) -> float:
        return math.fsum([self.constant] + [self.coefs.get(k, 0.0) for k in picks])

    def holds(self, picks: Iterable[PairKey], tol: float = 1e-9) -> bool:
        v = self.lhs(picks)
        if self.sense == "<=":
            return v <= self.rhs + tol
        if self.sense == ">=":
            return v >= self.rhs - tol
        return abs(v - self.rhs) <= tol


@dataclass(frozen=True)
class RtmaSolution:
    picks: Mapping[int, RoutePair | None]
    objective: float
    feasible: bool = True
    nodes: int = 0
    n_pairs: Mapping[int, int] = field(default_factory=dict)
    solver: str = "bnb"

    @property
    def accepted(self) -> list[RoutePair]:
        return [p for _, p in sorted(self.picks.items()) if p is not None]

    @property
    def revenue(self) -> float:
        return math.fsum(p.request.revenue for p in self.accepted)

    @property
    def b_vector(self) -> dict[int, int]:
        return {i: int(p is not None) for i, p in self.picks.items()}

    @property
    def g_vector(self) -> frozenset[PairKey]:
        """Keys of the pairs set to one."""
        return frozenset(p.key for p in self.accepted)


def rtma_objective(picks: Mapping[int, RoutePair | None], n_requests: int, eps2: float) -> float:
    chosen = [picks[i] for i in sorted(picks) if picks[i] is not None]
    revenue = math.fsum(p.request.revenue for p in chosen)
    if n_requests == 0:
        return revenue
    return revenue + eps2 * math.fsum(p.margin for p in chosen) / n_requests


class _Search:
    def __init__(self, pairs, network, eps2, extra, max_nodes):
        self.network = network
        self.eps2 = eps2
        self.max_nodes = max_nodes
        self.reqs = sorted(pairs, key=lambda i: (-_revenue(pairs[i]), i))
        self.n = len(pairs)
        self.rows = list(extra)
        forbidden = set()
        for r in self.rows:
            # "= 0" rows over non-negative coefficients simply remove pairs
            if r.sense == "=" and r.rhs - r.constant == 0.0 and all(c > 0 for c in r.coefs.values()):
                forbidden.update(r.coefs)
        self.options = {}
        for i in self.reqs:
            usable = [p for p in pairs[i] if p.margin >= 0.0 and p.key not in forbidden
                      and p.bandwidth_ghz <= network.spectrum_ghz]
            usable.sort(key=lambda p: (-p.margin, p.route_index, p.mode_index))
            self.options[i] = usable
        self.revenue = {i: _revenue(pairs[i]) for i in self.reqs}
        scale = eps2 / self.n if self.n else 0.0
        self.value = {p.key: p.request.revenue + scale * p.margin for i in self.reqs for p in self.options[i]}
        self.price = self._link_prices()
        best_plain, best_reduced = [], []
        for i in self.reqs:
            opts = self.options[i]
            best_plain.append(max((self.value[p.key] for p in opts), default=0.0))
            best_reduced.append(max(
                [0.0] + [self.value[p.key] - sum(self.price[uv] for uv in p.links) * p.bandwidth_ghz
                         for p in opts]
            ))
        self.plain_tail = _suffix(best_plain)
        self.best_value = dict(zip(self.reqs, best_plain))
        self.min_area = {
            i: min((p.bandwidth_ghz * len(p.links) for p in self.options[i]), default=math.inf)
            for i in self.reqs
        }
        self.margin_tail = _suffix([
            scale * max((p.margin for p in self.options[i]), default=0.0) for i in self.reqs
        ])
        self.lattice = _revenue_lattice([self.revenue[i] for i in self.reqs])
        self.reduced_tail = _suffix(best_reduced)
        # remaining min/max contribution of each extra row from requests at depth >= d
        self.row_lo, self.row_hi = [], []
        for r in self.rows:
            lo = [0.0] * (len(self.reqs) + 1)
            hi = [0.0] * (len(self.reqs) + 1)
            for d in range(len(self.reqs) - 1, -1, -1):
                vals = [0.0] + [r.coefs.get(p.key, 0.0) for p in self.options[self.reqs[d]]]
                lo[d] = lo[d + 1] + min(vals)
                hi[d] = hi[d + 1] + max(vals)
            self.row_lo.append(lo)
            self.row_hi.append(hi)
        self.used = {uv: 0.0 for uv in network.links}
        self.free_total = network.spectrum_ghz * len(network.links)
        self.priced_slack = math.fsum(lam * network.spectrum_ghz for lam in self.price.values())
        self.row_val = [r.constant for r in self.rows]
        self.choice: dict[int, RoutePair | None] = {}
        self.best: dict[int, RoutePair | None] | None = None
        self.best_val = -math.inf
        self.nodes = 0
        self.truncated = False

    def _rows_possible(self, d: int) -> bool:
        for k, r in enumerate(self.rows):
            lo = self.row_val[k] + self.row_lo[k][d]
            hi = self.row_val[k] + self.row_hi[k][d]
            if r.sense in ("<=", "=") and lo > r.rhs + 1e-9:
                return False
            if r.sense in (">=", "=") and hi < r.rhs - 1e-9:
                return False
        return True

    def _fits(self, p: RoutePair) -> bool:
        F = self.network.spectrum_ghz
        return all(self.used[uv] + p.bandwidth_ghz <= F + 1e-9 for uv in p.links)

    def _link_prices(self) -> dict[tuple[int, int], float]:
        """Capacity duals of the root LP relaxation (extra rows dropped).

        Any non-negative prices give a valid Lagrangian bound; the LP duals make
        it as tight as the relaxation at the root.
        """
        links = list(self.network.links)
        price = dict.fromkeys(links, 0.0)
        opts = [p for i in self.reqs for p in self.options[i]]
        if not opts:
            return price
        col = {uv: k for k, uv in enumerate(links)}
        rows, cols, vals = [], [], []
        req_row = {i: k for k, i in enumerate(self.reqs)}
        n_req = len(self.reqs)
        for j, p in enumerate(opts):
            rows.append(req_row[p.request.id])
            cols.append(j)
            vals.append(1.0)
            for uv in p.links:
                rows.append(n_req + col[uv])
                cols.append(j)
                vals.append(p.bandwidth_ghz)
        a_ub = coo_matrix((vals, (rows, cols)), shape=(n_req + len(links), len(opts))).tocsr()
        b_ub = np.concatenate([np.ones(n_req), np.full(len(links), self.network.spectrum_ghz)])
        c = -np.array([self.value[p.key] for p in opts])
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=(0, 1), method="highs")
        if res.status != 0:
            return price
        duals = -res.ineqlin.marginals[n_req:]
        for uv, lam in zip(links, duals):
            price[uv] = max(float(lam), 0.0)
        return price

    def _knapsack(self, d: int) -> float:
        """Remaining value if residual link-GHz were one shared pool."""
        rest = [i for i in self.reqs[d:] if any(self._fits(p) for p in self.options[i])]
        cap = self.free_total
        total = 0.0
        for i in sorted(rest, key=lambda i: -self.best_value[i] / self.min_area[i]):
            area = self.min_area[i]
            if area <= cap:
                cap -= area
                total += self.best_value[i]
            else:
                total += self.best_value[i] * cap / area
                break
        return total

    def _round(self, bound: float, d: int, marg: float) -> float:
        if self.lattice is None:
            return bound
        # revenue totals live on a lattice and remaining margins are >= 0
        steps = math.floor((bound - marg) / self.lattice + 1e-7)
        return min(bound, steps * self.lattice + marg + self.margin_tail[d])

    def _prune(self, d: int, rev: float, marg: float) -> bool:
        floor = self.best_val - 1e-9
        cheap = rev + marg + min(self.plain_tail[d], self.reduced_tail[d] + self.priced_slack)
        if self._round(cheap, d, marg) < floor:
            return True
        return self._round(rev + marg + self._knapsack(d), d, marg) < floor

    def _apply(self, p: RoutePair, sign: float) -> None:
        for uv in p.links:
            self.used[uv] += sign * p.bandwidth_ghz
        self.free_total -= sign * p.bandwidth_ghz * len(p.links)
        self.priced_slack -= sign * p.bandwidth_ghz * sum(self.price[uv] for uv in p.links)
        for k, r in enumerate(self.rows):
            c = r.coefs.get(p.key)
            if c:
                self.row_val[k] += sign * c

    def run(self):
        self._dfs(0, 0.0, 0.0)

    def _dfs(self, d: int, rev: float, marg: float) -> None:
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            self.truncated = True
            return
        if not self._rows_possible(d):
            return
        if d == len(self.reqs):
            val = rtma_objective(self.choice, self.n, self.eps2)
            if val > self.best_val:
                self.best_val = val
                self.best = dict(self.choice)
            return
        if self._prune(d, rev, marg):
            return
        i = self.reqs[d]
        scale = self.eps2 / self.n if self.n else 0.0
        for p in self.options[i]:
            if not self._fits(p):
                continue
            self._apply(p, 1.0)
            self.choice[i] = p
            self._dfs(d + 1, rev + self.revenue[i], marg + scale * p.margin)
            self._apply(p, -1.0)
            if self.truncated:
                return
        self.choice[i] = None
        self._dfs(d + 1, rev, marg)
        del self.choice[i]


def _suffix(xs: Sequence[float]) -> list[float]:
    out = [0.0] * (len(xs) + 1)
    for k in range(len(xs) - 1, -1, -1):
        out[k] = out[k + 1] + xs[k]
    return out


def _revenue_lattice(revenues: Sequence[float]) -> float | None:
    """Largest step dividing every revenue, or None if they are not simple rationals."""
    step = None
    for r in revenues:
        f = Fraction(r).limit_denominator(1000)
        if abs(float(f) - r) > 1e-12 * max(1.0, abs(r)):
            return None
        step = f if step is None else Fraction(math.gcd(step.numerator * f.denominator, f.numerator * step.denominator),
                                                step.denominator * f.denominator)
    return float(step) if step else None


def _revenue(pairs: Sequence[RoutePair]) -> float:
    return pairs[0].request.revenue if pairs else 0.0


def _milp_fallback(search: "_Search", extra: Sequence[GRow]):
    """Same ILP handed to HiGHS with a zero optimality gap."""
    opts = [p for i in search.reqs for p in search.options[i]]
    if not opts:
        return {}
    links = list(search.network.links)
    col = {p.key: j for j, p in enumerate(opts)}
    link_row = {uv: k for k, uv in enumerate(links)}
    req_row = {i: k for k, i in enumerate(search.reqs)}
    n_req, n_link = len(search.reqs), len(links)
    a = lil_matrix((n_req + n_link + len(extra), len(opts)))
    lo = np.full(a.shape[0], -np.inf)
    hi = np.concatenate([np.ones(n_req), np.full(n_link, search.network.spectrum_ghz), np.zeros(len(extra))])
    for j, p in enumerate(opts):
        a[req_row[p.request.id], j] = 1.0
        for uv in p.links:
            a[n_req + link_row[uv], j] = p.bandwidth_ghz
    for k, r in enumerate(extra):
        row = n_req + n_link + k
        for key, c in r.coefs.items():
            if key in col:
                a[row, col[key]] = c
        rhs = r.rhs - r.constant
        lo[row] = rhs if r.sense in (">=", "=") else -np.inf
        hi[row] = rhs if r.sense in ("<=", "=") else np.inf
    c = -np.array([search.value[p.key] for p in opts])
    res = milp(c, constraints=LinearConstraint(a.tocsr(), lo, hi), integrality=np.ones(len(opts)),
               bounds=Bounds(0, 1), options={"mip_rel_gap": 0.0, "presolve": True})
    if res.status == 2:
        return None
    if res.x is None:
        raise RuntimeError(f"MILP fallback failed: {res.message}")
    picks = {p.request.id: p for p, x in zip(opts, res.x) if x > 0.5}
    return picks


def solve_rtma(pairs: Mapping[int, Sequence[RoutePair]], network: Network, eps2: float = 0.001,
               extra: Sequence[GRow] = (), max_nodes: int | None = 5000,
               fallback: bool = True) -> RtmaSolution:
    """Optimum of the pair-selection ILP.

    Branch and bound runs first; if it needs more than ``max_nodes`` nodes and
    ``fallback`` is set, the model goes to HiGHS instead (``solver`` on the
    result says which one answered). ``max_nodes=None`` forces a complete
    branch-and-bound search.
    """
    search = _Search(pairs, network, eps2, extra, max_nodes)
    search.run()
    counts = {i: len(ps) for i, ps in pairs.items()}
    if search.truncated and fallback:
        picks = _milp_fallback(search, extra)
        if picks is None:
            return RtmaSolution({i: None for i in pairs}, -math.inf, False, search.nodes, counts, "highs")
        full = {i: picks.get(i) for i in sorted(pairs)}
        _verify(full, network, extra)
        return RtmaSolution(full, rtma_objective(full, len(pairs), eps2), True, search.nodes, counts, "highs")
    solver = "bnb" if not search.truncated else "bnb-truncated"
    if search.best is None:
        return RtmaSolution({i: None for i in pairs}, -math.inf, False, search.nodes, counts, solver)
    full = {i: search.best.get(i) for i in sorted(pairs)}
    return RtmaSolution(full, search.best_val, True, search.nodes, counts, solver)


def _verify(picks: Mapping[int, RoutePair | None], network: Network, extra: Sequence[GRow]) -> None:
    used: dict[tuple[int, int], float] = {}
    for p in picks.values():
        if p is None:
            continue
        if p.margin < 0:
            raise RuntimeError(f"pair {p.key} has negative margin")
        for uv in p.links:
            used[uv] = used.get(uv, 0.0) + p.bandwidth_ghz
    for uv, u in used.items():
        if u > network.spectrum_ghz + 1e-6:
            raise RuntimeError(f"link {uv} over capacity: {u}")
    keys = [p.key for p in picks.values() if p is not None]
    for r in extra:
        if not r.holds(keys, 1e-6):
            raise RuntimeError(f"row {r.name} violated")


def excluding_constraint(prev: RtmaSolution, k: int, c_count: int, name: str = "excl") -> GRow:
    """Row cutting off ``prev``'s pair vector and nothing else.

    Accepted requests contribute their previous pair indicator. A previously
    blocked request i contributes ``(1/|P_i|) * sum(1 - g)`` over its pairs, which is
    1 while it stays blocked and drops by ``1/|P_i|`` once any pair is chosen;
    with the full K routes, ``|P_i| = K*|C|``.
    """
    coefs: dict[PairKey, float] = {}
    constant = 0.0
    for i, p in prev.picks.items():
        if p is not None:
            coefs[p.key] = coefs.get(p.key, 0.0) + 1.0
            continue
        size = prev.n_pairs.get(i, k * c_count)
        constant += 1.0
        if size == 0:
            continue
        for key in _pair_keys(i, size, k, c_count):
            coefs[key] = coefs.get(key, 0.0) - 1.0 / size
    n = len(prev.picks)
    return GRow(name, coefs, "<=", n - 1.0 / (k * c_count), constant)


def _pair_keys(i: int, size: int, k: int, c_count: int) -> list[PairKey]:
    # pairs are enumerated route-major, so the first ``size`` keys are the real ones
    return [(i, xi, c) for xi in range(1, k + 1) for c in range(c_count)][:size]


def lock_constraints(l: int, pairs: Mapping[int, Sequence[RoutePair]], catalog: ModeCatalog) -> list[GRow]:
    """Force use of mode ``l`` (1-based) and forbid modes after it."""
    if not 1 <= l <= len(catalog):
        raise ValueError(f"lock index {l} outside 1..{len(catalog)}")
    must: dict[PairKey, float] = {}
    banned: dict[int, dict[PairKey, float]] = {c: {} for c in range(l, len(catalog))}
    for plist in pairs.values():
        for p in plist:
            if p.mode_index == l - 1:
                must[p.key] = 1.0
            elif p.mode_index >= l:
                banned[p.mode_index][p.key] = 1.0
    rows = [GRow(f"lock_use_{catalog[l - 1].name}", must, ">=", 1.0)]
    for c, coefs in banned.items():
        rows.append(GRow(f"lock_ban_{catalog[c].name}", coefs, "=", 0.0))
    return rows
