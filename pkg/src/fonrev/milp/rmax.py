"""Builder for the revenue-maximization MILP with PLI-aware QoT rows.

Variable names (request ids i, j; nodes u, v; mode index c; PWL piece k):

    B_i  q_i_v  p_i_v  x_i_u_v  xm_i_u_v_c  m_i_c
    f_i  df_i  fd_i_j  ov_i_j  fx_i_j  w_i_j  a1_i_j a2_i_j a3_i_j
    tase_i  tsci_i  txci_i_j_v  tad_i_j_v  tpli_i  h_i_j_c

Row-name prefixes group the constraint families; see ``ROW_FAMILIES``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

from ..netmodel import DEFAULT_CONSTANTS, ModeCatalog, Network, PhysicsConstants, Request
from ..pli import ase_nsr, sci_nsr
from ..pwlfit import PwlFit
from .model import MilpModel, ModelBuilder

__all__ = ["build_rmax", "auto_theta", "PwlDomainError", "ROW_FAMILIES", "names"]

ROW_FAMILIES = {
    "inq": "incoming degree",
    "outp": "outgoing degree",
    "flow": "flow conservation",
    "mode": "one mode per accepted request",
    "bw": "bandwidth from bit-rate and mode",
    "wsum": "frequency-order complement",
    "fhi": "channel upper edge within F",
    "flo": "channel lower edge within 0",
    "fdu": "center distance upper (order-dependent)",
    "fdl": "center distance lower",
    "ova1": "overlap >= width_i unless released",
    "ova2": "overlap >= width_j unless released",
    "ova3": "overlap >= fx unless released",
    "fxnn": "fx non-negative",
    "fxl": "fx >= half-width sum minus distance",
    "fxsym": "fx symmetric",
    "asum": "exactly one overlap candidate binds",
    "nov": "no overlap on shared links",
    "ovsym": "overlap symmetric",
    "fdsym": "center distance symmetric",
    "ase": "ASE accumulation",
    "sci": "SCI accumulation",
    "xlm": "link-and-mode indicator",
    "xci": "XCI increment on shared links",
    "xcn": "XCI non-decreasing along route",
    "pwl": "piecewise-linear envelope of the XCI log term",
    "ad": "node-crosstalk increment",
    "adn": "node-crosstalk non-decreasing along route",
    "pli": "total PLI",
    "qot": "QoT threshold",
}


class PwlDomainError(ValueError):
    pass


class names:
    """Deterministic variable names."""

    B = staticmethod(lambda i: f"B_{i}")
    q = staticmethod(lambda i, v: f"q_{i}_{v}")
    p = staticmethod(lambda i, v: f"p_{i}_{v}")
    x = staticmethod(lambda i, u, v: f"x_{i}_{u}_{v}")
    xm = staticmethod(lambda i, u, v, c: f"xm_{i}_{u}_{v}_{c}")
    m = staticmethod(lambda i, c: f"m_{i}_{c}")
    f = staticmethod(lambda i: f"f_{i}")
    df = staticmethod(lambda i: f"df_{i}")
    fd = staticmethod(lambda i, j: f"fd_{i}_{j}")
    ov = staticmethod(lambda i, j: f"ov_{i}_{j}")
    fx = staticmethod(lambda i, j: f"fx_{i}_{j}")
    w = staticmethod(lambda i, j: f"w_{i}_{j}")
    a = staticmethod(lambda k, i, j: f"a{k}_{i}_{j}")
    tase = staticmethod(lambda i: f"tase_{i}")
    tsci = staticmethod(lambda i: f"tsci_{i}")
    txci = staticmethod(lambda i, j, v: f"txci_{i}_{j}_{v}")
    tad = staticmethod(lambda i, j, v: f"tad_{i}_{j}_{v}")
    tpli = staticmethod(lambda i: f"tpli_{i}")
    h = staticmethod(lambda i, j, c: f"h_{i}_{j}_{c}")


@dataclass(frozen=True)
class RmaxContext:
    network: Network
    demands: tuple[Request, ...]
    catalog: ModeCatalog
    fit: PwlFit
    eps1: float
    theta: float
    constants: PhysicsConstants


def _check_domain(demands: Sequence[Request], catalog: ModeCatalog, fit: PwlFit, F: float) -> None:
    for mode in catalog:
        for r in sorted({d.rate_gbps for d in demands}):
            need = 2.0 * mode.se * F / r
            if need > fit.x2:
                raise PwlDomainError(
                    f"envelope domain ends at {fit.x2:g} but mode {mode.name} at {r:g} Gbps "
                    f"needs {need:g}"
                )


def auto_theta(network: Network, demands: Sequence[Request], catalog: ModeCatalog, fit: PwlFit,
               constants: PhysicsConstants = DEFAULT_CONSTANTS) -> float:
    """A big-M that dominates every accumulated PLI term and every increment.

    The floor 10 * max(1/SNR_th) covers the QoT bound; the second term covers
    XCI chains evaluated with the envelope at zero distance (its maximum on
    [0, x2]) summed over every fiber, and the same for node crosstalk.
    """
    floor = 10.0 * max(1.0 / m.snr_th_linear for m in catalog)
    if not demands:
        return floor
    h_max = max(fit(0.0), fit(fit.x1))
    total_spans = sum(network.span_count(*uv) for uv in network.links)
    g_max = max(d.psd_w_per_ghz for d in demands)
    g_min = min(d.psd_w_per_ghz for d in demands)
    r_min = min(d.rate_gbps for d in demands)
    se_max = max(m.se for m in catalog)
    xci_bound = constants.mu * g_max**2 * h_max * total_spans
    ad_bound = (constants.eps_x * g_max * se_max / (r_min * g_min)
                * network.spectrum_ghz * len(network.nodes))
    return max(floor, 2.0 * max(xci_bound, ad_bound) + 1.0)


def build_rmax(network: Network, demands: Sequence[Request], catalog: ModeCatalog, fit: PwlFit,
               eps1: float = 0.01, theta: float | None = None,
               constants: PhysicsConstants = DEFAULT_CONSTANTS) -> MilpModel:
    demands = tuple(demands)
    ids = [d.id for d in demands]
    if len(set(ids)) != len(ids):
        raise ValueError("request ids must be unique")
    F = network.spectrum_ghz
    if demands:
        _check_domain(demands, catalog, fit, F)
    if theta is None:
        theta = auto_theta(network, demands, catalog, fit, constants)
    n = names
    V = network.nodes
    E = sorted(network.links)
    C = range(len(catalog))
    mb = ModelBuilder()
    by_id = {d.id: d for d in demands}
    pairs = [(i, j) for i, j in permutations(ids, 2)]
    upairs = [(i, j) for i, j in pairs if i < j]

    # variables
    for i in ids:
        mb.var(n.B(i), binary=True)
        for v in V:
            mb.var(n.q(i, v), binary=True)
            mb.var(n.p(i, v), binary=True)
        for u, v in E:
            mb.var(n.x(i, u, v), binary=True)
            for c in C:
                mb.var(n.xm(i, u, v, c), binary=True)
        for c in C:
            mb.var(n.m(i, c), binary=True)
        mb.var(n.f(i), ub=F)
        mb.var(n.df(i), ub=F)
    for i, j in pairs:
        mb.var(n.fd(i, j), ub=F)
        mb.var(n.ov(i, j), ub=F)
        mb.var(n.fx(i, j), ub=F)
        mb.var(n.w(i, j), binary=True)
    for i, j in upairs:
        for k in (1, 2, 3):
            mb.var(n.a(k, i, j), binary=True)
    for i in ids:
        mb.var(n.tase(i))
        mb.var(n.tsci(i))
        mb.var(n.tpli(i))
    for i, j in pairs:
        for v in V:
            mb.var(n.txci(i, j, v))
            mb.var(n.tad(i, j, v))
        for c in C:
            mb.var(n.h(i, j, c), lb=-math.inf)

    # objective
    for i in ids:
        mb.objective(n.B(i), by_id[i].revenue)
        mb.objective(n.tpli(i), -eps1)

    # flow
    for i in ids:
        d = by_id[i]
        for v in V:
            ins = [(n.x(i, u, v), -1.0) for u in network.adjacency[v]]
            outs = [(n.x(i, v, u), -1.0) for u in network.adjacency[v]]
            mb.row(f"inq_{i}_{v}", [(n.q(i, v), 1.0)] + ins, "=", 0.0)
            mb.row(f"outp_{i}_{v}", [(n.p(i, v), 1.0)] + outs, "=", 0.0)
            bal = [(n.p(i, v), 1.0), (n.q(i, v), -1.0)]
            if v == d.src:
                bal.append((n.B(i), -1.0))
            elif v == d.dst:
                bal.append((n.B(i), 1.0))
            mb.row(f"flow_{i}_{v}", bal, "=", 0.0)

    # spectrum
    for i in ids:
        d = by_id[i]
        mb.row(f"mode_{i}", [(n.m(i, c), 1.0) for c in C] + [(n.B(i), -1.0)], "=", 0.0)
        mb.row(f"bw_{i}", [(n.df(i), 1.0)] + [(n.m(i, c), -d.rate_gbps / catalog[c].se) for c in C],
               ">=", 0.0)
    for i, j in upairs:
        mb.row(f"wsum_{i}_{j}", [(n.w(i, j), 1.0), (n.w(j, i), 1.0)], "=", 1.0)
    for i in ids:
        mb.row(f"fhi_{i}", [(n.f(i), 1.0), (n.df(i), 0.5)], "<=", F)
        mb.row(f"flo_{i}", [(n.f(i), 1.0), (n.df(i), -0.5)], ">=", 0.0)
    for i, j in pairs:
        mb.row(f"fdu_{i}_{j}", [(n.fd(i, j), 1.0), (n.f(i), -1.0), (n.f(j), 1.0), (n.w(i, j), 2.0 * F)],
               "<=", 2.0 * F)
        mb.row(f"fdl_{i}_{j}", [(n.f(i), 1.0), (n.f(j), -1.0), (n.fd(i, j), -1.0)], "<=", 0.0)
    for i, j in upairs:
        ov = n.ov(i, j)
        mb.row(f"ova1_{i}_{j}", [(n.df(i), 1.0), (n.a(1, i, j), -F), (ov, -1.0)], "<=", 0.0)
        mb.row(f"ova2_{i}_{j}", [(n.df(j), 1.0), (n.a(2, i, j), -F), (ov, -1.0)], "<=", 0.0)
        mb.row(f"ova3_{i}_{j}", [(n.fx(i, j), 1.0), (n.a(3, i, j), -F), (ov, -1.0)], "<=", 0.0)
        mb.row(f"fxnn_{i}_{j}", [(n.fx(i, j), 1.0)], ">=", 0.0)
        mb.row(f"fxl_{i}_{j}", [(n.df(i), 0.5), (n.df(j), 0.5), (n.fd(i, j), -1.0), (n.fx(i, j), -1.0)],
               "<=", 0.0)
        mb.row(f"fxsym_{i}_{j}", [(n.fx(i, j), 1.0), (n.fx(j, i), -1.0)], "=", 0.0)
        mb.row(f"asum_{i}_{j}", [(n.a(k, i, j), 1.0) for k in (1, 2, 3)], "=", 2.0)
    for i, j in upairs:
        for u, v in E:
            mb.row(f"nov_{i}_{j}_{u}_{v}",
                   [(n.ov(i, j), 1.0), (n.x(i, u, v), F), (n.x(j, u, v), F)], "<=", 2.0 * F)
    for i, j in upairs:
        mb.row(f"ovsym_{i}_{j}", [(n.ov(i, j), 1.0), (n.ov(j, i), -1.0)], "=", 0.0)
        mb.row(f"fdsym_{i}_{j}", [(n.fd(i, j), 1.0), (n.fd(j, i), -1.0)], "=", 0.0)

    # SNR
    for i in ids:
        d = by_id[i]
        terms = [(n.tase(i), 1.0)]
        for u, v in E:
            terms.append((n.x(i, u, v), -ase_nsr(network.span_count(u, v), d.psd_w_per_ghz, constants)))
        mb.row(f"ase_{i}", terms, "=", 0.0)
        terms = [(n.tsci(i), 1.0)]
        for u, v in E:
            for c in C:
                width = d.rate_gbps / catalog[c].se
                coef = sci_nsr(network.span_count(u, v), d.psd_w_per_ghz, width, constants)
                terms.append((n.xm(i, u, v, c), -coef))
        mb.row(f"sci_{i}", terms, "=", 0.0)
        for u, v in E:
            for c in C:
                mb.row(f"xlm_{i}_{u}_{v}_{c}",
                       [(n.xm(i, u, v, c), 1.0), (n.x(i, u, v), -1.0), (n.m(i, c), -1.0)], ">=", -1.0)
    for i, j in pairs:
        gj = by_id[j].psd_w_per_ghz
        for u, v in E:
            span = network.span_count(u, v)
            coef_h = constants.mu * gj**2 * span
            for c in C:
                mb.row(f"xci_{i}_{j}_{u}_{v}_{c}",
                       [(n.txci(i, j, v), 1.0), (n.txci(i, j, u), -1.0), (n.x(i, u, v), -theta),
                        (n.xm(j, u, v, c), -theta), (n.h(i, j, c), -coef_h)],
                       ">=", -2.0 * theta, indicator=(2, (n.x(i, u, v), n.xm(j, u, v, c))))
            mb.row(f"xcn_{i}_{j}_{u}_{v}",
                   [(n.txci(i, j, v), 1.0), (n.txci(i, j, u), -1.0), (n.x(i, u, v), -theta)],
                   ">=", -theta, indicator=(1, (n.x(i, u, v),)))
    for i, j in pairs:
        rj = by_id[j].rate_gbps
        for c in C:
            scale = 2.0 * catalog[c].se / rj
            for k, (o1, o0) in enumerate(fit.coeffs, start=1):
                mb.row(f"pwl_{i}_{j}_{c}_{k}", [(n.h(i, j, c), 1.0), (n.fd(i, j), -o1 * scale)], ">=", o0)
    for i, j in pairs:
        di, dj = by_id[i], by_id[j]
        for v, w in E:
            for c in C:
                # crosstalk picked up at v (i leaves via v->w, j arrives at v) is carried to w
                k_ad = constants.eps_x * dj.psd_w_per_ghz * catalog[c].se / (di.rate_gbps * di.psd_w_per_ghz)
                mb.row(f"ad_{i}_{j}_{v}_{w}_{c}",
                       [(n.tad(i, j, w), 1.0), (n.tad(i, j, v), -1.0), (n.ov(i, j), -k_ad),
                        (n.x(i, v, w), -theta), (n.q(j, v), -theta), (n.m(i, c), -theta)],
                       ">=", -3.0 * theta, indicator=(3, (n.x(i, v, w), n.q(j, v), n.m(i, c))))
            mb.row(f"adn_{i}_{j}_{v}_{w}",
                   [(n.tad(i, j, w), 1.0), (n.tad(i, j, v), -1.0), (n.x(i, v, w), -theta)],
                   ">=", -theta, indicator=(1, (n.x(i, v, w),)))
    for i in ids:
        d = by_id[i]
        terms = [(n.tpli(i), 1.0), (n.tase(i), -1.0), (n.tsci(i), -1.0)]
        for j in ids:
            if j != i:
                terms.append((n.txci(i, j, d.dst), -1.0))
                terms.append((n.tad(i, j, d.dst), -1.0))
        mb.row(f"pli_{i}", terms, ">=", 0.0)
        mb.row(f"qot_{i}", [(n.tpli(i), 1.0)] + [(n.m(i, c), -1.0 / catalog[c].snr_th_linear) for c in C],
               "<=", 0.0)

    return mb.build(
        theta=theta,
        eps1=eps1,
        context=RmaxContext(network, demands, catalog, fit, eps1, theta, constants),
    )
