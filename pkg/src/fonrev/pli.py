"""Bandwidth-based physical-layer impairment engine.

Each impairment is a linear noise-to-signal ratio (noise PSD over the
lightpath's own launch PSD), so per-lightpath SNR is ``1 / sum(terms)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

from .netmodel import DEFAULT_CONSTANTS, Network, PhysicsConstants, Request, TransmissionMode, lin_to_db

__all__ = [
    "GN_MIN_WIDTH_GHZ",
    "Channel",
    "Assignment",
    "PliBreakdown",
    "SpectrumConflictError",
    "ase_nsr",
    "sci_nsr",
    "xci_nsr",
    "overlap_ghz",
    "ad_xt_nsr",
    "shared_spans",
    "pair_nsr",
    "evaluate",
    "qot_ok",
]

# the closed-form GN expressions are validated above this channel width
GN_MIN_WIDTH_GHZ = 28.0

LogTerm = Callable[[float], float]


class SpectrumConflictError(ValueError):
    """Two lightpaths overlap or touch on a shared fiber."""

    def __init__(self, first: int, second: int, link: tuple[int, int], gap_ghz: float):
        self.pair = (first, second)
        self.link = link
        self.gap_ghz = gap_ghz
        super().__init__(
            f"requests {first} and {second} leave gap {gap_ghz:.6g} GHz on link {link[0]}->{link[1]}"
        )


@dataclass(frozen=True)
class Channel:
    begin_ghz: float
    end_ghz: float

    def __post_init__(self):
        if not (0.0 <= self.begin_ghz < self.end_ghz):
            raise ValueError(f"invalid channel [{self.begin_ghz}, {self.end_ghz}]")

    @property
    def center(self) -> float:
        return 0.5 * (self.begin_ghz + self.end_ghz)

    @property
    def width(self) -> float:
        return self.end_ghz - self.begin_ghz


@dataclass(frozen=True)
class Assignment:
    """A lightpath: request, route, transmission mode and spectrum interval."""

    request: Request
    route: tuple[int, ...]
    mode: TransmissionMode
    channel: Channel
    accepted: bool = True

    def __post_init__(self):
        route = tuple(self.route)
        object.__setattr__(self, "route", route)
        if len(route) < 2:
            raise ValueError("route needs at least two nodes")
        if len(set(route)) != len(route):
            raise ValueError(f"route {route} revisits a node")
        if route[0] != self.request.src or route[-1] != self.request.dst:
            raise ValueError(f"route {route} does not join {self.request.src}->{self.request.dst}")

    @cached_property
    def links(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.route[:-1], self.route[1:]))

    @cached_property
    def link_set(self) -> frozenset:
        return frozenset(self.links)

    @property
    def psd(self) -> float:
        return self.request.psd_w_per_ghz

    @property
    def id(self) -> int:
        return self.request.id


@dataclass(frozen=True)
class PliBreakdown:
    t_ase: float
    t_sci: float
    t_xci: float
    t_ad: float
    below_gn_floor: bool = False

    @property
    def total(self) -> float:
        return self.t_ase + self.t_sci + self.t_xci + self.t_ad

    @property
    def snr_linear(self) -> float:
        return 1.0 / self.total

    @property
    def snr_db(self) -> float:
        return lin_to_db(self.snr_linear)


def ase_nsr(spans: int, psd: float, constants: PhysicsConstants = DEFAULT_CONSTANTS) -> float:
    if not psd > 0:
        raise ValueError("psd must be > 0")
    if spans < 0:
        raise ValueError("spans must be >= 0")
    c = constants
    return spans * (c.span_gain - 1.0) * c.nsp * c.hnu_w_per_ghz / psd


def sci_nsr(spans: int, psd: float, width: float,
            constants: PhysicsConstants = DEFAULT_CONSTANTS) -> float:
    if not width > 0:
        raise ValueError("width must be > 0")
    if not psd > 0:
        raise ValueError("psd must be > 0")
    c = constants
    return spans * c.mu * psd**2 * math.asinh(c.rho * width**2)


def shared_spans(a: Assignment, b: Assignment, network: Network) -> int:
    return sum(network.span_count(*uv) for uv in a.link_set & b.link_set)


def _xci_term(spans: int, interferer_psd: float, distance: float, width_j: float,
              constants: PhysicsConstants, log_term: LogTerm | None) -> float:
    if log_term is None:
        h = math.log((distance + width_j / 2.0) / (distance - width_j / 2.0))
    else:
        h = log_term(2.0 * distance / width_j)
    return spans * constants.mu * interferer_psd**2 * h


def xci_nsr(primary: Assignment, interferer: Assignment, network: Network,
            constants: PhysicsConstants = DEFAULT_CONSTANTS,
            log_term: LogTerm | None = None) -> float:
    """XCI from ``interferer`` onto ``primary``.

    ``log_term`` replaces ln((x+1)/(x-1)) at x = 2|f_i-f_j|/Δf_j, e.g. with a
    piecewise-linear upper envelope.
    """
    common = primary.link_set & interferer.link_set
    if not common:
        return 0.0
    ci, cj = primary.channel, interferer.channel
    distance = abs(ci.center - cj.center)
    gap = distance - 0.5 * (ci.width + cj.width)
    if gap <= 0.0:
        raise SpectrumConflictError(primary.id, interferer.id, min(common), gap)
    spans = sum(network.span_count(*uv) for uv in common)
    return _xci_term(spans, interferer.psd, distance, cj.width, constants, log_term)


def overlap_ghz(a: Channel, b: Channel) -> float:
    raw = 0.5 * (a.width + b.width) - abs(a.center - b.center)
    return min(max(raw, 0.0), min(a.width, b.width))


def ad_nodes(primary: Assignment, interferer: Assignment) -> int:
    """Nodes where the primary leaves (added/passing) and the interferer arrives (passing/dropped)."""
    return len(set(primary.route[:-1]) & set(interferer.route[1:]))


def ad_xt_nsr(primary: Assignment, interferer: Assignment, network: Network | None = None,
              constants: PhysicsConstants = DEFAULT_CONSTANTS) -> float:
    ov = overlap_ghz(primary.channel, interferer.channel)
    if ov <= 0.0:
        return 0.0
    count = ad_nodes(primary, interferer)
    if not count:
        return 0.0
    return count * constants.eps_x * ov * interferer.psd / (primary.channel.width * primary.psd)


def pair_nsr(primary: Assignment, interferer: Assignment, network: Network,
             constants: PhysicsConstants = DEFAULT_CONSTANTS,
             log_term: LogTerm | None = None) -> tuple[float, float]:
    """(xci, ad) contributed by ``interferer`` to ``primary``."""
    return (
        xci_nsr(primary, interferer, network, constants, log_term),
        ad_xt_nsr(primary, interferer, network, constants),
    )


def own_nsr(a: Assignment, network: Network,
            constants: PhysicsConstants = DEFAULT_CONSTANTS) -> tuple[float, float]:
    spans = network.route_spans(a.route)
    return ase_nsr(spans, a.psd, constants), sci_nsr(spans, a.psd, a.channel.width, constants)


def evaluate(assignments: Sequence[Assignment], network: Network,
             constants: PhysicsConstants = DEFAULT_CONSTANTS,
             log_term: LogTerm | None = None) -> list[PliBreakdown]:
    """Breakdowns for the accepted assignments, in input order.

    Raises SpectrumConflictError for any pair sharing a fiber without a
    positive spectral gap.
    """
    active = [a for a in assignments if a.accepted]
    for a in active:
        network.route_links(a.route)
    out = []
    for a in active:
        t_ase, t_sci = own_nsr(a, network, constants)
        t_xci = t_ad = 0.0
        for b in active:
            if b is a:
                continue
            x, d = pair_nsr(a, b, network, constants, log_term)
            t_xci += x
            t_ad += d
        out.append(PliBreakdown(t_ase, t_sci, t_xci, t_ad, a.channel.width < GN_MIN_WIDTH_GHZ))
    return out


def qot_ok(assignments: Sequence[Assignment], network: Network, threshold_scale_db: float = 0.0,
           constants: PhysicsConstants = DEFAULT_CONSTANTS,
           log_term: LogTerm | None = None) -> list[bool]:
    """Verdict per accepted assignment: SNR >= threshold + offset (both dB)."""
    active = [a for a in assignments if a.accepted]
    return [
        br.snr_db >= a.mode.snr_th_db + threshold_scale_db
        for a, br in zip(active, evaluate(assignments, network, constants, log_term))
    ]
