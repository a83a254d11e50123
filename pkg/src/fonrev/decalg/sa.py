"""Spectrum assignment over a fixed route/mode plan with QoT verification."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..netmodel import DEFAULT_CONSTANTS, Network, PhysicsConstants, lin_to_db
from ..pli import Assignment, Channel, own_nsr, pair_nsr
from ..pwlfit import PwlFit, default_fit, xci_log
from .rtma import RoutePair, RtmaSolution

__all__ = [
    "POLICIES",
    "SaState",
    "arrange",
    "round_offsets",
    "envelope_log_term",
    "spectrum_assign",
]

POLICIES = ("sa", "sa-b", "sa-r", "sa-ra")


def arrange(picks: Sequence[RoutePair], policy: str = "sa-ra", seed: int = 0) -> list[RoutePair]:
    """Order accepted RTMA picks for placement; ties go to the lower request id."""
    items = sorted(picks, key=lambda p: p.request.id)
    if policy == "sa":
        random.Random(seed).shuffle(items)
        return items
    if policy == "sa-b":
        key = lambda p: -p.bandwidth_ghz
    elif policy == "sa-r":
        key = lambda p: -p.request.revenue
    elif policy == "sa-ra":
        key = lambda p: -p.request.revenue / p.bandwidth_ghz
    else:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    return sorted(items, key=key)


def round_offsets(n_round: int, first_db: float = 1.0) -> list[float]:
    """Threshold offsets per round, linear from ``first_db`` down to 0 dB."""
    if n_round < 1:
        raise ValueError("n_round must be >= 1")
    if n_round == 1:
        return [0.0]
    return [first_db * (n_round - 1 - r) / (n_round - 1) for r in range(n_round)]


def envelope_log_term(fit: PwlFit) -> Callable[[float], float]:
    """XCI log term from the fitted envelope; past the fit domain the exact log is a floor."""

    def term(x: float) -> float:
        h = fit(x)
        if x > fit.x2:
            h = max(h, float(xci_log(x)))
        return h

    return term


@dataclass
class SaState:
    network: Network
    occupancy: dict[tuple[int, int], list[tuple[float, float, int]]]
    assignments: dict[int, Assignment]
    blocked: list[int]
    rounds: int = 0
    snr_db: dict[int, float] = field(default_factory=dict)

    @property
    def plan(self) -> list[Assignment]:
        return [self.assignments[i] for i in sorted(self.assignments)]

    @property
    def revenue(self) -> float:
        return math.fsum(a.request.revenue for a in self.plan)

    def check(self, guard_ghz: float = 0.0) -> None:
        """Raise AssertionError on any continuity, contiguity or overlap breach."""
        F = self.network.spectrum_ghz
        for uv, ivs in self.occupancy.items():
            ivs = sorted(ivs)
            for b, e, _ in ivs:
                assert 0.0 <= b < e <= F + 1e-9, (uv, b, e)
            for (_, e0, i0), (b1, _, i1) in zip(ivs, ivs[1:]):
                assert b1 - e0 >= guard_ghz - 1e-9, (uv, i0, i1)
        for i, a in self.assignments.items():
            for uv in a.links:
                assert (a.channel.begin_ghz, a.channel.end_ghz, i) in self.occupancy[uv]


class _Placer:
    def __init__(self, network, guard, step, log_term, constants):
        self.network = network
        self.guard = guard
        self.step = step
        self.log_term = log_term
        self.constants = constants
        self.occ: dict[tuple[int, int], list[tuple[float, float, int]]] = {uv: [] for uv in network.links}
        self.placed: dict[int, Assignment] = {}
        self.nsr: dict[int, float] = {}
        self.limit: dict[int, float] = {}

    def _free(self, b: float, w: float, links) -> bool:
        e = b + w
        for uv in links:
            for ob, oe, _ in self.occ[uv]:
                if b < oe + self.guard and e > ob - self.guard:
                    return False
        return True

    def _snr_ok(self, total: float, limit_db: float) -> bool:
        return lin_to_db(1.0 / total) >= limit_db

    def try_place(self, pick: RoutePair, offset_db: float) -> Assignment | None:
        net = self.network
        F = net.spectrum_ghz
        w = pick.bandwidth_ghz
        rid = pick.request.id
        th = pick.mode.snr_th_db
        probe = Assignment(pick.request, pick.route, pick.mode, Channel(0.0, w))
        own = sum(own_nsr(probe, net, self.constants))
        if not self._snr_ok(own, th + offset_db):
            return None
        k = 0
        while True:
            b = k * self.step
            k += 1
            if b + w > F + 1e-9:
                return None
            if not self._free(b, w, pick.links):
                continue
            cand = Assignment(pick.request, pick.route, pick.mode, Channel(b, b + w))
            total = own
            ok = True
            updates = {}
            for j, other in self.placed.items():
                x_in, d_in = pair_nsr(cand, other, net, self.constants, self.log_term)
                total += x_in + d_in
                x_out, d_out = pair_nsr(other, cand, net, self.constants, self.log_term)
                if x_out or d_out:
                    t = self.nsr[j] + x_out + d_out
                    if not self._snr_ok(t, other.mode.snr_th_db + offset_db):
                        ok = False
                        break
                    updates[j] = t
            if not ok or not self._snr_ok(total, th + offset_db):
                continue
            self.nsr.update(updates)
            self.nsr[rid] = total
            self.placed[rid] = cand
            for uv in pick.links:
                self.occ[uv].append((b, b + w, rid))
            return cand


def spectrum_assign(rtma: RtmaSolution, network: Network, policy: str = "sa-ra", n_round: int = 2,
                    guard_ghz: float = 12.5, seed: int = 0, step_ghz: float | None = None,
                    xci_model: str = "rmax", fit: PwlFit | None = None, first_offset_db: float = 1.0,
                    constants: PhysicsConstants = DEFAULT_CONSTANTS) -> SaState:
    """First-fit placement of the RTMA picks, repeated over rounds with a shrinking threshold offset.

    The scan step defaults to the guard width. ``xci_model="rmax"`` evaluates
    XCI through the fitted envelope (an upper bound, so plans stay feasible
    for the MILP); ``"exact"`` uses the closed-form log.
    """
    if not guard_ghz > 0:
        raise ValueError("guard_ghz must be > 0")
    step = guard_ghz if step_ghz is None else step_ghz
    if not step > 0:
        raise ValueError("step_ghz must be > 0")
    if xci_model == "rmax":
        log_term = envelope_log_term(fit if fit is not None else default_fit())
    elif xci_model == "exact":
        log_term = None
    else:
        raise ValueError(f"unknown xci_model {xci_model!r}")
    placer = _Placer(network, guard_ghz, step, log_term, constants)
    order = arrange(rtma.accepted, policy, seed)
    offsets = round_offsets(n_round, first_offset_db)
    for off in offsets:
        for pick in order:
            if pick.request.id not in placer.placed:
                placer.try_place(pick, off)
    blocked = sorted(i for i in rtma.picks if i not in placer.placed)
    snr = {i: lin_to_db(1.0 / t) for i, t in placer.nsr.items()}
    return SaState(network, placer.occ, dict(sorted(placer.placed.items())), blocked, len(offsets), snr)
