"""Domain types and file ingestion: fiber constants, topology, demands, modes.

All internal quantities use W, GHz, km and linear ratios. dB/dBm values only
appear at the file boundary and in report fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from scipy import constants as sc

__all__ = [
    "ParseError",
    "PhysicsConstants",
    "DEFAULT_CONSTANTS",
    "Network",
    "Request",
    "TransmissionMode",
    "ThresholdTable",
    "ModeCatalog",
    "MF_BITS",
    "FEC_OHS",
    "load_topology",
    "emit_topology",
    "load_demands",
    "emit_demands",
    "load_catalog",
    "emit_catalog",
    "mode_se",
    "dbm_to_w",
    "w_to_dbm",
    "db_to_lin",
    "lin_to_db",
    "default_table",
]


class ParseError(ValueError):
    """Malformed topology/demand/catalog text; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def db_to_lin(db: float) -> float:
    return 10.0 ** (db / 10.0)


def lin_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_w(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def w_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w * 1000.0)


@dataclass(frozen=True)
class PhysicsConstants:
    """Fiber, amplifier and node parameters.

    ``mu`` and ``rho`` are returned in GHz-based units so that ``mu * G**2``
    (G in W/GHz) and ``rho * df**2`` (df in GHz) are dimensionless.
    """

    alpha_db_per_km: float = 0.2
    beta2_ps2_per_km: float = -21.7
    gamma_per_w_km: float = 1.3
    planck: float = sc.h
    nu_hz: float = 192.5e12
    nsp_db: float = 7.0
    eps_x_db: float = -25.0
    span_km: float = 100.0

    def __post_init__(self):
        if not self.alpha_db_per_km > 0:
            raise ValueError("alpha_db_per_km must be > 0")
        if not self.span_km > 0:
            raise ValueError("span_km must be > 0")
        if not self.gamma_per_w_km > 0:
            raise ValueError("gamma_per_w_km must be > 0")
        if self.beta2_ps2_per_km == 0:
            raise ValueError("beta2_ps2_per_km must be non-zero")

    @property
    def alpha_per_km(self) -> float:
        # power attenuation, so exp(alpha * L) is the span loss
        return self.alpha_db_per_km * math.log(10.0) / 10.0

    @property
    def span_gain(self) -> float:
        return math.exp(self.alpha_per_km * self.span_km)

    @property
    def nsp(self) -> float:
        return db_to_lin(self.nsp_db)

    @property
    def eps_x(self) -> float:
        return db_to_lin(self.eps_x_db)

    @property
    def hnu_w_per_ghz(self) -> float:
        return self.planck * self.nu_hz * 1e9

    @property
    def mu(self) -> float:
        """3 gamma^2 / (2 pi alpha |beta2|) in (W/GHz)^-2."""
        raw = 3.0 * self.gamma_per_w_km**2 / (
            2.0 * math.pi * self.alpha_per_km * abs(self.beta2_ps2_per_km)
        )
        # 1/(W^2 ps^2) -> GHz^2/W^2
        return raw * 1e6

    @property
    def rho(self) -> float:
        """pi^2 |beta2| / alpha in GHz^-2."""
        raw = math.pi**2 * abs(self.beta2_ps2_per_km) / self.alpha_per_km
        # ps^2 -> GHz^-2
        return raw * 1e-6


DEFAULT_CONSTANTS = PhysicsConstants()


@dataclass(frozen=True)
class Network:
    """Directed fiber graph. Every undirected link is stored as two fibers."""

    links: Mapping[tuple[int, int], float]
    spectrum_ghz: float
    span_km: float = 100.0
    extra_nodes: frozenset = frozenset()

    def __post_init__(self):
        links = dict(self.links)
        if not self.spectrum_ghz > 0:
            raise ValueError("spectrum_ghz must be > 0")
        for (u, v), length in links.items():
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not length > 0:
                raise ValueError(f"link {u}-{v} has non-positive length {length}")
            if (v, u) not in links:
                raise ValueError(f"link {u}-{v} has no reverse fiber")
            if links[(v, u)] != length:
                raise ValueError(f"link {u}-{v} length differs from its reverse")
        object.__setattr__(self, "links", MappingProxyType(links))
        object.__setattr__(self, "extra_nodes", frozenset(self.extra_nodes))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int, float]], spectrum_ghz: float,
                   span_km: float = 100.0) -> "Network":
        links = {}
        for u, v, length in edges:
            links[(u, v)] = float(length)
            links[(v, u)] = float(length)
        return cls(links, spectrum_ghz, span_km)

    @cached_property
    def nodes(self) -> tuple[int, ...]:
        ns = set(self.extra_nodes)
        for u, v in self.links:
            ns.add(u)
            ns.add(v)
        return tuple(sorted(ns))

    @cached_property
    def adjacency(self) -> Mapping[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {n: [] for n in self.nodes}
        for u, v in self.links:
            adj[u].append(v)
        return MappingProxyType({n: tuple(sorted(vs)) for n, vs in adj.items()})

    @cached_property
    def _spans(self) -> Mapping[tuple[int, int], int]:
        return MappingProxyType({
            uv: max(1, math.ceil(length / self.span_km - 1e-9))
            for uv, length in self.links.items()
        })

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_link(self, u: int, v: int) -> bool:
        return (u, v) in self.links

    def span_count(self, u: int, v: int) -> int:
        return self._spans[(u, v)]

    def length(self, u: int, v: int) -> float:
        return self.links[(u, v)]

    def route_links(self, route: Sequence[int]) -> tuple[tuple[int, int], ...]:
        out = tuple(zip(route[:-1], route[1:]))
        for uv in out:
            if uv not in self.links:
                raise ValueError(f"route uses missing link {uv[0]}-{uv[1]}")
        return out

    def route_spans(self, route: Sequence[int]) -> int:
        return sum(self._spans[uv] for uv in self.route_links(route))

    def route_length(self, route: Sequence[int]) -> float:
        return sum(self.links[uv] for uv in self.route_links(route))

    def undirected_edges(self) -> list[tuple[int, int, float]]:
        return sorted((u, v, w) for (u, v), w in self.links.items() if u < v)


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def load_topology(text: str, span_km: float = 100.0, length_scale: float = 1.0) -> Network:
    """Parse ``F <ghz>`` followed by ``u v length_km`` lines.

    ``length_scale`` multiplies every length (the NSF runs use 1/6).
    """
    spectrum = None
    links: dict[tuple[int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        parts = line.split()
        if parts[0].upper() == "F":
            if spectrum is not None:
                raise ParseError("duplicate spectrum header", lineno)
            if len(parts) != 2:
                raise ParseError("expected 'F <spectrum_ghz>'", lineno)
            try:
                spectrum = float(parts[1])
            except ValueError:
                raise ParseError(f"bad spectrum value {parts[1]!r}", lineno) from None
            if not spectrum > 0:
                raise ParseError("spectrum must be positive", lineno)
            continue
        if spectrum is None:
            raise ParseError("link before 'F' header", lineno)
        if len(parts) != 3:
            raise ParseError("expected '<u> <v> <length_km>'", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
            length = float(parts[2]) * length_scale
        except ValueError:
            raise ParseError(f"cannot parse link {line!r}", lineno) from None
        if u == v:
            raise ParseError(f"self-loop on node {u}", lineno)
        if not length > 0:
            raise ParseError(f"non-positive length on link {u}-{v}", lineno)
        if (u, v) in links:
            raise ParseError(f"duplicate link {u}-{v}", lineno)
        links[(u, v)] = length
        links[(v, u)] = length
    if spectrum is None:
        raise ParseError("missing 'F <spectrum_ghz>' header")
    return Network(links, spectrum, span_km)


def emit_topology(network: Network) -> str:
    lines = [f"F {network.spectrum_ghz!r}"]
    lines += [f"{u} {v} {w!r}" for u, v, w in network.undirected_edges()]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Request:
    id: int
    src: int
    dst: int
    rate_gbps: float
    revenue: float
    psd_w_per_ghz: float

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"request {self.id}: src == dst")
        if not self.rate_gbps > 0:
            raise ValueError(f"request {self.id}: rate must be > 0")
        if not self.revenue > 0:
            raise ValueError(f"request {self.id}: revenue must be > 0")
        if not self.psd_w_per_ghz > 0:
            raise ValueError(f"request {self.id}: psd must be > 0")


def load_demands(text: str, network: Network | None = None) -> list[Request]:
    """Parse ``src dst rate_gbps revenue psd_dbm_per_ghz`` lines.

    When ``network`` is given, endpoints must be network nodes.
    """
    out = []
    nodes = set(network.nodes) if network is not None else None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ParseError("expected '<src> <dst> <rate_gbps> <revenue> <psd_dbm_per_ghz>'", lineno)
        try:
            src, dst = int(parts[0]), int(parts[1])
            rate, rev, psd_dbm = float(parts[2]), float(parts[3]), float(parts[4])
        except ValueError:
            raise ParseError(f"cannot parse demand {line!r}", lineno) from None
        if src == dst:
            raise ParseError("source equals destination", lineno)
        if not rate > 0:
            raise ParseError("bit-rate must be positive", lineno)
        if not rev > 0:
            raise ParseError("revenue must be positive", lineno)
        if nodes is not None and (src not in nodes or dst not in nodes):
            raise ParseError(f"unknown node in demand {src}->{dst}", lineno)
        out.append(Request(len(out), src, dst, rate, rev, dbm_to_w(psd_dbm)))
    return out


def emit_demands(requests: Iterable[Request]) -> str:
    return "".join(
        f"{r.src} {r.dst} {r.rate_gbps!r} {r.revenue!r} {w_to_dbm(r.psd_w_per_ghz)!r}\n"
        for r in requests
    )


# m_bits per polarization-multiplexed format, in catalog order
MF_BITS = {"PM-BPSK": 1, "PM-QPSK": 2, "PM-8QAM": 3, "PM-16QAM": 4}
FEC_OHS = (0.01, 0.07, 0.10, 0.20, 0.30, 0.50)


@dataclass(frozen=True)
class TransmissionMode:
    mf_name: str
    m_bits: int
    fec_oh: float
    snr_th_db: float

    def __post_init__(self):
        if not math.isfinite(self.snr_th_db):
            raise ValueError("snr_th_db must be finite")
        if self.m_bits <= 0 or self.fec_oh < 0:
            raise ValueError("invalid transmission mode")

    @property
    def se(self) -> float:
        return self.m_bits / (1.0 + self.fec_oh)

    @property
    def snr_th_linear(self) -> float:
        return db_to_lin(self.snr_th_db)

    @property
    def oh_percent(self) -> int:
        return int(round(self.fec_oh * 100))

    @property
    def name(self) -> str:
        short = self.mf_name.split("-", 1)[-1]
        return f"{short}_{self.oh_percent}"

    def bandwidth(self, rate_gbps: float) -> float:
        return rate_gbps / self.se


def mode_se(mode: TransmissionMode) -> float:
    return mode.se


@dataclass(frozen=True)
class ThresholdTable:
    """All known (MF, FEC) modes, ordered by MF then by FEC overhead."""

    modes: tuple[TransmissionMode, ...]

    @cached_property
    def mfs(self) -> tuple[str, ...]:
        seen = []
        for m in sorted(self.modes, key=lambda m: m.m_bits):
            if m.mf_name not in seen:
                seen.append(m.mf_name)
        return tuple(seen)

    @cached_property
    def fec_ohs(self) -> tuple[float, ...]:
        return tuple(sorted({m.fec_oh for m in self.modes}))

    def get(self, mf_name: str, fec_oh: float) -> TransmissionMode:
        for m in self.modes:
            if m.mf_name == mf_name and abs(m.fec_oh - fec_oh) < 1e-9:
                return m
        raise KeyError(f"no threshold for {mf_name} at {fec_oh:.0%}")

    def by_name(self, name: str) -> TransmissionMode:
        for m in self.modes:
            if m.name.upper() == name.upper():
                return m
        raise KeyError(f"unknown transmission mode {name!r}")


@dataclass(frozen=True)
class ModeCatalog:
    """The candidate transmission-mode set C, in lock/perturbation order."""

    modes: tuple[TransmissionMode, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("catalog must contain at least one mode")
        names = [m.name for m in self.modes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate modes in catalog")

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.modes)

    def index(self, name: str) -> int:
        return self.names.index(name)

    @classmethod
    def adaptive_mf(cls, table: ThresholdTable, m: int, f: int) -> "ModeCatalog":
        """All MFs up to the m-th order with the f-th FEC (both 1-based)."""
        oh = table.fec_ohs[f - 1]
        return cls(tuple(table.get(mf, oh) for mf in table.mfs[:m]))

    @classmethod
    def multi_fec(cls, table: ThresholdTable, m: int, f: int) -> "ModeCatalog":
        """The m-th MF with every FEC up to the f-th (both 1-based)."""
        mf = table.mfs[m - 1]
        return cls(tuple(table.get(mf, oh) for oh in table.fec_ohs[:f]))

    @classmethod
    def explicit(cls, table: ThresholdTable, names: Iterable[str]) -> "ModeCatalog":
        return cls(tuple(table.by_name(n) for n in names))

    @classmethod
    def parse(cls, table: ThresholdTable, spec: str) -> "ModeCatalog":
        """``adaptive:m,f``, ``fec:m,f`` or a comma list like ``QPSK_7,QPSK_20``."""
        spec = spec.strip()
        kind, _, rest = spec.partition(":")
        if rest and kind.lower() in ("adaptive", "fec"):
            try:
                m, f = (int(x) for x in rest.split(","))
            except ValueError:
                raise ValueError(f"bad catalog spec {spec!r}") from None
            if kind.lower() == "adaptive":
                return cls.adaptive_mf(table, m, f)
            return cls.multi_fec(table, m, f)
        return cls.explicit(table, [s.strip() for s in spec.split(",") if s.strip()])


def load_catalog(text: str) -> ThresholdTable:
    """Parse ``mf_name m_bits oh_percent snr_th_db`` lines."""
    modes = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError("expected '<mf_name> <m_bits> <oh_percent> <snr_th_db>'", lineno)
        try:
            mode = TransmissionMode(parts[0], int(parts[1]), float(parts[2]) / 100.0, float(parts[3]))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        key = (mode.mf_name, mode.oh_percent)
        if key in seen:
            raise ParseError(f"duplicate mode {mode.name}", lineno)
        seen.add(key)
        modes.append(mode)
    return ThresholdTable(tuple(modes))


def emit_catalog(table: ThresholdTable, header: str = "") -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    for m in table.modes:
        lines.append(f"{m.mf_name} {m.m_bits} {m.oh_percent} {m.snr_th_db:.3f}")
    return "\n".join(lines) + "\n"


def default_table() -> ThresholdTable:
    from importlib.resources import files

    return load_catalog(files("fonrev.data").joinpath("catalog.txt").read_text())
