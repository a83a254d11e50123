"""Bundled example instances and reference configurations."""

from __future__ import annotations

from importlib.resources import files

from ..decalg import DecAlgConfig
from ..netmodel import ModeCatalog, Network, Request, dbm_to_w, default_table, load_demands, load_topology
from ..pli import Assignment, Channel, evaluate

__all__ = ["SINGLE_FEC", "MULTI_FEC", "six_node_network", "example_demands", "example_config", "example_catalog",
           "loaded_link_snr"]

SINGLE_FEC = "BPSK_7,QPSK_7"
MULTI_FEC = "QPSK_7,QPSK_20"


def six_node_network() -> Network:
    return load_topology(files("fonrev.data").joinpath("six_node.txt").read_text())


def example_demands(network: Network | None = None) -> list[Request]:
    return load_demands(files("fonrev.data").joinpath("six_node_demands.txt").read_text(), network)


def example_config(**overrides) -> DecAlgConfig:
    """Full-threshold margins and a 0.5 GHz scan: the 100 GHz fibers leave no room for grid rounding."""
    base = dict(phi=1.0, step_ghz=0.5)
    base.update(overrides)
    return DecAlgConfig(**base)


def example_catalog(spec: str) -> ModeCatalog:
    return ModeCatalog.parse(default_table(), spec)


def loaded_link_snr(psd_dbm_per_ghz: float, mode_name: str = "QPSK_7", rate_gbps: float = 250.0,
                    span_km: float = 100.0, spectrum_ghz: float = 4000.0, guard_ghz: float = 12.5) -> float:
    """SNR (dB) of the center channel on one fiber filled edge to edge with identical channels."""
    mode = example_catalog(mode_name)[0]
    width = mode.bandwidth(rate_gbps)
    net = Network.from_edges([(0, 1, span_km)], spectrum_ghz)
    count = int((spectrum_ghz + guard_ghz) // (width + guard_ghz))
    psd = dbm_to_w(psd_dbm_per_ghz)
    plan = []
    for k in range(count):
        b = k * (width + guard_ghz)
        plan.append(Assignment(Request(k, 0, 1, rate_gbps, 1.0, psd), (0, 1), mode, Channel(b, b + width)))
    center = count // 2
    return evaluate(plan, net)[center].snr_db
