import math

import pytest
from scipy import constants as sc

from fonrev.netmodel import (
    DEFAULT_CONSTANTS,
    ModeCatalog,
    Network,
    ParseError,
    PhysicsConstants,
    Request,
    TransmissionMode,
    db_to_lin,
    dbm_to_w,
    emit_catalog,
    emit_demands,
    emit_topology,
    lin_to_db,
    load_catalog,
    load_demands,
    load_topology,
    mode_se,
    w_to_dbm,
)

TOPO = """
# comment line
F 1000
0 1 100
1 2 250.5  # trailing comment
2 0 80
"""


def test_unit_conversions_round_trip():
    assert db_to_lin(10.0) == pytest.approx(10.0)
    assert lin_to_db(100.0) == pytest.approx(20.0)
    assert dbm_to_w(0.0) == pytest.approx(1e-3)
    assert w_to_dbm(dbm_to_w(-11.0)) == pytest.approx(-11.0)


def test_constants_match_hand_arithmetic():
    alpha = 0.2 * math.log(10) / 10
    mu = 3 * 1.3**2 / (2 * math.pi * alpha * 21.7) * 1e6
    rho = math.pi**2 * 21.7 / alpha * 1e-6
    c = DEFAULT_CONSTANTS
    assert c.alpha_per_km == pytest.approx(alpha, rel=1e-12)
    assert c.mu == pytest.approx(mu, rel=1e-12)
    assert c.mu == pytest.approx(8.07e5, rel=2e-3)
    assert c.rho == pytest.approx(4.651e-3, rel=1e-3)
    assert c.span_gain == pytest.approx(100.0, rel=1e-9)
    assert c.hnu_w_per_ghz == pytest.approx(sc.h * 192.5e12 * 1e9)


@pytest.mark.parametrize("kw", [{"alpha_db_per_km": 0}, {"span_km": -1}, {"beta2_ps2_per_km": 0}])
def test_constants_reject_nonsense(kw):
    with pytest.raises(ValueError):
        PhysicsConstants(**kw)


def test_load_topology_builds_both_directions():
    net = load_topology(TOPO)
    assert net.spectrum_ghz == 1000
    assert net.links[(1, 2)] == net.links[(2, 1)] == 250.5
    assert net.nodes == (0, 1, 2)
    assert net.degree(0) == 2


def test_topology_round_trip():
    net = load_topology(TOPO)
    assert load_topology(emit_topology(net)).links == net.links


def test_length_scale():
    net = load_topology(TOPO, length_scale=0.5)
    assert net.length(1, 2) == pytest.approx(125.25)


@pytest.mark.parametrize(
    "text,line",
    [
        ("0 1 100\n", 1),
        ("F 100\n0 1\n", 2),
        ("F 100\n0 0 10\n", 2),
        ("F 100\n0 1 -5\n", 2),
        ("F 100\n0 1 5\n0 1 6\n", 3),
        ("F 100\nF 200\n", 2),
        ("F x\n", 1),
    ],
)
def test_topology_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as exc:
        load_topology(text)
    assert exc.value.line == line


def test_missing_header():
    with pytest.raises(ParseError):
        load_topology("# nothing\n")


def test_span_counts():
    net = Network.from_edges([(0, 1, 100.0), (1, 2, 150.0), (2, 3, 100.0 + 1e-10), (3, 4, 40.0)], 100.0)
    assert net.span_count(0, 1) == 1
    assert net.span_count(1, 2) == 2
    assert net.span_count(2, 3) == 1
    assert net.span_count(3, 4) == 1
    assert net.route_spans((0, 1, 2, 3)) == 4
    assert net.route_length((0, 1, 2)) == pytest.approx(250.0)


def test_route_links_rejects_missing_link():
    net = load_topology(TOPO)
    with pytest.raises(ValueError, match="missing link"):
        Network.from_edges([(0, 1, 1.0)], 10.0).route_links((0, 1, 2))
    assert net.route_links((0, 1, 2)) == ((0, 1), (1, 2))


def test_network_requires_reverse_twin():
    with pytest.raises(ValueError):
        Network({(0, 1): 10.0}, 100.0)


def test_demands_round_trip(six_node):
    text = "0 3 50 1.2 -11\n0 4 50 1.5 -11\n"
    reqs = load_demands(text, six_node)
    assert [r.id for r in reqs] == [0, 1]
    assert reqs[0].psd_w_per_ghz == pytest.approx(dbm_to_w(-11))
    again = load_demands(emit_demands(reqs))
    assert again == reqs


@pytest.mark.parametrize("text", ["0 0 50 1 -11", "0 1 -5 1 -11", "0 1 50 0 -11", "0 1 50 1", "0 9 50 1 -11"])
def test_demand_errors(text, six_node):
    with pytest.raises(ParseError):
        load_demands(text, six_node)


def test_request_validation():
    with pytest.raises(ValueError):
        Request(0, 1, 1, 10, 1, 1e-3)
    with pytest.raises(ValueError):
        Request(0, 1, 2, 10, 1, 0.0)


@pytest.mark.parametrize(
    "mf,bits,oh,se",
    [("PM-16QAM", 4, 0.10, 4 / 1.1), ("PM-QPSK", 2, 0.07, 2 / 1.07), ("PM-BPSK", 1, 0.07, 1 / 1.07)],
)
def test_spectral_efficiency(mf, bits, oh, se):
    m = TransmissionMode(mf, bits, oh, 5.0)
    assert mode_se(m) == pytest.approx(se, rel=1e-12)


def test_16qam_10_se_value():
    m = TransmissionMode("PM-16QAM", 4, 0.10, 15.7)
    assert abs(mode_se(m) - 3.636) <= 0.005


def test_bpsk_7_width_for_50g():
    m = TransmissionMode("PM-BPSK", 1, 0.07, 3.5)
    assert m.bandwidth(50) == pytest.approx(53.5)
    assert m.name == "BPSK_7"


def test_catalog_monotonicity(table):
    for oh in table.fec_ohs:
        ths = [table.get(mf, oh).snr_th_db for mf in table.mfs]
        ses = [table.get(mf, oh).se for mf in table.mfs]
        assert ths == sorted(ths) and len(set(ths)) == len(ths)
        assert ses == sorted(ses)
    for mf in table.mfs:
        ths = [table.get(mf, oh).snr_th_db for oh in table.fec_ohs]
        ses = [table.get(mf, oh).se for oh in table.fec_ohs]
        assert ths == sorted(ths, reverse=True)
        assert ses == sorted(ses, reverse=True)


def test_shipped_anchor_thresholds(table):
    assert table.get("PM-16QAM", 0.10).snr_th_db == pytest.approx(15.7)
    assert table.get("PM-QPSK", 0.20).snr_th_db == pytest.approx(4.58)
    assert len(table.modes) == 24


def test_catalog_round_trip(table):
    again = load_catalog(emit_catalog(table, "header"))
    assert [m.name for m in again.modes] == [m.name for m in table.modes]
    assert [m.snr_th_db for m in again.modes] == pytest.approx([m.snr_th_db for m in table.modes], abs=1e-3)


def test_catalog_parse_errors():
    with pytest.raises(ParseError):
        load_catalog("PM-QPSK 2 7\n")
    with pytest.raises(ParseError):
        load_catalog("PM-QPSK 2 7 6.5\nPM-QPSK 2 7 6.6\n")


def test_catalog_selectors(table):
    ad = ModeCatalog.parse(table, "adaptive:3,2")
    assert ad.names == ("BPSK_7", "QPSK_7", "8QAM_7")
    fec = ModeCatalog.parse(table, "fec:2,3")
    assert fec.names == ("QPSK_1", "QPSK_7", "QPSK_10")
    ex = ModeCatalog.parse(table, "QPSK_7, QPSK_20")
    assert ex.names == ("QPSK_7", "QPSK_20")
    with pytest.raises(KeyError):
        ModeCatalog.parse(table, "QPSK_8")
    with pytest.raises(ValueError):
        ModeCatalog.parse(table, "adaptive:x")
    with pytest.raises(ValueError):
        ModeCatalog.explicit(table, ["QPSK_7", "QPSK_7"])
