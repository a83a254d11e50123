import csv
import io

import numpy as np
import pytest
from sklearn.base import clone

from conftest import catalog, make_request
from oracles import random_instance
from fonrev.decalg import (
    RESULT_COLUMNS,
    SUMMARY_COLUMNS,
    DecAlg,
    DecAlgConfig,
    RefA,
    dec_alg,
    ref_a,
    results_csv,
)
from fonrev.scenario.presets import MULTI_FEC, SINGLE_FEC, example_catalog, example_config, example_demands


@pytest.fixture(scope="module")
def example(six_node):
    return six_node, example_demands(six_node)


def test_example_single_fec(example):
    net, demands = example
    res = dec_alg(net, demands, example_catalog(SINGLE_FEC), example_config())
    assert res.revenue == pytest.approx(2.5)
    assert res.blocked == [0]
    res.state.check(12.5)


def test_example_multi_fec(example):
    net, demands = example
    res = dec_alg(net, demands, example_catalog(MULTI_FEC), example_config())
    assert res.revenue == pytest.approx(3.7)
    assert res.blocked == []
    assert {a.mode.name for a in res.plan} == {"QPSK_20"}


def test_candidates_and_trace(example):
    net, demands = example
    res = dec_alg(net, demands, example_catalog(MULTI_FEC), example_config(n_rtma=3))
    assert res.trace[0][0] == "base"
    assert res.candidates == len(res.trace) >= 1
    assert max(r for _, r in res.trace) == res.revenue


@pytest.mark.parametrize("seed", range(5))
def test_contains_benchmark(nsf, table, seed):
    cat = catalog(table, "QPSK_7", "QPSK_20", "16QAM_7")
    reqs = random_instance(np.random.default_rng(seed), nsf, 20, rates=(250.0, 500.0, 1000.0), psd_dbm=-18.0)
    cfg = DecAlgConfig(n_rtma=2, seed=seed)
    assert dec_alg(nsf, reqs, cat, cfg).revenue >= ref_a(nsf, reqs, cat, cfg).revenue


def test_results_csv(example):
    net, demands = example
    res = dec_alg(net, demands, example_catalog(SINGLE_FEC), example_config())
    text = results_csv(res)
    head, tail = text.split("\n\n")
    rows = list(csv.DictReader(io.StringIO(head)))
    assert tuple(rows[0]) == RESULT_COLUMNS
    assert [r["id"] for r in rows] == ["0", "1", "2"]
    assert rows[0]["accepted"] == "0" and rows[0]["route"] == ""
    acc = rows[2]
    assert acc["accepted"] == "1" and acc["route"].startswith("3")
    assert float(acc["e_ghz"]) > float(acc["b_ghz"])
    mode = next(m for m in example_catalog(SINGLE_FEC) if m.name == acc["mode"])
    assert float(acc["snr_db"]) >= mode.snr_th_db
    summary = list(csv.DictReader(io.StringIO(tail)))
    assert tuple(summary[0]) == SUMMARY_COLUMNS
    assert float(summary[0]["revenue"]) == pytest.approx(2.5)
    assert summary[0]["blocked_count"] == "1"
    by_id = {d.id: d.revenue for d in demands}
    assert sum(by_id[int(r["id"])] for r in rows if r["accepted"] == "1") == pytest.approx(
        float(summary[0]["revenue"]))


def test_estimators(example):
    net, demands = example
    est = DecAlg(phi=1.0, step_ghz=0.5)
    assert est.get_params()["phi"] == 1.0
    assert clone(est).get_params() == est.get_params()
    est.fit(demands, net, example_catalog(MULTI_FEC))
    assert est.revenue_ == pytest.approx(3.7)
    assert est.blocked_ == []
    assert est.to_csv().startswith(",".join(RESULT_COLUMNS))
    base = RefA(phi=1.0, step_ghz=0.5).fit(demands, net, example_catalog(MULTI_FEC))
    assert base.revenue_ <= est.revenue_


def test_config_validation():
    for bad in (dict(k=0), dict(n_rtma=0), dict(phi=1.5), dict(eps2=-1.0), dict(n_round=0)):
        with pytest.raises(ValueError):
            DecAlgConfig(**bad)


def test_duplicate_ids(six_node, table):
    reqs = [make_request(0, 0, 3), make_request(0, 0, 4)]
    with pytest.raises(ValueError):
        dec_alg(six_node, reqs, catalog(table, "QPSK_7"))


def test_deterministic(nsf, table):
    cat = catalog(table, "QPSK_7", "16QAM_7")
    reqs = random_instance(np.random.default_rng(9), nsf, 15, rates=(500.0,), psd_dbm=-18.0)
    cfg = DecAlgConfig(n_rtma=2, policy="sa", seed=4)
    a, b = dec_alg(nsf, reqs, cat, cfg), dec_alg(nsf, reqs, cat, cfg)
    assert [(x.id, x.route, x.channel) for x in a.plan] == [(x.id, x.route, x.channel) for x in b.plan]
