import math

import numpy as np
import pytest

from conftest import catalog, make_request
from fonrev.decalg import dec_alg
from fonrev.milp import (
    MilpModel,
    ModelBuilder,
    PwlDomainError,
    assignment_to_solution,
    auto_theta,
    build_rmax,
    check_solution,
    export_lp,
    format_solution,
    names,
    parse_solution,
)
from fonrev.netmodel import Network
from fonrev.pli import Assignment, Channel
from fonrev.pwlfit import default_fit, xci_log
from fonrev.scenario import gen_demands
from fonrev.scenario.presets import MULTI_FEC, SINGLE_FEC, example_catalog, example_config, example_demands

highspy = pytest.importorskip("highspy")


def solve_lp_text(text, tmp_path, name="m.lp"):
    path = tmp_path / name
    path.write_text(text)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    assert h.readModel(str(path)) == highspy.HighsStatus.kOk
    h.run()
    return h


def solution_of(h):
    names_ = h.getLp().col_names_
    return dict(zip(names_, h.getSolution().col_value))


@pytest.fixture(scope="module")
def two_node(table):
    net = Network.from_edges([(0, 1, 200.0)], 200.0)
    reqs = [make_request(0, 0, 1, rate=100.0)]
    return net, reqs, catalog(table, "QPSK_7")


def test_closed_form_counts(six_node, envelope):
    demands = example_demands(six_node)
    cat = example_catalog(SINGLE_FEC)
    m = build_rmax(six_node, demands, cat, envelope)
    D, V, E, C, Q = len(demands), len(six_node.nodes), len(six_node.links), len(cat), envelope.q_segments
    P, U = D * (D - 1), D * (D - 1) // 2
    expected_rows = {
        "inq": D * V, "outp": D * V, "flow": D * V,
        "mode": D, "bw": D, "fhi": D, "flo": D, "ase": D, "sci": D, "pli": D, "qot": D,
        "wsum": U, "ova1": U, "ova2": U, "ova3": U, "fxnn": U, "fxl": U, "fxsym": U,
        "asum": U, "ovsym": U, "fdsym": U,
        "fdu": P, "fdl": P,
        "nov": U * E, "xlm": D * E * C, "xci": P * E * C, "xcn": P * E,
        "ad": P * E * C, "adn": P * E, "pwl": P * C * Q,
    }
    assert m.row_families() == expected_rows
    expected_vars = (D + 2 * D * V + D * E + D * E * C + D * C + 2 * D + 4 * P + 3 * U
                     + 3 * D + 2 * P * V + P * C)
    assert len(m.variables) == expected_vars
    assert E == 16


def test_every_row_variable_declared(six_node, envelope):
    m = build_rmax(six_node, example_demands(six_node), example_catalog(MULTI_FEC), envelope)
    for r in m.rows:
        assert all(v in m.variables for v, _ in r.terms)


def test_builder_rejects_undeclared_and_duplicates():
    b = ModelBuilder()
    b.var("x", binary=True)
    with pytest.raises(ValueError):
        b.var("x")
    with pytest.raises(KeyError):
        b.row("r", [("y", 1.0)], "<=", 1.0)
    with pytest.raises(ValueError):
        b.row("r", [("x", 1.0)], "<>", 1.0)


def test_pwl_domain_error(six_node, table):
    demands = [make_request(0, 0, 3, rate=10.0)]
    with pytest.raises(PwlDomainError, match="QPSK_7"):
        build_rmax(six_node, demands, catalog(table, "QPSK_7"), default_fit(x2=5.0, q=3))


def test_duplicate_ids_rejected(six_node, envelope, table):
    reqs = [make_request(0, 0, 3), make_request(0, 0, 4)]
    with pytest.raises(ValueError):
        build_rmax(six_node, reqs, catalog(table, "QPSK_7"), envelope)


def test_theta_covers_qot_floor(six_node, envelope):
    cat = example_catalog(SINGLE_FEC)
    th = auto_theta(six_node, example_demands(six_node), cat, envelope)
    assert th >= 10 * max(1 / m.snr_th_linear for m in cat)


def test_forcing_acceptance_routes_and_sizes(two_node, envelope, tmp_path):
    net, reqs, cat = two_node
    m = build_rmax(net, reqs, cat, envelope)
    h = solve_lp_text(export_lp(m), tmp_path)
    sol = solution_of(h)
    assert sol[names.B(0)] == pytest.approx(1.0)
    assert sol[names.x(0, 0, 1)] == pytest.approx(1.0)
    # the bandwidth row is a lower bound, so a lone request may take extra width
    assert sol[names.df(0)] >= 100.0 / cat[0].se - 1e-6
    assert check_solution(m, sol).feasible
    tight = dict(sol)
    tight[names.df(0)] = 100.0 / cat[0].se
    assert check_solution(m, tight).feasible
    tight[names.df(0)] = 100.0 / cat[0].se - 1.0
    assert "bw" in check_solution(m, tight).by_family()


def test_lp_export_round_trip(two_node, envelope, tmp_path):
    net, reqs, cat = two_node
    m = build_rmax(net, reqs, cat, envelope)
    text = export_lp(m)
    assert text == export_lp(m)
    h = solve_lp_text(text, tmp_path)
    assert h.getNumRow() == len(m.rows)
    assert h.getNumCol() == len(m.variables)
    for section in ("Maximize", "Subject To", "Bounds", "Binary", "End"):
        assert section in text.splitlines()
    assert max(len(l) for l in text.splitlines()) <= 255


def test_empty_model_exports_header_only():
    text = export_lp(ModelBuilder().build())
    assert text.splitlines() == ["\\ rmax", "Maximize", "Subject To", "Bounds", "Binary", "End"]


@pytest.mark.parametrize("spec,revenue,accepted", [(SINGLE_FEC, 2.5, 2), (MULTI_FEC, 3.7, 3)])
def test_example_optimum_by_external_solver(six_node, envelope, tmp_path, spec, revenue, accepted):
    demands = example_demands(six_node)
    m = build_rmax(six_node, demands, example_catalog(spec), envelope)
    h = solve_lp_text(export_lp(m), tmp_path)
    assert h.getModelStatus() == highspy.HighsModelStatus.kOptimal
    sol = solution_of(h)
    got = sum(round(sol[names.B(d.id)]) for d in demands)
    assert got == accepted
    gross = sum(d.revenue * round(sol[names.B(d.id)]) for d in demands)
    assert gross == pytest.approx(revenue)
    assert h.getInfo().objective_function_value == pytest.approx(revenue, abs=0.01)
    rep = check_solution(m, sol, tol=1e-5)
    assert rep.feasible, rep.violations[:5]


def test_blocked_plan_is_feasible_with_zero_objective(six_node, envelope):
    m = build_rmax(six_node, example_demands(six_node), example_catalog(SINGLE_FEC), envelope)
    sol = assignment_to_solution([], m)
    rep = check_solution(m, sol)
    assert rep.feasible and rep.objective == 0.0
    assert all(sol[names.B(i)] == 0.0 for i in range(3))


def test_literal_zero_vector_breaks_order_rows(six_node, envelope):
    # with every variable at 0 the order complement and overlap selectors cannot hold
    m = build_rmax(six_node, example_demands(six_node), example_catalog(SINGLE_FEC), envelope)
    fams = check_solution(m, {}).by_family()
    assert set(fams) <= {"wsum", "asum", "pwl"}
    assert fams


def test_single_lightpath_vector(six_node, envelope, table):
    demands = example_demands(six_node)
    cat = example_catalog(MULTI_FEC)
    m = build_rmax(six_node, demands, cat, envelope)
    d = demands[2]
    a = Assignment(d, (3, 4), cat[1], Channel(0.0, d.rate_gbps / cat[1].se))
    sol = assignment_to_solution([a], m)
    assert sol[names.B(2)] == 1.0 and sol[names.x(2, 3, 4)] == 1.0
    assert sum(v for k, v in sol.items() if k.startswith("x_2_")) == 1.0
    assert all(v == 0.0 for k, v in sol.items() if k.startswith(("txci_2_", "tad_2_")))
    rep = check_solution(m, sol)
    assert rep.feasible, rep.violations


def test_overlap_reported(six_node, envelope):
    demands = example_demands(six_node)
    cat = example_catalog(MULTI_FEC)
    m = build_rmax(six_node, demands, cat, envelope)
    w = demands[0].rate_gbps / cat[1].se
    a = Assignment(demands[0], (0, 1, 3), cat[1], Channel(0.0, w))
    b = Assignment(demands[1], (0, 1, 3, 4), cat[1], Channel(5.0, 5.0 + w))
    rep = check_solution(m, assignment_to_solution([a, b], m))
    assert "nov" in rep.by_family()


def test_missing_link_rejected(six_node, envelope):
    demands = example_demands(six_node)
    cat = example_catalog(MULTI_FEC)
    m = build_rmax(six_node, demands, cat, envelope)
    a = Assignment(demands[0], (0, 3), cat[1], Channel(0.0, 30.0))
    with pytest.raises(ValueError, match="missing link"):
        assignment_to_solution([a], m)


def _random_plans(six_node, table, count):
    cat = catalog(table, "QPSK_7", "QPSK_20")
    for seed in range(count):
        reqs = gen_demands(seed, 4, (50.0, 100.0), six_node, -11.0)
        res = dec_alg(six_node, reqs, cat, example_config(n_rtma=2, seed=seed))
        yield reqs, cat, res


def test_heuristic_plans_feasible_and_objective_decomposes(six_node, table, envelope):
    for reqs, cat, res in _random_plans(six_node, table, 6):
        m = build_rmax(six_node, reqs, cat, envelope)
        sol = assignment_to_solution(res.plan, m)
        rep = check_solution(m, sol)
        assert rep.feasible, rep.violations[:3]
        by_hand = sum(d.revenue * sol[names.B(d.id)] - 0.01 * sol[names.tpli(d.id)] for d in reqs)
        assert rep.objective == pytest.approx(by_hand, rel=1e-12, abs=1e-12)
        # envelope variables dominate the exact log at the same abscissa
        for k, v in sol.items():
            if k.startswith("h_"):
                _, i, j, c = k.split("_")
                x = 2 * cat[int(c)].se * sol[names.fd(int(i), int(j))] / reqs[int(j)].rate_gbps
                if x > 1.0:
                    assert v >= float(xci_log(x)) - 1e-12
        # big-M rows that are switched off keep strictly positive slack
        for r in m.rows:
            if r.disabled(sol):
                assert r.violation(sol) < 0


def test_solution_text_round_trip(two_node, envelope):
    net, reqs, cat = two_node
    m = build_rmax(net, reqs, cat, envelope)
    vals = {k: 0.5 * i for i, k in enumerate(m.variables)}
    text = format_solution(vals, m)
    assert parse_solution(text) == vals
    assert parse_solution("# header\nB_0 1\n\n") == {"B_0": 1.0}
    with pytest.raises(ValueError, match="line 1"):
        parse_solution("B_0")
    with pytest.raises(ValueError, match="line 2"):
        parse_solution("B_0 1\nB_1 one")


def test_checker_reports_bounds_and_integrality(two_node, envelope):
    net, reqs, cat = two_node
    m = build_rmax(net, reqs, cat, envelope)
    rep = check_solution(m, {names.B(0): 0.5, names.f(0): -3.0, "bogus": 1.0})
    kinds = {v.kind for v in rep.violations}
    assert {"integrality", "bound"} <= kinds
    assert rep.unknown == ("bogus",)
