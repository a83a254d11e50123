import pytest

from fonrev.netmodel import ModeCatalog, Network, Request, dbm_to_w, default_table
from fonrev.pwlfit import default_fit
from fonrev.scenario import load_network, six_node_network


@pytest.fixture(scope="session")
def table():
    return default_table()


@pytest.fixture(scope="session")
def envelope():
    return default_fit()


@pytest.fixture(scope="session")
def six_node():
    return six_node_network()


@pytest.fixture(scope="session")
def nsf():
    return load_network("builtin:nsf", 1.0 / 6.0)


@pytest.fixture(scope="session")
def nsf_full():
    return load_network("builtin:nsf")


@pytest.fixture
def triangle():
    return Network.from_edges([(0, 1, 100.0), (1, 2, 100.0), (0, 2, 100.0)], 1000.0)


def make_request(i, src, dst, rate=100.0, revenue=1.0, psd_dbm=-20.0):
    return Request(i, src, dst, rate, revenue, dbm_to_w(psd_dbm))


def catalog(table, *names):
    return ModeCatalog.explicit(table, names)


# acceptance criterion -> (verdict, description, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(ACCEPTANCE, key=lambda t: int(t[1:])):
        verdict, text, detail = ACCEPTANCE[tag]
        terminalreporter.write_line(f"{tag} {verdict}: {text} ({detail})")
