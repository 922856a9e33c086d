import numpy as np
import pytest

from eonpower import (AgePair, Lightpath, Network, PhysicalParams,
                      PressureFunction, QotModel, Route, Span, get_format,
                      load_network, reference_powers)


def build_toy_network():
    """Two QPSK channels on a three-node line, one shared span."""
    fmt = get_format("PM-QPSK")
    bw = 100 * 1e9 / fmt.spectral_efficiency
    route_a = Route(id="A", source="n1", destination="n3",
                    spans=(Span(80.0, 1, 2), Span(64.0, 1, 2)),
                    roadm_count=3,
                    links=(frozenset({"n1", "n2"}), frozenset({"n2", "n3"})))
    route_b = Route(id="B", source="n2", destination="n3",
                    spans=(Span(64.0, 1, 2),), roadm_count=2,
                    links=(frozenset({"n2", "n3"}),))
    paths = (
        Lightpath(route_a, 100.0, fmt, bw, 193.55e12),
        Lightpath(route_b, 100.0, fmt, bw, 193.60e12),
    )
    matrix = np.array([[2, 1], [1, 1]])
    return Network(paths, matrix, 50e9, 6e9)


def build_toy_phys(**overrides):
    kwargs = dict(
        ber_target=4e-3, p_min_dbm=-100.0, p_max_dbm=20.0,
        planck=6.6261e-34, carrier_hz=193.55e12,
        beta2_s2_per_km=2.07e-23, gamma_per_w_km=1.3,
        alpha_db_per_km=AgePair(0.20, 0.30),
        connector_loss_db=AgePair(0.50, 0.70),
        splice_loss_db=AgePair(0.10, 0.20),
        connectors_per_span=1, splices_per_span=2,
        edfa_noise_figure_db=AgePair(5.0, 6.0),
        roadm_loss_db=AgePair(14.0, 16.0),
        transponder_margin_db=AgePair(1.0, 1.5),
        design_margin_db=AgePair(2.0, 1.0),
        tau0_years=0.0, tau_end_years=10.0,
        lambda1=4e-3, lambda2=1e-3, a_pert_db=1.0,
    )
    kwargs.update(overrides)
    return PhysicalParams(**kwargs)


@pytest.fixture(scope="session")
def bundled():
    return load_network()


@pytest.fixture(scope="session")
def network(bundled):
    return bundled[0]


@pytest.fixture(scope="session")
def phys(bundled):
    return bundled[1]


@pytest.fixture(scope="session")
def model(network, phys):
    return QotModel(network, phys)


@pytest.fixture(scope="session")
def reference(model):
    """Multi-start descent optimum of the bundled network, computed once."""
    powers, spread, reports = reference_powers(
        lambda: PressureFunction(model))
    return powers, spread, reports


@pytest.fixture()
def toy_network():
    return build_toy_network()


@pytest.fixture()
def toy_phys():
    return build_toy_phys()
