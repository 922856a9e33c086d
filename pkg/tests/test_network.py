"""Domain model: spans, routes, networks, ageing interpolation."""
import numpy as np
import pytest

from eonpower import (AgePair, Lightpath, Network, QotModel, Route, Span,
                      get_format, interpolate_param, shared_spans)
from conftest import build_toy_network, build_toy_phys


def test_span_validation():
    with pytest.raises(ValueError):
        Span(-1.0, 0, 0)
    with pytest.raises(ValueError):
        Span(80.0, -1, 0)


def test_route_rejects_zero_length_span():
    with pytest.raises(ValueError, match="length > 0"):
        Route(id="X", source="a", destination="b",
              spans=(Span(0.0, 0, 0),), roadm_count=1)


def test_route_totals():
    net = build_toy_network()
    route = net.lightpaths[0].route
    assert route.span_count == 2
    assert route.length_km == pytest.approx(144.0)


def test_lightpath_bandwidth_consistency():
    fmt = get_format("PM-QPSK")
    route = build_toy_network().lightpaths[1].route
    with pytest.raises(ValueError, match="inconsistent"):
        Lightpath(route, 100.0, fmt, 30e9, 193.7e12)


def test_network_matrix_validation():
    net = build_toy_network()
    ok = net.shared_span_matrix
    with pytest.raises(ValueError, match="symmetric"):
        Network(net.lightpaths, [[2, 1], [0, 1]], 50e9, 6e9)
    with pytest.raises(ValueError, match="diagonal"):
        Network(net.lightpaths, [[3, 1], [1, 1]], 50e9, 6e9)
    with pytest.raises(ValueError, match="exceed"):
        Network(net.lightpaths, [[2, 2], [2, 1]], 50e9, 6e9)
    with pytest.raises(ValueError, match="guard band"):
        Network(net.lightpaths, ok, 25e9, 6e9)


def test_network_rejects_duplicate_slot():
    net = build_toy_network()
    paths = (net.lightpaths[0],
             Lightpath(net.lightpaths[1].route,
                       net.lightpaths[1].demand_rate_gbps,
                       net.lightpaths[1].modulation,
                       net.lightpaths[1].bandwidth_hz,
                       net.lightpaths[0].center_frequency_hz))
    with pytest.raises(ValueError, match="duplicate channel grid slot"):
        Network(paths, net.shared_span_matrix, 50e9, 6e9)


def test_subset_keeps_order_and_matrix(network):
    sub = network.subset(["R4", "R8", "R9", "R12"])
    assert sub.names == ["R4", "R8", "R9", "R12"]
    idx = [network.names.index(n) for n in sub.names]
    np.testing.assert_array_equal(
        sub.shared_span_matrix,
        network.shared_span_matrix[np.ix_(idx, idx)])
    with pytest.raises(ValueError, match="unknown"):
        network.subset(["R4", "R99"])


def test_shared_spans_accessor(network):
    i, j = network.names.index("R1"), network.names.index("R2")
    assert shared_spans(network, i, j) == network.shared_span_matrix[i, j]
    with pytest.raises(IndexError):
        shared_spans(network, 0, 99)


def test_replicate_tiles_demands(network, phys):
    doubled = network.replicate(2)
    m = network.n_channels
    assert doubled.n_channels == 2 * m
    assert doubled.names[:m] == network.names
    assert doubled.names[m] == f"{network.names[0]}.1"
    shift = m * network.channel_spacing_hz
    for lp, copy in zip(network.lightpaths, doubled.lightpaths[m:]):
        assert copy.center_frequency_hz == lp.center_frequency_hz + shift
        assert copy.route.spans == lp.route.spans
    np.testing.assert_array_equal(
        doubled.shared_span_matrix,
        np.tile(network.shared_span_matrix, (2, 2)))
    # the grid stays valid: the QoT model accepts the tiled network
    QotModel(doubled, phys)


def test_replicate_identity(network):
    same = network.replicate(1)
    assert same.names == network.names
    with pytest.raises(ValueError):
        network.replicate(0)


def test_interpolate_param():
    pair = AgePair(0.20, 0.30)
    assert interpolate_param(pair, 0.0, 0.0, 10.0) == 0.20
    assert interpolate_param(pair, 10.0, 0.0, 10.0) == 0.30
    assert interpolate_param(pair, 5.0, 0.0, 10.0) == pytest.approx(0.25)
    with pytest.raises(ValueError, match="lifetime"):
        interpolate_param(pair, 11.0, 0.0, 10.0)


def test_physical_params_ageing_resolution():
    phys = build_toy_phys()
    aged = phys.at(5.0)
    assert aged.alpha_db_per_km == pytest.approx(0.25)
    assert aged.design_margin_db == pytest.approx(1.5)
    assert aged.transponder_margin_db == pytest.approx(1.25)
    assert phys.at(0.0).roadm_loss_db == 14.0


def test_physical_params_validation():
    with pytest.raises(ValueError, match="p_min_dbm"):
        build_toy_phys(p_min_dbm=20.0, p_max_dbm=20.0)
    with pytest.raises(ValueError, match="monitor_var_db"):
        build_toy_phys(monitor_var_db=-0.1)
    with pytest.raises(ValueError, match="xci_span_mode"):
        build_toy_phys(xci_span_mode="bogus")
    with pytest.raises(ValueError, match="pert_envelope"):
        build_toy_phys(pert_envelope="linear")
    with pytest.raises(ValueError, match="nl_alpha_convention"):
        build_toy_phys(nl_alpha_convention="nats")
