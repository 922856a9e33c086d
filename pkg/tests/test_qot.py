"""QoT model against an independent scalar re-derivation.

The oracle below recomputes every noise term for the toy network with
plain ``math`` calls and explicit loops, from the same physical
constants, sharing no code with the package. Closed-form agreement is
required to 1e-9 relative.
"""
import math

import numpy as np
import pytest

from eonpower import PressureFunction, QotModel
from eonpower.units import dbm_to_watt, watt_to_dbm
from conftest import build_toy_network, build_toy_phys

# toy-network facts, restated by hand
BW = 25e9
FREQ = (193.55e12, 193.60e12)
SPANS = (((80.0, 1, 2), (64.0, 1, 2)), ((64.0, 1, 2),))
ROADMS = (3, 2)
SHARED = ((2, 1), (1, 1))
PLANCK, CARRIER = 6.6261e-34, 193.55e12
BETA2, GAMMA = 2.07e-23, 1.3
QPSK_TARGET_DB = 8.50


def oracle_noise(i, p, tau=0.0):
    """ASE, SCI, XCI PSDs of toy channel i at powers p (watts), scalars."""
    frac = tau / 10.0
    alpha = 0.20 + frac * 0.10
    conn = 0.50 + frac * 0.20
    splice = 0.10 + frac * 0.10
    nf = 5.0 + frac * 1.0
    roadm = 14.0 + frac * 2.0

    units = ROADMS[i] * (10.0 ** (roadm / 10.0) - 1.0)
    for km, n_conn, n_spl in SPANS[i]:
        loss = km * alpha + n_conn * conn + n_spl * splice
        units += 10.0 ** (loss / 10.0) - 1.0
    ase = PLANCK * CARRIER * 10.0 ** (nf / 10.0) * units

    c1 = 3.0 * GAMMA ** 2 / (2.0 * math.pi * alpha * BETA2)
    asinh = math.asinh(math.pi ** 2 * BETA2 * BW ** 2 / (2.0 * alpha))
    g = [pw / BW for pw in p]
    sci = c1 * asinh * g[i] ** 3 * len(SPANS[i])

    xci = 0.0
    for j in range(2):
        if j == i:
            continue
        gap = abs(FREQ[i] - FREQ[j])
        ln = math.log((gap + BW / 2.0) / (gap - BW / 2.0))
        xci += ln * SHARED[i][j] * g[j] ** 2
    xci *= c1 * g[i]
    return ase, sci, xci


def oracle_psi(i, p, tau=0.0):
    ase, sci, xci = oracle_noise(i, p, tau)
    snr = p[i] / ((ase + sci + xci) * BW)
    frac = tau / 10.0
    margin_db = (1.0 + frac * 0.5) + (2.0 - frac * 1.0)
    return snr / (10.0 ** (margin_db / 10.0) * 10.0 ** (QPSK_TARGET_DB / 10.0))


POWER_CASES = [
    (1e-3, 1e-3),
    (2e-3, 5e-4),
    (1e-4, 3e-3),
    (5e-3, 5e-3),
]


@pytest.fixture()
def toy_model(toy_network, toy_phys):
    return QotModel(toy_network, toy_phys)


@pytest.mark.parametrize("p", POWER_CASES)
def test_noise_terms_match_oracle(toy_model, p):
    p = np.asarray(p)
    for i in range(2):
        ase, sci, xci = oracle_noise(i, p)
        assert toy_model.ase_psd(i) == pytest.approx(ase, rel=1e-9)
        assert toy_model.sci_psd(i, p[i]) == pytest.approx(sci, rel=1e-9)
        assert toy_model.xci_psd(i, p) == pytest.approx(xci, rel=1e-9)


@pytest.mark.parametrize("p", POWER_CASES)
def test_snr_and_psi_match_oracle(toy_model, p):
    p = np.asarray(p)
    psi = toy_model.psi(p)
    for i in range(2):
        ase, sci, xci = oracle_noise(i, p)
        snr = p[i] / ((ase + sci + xci) * BW)
        assert toy_model.snr(i, p) == pytest.approx(snr, rel=1e-9)
        assert psi[i] == pytest.approx(oracle_psi(i, p), rel=1e-9)


def test_objective_matches_oracle(toy_model):
    p = np.asarray(POWER_CASES[1])
    expected = math.sqrt(sum((1.0 - oracle_psi(i, p)) ** 2
                             for i in range(2)))
    assert toy_model.objective_j1(p) == pytest.approx(expected, rel=1e-9)


def test_aged_model_matches_oracle(toy_network, toy_phys):
    aged = QotModel(toy_network, toy_phys, tau=10.0)
    p = np.asarray(POWER_CASES[0])
    for i in range(2):
        assert aged.psi(p)[i] == pytest.approx(
            oracle_psi(i, p, tau=10.0), rel=1e-9)
    # more loss and less margin at end of life
    bol = QotModel(toy_network, toy_phys)
    assert np.all(aged.psi(p) < bol.psi(p))
    assert aged.margin_db == pytest.approx(2.5)


def test_vectorized_matches_per_channel(model):
    rng = np.random.default_rng(7)
    m = model.n_channels
    for _ in range(5):
        p = dbm_to_watt(rng.uniform(-10.0, 5.0, m))
        walk = np.array([model.snr(i, p) for i in range(m)])
        np.testing.assert_allclose(model.snr_all(p), walk, rtol=1e-12)
    batch = dbm_to_watt(rng.uniform(-10.0, 5.0, (4, m)))
    rows = np.stack([model.snr_all(row) for row in batch])
    np.testing.assert_allclose(model.snr_all(batch), rows, rtol=1e-12)


def test_power_cap_matches_brute_force_knee(model):
    """The per-channel cap is the single-channel SNR maximizer (or the
    box top when the knee sits above it)."""
    p_grid = dbm_to_watt(np.linspace(-30.0, 20.0, 200001))
    for i in (0, 5, 11):
        ase, coef, bw = model._ase[i], model._sci_coef[i], model.bandwidth[i]
        snr = p_grid / ((ase + coef * (p_grid / bw) ** 3) * bw)
        knee = p_grid[int(np.argmax(snr))]
        expected = min(knee, dbm_to_watt(model.phys.p_max_dbm))
        assert model.power_cap_w[i] == pytest.approx(expected, rel=1e-3)
    assert np.all(watt_to_dbm(model.power_cap_w) <= model.phys.p_max_dbm)


def test_psi_floor_is_margin_reciprocal(model):
    assert model.psi_floor == pytest.approx(10.0 ** (-model.margin_db / 10.0),
                                            rel=1e-12)
    # all margin consumed <=> observed SNR exactly at the format target
    assert model.psi_floor == pytest.approx(1.0 / model.margin_lin)


def test_check_constraints_band(toy_model):
    p = np.asarray(POWER_CASES[0])
    c1, c2, c3 = toy_model.check_constraints(p)
    psi = toy_model.psi(p)
    np.testing.assert_array_equal(c1, psi >= 1.0 - toy_model.phys.lambda1)
    assert c2.all()
    assert c3.all()
    c1s, _, c3s = toy_model.check_constraints(np.array([1e-18, 1e-18]))
    assert not c1s.any()
    assert not c3s.any()


def test_breakdown_consistency(toy_model):
    p = np.asarray(POWER_CASES[1])
    down = toy_model.breakdown(p)
    np.testing.assert_allclose(down.psi, toy_model.psi(p), rtol=1e-12)
    np.testing.assert_allclose(down.snr_b2b * toy_model.margin_lin,
                               down.snr, rtol=1e-12)
    assert down.feasible == bool(np.all(down.c1 & down.c2 & down.c3))
    assert np.all((down.ber > 0) & (down.ber < 0.5))


def test_overlapping_grid_rejected(toy_network, toy_phys):
    from dataclasses import replace
    paths = (toy_network.lightpaths[0],
             replace(toy_network.lightpaths[1],
                     center_frequency_hz=193.56e12))
    net = type(toy_network)(paths, toy_network.shared_span_matrix,
                            toy_network.channel_spacing_hz,
                            toy_network.guard_band_hz)
    with pytest.raises(ValueError, match="grid violation"):
        QotModel(net, toy_phys)


def test_pressure_counts_rows(toy_model):
    pressure = PressureFunction(toy_model)
    p = np.zeros(2)
    j = pressure(p)
    assert pressure.n_evaluations == 1
    batch = np.zeros((5, 2))
    vals = pressure(batch)
    assert pressure.n_evaluations == 6
    assert vals.shape == (5,)
    np.testing.assert_allclose(vals, j, rtol=1e-15)


def test_pressure_is_scaled_objective(toy_model):
    p_dbm = np.array([-2.0, 1.0])
    plain = PressureFunction(toy_model)
    scaled = PressureFunction(toy_model, upsilon=2.5)
    expected = toy_model.objective_j1(dbm_to_watt(p_dbm))
    assert plain(p_dbm) == pytest.approx(expected, rel=1e-12)
    assert scaled(p_dbm) == pytest.approx(2.5 * expected, rel=1e-12)


def test_pressure_min_psi_tracking(toy_model):
    pressure = PressureFunction(toy_model)
    p = np.array([-2.0, 1.0])
    pressure(p)
    assert pressure.min_psi_ == pytest.approx(
        float(toy_model.psi(dbm_to_watt(p)).min()), rel=1e-12)
    batch = np.stack([p, p + 1.0])
    pressure(batch)
    assert np.shape(pressure.min_psi_) == (2,)


def test_pressure_exposes_search_surface(toy_model):
    pressure = PressureFunction(toy_model)
    assert pressure.n_channels == 2
    assert pressure.channel_names == ["A", "B"]
    assert pressure.bounds_dbm == (-100.0, 20.0)
    np.testing.assert_allclose(pressure.power_cap_dbm,
                               watt_to_dbm(toy_model.power_cap_w))
    assert pressure.psi_floor == toy_model.psi_floor
    pressure.new_iteration(4)
    assert pressure.iteration == 4
