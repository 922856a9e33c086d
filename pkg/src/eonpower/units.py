"""dB / linear / dBm conversion helpers.

All optimizer arithmetic runs in the dBm domain; the physical model runs in
watts and W/Hz. These helpers are the only place the conversions live.
"""
import numpy as np

MW_PER_W = 1e3


def db_to_lin(value_db):
    """Convert a dB quantity to a linear power ratio."""
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def lin_to_db(value_lin):
    """Convert a linear power ratio to dB."""
    return 10.0 * np.log10(value_lin)


def dbm_to_watt(p_dbm):
    """Convert launch power from dBm to watts."""
    return 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0) / MW_PER_W


def watt_to_dbm(p_watt):
    """Convert launch power from watts to dBm."""
    return 10.0 * np.log10(np.asarray(p_watt, dtype=float) * MW_PER_W)
