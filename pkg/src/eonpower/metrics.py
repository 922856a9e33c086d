"""Post-run quality metrics and operation-count models.

NMSE and the power penalty compare commanded launch powers against a
reference optimum in linear units; the residual-margin integral scores a
whole trajectory by how far the network sat from its SNR targets while
the optimizer was working.
"""
import numpy as np

from .units import dbm_to_watt

# settling tolerance on the squared per-channel deviation, watts^2
SETTLE_TOL_W2 = 1e-7


def nmse(powers_w, reference_w):
    """Normalized mean square error between power vectors, in watts.

    Accepts a single (M,) vector or a (N, M) trace; a trace returns the
    per-row NMSE.
    """
    p = np.asarray(powers_w, dtype=float)
    ref = np.asarray(reference_w, dtype=float)
    err = np.sum((p - ref) ** 2, axis=-1)
    return err / np.sum(ref ** 2)


def power_penalty(powers_w, reference_w):
    """Per-channel deviation from the reference, 10*log10(p/p*), in dB."""
    p = np.asarray(powers_w, dtype=float)
    ref = np.asarray(reference_w, dtype=float)
    return 10.0 * np.log10(p / ref)


def settling_iteration(power_trace_w, reference_w, tol_w2=SETTLE_TOL_W2):
    """First iteration after which each channel's squared deviation from
    its reference power stays within ``tol_w2`` for the rest of the trace.

    Returns ``(per_channel, mean)``: per-channel 1-based indices over the
    iteration rows plus their mean.  A channel that never settles (or
    settles only to leave again) gets the sentinel ``len + 1`` so averages
    still rank it last.
    """
    trace = np.asarray(power_trace_w, dtype=float)
    ref = np.asarray(reference_w, dtype=float)
    dev2 = (trace - ref) ** 2
    # worst deviation from this row onward, per channel
    worst = np.maximum.accumulate(dev2[::-1], axis=0)[::-1]
    inside = worst <= tol_w2
    per_channel = np.where(inside.any(axis=0),
                           inside.argmax(axis=0) + 1,
                           len(trace) + 1)
    return per_channel, float(per_channel.mean())


def psi_trace(model, power_trace_dbm):
    """Ground-truth SNR-to-target ratio for every row of a dBm trace."""
    return model.psi(dbm_to_watt(np.asarray(power_trace_dbm, dtype=float)))


def rm_integral(psi_values):
    """Residual-margin integral: per-channel sum of |10*log10 psi| over
    the whole trajectory, averaged across channels, in dB.
    """
    psi = np.asarray(psi_values, dtype=float)
    return float(np.mean(np.sum(np.abs(10.0 * np.log10(psi)), axis=0)))


def network_flop_term(network):
    """Sum over channels of traversed ROADM and span counts."""
    return int(sum(lp.route.roadm_count + lp.route.span_count
                   for lp in network.lightpaths))


def _qot_block(m, network_term):
    # per-evaluation cost of the quality-of-transmission model
    return 19 * m ** 2 + 5 * m + network_term


def flops_hurricane(n_iterations, n_parcels, n_channels, network_term,
                    chaotic=True):
    """Operation count of one hurricane-search run.

    The chaotic draw replaces the uniform generator's 9-op kernel with a
    3-op logistic step; everything else is identical.
    """
    nfk = n_iterations * n_parcels
    draw = 3 if chaotic else 9
    return float(22 * nfk + draw * nfk
                 + 3 * _qot_block(n_channels, network_term) * nfk)


def flops_gd(n_iterations, n_channels, network_term, n_backtracks):
    """Operation count of one gradient-descent run.

    ``n_backtracks`` is the mean line-search depth per iteration.
    """
    m = n_channels
    direct = n_iterations * (m ** 2 + 4 * m + 3)
    evals = n_iterations * (5 * n_backtracks * m + 5 * m + 1)
    return float(direct + _qot_block(m, network_term) * evals)


def attach_reference(report, reference_dbm, model=None, tol_w2=SETTLE_TOL_W2):
    """Fill the comparison fields of a run report against a reference
    optimum given in dBm.  With a model, also scores the residual-margin
    integral of the transmitted trajectory.
    """
    ref_w = dbm_to_watt(np.asarray(reference_dbm, dtype=float))
    trace_w = dbm_to_watt(np.asarray(report.power_trace_dbm, dtype=float))
    report.nmse_trace = nmse(trace_w[1:], ref_w)
    report.power_penalty_db = power_penalty(dbm_to_watt(report.powers_dbm),
                                            ref_w)
    _, report.settling_iteration = settling_iteration(trace_w[1:], ref_w,
                                                      tol_w2)
    if model is not None:
        report.rm_integral_db = rm_integral(
            psi_trace(model, report.power_trace_dbm[1:]))
    return report
