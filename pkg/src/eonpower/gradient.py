"""Projected gradient descent on the launch-power pressure function.

Serves two roles: a conventional baseline for the search algorithms and
the reference solver that produces the "true" optimum other runs are
scored against.  All iterates live in the dBm domain and are projected
back into the transmit-power box after every step.
"""
import numpy as np
from sklearn.base import BaseEstimator

from . import metrics
from .report import RunReport
from .validation import check_int, check_scalar


def gradient_j1(pressure, powers_dbm, step_dbm=1e-5):
    """Central-difference gradient of the pressure in the dBm domain.

    Costs exactly 2*M objective rows.
    """
    p = np.asarray(powers_dbm, dtype=float)
    m = p.size
    probes = np.repeat(p[None, :], 2 * m, axis=0)
    idx = np.arange(m)
    probes[idx, idx] += step_dbm
    probes[m + idx, idx] -= step_dbm
    values = pressure(probes)
    return (values[:m] - values[m:]) / (2.0 * step_dbm)


class GradientDescent(BaseEstimator):
    """Armijo backtracking descent with box projection.

    Parameters
    ----------
    max_iterations : outer iteration cap.
    fd_step_dbm : central-difference probe half-width, dBm.
    armijo_c : sufficient-decrease constant.
    backtrack_shrink : step multiplier on each failed Armijo test.
    max_backtracks : line-search depth before declaring a stall.
    grad_tol : gradient-norm stopping threshold.
    initial_dbm : starting point, scalar or per-channel vector.
    """

    def __init__(self, max_iterations=400, fd_step_dbm=1e-5,
                 armijo_c=1e-4, backtrack_shrink=0.5, max_backtracks=30,
                 grad_tol=1e-9, initial_dbm=0.0):
        self.max_iterations = max_iterations
        self.fd_step_dbm = fd_step_dbm
        self.armijo_c = armijo_c
        self.backtrack_shrink = backtrack_shrink
        self.max_backtracks = max_backtracks
        self.grad_tol = grad_tol
        self.initial_dbm = initial_dbm

    def fit(self, pressure):
        check_int(self.max_iterations, "max_iterations", low=1)
        check_scalar(self.fd_step_dbm, "fd_step_dbm", low=0.0,
                     inclusive=False)
        check_scalar(self.armijo_c, "armijo_c", low=0.0, high=1.0,
                     inclusive=False)
        check_scalar(self.backtrack_shrink, "backtrack_shrink", low=0.0,
                     high=1.0, inclusive=False)

        m = pressure.n_channels
        lo, hi = pressure.bounds_dbm
        p = np.broadcast_to(np.asarray(self.initial_dbm, dtype=float),
                            (m,)).copy()
        p = np.clip(p, lo, hi)

        j_current = float(pressure(p))
        trace_p = [p.copy()]
        trace_j = []
        backtracks = []
        stop = "max_iterations"

        for _ in range(self.max_iterations):
            grad = gradient_j1(pressure, p, self.fd_step_dbm)
            gnorm = float(np.linalg.norm(grad))
            if gnorm < self.grad_tol:
                stop = "gradient"
                break
            direction = -grad / gnorm
            step = 1.0
            n_bt = 0
            accepted = None
            while n_bt <= self.max_backtracks:
                candidate = np.clip(p + step * direction, lo, hi)
                j_new = float(pressure(candidate))
                if j_new <= j_current - self.armijo_c * step * gnorm:
                    accepted = (candidate, j_new)
                    break
                step *= self.backtrack_shrink
                n_bt += 1
            backtracks.append(n_bt)
            if accepted is None:
                stop = "line_search"
                break
            p, j_current = accepted
            trace_p.append(p.copy())
            trace_j.append(j_current)

        if not trace_j:
            # stopped before the first accepted step
            trace_j = [j_current]
            trace_p.append(p.copy())

        self.powers_dbm_ = p
        self.objective_ = j_current
        self.n_iterations_ = len(trace_j)
        self.stop_reason_ = stop
        self.mean_backtracks_ = float(np.mean(backtracks)) if backtracks \
            else 0.0
        self.report_ = RunReport(
            algorithm="gd",
            seed=None,
            channel_names=pressure.channel_names,
            powers_dbm=p,
            objective=j_current,
            j1_trace=np.asarray(trace_j),
            power_trace_dbm=np.asarray(trace_p),
            evaluations=pressure.n_evaluations,
            params={"max_iterations": self.max_iterations,
                    "grad_tol": self.grad_tol,
                    "stop_reason": stop,
                    "mean_backtracks": self.mean_backtracks_},
        )
        return self

    def predict(self, pressure=None):
        """Fitted launch powers in dBm."""
        return self.powers_dbm_.copy()


def reference_powers(pressure_factory, n_starts=3, start_levels_dbm=None,
                     **gd_params):
    """Multi-start reference optimum.

    Starts are flat power levels on a descending ladder (0, -5, -10, ...
    dBm by default).  Launching below the per-channel SNR knee matters:
    the pressure surface has spurious stationary points where a channel
    overshoots its knee, and descent cannot back out of them.  From below
    the knee every start lands on the same optimum.

    ``pressure_factory`` is called once per start so evaluation counters
    stay per-run.  Returns the best powers (dBm), the max pairwise spread
    between the per-start optima (dBm), and the individual reports.
    """
    check_int(n_starts, "n_starts", low=1)
    if start_levels_dbm is None:
        start_levels_dbm = [-5.0 * k for k in range(n_starts)]
    if len(start_levels_dbm) < n_starts:
        raise ValueError("need at least one start level per start")
    reports = []
    best = None
    solutions = []
    for k in range(n_starts):
        pressure = pressure_factory()
        est = GradientDescent(initial_dbm=float(start_levels_dbm[k]),
                              **gd_params)
        est.fit(pressure)
        reports.append(est.report_)
        solutions.append(est.powers_dbm_)
        if best is None or est.objective_ < best[1]:
            best = (est.powers_dbm_, est.objective_)
    stacked = np.asarray(solutions)
    spread = float(np.max(np.abs(stacked[:, None, :] - stacked[None])))
    return best[0], spread, reports
