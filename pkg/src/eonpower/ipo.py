"""Input-parameter tuning and budget selection for the spiral search.

Golden-section passes tune the base radius (handled in the log10
domain) and the angular rate against the expected final pressure over a
bank of seeded runs.  Success-probability surfaces then map where the
tuned search lands inside the commissioning band, and a Pareto scan
over the surface picks the cheapest (parcels, iterations) budget that
still succeeds.
"""
from dataclasses import dataclass

import numpy as np

from . import metrics
from .hurricane import HurricaneSearch
from .validation import check_choice, check_int, check_scalar

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0

# empirical success probability at or above this counts as "reliable"
SUCCESS_THRESHOLD = 0.94


@dataclass
class IpoConfig:
    """Knobs of the alternating golden-section tuner."""

    n_loops: int = 30
    n_realizations: int = 100
    tol_r0: float = 1e-2          # log10 units
    tol_omega: float = 1e-2       # radians
    r0_log10_bounds: tuple = (-10.0, 2.0)
    omega_bounds: tuple = (1e-4 * np.pi, 2.0 * np.pi)
    initial_omega: float = np.pi / 2.0
    golden: float = GOLDEN

    def __post_init__(self):
        check_int(self.n_loops, "n_loops", low=1)
        check_int(self.n_realizations, "n_realizations", low=1)
        check_scalar(self.tol_r0, "tol_r0", low=0.0, inclusive=False)
        check_scalar(self.tol_omega, "tol_omega", low=0.0, inclusive=False)
        for name in ("r0_log10_bounds", "omega_bounds"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} must be an increasing pair")
        check_scalar(self.golden, "golden", low=1.0, inclusive=False)


def _eval(f, x):
    value = float(f(x))
    if not np.isfinite(value):
        raise RuntimeError(f"tuning objective returned {value!r} at {x!r}")
    return value


def _golden_pass(f, lo, hi, tol, golden):
    """Minimize f on [lo, hi] by golden-section; returns the midpoint of
    the final bracket.  Each update shrinks the bracket by 1/golden.
    """
    inv = 1.0 / golden
    x1 = hi - inv * (hi - lo)
    x2 = lo + inv * (hi - lo)
    f1, f2 = _eval(f, x1), _eval(f, x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv * (hi - lo)
            f1 = _eval(f, x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv * (hi - lo)
            f2 = _eval(f, x2)
    return 0.5 * (lo + hi)


def tune_parameter(target, fixed, objective, config, n_loop=1,
                   current=None):
    """One golden-section pass over the base radius or the angular rate.

    ``objective(r0, omega)`` is minimized over the ``target`` coordinate
    ("r0", searched in log10, or "omega") with the other held at
    ``fixed``.  The first loop scans the whole configured box; later
    loops recenter a geometrically shrinking interval on ``current``,
    clamped to the box.  Returns the midpoint of the final bracket.
    """
    check_choice(target, "target", ("r0", "omega"))
    check_int(n_loop, "n_loop", low=1)
    if target == "r0":
        lo_box, hi_box = config.r0_log10_bounds
        tol = config.tol_r0
        f = lambda u: objective(10.0 ** u, fixed)
        center = None if current is None else float(np.log10(current))
    else:
        lo_box, hi_box = config.omega_bounds
        tol = config.tol_omega
        f = lambda w: objective(fixed, w)
        center = current
    if n_loop <= 1 or center is None:
        lo, hi = lo_box, hi_box
    else:
        span = min(abs(center - lo_box), abs(center - hi_box)) \
            / (0.5 * config.golden ** (n_loop - 2))
        lo = max(lo_box, center - span / 2.0)
        hi = min(hi_box, center + span / 2.0)
    mid = _golden_pass(f, lo, hi, tol, config.golden)
    return 10.0 ** mid if target == "r0" else mid


def tune_inputs(objective, config, initial_omega=None):
    """Alternating tuner: each loop refines r0 (omega fixed), then omega
    (r0 fixed).  Returns (r0, omega, history) with one history row per
    loop.
    """
    omega = config.initial_omega if initial_omega is None else initial_omega
    r0 = None
    history = []
    for n in range(1, config.n_loops + 1):
        r0 = tune_parameter("r0", omega, objective, config, n_loop=n,
                            current=r0)
        omega = tune_parameter("omega", r0, objective, config, n_loop=n,
                               current=omega if n > 1 else None)
        history.append({"loop": n, "r0": r0, "omega": omega})
    return r0, omega, history


def make_objective(pressure_factory, n_realizations, **search_params):
    """Objective(r0, omega): mean final eye pressure over seeded runs."""
    def objective(r0, omega):
        finals = []
        for seed in range(n_realizations):
            est = HurricaneSearch(r0=float(r0), omega=float(omega),
                                  seed=seed, **search_params)
            est.fit(pressure_factory())
            finals.append(est.objective_)
        return float(np.mean(finals))
    return objective


def _band_hits(model, trace_dbm, rows):
    psi = metrics.psi_trace(model, np.asarray(trace_dbm)[rows])
    lo = 1.0 - model.phys.lambda1
    hi = 1.0 + model.phys.lambda2
    return np.all((psi >= lo) & (psi <= hi), axis=-1)


def cpos_ps1(pressure_factory, r0_grid, iteration_grid, omega,
             n_realizations, **search_params):
    """Success-probability surface over (r0, iteration).

    A cell counts a seeded run as a success when every channel's margin
    ratio sits inside the commissioning band at that iteration.  One run
    per (r0, seed) at the largest requested iteration serves the whole
    row: earlier rows of its power trace are exactly the shorter runs.
    """
    r0s = np.asarray(r0_grid, dtype=float)
    ns = np.asarray(iteration_grid, dtype=int)
    if r0s.size == 0 or ns.size == 0:
        raise ValueError("empty grid")
    if np.any(ns < 0):
        raise ValueError("iteration grid must be nonnegative")
    params = dict(search_params)
    params.pop("n_iterations", None)
    n_max = max(int(ns.max()), 1)
    surface = np.zeros((r0s.size, ns.size))
    for i, r0 in enumerate(r0s):
        hits = np.zeros(ns.size)
        for seed in range(n_realizations):
            pressure = pressure_factory()
            est = HurricaneSearch(r0=float(r0), omega=float(omega),
                                  seed=seed, n_iterations=n_max, **params)
            est.fit(pressure)
            hits += _band_hits(pressure.model,
                               est.report_.power_trace_dbm, ns)
        surface[i] = hits / n_realizations
    return surface


def cpos_ps2(pressure_factory, parcel_grid, iteration_grid, r0, omega,
             n_realizations, **search_params):
    """Success-probability surface over (parcels, iterations) at the
    final iteration of each budget.  Zero-parcel or zero-iteration cells
    are failures by definition and are not run.
    """
    ks = np.asarray(parcel_grid, dtype=int)
    nfs = np.asarray(iteration_grid, dtype=int)
    if ks.size == 0 or nfs.size == 0:
        raise ValueError("empty grid")
    params = dict(search_params)
    params.pop("n_iterations", None)
    params.pop("n_parcels", None)
    nf_max = max(int(nfs.max()), 1)
    rows = np.clip(nfs, 0, None)
    surface = np.zeros((ks.size, nfs.size))
    for i, k in enumerate(ks):
        if k <= 0:
            continue
        hits = np.zeros(nfs.size)
        for seed in range(n_realizations):
            pressure = pressure_factory()
            est = HurricaneSearch(n_parcels=int(k), n_iterations=nf_max,
                                  r0=float(r0), omega=float(omega),
                                  seed=seed, **params)
            est.fit(pressure)
            ok = _band_hits(pressure.model,
                            est.report_.power_trace_dbm, rows)
            ok[nfs <= 0] = False
            hits += ok
        surface[i] = hits / n_realizations
    return surface


@dataclass(frozen=True)
class ParetoPoint:
    """One frontier budget: parcels, iterations, its empirical success
    probability and closed-form operation count."""

    n_parcels: int
    n_iterations: int
    success: float
    flops: float


def pareto_frontier(parcel_grid, iteration_grid, surface, flop_fn,
                    threshold=SUCCESS_THRESHOLD):
    """Staircase of cheapest successful budgets.

    Scans iteration counts from largest to smallest; at each, takes the
    smallest parcel count that succeeds and is no smaller than the
    previous pick (parcels must grow as iterations shrink).  Returns
    ParetoPoint rows in scan order; empty list when nothing succeeds.
    """
    ks = np.asarray(parcel_grid, dtype=int)
    nfs = np.asarray(iteration_grid, dtype=int)
    surface = np.asarray(surface, dtype=float)
    if surface.shape != (ks.size, nfs.size):
        raise ValueError(f"surface must be {(ks.size, nfs.size)}, "
                         f"got {surface.shape}")
    success = surface >= threshold
    points = []
    k_floor = 0
    for j in np.argsort(nfs)[::-1]:
        allowed = np.flatnonzero(success[:, j] & (ks >= k_floor))
        if allowed.size == 0:
            continue
        i = allowed[np.argmin(ks[allowed])]
        k_floor = int(ks[i])
        points.append(ParetoPoint(
            n_parcels=int(ks[i]), n_iterations=int(nfs[j]),
            success=float(surface[i, j]),
            flops=float(flop_fn(int(ks[i]), int(nfs[j])))))
    return points


def select_tradeoff(frontier):
    """Frontier point with the lowest operation count."""
    if not frontier:
        raise ValueError("empty frontier")
    return min(frontier, key=lambda point: point.flops)
