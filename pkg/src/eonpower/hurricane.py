"""Hurricane-inspired stochastic search over launch powers.

One "eye" (the incumbent power vector, dBm) is orbited by K parcels.
Each iteration every parcel displaces a single adjacent coordinate pair
of the eye by a logarithmic-spiral step; the best improving parcel pulls
the eye to itself, surviving parcels advance along their spirals, and
parcels thrown out of the valid region re-enter at a fresh angle.  The
chaotic variant feeds the spiral with logistic-map draws instead of
uniform random numbers; that is the entire difference between the two.

A parcel is discarded (spiral reset) for any of three reasons: its
candidate leaves the per-channel power box, its spiral radius outgrows
the step budget, or its candidate's worst observed margin falls below
the feasibility guard.  All geometry lives in the dBm domain.  The
evaluation budget of a run is exactly n_iterations * (n_parcels + 1)
objective rows.
"""
import numpy as np
from sklearn.base import BaseEstimator

from . import metrics
from .report import RunReport
from .validation import check_choice, check_int, check_scalar

TWO_PI = 2.0 * np.pi

# logistic-map fixed points and short cycles; a stream seeded on (or
# within float noise of) one of these never leaves it
_DEGENERATE_Z0 = (0.0, 0.25, 0.5, 0.75, 1.0)
_Z0_TOL = 1e-9


class LogisticDraws:
    """Per-parcel logistic-map streams z <- mu*z*(1-z).

    Each parcel gets its own initial condition from an independent
    seeded generator, rejected until it clears the map's degenerate
    points.  ``start`` stores that batch as ``initial`` (the entry
    angles come from it); ``next`` advances every stream once and
    returns the batch.
    """

    def __init__(self, seed=0, mu=4.0):
        self.seed = seed
        self.mu = float(mu)
        self.initial = None
        self._state = None

    def start(self, n_parcels):
        z0 = np.empty(n_parcels)
        for k in range(n_parcels):
            gen = np.random.default_rng([self.seed, k])
            z = gen.uniform()
            while any(abs(z - bad) < _Z0_TOL for bad in _DEGENERATE_Z0):
                z = gen.uniform()
            z0[k] = z
        self.initial = z0.copy()
        self._state = z0
        return self

    def next(self):
        self._state = self.mu * self._state * (1.0 - self._state)
        return self._state.copy()


class UniformDraws:
    """Pseudo-random uniform(0, 1) batches, one seeded stream per parcel.

    Per-parcel streams keep each parcel's draw sequence stable when the
    parcel count changes between runs (budget sweeps).  ``start`` draws
    the ``initial`` batch; ``next`` returns fresh batches.
    """

    def __init__(self, seed=0):
        self.seed = seed
        self.initial = None
        self._gens = None

    def start(self, n_parcels):
        self._gens = [np.random.default_rng([self.seed, k])
                      for k in range(n_parcels)]
        self.initial = np.array([g.uniform() for g in self._gens])
        return self

    def next(self):
        return np.array([g.uniform() for g in self._gens])


class FixedDraws:
    """Deterministic draw schedule for tests.

    A scalar or (K,) batch repeats forever and doubles as ``initial``;
    an (N, K) table spends row 0 on ``initial`` and cycles the rest
    through ``next``.
    """

    def __init__(self, values):
        self.values = np.atleast_1d(np.asarray(values, dtype=float))
        self.initial = None
        self._n = 0
        self._row = 0

    def start(self, n_parcels):
        self._n = n_parcels
        if self.values.ndim == 2:
            self.initial = np.broadcast_to(
                self.values[0], (n_parcels,)).astype(float)
            self._row = 1
        else:
            self.initial = np.broadcast_to(
                self.values if self.values.size > 1 else self.values[0],
                (n_parcels,)).astype(float)
            self._row = 0
        return self

    def next(self):
        if self.values.ndim == 2:
            body = self.values[1:] if len(self.values) > 1 else self.values
            row = body[(self._row - 1) % len(body)]
            self._row += 1
            return np.broadcast_to(row, (self._n,)).astype(float)
        return self.initial.copy()


class HurricaneSearch(BaseEstimator):
    """Spiral-search power allocator.

    Parameters
    ----------
    n_parcels : parcels orbiting the eye (K).
    n_iterations : outer iterations (each costs n_parcels + 1 rows).
    r0 : base spiral radius in dBm units; the live radius is
        r0 * exp(theta * z).
    omega : angular increment of surviving parcels, radians.
    variant : "chaotic" (logistic draws) or "uniform".
    seed : seeds the draw streams.
    initial_dbm : starting eye, scalar or per-channel vector.
    draws : explicit draw source overriding variant/seed (tests).
    mu : logistic-map rate for the chaotic variant.
    max_step_db : displacement budget; a spiral radius beyond this many
        dB re-enters at a fresh angle instead of being applied.
    guard_shrink : safety factor on the feasibility guard.  Candidates
        whose worst observed margin falls below guard_shrink times the
        eye's own worst margin (or below the hard floor) are discarded.

    The objective must expose ``n_channels``, ``bounds_dbm``,
    ``channel_names``, ``new_iteration`` and be callable on power-row
    batches; ``power_cap_dbm``, ``psi_floor`` and ``min_psi_`` are used
    when present.
    """

    def __init__(self, n_parcels=132, n_iterations=180, r0=5.8318e-6,
                 omega=1.6975, variant="chaotic", seed=0,
                 initial_dbm=0.0, draws=None, mu=4.0,
                 max_step_db=1.0, guard_shrink=0.9):
        self.n_parcels = n_parcels
        self.n_iterations = n_iterations
        self.r0 = r0
        self.omega = omega
        self.variant = variant
        self.seed = seed
        self.initial_dbm = initial_dbm
        self.draws = draws
        self.mu = mu
        self.max_step_db = max_step_db
        self.guard_shrink = guard_shrink

    def _make_draws(self):
        if self.draws is not None:
            return self.draws
        if self.variant == "chaotic":
            return LogisticDraws(seed=self.seed, mu=self.mu)
        if self.variant == "uniform":
            return UniformDraws(seed=self.seed)
        raise ValueError(f"unknown variant: {self.variant!r}")

    def fit(self, pressure):
        check_int(self.n_parcels, "n_parcels", low=1)
        check_int(self.n_iterations, "n_iterations", low=1)
        check_scalar(self.r0, "r0", low=0.0, inclusive=False)
        check_scalar(self.omega, "omega", low=0.0, inclusive=False)
        check_scalar(self.max_step_db, "max_step_db", low=0.0,
                     inclusive=False)
        check_scalar(self.guard_shrink, "guard_shrink", low=0.0, high=1.0)
        check_choice(self.variant, "variant", ("chaotic", "uniform"))

        m = pressure.n_channels
        if m < 2:
            raise ValueError("pair displacement needs at least 2 channels")
        lo, hi = pressure.bounds_dbm
        cap = np.broadcast_to(np.asarray(
            getattr(pressure, "power_cap_dbm", hi), dtype=float), (m,))
        floor = getattr(pressure, "psi_floor", None)
        k = self.n_parcels
        h = m - 1

        eye = np.clip(np.broadcast_to(
            np.asarray(self.initial_dbm, dtype=float), (m,)).copy(), lo, cap)
        draws = self._make_draws().start(k)
        theta = np.zeros(k)
        theta_entry = draws.initial * TWO_PI
        # parcel k displaces coordinates (pair[k], pair[k]+1)
        pair = (np.arange(1, k + 1) % h + 1) - 1
        rows = np.arange(k)

        trace_p = [eye.copy()]
        trace_j = []
        j_eye_after = None
        accepted = 0

        for n in range(1, self.n_iterations + 1):
            pressure.new_iteration(n)
            j_eye = float(pressure(eye))
            guard = None
            if floor is not None:
                eye_min = getattr(pressure, "min_psi_", None)
                if eye_min is not None:
                    guard = min(floor, self.guard_shrink * float(eye_min))

            z = draws.next()
            with np.errstate(over="ignore"):
                radius = self.r0 * np.exp(theta * z)
            angle = theta_entry + theta
            parcels = np.repeat(eye[None, :], k, axis=0)
            parcels[rows, pair] += radius * np.cos(angle)
            parcels[rows, pair + 1] += radius * np.sin(angle)

            violating = (radius > self.max_step_db) \
                | ~np.all((parcels >= lo) & (parcels <= cap)
                          & np.isfinite(parcels), axis=1)
            # violating rows still consume budget; clamp only to keep the
            # arithmetic finite, their values are discarded anyway
            batch = np.clip(np.nan_to_num(parcels, nan=0.0,
                                          posinf=hi + 80.0,
                                          neginf=lo - 200.0),
                            lo - 200.0, hi + 80.0)
            values = pressure(batch)
            if guard is not None:
                violating |= np.asarray(pressure.min_psi_) < guard

            improving = ~violating & (values < j_eye)
            with np.errstate(over="ignore", invalid="ignore"):
                damped = self.omega * np.where(
                    radius < hi, 1.0,
                    (hi / radius) ** z)
            theta[~violating] += damped[~violating]
            theta_entry[violating] = z[violating] * TWO_PI
            theta[violating] = 0.0

            if improving.any():
                candidates = np.where(improving, values, np.inf)
                kbest = int(np.argmin(candidates))
                eye = parcels[kbest].copy()
                j_eye_after = float(values[kbest])
                accepted += 1
            else:
                j_eye_after = j_eye
            trace_p.append(eye.copy())
            trace_j.append(j_eye_after)

        self.powers_dbm_ = eye
        self.objective_ = j_eye_after
        self.n_accepted_ = accepted
        algorithm = "chso" if self.variant == "chaotic" else "hso"
        flops = None
        model = getattr(pressure, "model", None)
        if model is not None:
            flops = metrics.flops_hurricane(
                self.n_iterations, k, m,
                metrics.network_flop_term(model.network),
                chaotic=(self.variant == "chaotic"))
        self.report_ = RunReport(
            algorithm=algorithm,
            seed=self.seed,
            channel_names=pressure.channel_names,
            powers_dbm=eye,
            objective=self.objective_,
            j1_trace=np.asarray(trace_j),
            power_trace_dbm=np.asarray(trace_p),
            evaluations=pressure.n_evaluations,
            params={"n_parcels": k, "n_iterations": self.n_iterations,
                    "r0": self.r0, "omega": self.omega,
                    "variant": self.variant, "accepted": accepted},
            flops=flops,
        )
        return self

    def predict(self, pressure=None):
        """Fitted launch powers in dBm."""
        return self.powers_dbm_.copy()
