"""Imperfect-channel scenarios wrapped around the optimizers.

Three effects from commissioning practice: optical monitors report SNR
through a per-channel calibration error (lognormal in the linear
domain, parameterized in dB), equipment ages on a year schedule that
reshapes the whole QoT model, and drop events remove channels mid-run
while a decaying power oscillation shakes the survivors.  The wrappers
distort only what the optimizer observes and what the transponders
actually emit; the ground-truth model used for final verdicts is never
touched.
"""
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .config import ConfigError, load_document
from .qot import PressureFunction, QotModel
from .validation import check_choice, check_int, check_scalar

# seed spacing between the optimizer restarts of a multi-phase run; far
# larger than any seed bank so phase streams never collide
PHASE_SEED_STRIDE = 1_000_003


def noisy_snr(snr, sigma_db, mu_db=0.0, rng=None):
    """Observed SNR: true * (1 + eps) with a dB-domain normal error.

    eps = 10^(X/10) - 1, X ~ Normal(mu_db, sigma_db); eps > -1 by
    construction, so the observed SNR stays positive.  sigma_db = 0 and
    mu_db = 0 return the input exactly.
    """
    check_scalar(sigma_db, "sigma_db", low=0.0)
    snr = np.asarray(snr, dtype=float)
    if rng is None:
        rng = np.random.default_rng()
    x = rng.normal(mu_db, sigma_db, size=snr.shape)
    return snr * 10.0 ** (x / 10.0)


def perturbation(n, amplitude_db, envelope="geometric"):
    """Transient power oscillation, dB, at window-relative step n.

    geometric: amplitude^n * sin(n*pi/2) (a decaying settling
    transient); constant: amplitude * sin(n*pi/2).  The quarter-wave
    phase pattern is evaluated exactly, so even steps are zero.
    """
    check_int(n, "n", low=0)
    check_choice(envelope, "envelope", ("geometric", "constant"))
    phase = (0.0, 1.0, 0.0, -1.0)[n % 4]
    gain = amplitude_db ** n if envelope == "geometric" else amplitude_db
    return float(gain * phase)


@dataclass(frozen=True)
class PerturbationSpec:
    """Oscillation injected at the transmitters of every channel that
    traverses ``node``, active for start < n <= end (absolute
    iterations)."""

    kind: str = "off"            # off | sine
    amplitude_db: float = 0.0
    start_iteration: int = 0
    end_iteration: int = 0
    node: str = ""

    def __post_init__(self):
        check_choice(self.kind, "perturbation kind", ("off", "sine"))
        check_int(self.start_iteration, "start_iteration", low=0)
        check_int(self.end_iteration, "end_iteration", low=0)
        if self.kind == "sine":
            check_scalar(self.amplitude_db, "amplitude_db", low=0.0)
            if self.end_iteration < self.start_iteration:
                raise ValueError("perturbation window must not be reversed")


@dataclass(frozen=True)
class ScenarioSpec:
    """One experiment condition: monitoring quality, ageing schedule,
    transient perturbation, and channel-drop events."""

    monitoring_kind: str = "perfect"     # perfect | lognormal
    monitor_sigma_db: float = 0.0
    monitor_mu_db: float = 0.0
    tau_schedule: tuple = ()
    perturbation: PerturbationSpec = field(default_factory=PerturbationSpec)
    drops: tuple = ()                    # ((route id, iteration), ...)

    def __post_init__(self):
        check_choice(self.monitoring_kind, "monitoring_kind",
                     ("perfect", "lognormal"))
        check_scalar(self.monitor_sigma_db, "monitor_sigma_db", low=0.0)
        object.__setattr__(self, "tau_schedule",
                           tuple(float(t) for t in self.tau_schedule))
        drops = []
        for item in self.drops:
            route, iteration = item
            check_int(iteration, "drop iteration", low=1)
            drops.append((str(route), int(iteration)))
        object.__setattr__(self, "drops", tuple(drops))


def load_scenario(source=None):
    """Build a ScenarioSpec from the ``scenario`` section of a config
    document (path, YAML text, mapping, or None for the bundled one).
    """
    doc = load_document(source)
    block = doc.get("scenario", {}) or {}
    if not isinstance(block, dict):
        raise ConfigError("scenario: expected a mapping")
    mon = block.get("monitoring", {}) or {}
    pert = block.get("perturbation", {}) or {}
    drops = block.get("drops", []) or []
    if not isinstance(drops, list):
        raise ConfigError("scenario.drops: expected a list")
    try:
        return ScenarioSpec(
            monitoring_kind=str(mon.get("kind", "perfect")),
            monitor_sigma_db=float(mon.get("sigma_db", 0.0)),
            monitor_mu_db=float(mon.get("mu_db", 0.0)),
            tau_schedule=tuple(block.get("tau_schedule", ()) or ()),
            perturbation=PerturbationSpec(
                kind=str(pert.get("kind", "off")),
                amplitude_db=float(pert.get("amplitude_db", 0.0)),
                start_iteration=int(pert.get("start_iteration", 0)),
                end_iteration=int(pert.get("end_iteration", 0)),
                node=str(pert.get("node", ""))),
            drops=tuple((d["route"], d["iteration"]) for d in drops),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"scenario: {exc}") from exc


def traversing_channels(network, node):
    """Indices of channels whose route passes through the named node."""
    node = str(node)
    return [i for i, lp in enumerate(network.lightpaths)
            if any(node in key for key in lp.route.links)]


class ScenarioPressure(PressureFunction):
    """Pressure function with monitoring error and transmit offsets.

    The calibration error of each channel's monitor is drawn once at
    construction and then frozen: real monitors are miscalibrated, not
    white-noisy, and an error re-rolled on every evaluation would turn
    the eye's accept test into a random walk.  Transmit offsets model
    the drop transient: they shift what the plant emits during the
    active window, not what the optimizer believes it commanded.

    ``iteration_offset`` maps this run's local iteration clock onto the
    absolute experiment clock that perturbation windows refer to;
    ``calibration`` carries a surviving channel's frozen monitor error
    across a drop event.
    """

    def __init__(self, model, spec=None, upsilon=1.0, seed=None,
                 iteration_offset=0, calibration=None):
        super().__init__(model, upsilon=upsilon)
        self.spec = spec if spec is not None else ScenarioSpec()
        self.iteration_offset = int(iteration_offset)
        m = model.n_channels
        if calibration is not None:
            self.calibration_ = np.asarray(calibration, dtype=float).copy()
        elif self.spec.monitoring_kind == "lognormal":
            rng = np.random.default_rng(seed)
            self.calibration_ = noisy_snr(
                np.ones(m), self.spec.monitor_sigma_db,
                self.spec.monitor_mu_db, rng)
        else:
            self.calibration_ = None
        pert = self.spec.perturbation
        self._pert_idx = (traversing_channels(model.network, pert.node)
                          if pert.kind == "sine" else [])
        self._offsets_db = np.zeros(m)

    def new_iteration(self, n):
        super().new_iteration(n)
        self._offsets_db[:] = 0.0
        pert = self.spec.perturbation
        if pert.kind != "sine" or not self._pert_idx:
            return
        absolute = n + self.iteration_offset
        if pert.start_iteration < absolute <= pert.end_iteration:
            offset = perturbation(absolute - pert.start_iteration,
                                  pert.amplitude_db,
                                  self.model.phys.pert_envelope)
            self._offsets_db[self._pert_idx] = offset

    def transmitted(self, p_dbm):
        return p_dbm + self._offsets_db

    def observe(self, psi):
        if self.calibration_ is None:
            return psi
        return psi * self.calibration_


@dataclass
class ScenarioResult:
    """Outcome of one scenario run.

    kind "plain": one report on the given network.  kind "ageing": one
    report per schedule entry in ``taus``.  kind "drop": one report per
    phase with ``networks`` tracking the shrinking channel set;
    ``frozen_powers_dbm`` is the pre-drop solution restricted to the
    final survivors (the do-nothing counterfactual).
    """

    kind: str
    reports: list
    networks: list
    taus: list = None
    frozen_powers_dbm: np.ndarray = None


def _budget_param(estimator):
    params = estimator.get_params()
    for name in ("n_iterations", "max_iterations"):
        if name in params:
            return name, params[name]
    raise TypeError("estimator exposes no iteration budget parameter")


def _respawn(estimator, phase, **overrides):
    est = clone(estimator)
    params = est.get_params()
    if "seed" in params and params["seed"] is not None and phase > 0:
        overrides.setdefault("seed", params["seed"]
                             + phase * PHASE_SEED_STRIDE)
    est.set_params(**overrides)
    return est


def run_scenario(estimator, network, phys, spec=None, tau=0.0, upsilon=1.0):
    """Run one optimizer under a scenario and return a ScenarioResult.

    Dispatch: drop events (two or more phases with channel subsetting
    and warm restarts) take precedence over an ageing schedule (one
    cold run per tau); with neither, a single run at ``tau``.  A spec
    with everything off reproduces a bare run bit for bit.
    """
    spec = spec if spec is not None else ScenarioSpec()
    if spec.drops:
        return _run_drop(estimator, network, phys, spec, tau, upsilon)
    if spec.tau_schedule:
        return _run_ageing(estimator, network, phys, spec, upsilon)
    seed = estimator.get_params().get("seed")
    model = QotModel(network, phys, tau=tau)
    pressure = ScenarioPressure(model, spec, upsilon=upsilon, seed=seed)
    est = clone(estimator)
    est.fit(pressure)
    return ScenarioResult(kind="plain", reports=[est.report_],
                          networks=[network])


def _run_ageing(estimator, network, phys, spec, upsilon):
    seed = estimator.get_params().get("seed")
    reports = []
    for tau in spec.tau_schedule:
        model = QotModel(network, phys, tau=tau)
        pressure = ScenarioPressure(model, spec, upsilon=upsilon, seed=seed)
        est = clone(estimator)
        est.fit(pressure)
        reports.append(est.report_)
    return ScenarioResult(kind="ageing", reports=reports,
                          networks=[network] * len(reports),
                          taus=list(spec.tau_schedule))


def _run_drop(estimator, network, phys, spec, tau, upsilon):
    unknown = {route for route, _ in spec.drops} - set(network.names)
    if unknown:
        raise ValueError(f"cannot drop unknown routes: {sorted(unknown)}")
    events = {}
    for route, iteration in spec.drops:
        events.setdefault(iteration, []).append(route)
    events = sorted(events.items())
    budget_key, n_final = _budget_param(estimator)
    seed = estimator.get_params().get("seed")

    net = network
    eye = None
    calibration = None
    frozen = None
    clock = 0
    reports, networks = [], []
    for phase, (event_iter, routes) in enumerate(events):
        span = event_iter - clock
        if span < 1:
            raise ValueError("drop events must be at strictly increasing "
                             "iterations")
        model = QotModel(net, phys, tau=tau)
        pressure = ScenarioPressure(model, spec, upsilon=upsilon, seed=seed,
                                    iteration_offset=clock,
                                    calibration=calibration)
        overrides = {budget_key: span}
        if eye is not None:
            overrides["initial_dbm"] = eye
        est = _respawn(estimator, phase, **overrides)
        est.fit(pressure)
        reports.append(est.report_)
        networks.append(net)

        survivors = [name for name in net.names if name not in set(routes)]
        keep = [net.names.index(name) for name in survivors]
        powers = est.report_.powers_dbm
        frozen = powers[keep] if frozen is None else frozen[keep]
        eye = powers[keep].copy()
        if pressure.calibration_ is not None:
            calibration = pressure.calibration_[keep]
        net = net.subset(survivors)
        clock = event_iter

    model = QotModel(net, phys, tau=tau)
    pressure = ScenarioPressure(model, spec, upsilon=upsilon, seed=seed,
                                iteration_offset=clock,
                                calibration=calibration)
    overrides = {budget_key: n_final}
    if eye is not None:
        overrides["initial_dbm"] = eye
    est = _respawn(estimator, len(events), **overrides)
    est.fit(pressure)
    reports.append(est.report_)
    networks.append(net)
    return ScenarioResult(kind="drop", reports=reports, networks=networks,
                          frozen_powers_dbm=frozen)
