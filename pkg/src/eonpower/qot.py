"""GN-model quality-of-transmission evaluation.

The model treats nonlinear interference as additive Gaussian noise: the SNR
denominator is the sum of amplified-spontaneous-emission (ASE),
self-channel (SCI) and cross-channel (XCI) noise power spectral densities
accumulated along the route. Signal PSD is flat over the channel,
G_i = p_i / bandwidth_i.

Two evaluation paths exist on purpose: per-channel methods that walk the
route term by term (the reference semantics), and a precomputed vectorized
path used inside optimizer loops. A test pins them together to 1e-12.
"""
from dataclasses import dataclass

import numpy as np

from . import modulation
from .units import db_to_lin, dbm_to_watt, watt_to_dbm
from .validation import check_power_vector


@dataclass(frozen=True)
class QotBreakdown:
    """Per-channel noise decomposition and derived quality figures."""

    names: tuple
    g_ase: np.ndarray      # W/Hz
    g_sci: np.ndarray      # W/Hz
    g_xci: np.ndarray      # W/Hz
    snr: np.ndarray        # linear
    snr_b2b: np.ndarray    # linear
    psi: np.ndarray
    ber: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray

    @property
    def feasible(self):
        return bool(np.all(self.c1 & self.c2 & self.c3))


class QotModel:
    """QoT evaluator for one network at one point of the ageing timeline.

    Parameters
    ----------
    network : Network
    phys : PhysicalParams
    tau : float
        Years in service; every ageing pair is interpolated here once.
    """

    def __init__(self, network, phys, tau=0.0):
        self.network = network
        self.phys = phys
        self.tau = float(tau)
        self.aged = phys.at(self.tau)
        m = network.n_channels

        self.bandwidth = np.array(
            [lp.bandwidth_hz for lp in network.lightpaths])
        self.frequency = np.array(
            [lp.center_frequency_hz for lp in network.lightpaths])
        self.target = np.array(
            [lp.modulation.snr_target for lp in network.lightpaths])
        self.n_spans = np.array(
            [lp.route.span_count for lp in network.lightpaths])
        self.n_roadms = np.array(
            [lp.route.roadm_count for lp in network.lightpaths])

        # total margin subtracted from measured SNR, dB domain
        self.margin_db = (self.aged.design_margin_db
                          + self.aged.transponder_margin_db)
        self.margin_lin = float(db_to_lin(self.margin_db))

        self._ase = np.array([self._ase_psd_walk(i) for i in range(m)])

        alpha = self._alpha_numeric()
        beta2 = abs(phys.beta2_s2_per_km)
        gamma = phys.gamma_per_w_km
        self._c1 = 3.0 * gamma ** 2 / (2.0 * np.pi * alpha * beta2)
        self._asinh = np.arcsinh(
            np.pi ** 2 * beta2 * self.bandwidth ** 2 / (2.0 * alpha))

        # pairwise XCI log factors; the guard band must keep every
        # interferer's half-bandwidth clear of the frequency gap
        gap = np.abs(self.frequency[:, None] - self.frequency[None, :])
        half = self.bandwidth[None, :] / 2.0
        off = ~np.eye(m, dtype=bool)
        if np.any(gap[off] <= half.repeat(m, axis=0)[off]):
            raise ValueError("channel grid violation: overlapping spectra")
        with np.errstate(divide="ignore", invalid="ignore"):
            ln = np.log((gap + half) / (gap - half))
        ln[np.eye(m, dtype=bool)] = 0.0

        if phys.xci_span_mode == "shared":
            n_xci = network.shared_span_matrix.astype(float)
        else:   # literal reading: the channel's own span count for every j
            n_xci = np.repeat(self.n_spans[:, None].astype(float), m, axis=1)
        self._ln_n = ln * n_xci
        np.fill_diagonal(self._ln_n, 0.0)

        # PSD-form SCI coefficient over g^3 (vectorized path)
        self._sci_coef = self._c1 * self._asinh * self.n_spans

        # Launch-power cap: the configured box top or the single-channel
        # SNR knee (where the cubic SCI term turns dSNR/dp negative),
        # whichever is lower. Above the knee more power only hurts, and
        # the pressure surface grows stationary points that trap both
        # optimizer families, so search stays below it.
        knee_w = (self._ase / (2.0 * self._sci_coef)) ** (1.0 / 3.0) \
            * self.bandwidth
        self.power_cap_w = np.minimum(dbm_to_watt(phys.p_max_dbm), knee_w)

        # Feasibility floor on the residual margin: psi * margin is the
        # SNR-over-format-target ratio, so psi >= 1/margin means the
        # modulation threshold itself still holds (all margin consumed).
        self.psi_floor = 1.0 / self.margin_lin

    # ------------------------------------------------------------- plumbing
    def _alpha_numeric(self):
        """Fiber attenuation figure used inside the nonlinear prefactors."""
        alpha_db = self.aged.alpha_db_per_km
        mode = self.phys.nl_alpha_convention
        if mode == "db":
            return alpha_db
        if mode == "field_neper":
            return alpha_db * np.log(10.0) / 20.0
        return alpha_db * np.log(10.0) / 10.0

    @property
    def n_channels(self):
        return self.network.n_channels

    @property
    def names(self):
        return self.network.names

    @property
    def hv_ne(self):
        """Photon energy times the linear EDFA noise figure."""
        ne_lin = db_to_lin(self.aged.edfa_noise_figure_db)
        return self.phys.planck * self.phys.carrier_hz * ne_lin

    # ------------------------------------------------- per-channel semantics
    def span_loss(self, i, e):
        """Loss of span e of channel i's route, in dB."""
        span = self.network.lightpaths[i].route.spans[e]
        return (span.length_km * self.aged.alpha_db_per_km
                + span.connectors * self.aged.connector_loss_db
                + span.splices * self.aged.splice_loss_db)

    def _ase_psd_walk(self, i):
        route = self.network.lightpaths[i].route
        roadm_gain = db_to_lin(self.aged.roadm_loss_db)
        units = route.roadm_count * (roadm_gain - 1.0)
        for e in range(route.span_count):
            units += db_to_lin(self.span_loss(i, e)) - 1.0
        return self.hv_ne * units

    def ase_psd(self, i):
        """ASE noise PSD accumulated over channel i's ROADMs and spans."""
        return self._ase_psd_walk(i)

    def sci_psd(self, i, p_i):
        """Self-channel interference PSD of channel i at launch power p_i."""
        if self.bandwidth[i] == 0:
            raise ValueError("sci_psd undefined for zero bandwidth")
        g = p_i / self.bandwidth[i]
        return self._c1 * self._asinh[i] * g ** 3 * self.n_spans[i]

    def xci_psd(self, i, p):
        """Cross-channel interference PSD on channel i from all others."""
        p = check_power_vector(p, self.n_channels)
        g = p / self.bandwidth
        return self._c1 * g[i] * float(self._ln_n[i] @ g ** 2)

    def snr(self, i, p):
        """Measured linear SNR of channel i under power vector p (watts)."""
        p = check_power_vector(p, self.n_channels)
        denom = (self.ase_psd(i) + self.sci_psd(i, p[i])
                 + self.xci_psd(i, p)) * self.bandwidth[i]
        if denom == 0:
            raise ValueError(f"channel {i}: zero total noise PSD")
        return p[i] / denom

    def snr_b2b(self, i, p):
        """Back-to-back SNR: measured SNR minus the margins (dB domain)."""
        return self.snr(i, p) / self.margin_lin

    def ber(self, i, snr_b2b):
        """Calibrated pre-FEC BER of channel i at a linear back-to-back SNR."""
        fmt = self.network.lightpaths[i].modulation
        return modulation.ber(snr_b2b, fmt, self.phys.ber_target)

    # ------------------------------------------------------ vectorized path
    def snr_all(self, p):
        """Measured linear SNR for every channel; accepts (M,) or (B, M)."""
        p = np.asarray(p, dtype=float)
        g = p / self.bandwidth
        psd = self._ase + self._sci_coef * g ** 3 \
            + self._c1 * g * (g ** 2 @ self._ln_n.T)
        return p / (psd * self.bandwidth)

    def psi(self, p):
        """Residual margin vector: back-to-back SNR over the format target."""
        return self.snr_all(p) / (self.margin_lin * self.target)

    def residual_margin(self, p):
        return self.psi(p)

    def objective_j1(self, p):
        """Euclidean distance between the residual margin and all-ones."""
        return float(np.linalg.norm(1.0 - self.psi(np.asarray(p, float))))

    # --------------------------------------------------------- full verdict
    def check_constraints(self, p, rtol=None):
        """Per-channel feasibility of the SNR, rate, and power-box limits.

        The SNR verdict allows the configured lower residual-margin
        tolerance (rtol defaults to lambda1), matching the band the
        optimizers drive the network into.
        """
        p = check_power_vector(p, self.n_channels)
        if rtol is None:
            rtol = self.phys.lambda1
        psi = self.psi(p)
        c1 = psi >= 1.0 - rtol
        # rate coverage is fixed by the loaded modulation table
        c2 = np.ones(self.n_channels, dtype=bool)
        p_dbm = watt_to_dbm(p)
        c3 = ((p_dbm >= self.phys.p_min_dbm)
              & (p_dbm <= self.phys.p_max_dbm))
        return c1, c2, c3

    def breakdown(self, p):
        """Full per-channel QoT decomposition for reporting."""
        p = check_power_vector(p, self.n_channels)
        g_ase = np.array([self.ase_psd(i) for i in range(self.n_channels)])
        g_sci = np.array([self.sci_psd(i, p[i])
                          for i in range(self.n_channels)])
        g_xci = np.array([self.xci_psd(i, p)
                          for i in range(self.n_channels)])
        snr = np.array([self.snr(i, p) for i in range(self.n_channels)])
        snr_b2b = snr / self.margin_lin
        psi = snr_b2b / self.target
        ber = np.array([self.ber(i, snr_b2b[i])
                        for i in range(self.n_channels)])
        c1, c2, c3 = self.check_constraints(p)
        return QotBreakdown(tuple(self.network.names), g_ase, g_sci, g_xci,
                            snr, snr_b2b, psi, ber, c1, c2, c3)


class PressureFunction:
    """Optimizer-facing objective: pressure = upsilon * J1, dBm domain.

    Callable on a single power vector or a batch of rows. Keeps an
    evaluation counter (rows evaluated) so the iteration budget can be
    cross-checked against the complexity model. Subclasses hook
    ``transmitted`` (actuation offsets) and ``observe`` (monitoring noise);
    ``new_iteration`` is called by optimizers once per outer iteration.
    """

    def __init__(self, model, upsilon=1.0):
        self.model = model
        self.upsilon = float(upsilon)
        self.n_evaluations = 0
        self.iteration = 0
        self.min_psi_ = None

    @property
    def n_channels(self):
        return self.model.n_channels

    @property
    def channel_names(self):
        return self.model.names

    @property
    def bounds_dbm(self):
        return (self.model.phys.p_min_dbm, self.model.phys.p_max_dbm)

    @property
    def power_cap_dbm(self):
        """Per-channel upper power bound (box top or SCI knee), dBm."""
        return watt_to_dbm(self.model.power_cap_w)

    @property
    def psi_floor(self):
        """Observed-psi level at which the margin is fully consumed."""
        return self.model.psi_floor

    def new_iteration(self, n):
        """Advance the outer-iteration clock (dynamic scenarios hook this)."""
        self.iteration = int(n)

    def transmitted(self, p_dbm):
        """Commanded dBm -> actually transmitted dBm (identity by default)."""
        return p_dbm

    def observe(self, psi):
        """Monitored residual margin (perfect monitoring by default)."""
        return psi

    def __call__(self, p_dbm):
        p_dbm = np.asarray(p_dbm, dtype=float)
        batch = np.atleast_2d(self.transmitted(p_dbm))
        self.n_evaluations += batch.shape[0]
        psi = self.observe(self.model.psi(dbm_to_watt(batch)))
        # Worst observed margin per row: optimizers use it to cull
        # candidates that would breach the feasibility floor.
        mins = psi.min(axis=-1)
        self.min_psi_ = float(mins[0]) if p_dbm.ndim == 1 else mins
        j1 = self.upsilon * np.linalg.norm(1.0 - psi, axis=-1)
        return float(j1[0]) if p_dbm.ndim == 1 else j1
