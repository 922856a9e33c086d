"""Network domain model: spans, routes, lightpaths, and physical parameters.

Everything here is immutable after construction and validated eagerly, so
optimizer workers can share instances freely.
"""
from dataclasses import dataclass, replace

import numpy as np

from .modulation import ModulationFormat
from .validation import check_int, check_scalar

GHZ = 1e9


@dataclass(frozen=True)
class Span:
    """One amplified fiber span."""

    length_km: float
    connectors: int
    splices: int

    def __post_init__(self):
        check_scalar(self.length_km, "span length_km", low=0.0)
        check_int(self.connectors, "span connectors", low=0)
        check_int(self.splices, "span splices", low=0)


@dataclass(frozen=True)
class Route:
    """A physical route: ordered spans plus traversed ROADM count."""

    id: str
    source: str
    destination: str
    spans: tuple
    roadm_count: int
    links: tuple = ()   # undirected (a, b) link keys, used for overlap counts

    def __post_init__(self):
        check_int(self.roadm_count, "roadm_count", low=0)
        if any(s.length_km <= 0 for s in self.spans):
            raise ValueError(f"route {self.id}: every span needs length > 0")

    @property
    def span_count(self):
        return len(self.spans)

    @property
    def length_km(self):
        return float(sum(s.length_km for s in self.spans))


@dataclass(frozen=True)
class Lightpath:
    """One channel: a route plus its demand, format, and spectrum slot."""

    route: Route
    demand_rate_gbps: float
    modulation: ModulationFormat
    bandwidth_hz: float
    center_frequency_hz: float

    def __post_init__(self):
        check_scalar(self.demand_rate_gbps, "demand_rate_gbps", low=0.0,
                     inclusive=False)
        expected = self.demand_rate_gbps * GHZ / self.modulation.spectral_efficiency
        if abs(self.bandwidth_hz - expected) > 1e-9 * expected:
            raise ValueError(
                f"lightpath {self.route.id}: bandwidth {self.bandwidth_hz} Hz "
                f"inconsistent with rate/spectral-efficiency ({expected} Hz)")

    @property
    def name(self):
        return self.route.id


@dataclass(frozen=True)
class Network:
    """The full channel set plus pairwise span-overlap counts."""

    lightpaths: tuple
    shared_span_matrix: np.ndarray
    channel_spacing_hz: float
    guard_band_hz: float

    def __post_init__(self):
        m = len(self.lightpaths)
        mat = np.asarray(self.shared_span_matrix, dtype=int)
        object.__setattr__(self, "shared_span_matrix", mat)
        if mat.shape != (m, m):
            raise ValueError(
                f"shared_span_matrix must be {m}x{m}, got {mat.shape}")
        if not np.array_equal(mat, mat.T):
            raise ValueError("shared_span_matrix must be symmetric")
        diag = np.diag(mat)
        counts = np.array([lp.route.span_count for lp in self.lightpaths])
        if not np.array_equal(diag, counts):
            raise ValueError(
                "shared_span_matrix diagonal must equal per-route span counts")
        cap = np.minimum.outer(counts, counts)
        if m and np.any(mat > cap):
            raise ValueError(
                "shared_span_matrix entries cannot exceed either route's count")
        for lp in self.lightpaths:
            if lp.bandwidth_hz + self.guard_band_hz > self.channel_spacing_hz:
                raise ValueError(
                    f"lightpath {lp.name}: bandwidth + guard band exceeds "
                    f"channel spacing")
        freqs = [lp.center_frequency_hz for lp in self.lightpaths]
        if len(set(freqs)) != m:
            raise ValueError("duplicate channel grid slot")

    @property
    def n_channels(self):
        return len(self.lightpaths)

    @property
    def names(self):
        return [lp.name for lp in self.lightpaths]

    def subset(self, keep_names):
        """New Network restricted to the named lightpaths (drop survivors)."""
        keep = [lp for lp in self.lightpaths if lp.name in set(keep_names)]
        missing = set(keep_names) - {lp.name for lp in keep}
        if missing:
            raise ValueError(f"unknown lightpaths: {sorted(missing)}")
        idx = [i for i, lp in enumerate(self.lightpaths) if lp.name in set(keep_names)]
        mat = self.shared_span_matrix[np.ix_(idx, idx)]
        return Network(tuple(keep), mat, self.channel_spacing_hz,
                       self.guard_band_hz)

    def replicate(self, times):
        """Tile the demand set over the same physical topology.

        Each copy rides the identical routes (so every pair of copies
        overlaps exactly like the originals do) but takes grid slots in a
        fresh spectral block above the occupied band. Used to scale the
        channel count when measuring complexity growth.
        """
        check_int(times, "times", low=1)
        m = self.n_channels
        paths = []
        for c in range(times):
            shift = c * m * self.channel_spacing_hz
            for lp in self.lightpaths:
                route = lp.route if c == 0 else replace(
                    lp.route, id=f"{lp.route.id}.{c}")
                paths.append(replace(
                    lp, route=route,
                    center_frequency_hz=lp.center_frequency_hz + shift))
        mat = np.tile(self.shared_span_matrix, (times, times))
        return Network(tuple(paths), mat, self.channel_spacing_hz,
                       self.guard_band_hz)


def shared_spans(network, i, j):
    """Number of physical spans traversed by both channel i and channel j."""
    m = network.n_channels
    if not (0 <= i < m and 0 <= j < m):
        raise IndexError(f"channel index out of range for M={m}")
    return int(network.shared_span_matrix[i, j])


@dataclass(frozen=True)
class AgePair:
    """A physical quantity with begin-of-life and end-of-life endpoints."""

    bol: float
    eol: float


def interpolate_param(pair, tau, tau0, tau_end):
    """Affine ageing interpolation between the BoL and EoL endpoints."""
    if not tau0 <= tau <= tau_end:
        raise ValueError(
            f"tau={tau} outside network lifetime [{tau0}, {tau_end}]")
    frac = (tau - tau0) / (tau_end - tau0)
    return pair.bol + (pair.eol - pair.bol) * frac


@dataclass(frozen=True)
class PhysicalParams:
    """GN-model constants plus ageing endpoint pairs."""

    ber_target: float
    p_min_dbm: float
    p_max_dbm: float
    planck: float
    carrier_hz: float
    beta2_s2_per_km: float
    gamma_per_w_km: float
    alpha_db_per_km: AgePair
    connector_loss_db: AgePair
    splice_loss_db: AgePair
    connectors_per_span: int
    splices_per_span: int
    edfa_noise_figure_db: AgePair
    roadm_loss_db: AgePair
    transponder_margin_db: AgePair
    design_margin_db: AgePair
    tau0_years: float
    tau_end_years: float
    lambda1: float
    lambda2: float
    a_pert_db: float
    # OPM calibration error: dB-domain variance (dB^2) and mean of the
    # per-channel offset; scenarios draw the std as sqrt(monitor_var_db).
    monitor_var_db: float = 0.16
    monitor_mu_db: float = 0.0
    xci_span_mode: str = "shared"
    nl_alpha_convention: str = "db"
    pert_envelope: str = "geometric"

    def __post_init__(self):
        if self.p_min_dbm >= self.p_max_dbm:
            raise ValueError("p_min_dbm must be below p_max_dbm")
        check_scalar(self.ber_target, "ber_target", low=0.0, high=0.5,
                     inclusive=False)
        check_scalar(self.lambda1, "lambda1", low=0.0, inclusive=False)
        check_scalar(self.lambda2, "lambda2", low=0.0, inclusive=False)
        check_int(self.connectors_per_span, "connectors_per_span", low=0)
        check_int(self.splices_per_span, "splices_per_span", low=0)
        check_scalar(self.monitor_var_db, "monitor_var_db", low=0.0)
        if self.xci_span_mode not in ("shared", "own"):
            raise ValueError("xci_span_mode must be 'shared' or 'own'")
        if self.nl_alpha_convention not in ("db", "field_neper", "power_neper"):
            raise ValueError("nl_alpha_convention must be db, field_neper "
                             "or power_neper")
        if self.pert_envelope not in ("geometric", "constant"):
            raise ValueError("pert_envelope must be 'geometric' or 'constant'")

    def at(self, tau):
        """Resolve every ageing pair at time tau (years in service)."""
        value = lambda pair: interpolate_param(
            pair, tau, self.tau0_years, self.tau_end_years)
        return AgedParams(
            tau=tau,
            alpha_db_per_km=value(self.alpha_db_per_km),
            connector_loss_db=value(self.connector_loss_db),
            splice_loss_db=value(self.splice_loss_db),
            edfa_noise_figure_db=value(self.edfa_noise_figure_db),
            roadm_loss_db=value(self.roadm_loss_db),
            transponder_margin_db=value(self.transponder_margin_db),
            design_margin_db=value(self.design_margin_db),
        )


@dataclass(frozen=True)
class AgedParams:
    """PhysicalParams ageing pairs resolved at one tau."""

    tau: float
    alpha_db_per_km: float
    connector_loss_db: float
    splice_loss_db: float
    edfa_noise_figure_db: float
    roadm_loss_db: float
    transponder_margin_db: float
    design_margin_db: float
