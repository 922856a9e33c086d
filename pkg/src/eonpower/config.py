"""Configuration loading: YAML document -> Network + PhysicalParams.

Validation errors carry the offending field path (e.g. ``links[3].km``) so
a broken config is diagnosable without reading the loader.
"""
import importlib.resources
import os

import numpy as np
import yaml

from .modulation import get_format
from .network import (AgePair, Lightpath, Network, PhysicalParams, Route,
                      Span)

GHZ = 1e9

_PAIR_FIELDS = (
    "alpha_db_per_km", "connector_loss_db", "splice_loss_db",
    "edfa_noise_figure_db", "roadm_loss_db", "transponder_margin_db",
    "design_margin_db",
)
_SCALAR_FIELDS = (
    "ber_target", "p_min_dbm", "p_max_dbm", "planck", "carrier_hz",
    "beta2_s2_per_km", "gamma_per_w_km", "tau0_years", "tau_end_years",
    "lambda1", "lambda2", "a_pert_db", "monitor_var_db", "monitor_mu_db",
)
_INT_FIELDS = ("connectors_per_span", "splices_per_span")
_STR_FIELDS = ("xci_span_mode", "nl_alpha_convention", "pert_envelope")


class ConfigError(ValueError):
    """A config document failed to parse or validate."""


def default_config_path():
    """Filesystem path of the bundled reference network config."""
    return str(importlib.resources.files("eonpower.data") / "table3.cfg")


def load_document(source=None):
    """Parse a config document from a path, YAML text, or mapping.

    ``None`` loads the bundled reference network.
    """
    if source is None:
        source = default_config_path()
    if isinstance(source, dict):
        return source
    if hasattr(source, "read"):
        text, origin = source.read(), "<stream>"
    elif isinstance(source, (str, os.PathLike)) and os.path.exists(str(source)):
        with open(source) as fh:
            text, origin = fh.read(), str(source)
    elif isinstance(source, str):
        text, origin = source, "<string>"
    else:
        raise ConfigError(f"cannot read config from {source!r}")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{origin}: YAML parse failure: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{origin}: top level must be a mapping")
    return doc


def _require(mapping, key, path):
    if key not in mapping:
        raise ConfigError(f"{path}.{key}: missing required field")
    return mapping[key]


def _number(value, path, low=None, strict_low=False):
    if isinstance(value, str):
        # YAML 1.1 resolves floats like 193.55e12 (unsigned exponent) as
        # strings; accept them anyway
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if low is not None and (value < low or (strict_low and value == low)):
        raise ConfigError(f"{path}: must be {'>' if strict_low else '>='} {low}")
    return value


def _load_physical(doc):
    raw = _require(doc, "physical", "config")
    if not isinstance(raw, dict):
        raise ConfigError("physical: expected a mapping")
    kwargs = {}
    for name in _SCALAR_FIELDS:
        kwargs[name] = _number(_require(raw, name, "physical"),
                               f"physical.{name}")
    for name in _INT_FIELDS:
        value = _require(raw, name, "physical")
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"physical.{name}: expected an integer")
        kwargs[name] = value
    for name in _PAIR_FIELDS:
        pair = _require(raw, name, "physical")
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2):
            raise ConfigError(
                f"physical.{name}: expected [begin-of-life, end-of-life]")
        kwargs[name] = AgePair(_number(pair[0], f"physical.{name}[0]"),
                               _number(pair[1], f"physical.{name}[1]"))
    for name in _STR_FIELDS:
        if name in raw:
            kwargs[name] = str(raw[name])
    try:
        return PhysicalParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"physical: {exc}") from exc


def _load_links(doc):
    raw = _require(doc, "links", "config")
    if not isinstance(raw, list):
        raise ConfigError("links: expected a list")
    nodes = {str(n) for n in doc.get("nodes", [])}
    links = {}
    for idx, item in enumerate(raw):
        path = f"links[{idx}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{path}: expected a mapping")
        a, b = str(_require(item, "a", path)), str(_require(item, "b", path))
        if a == b:
            raise ConfigError(f"{path}: self-loop {a}-{b}")
        if nodes and (a not in nodes or b not in nodes):
            raise ConfigError(f"{path}: endpoint not in nodes section")
        km = _number(_require(item, "km", path), f"{path}.km", low=0.0,
                     strict_low=True)
        spans = item.get("spans", max(1, int(np.ceil(km / 100.0))))
        if isinstance(spans, bool) or not isinstance(spans, int) or spans < 1:
            raise ConfigError(f"{path}.spans: expected a positive integer")
        key = frozenset((a, b))
        if key in links:
            raise ConfigError(f"{path}: duplicate link {a}-{b}")
        links[key] = (km, spans)
    return links


def _build_route(item, idx, links, phys):
    path_field = f"lightpaths[{idx}]"
    name = str(_require(item, "name", path_field))
    source = str(_require(item, "source", path_field))
    dest = str(_require(item, "destination", path_field))
    node_path = [str(n) for n in _require(item, "path", path_field)]
    if len(node_path) < 2:
        raise ConfigError(f"{path_field}.path: need at least two nodes")
    if node_path[0] != source or node_path[-1] != dest:
        raise ConfigError(
            f"{path_field}.path: endpoints disagree with source/destination")
    spans = []
    link_keys = []
    for a, b in zip(node_path, node_path[1:]):
        key = frozenset((a, b))
        if key not in links:
            raise ConfigError(f"{path_field}.path: no link {a}-{b}")
        km, n_spans = links[key]
        spans.extend(
            Span(km / n_spans, phys.connectors_per_span,
                 phys.splices_per_span)
            for _ in range(n_spans))
        link_keys.append(key)
    # every traversed node adds and drops or expressly switches the channel
    return Route(id=name, source=source, destination=dest,
                 spans=tuple(spans), roadm_count=len(node_path),
                 links=tuple(link_keys))


def load_network(source=None):
    """Load and validate (Network, PhysicalParams) from a config document."""
    doc = load_document(source)
    phys = _load_physical(doc)
    links = _load_links(doc)

    grid = doc.get("grid", {})
    spacing = _number(grid.get("spacing_ghz", 50.0), "grid.spacing_ghz",
                      low=0.0, strict_low=True) * GHZ
    guard = _number(grid.get("guard_ghz", 6.0), "grid.guard_ghz",
                    low=0.0) * GHZ

    raw_lps = doc.get("lightpaths", [])
    if not isinstance(raw_lps, list):
        raise ConfigError("lightpaths: expected a list")
    m = len(raw_lps)
    lightpaths = []
    names = set()
    for idx, item in enumerate(raw_lps):
        path_field = f"lightpaths[{idx}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{path_field}: expected a mapping")
        route = _build_route(item, idx, links, phys)
        if route.id in names:
            raise ConfigError(f"{path_field}: duplicate lightpath {route.id}")
        names.add(route.id)
        rate = _number(_require(item, "rate_gbps", path_field),
                       f"{path_field}.rate_gbps", low=0.0, strict_low=True)
        try:
            fmt = get_format(str(_require(item, "modulation", path_field)))
        except ValueError as exc:
            raise ConfigError(f"{path_field}.modulation: {exc}") from exc
        bandwidth = rate * GHZ / fmt.spectral_efficiency
        center = phys.carrier_hz + (idx - (m - 1) / 2.0) * spacing
        try:
            lightpaths.append(Lightpath(route, rate, fmt, bandwidth, center))
        except ValueError as exc:
            raise ConfigError(f"{path_field}: {exc}") from exc

    matrix = np.zeros((m, m), dtype=int)
    span_count = {key: n for key, (_, n) in links.items()}
    for i, lp_i in enumerate(lightpaths):
        for j, lp_j in enumerate(lightpaths):
            if i == j:
                matrix[i, j] = lp_i.route.span_count
            else:
                common = set(lp_i.route.links) & set(lp_j.route.links)
                matrix[i, j] = sum(span_count[k] for k in common)

    try:
        network = Network(tuple(lightpaths), matrix, spacing, guard)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return network, phys


def apply_overrides(doc, overrides):
    """Apply ``section.key=value`` override strings to a parsed document."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        dotted, raw_value = item.split("=", 1)
        keys = dotted.strip().split(".")
        target = doc
        for key in keys[:-1]:
            if not isinstance(target.get(key), dict):
                raise ConfigError(f"override {item!r}: no section {key!r}")
            target = target[key]
        target[keys[-1]] = yaml.safe_load(raw_value)
    return doc
