"""Run reports and their CSV/JSON serialization.

All artifacts are deterministic for a fixed plan: floats are written with
repr (shortest round-trip form), JSON keys are sorted, and nothing
timestamped goes into a data file (wall-clock lives in the run manifest
written by the CLI).
"""
import csv
import json
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1


@dataclass
class RunReport:
    """Everything one optimizer run produced.

    Traces are indexed by outer iteration, row 0 being the initial state.
    NMSE and power-penalty traces are attached after the fact by
    ``metrics.attach_reference`` since the reference optimum is computed
    independently.
    """

    algorithm: str
    seed: object
    channel_names: tuple
    powers_dbm: np.ndarray          # final commanded launch powers
    objective: float                # final ground-truth J1
    j1_trace: np.ndarray            # observed eye pressure per iteration
    power_trace_dbm: np.ndarray     # (iterations+1, M) transmitted eye
    evaluations: int                # objective rows evaluated
    params: dict = field(default_factory=dict)
    success: object = None
    flops: object = None
    nmse_trace: object = None       # attached vs a reference
    power_penalty_db: object = None  # final per-channel dB gaps
    settling_iteration: object = None
    rm_integral_db: object = None

    @property
    def iterations(self):
        return len(self.j1_trace)

    @property
    def n_channels(self):
        return len(self.channel_names)


def _fmt(value):
    """Shortest exact decimal form; stable across runs."""
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    return value


def write_trace_csv(report, path):
    """Per-iteration trace: iteration, J1, NMSE, then powers in dBm."""
    header = ["iteration", "j1"]
    has_nmse = report.nmse_trace is not None
    if has_nmse:
        header.append("nmse")
    header += [f"p_dbm_{name}" for name in report.channel_names]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for n in range(report.iterations):
            row = [n + 1, _fmt(report.j1_trace[n])]
            if has_nmse:
                row.append(_fmt(report.nmse_trace[n]))
            row += [_fmt(v) for v in report.power_trace_dbm[n + 1]]
            writer.writerow(row)


def summary_dict(report):
    """JSON-ready run summary."""
    out = {
        "schema_version": SCHEMA_VERSION,
        "algorithm": report.algorithm,
        "seed": report.seed,
        "channels": list(report.channel_names),
        "iterations": report.iterations,
        "evaluations": report.evaluations,
        "final_powers_dbm": [float(v) for v in report.powers_dbm],
        "final_j1": float(report.objective),
        "params": {k: (float(v) if isinstance(v, (np.floating, float))
                       else v)
                   for k, v in sorted(report.params.items())},
    }
    if report.success is not None:
        out["success"] = bool(report.success)
    if report.flops is not None:
        out["flops"] = float(report.flops)
    if report.nmse_trace is not None:
        out["final_nmse"] = float(report.nmse_trace[-1])
    if report.power_penalty_db is not None:
        out["power_penalty_db"] = [float(v) for v in report.power_penalty_db]
        out["max_abs_power_penalty_db"] = float(
            np.max(np.abs(report.power_penalty_db)))
    if report.settling_iteration is not None:
        out["mean_settling_iteration"] = report.settling_iteration
    if report.rm_integral_db is not None:
        out["rm_integral_db"] = float(report.rm_integral_db)
    return out


def write_summary_json(report, path):
    write_json(summary_dict(report), path)


def write_json(payload, path):
    """Deterministic JSON artifact: sorted keys, repr floats."""
    if isinstance(payload, dict) and "schema_version" not in payload:
        payload = {"schema_version": SCHEMA_VERSION, **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2,
                  default=_json_default)
        fh.write("\n")


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON-serializable: {type(value)}")


def write_breakdown_csv(breakdown, path):
    """Row-per-channel QoT decomposition."""
    header = ["channel", "g_ase_w_hz", "g_sci_w_hz", "g_xci_w_hz",
              "snr_db", "snr_b2b_db", "psi", "ber", "c1_snr", "c2_rate",
              "c3_power_box"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, name in enumerate(breakdown.names):
            writer.writerow([
                name,
                _fmt(breakdown.g_ase[i]), _fmt(breakdown.g_sci[i]),
                _fmt(breakdown.g_xci[i]),
                _fmt(10 * np.log10(breakdown.snr[i])),
                _fmt(10 * np.log10(breakdown.snr_b2b[i])),
                _fmt(breakdown.psi[i]), _fmt(breakdown.ber[i]),
                bool(breakdown.c1[i]), bool(breakdown.c2[i]),
                bool(breakdown.c3[i]),
            ])


def write_table_csv(rows, header, path):
    """Generic deterministic CSV writer for aggregate tables."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
