"""Experiment runner: loads a network config, executes named experiment
plans, and writes plot-ready CSV/JSON artifacts.

Artifacts are deterministic for a fixed plan and seed set: loops run in
sorted seed order and every writer formats floats by exact repr.
Timestamps live only in the side manifest so reruns stay byte-identical.
Exit codes: 0 success, 1 validation problem, 2 runtime failure.
"""
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone

import click
import numpy as np

from . import ipo, metrics
from .config import (ConfigError, apply_overrides, load_document,
                     load_network)
from .gradient import GradientDescent, reference_powers
from .hurricane import HurricaneSearch
from .qot import PressureFunction, QotModel
from .report import write_json, write_table_csv, write_trace_csv
from .scenarios import ScenarioSpec, load_scenario, run_scenario
from .units import dbm_to_watt, lin_to_db

# tuned operating points of the two spiral-search flavors
TUNED = {
    "chso": dict(variant="chaotic", n_parcels=132, n_iterations=180,
                 r0=5.8318e-6, omega=1.6975),
    "hso": dict(variant="uniform", n_parcels=228, n_iterations=150,
                r0=6.1873e-7, omega=0.2839),
}

# nominal budget at which the gradient-descent operation count is quoted
GD_FLOP_ITERATIONS = 400
GD_FLOP_BACKTRACKS = 5.0

SCENARIO_SCALE = {"A": 1, "B": 10, "C": 20}


def parse_seeds(text):
    """Seed set from "0..9" / "1,4,7" / mixtures; sorted and deduplicated."""
    seeds = []
    for token in str(text).split(","):
        token = token.strip()
        if not token:
            continue
        if ".." in token:
            first, last = token.split("..", 1)
            lo, hi = int(first), int(last)
            if hi < lo:
                raise ValueError(f"seed range {token!r} is reversed")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(token))
    if not seeds:
        raise ValueError("empty seed set")
    return sorted(set(seeds))


def _load(config_path, overrides):
    doc = load_document(config_path)
    if overrides:
        apply_overrides(doc, list(overrides))
    network, phys = load_network(doc)
    return doc, network, phys


def _prepare_out(out_dir):
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise ValueError(f"output directory {out_dir!r}: {exc}") from exc
    return out_dir


def _make_search(algo, seed=0, **overrides):
    params = dict(TUNED[algo])
    params.update(overrides)
    return HurricaneSearch(seed=seed, **params)


def _reference(model, upsilon=1.0):
    powers, spread, _ = reference_powers(
        lambda: PressureFunction(model, upsilon=upsilon))
    return powers, spread


def _write_manifest(out_dir, command, arguments, artifacts):
    payload = {
        "command": command,
        "arguments": arguments,
        "artifacts": sorted(artifacts),
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    write_json(payload, os.path.join(out_dir, "manifest.json"))


def _execute(fn, **kwargs):
    try:
        fn(**kwargs)
    except (ConfigError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:   # noqa: BLE001 - boundary of the process
        click.echo(f"runtime failure: {exc}", err=True)
        sys.exit(2)


def _common(fn):
    fn = click.option("--override", "overrides", multiple=True,
                      help="Config override, section.key=value; repeatable.")(fn)
    fn = click.option("--out", "out_dir", default="results",
                      show_default=True, help="Artifact directory.")(fn)
    fn = click.option("--config", "config_path", default=None,
                      help="Network config path (bundled one if omitted).")(fn)
    return fn


@click.group()
def main():
    """Launch-power experiment suite for elastic optical networks."""


# ---------------------------------------------------------------- allocate

@main.command()
@_common
@click.option("--algo", type=click.Choice(["chso", "hso", "gd"]),
              default="chso", show_default=True)
@click.option("--seeds", default="0..9", show_default=True)
@click.option("--tau", type=float, default=0.0, show_default=True)
def allocate(**kwargs):
    """Static allocation runs with per-seed traces and quality stats."""
    _execute(_cmd_allocate, **kwargs)


def _cmd_allocate(config_path, overrides, out_dir, algo, seeds, tau):
    seed_list = parse_seeds(seeds)
    _, network, phys = _load(config_path, overrides)
    out_dir = _prepare_out(out_dir)
    model = QotModel(network, phys, tau=tau)
    ref_dbm, ref_spread = _reference(model)
    ref_w = dbm_to_watt(ref_dbm)

    artifacts = []
    rows = []
    failed_seed = None
    try:
        if algo == "gd":
            est = GradientDescent().fit(PressureFunction(model))
            metrics.attach_reference(est.report_, ref_dbm, model=model)
            trace = os.path.join(out_dir, "gd_trace.csv")
            write_trace_csv(est.report_, trace)
            artifacts.append("gd_trace.csv")
            rows.append(_allocate_row(None, est.report_, ref_w))
        else:
            for seed in seed_list:
                est = _make_search(algo, seed=seed)
                est.fit(PressureFunction(model))
                metrics.attach_reference(est.report_, ref_dbm, model=model)
                name = f"{algo}_seed{seed}_trace.csv"
                write_trace_csv(est.report_, os.path.join(out_dir, name))
                artifacts.append(name)
                rows.append(_allocate_row(seed, est.report_, ref_w))
    except Exception:
        failed_seed = seed_list[len(rows)] if algo != "gd" else None
        raise
    finally:
        # flush whatever finished even when a seed fails mid-bank
        if rows:
            summary = _allocate_summary(algo, tau, ref_dbm, ref_spread, rows,
                                        failed_seed)
            write_json(summary, os.path.join(out_dir,
                                             f"{algo}_summary.json"))
            artifacts.append(f"{algo}_summary.json")
            header = ["seed", "final_j1", "final_nmse", "max_abs_pp_db",
                      "settling_iteration", "rm_integral_db", "evaluations"]
            write_table_csv(rows, header,
                            os.path.join(out_dir, f"{algo}_runs.csv"))
            artifacts.append(f"{algo}_runs.csv")
            _write_manifest(out_dir, "allocate",
                            {"algo": algo, "seeds": seeds, "tau": tau},
                            artifacts)


def _allocate_row(seed, run, ref_w):
    final_nmse = float(metrics.nmse(dbm_to_watt(run.powers_dbm), ref_w))
    max_pp = float(np.max(np.abs(run.power_penalty_db)))
    return [seed if seed is not None else -1, run.objective, final_nmse,
            max_pp, run.settling_iteration, run.rm_integral_db,
            run.evaluations]


def _allocate_summary(algo, tau, ref_dbm, ref_spread, rows, failed_seed):
    nmses = np.array([row[2] for row in rows], dtype=float)
    summary = {
        "experiment": "allocate",
        "algorithm": algo,
        "tau": tau,
        "reference_powers_dbm": [float(v) for v in ref_dbm],
        "reference_spread": float(ref_spread),
        "runs": len(rows),
        "median_final_nmse": float(np.median(nmses)),
        "max_final_nmse": float(np.max(nmses)),
        "converged_below_1e3": int(np.sum(nmses <= 1e-3)),
        "max_abs_pp_db": float(np.max([row[3] for row in rows])),
    }
    if failed_seed is not None:
        summary["failed_seed"] = failed_seed
    return summary


# --------------------------------------------------------------------- ipo

@main.command("ipo")
@_common
@click.option("--algo", type=click.Choice(["chso", "hso"]),
              default="chso", show_default=True)
@click.option("--loops", type=int, default=2, show_default=True)
@click.option("--realizations", type=int, default=3, show_default=True)
@click.option("--parcels", type=int, default=132, show_default=True)
@click.option("--iterations", type=int, default=180, show_default=True)
def ipo_cmd(**kwargs):
    """Golden-section tuning of the spiral radius and angular rate."""
    _execute(_cmd_ipo, **kwargs)


def _cmd_ipo(config_path, overrides, out_dir, algo, loops, realizations,
             parcels, iterations):
    _, network, phys = _load(config_path, overrides)
    out_dir = _prepare_out(out_dir)
    model = QotModel(network, phys)
    config = ipo.IpoConfig(n_loops=loops, n_realizations=realizations)
    objective = ipo.make_objective(
        lambda: PressureFunction(model), realizations,
        n_parcels=parcels, n_iterations=iterations,
        variant=TUNED[algo]["variant"])
    r0, omega, history = ipo.tune_inputs(objective, config)
    payload = {
        "experiment": "ipo",
        "algorithm": algo,
        "tuned_r0": r0,
        "tuned_omega": omega,
        "objective_at_optimum": objective(r0, omega),
        "n_loops": loops,
        "n_realizations": realizations,
        "n_parcels": parcels,
        "n_iterations": iterations,
        "history": history,
    }
    name = f"ipo_{algo}.json"
    write_json(payload, os.path.join(out_dir, name))
    _write_manifest(out_dir, "ipo",
                    {"algo": algo, "loops": loops,
                     "realizations": realizations}, [name])


# -------------------------------------------------------------------- cpos

@main.command()
@_common
@click.option("--algo", type=click.Choice(["chso", "hso"]),
              default="chso", show_default=True)
@click.option("--realizations", type=int, default=10, show_default=True)
@click.option("--r0-points", type=int, default=9, show_default=True)
@click.option("--max-iteration", type=int, default=200, show_default=True)
@click.option("--iteration-step", type=int, default=20, show_default=True)
def cpos(**kwargs):
    """Success-probability surface over spiral radius and iteration."""
    _execute(_cmd_cpos, **kwargs)


def _cmd_cpos(config_path, overrides, out_dir, algo, realizations,
              r0_points, max_iteration, iteration_step):
    _, network, phys = _load(config_path, overrides)
    out_dir = _prepare_out(out_dir)
    model = QotModel(network, phys)
    r0_grid = np.logspace(-8, -4, r0_points)
    n_grid = np.arange(0, max_iteration + 1, iteration_step)
    tuned = TUNED[algo]
    surface = ipo.cpos_ps1(
        lambda: PressureFunction(model), r0_grid, n_grid, tuned["omega"],
        realizations, variant=tuned["variant"],
        n_parcels=tuned["n_parcels"])
    rows = [[float(r0), int(n), float(surface[i, j])]
            for i, r0 in enumerate(r0_grid)
            for j, n in enumerate(n_grid)]
    name = f"cpos_ps1_{algo}.csv"
    write_table_csv(rows, ["r0", "iteration", "ps1"],
                    os.path.join(out_dir, name))
    summary = {
        "experiment": "cpos",
        "algorithm": algo,
        "threshold": ipo.SUCCESS_THRESHOLD,
        "n_realizations": realizations,
        "max_ps1": float(surface.max()),
        "r0_at_max": float(r0_grid[int(np.argmax(surface.max(axis=1)))]),
    }
    write_json(summary, os.path.join(out_dir, f"cpos_{algo}_summary.json"))
    _write_manifest(out_dir, "cpos", {"algo": algo},
                    [name, f"cpos_{algo}_summary.json"])


# ------------------------------------------------------------------ pareto

@main.command()
@_common
@click.option("--algo", type=click.Choice(["chso", "hso"]),
              default="chso", show_default=True)
@click.option("--realizations", type=int, default=10, show_default=True)
@click.option("--nw-max", type=int, default=12, show_default=True,
              help="Parcel grid: channels times 1..nw_max.")
@click.option("--nf-min", type=int, default=100, show_default=True)
@click.option("--nf-max", type=int, default=250, show_default=True)
@click.option("--nf-step", type=int, default=50, show_default=True)
def pareto(**kwargs):
    """Budget surface, Pareto frontier, and cheapest reliable budget."""
    _execute(_cmd_pareto, **kwargs)


def _cmd_pareto(config_path, overrides, out_dir, algo, realizations,
                nw_max, nf_min, nf_max, nf_step):
    _, network, phys = _load(config_path, overrides)
    out_dir = _prepare_out(out_dir)
    model = QotModel(network, phys)
    m = network.n_channels
    tuned = TUNED[algo]
    parcel_grid = m * np.arange(1, nw_max + 1)
    nf_grid = np.arange(nf_min, nf_max + 1, nf_step)
    surface = ipo.cpos_ps2(
        lambda: PressureFunction(model), parcel_grid, nf_grid,
        tuned["r0"], tuned["omega"], realizations,
        variant=tuned["variant"])
    term = metrics.network_flop_term(network)
    flop_fn = lambda k, nf: metrics.flops_hurricane(
        nf, k, m, term, chaotic=(tuned["variant"] == "chaotic"))
    frontier = ipo.pareto_frontier(parcel_grid, nf_grid, surface, flop_fn)
    rows = [[int(k), int(nf), float(surface[i, j])]
            for i, k in enumerate(parcel_grid)
            for j, nf in enumerate(nf_grid)]
    surface_name = f"pareto_ps2_{algo}.csv"
    write_table_csv(rows, ["n_parcels", "n_iterations", "ps2"],
                    os.path.join(out_dir, surface_name))
    payload = {
        "experiment": "pareto",
        "algorithm": algo,
        "threshold": ipo.SUCCESS_THRESHOLD,
        "frontier": [{"n_parcels": p.n_parcels,
                      "n_iterations": p.n_iterations,
                      "success": p.success, "flops": p.flops}
                     for p in frontier],
    }
    if frontier:
        chosen = ipo.select_tradeoff(frontier)
        payload["selected"] = {"n_parcels": chosen.n_parcels,
                               "n_iterations": chosen.n_iterations,
                               "flops": chosen.flops}
    frontier_name = f"pareto_frontier_{algo}.json"
    write_json(payload, os.path.join(out_dir, frontier_name))
    _write_manifest(out_dir, "pareto", {"algo": algo},
                    [surface_name, frontier_name])


# --------------------------------------------------------------- opm-noise

@main.command("opm-noise")
@_common
@click.option("--seeds", default="0..19", show_default=True)
@click.option("--tau", type=float, default=0.0, show_default=True)
def opm_noise(**kwargs):
    """Runs under lognormal monitoring error; NMSE plateau statistics."""
    _execute(_cmd_opm_noise, **kwargs)


def _cmd_opm_noise(config_path, overrides, out_dir, seeds, tau):
    seed_list = parse_seeds(seeds)
    _, network, phys = _load(config_path, overrides)
    out_dir = _prepare_out(out_dir)
    model = QotModel(network, phys, tau=tau)
    ref_dbm, _ = _reference(model)
    sigma = float(np.sqrt(phys.monitor_var_db))
    spec = ScenarioSpec(monitoring_kind="lognormal",
                        monitor_sigma_db=sigma,
                        monitor_mu_db=phys.monitor_mu_db)

    run_rows, trace_rows = [], []
    summary = {"experiment": "opm-noise", "monitor_sigma_db": sigma,
               "tau": tau, "algorithms": {}}
    for algo in ("chso", "hso"):
        nmse_traces, finals, pps = [], [], []
        for seed in seed_list:
            est = _make_search(algo, seed=seed)
            result = run_scenario(est, network, phys, spec, tau=tau)
            run = result.reports[0]
            metrics.attach_reference(run, ref_dbm, model=model)
            nmse_traces.append(np.asarray(run.nmse_trace, dtype=float))
            finals.append(float(run.nmse_trace[-1]))
            pps.append(float(np.max(np.abs(run.power_penalty_db))))
            run_rows.append([algo, seed, finals[-1], pps[-1]])
        mean_trace = np.mean(np.stack(nmse_traces), axis=0)
        trace_rows += [[algo, n + 1, float(v)]
                       for n, v in enumerate(mean_trace)]
        quarter = max(len(mean_trace) // 4, 1)
        summary["algorithms"][algo] = {
            "plateau_nmse": float(np.mean(mean_trace[-quarter:])),
            "median_final_nmse": float(np.median(finals)),
            "max_abs_pp_db": float(np.max(pps)),
        }
    write_table_csv(run_rows, ["algorithm", "seed", "final_nmse",
                               "max_abs_pp_db"],
                    os.path.join(out_dir, "opm_noise_runs.csv"))
    write_table_csv(trace_rows, ["algorithm", "iteration", "mean_nmse"],
                    os.path.join(out_dir, "opm_noise_trace.csv"))
    write_json(summary, os.path.join(out_dir, "opm_noise_summary.json"))
    _write_manifest(out_dir, "opm-noise", {"seeds": seeds, "tau": tau},
                    ["opm_noise_runs.csv", "opm_noise_trace.csv",
                     "opm_noise_summary.json"])


# ------------------------------------------------------------------ ageing

@main.command()
@_common
@click.option("--seeds", default="0..9", show_default=True)
def ageing(**kwargs):
    """Power penalty versus years in service, per tau schedule."""
    _execute(_cmd_ageing, **kwargs)


def _cmd_ageing(config_path, overrides, out_dir, seeds):
    seed_list = parse_seeds(seeds)
    doc, network, phys = _load(config_path, overrides)
    out_dir = _prepare_out(out_dir)
    base_spec = load_scenario(doc)
    spec = replace(base_spec, drops=(), tau_schedule=base_spec.tau_schedule)
    if not spec.tau_schedule:
        raise ValueError("config scenario block has no tau_schedule")

    references = {}
    for tau in spec.tau_schedule:
        ref_dbm, _ = _reference(QotModel(network, phys, tau=tau))
        references[tau] = dbm_to_watt(ref_dbm)
    band_lo = lin_to_db(1.0 - phys.lambda1)
    band_hi = lin_to_db(1.0 + phys.lambda2)

    rows = []
    summary = {"experiment": "ageing", "band_lo_db": float(band_lo),
               "band_hi_db": float(band_hi), "algorithms": {}}
    for algo in ("chso", "hso"):
        penalties = {tau: [] for tau in spec.tau_schedule}
        for seed in seed_list:
            est = _make_search(algo, seed=seed)
            result = run_scenario(est, network, phys, spec)
            for tau, run in zip(result.taus, result.reports):
                pp = metrics.power_penalty(dbm_to_watt(run.powers_dbm),
                                           references[tau])
                penalties[tau].append(pp)
        crossings = []
        for tau in spec.tau_schedule:
            stack = np.stack(penalties[tau])
            mean_pp = float(stack.mean())
            std_pp = float(stack.std())
            rows.append([algo, tau, mean_pp, std_pp,
                         float(band_lo), float(band_hi)])
            per_channel_mean = stack.mean(axis=0)
            if float(per_channel_mean.min()) < band_lo:
                crossings.append(float(tau))
        summary["algorithms"][algo] = {"band_crossings_at_tau": crossings}
    write_table_csv(rows, ["algorithm", "tau", "mean_pp_db", "std_pp_db",
                           "band_lo_db", "band_hi_db"],
                    os.path.join(out_dir, "ageing.csv"))
    write_json(summary, os.path.join(out_dir, "ageing_summary.json"))
    _write_manifest(out_dir, "ageing", {"seeds": seeds},
                    ["ageing.csv", "ageing_summary.json"])


# ------------------------------------------------------------ perturbation

@main.command()
@_common
@click.option("--seeds", default="0..9", show_default=True)
@click.option("--tau", type=float, default=0.0, show_default=True)
def perturbation(**kwargs):
    """Channel-drop transient with the oscillation window active."""
    _execute(_cmd_perturbation, **kwargs)


def _cmd_perturbation(config_path, overrides, out_dir, seeds, tau):
    seed_list = parse_seeds(seeds)
    doc, network, phys = _load(config_path, overrides)
    out_dir = _prepare_out(out_dir)
    spec = replace(load_scenario(doc), tau_schedule=())
    if not spec.drops:
        raise ValueError("config scenario block has no drops")

    ref_cache = {}
    trace_rows, run_rows = [], []
    summary = {"experiment": "perturbation", "tau": tau, "algorithms": {}}
    for algo in ("chso", "hso"):
        finals, uncomp = [], []
        nmse_curves = []
        for seed in seed_list:
            est = _make_search(algo, seed=seed)
            result = run_scenario(est, network, phys, spec, tau=tau)
            survivors = result.networks[-1]
            key = tuple(survivors.names)
            if key not in ref_cache:
                ref_dbm, _ = _reference(QotModel(survivors, phys, tau=tau))
                ref_cache[key] = dbm_to_watt(ref_dbm)
            ref_w = ref_cache[key]
            keep = [result.networks[0].names.index(nm)
                    for nm in survivors.names]
            curve = _drop_nmse_curve(result, keep, ref_w)
            nmse_curves.append(curve)
            finals.append(float(curve[-1]))
            uncomp.append(float(metrics.nmse(
                dbm_to_watt(result.frozen_powers_dbm), ref_w)))
            run_rows.append([algo, seed, finals[-1], uncomp[-1]])
        mean_curve = np.mean(np.stack(nmse_curves), axis=0)
        trace_rows += [[algo, n, float(v)]
                       for n, v in enumerate(mean_curve)]
        summary["algorithms"][algo] = {
            "median_final_nmse": float(np.median(finals)),
            "median_uncompensated_nmse": float(np.median(uncomp)),
        }
    write_table_csv(run_rows, ["algorithm", "seed", "final_nmse",
                               "uncompensated_nmse"],
                    os.path.join(out_dir, "perturbation_runs.csv"))
    write_table_csv(trace_rows, ["algorithm", "iteration", "mean_nmse"],
                    os.path.join(out_dir, "perturbation_trace.csv"))
    write_json(summary, os.path.join(out_dir, "perturbation_summary.json"))
    _write_manifest(out_dir, "perturbation", {"seeds": seeds, "tau": tau},
                    ["perturbation_runs.csv", "perturbation_trace.csv",
                     "perturbation_summary.json"])


def _drop_nmse_curve(result, keep, ref_w):
    """Survivor-channel NMSE against the post-drop reference, on the
    absolute iteration axis (row 0 = initial state)."""
    first = np.asarray(result.reports[0].power_trace_dbm, dtype=float)
    curve = list(metrics.nmse(dbm_to_watt(first[:, keep]), ref_w))
    for run in result.reports[1:]:
        trace = np.asarray(run.power_trace_dbm, dtype=float)[1:]
        curve += list(metrics.nmse(dbm_to_watt(trace), ref_w))
    return np.asarray(curve)


# -------------------------------------------------------------- complexity

@main.command()
@_common
@click.option("--scenarios", default="A,B,C", show_default=True,
              help="Comma list of load scenarios (A=1x, B=10x, C=20x).")
def complexity(**kwargs):
    """Closed-form operation counts across system loadings."""
    _execute(_cmd_complexity, **kwargs)


def _cmd_complexity(config_path, overrides, out_dir, scenarios):
    labels = [token.strip().upper() for token in scenarios.split(",")
              if token.strip()]
    if not labels:
        raise ValueError("empty scenario list")
    unknown = [lab for lab in labels if lab not in SCENARIO_SCALE]
    if unknown:
        raise ValueError(f"unknown scenarios: {unknown} "
                         f"(choose from {sorted(SCENARIO_SCALE)})")
    _, network, phys = _load(config_path, overrides)
    out_dir = _prepare_out(out_dir)

    rows = []
    per_algo = {"chso": [], "hso": [], "gd": []}
    sizes = []
    for label in labels:
        scaled = network.replicate(SCENARIO_SCALE[label])
        m = scaled.n_channels
        term = metrics.network_flop_term(scaled)
        sizes.append(m)
        for algo in ("chso", "hso"):
            tuned = TUNED[algo]
            flops = metrics.flops_hurricane(
                tuned["n_iterations"], tuned["n_parcels"], m, term,
                chaotic=(tuned["variant"] == "chaotic"))
            rows.append([label, m, algo, flops])
            per_algo[algo].append(flops)
        gd_flops = metrics.flops_gd(GD_FLOP_ITERATIONS, m, term,
                                    GD_FLOP_BACKTRACKS)
        rows.append([label, m, "gd", gd_flops])
        per_algo["gd"].append(gd_flops)
    write_table_csv(rows, ["scenario", "n_channels", "algorithm", "flops"],
                    os.path.join(out_dir, "complexity.csv"))

    summary = {"experiment": "complexity", "scenarios": labels,
               "gd_iterations": GD_FLOP_ITERATIONS,
               "gd_backtracks": GD_FLOP_BACKTRACKS}
    if len(sizes) >= 2:
        log_m = np.log10(np.asarray(sizes, dtype=float))
        summary["loglog_slopes"] = {
            algo: float(np.polyfit(log_m, np.log10(values), 1)[0])
            for algo, values in per_algo.items()}
    write_json(summary, os.path.join(out_dir, "complexity_summary.json"))
    _write_manifest(out_dir, "complexity", {"scenarios": scenarios},
                    ["complexity.csv", "complexity_summary.json"])


if __name__ == "__main__":
    main()
