"""Launch-power optimization for elastic optical networks.

Physical-layer model (span-resolved ASE and Kerr interference), a
gradient-descent reference optimizer, spiral-search metaheuristics with
chaotic or uniform radius modulation, input-parameter tuning, and the
operational scenarios built on top of them (ageing, monitoring error,
channel drops).
"""
from .config import ConfigError, apply_overrides, load_document, load_network
from .gradient import GradientDescent, gradient_j1, reference_powers
from .hurricane import (FixedDraws, HurricaneSearch, LogisticDraws,
                        UniformDraws)
from .ipo import (IpoConfig, ParetoPoint, cpos_ps1, cpos_ps2, make_objective,
                  pareto_frontier, select_tradeoff, tune_inputs,
                  tune_parameter)
from .metrics import (attach_reference, flops_gd, flops_hurricane,
                      network_flop_term, nmse, power_penalty, psi_trace,
                      rm_integral, settling_iteration)
from .modulation import FORMATS, ModulationFormat, ber, get_format
from .network import (AgedParams, AgePair, Lightpath, Network,
                      PhysicalParams, Route, Span, interpolate_param,
                      shared_spans)
from .qot import PressureFunction, QotBreakdown, QotModel
from .report import (RunReport, summary_dict, write_breakdown_csv,
                     write_json, write_summary_json, write_table_csv,
                     write_trace_csv)
from .scenarios import (PerturbationSpec, ScenarioPressure, ScenarioResult,
                        ScenarioSpec, load_scenario, noisy_snr, perturbation,
                        run_scenario, traversing_channels)
from .units import db_to_lin, dbm_to_watt, lin_to_db, watt_to_dbm

__version__ = "0.1.0"

__all__ = [
    "AgePair", "AgedParams", "ConfigError", "FORMATS", "FixedDraws",
    "GradientDescent", "HurricaneSearch", "IpoConfig", "Lightpath",
    "LogisticDraws", "ModulationFormat", "Network", "ParetoPoint",
    "PerturbationSpec", "PhysicalParams", "PressureFunction",
    "QotBreakdown", "QotModel", "Route", "RunReport", "ScenarioPressure",
    "ScenarioResult", "ScenarioSpec", "Span", "UniformDraws",
    "apply_overrides", "attach_reference", "ber", "cpos_ps1", "cpos_ps2",
    "db_to_lin", "dbm_to_watt", "flops_gd", "flops_hurricane",
    "get_format", "gradient_j1", "interpolate_param", "lin_to_db",
    "load_document", "load_network", "load_scenario", "make_objective",
    "network_flop_term", "nmse", "noisy_snr", "pareto_frontier",
    "perturbation", "power_penalty", "psi_trace", "reference_powers",
    "rm_integral", "run_scenario", "select_tradeoff", "settling_iteration",
    "shared_spans", "summary_dict", "traversing_channels", "tune_inputs",
    "tune_parameter", "watt_to_dbm", "write_breakdown_csv", "write_json",
    "write_summary_json", "write_table_csv", "write_trace_csv",
]
