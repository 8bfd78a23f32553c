"""Partial sliced inverse regression for quality-relevant process monitoring."""

from .errors import PsirmonError
from .monitor import MonitorModel, build_monitor, detect, load_model, save_model
from .pls import fit_nipals, pls_closed_form
from .psir import fit_psir, fit_psir_multi
from .simlab import ExperimentConfig, RateTable, run_experiment
from .sir import fit_sir

__all__ = [
    "ExperimentConfig",
    "MonitorModel",
    "PsirmonError",
    "RateTable",
    "build_monitor",
    "detect",
    "fit_nipals",
    "fit_psir",
    "fit_psir_multi",
    "fit_sir",
    "load_model",
    "pls_closed_form",
    "run_experiment",
    "save_model",
]
