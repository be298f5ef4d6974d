"""Simulation and numerics toolkit for level sets of branching Brownian
motion and the zero-boundary Gaussian field on the square grid.

Submodules: :mod:`rates` (closed-form rate functions with grid
certification), :mod:`gw` (branching-process tail bounds), :mod:`bbm`
(exact branching simulation and exponent estimators), :mod:`gff` (field
samplers, Green operators, harmonic decomposition, multiscale
partitions), :mod:`mc` (deterministic replica orchestration),
:mod:`pipelines` and :mod:`cli` (experiment reports).
"""

from . import bbm, gff, gw, mc, pipelines, rates, reports, tolerances
from .pipelines import (
    run_bbm_exponents,
    run_coarse_tail,
    run_cover_check,
    run_daviaud,
    run_decompose_var,
    run_gff_cov,
    run_gw_verify,
    run_nbbm,
    run_rate_point,
    run_rates,
)
from .reports import Report, emit_report, render_report

__version__ = "0.1.0"

__all__ = [
    "Report",
    "__version__",
    "bbm",
    "emit_report",
    "gff",
    "gw",
    "mc",
    "pipelines",
    "rates",
    "render_report",
    "reports",
    "run_bbm_exponents",
    "run_coarse_tail",
    "run_cover_check",
    "run_daviaud",
    "run_decompose_var",
    "run_gff_cov",
    "run_gw_verify",
    "run_nbbm",
    "run_rate_point",
    "run_rates",
    "tolerances",
]
