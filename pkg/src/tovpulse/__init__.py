"""Relativistic stellar equilibria, their radial pulsation spectra, and
nonlinear Lagrangian evolution of small perturbations with a vacuum free
boundary, plus the Schwarzschild exterior matching diagnostics."""

__version__ = "0.1.0"

from .eos import (
    CAPPED_POLYTROPE,
    NEUTRON_FERMI_GAS,
    EosModel,
    ThermoPoint,
    enthalpy_u,
    gamma_p,
    neutron_fermi_gas,
    pressure,
    rho_of_u,
    validate_assumptions,
)
from .tov import (
    Equilibrium,
    center_expansion,
    integrate_outward,
    metric_potentials,
    shortness_criterion,
    surface_chart,
    surface_exponent_check,
)
from .pulsation import (
    Spectrum,
    build_coefficients,
    build_x_chart,
    liouville_transform,
    periodic_mode,
    solve_spectrum,
)
from .evolution import (
    EvolutionConfig,
    PerturbationState,
    build_grid_ops,
    cauchy_setup,
    comoving_map,
    frechet_check,
    rhs_linear,
    rhs_nonlinear,
    run,
    run_mode,
)
from .matching import dynamic_c1_match, jump_A, static_c2_check

__all__ = [
    "CAPPED_POLYTROPE",
    "NEUTRON_FERMI_GAS",
    "EosModel",
    "Equilibrium",
    "EvolutionConfig",
    "PerturbationState",
    "Spectrum",
    "ThermoPoint",
    "build_coefficients",
    "build_grid_ops",
    "build_x_chart",
    "cauchy_setup",
    "center_expansion",
    "comoving_map",
    "dynamic_c1_match",
    "enthalpy_u",
    "frechet_check",
    "gamma_p",
    "integrate_outward",
    "jump_A",
    "liouville_transform",
    "metric_potentials",
    "neutron_fermi_gas",
    "periodic_mode",
    "pressure",
    "rho_of_u",
    "rhs_linear",
    "rhs_nonlinear",
    "run",
    "run_mode",
    "shortness_criterion",
    "solve_spectrum",
    "static_c2_check",
    "surface_chart",
    "surface_exponent_check",
    "validate_assumptions",
    "__version__",
]
