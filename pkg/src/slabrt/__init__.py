"""Linear Rayleigh-Taylor instability in a horizontally periodic slab with
slip walls: variational growth rates, dispersion scans, mode reconstruction
and a time-domain cross-check."""

from .dispersion import (
    DispersionPoint,
    DispersionResult,
    ModeSolution,
    RealModeField,
    companion_oracle,
    escape_time,
    growth_rate,
    natural_bc_residual,
    real_fields,
    reconstruct_mode,
    scan_band,
)
from .evolve import (
    CrankNicolsonStepper,
    EvolveState,
    energy_balance_residual,
    fit_growth_rate,
    kinetic_energy,
    mode_initial_state,
    simulate,
    step,
)
from .forms import FormSet, assemble_forms, c0_constant
from .grid import SpectralGrid, build_grid, integrate
from .profiles import (
    DensityProfile,
    SlabConfig,
    ValidationReport,
    constant_profile,
    hydrostatic_pressure,
    preset_profile,
    profile_from_csv,
    tabulated_profile,
    validate_profile,
)
from .variational import (
    CriticalNumbers,
    alpha,
    compute_critical_numbers,
    critical_frequency,
    critical_viscosity_closed_form,
    critical_viscosity_numerical,
    frak_S,
    upper_bound_constants,
)

__all__ = [
    "CrankNicolsonStepper",
    "CriticalNumbers",
    "DensityProfile",
    "DispersionPoint",
    "DispersionResult",
    "EvolveState",
    "FormSet",
    "ModeSolution",
    "RealModeField",
    "SlabConfig",
    "SpectralGrid",
    "ValidationReport",
    "alpha",
    "assemble_forms",
    "build_grid",
    "c0_constant",
    "companion_oracle",
    "compute_critical_numbers",
    "constant_profile",
    "critical_frequency",
    "critical_viscosity_closed_form",
    "critical_viscosity_numerical",
    "energy_balance_residual",
    "escape_time",
    "fit_growth_rate",
    "frak_S",
    "growth_rate",
    "hydrostatic_pressure",
    "integrate",
    "kinetic_energy",
    "mode_initial_state",
    "natural_bc_residual",
    "preset_profile",
    "profile_from_csv",
    "real_fields",
    "reconstruct_mode",
    "scan_band",
    "simulate",
    "step",
    "tabulated_profile",
    "upper_bound_constants",
    "validate_profile",
]
