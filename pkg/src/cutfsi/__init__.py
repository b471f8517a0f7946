"""Conservative cut-cell coupling of a compressible Euler solver with rigid bodies."""

from .gas import (
    AdmissibilityError,
    GasModel,
    conserved_from_primitive,
    euler_flux,
    pressure,
    primitive_from_conserved,
    sound_speed,
)
from .fluxes import FluxError, FluxScheme, high_order_flux, roe_flux
from .sweeps import BoundaryCondition, DomainBC, stable_dt, strang_step_2d, sweep_1d
from .geometry import Grid, face_apertures, grid_coverage, subdivide_boundary, \
    swept_contributions, volume_fraction
from .rigid import LoadSet, RigidBody, accumulate_pressure_loads, face_velocity, \
    make_planar_body, rattle_advance_positions, rattle_finalize_velocities
from .coupling import CutCellField, StepReport, boundary_flux, coupled_step, \
    find_target_cell, mix_small_cells
from .diagnostics import ConservationLedger, convergence_order, fluid_totals
from .riemann import exact_riemann, star_state
from .scenarios import ScenarioConfig, load_config, run_scenario, save_config

__version__ = "0.1.0"
