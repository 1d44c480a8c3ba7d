"""Quasi-steady simulation and telemetry analysis of pumping-cycle kite
power systems."""

from .atmosphere import Environment, WindState, wind_state_at
from .config import RunConfig, SweepSpec, load_config, load_sweep_spec, preset_path, save_config
from .cycle import (
    CycleResult,
    OperationSettings,
    PhaseResult,
    StepRecord,
    convergence_study,
    simulate_cycle,
    simulate_retraction,
    simulate_traction,
    simulate_transition,
    steady_retraction_elevation,
)
from .estimation import (
    EstimateRecord,
    LogRecord,
    PhaseAverages,
    derive_kinematics,
    estimate_CR,
    estimate_LD,
    estimate_record,
    segment_and_average,
    segment_phases,
)
from .steady_state import (
    GRAVITY,
    AeroSet,
    EffectiveAero,
    EquilibriumResult,
    KiteParams,
    KiteState,
    TetherParams,
    effective_aero,
    ground_tether_force,
    massless_state,
    reel_factor_for_force_gravity,
    reel_factor_for_force_massless,
    solve_kinematic_ratio,
    tether_properties,
)

__version__ = "0.1.0"
