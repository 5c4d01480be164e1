"""Defender-trajectory optimization against adversarial swarms under parameter uncertainty."""

__version__ = "0.1.0"

from .attrition import WeaponParams, damage_rate, survival_rhs
from .engagement import (
    AttackerInit,
    ControlSchedule,
    DefenderInit,
    HvuPath,
    NodeState,
    ScenarioConfig,
    Trajectory,
    bind_theta,
    node_rhs,
    project_control,
    simulate_ensemble,
    terminal_cost,
)
from .errors import CoincidentPointError, ConfigError, SimulationError
from .models import (
    Model1Params,
    Model2Params,
    SwarmModel,
    hvu_tracking_force,
    neighbor_set,
    reynolds_control,
    vbap_control,
    vbap_pair_force,
)
from .adjoint import (
    CostateEnsemble,
    HamiltonianProfile,
    covector_map,
    hamiltonian_convergence,
    hamiltonian_profile,
    integrate_costates,
    weighted_costate_residual,
)
from .config import RunConfig, config_hash, dump_config, load_config, parse_config
from .quadrature import ParamDomain, QuadratureRule, build_rule, integrate, rule_at
from .robustness import SweepResult, compare, sweep
from .solver import (
    OptimalSolution,
    OptimizationConfig,
    ensemble_objective,
    objective_gradient,
    optimize,
)
