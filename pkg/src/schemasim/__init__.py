"""Behavior-based multi-robot simulation: FSM-sequenced motor schemas on potential fields."""

from .config import ConfigError, ScenarioConfig, demo_config, load_config, parse_config
from .dsl import AssemblageError, compile_assemblage, compile_source, parse_assemblage, render_assemblage
from .fields import (
    AttractiveParams,
    Branch,
    DomainError,
    KinematicState,
    RepulsiveParams,
    attractive_force,
    attractive_potential,
    fd_gradient,
    repulsive_force,
    repulsive_potential,
    total_force,
)
from .fsm import ContractError, Fsm, StateId, Transition, from_table, run_sequence, step_fsm, to_table, validate_fsm
from .metrics import compute_metrics, read_trace, write_trace
from .vec import Vec2
from .world import init_world, run_simulation, step_world

__all__ = [
    "AssemblageError", "AttractiveParams", "Branch", "ConfigError", "ContractError", "DomainError", "Fsm",
    "KinematicState", "RepulsiveParams", "ScenarioConfig", "StateId", "Transition", "Vec2",
    "attractive_force", "attractive_potential", "compile_assemblage", "compile_source", "compute_metrics",
    "demo_config", "fd_gradient", "from_table", "init_world", "load_config", "parse_assemblage", "parse_config",
    "read_trace", "render_assemblage", "repulsive_force", "repulsive_potential", "run_sequence", "run_simulation",
    "step_fsm", "step_world", "to_table", "total_force", "validate_fsm", "write_trace",
]
