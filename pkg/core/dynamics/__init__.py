from .integrators import integrate, iterate_map, reversed_field, step_map, step_rk4
from .simulation_service import SimulationDefaults, sample_attractor, write_trajectory_csv

__all__ = [
    "SimulationDefaults",
    "integrate",
    "iterate_map",
    "reversed_field",
    "sample_attractor",
    "step_map",
    "step_rk4",
    "write_trajectory_csv",
]
