from .problem import (
    SdpConstraint,
    SdpProblem,
    SdpProblemBuilder,
    SdpResiduals,
    SdpSolution,
    SdpStatus,
    SolverSettings,
)
from .residuals import ResidualCheck, residuals
from .sdpa_io import export_sdpa, import_sdpa
from .solver import InteriorPointSolver, solve

__all__ = [
    "InteriorPointSolver",
    "ResidualCheck",
    "SdpConstraint",
    "SdpProblem",
    "SdpProblemBuilder",
    "SdpResiduals",
    "SdpSolution",
    "SdpStatus",
    "SolverSettings",
    "export_sdpa",
    "import_sdpa",
    "residuals",
    "solve",
]
