from .compiler import CompiledSdp, RecoveredSolution, RecoveryMap, compile_to_sdp, recover_solution
from .scaling import AffineScaling
from .tightening import (
    ConstraintId,
    GramStructure,
    SosConstraint,
    SosProgram,
    build_sos_check,
    build_tightening,
)

__all__ = [
    "AffineScaling",
    "CompiledSdp",
    "ConstraintId",
    "GramStructure",
    "RecoveredSolution",
    "RecoveryMap",
    "SosConstraint",
    "SosProgram",
    "build_sos_check",
    "build_tightening",
    "compile_to_sdp",
    "recover_solution",
]
