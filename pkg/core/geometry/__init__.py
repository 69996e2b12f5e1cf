from .domain import (
    AnnulusDomain,
    BallDomain,
    BoxDomain,
    MomentDomain,
    SemialgebraicSet,
    domain_from_dict,
    ensure_ball_constraint,
)
from .moments import MomentVector, lebesgue_moments
from .sampling import sample_uniform

__all__ = [
    "AnnulusDomain",
    "BallDomain",
    "BoxDomain",
    "MomentDomain",
    "MomentVector",
    "SemialgebraicSet",
    "domain_from_dict",
    "ensure_ball_constraint",
    "lebesgue_moments",
    "sample_uniform",
]
