from .approximation import AttractorApproximation
from .certification import CertificationRecord, certify
from .queries import (
    GridAxis,
    GridResult,
    IntersectionPredicate,
    RegionQueryResult,
    estimate_volume,
    grid_evaluate,
    intersect,
)

__all__ = [
    "AttractorApproximation",
    "CertificationRecord",
    "GridAxis",
    "GridResult",
    "IntersectionPredicate",
    "RegionQueryResult",
    "certify",
    "estimate_volume",
    "grid_evaluate",
    "intersect",
]
