from .oracle import ObjectiveOracle
from .regularized import RegularizedModel
from .report import (
    ComparisonSummary,
    InnerRun,
    IterationRecord,
    ModelKind,
    RunReport,
    RunStats,
    RunStatus,
)
from .transfer import Level, LevelHierarchy, TransferPair

__all__ = [
    "ComparisonSummary",
    "InnerRun",
    "IterationRecord",
    "Level",
    "LevelHierarchy",
    "ModelKind",
    "ObjectiveOracle",
    "RegularizedModel",
    "RunReport",
    "RunStats",
    "RunStatus",
    "TransferPair",
]
