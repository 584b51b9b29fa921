from mhdkin.models.case import ExactSolution, Field3, PhysicsCase
from mhdkin.models.report import SolveReport, StudyReport
from mhdkin.models.study import (
    CaseName,
    InnerMode,
    OutputFormat,
    StudyConfig,
    StudyKind,
)

__all__ = [
    "CaseName",
    "ExactSolution",
    "Field3",
    "InnerMode",
    "OutputFormat",
    "PhysicsCase",
    "SolveReport",
    "StudyConfig",
    "StudyKind",
    "StudyReport",
]
