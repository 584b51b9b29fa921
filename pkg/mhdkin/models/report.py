import math

from pydantic import BaseModel, Field

from mhdkin.models.study import StudyConfig, StudyKind


class SolveReport(BaseModel):
    """Everything measured on one solve at one mesh level."""

    case: str
    level: int
    h: float
    rm: float
    sigma: float
    dofs_J: int
    dofs_phi: int
    dofs_A: int
    dofs_r: int
    converged: bool = False
    iterations: int = 0
    residual: float = math.nan
    residual_history: list[float] = Field(default_factory=list)
    err_J_hdiv: float | None = None
    err_phi_l2: float | None = None
    err_A_hcurl: float | None = None
    order_J: float | None = None
    order_phi: float | None = None
    order_A: float | None = None
    div_J_l2: float = math.nan
    div_B_l2: float = math.nan
    helicity: float = math.nan
    r_norm: float = math.nan
    e_norm: float = math.nan
    wall_time: float = 0.0
    error: str | None = None

    @property
    def dofs(self) -> tuple[int, int, int, int]:
        return self.dofs_J, self.dofs_phi, self.dofs_A, self.dofs_r


class StudyReport(BaseModel):
    """The rows of one study, in level order."""

    kind: StudyKind
    config: StudyConfig
    rows: list[SolveReport] = Field(default_factory=list)

    @property
    def converged(self) -> bool:
        return bool(self.rows) and all(row.converged for row in self.rows)
