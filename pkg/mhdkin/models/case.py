from collections.abc import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

Field3 = Callable[[np.ndarray], np.ndarray]


class ExactSolution(BaseModel):
    """Manufactured (J, phi, A, r) with the derivatives the error norms need."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    J: Field3
    phi: Field3
    A: Field3
    r: Field3
    curl_A: Field3
    div_J: Field3


class PhysicsCase(BaseModel):
    """
    Data of one MHD kinematics problem in dimensionless form.

    Fields map (N, 3) points to (N, 3) vectors, scalar fields to (N,).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    sigma: float = Field(default=1.0, gt=0)
    rm: float = Field(default=1.0, gt=0)
    w: Field3
    g: Field3
    f1: Field3
    phi_boundary: Field3
    a_boundary: Field3
    exact: ExactSolution | None = None
    has_velocity: bool = True

    @property
    def eta(self) -> float:
        return 1.0 / self.sigma

    @property
    def nu_m(self) -> float:
        return 1.0 / self.rm
