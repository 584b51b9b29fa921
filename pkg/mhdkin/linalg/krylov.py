"""
Krylov solvers: flexible GMRES for the outer saddle-point system, GMRES and
CG for the inner block solves.

Preconditioners are callables returning an approximation of A^{-1} r. For
FGMRES they may change from one application to the next (inner iterative
solves), which is why the preconditioned directions are kept.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from pydantic import BaseModel, Field, model_validator

from mhdkin.core.config import settings
from mhdkin.core.exceptions import (
    ConvergenceError,
    DimensionMismatchError,
    IndefiniteOperatorError,
)
from mhdkin.linalg.sparse import Operator, as_operator

logger = logging.getLogger(__name__)


class KrylovConfig(BaseModel):
    tol: float = Field(default_factory=lambda: settings.outer_tol, ge=0.0, lt=1.0)
    max_iterations: int = Field(
        default_factory=lambda: settings.outer_max_iterations, ge=1
    )
    restart: int = Field(default_factory=lambda: settings.restart, ge=1)
    fixed_iterations: int | None = Field(default=None, ge=1)
    reorth_tol: float = Field(default_factory=lambda: settings.reorth_tol, gt=0.0)

    @model_validator(mode="after")
    def check_stopping_rule(self) -> "KrylovConfig":
        if self.tol <= 0.0 and self.fixed_iterations is None:
            raise ValueError("tol must be positive unless fixed_iterations is set")
        return self


@dataclass
class KrylovResult:
    x: np.ndarray
    iterations: int
    converged: bool
    residual: float  # final relative residual ||b - A x|| / ||b||
    residuals: list[float] = field(default_factory=list)

    def check(self, tolerance: float) -> "KrylovResult":
        """
        Raises:
            ConvergenceError: If the solve stopped above its tolerance
        """
        if not self.converged:
            raise ConvergenceError(self.iterations, self.residual, tolerance)
        return self


def _identity(r: np.ndarray) -> np.ndarray:
    return r.copy()


def _check_rhs(size: int, b: np.ndarray) -> None:
    if len(b) != size:
        raise DimensionMismatchError(size, len(b))


def fgmres(
    operator: Operator,
    preconditioner,
    b: np.ndarray,
    config: KrylovConfig | None = None,
    x0: np.ndarray | None = None,
) -> KrylovResult:
    """
    Right-preconditioned flexible GMRES with restarts.

    Arnoldi uses modified Gram-Schmidt with a second pass when the new
    direction keeps more than ``reorth_tol`` of its norm along the basis.
    The least-squares problem is kept triangular with Givens rotations.

    Args:
        operator: system matrix or callable
        preconditioner: callable approximating A^{-1}, None for identity
        b: right-hand side
        config: tolerance, restart length and iteration cap
        x0: initial guess, zero by default

    Returns:
        KrylovResult with the best iterate found. ``converged`` is False when
        the iteration cap was reached first.
    """
    config = config or KrylovConfig()
    b = np.asarray(b, dtype=float)
    size = len(b)
    A = as_operator(operator, size)
    _check_rhs(A.shape[0], b)
    apply_pc = preconditioner or _identity

    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return KrylovResult(np.zeros(size), 0, True, 0.0, [0.0])

    x = np.zeros(size) if x0 is None else np.array(x0, dtype=float)
    r = b - A.matvec(x)
    beta = float(np.linalg.norm(r))
    history = [beta / b_norm]
    best_x, best_residual = x.copy(), beta / b_norm
    total = 0
    converged = best_residual <= config.tol

    while not converged and total < config.max_iterations:
        m = min(config.restart, config.max_iterations - total)
        basis = [r / beta]
        directions = []
        hessenberg = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        steps = 0

        for j in range(m):
            z = apply_pc(basis[j])
            directions.append(z)
            w = A.matvec(z)

            for i, v in enumerate(basis):
                hessenberg[i, j] = v @ w
                w = w - hessenberg[i, j] * v
            w_norm = float(np.linalg.norm(w))
            leftover = np.array([v @ w for v in basis])
            if w_norm > 0.0 and np.max(np.abs(leftover)) > config.reorth_tol * w_norm:
                for i, v in enumerate(basis):
                    w = w - leftover[i] * v
                hessenberg[: j + 1, j] += leftover
                w_norm = float(np.linalg.norm(w))
            hessenberg[j + 1, j] = w_norm

            for i in range(j):
                upper = cs[i] * hessenberg[i, j] + sn[i] * hessenberg[i + 1, j]
                hessenberg[i + 1, j] = -sn[i] * hessenberg[i, j] + cs[i] * hessenberg[i + 1, j]
                hessenberg[i, j] = upper
            radius = np.hypot(hessenberg[j, j], hessenberg[j + 1, j])
            if radius == 0.0:
                cs[j], sn[j] = 1.0, 0.0
            else:
                cs[j] = hessenberg[j, j] / radius
                sn[j] = hessenberg[j + 1, j] / radius
            hessenberg[j, j] = radius
            hessenberg[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]

            steps = j + 1
            total += 1
            history.append(abs(g[j + 1]) / b_norm)
            if w_norm == 0.0 or history[-1] <= config.tol or total >= config.max_iterations:
                break
            basis.append(w / w_norm)

        if steps == 0:
            break
        diagonal = np.abs(np.diag(hessenberg[:steps, :steps]))
        usable = steps
        while usable > 0 and diagonal[usable - 1] == 0.0:
            usable -= 1
        if usable == 0:
            break
        y = la.solve_triangular(hessenberg[:usable, :usable], g[:usable])
        x = x + np.column_stack(directions[:usable]) @ y

        r = b - A.matvec(x)
        beta = float(np.linalg.norm(r))
        relative = beta / b_norm
        if relative < best_residual:
            best_x, best_residual = x.copy(), relative
        converged = relative <= config.tol
        logger.debug("FGMRES cycle done: %d iterations, residual %.3e", total, relative)
        if beta == 0.0:
            break

    return KrylovResult(
        x=best_x,
        iterations=total,
        converged=converged,
        residual=best_residual,
        residuals=history,
    )


def gmres(
    operator: Operator,
    b: np.ndarray,
    config: KrylovConfig | None = None,
    preconditioner=None,
    x0: np.ndarray | None = None,
) -> KrylovResult:
    """Restarted GMRES with a fixed right preconditioner."""
    return fgmres(operator, preconditioner, b, config, x0)


def cg(
    operator: Operator,
    preconditioner,
    b: np.ndarray,
    config: KrylovConfig | None = None,
) -> KrylovResult:
    """
    Preconditioned conjugate gradients.

    With ``fixed_iterations`` set, exactly that many iterations are run and
    the result counts as converged; otherwise the iteration stops at the
    relative tolerance and never runs past the system dimension.

    Raises:
        IndefiniteOperatorError: If a search direction has p.Ap <= 0
    """
    config = config or KrylovConfig()
    b = np.asarray(b, dtype=float)
    size = len(b)
    A = as_operator(operator, size)
    _check_rhs(A.shape[0], b)
    apply_pc = preconditioner or _identity

    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return KrylovResult(np.zeros(size), 0, True, 0.0, [0.0])

    fixed = config.fixed_iterations is not None
    limit = config.fixed_iterations if fixed else min(config.max_iterations, size)

    x = np.zeros(size)
    r = b.copy()
    z = apply_pc(r)
    p = z.copy()
    rz = float(r @ z)
    history = [1.0]
    iterations = 0
    converged = fixed

    while iterations < limit and rz != 0.0:
        Ap = A.matvec(p)
        curvature = float(p @ Ap)
        if curvature <= 0.0:
            raise IndefiniteOperatorError(iterations + 1, curvature)
        alpha = rz / curvature
        x += alpha * p
        r -= alpha * Ap
        iterations += 1
        history.append(float(np.linalg.norm(r)) / b_norm)
        if not fixed and history[-1] <= config.tol:
            converged = True
            break
        z = apply_pc(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new

    if rz == 0.0:
        converged = True
    return KrylovResult(
        x=x,
        iterations=iterations,
        converged=converged,
        residual=history[-1],
        residuals=history,
    )
