from typing import Any


class MhdkinError(Exception):
    """Base exception for mhdkin."""

    exit_code: int = 1

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class ConfigurationError(MhdkinError):
    """Raised when a study configuration is invalid."""

    exit_code = 2

    def __init__(self, message: str):
        super().__init__(f"Invalid configuration: {message}")


class MeshLevelError(MhdkinError):
    """Raised when a mesh level is out of the supported range."""

    exit_code = 2

    def __init__(self, level: int, max_level: int):
        super().__init__(
            f"Mesh level {level} is outside 0..{max_level}",
            {"level": level, "max_level": max_level},
        )


class DegenerateCellError(MhdkinError):
    """Raised when a cell has (numerically) zero volume."""

    def __init__(self, cells: list[int]):
        super().__init__(
            f"Degenerate cells with zero volume: {cells[:10]}",
            {"cells": cells},
        )


class MeshMismatchError(MhdkinError):
    """Raised when finite element spaces live on different meshes."""

    def __init__(self, message: str = "Spaces are not defined on the same mesh"):
        super().__init__(message)


class DimensionMismatchError(MhdkinError):
    """Raised when operand shapes do not match."""

    def __init__(self, expected: int, actual: int):
        super().__init__(
            f"Dimension mismatch: expected {expected}, got {actual}",
            {"expected": expected, "actual": actual},
        )


class SingularMatrixError(MhdkinError):
    """Raised when a direct factorization hits a zero pivot."""

    def __init__(self, pivot: int | None):
        where = "unknown pivot" if pivot is None else f"pivot {pivot}"
        super().__init__(f"Matrix is singular ({where})", {"pivot": pivot})
        self.pivot = pivot


class IndefiniteOperatorError(MhdkinError):
    """Raised when CG meets a non-positive curvature direction."""

    def __init__(self, iteration: int, curvature: float):
        super().__init__(
            f"Operator is not positive definite: p.Ap = {curvature:.3e} "
            f"at iteration {iteration}",
            {"iteration": iteration, "curvature": curvature},
        )


class ConvergenceError(MhdkinError):
    """Raised when an iterative solve does not reach its tolerance."""

    def __init__(self, iterations: int, residual: float, tolerance: float):
        super().__init__(
            f"No convergence after {iterations} iterations: "
            f"relative residual {residual:.3e} > {tolerance:.1e}",
            {"iterations": iterations, "residual": residual, "tolerance": tolerance},
        )


class InnerSolveError(MhdkinError):
    """Raised when a preconditioner sub-solve fails."""

    def __init__(self, step: int, block: str, reason: str):
        super().__init__(
            f"Preconditioner step {step} ({block}) failed: {reason}",
            {"step": step, "block": block},
        )
        self.step = step


class InvalidBlockStructureError(MhdkinError):
    """Raised when a block preconditioner layout cannot be back-substituted."""

    def __init__(self, message: str):
        super().__init__(f"Invalid block structure: {message}")


class DenseSizeError(MhdkinError):
    """Raised when a dense computation exceeds the configured size cap."""

    def __init__(self, size: int, cap: int):
        super().__init__(
            f"Dense problem of size {size} exceeds the cap of {cap}",
            {"size": size, "cap": cap},
        )


class RankDeficientConstraintError(MhdkinError):
    """Raised when the constraint matrix does not have full row rank."""

    def __init__(self, rank: int, rows: int):
        super().__init__(
            f"Constraint matrix has rank {rank} < {rows} rows",
            {"rank": rank, "rows": rows},
        )


class SpectrumMismatchError(MhdkinError):
    """Raised when the preconditioned spectrum violates the constraint theory."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(f"Spectrum check failed: {message}", details)


class EigenSolverError(MhdkinError):
    """Raised when a dense eigensolve fails."""

    def __init__(self, reason: str):
        super().__init__(f"Eigensolver failure: {reason}")


class OutputError(MhdkinError):
    """Raised when results cannot be written."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"Cannot write '{path}': {reason}", {"path": path})
