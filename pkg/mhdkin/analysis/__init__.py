from mhdkin.analysis.norms import (
    ErrorNorms,
    MixedSolution,
    convergence_orders,
    divergence_norm,
    electric_field_norm,
    error_norms,
    helicity,
    magnetic_divergence_norm,
    multiplier_norm,
)

__all__ = [
    "ErrorNorms",
    "MixedSolution",
    "convergence_orders",
    "divergence_norm",
    "electric_field_norm",
    "error_norms",
    "helicity",
    "magnetic_divergence_norm",
    "multiplier_norm",
]
