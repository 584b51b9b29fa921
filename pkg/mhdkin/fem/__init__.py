from mhdkin.fem.geometry import CellBatch, cell_batch, integrate, iter_batches
from mhdkin.fem.quadrature import QuadratureRule, gauss_legendre_01, grundmann_moeller
from mhdkin.fem.reference import REFERENCE_ELEMENTS, ReferenceElement, SpaceKind
from mhdkin.fem.spaces import (
    BasisValues,
    FeFunction,
    FeSpace,
    MixedSpaces,
    SmoothField,
    build_space,
    complex_inclusion_check,
    discrete_curl,
    discrete_divergence,
    discrete_gradient,
    eval_basis,
    evaluate_field,
    interpolate,
)

__all__ = [
    "REFERENCE_ELEMENTS",
    "BasisValues",
    "CellBatch",
    "FeFunction",
    "FeSpace",
    "MixedSpaces",
    "QuadratureRule",
    "ReferenceElement",
    "SmoothField",
    "SpaceKind",
    "build_space",
    "cell_batch",
    "complex_inclusion_check",
    "discrete_curl",
    "discrete_divergence",
    "discrete_gradient",
    "eval_basis",
    "evaluate_field",
    "gauss_legendre_01",
    "grundmann_moeller",
    "integrate",
    "interpolate",
    "iter_batches",
]
