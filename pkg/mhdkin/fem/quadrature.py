import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """
    Quadrature on a simplex in barycentric coordinates.

    Weights are relative to the simplex measure, so they sum to one and
    the integral over a cell is ``measure * sum(weights * f(points))``.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def size(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=None)
def grundmann_moeller(dim: int, degree: int) -> QuadratureRule:
    """
    Grundmann-Moeller rule on the dim-simplex, exact for polynomials up to degree.

    Args:
        dim: simplex dimension (2 for triangles, 3 for tetrahedra)
        degree: requested polynomial exactness, raised to the next odd value

    Returns:
        QuadratureRule with (P, dim+1) barycentric points
    """
    if degree < 0:
        raise ValueError(f"Quadrature degree must be non-negative, got {degree}")
    s = max(0, math.ceil((degree - 1) / 2))
    d = 2 * s + 1

    points: list[np.ndarray] = []
    weights: list[float] = []
    for i in range(s + 1):
        denominator = d + dim - 2 * i
        weight = (
            (-1) ** i
            * 2.0 ** (-2 * s)
            * denominator**d
            / (math.factorial(i) * math.factorial(d + dim - i))
        )
        for beta in _compositions(s - i, dim + 1):
            points.append((2.0 * np.array(beta) + 1.0) / denominator)
            weights.append(weight)

    rule = QuadratureRule(
        points=np.array(points),
        weights=np.array(weights) * math.factorial(dim),
        degree=d,
    )
    rule.points.flags.writeable = False
    rule.weights.flags.writeable = False
    return rule


@lru_cache(maxsize=None)
def gauss_legendre_01(n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]; weights sum to one."""
    nodes, weights = np.polynomial.legendre.leggauss(n_points)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def _compositions(total: int, parts: int):
    """All tuples of `parts` non-negative integers summing to `total`."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        previous = -1
        beta = []
        for bar in bars:
            beta.append(bar - previous - 1)
            previous = bar
        beta.append(total + parts - 1 - previous - 1)
        yield tuple(beta)
