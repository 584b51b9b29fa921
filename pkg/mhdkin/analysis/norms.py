import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from mhdkin.assembly import BlockSystem, FieldName
from mhdkin.core.config import settings
from mhdkin.fem import (
    FeFunction,
    MixedSpaces,
    SpaceKind,
    build_space,
    discrete_curl,
    discrete_divergence,
    evaluate_field,
    grundmann_moeller,
    iter_batches,
)
from mhdkin.models.case import ExactSolution, PhysicsCase

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MixedSolution:
    """Discrete (J_h, phi_h, A_h, r_h) with boundary data included in A_h."""

    spaces: MixedSpaces
    J: FeFunction
    phi: FeFunction
    A: FeFunction
    r: FeFunction

    @classmethod
    def from_system(cls, system: BlockSystem, x: np.ndarray) -> "MixedSolution":
        full = system.expand(x)
        spaces = system.spaces
        return cls(
            spaces=spaces,
            J=FeFunction(spaces.v2, full[FieldName.J]),
            phi=FeFunction(spaces.v3, full[FieldName.PHI]),
            A=FeFunction(spaces.v1, full[FieldName.A]),
            r=FeFunction(spaces.v0, full[FieldName.R]),
        )


@dataclass(frozen=True)
class ErrorNorms:
    j_hdiv: float
    phi_l2: float
    a_hcurl: float
    j_l2: float
    a_l2: float
    r_l2: float


def _squared_sum(values: np.ndarray, weights: np.ndarray) -> float:
    if values.ndim == 3:
        values = np.einsum("tpd,tpd->tp", values, values)
    else:
        values = values**2
    return float(np.sum(weights * values))


def error_norms(
    solution: MixedSolution,
    exact: ExactSolution,
    degree: int | None = None,
) -> ErrorNorms:
    """
    H(div), L2 and H(curl) errors of J_h, phi_h and A_h against a smooth solution.

    Integrals use a rule of degree settings.error_quadrature_degree, above
    the assembly rule.
    """
    rule = grundmann_moeller(3, degree or settings.error_quadrature_degree)
    sums = dict.fromkeys(["j", "div_j", "phi", "a", "curl_a", "r"], 0.0)

    for batch in iter_batches(solution.spaces.mesh):
        points = batch.map(rule.points)
        weights = batch.weights(rule)
        lam = rule.points
        differences = {
            "j": solution.J.evaluate(batch, lam) - evaluate_field(exact.J, points),
            "div_j": solution.J.derivative(batch, lam) - evaluate_field(exact.div_J, points),
            "phi": solution.phi.evaluate(batch, lam) - evaluate_field(exact.phi, points),
            "a": solution.A.evaluate(batch, lam) - evaluate_field(exact.A, points),
            "curl_a": solution.A.derivative(batch, lam) - evaluate_field(exact.curl_A, points),
            "r": solution.r.evaluate(batch, lam) - evaluate_field(exact.r, points),
        }
        for key, difference in differences.items():
            sums[key] += _squared_sum(difference, weights)

    # Rules of high degree have negative weights, so a vanishing error can sum below zero
    sums = {key: max(value, 0.0) for key, value in sums.items()}
    return ErrorNorms(
        j_hdiv=math.sqrt(sums["j"] + sums["div_j"]),
        phi_l2=math.sqrt(sums["phi"]),
        a_hcurl=math.sqrt(sums["a"] + sums["curl_a"]),
        j_l2=math.sqrt(sums["j"]),
        a_l2=math.sqrt(sums["a"]),
        r_l2=math.sqrt(sums["r"]),
    )


def divergence_norm(J_h: FeFunction) -> float:
    """L2 norm of div J_h, exact: the divergence is constant on each cell."""
    mesh = J_h.space.mesh
    divergence = discrete_divergence(mesh) @ J_h.coefficients
    return float(np.sqrt(np.sum(np.abs(mesh.volumes) * divergence**2)))


def magnetic_divergence_norm(A_h: FeFunction) -> float:
    """L2 norm of div B_h with B_h = curl A_h represented in V2."""
    mesh = A_h.space.mesh
    B_h = FeFunction(build_space(mesh, SpaceKind.V2), discrete_curl(mesh) @ A_h.coefficients)
    return divergence_norm(B_h)


def _integrate_cells(mesh, integrand, degree: int | None = None) -> float:
    rule = grundmann_moeller(3, degree or settings.error_quadrature_degree)
    total = 0.0
    for batch in iter_batches(mesh):
        total += float(np.sum(batch.weights(rule) * integrand(batch, rule.points)))
    return total


def helicity(J_h: FeFunction, A_h: FeFunction) -> float:
    """Integral of J_h . curl A_h."""

    def integrand(batch, lam):
        return np.einsum(
            "tpd,tpd->tp", J_h.evaluate(batch, lam), A_h.derivative(batch, lam)
        )

    return _integrate_cells(J_h.space.mesh, integrand)


def multiplier_norm(r_h: FeFunction) -> float:
    """L2 norm of the multiplier r_h."""

    def integrand(batch, lam):
        return r_h.evaluate(batch, lam) ** 2

    return math.sqrt(max(_integrate_cells(r_h.space.mesh, integrand), 0.0))


def electric_field_norm(solution: MixedSolution, case: PhysicsCase) -> float:
    """L2 norm of the electric field E = eta J_h - w x B_h recovered from Ohm's law."""

    def integrand(batch, lam):
        w = evaluate_field(case.w, batch.map(lam))
        E = case.eta * solution.J.evaluate(batch, lam) - np.cross(
            w, solution.A.derivative(batch, lam)
        )
        return np.einsum("tpd,tpd->tp", E, E)

    return math.sqrt(max(_integrate_cells(solution.spaces.mesh, integrand), 0.0))


def convergence_orders(
    errors: Sequence[float],
    h: Sequence[float],
) -> list[float | None]:
    """
    Observed orders log(e_coarse / e_fine) / log(h_coarse / h_fine).

    The first entry has no predecessor and is None, as is every order whose
    errors are zero or not finite.
    """
    orders: list[float | None] = [None]
    for (e_coarse, e_fine), (h_coarse, h_fine) in zip(
        zip(errors, errors[1:], strict=False), zip(h, h[1:], strict=False), strict=True
    ):
        values = (e_coarse, e_fine, h_coarse, h_fine)
        if not all(math.isfinite(v) and v > 0 for v in values) or h_coarse == h_fine:
            orders.append(None)
            continue
        orders.append(math.log(e_coarse / e_fine) / math.log(h_coarse / h_fine))
    return orders[: len(errors)]
