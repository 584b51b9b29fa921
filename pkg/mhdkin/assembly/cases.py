"""Physics cases: the manufactured precision test and the preconditioner benchmark."""

import numpy as np

from mhdkin.models.case import ExactSolution, PhysicsCase


def _zero_vector(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(x)


def _zero_scalar(x: np.ndarray) -> np.ndarray:
    return np.zeros(len(x))


def _vector(*components) -> np.ndarray:
    return np.stack(components, axis=-1)


def manufactured_case_example1(sigma: float = 1.0, rm: float = 1.0) -> PhysicsCase:
    """
    Smooth manufactured solution with w = (x, y, z).

    J = (sin y, 0, x^2), phi = z, A = (0, cos x, 0) and r = 0, so
    curl A = (0, 0, -sin x) and curl curl A = (0, cos x, 0). The sources
    follow by substitution: f1 = eta J + grad phi - w x curl A and
    g = -J + curl curl A / Rm.
    """
    eta, nu_m = 1.0 / sigma, 1.0 / rm

    def J(x):
        return _vector(np.sin(x[:, 1]), np.zeros(len(x)), x[:, 0] ** 2)

    def phi(x):
        return x[:, 2].copy()

    def A(x):
        return _vector(np.zeros(len(x)), np.cos(x[:, 0]), np.zeros(len(x)))

    def curl_A(x):
        return _vector(np.zeros(len(x)), np.zeros(len(x)), -np.sin(x[:, 0]))

    def w(x):
        return x.copy()

    def f1(x):
        return _vector(
            eta * np.sin(x[:, 1]) + x[:, 1] * np.sin(x[:, 0]),
            -x[:, 0] * np.sin(x[:, 0]),
            eta * x[:, 0] ** 2 + 1.0,
        )

    def g(x):
        return _vector(-np.sin(x[:, 1]), nu_m * np.cos(x[:, 0]), -x[:, 0] ** 2)

    return PhysicsCase(
        name="example1",
        sigma=sigma,
        rm=rm,
        w=w,
        g=g,
        f1=f1,
        phi_boundary=phi,
        a_boundary=A,
        exact=ExactSolution(
            J=J, phi=phi, A=A, r=_zero_scalar, curl_A=curl_A, div_J=_zero_scalar
        ),
    )


def benchmark_velocity(x: np.ndarray) -> np.ndarray:
    """Swirl 16 x(1-x) y(1-y) (-sin theta, cos theta, 0), zero on the z-axis."""
    rho = np.hypot(x[:, 0], x[:, 1])
    amplitude = 16.0 * x[:, 0] * (1.0 - x[:, 0]) * x[:, 1] * (1.0 - x[:, 1])
    safe = np.where(rho > 0.0, rho, 1.0)
    scale = np.where(rho > 0.0, amplitude / safe, 0.0)
    return _vector(-scale * x[:, 1], scale * x[:, 0], np.zeros(len(x)))


def benchmark_case_example2(rm: float = 50.0, sigma: float = 1.0) -> PhysicsCase:
    """Rotating flow in a uniform applied field, A_b = (0, 0, y) with curl A_b = (1, 0, 0)."""

    def a_boundary(x):
        return _vector(np.zeros(len(x)), np.zeros(len(x)), x[:, 1])

    return PhysicsCase(
        name="example2",
        sigma=sigma,
        rm=rm,
        w=benchmark_velocity,
        g=_zero_vector,
        f1=_zero_vector,
        phi_boundary=_zero_scalar,
        a_boundary=a_boundary,
    )


def eddy_current_case(case: PhysicsCase) -> PhysicsCase:
    """
    The same case with the velocity switched off.

    Sources are kept as they are, so a manufactured solution no longer
    solves the problem and is dropped.
    """
    return case.model_copy(
        update={
            "name": f"{case.name}-eddy",
            "w": _zero_vector,
            "has_velocity": False,
            "exact": None,
        }
    )


CASES = {
    "example1": manufactured_case_example1,
    "example2": benchmark_case_example2,
}
