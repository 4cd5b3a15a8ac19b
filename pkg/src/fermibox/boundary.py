"""Self-adjoint boundary conditions for the box [-L, L].

A condition is a pair (A, B) of 2x2 matrices imposing A G1 phi = B G2 phi
with G1 phi = (phi(L), phi(-L)) and G2 phi = (-phi'(L), phi'(-L)).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix, phys_sqrt
from .exceptions import ConfigError, SingularPencil

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    A: np.ndarray
    B: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        A = check_matrix(self.A, "A")
        B = check_matrix(self.B, "B")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        scale = max(1.0, np.abs(A).max(), np.abs(B).max()) ** 2
        if np.max(np.abs(A @ B.conj().T - B @ A.conj().T)) > 1e-10 * scale:
            raise ConfigError("boundary condition violates A B* = B A*")
        if np.linalg.matrix_rank(np.hstack([A, B]), tol=1e-10 * np.sqrt(scale)) != 2:
            raise ConfigError("boundary condition needs rank(A|B) = 2")

    def u_matrix(self, z):
        """U(z) = (iA - sqrt(z) B)^{-1} (iA + sqrt(z) B) on the Im sqrt >= 0 branch."""
        return self.u_matrix_k(complex(phys_sqrt(z)))

    def u_matrix_k(self, k):
        lhs = 1j * self.A - k * self.B
        rhs = 1j * self.A + k * self.B
        if abs(np.linalg.det(lhs)) < 1e-13 * max(1.0, abs(k)) ** 2:
            raise SingularPencil(f"iA - kB is singular at k = {k}")
        return np.linalg.solve(lhs, rhs)

    def secular_matrix(self, k, L):
        """e^{2iLk} I + U sigma_x, singular exactly at box eigenvalues k^2."""
        return np.exp(2j * L * k) * np.eye(2) + self.u_matrix_k(k) @ SIGMA_X

    def characteristic_matrix(self, values_right, deriv_right, values_left, deriv_left):
        """A G1 - B G2 applied to two solutions (columns of the returned matrix).

        Each argument is a length-2 array (one entry per solution).
        """
        g1 = np.array([values_right, values_left])
        g2 = np.array([-np.asarray(deriv_right), deriv_left])
        return self.A @ g1 - self.B @ g2

    def is_real(self):
        return bool(np.all(np.abs(self.A.imag) == 0) and np.all(np.abs(self.B.imag) == 0))


def dirichlet():
    return BoundaryCondition(np.eye(2), np.zeros((2, 2)), "dirichlet")


def neumann():
    return BoundaryCondition(np.zeros((2, 2)), np.eye(2), "neumann")


def periodic():
    return BoundaryCondition(np.array([[1, -1], [0, 0]]), np.array([[0, 0], [1, 1]]), "periodic")


def robin(angle_right, angle_left=None):
    """Separated condition cos(a) phi = -sin(a) d_n phi at each end.

    d_n is the outward normal derivative; angle 0 is Dirichlet, angle pi/2
    is Neumann, and negative angles produce negative eigenvalues.
    """
    if angle_left is None:
        angle_left = angle_right
    A = np.diag([np.cos(angle_right), np.cos(angle_left)])
    B = np.diag([np.sin(angle_right), np.sin(angle_left)])
    return BoundaryCondition(A, B, "robin")


PRESETS = {"dirichlet": dirichlet, "neumann": neumann, "periodic": periodic}


def from_name(name, **kw):
    try:
        return PRESETS[name]() if name != "robin" else robin(**kw)
    except KeyError:
        raise ConfigError(f"unknown boundary condition preset {name!r}") from None
