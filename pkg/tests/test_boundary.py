import numpy as np
import pytest

from fermibox import boundary
from fermibox.exceptions import ConfigError


def random_condition(rng):
    """(A, B) = (cos X, sin X) rotated by a random invertible matrix, X Hermitian."""
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = x + x.conj().T
    w, v = np.linalg.eigh(h)
    c = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) + 3 * np.eye(2)
    A = c @ v @ np.diag(np.cos(w)) @ v.conj().T
    B = c @ v @ np.diag(np.sin(w)) @ v.conj().T
    return boundary.BoundaryCondition(A, B)


@pytest.mark.parametrize("z", [0.5, 4.0, -1.0, 2.0 + 1.0j])
def test_dirichlet_and_neumann_u(z):
    assert np.allclose(boundary.dirichlet().u_matrix(z), np.eye(2), atol=1e-15)
    assert np.allclose(boundary.neumann().u_matrix(z), -np.eye(2), atol=1e-15)


def test_random_conditions_give_unitary_u():
    rng = np.random.default_rng(7)
    for _ in range(20):
        u = random_condition(rng).u_matrix(4.0)
        assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-10


def test_presets_unitary_on_real_axis():
    for bc in (boundary.periodic(), boundary.robin(0.4, -0.9)):
        for z in (0.1, 1.0, 9.0):
            u = bc.u_matrix(z)
            assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-12


def test_secular_matrix_singular_at_dirichlet_levels():
    bc = boundary.dirichlet()
    k = 3 * np.pi / 2  # L = 1, j = 3
    assert abs(np.linalg.det(bc.secular_matrix(k, 1.0))) < 1e-12
    assert abs(np.linalg.det(bc.secular_matrix(k + 0.2, 1.0))) > 1e-2


def test_rejects_non_self_adjoint():
    with pytest.raises(ConfigError):
        boundary.BoundaryCondition(np.eye(2), 1j * np.eye(2))


def test_rejects_rank_deficient():
    with pytest.raises(ConfigError):
        boundary.BoundaryCondition(np.zeros((2, 2)), np.zeros((2, 2)))


def test_unknown_preset():
    with pytest.raises(ConfigError):
        boundary.from_name("mixed")


def test_robin_limits():
    assert np.allclose(boundary.robin(0.0).u_matrix(2.0), np.eye(2))
    assert np.allclose(boundary.robin(np.pi / 2).u_matrix(2.0), -np.eye(2), atol=1e-12)
