import math

import numpy as np
import pytest

from fermibox import boundary, boxspec, detkit, jost, potentials
from fermibox.exceptions import SpectralCollision

K_FERMI = math.sqrt(2.0)


def test_zero_potential_determinant_is_one():
    assert detkit.perturbation_determinant(potentials.zero_potential(), 2.0 + 1j) == 1.0


def test_quadrature_integrates_polynomials(well):
    nodes, weights = detkit.quadrature(well, 40)
    assert weights.sum() == pytest.approx(2.0, rel=1e-14)
    assert np.dot(weights, nodes ** 6) == pytest.approx(2.0 / 7.0, rel=1e-13)


def test_free_green_solves_the_equation():
    # R = (z - H0)^{-1}: R'' + k^2 R = delta, so R' jumps by +1 at x = y
    k = 1.3 + 0.2j
    h = 1e-4
    r = detkit.free_green(k, np.array([0.5 - h, 0.5, 0.5 + h]), np.array([0.0]))[:, 0]
    assert abs((r[0] - 2 * r[1] + r[2]) / h ** 2 + k * k * r[1]) < 1e-5
    g = detkit.free_green(k, np.array([-h, 0.0, h]), np.array([0.0]))[:, 0]
    assert abs((g[2] - g[1]) / h - (g[1] - g[0]) / h - 1.0) < 1e-3


def test_jost_pais_at_fermi_wavenumber(well):
    _, _, defect = detkit.jost_pais_check(well, K_FERMI, n_nodes=800)
    assert defect < 1e-6


def test_self_convergence_is_monotone(well):
    ref = complex(jost.inverse_transmission(well, [K_FERMI])[0])
    errs = [abs(detkit.perturbation_determinant(well, 2.0, 1, n) - ref) for n in (100, 200, 400, 800)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_kink_correction_beats_plain_rule(well):
    ref = complex(jost.inverse_transmission(well, [K_FERMI])[0])
    plain = detkit.perturbation_determinant(well, 2.0, 1, 200, kink_correction=False)
    fixed = detkit.perturbation_determinant(well, 2.0, 1, 200)
    assert abs(fixed - ref) < abs(plain - ref) / 10


def test_gaussian_jost_pais():
    g = potentials.gaussian(-1.0, 0.7)
    for k in (0.5, 2.0):
        _, _, defect = detkit.jost_pais_check(g, k, n_nodes=800)
        assert defect < 1e-7


def test_conjugation_symmetry(well):
    z = 2.0 + 0.5j
    a = detkit.perturbation_determinant(well, z)
    b = detkit.perturbation_determinant(well, np.conj(z))
    assert abs(np.conj(a) - b) < 1e-10


def test_zeros_at_bound_states(well):
    energy = jost.bound_states(well).energies[0]
    assert abs(detkit.perturbation_determinant(well, energy, n_nodes=400)) < 1e-6
    assert abs(detkit.perturbation_determinant(well, energy - 0.1, n_nodes=400)) > 1e-2


def test_factorization(well, dirichlet):
    _, _, defect = detkit.factorization_check(well, dirichlet, 2.0 + 0.5j, 5.0, 600)
    assert defect < 1e-6


def test_factorization_other_conditions(well):
    for bc in (boundary.neumann(), boundary.periodic(), boundary.robin(0.3)):
        _, _, defect = detkit.factorization_check(well, bc, 1.0 + 0.7j, 3.0, 400)
        assert defect < 1e-6


def test_box_determinant_vanishes_on_box_spectrum(well, dirichlet):
    lam = boxspec.perturbed_spectrum(well, dirichlet, 3.0, 4.0).values[2]
    small = abs(detkit.box_determinant(well, dirichlet, lam + 1e-9j, 3.0))
    big = abs(detkit.box_determinant(well, dirichlet, lam + 0.3, 3.0))
    assert small < 1e-6 * big


def test_box_green_matches_free_dirichlet_kernel(dirichlet):
    # Dirichlet kernel of (z - H)^{-1} on [-L, L] at z = -kappa^2
    L, kappa = 1.5, 0.8
    x, y = np.array([0.3]), np.array([-0.4])
    g = detkit.box_green(dirichlet, -kappa ** 2, L, x, y)[0, 0]
    lo, hi = min(x[0], y[0]), max(x[0], y[0])
    ref = -math.sinh(kappa * (lo + L)) * math.sinh(kappa * (L - hi)) / (kappa * math.sinh(2 * kappa * L))
    assert abs(g - ref) < 1e-12


def test_support_outside_box_rejected(well, dirichlet):
    with pytest.raises(ValueError):
        detkit.factorization_check(well, dirichlet, 1.0 + 1j, 0.5)


def test_collision_with_free_eigenvalue(dirichlet):
    lam = (math.pi / 2) ** 2
    with pytest.raises(SpectralCollision):
        detkit.rank2_correction(dirichlet, math.sqrt(lam), 1.0, np.zeros(1))


def test_contour_closes_through_nu():
    k, z, dz = detkit.contour_nodes(2.0, 3.0, 16)
    assert z.size == 64
    # a closed path: the integral of dz vanishes and of z dz too
    assert abs(dz.sum()) < 1e-12
    assert abs(np.dot(dz, z)) < 1e-10
    assert abs(z[0] - 2.0) < 0.1 and abs(z[-1] - 2.0) < 0.1
