import math

import numpy as np
import pytest

from fermibox import boundary, boxspec, jost, potentials
from fermibox.exceptions import InsufficientSpectrum, NuOnEigenvalue
from oracles import fd_eigenvalues

PRESETS = [boundary.dirichlet, boundary.neumann, boundary.periodic]


def test_free_dirichlet_exact():
    ev = boxspec.free_spectrum(boundary.dirichlet(), 1.0, (50 * math.pi / 2) ** 2 + 1).eigenvalues[:50]
    ref = (np.arange(1, 51) * math.pi / 2) ** 2
    assert np.max(np.abs(ev - ref) / ref) < 1e-10


def test_free_neumann_exact():
    ev = boxspec.free_spectrum(boundary.neumann(), 1.0, (49 * math.pi / 2) ** 2 + 1).eigenvalues[:50]
    ref = (np.arange(0, 50) * math.pi / 2) ** 2
    assert abs(ev[0]) < 1e-12
    assert np.max(np.abs(ev[1:] - ref[1:]) / ref[1:]) < 1e-10


def test_free_periodic_exact():
    spec = boxspec.free_spectrum(boundary.periodic(), 1.0, (10 * math.pi) ** 2 + 1)
    assert abs(spec.values[0]) < 1e-12 and spec.multiplicities[0] == 1
    ref = (np.arange(1, 11) * math.pi) ** 2
    assert np.max(np.abs(np.array(spec.values[1:11]) - ref) / ref) < 1e-10
    assert all(m == 2 for m in spec.multiplicities[1:11])


def test_free_robin_negative_state():
    # cos a phi = -sin a d_n phi with a < 0 binds at the walls; kappa solves
    # the even/odd conditions with kappa ~ -cot a for a long box
    bc = boundary.robin(-0.5)
    spec = boxspec.free_spectrum(bc, 8.0, 1.0)
    kappa = 1 / math.tan(0.5)
    neg = [v for v in spec.eigenvalues if v < 0]
    assert len(neg) == 2
    assert np.allclose(neg, -kappa ** 2, rtol=1e-6)


@pytest.mark.parametrize("bc_factory", PRESETS + [lambda: boundary.robin(0.3, -0.7)])
def test_zero_potential_matches_free(bc_factory):
    bc = bc_factory()
    free = boxspec.free_spectrum(bc, 3.0, 30.0)
    pert = boxspec.perturbed_spectrum(potentials.zero_potential(), bc, 3.0, 30.0)
    assert free.eigenvalues.size == pert.eigenvalues.size
    assert np.max(np.abs(free.eigenvalues - pert.eigenvalues)) < 1e-9


@pytest.mark.parametrize("bc_factory", PRESETS)
@pytest.mark.parametrize("L", [10.0, 25.0, 40.0])
def test_weyl_counting(bc_factory, L):
    nu = 3.0
    count = boxspec.free_spectrum(bc_factory(), L, nu + 0.5).count_below(nu)
    assert abs(count - 2 * L * math.sqrt(nu) / math.pi) <= 2


def test_finite_difference_oracle(well, dirichlet):
    L = 10.0
    pert = boxspec.perturbed_spectrum(well, dirichlet, L, 2.0)
    ev = pert.eigenvalues
    ref = fd_eigenvalues(well, L, int(round(2 * L / 1e-3)), ev.size)
    assert np.max(np.abs(ev - ref)) < 5e-6


def test_finite_difference_smooth_potential(dirichlet):
    g = potentials.gaussian(-3.0, 0.8)
    pert = boxspec.perturbed_spectrum(g, dirichlet, 8.0, 3.0)
    ev = pert.eigenvalues
    ref = fd_eigenvalues(g, 8.0, 16000, ev.size)
    assert np.max(np.abs(ev - ref) / np.maximum(1.0, np.abs(ref))) < 1e-5


def test_large_box_ground_state(well, dirichlet):
    energy = jost.bound_states(well).energies[0]
    ground = boxspec.perturbed_spectrum(well, dirichlet, 30.0, 0.5).values[0]
    assert abs(ground - energy) < 1e-10


def test_interlacing_for_repulsive(barrier):
    for bc in (boundary.dirichlet(), boundary.periodic()):
        free = boxspec.free_spectrum(bc, 6.0, 25.0).eigenvalues
        pert = boxspec.perturbed_spectrum(barrier, bc, 6.0, 25.0).eigenvalues
        n = pert.size
        assert np.all(pert[:n] >= free[:n] - 1e-12)


@pytest.mark.parametrize("bc_factory", PRESETS + [lambda: boundary.robin(-0.6)])
def test_lower_bound(bc_factory, well):
    bc = bc_factory()
    bound = boxspec.free_lower_bound(bc, 4.0) - well.sup_norm()
    ev = boxspec.perturbed_spectrum(well, bc, 4.0, 5.0).eigenvalues
    assert ev.min() >= bound


def test_periodic_degeneracy_split_by_asymmetric_potential():
    bump = potentials.gaussian(1.0, 0.3, 0.7)
    spec = boxspec.perturbed_spectrum(bump, boundary.periodic(), 3.0, 20.0)
    sym = potentials.square_well(0.5, -0.5, 0.5)
    sym_spec = boxspec.perturbed_spectrum(sym, boundary.periodic(), 3.0, 20.0)
    # translation invariance is broken either way, so pairs split
    assert all(m == 1 for m in spec.multiplicities)
    assert sum(sym_spec.multiplicities) == sym_spec.eigenvalues.size


def test_energy_zero_potential(dirichlet):
    d = boxspec.energy_difference(potentials.zero_potential(), dirichlet, 10.3, 2.0)
    assert d.E_L == 0.0 and d.xi_L == 0


def test_xi_L_integer(well, dirichlet):
    d = boxspec.energy_difference(well, dirichlet, 20.3, 2.0)
    assert isinstance(d.xi_L, int)
    assert d.xi_L == d.N - d.M


def test_nu_on_eigenvalue(dirichlet, well):
    L = 10 * math.pi / math.sqrt(2.0) / 2  # 2 L sqrt(nu) = 10 pi
    with pytest.raises(NuOnEigenvalue):
        boxspec.energy_difference(well, dirichlet, L, 2.0)
    d = boxspec.energy_difference(well, dirichlet, L, 2.0, strict=False)
    assert d.N == 10


def test_insufficient_spectrum(well, dirichlet):
    free = boxspec.free_spectrum(dirichlet, 5.0, 1.0)
    pert = boxspec.perturbed_spectrum(well, dirichlet, 5.0, 1.0)
    with pytest.raises(InsufficientSpectrum):
        boxspec.energy_from_spectra(free, pert, 2.0)


def test_canonical_approaches_fumi(well, dirichlet):
    from fermibox import ssf
    fumi = ssf.fumi(well, 2.0)
    errs = []
    for L in (25.0, 100.0, 400.0):
        d = boxspec.energy_difference(well, dirichlet, L, 2.0, strict=False)
        errs.append(abs(d.fumi_estimate(2.0) - fumi))
    assert errs[-1] < errs[0]
    assert errs[-1] < 2e-3


def test_microcanonical_identity(well, dirichlet):
    L = 50.0
    free = boxspec.free_spectrum(dirichlet, L, 3.0)
    pert = boxspec.perturbed_spectrum(well, dirichlet, L, 3.0)
    nu = 0.5 * (free.eigenvalues[19] + free.eigenvalues[20])
    d = boxspec.energy_from_spectra(free, pert, nu)
    assert d.N == 20
    direct = boxspec.microcanonical(well, dirichlet, L, 20, free, pert)
    assert abs(boxspec.microcanonical_identity(d, pert, nu) - direct) < 1e-9


def test_dirichlet_first_order_bound(dirichlet):
    bump = potentials.gaussian(1.0, 0.5)
    for n in (5, 20):
        exact = boxspec.microcanonical(bump, dirichlet, 10.0, n)
        assert exact <= boxspec.dirichlet_first_order(bump, 10.0, n) + 1e-12


def test_dirichlet_first_order_zero(dirichlet):
    assert boxspec.microcanonical(potentials.zero_potential(), dirichlet, 10.0, 8) == 0.0


def test_halfline_matches_shifted_box():
    L = 12.0
    v = potentials.square_well(-2.0, 0.0, 1.0)
    half = boxspec.halfline_spectrum(v, (1.0, 0.0), (1.0, 0.0), L, 4.0)
    shifted = potentials.square_well(-2.0, -L / 2, -L / 2 + 1.0)
    whole = boxspec.perturbed_spectrum(shifted, boundary.dirichlet(), L / 2, 4.0)
    assert np.max(np.abs(half.eigenvalues - whole.eigenvalues)) < 1e-9


def test_halfline_free_neumann_dirichlet():
    # phi'(0) = 0, phi(L) = 0: k = (j + 1/2) pi / L
    L = 5.0
    spec = boxspec.halfline_spectrum(potentials.zero_potential(), (0.0, 1.0), (1.0, 0.0), L, 10.0)
    ref = ((np.arange(spec.eigenvalues.size) + 0.5) * math.pi / L) ** 2
    assert np.max(np.abs(spec.eigenvalues - ref)) < 1e-10


def test_rows_numbering(dirichlet):
    rows = boxspec.free_spectrum(dirichlet, 1.0, 30.0).rows()
    assert [r[0] for r in rows] == [1, 2, 3]
