"""Spectral shift function and the Fumi term.

On the positive axis xi(k^2) = arg(1/t(k)) / pi, the phase of the Jost
function followed continuously down from a high-energy anchor where the
principal branch is taken.  On the negative axis xi is minus the number
of bound states at or below the energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import detkit, jost
from .exceptions import BranchAnchorTooLow, JumpPoint, ZeroEnergyUnsupported
from .potentials import identity_weight

CHUNK = 256
GL_PANELS = 8
GL_ORDER = 24
GEOMETRIC_RATIO = 0.02


def anchor_energy(potential):
    """lambda_max = 100 max(1, ||V||_1^2)."""
    return 100.0 * max(1.0, potential.l1_norm() ** 2)


def _phase_step(potential):
    return min(0.05, 0.25 / (potential.support[1] - potential.support[0] + 1.0))


def _jost_function(potential, ks):
    """1/t on an array of real k, marched in chunks so each chunk gets its own step."""
    ks = np.asarray(ks, dtype=float)
    out = np.empty(ks.size, dtype=complex)
    order = np.argsort(ks)
    for start in range(0, ks.size, CHUNK):
        idx = order[start:start + CHUNK]
        out[idx] = jost.inverse_transmission(potential, ks[idx])
    return out


@dataclass(frozen=True)
class SpectralShift:
    """xi on a descending k-path together with the bound states.

    k_path runs from the anchor down to the smallest requested k; xi_path
    holds the unwrapped values there.
    """

    potential: object
    bound_states: jost.BoundStateList
    k_path: np.ndarray
    xi_path: np.ndarray
    anchor: float

    def xi_at_anchor(self):
        return float(self.xi_path[0])

    def positive(self, lam):
        """xi at energies lam > 0 that lie on the stored path."""
        ks = np.sqrt(np.asarray(lam, dtype=float))
        pos = np.searchsorted(-self.k_path, -ks)
        pos = np.clip(pos, 0, self.k_path.size - 1)
        if not np.allclose(self.k_path[pos], ks, rtol=0, atol=1e-14 * max(1.0, ks.max())):
            raise ValueError("energy not on the computed path; rebuild with it included")
        return self.xi_path[pos]

    def negative(self, lam):
        energies = np.asarray(self.bound_states.energies, dtype=float)
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if energies.size and np.any(np.isclose(lam[:, None], energies[None, :], rtol=1e-12, atol=0)):
            raise JumpPoint("energy coincides with a bound state")
        return -np.sum(energies[None, :] <= lam[:, None], axis=1).astype(float)

    def __call__(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if np.any(lam == 0):
            raise ZeroEnergyUnsupported("xi is not evaluated at the threshold")
        out = np.empty(lam.size)
        neg = lam < 0
        if np.any(neg):
            out[neg] = self.negative(lam[neg])
        if np.any(~neg):
            out[~neg] = self.positive(lam[~neg])
        return out


def switch_wavenumber(potential):
    """Above this k reflection is weak and arg(1/t) varies like int V / 2k."""
    return max(1.0, 2.0 * math.sqrt(potential.sup_norm()), potential.l1_norm())


def unwrapped_phase_path(jost_function, k_top, requested, step, max_refine=6, k_switch=None,
                         ratio=GEOMETRIC_RATIO):
    """Continuous arg of a Jost-type function on a descending k-path.

    The path starts at k_top, where the principal branch is taken, and
    passes through every requested k.  It is uniform with the given step
    below k_switch and geometric above.  Both spacings are halved until
    adjacent increments stay below pi/2.  Returns (path, phase).
    """
    requested = np.asarray(requested, dtype=float)
    k_low = requested.min() if requested.size else k_top
    k_switch = k_top if k_switch is None else min(max(k_switch, k_low), k_top)
    for _ in range(max_refine):
        n = max(2, int(math.ceil((k_switch - k_low) / step)) + 1)
        m = max(2, int(math.ceil(math.log(k_top / k_switch) / math.log1p(ratio))) + 1)
        grid = np.concatenate([np.linspace(k_low, k_switch, n), np.geomspace(k_switch, k_top, m)])
        path = np.unique(np.concatenate([grid, requested]))[::-1]
        values = jost_function(path)
        incr = np.angle(values[1:] / values[:-1])
        if np.max(np.abs(incr), initial=0.0) < 0.5 * math.pi:
            return path, np.angle(values[0]) + np.concatenate([[0.0], np.cumsum(incr)])
        step *= 0.5
        ratio *= 0.5
    raise BranchAnchorTooLow("phase increments stay above pi/2 after refinement")


def spectral_shift(potential, energies=(), max_refine=6):
    """Build the spectral shift function on a path through the given energies."""
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    bstates = jost.bound_states(potential) if not potential.is_zero else jost.BoundStateList(())
    anchor = anchor_energy(potential)
    pos = energies[energies > 0]
    if np.any(pos > anchor):
        anchor = float(pos.max())
    k_top = math.sqrt(anchor)
    requested = np.sqrt(pos)
    if potential.is_zero:
        path = np.unique(np.concatenate([[k_top], requested]))[::-1]
        return SpectralShift(potential, bstates, path, np.zeros(path.size), anchor)
    path, phase = unwrapped_phase_path(lambda ks: _jost_function(potential, ks), k_top,
                                       requested, _phase_step(potential), max_refine,
                                       switch_wavenumber(potential))
    return SpectralShift(potential, bstates, path, phase / math.pi, anchor)


def xi(potential, lam):
    """Spectral shift function at a single energy lam != 0."""
    lam = float(lam)
    if lam == 0:
        raise ZeroEnergyUnsupported("xi is not evaluated at the threshold")
    if lam < 0:
        bstates = jost.bound_states(potential) if not potential.is_zero else jost.BoundStateList(())
        return float(SpectralShift(potential, bstates, np.zeros(0), np.zeros(0), 0.0).negative(lam)[0])
    return float(spectral_shift(potential, [lam])(lam)[0])


def threshold_diagnostic(potential, lam=1e-10):
    """(xi(0+), bound state count) for comparison with the zero-energy limit.

    Generically xi(0+) = 1/2 - N; a zero-energy resonance gives -N instead.
    Nothing here is enforced, the branch is fixed at the anchor.
    """
    shift = spectral_shift(potential, [lam])
    return float(shift(lam)[0]), len(shift.bound_states)


def birman_krein_defect(potential, lams):
    """max |exp(-2 pi i xi) - det S| over positive energies lams."""
    lams = np.asarray(lams, dtype=float)
    shift = spectral_shift(potential, lams)
    values = shift(lams)
    data = jost.scattering_many(potential, np.sqrt(lams))
    det_s = np.array([d.det_S() for d in data])
    return float(np.max(np.abs(np.exp(-2j * math.pi * values) - det_s)))


def _k_nodes(nu, panels=GL_PANELS, order=GL_ORDER):
    """Composite Gauss-Legendre nodes on [0, sqrt(nu)] in k."""
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, math.sqrt(nu), panels + 1)
    ks = np.concatenate([0.5 * (b - a) * t + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    ws = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    return ks, ws


@dataclass(frozen=True)
class FumiResult:
    value: float
    bound_part: float
    continuum_part: float
    error_estimate: float


def fumi_terms(potential, nu, f=None, shift=None):
    """Fumi term split into the bound-state steps and the continuum integral."""
    f = f or identity_weight()
    nu = float(nu)
    if nu <= 0:
        raise ValueError("nu must be positive")
    if potential.is_zero:
        return FumiResult(0.0, 0.0, 0.0, 0.0)
    ks, ws = _k_nodes(nu)
    ks2, ws2 = _k_nodes(nu, 2 * GL_PANELS)
    if shift is None:
        shift = spectral_shift(potential, np.concatenate([ks, ks2, [math.sqrt(nu)]]) ** 2)
    energies = np.asarray(shift.bound_states.energies, dtype=float)
    bound = -float(np.sum(f.value(0.0) - f.value(energies))) if energies.size else 0.0

    def cont(k, w):
        vals = shift.positive(k ** 2)
        return float(np.real(np.sum(w * f.derivative(k ** 2) * vals * 2 * k)))

    coarse, fine = cont(ks, ws), cont(ks2, ws2)
    return FumiResult(bound + fine, bound, fine, abs(fine - coarse))


def fumi(potential, nu, f=None):
    """Integral of f'(lam) xi(lam) over (-inf, nu]."""
    return fumi_terms(potential, nu, f).value


def fumi_step_form(potential, nu, f=None, shift=None):
    """Fumi term with the bound-state steps measured from nu.

    -sum_j [f(nu) - f(-beta_j^2)] plus the integral of f' (xi + n_bound)
    over (0, nu]; algebraically equal to fumi().
    """
    f = f or identity_weight()
    if potential.is_zero:
        return 0.0
    ks, ws = _k_nodes(nu, 2 * GL_PANELS)
    shift = shift or spectral_shift(potential, np.concatenate([ks, [math.sqrt(nu)]]) ** 2)
    energies = np.asarray(shift.bound_states.energies, dtype=float)
    steps = -float(np.sum(f.value(nu) - f.value(energies))) if energies.size else 0.0
    shifted = shift.positive(ks ** 2) + energies.size
    return steps + float(np.real(np.sum(ws * f.derivative(ks ** 2) * shifted * 2 * ks)))


def fumi_contour(potential, nu, b=None, f=None, n_per_panel=64, n_nodes=detkit.DEFAULT_NODES):
    """-(1/2 pi i) times the contour integral of f'(z) ln det(I - K(z)).

    The contour is the closed pair of parabolas through nu and -b^2; it
    needs 2b > ||V||_1 so that every bound state lies inside.
    """
    f = f or identity_weight()
    if potential.is_zero:
        return 0.0
    norm = potential.l1_norm()
    b = norm if b is None else float(b)
    if 2 * b <= norm:
        raise ValueError(f"b = {b} is too small; need 2b > ||V||_1 = {norm}")
    samples = detkit.logdet_along_contour(potential, nu, b, n_per_panel, n_nodes)
    total = np.sum(samples.dz * f.derivative(samples.z) * samples.logdet)
    return float(np.real(-total / (2j * math.pi)))
