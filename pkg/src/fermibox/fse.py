"""Finite size energy: closed arccos^2 form, s-integral form, the arccosh
matrix identity behind their equality, and the half-line specialisation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import jost, ssf
from .boundary import SIGMA_X
from .exceptions import (EigenvalueOutOfRange, NotPositiveDefinite, SupportViolation)
from .potentials import identity_weight

CLAMP_FAIL = 1e-8
TAIL_TOL = 1e-14


def hermitian_part(m):
    """Re(M) = (M + M*) / 2."""
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


def _clamped_eigenvalues(h):
    w = np.linalg.eigvalsh(h)
    excess = np.max(np.abs(w)) - 1.0
    if excess > CLAMP_FAIL:
        raise EigenvalueOutOfRange(f"eigenvalue exceeds 1 by {excess:.2e}; unitarity lost upstream")
    return np.clip(w, -1.0, 1.0)


def arccos_squared_trace(h):
    """tr arccos^2(H) for a Hermitian H with spectrum in [-1, 1]."""
    return float(np.sum(np.arccos(_clamped_eigenvalues(h)) ** 2))


@dataclass(frozen=True)
class FseMatrices:
    """H_plus, H_zero and H_T = H_plus - H_zero at the Fermi energy."""

    H_plus: np.ndarray
    H_zero: np.ndarray

    @property
    def H_T(self):
        return self.H_plus - self.H_zero


def fse_matrices(potential, bc, nu, phi, data=None):
    """H_+ = Re(e^{i phi} sigma_x U* S), H_0 = Re(e^{i phi} sigma_x U*) at z = nu."""
    k = math.sqrt(nu)
    data = data or jost.scattering(potential, k)
    u_adj = bc.u_matrix(nu).conj().T
    base = np.exp(1j * phi) * SIGMA_X @ u_adj
    return FseMatrices(hermitian_part(base @ data.S), hermitian_part(base))


def _prefactor(nu, f):
    return math.sqrt(nu) * float(np.real(f.derivative(nu)))


def fse_closed(potential, bc, nu, phi, f=None, data=None):
    """(sqrt(nu)/4pi) f'(nu) tr[arccos^2(H_+) - arccos^2(H_0)]."""
    f = f or identity_weight()
    mats = fse_matrices(potential, bc, nu, phi, data)
    diff = arccos_squared_trace(mats.H_plus) - arccos_squared_trace(mats.H_zero)
    return _prefactor(nu, f) / (4 * math.pi) * diff


def _log_shifted(s, h):
    """ln(cosh s + h), accurate near h = -1 and small s."""
    return np.log(2.0 * np.sinh(0.5 * s) ** 2 + (1.0 + h))


def _tail_length(scale):
    return max(20.0, math.log(max(scale, 1e-300) / TAIL_TOL))


def fse_integral(potential, bc, nu, phi, f=None, data=None):
    """-(sqrt(nu)/2pi) f'(nu) times the s-integral of ln det[I + (cosh s + H_0)^{-1} H_T].

    The log-determinant is evaluated as ln det(cosh s + H_+) - ln det(cosh s + H_0)
    on eigenvalues, so an eigenvalue -1 of H_0 becomes an integrable
    logarithmic endpoint singularity instead of a singular matrix.
    """
    f = f or identity_weight()
    mats = fse_matrices(potential, bc, nu, phi, data)
    hp = _clamped_eigenvalues(mats.H_plus)
    h0 = _clamped_eigenvalues(mats.H_zero)
    if np.max(np.abs(mats.H_T)) == 0:
        return 0.0
    integrand = lambda s: float(np.sum(_log_shifted(s, hp)) - np.sum(_log_shifted(s, h0)))
    T = _tail_length(np.max(np.abs(mats.H_T)))
    val, _ = integrate.quad(integrand, 0.0, T, limit=400, epsabs=1e-13, epsrel=1e-12)
    return -_prefactor(nu, f) / (2 * math.pi) * val


# -- the arccosh identity -------------------------------------------------

def _arccosh_squared(x):
    """arcosh(x)^2 on (-1, inf), continued by arcosh(x) = i arccos(x) on [-1, 1]."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    big = x > 1
    out[big] = np.arccosh(x[big]) ** 2
    out[~big] = -np.arccos(np.clip(x[~big], -1, 1)) ** 2
    return out


def _check_positive(h, name):
    w = np.linalg.eigvalsh(h)
    if w.min() <= 0:
        raise NotPositiveDefinite(f"{name} must be positive definite (min eigenvalue {w.min():.3g})")


def arccosh_closed_form(H1, H2):
    """(1/2) tr[arcosh^2(H1 + H2 - I) - arcosh^2(H1 - I)]."""
    H1 = np.atleast_2d(np.asarray(H1, dtype=complex))
    H2 = np.atleast_2d(np.asarray(H2, dtype=complex))
    _check_positive(H1, "H1")
    _check_positive(H1 + H2, "H1 + H2")
    eye = np.eye(H1.shape[0])
    a = _arccosh_squared(np.linalg.eigvalsh(H1 + H2 - eye))
    b = _arccosh_squared(np.linalg.eigvalsh(H1 - eye))
    return 0.5 * float(np.sum(a) - np.sum(b))


def arccosh_quadrature(H1, H2):
    """Integral over t >= 0 of ln det(I + ((cosh t - 1) I + H1)^{-1} H2)."""
    H1 = np.atleast_2d(np.asarray(H1, dtype=complex))
    H2 = np.atleast_2d(np.asarray(H2, dtype=complex))
    _check_positive(H1, "H1")
    _check_positive(H1 + H2, "H1 + H2")
    eye = np.eye(H1.shape[0])
    if np.max(np.abs(H2)) == 0:
        return 0.0

    def integrand(t):
        c = 2.0 * math.sinh(0.5 * t) ** 2   # cosh t - 1
        sign, logdet = np.linalg.slogdet(eye + np.linalg.solve(c * eye + H1, H2))
        return float(logdet)

    # the integrand decays like 2 tr(H2) e^{-t}; stop when that is negligible
    T = _tail_length(np.sum(np.abs(H2)))
    val, _ = integrate.quad(integrand, 0.0, T, limit=400, epsabs=1e-13, epsrel=1e-12)
    return val


# -- half-line ------------------------------------------------------------

@dataclass(frozen=True)
class HalfLineBC:
    """a phi(0) = b phi'(0) at the origin and A phi(L) + B phi'(L) = 0 at the end."""

    a: complex = 1.0
    b: complex = 0.0
    A: complex = 1.0
    B: complex = 0.0
    name: str = "custom"

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if abs(a * np.conj(b) - b * np.conj(a)) > 1e-12:
            raise ValueError("origin condition needs a conj(b) = b conj(a)")
        norm = math.hypot(abs(a), abs(b))
        if norm == 0:
            raise ValueError("origin condition needs (a, b) != 0")
        object.__setattr__(self, "a", a / norm)
        object.__setattr__(self, "b", b / norm)
        A, B = complex(self.A), complex(self.B)
        if abs(A * np.conj(B) - B * np.conj(A)) > 1e-12 or (A == 0 and B == 0):
            raise ValueError("end condition needs A conj(B) real and (A, B) != 0")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def origin_phase(self, k):
        """c(k) = (ia + kb) / (ia - kb)."""
        return (1j * self.a + k * self.b) / (1j * self.a - k * self.b)

    def end_phase(self, k):
        """(iA + kB) / (iA - kB)."""
        return (1j * self.A + k * self.B) / (1j * self.A - k * self.B)


def halfline_dirichlet():
    return HalfLineBC(1.0, 0.0, 1.0, 0.0, "dirichlet")


def _check_halfline_support(potential):
    if potential.support[0] < -1e-14 and not potential.is_zero:
        raise SupportViolation("half-line potentials must vanish on x < 0")


def halfline_jost_function(potential, hbc, ks):
    """F(k) = a psi(k;0) - b psi'(k;0), divided by its free value a - ikb."""
    _check_halfline_support(potential)
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    psi, dpsi = jost.jost_boundary_values(potential, ks, 0.0)
    return (hbc.a * psi - hbc.b * dpsi) / (hbc.a - 1j * ks * hbc.b)


def halfline_scattering(potential, hbc, k):
    """S(k) = c (a psi(-k;0) - b psi'(-k;0)) / (a psi(k;0) - b psi'(k;0)) for real k > 0."""
    _check_halfline_support(potential)
    k = float(k)
    psi, dpsi = _both_signs(potential, k)
    num = hbc.a * psi[1] - hbc.b * dpsi[1]
    den = hbc.a * psi[0] - hbc.b * dpsi[0]
    return complex(hbc.origin_phase(k) * num / den)


def _both_signs(potential, k):
    """psi(+-k; 0) and derivatives; psi(-k) is the conjugate for real k."""
    psi, dpsi = jost.jost_boundary_values(potential, np.array([k]), 0.0)
    return np.array([psi[0], np.conj(psi[0])]), np.array([dpsi[0], np.conj(dpsi[0])])


def halfline_w(hbc, nu, eta):
    """W(nu) = -e^{-2 i pi eta} c(k) (iA + kB) / (iA - kB), k = sqrt(nu)."""
    k = math.sqrt(nu)
    return complex(-np.exp(-2j * math.pi * eta) * hbc.origin_phase(k) * hbc.end_phase(k))


def _scalar_arccos_sq(x):
    """arccos^2 of Re(x) for a unimodular scalar x."""
    if abs(abs(x) - 1.0) > CLAMP_FAIL:
        raise EigenvalueOutOfRange(f"|{x}| differs from 1; unitarity lost upstream")
    return math.acos(min(1.0, max(-1.0, x.real))) ** 2


def halfline_fse(potential, hbc, nu, eta, f=None):
    """(sqrt(nu)/4pi) f'(nu) [arccos^2(Re(W* S)) - arccos^2(Re W)]."""
    f = f or identity_weight()
    if potential.is_zero:
        return 0.0
    S = halfline_scattering(potential, hbc, math.sqrt(nu))
    W = halfline_w(hbc, nu, eta)
    diff = _scalar_arccos_sq(np.conj(W) * S) - _scalar_arccos_sq(W + 0j)
    return _prefactor(nu, f) / (4 * math.pi) * diff


def xi_quadratic_coefficient(xi_nu, eta, theta=0.0):
    """xi^2 + (1 - 2 eta + 2 theta) xi."""
    return xi_nu ** 2 + (1 - 2 * eta + 2 * theta) * xi_nu


def fse_from_xi(xi_nu, nu, eta, theta=0.0, f=None):
    """pi sqrt(nu) f'(nu) times xi_quadratic_coefficient, on the scale of halfline_fse."""
    f = f or identity_weight()
    return math.pi * _prefactor(nu, f) * xi_quadratic_coefficient(xi_nu, eta, theta)


def halfline_bound_states(potential, hbc, n_grid=2000):
    """beta > 0 with a psi(i beta;0) = b psi'(i beta;0)."""
    _check_halfline_support(potential)
    if potential.is_zero and abs(hbc.b) == 0:
        return jost.BoundStateList(())
    vmin = 0.0 if potential.is_zero else float(np.min(potential.eval(
        np.linspace(*potential.support, 4001))))
    robin = abs(hbc.a / hbc.b) if abs(hbc.b) > 1e-14 else 0.0
    beta_max = math.sqrt(max(-vmin, 0.0)) + robin + 1.0
    betas = np.linspace(beta_max / n_grid, beta_max, n_grid)

    def F(beta):
        ks = 1j * np.atleast_1d(beta)
        psi, dpsi = jost.jost_boundary_values(potential, ks, 0.0)
        return np.real(hbc.a * psi - hbc.b * dpsi)

    vals = F(betas)
    sgn = np.signbit(vals)
    roots = [optimize.brentq(lambda x: float(F(x)[0]), betas[i], betas[i + 1], xtol=1e-14)
             for i in np.where(sgn[1:] != sgn[:-1])[0]]
    return jost.BoundStateList(tuple(sorted(roots, reverse=True)))


def halfline_spectral_shift(potential, hbc, energies=()):
    """xi(k^2) = arg F(k) / pi continued from the anchor, plus the bound states."""
    _check_halfline_support(potential)
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    bstates = halfline_bound_states(potential, hbc)
    anchor = ssf.anchor_energy(potential)
    pos = energies[energies > 0]
    if pos.size and pos.max() > anchor:
        anchor = float(pos.max())
    requested = np.sqrt(pos)
    path, phase = ssf.unwrapped_phase_path(
        lambda ks: halfline_jost_function(potential, hbc, ks), math.sqrt(anchor), requested,
        ssf._phase_step(potential), k_switch=ssf.switch_wavenumber(potential))
    return ssf.SpectralShift(potential, bstates, path, phase / math.pi, anchor)


def halfline_xi(potential, hbc, nu):
    shift = halfline_spectral_shift(potential, hbc, [nu])
    return float(shift.positive([nu])[0])


def halfline_fumi(potential, hbc, nu, f=None):
    """Fumi term of the half-line problem."""
    ks, _ = ssf._k_nodes(nu)
    ks2, _ = ssf._k_nodes(nu, 2 * ssf.GL_PANELS)
    shift = halfline_spectral_shift(potential, hbc, np.concatenate([ks, ks2, [math.sqrt(nu)]]) ** 2)
    return ssf.fumi_terms(potential, nu, f, shift).value


def halfline_lengths(nu, eta, ns):
    """L_n with L sqrt(nu) = pi (n + eta)."""
    return [math.pi * (n + eta) / math.sqrt(nu) for n in ns]


def whole_line_lengths(nu, eta, ns):
    """L_n = (pi eta / 2 + pi n) / sqrt(nu), so that e^{2 i L sqrt(nu)} = e^{i pi eta}."""
    return [(math.pi * eta / 2 + math.pi * n) / math.sqrt(nu) for n in ns]


def richardson(lengths, scaled):
    """Extrapolate R(L) = c + a/L to L -> infinity from the last two samples."""
    if len(scaled) < 2:
        return float(scaled[-1])
    l1, l2 = lengths[-2], lengths[-1]
    return float((l2 * scaled[-1] - l1 * scaled[-2]) / (l2 - l1))
