"""Jost solutions, scattering amplitudes and bound states on the line.

Conventions: H = -d^2/dx^2 + V, energy z = k^2 with Im k >= 0.  The Jost
solutions are psi_+(k;x) = e^{ikx} m_+(k;x) ~ e^{ikx} as x -> +inf and
psi_-(k;x) = e^{-ikx} m_-(k;x) ~ e^{-ikx} as x -> -inf.  The reduced
functions solve the Volterra equations

    m_+(x) = 1 + int_x^inf    D_k(y - x) V(y) m_+(y) dy,
    m_-(x) = 1 + int_-inf^x   D_k(x - y) V(y) m_-(y) dy,
    D_k(s) = (exp(2iks) - 1) / (2ik).

They are solved by marching a trapezoidal discretisation from the
asymptotic end; because D_k(0) = 0 the implicit step closes explicitly.
One Richardson step on a doubled grid lifts the order from 2 to 4.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import interpolate, optimize

from ._validation import check_upper_half
from .exceptions import (NoConvergence, RootIsolationFailure, TruncationWarning,
                         ZeroEnergyUnsupported)

DEFAULT_MARGIN = 1.0
RESIDUAL_TOL = 1e-8


def _kernel_step(k, h):
    """D_k(h) computed without cancellation for small |k h|."""
    k = np.asarray(k, dtype=complex)
    out = np.empty_like(k)
    small = np.abs(k) * h < 1e-8
    out[small] = h + 1j * k[small] * h * h
    big = ~small
    out[big] = np.expm1(2j * k[big] * h) / (2j * k[big])
    return out


def default_step(potential, k=None):
    """Marching step with step * max|V| <= 0.01, also resolving the phase e^{2ikx}."""
    vmax = potential.sup_norm()
    step = 0.01 / vmax if vmax > 0 else 0.05
    step = min(step, 0.05)
    if k is not None:
        kmax = float(np.max(np.abs(np.atleast_1d(k))))
        if kmax > 0:
            step = min(step, 0.05 / kmax)
    return step


@dataclass(frozen=True)
class Grid:
    nodes: np.ndarray
    weights: np.ndarray  # trapezoid weight times the one-sided potential values


def build_grid(potential, step, margin=DEFAULT_MARGIN, refine=1):
    """Trapezoid nodes covering the support plus margins, aligned to breakpoints."""
    edges = potential.edges
    panels = np.concatenate([[edges[0] - margin], edges, [edges[-1] + margin]])
    pieces = []
    for a, b in zip(panels[:-1], panels[1:]):
        n = max(2, int(math.ceil((b - a) / step))) * refine
        pieces.append(np.linspace(a, b, n + 1))
    nodes = [pieces[0]]
    for p in pieces[1:]:
        nodes.append(p[1:])
    nodes = np.concatenate(nodes)
    h = np.diff(nodes)
    left_vals = potential.limit(nodes, -1)
    right_vals = potential.limit(nodes, 1)
    weights = np.zeros_like(nodes)
    weights[1:] += 0.5 * h * left_vals[1:]
    weights[:-1] += 0.5 * h * right_vals[:-1]
    return Grid(nodes, weights)


def _march(nodes, weights, k, store=True):
    """Backward march for m_+ on the given grid, vectorised over k.

    Returns (m, mprime, total0, total1) where total0 = sum w m and
    total1 = sum w e^{2ik(x - x0)} m (both over the whole grid).  With
    store=False only the leftmost values of m and m' are kept.
    """
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    n = nodes.size
    h = np.diff(nodes)
    rows = n if store else 1
    m = np.empty((rows, k.size), dtype=complex)
    mp = np.empty_like(m)
    m[-1] = 1.0
    mp[-1] = 0.0
    m_next = m[-1].copy()
    R = np.zeros(k.size, dtype=complex)   # sum_{l>i} w_l D(x_l - x_i) m_l
    Q = np.zeros(k.size, dtype=complex)   # sum_{l>i} w_l m_l
    P = np.zeros(k.size, dtype=complex)   # sum_{l>i} w_l e^{2ik(x_l - x_i)} m_l
    steps = {}
    for i in range(n - 2, -1, -1):
        hi = h[i]
        if hi not in steps:
            steps[hi] = (_kernel_step(k, hi), np.exp(2j * k * hi))
        dk, ek = steps[hi]
        wm = weights[i + 1] * m_next
        Q = Q + wm
        R = dk * Q + ek * R
        P = ek * (P + wm)
        m_next = 1.0 + R
        if store:
            m[i] = m_next
            mp[i] = -P
    if not store:
        m[0], mp[0] = m_next, -P
    total0 = Q + weights[0] * m_next
    total1 = P + weights[0] * m_next
    return m, mp, total0, total1


def _march_richardson(potential, k, step, margin, store=True):
    coarse = build_grid(potential, step, margin, refine=1)
    fine = build_grid(potential, step, margin, refine=2)
    mc, mpc, t0c, t1c = _march(coarse.nodes, coarse.weights, k, store)
    mf, mpf, t0f, t1f = _march(fine.nodes, fine.weights, k, store)
    ex = lambda f, c: f + (f - c) / 3.0
    sub = slice(None, None, 2) if store else slice(None)
    return (coarse.nodes, ex(mf[sub], mc), ex(mpf[sub], mpc),
            ex(t0f, t0c), ex(t1f, t1c), np.max(np.abs(mf[sub] - mc)))


@dataclass(frozen=True)
class JostSolution:
    """Reduced Jost solution m_side(k; x) sampled on a grid."""

    k: complex
    side: int
    grid: np.ndarray
    m_values: np.ndarray
    m_derivative: np.ndarray
    residual: float

    def psi(self):
        """psi_side(k; x) = exp(side * i k x) m(x) on the grid."""
        return np.exp(self.side * 1j * self.k * self.grid) * self.m_values

    def psi_derivative(self):
        phase = np.exp(self.side * 1j * self.k * self.grid)
        return phase * (self.side * 1j * self.k * self.m_values + self.m_derivative)


def _ls_residual(potential, nodes, m, k, side):
    """Defect of m in its Volterra equation, integrated by cubic splines.

    Uses an independent quadrature (piecewise cubic antiderivatives) on the
    grid panels rather than the trapezoid sums used by the marching.
    """
    if side < 0:
        nodes, m = -nodes[::-1], m[::-1]
        potential = potential.reflected()
    edges = np.concatenate([[nodes[0]], potential.edges, [nodes[-1]]])
    x_ref = nodes[-1]
    phase = np.exp(2j * k * (nodes - x_ref))
    g0 = np.zeros(nodes.size, dtype=complex)
    g1 = np.zeros(nodes.size, dtype=complex)
    # cumulative integrals from each node to the right end, panel by panel
    tail0, tail1 = 0.0 + 0.0j, 0.0 + 0.0j
    for a, b in reversed(list(zip(edges[:-1], edges[1:]))):
        sel = np.where((nodes >= a - 1e-14) & (nodes <= b + 1e-14))[0]
        if sel.size < 2:
            continue
        x = nodes[sel]
        v = _panel_values(potential, x)
        f0 = v * m[sel]
        f1 = f0 * phase[sel]
        for f, store, which in ((f0, g0, 0), (f1, g1, 1)):
            spl = interpolate.CubicSpline(x, f)
            anti = spl.antiderivative()
            cum = anti(x[-1]) - anti(x)
            cum = cum + (tail0 if which == 0 else tail1)
            store[sel] = cum
        tail0, tail1 = g0[sel[0]], g1[sel[0]]
    with np.errstate(invalid="ignore", divide="ignore"):
        if k == 0:
            x1 = _cumulative_moment(potential, nodes, m, edges)
            rhs = 1.0 + x1 - nodes * g0
        else:
            rhs = 1.0 + (g1 / phase - g0) / (2j * k)
    return float(np.max(np.abs(m - rhs)))


def _panel_values(potential, x):
    """V on a panel's nodes, using inward one-sided limits at the two ends."""
    v = potential.eval(x)
    v[0] = potential.limit(x[0], 1)
    v[-1] = potential.limit(x[-1], -1)
    return v


def _cumulative_moment(potential, nodes, m, edges):
    out = np.zeros(nodes.size, dtype=complex)
    tail = 0.0 + 0.0j
    for a, b in reversed(list(zip(edges[:-1], edges[1:]))):
        sel = np.where((nodes >= a - 1e-14) & (nodes <= b + 1e-14))[0]
        if sel.size < 2:
            continue
        x = nodes[sel]
        v = _panel_values(potential, x)
        spl = interpolate.CubicSpline(x, x * v * m[sel]).antiderivative()
        out[sel] = spl(x[-1]) - spl(x) + tail
        tail = out[sel[0]]
    return out


def solve_jost(potential, k, side=1, step=None, margin=DEFAULT_MARGIN, check=True):
    """Solve the Volterra equation for m_+ (side=+1) or m_- (side=-1).

    Returns a JostSolution whose residual is the Volterra defect measured
    with an independent spline quadrature.
    """
    k = complex(k)
    check_upper_half(k)
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    if k == 0 and not np.isfinite(potential.moment_norm(1)):
        raise ZeroEnergyUnsupported("k = 0 requires a finite first moment")
    step = step or default_step(potential, k)
    pot = potential if side > 0 else potential.reflected()
    nodes, m, mp, _, _, _ = _march_richardson(pot, k, step, margin)
    m, mp = m[:, 0], mp[:, 0]
    if side < 0:
        nodes, m, mp = -nodes[::-1], m[::-1], -mp[::-1]
    residual = _ls_residual(potential, nodes, m, k, side) if check else float("nan")
    if check and residual > RESIDUAL_TOL:
        # one refinement before giving up
        return _refine_or_fail(potential, k, side, step, margin, residual)
    return JostSolution(k, side, nodes, m, mp, residual)


def _refine_or_fail(potential, k, side, step, margin, residual):
    if step < 1e-4:
        raise NoConvergence(f"Volterra residual {residual:.2e} above tolerance")
    return solve_jost(potential, k, side, step / 2, margin)


@dataclass(frozen=True)
class ScatteringData:
    """Transmission and reflection amplitudes at wavenumber k.

    r1 is the reflection for waves incident from the right, r2 for waves
    incident from the left, so S = [[t, r1], [r2, t]].
    """

    k: complex
    t: complex
    r1: complex
    r2: complex

    @property
    def S(self):
        return np.array([[self.t, self.r1], [self.r2, self.t]], dtype=complex)

    @property
    def T(self):
        return self.S - np.eye(2)

    def unitarity_defect(self):
        s = self.S
        return float(np.max(np.abs(s.conj().T @ s - np.eye(2))))

    def det_S(self):
        return self.t * self.t - self.r1 * self.r2


def _amplitudes(potential, k, step, margin):
    """Return 1/t, r1/t, r2/t as arrays over k (Richardson extrapolated)."""
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    if np.any(k == 0):
        raise ZeroEnergyUnsupported("scattering amplitudes need k != 0")
    nodes, _, _, t0p, t1p, _ = _march_richardson(potential, k, step, margin, store=False)
    x0 = nodes[0]
    inv_t = 1.0 - t0p / (2j * k)
    # int e^{2iky} V m_+ dy = e^{2ikx0} * total1
    r2_over_t = np.exp(2j * k * x0) * t1p / (2j * k)
    mirror = potential.reflected()
    nodes_m, _, _, t0m, t1m, _ = _march_richardson(mirror, k, step, margin, store=False)
    # in mirrored coordinates int e^{-2iky} V m_- dy becomes int e^{2iky'} V~ m~ dy'
    r1_over_t = np.exp(2j * k * nodes_m[0]) * t1m / (2j * k)
    inv_t_minus = 1.0 - t0m / (2j * k)
    return inv_t, r1_over_t, r2_over_t, inv_t_minus


def scattering(potential, k, step=None, margin=DEFAULT_MARGIN):
    """Scattering data at a single k with Im k >= 0, k != 0.

    For complex k the reflection amplitudes are the analytic continuations
    given by the same integral formulas (entire in k for compact support).
    """
    k = complex(k)
    check_upper_half(k)
    data = scattering_many(potential, [k], step, margin)
    return data[0]


def scattering_many(potential, ks, step=None, margin=DEFAULT_MARGIN):
    """Vectorised scattering over an array of wavenumbers."""
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    check_upper_half(ks)
    if potential.is_zero:
        return [ScatteringData(k, 1.0 + 0j, 0j, 0j) for k in ks]
    step = step or default_step(potential, ks)
    inv_t, r1t, r2t, _ = _amplitudes(potential, ks, step, margin)
    t = 1.0 / inv_t
    return [ScatteringData(k, t[i], r1t[i] * t[i], r2t[i] * t[i]) for i, k in enumerate(ks)]


def inverse_transmission(potential, ks, step=None, margin=DEFAULT_MARGIN):
    """1/t(k) over an array of k (the Jost function)."""
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    if potential.is_zero:
        return np.ones(ks.size, dtype=complex)
    step = step or default_step(potential, ks)
    nodes, _, _, t0, _, _ = _march_richardson(potential, ks, step, margin, store=False)
    return 1.0 - t0 / (2j * ks)


def jost_boundary_values(potential, ks, x0=0.0, step=None, margin=DEFAULT_MARGIN):
    """psi_+(k; x0) and its x-derivative for an array of k.

    Left of the support m_+ is known in closed form from the two moments
    int V m_+ and int e^{2iky} V m_+, so no interior storage is needed.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    lo, hi = potential.support
    if potential.is_zero or x0 >= hi:
        return np.exp(1j * ks * x0), 1j * ks * np.exp(1j * ks * x0)
    if x0 > lo:
        raise ValueError("evaluation point must lie left of the support")
    step = step or default_step(potential, ks)
    nodes, _, _, t0, t1, _ = _march_richardson(potential, ks, step, margin, store=False)
    moment1 = np.exp(2j * ks * nodes[0]) * t1
    m = 1.0 + (np.exp(-2j * ks * x0) * moment1 - t0) / (2j * ks)
    mp = -np.exp(-2j * ks * x0) * moment1
    phase = np.exp(1j * ks * x0)
    return phase * m, phase * (1j * ks * m + mp)


# -- bound states ---------------------------------------------------------

def zero_energy_node_count(potential, margin=DEFAULT_MARGIN):
    """Number of sign changes of the zero-energy solution psi_+(0; x).

    By Sturm oscillation this equals the number of negative eigenvalues
    (barring a zero-energy resonance).
    """
    if potential.is_zero:
        return 0
    step = default_step(potential)
    nodes, m, _, _, _, _ = _march_richardson(potential, np.array([0.0]), step, margin)
    vals = m[:, 0].real
    # beyond the left end m_+(0;x) is affine in x; include its far-left sign
    slope = (vals[1] - vals[0]) / (nodes[1] - nodes[0])
    far = vals[0] + slope * (-1e6 - nodes[0])
    seq = np.concatenate([[far], vals])
    seq = seq[np.abs(seq) > 1e-14]
    return int(np.sum(np.signbit(seq[1:]) != np.signbit(seq[:-1])))


@dataclass(frozen=True)
class BoundStateList:
    betas: tuple

    @property
    def energies(self):
        return tuple(-b * b for b in self.betas)

    def __len__(self):
        return len(self.betas)


def bound_states(potential, step=None, max_refine=6):
    """All beta > 0 with 1/t(i beta) = 0, i.e. eigenvalues -beta^2.

    Sign changes of the real function beta -> 1/t(i beta) are bracketed on a
    grid over (0, ||V_-||_1 / 2], refined until the count matches the
    zero-energy node count, then polished by Brent's method.
    """
    if potential.is_zero:
        return BoundStateList(())
    beta_max = 0.5 * potential.negative_part_norm()
    if beta_max <= 0:
        return BoundStateList(())
    expected = zero_energy_node_count(potential)
    step = step or default_step(potential, 1j * beta_max)
    f = lambda b: inverse_transmission(potential, 1j * np.atleast_1d(b), step)
    lo = beta_max * 1e-6
    n = 200
    for _ in range(max_refine):
        grid = np.concatenate([np.geomspace(lo, beta_max * 0.05, n // 4),
                               np.linspace(beta_max * 0.05, beta_max, n)[1:]])
        vals = f(grid)
        if np.max(np.abs(vals.imag)) > 1e-8 * max(1.0, np.max(np.abs(vals.real))):
            raise NoConvergence("1/t(i beta) is not real on the imaginary axis")
        re = vals.real
        idx = np.where(np.signbit(re[1:]) != np.signbit(re[:-1]))[0]
        if len(idx) >= expected:
            break
        n *= 2
    else:
        raise RootIsolationFailure(
            f"found {len(idx)} sign changes but the node count predicts {expected}")
    betas = []
    scalar = lambda b: float(f(b)[0].real)
    for i in idx:
        root = optimize.brentq(scalar, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-14)
        val = f(root)[0]
        if abs(val.imag) > 1e-10:
            raise RootIsolationFailure(f"Im 1/t(i beta) = {val.imag:.1e} at the root")
        betas.append(root)
    return BoundStateList(tuple(sorted(betas, reverse=True)))


# -- Faddeev-Deift-Trubowitz representation ------------------------------

def fdt_transmission(potential, k, bound=None, n_nodes=4000, tail_tol=1e-6):
    """t(k) for Im k > 0 from |t| on the real axis and the bound states.

    t(k) = exp[(1/(pi i)) int ln|t(u)| / (u - k) du] * prod (k + i b)/(k - i b).
    Using the evenness of |t(u)| the integral is folded onto u > 0.
    """
    k = complex(k)
    if k.imag <= 0:
        raise ValueError("k must lie in the open upper half plane")
    if bound is None:
        bound = bound_states(potential)
    blaschke = np.prod([(k + 1j * b) / (k - 1j * b) for b in bound.betas]) if bound.betas else 1.0
    if potential.is_zero:
        return complex(blaschke)
    l1 = potential.l1_norm()
    # ln|t(u)| ~ -|r|^2/2 <= C/u^2 ; pick U so the folded tail is below tail_tol
    u_max = max(20.0, 4 * l1, 4 * abs(k))
    for _ in range(8):
        lt = np.log(np.abs(1.0 / inverse_transmission(potential, [u_max])[0]))
        c_est = abs(lt) * u_max ** 2
        tail = 2 * abs(k) * c_est / (3 * u_max ** 3) / math.pi
        if tail < tail_tol:
            break
        u_max *= 2
    # graded substitution u = s^2 concentrates nodes near the log singularity at 0
    s_nodes, s_w = np.polynomial.legendre.leggauss(200)
    n_panels = max(4, n_nodes // 200)
    edges = np.linspace(0.0, math.sqrt(u_max), n_panels + 1)
    ss = np.concatenate([0.5 * (b - a) * s_nodes + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    ws = np.concatenate([0.5 * (b - a) * s_w for a, b in zip(edges[:-1], edges[1:])])
    us = ss ** 2
    log_abs_t = -np.log(np.abs(inverse_transmission(potential, us)))
    integrand = log_abs_t * (2 * k / (us ** 2 - k ** 2)) * 2 * ss
    val = np.sum(ws * integrand) / (math.pi * 1j)
    if tail > tail_tol:
        warnings.warn(TruncationWarning(f"FDT tail estimate {tail:.1e}", tail))
    return complex(np.exp(val) * blaschke)
