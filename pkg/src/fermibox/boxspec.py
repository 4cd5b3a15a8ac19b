"""Spectra of the box operators H_L and H_{V,L} on [-L, L] and the energy
differences of the corresponding non-interacting Fermi gases."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .boundary import SIGMA_X, BoundaryCondition
from .exceptions import (InsufficientSpectrum, MissedRootSuspected, NuOnEigenvalue,
                         OdeStepFailure)
from .potentials import identity_weight, zero_potential

ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
ROOT_XTOL = 1e-14
GOLDEN = 0.3819660112501051  # grid offset that keeps nodes off rational points


@dataclass(frozen=True)
class BoxSpectrum:
    """Ascending eigenvalues up to a cutoff, each listed once with its multiplicity."""

    L: float
    bc: BoundaryCondition
    cutoff: float
    values: tuple
    multiplicities: tuple
    perturbed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "multiplicities", tuple(int(m) for m in self.multiplicities))

    @property
    def eigenvalues(self):
        """Eigenvalues repeated according to multiplicity."""
        return np.repeat(np.asarray(self.values, dtype=float),
                         np.asarray(self.multiplicities, dtype=int))

    def count_below(self, nu):
        ev = self.eigenvalues
        return int(np.sum(ev <= nu))

    def rows(self):
        return [(i + 1, v, m) for i, (v, m) in enumerate(zip(self.values, self.multiplicities))]


# -- free box -------------------------------------------------------------

def _u_batch(bc, ks):
    lhs = 1j * bc.A[None] - ks[:, None, None] * bc.B[None]
    rhs = 1j * bc.A[None] + ks[:, None, None] * bc.B[None]
    return np.linalg.solve(lhs, rhs)


def _unitary_w(bc, L, ks):
    """W(k) = -e^{-2iLk} U(k) sigma_x; box eigenvalues are where W has eigenvalue 1."""
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    return -np.exp(-2j * L * ks)[:, None, None] * (_u_batch(bc, ks) @ SIGMA_X)


def _tracked_eigenvalues(bc, L, ks):
    """Eigenvalues of W(k) ordered so each column varies continuously."""
    ev = np.linalg.eigvals(_unitary_w(bc, L, ks))
    for i in range(1, len(ks)):
        keep = np.abs(ev[i] - ev[i - 1]).sum()
        swap = np.abs(ev[i, ::-1] - ev[i - 1]).sum()
        if swap < keep:
            ev[i] = ev[i, ::-1]
    return ev


def free_lower_bound(bc, L):
    """A lower bound for the free box spectrum used to size the negative search."""
    pinv = np.linalg.pinv(bc.B)
    lam = np.linalg.norm(pinv @ bc.A, 2)
    kappa = 2.0 * (lam + 1.0 / L) + 1.0 if np.any(np.abs(bc.B) > 0) else 0.0
    return -kappa ** 2


def _dedupe(roots, tol):
    roots = sorted(roots)
    out = []
    for r in roots:
        if out and abs(r - out[-1]) <= tol * max(1.0, abs(r)):
            continue
        out.append(r)
    return out


def free_spectrum(bc, L, cutoff):
    """Eigenvalues of the free box operator up to cutoff, with multiplicities.

    Positive eigenvalues come from the secular matrix e^{2iLk} I + U sigma_x
    scanned on a k-grid of spacing pi/(8L); zero and negative eigenvalues
    from the characteristic matrix of exact free solutions.
    """
    L = float(L)
    values, mults = [], []
    # negative and zero part
    neg_vals, neg_mults = _free_nonpositive(bc, L, min(cutoff, 0.0))
    values += neg_vals
    mults += neg_mults
    if cutoff > 0:
        kmax = math.sqrt(cutoff)
        for k in _positive_free_roots(bc, L, kmax):
            W = _unitary_w(bc, L, [k])[0]
            sv = np.linalg.svd(np.eye(2) - W, compute_uv=False)
            values.append(k * k)
            mults.append(2 if sv[0] < 1e-7 else 1)
    _check_gaps(values, mults, L)
    return BoxSpectrum(L, bc, float(cutoff), tuple(values), tuple(mults), False)


def _positive_free_roots(bc, L, kmax):
    """k in (0, kmax] where an eigenvalue of W(k) equals 1.

    Each eigenvalue is followed continuously and its phase unwrapped; a
    root is a crossing of the unwrapped phase through a multiple of 2 pi.
    A double eigenvalue shows up as a crossing in both columns.
    """
    dk = math.pi / (8 * L)
    for _ in range(8):
        n = int(math.ceil(kmax / dk)) + 2
        ks = np.concatenate([[1e-6 * dk], (np.arange(n) + GOLDEN) * dk])
        ev = _tracked_eigenvalues(bc, L, ks)
        steps = np.abs(np.angle(ev[1:] / ev[:-1]))
        if steps.max() < 0.5 * np.pi:
            break
        dk *= 0.5
    found = []
    for col in (0, 1):
        phase = np.unwrap(np.angle(ev[:, col]))
        turn = np.floor(phase / (2 * np.pi))
        for i in np.where(turn[1:] != turn[:-1])[0]:
            target = ev[i, col]
            shift = np.exp(-2j * np.pi * max(turn[i], turn[i + 1]))

            def f(k, target=target, shift=shift):
                vals = np.linalg.eigvals(_unitary_w(bc, L, [k])[0])
                v = vals[np.argmin(np.abs(vals - target))]
                return float(np.angle(v * shift))

            found.append(optimize.brentq(f, ks[i], ks[i + 1], xtol=ROOT_XTOL, rtol=1e-15))
    return [k for k in _dedupe(found, 1e-10) if k <= kmax]


def _free_nonpositive(bc, L, cutoff):
    """Free eigenvalues in [lower bound, min(cutoff, 0)]."""
    values, mults = [], []
    lower = free_lower_bound(bc, L)
    if lower < 0 and cutoff >= lower:
        kap_max = math.sqrt(-lower)

        def char(kappa):
            kappa = kappa + 0j
            # basis e^{kappa (x - L)}, e^{-kappa (x + L)} keeps entries bounded
            ep, em = 1.0, np.exp(-2 * kappa * L)
            vals_r = np.array([ep, em])
            vals_l = np.array([em, ep])
            der_r = np.array([kappa * ep, -kappa * em])
            der_l = np.array([kappa * em, -kappa * ep])
            return bc.characteristic_matrix(vals_r, der_r, vals_l, der_l)

        values, mults = _nonpositive_roots(char, kap_max, L, cutoff)
    # zero energy: solutions 1 and x
    c0 = bc.characteristic_matrix(np.array([1.0, L]), np.array([0.0, 1.0]),
                                  np.array([1.0, -L]), np.array([0.0, 1.0]))
    if cutoff >= 0:
        sv = np.linalg.svd(c0, compute_uv=False)
        scale = max(1.0, np.abs(c0).max())
        nullity = int(np.sum(sv < 1e-12 * scale))
        if nullity:
            values.append(0.0)
            mults.append(nullity)
    return values, mults


def _nonpositive_roots(char, kap_max, L, cutoff, kap_min=0.0):
    """Roots -kappa^2 of det char(kappa) = 0 for kappa in (kap_min, kap_max]."""
    dk = min(math.pi / (8 * L), kap_max / 200)
    n = int(math.ceil(kap_max / dk)) + 2
    kaps = (np.arange(n) + GOLDEN) * dk
    dets = np.array([np.linalg.det(char(k)) for k in kaps])
    theta = 0.5 * np.angle(np.sum(dets ** 2)) if np.any(dets) else 0.0
    phase = np.exp(-1j * theta)
    func = lambda ks: np.array([(phase * np.linalg.det(char(k))).real for k in ks])
    simple, doubles = _find_roots(func, kaps, (dets * phase).real)
    roots = [(k, 1) for k in simple] + [(k, 2) for k in doubles]
    values, mults = [], []
    for kap, mult in sorted(roots, reverse=True):
        lam = -kap * kap
        if lam > cutoff or kap <= kap_min:
            continue
        values.append(lam)
        mults.append(mult)
    return values, mults


def _check_gaps(values, mults, L, extra=0.0):
    pos = [v for v in values if v > 0]
    if len(pos) < 2:
        return
    ks = np.sqrt(pos)
    gaps = np.diff(ks)
    bound = 2 * (math.pi / L + extra)
    if np.any(gaps > bound):
        raise MissedRootSuspected(
            f"eigenvalue gap {gaps.max():.3g} in sqrt(lambda) exceeds {bound:.3g}")


# -- perturbed box ----------------------------------------------------------

def _free_transfer(lam, d):
    """Scaled transfer matrix over distance d for energies lam (arrays).

    Returns (T, s) with T_true = e^{s} T.  For lam < 0 the growth e^{kappa|d|}
    is pulled out into s.
    """
    lam = np.asarray(lam, dtype=complex)
    k = np.sqrt(lam)
    neg = lam.real < 0
    T = np.empty(lam.shape + (2, 2), dtype=complex)
    s = np.zeros(lam.shape, dtype=complex)
    # oscillatory / polynomial branch
    pos = ~neg
    kd = k[pos] * d
    sinc = np.sinc(kd / np.pi)  # sin(kd)/(kd)
    T[pos, 0, 0] = np.cos(kd)
    T[pos, 0, 1] = d * sinc
    T[pos, 1, 0] = -lam[pos] * d * sinc
    T[pos, 1, 1] = np.cos(kd)
    if np.any(neg):
        kap = np.sqrt(-lam[neg])
        ad = abs(d)
        e = np.exp(-2 * kap * ad)
        ch = 0.5 * (1 + e)
        # sinh(kap d)/kap scaled by e^{-kap|d|}
        sh = np.where(np.abs(kap * ad) < 1e-8, ad * np.exp(-kap * ad),
                      0.5 * (1 - e) / np.where(kap == 0, 1, kap))
        sgn = 1.0 if d >= 0 else -1.0
        T[neg, 0, 0] = ch
        T[neg, 0, 1] = sgn * sh
        T[neg, 1, 0] = sgn * kap * kap * sh
        T[neg, 1, 1] = ch
        s[neg] = kap * ad
    return T, s


def _ode_transfer(potential, lams, x0, x1):
    """Fundamental matrix of -y'' + V y = lam y from x0 to x1 for many lam."""
    lams = np.asarray(lams, dtype=complex)
    n = lams.size
    if x0 == x1:
        return np.broadcast_to(np.eye(2), (n, 2, 2)).astype(complex)
    complex_run = np.any(lams.imag != 0)
    edges = potential.edges
    inner = [e for e in edges if min(x0, x1) < e < max(x0, x1)]
    pts = [x0] + (sorted(inner) if x1 > x0 else sorted(inner, reverse=True)) + [x1]
    y = np.zeros((4, n), dtype=complex)
    y[0] = 1.0   # y1
    y[3] = 1.0   # y2'
    for a, b in zip(pts[:-1], pts[1:]):
        def rhs(x, yy, a=a, b=b):
            # evaluate V strictly inside the segment to respect jumps at edges
            xc = min(max(x, min(a, b) + 1e-13), max(a, b) - 1e-13)
            q = potential.eval(xc) - (lams if complex_run else lams.real)
            yy = yy.reshape(4, n)
            return np.concatenate([yy[1], q * yy[0], yy[3], q * yy[2]])

        y0 = y.ravel() if complex_run else y.real.ravel()
        sol = integrate.solve_ivp(rhs, (a, b), y0, method="DOP853",
                                  rtol=ODE_RTOL, atol=ODE_ATOL)
        if not sol.success:
            raise OdeStepFailure(sol.message)
        y = sol.y[:, -1].reshape(4, n).astype(complex)
    T = np.empty((n, 2, 2), dtype=complex)
    T[:, 0, 0], T[:, 1, 0] = y[0], y[1]
    T[:, 0, 1], T[:, 1, 1] = y[2], y[3]
    return T


class _Shooter:
    """Matching determinant of H_{V,L} as an analytic function of lam.

    Unknowns (phi(-L), phi'(-L), phi(L), phi'(L)); two rows match the left
    and right propagated data at a point inside the support, two rows
    impose the boundary condition.  Exponential growth for lam < 0 is
    divided out by positive column scalings.
    """

    def __init__(self, potential, bc, L):
        lo, hi = potential.support
        if lo < -L - 1e-12 or hi > L + 1e-12:
            warnings.warn("potential support extends beyond the box; it is truncated")
        self.potential, self.bc, self.L = potential, bc, float(L)
        self.zero = potential.is_zero
        self.a, self.b = (0.0, 0.0) if self.zero else (max(lo, -L), min(hi, L))
        self.xm = min(max(0.0, self.a), self.b)

    def matrices(self, lams):
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        L = self.L
        Tl, sl = _free_transfer(lams, self.a + L)
        Tr, sr = _free_transfer(lams, -(L - self.b))
        if not self.zero:
            Tl = _ode_transfer(self.potential, lams, self.a, self.xm) @ Tl
            Tr = _ode_transfer(self.potential, lams, self.b, self.xm) @ Tr
        n = lams.size
        M = np.zeros((n, 4, 4), dtype=complex)
        M[:, 0:2, 0:2] = Tl
        M[:, 0:2, 2:4] = -Tr
        # boundary rows: A (phi(L), phi(-L)) - B (-phi'(L), phi'(-L)) = 0
        A, B = self.bc.A, self.bc.B
        m = np.where(sl.real < sr.real, sl, sr)
        fl = np.exp(m - sl)   # the left columns were divided by e^{sl}
        fr = np.exp(m - sr)
        M[:, 2:4, 0] = (A[:, 1][None, :]) * fl[:, None]
        M[:, 2:4, 1] = (-B[:, 1][None, :]) * fl[:, None]
        M[:, 2:4, 2] = (A[:, 0][None, :]) * fr[:, None]
        M[:, 2:4, 3] = (B[:, 0][None, :]) * fr[:, None]
        return M

    def det(self, lams):
        return np.linalg.det(self.matrices(lams))


def _illinois(func, a, b, fa, fb, tol=ROOT_XTOL, max_iter=200):
    """Vectorised regula falsi (Illinois variant) for sign-changing brackets."""
    a, b, fa, fb = (np.array(v, dtype=float) for v in (a, b, fa, fb))
    side = np.zeros(a.size, dtype=int)
    for _ in range(max_iter):
        width = np.abs(b - a)
        active = width > tol * np.maximum(1.0, np.abs(a))
        if not np.any(active):
            break
        c = np.where(active, (a * fb - b * fa) / (fb - fa), a)
        # fall back to bisection when the secant point is not strictly inside
        bad = ~((c > np.minimum(a, b)) & (c < np.maximum(a, b)))
        c = np.where(bad, 0.5 * (a + b), c)
        fc = np.zeros_like(c)
        fc[active] = func(c[active])
        left = active & (np.signbit(fc) == np.signbit(fa))
        right = active & ~left
        exact = active & (fc == 0)
        b = np.where(right, c, b)
        fb_new = np.where(right, fc, fb)
        fa = np.where(right & (side == -1), fa * 0.5, fa)
        a = np.where(left, c, a)
        fa = np.where(left, fc, fa)
        fb = np.where(left & (side == 1), fb_new * 0.5, fb_new)
        side = np.where(left, 1, np.where(right, -1, side))
        a = np.where(exact, c, a)
        b = np.where(exact, c, b)
    return np.where(np.abs(fa) < np.abs(fb), a, b)


def _find_roots(func, xs, g=None, sub=16):
    """Zeros of a real continuous function sampled on an ascending grid.

    Sign changes are polished in one vectorised regula falsi pass.  Every
    local minimum of |g| without a sign change is zoomed into until it
    either splits into sign changes (a close pair) or shrinks to machine
    width; a minimum that then sits at rounding level is reported as a
    touching zero (a double or numerically degenerate root).
    Returns (simple_roots, double_candidates).
    """
    xs = np.asarray(xs, dtype=float)
    g = func(xs) if g is None else np.asarray(g, dtype=float)
    scale = max(np.abs(g).max(), 1e-300)
    lo, hi, glo, ghi = [], [], [], []

    def brackets(x, y):
        sg = np.signbit(y)
        idx = np.where(sg[1:] != sg[:-1])[0]
        lo.extend(x[idx]); hi.extend(x[idx + 1]); glo.extend(y[idx]); ghi.extend(y[idx + 1])

    brackets(xs, g)
    a = np.abs(g)
    sg = np.signbit(g)
    idx = np.where((a[1:-1] <= a[:-2]) & (a[1:-1] <= a[2:])
                   & (sg[:-2] == sg[1:-1]) & (sg[1:-1] == sg[2:]))[0] + 1
    pending = [(xs[i - 1], xs[i + 1]) for i in idx]
    doubles = []
    while pending:
        grid = np.concatenate([np.linspace(p, q, sub + 1) for p, q in pending])
        vals = func(grid).reshape(len(pending), sub + 1)
        grid = grid.reshape(len(pending), sub + 1)
        nxt = []
        for x, y in zip(grid, vals):
            sy = np.signbit(y)
            if np.any(sy[1:] != sy[:-1]):
                brackets(x, y)
                continue
            j = int(np.argmin(np.abs(y)))
            if x[-1] - x[0] < 1e-13 * max(1.0, abs(x[j])):
                if abs(y[j]) < 1e-8 * scale:
                    doubles.append(x[j])
                continue
            if j in (0, sub):
                continue   # the minimum left the window: a plain dip, no zero
            nxt.append((x[j - 1], x[j + 1]))
        pending = nxt
    roots = list(_illinois(func, lo, hi, glo, ghi)) if lo else []
    return sorted(roots), sorted(doubles)


def perturbed_spectrum(potential, bc, L, cutoff, lower=None):
    """Eigenvalues of H_{V,L} up to cutoff by transfer-matrix shooting."""
    L = float(L)
    shooter = _Shooter(potential, bc, L)
    if lower is None:
        vmin = min(0.0, -potential.sup_norm()) if not potential.is_zero else 0.0
        vmin = min(vmin, float(np.min(potential.eval(np.linspace(*potential.support, 2001)))))
        lower = free_lower_bound(bc, L) + vmin - 0.5
    kap_max = math.sqrt(-lower) if lower < 0 else 0.0
    dk = math.pi / (8 * max(L, potential.support[1] - potential.support[0]))
    kaps = (np.arange(int(math.ceil(kap_max / dk)) + 1)[::-1] + GOLDEN) * dk if kap_max > 0 else np.array([])
    kmax = math.sqrt(max(cutoff, 0.0)) + 2 * dk
    ks = (np.arange(int(math.ceil(kmax / dk)) + 1) + GOLDEN) * dk if cutoff > 0 else np.array([])
    lams = np.concatenate([-kaps ** 2, ks ** 2])
    dets = shooter.det(lams)
    theta = 0.5 * np.angle(np.sum(dets ** 2))
    phase = np.exp(-1j * theta)
    g = (dets * phase).real
    if np.max(np.abs((dets * phase).imag)) > 1e-6 * np.max(np.abs(g)):
        warnings.warn("shooting determinant is not real up to a constant phase")
    func = lambda x: (shooter.det(x) * phase).real
    simple, doubles = _find_roots(func, lams, g)
    # a zero without a sign change has even multiplicity
    roots = [(r, 1) for r in simple] + [(r, 2) for r in doubles]
    roots.sort()
    values = tuple(float(r) for r, m in roots if r <= cutoff)
    mults = tuple(m for r, m in roots if r <= cutoff)
    return BoxSpectrum(L, bc, float(cutoff), values, mults, True)


# -- energy differences ----------------------------------------------------

@dataclass(frozen=True)
class EnergyDecomposition:
    E_L: float
    M: int
    N: int
    xi_L: int
    nu: float
    L: float
    fumi_ref: float = None
    fse_ref: float = None

    def fumi_estimate(self, f_nu):
        """E_L + f(nu) xi_L, which tends to the Fumi term as L grows."""
        return self.E_L + f_nu * self.xi_L


def energy_from_spectra(free, pert, nu, f=None, strict=True, tol=1e-9):
    """Canonical energy difference from two computed spectra.

    E_L = sum_{mu <= nu} f(mu) - sum_{lam <= nu} f(lam), M and N the two
    counts and xi_L = N - M.  With strict=True an eigenvalue within tol of
    nu raises NuOnEigenvalue; otherwise such eigenvalues count as <= nu.
    """
    f = f or identity_weight()
    lam, mu = free.eigenvalues, pert.eigenvalues
    for spec in (free, pert):
        if spec.cutoff < nu:
            raise InsufficientSpectrum(f"spectrum cutoff {spec.cutoff} is below nu = {nu}")
    window = tol * max(1.0, abs(nu))
    if strict and (np.any(np.abs(lam - nu) <= window) or np.any(np.abs(mu - nu) <= window)):
        raise NuOnEigenvalue(f"nu = {nu} coincides with a box eigenvalue")
    sel_l = lam <= nu + window
    sel_m = mu <= nu + window
    E = float(np.real(np.sum(f.value(mu[sel_m])) - np.sum(f.value(lam[sel_l]))))
    M, N = int(sel_m.sum()), int(sel_l.sum())
    return EnergyDecomposition(E, M, N, N - M, float(nu), float(free.L))


def energy_difference(potential, bc, L, nu, f=None, strict=True, free=None, pert=None,
                      tol=1e-9, margin=0.5):
    """Canonical energy difference of H_{V,L} against H_L at Fermi energy nu."""
    free = free or free_spectrum(bc, L, nu + margin)
    if potential.is_zero:
        pert = free
    pert = pert or perturbed_spectrum(potential, bc, L, nu + margin)
    return energy_from_spectra(free, pert, nu, f, strict, tol)


def halfline_energy_difference(potential, origin, end, L, nu, f=None, strict=True,
                               tol=1e-9, margin=0.5):
    """Canonical energy difference for the half-line box [0, L]."""
    free = halfline_spectrum(zero_potential(), origin, end, L, nu + margin)
    pert = halfline_spectrum(potential, origin, end, L, nu + margin)
    return energy_from_spectra(free, pert, nu, f, strict, tol)


def microcanonical_identity(decomp, pert, nu):
    """E_L + nu xi_L plus the levels between the counts, measured from nu.

    Equals the micro-canonical difference with N = decomp.N particles.
    """
    mu = pert.eigenvalues
    M, N = decomp.M, decomp.N
    if N >= M:
        between = float(np.sum(mu[M:N] - nu))
    else:
        between = -float(np.sum(mu[N:M] - nu))
    return decomp.E_L + nu * decomp.xi_L + between


def dirichlet_first_order(potential, L, n_particles):
    """Sum over the lowest free Dirichlet states of (phi_j, V phi_j)."""
    js = np.arange(1, int(n_particles) + 1)
    lo, hi = potential.support

    def integrand(x):
        modes = np.sin(np.outer(js, x + L) * math.pi / (2 * L)) ** 2 / L
        return modes.sum(axis=0) * potential.eval(x)

    xs, ws = np.polynomial.legendre.leggauss(400)
    total = 0.0
    for a, b in zip(potential.edges[:-1], potential.edges[1:]):
        a, b = max(a, -L), min(b, L)
        if b <= a:
            continue
        x = 0.5 * (b - a) * xs + 0.5 * (a + b)
        total += float(np.sum(0.5 * (b - a) * ws * integrand(x)))
    return total


def microcanonical(potential, bc, L, n_particles, free=None, pert=None):
    """Sum over the lowest n_particles eigenvalues of (mu_k - lam_k)."""
    n = int(n_particles)
    if potential.is_zero:
        return 0.0
    if free is None or pert is None:
        # grow the cutoff until both spectra hold n levels
        cutoff = (math.pi * (n + 2) / (2 * L)) ** 2 + 1.0
        for _ in range(20):
            free = free_spectrum(bc, L, cutoff)
            pert = perturbed_spectrum(potential, bc, L, cutoff)
            if free.eigenvalues.size >= n and pert.eigenvalues.size >= n:
                break
            cutoff *= 1.5
    lam, mu = free.eigenvalues, pert.eigenvalues
    if lam.size < n or mu.size < n:
        raise InsufficientSpectrum(f"need {n} eigenvalues, have {lam.size} and {mu.size}")
    return float(np.sum(mu[:n] - lam[:n]))


def halfline_spectrum(potential, origin, end, L, cutoff):
    """Eigenvalues of -d2/dx2 + V on [0, L] with separated conditions.

    origin = (a, b) imposes a phi(0) = b phi'(0); end = (A, B) imposes
    A phi(L) + B phi'(L) = 0 (same orientation as the right end of the box).
    All eigenvalues are simple.
    """
    a, b = origin
    A, B = end
    # a common phase makes (a, b) real
    ph = np.exp(-1j * np.angle(a if abs(a) > abs(b) else b))
    a, b = (a * ph).real, (b * ph).real
    ph = np.exp(-1j * np.angle(A if abs(A) > abs(B) else B))
    A, B = (A * ph).real, (B * ph).real
    L = float(L)
    lo, hi = potential.support
    hi = 0.0 if potential.is_zero else min(max(hi, 0.0), L)

    def char(lams):
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        y0 = np.array([b, a], dtype=complex)
        T = _ode_transfer(potential, lams, 0.0, hi) if not potential.is_zero and hi > 0 else \
            np.broadcast_to(np.eye(2), (lams.size, 2, 2)).astype(complex)
        Tf, s = _free_transfer(lams, L - hi)
        y = (Tf @ T @ y0)
        return A * y[:, 0] + B * y[:, 1]

    vmin = min(0.0, float(np.min(potential.eval(np.linspace(max(lo, 0), hi, 2001))))) if hi > 0 else 0.0
    # each end can bind at most one state with kappa below |A/B| resp. |a/b|
    ratio = lambda p, q: abs(p) / abs(q) if abs(q) > 1e-12 * abs(p) else 0.0
    lower = vmin - ratio(A, B) ** 2 - ratio(a, b) ** 2 - 1.0
    kap_max = math.sqrt(-lower)
    dk = math.pi / (8 * L)
    kaps = (np.arange(int(math.ceil(kap_max / dk)) + 1)[::-1] + GOLDEN) * dk
    kmax = math.sqrt(max(cutoff, 0.0)) + 2 * dk
    ks = (np.arange(int(math.ceil(kmax / dk)) + 1) + GOLDEN) * dk
    lams = np.concatenate([-kaps ** 2, ks ** 2])
    func = lambda x: char(x).real
    simple, doubles = _find_roots(func, lams)
    roots = np.array(_dedupe(simple + doubles, 1e-12))
    roots = roots[roots <= cutoff]
    return BoxSpectrum(L, None, float(cutoff), tuple(float(r) for r in roots),
                       tuple(1 for _ in roots), not potential.is_zero)
