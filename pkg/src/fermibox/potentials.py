"""Real potentials on the line and the norms used throughout the package.

Every potential is either compactly supported or truncated to a compact
interval, so downstream integrals always run over a finite range.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from ._validation import check_finite, check_positive

TAIL_MASS = 1e-12
NORM_TOL = 1e-12


@dataclass(frozen=True)
class Potential:
    """A bounded real potential with compact (possibly truncated) support.

    Parameters
    ----------
    kind : str
        One of ``square-well``, ``gaussian``, ``poeschl-teller``,
        ``piecewise-linear``.
    params : dict
        Numeric parameters of the preset, kept for reporting.
    support : (float, float)
        Interval outside of which the potential is exactly zero.
    breakpoints : tuple of float
        Points inside the support where V jumps or has a kink.
    symmetric : bool
        Whether V(x) = V(-x).
    """

    kind: str
    params: dict
    support: tuple
    breakpoints: tuple = ()
    symmetric: bool = False
    _func: Callable = field(default=None, repr=False, compare=False)

    # -- evaluation ---------------------------------------------------
    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        """Return V(x); exactly zero outside the support."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = self._func(x[inside])
        return out if out.ndim else float(out)

    def limit(self, x, side):
        """One-sided limit V(x+0) for side=+1 or V(x-0) for side=-1."""
        x = np.asarray(x, dtype=float)
        delta = 1e-13 * np.maximum(1.0, np.abs(x))
        return self.eval(x + side * delta)

    @property
    def support_radius(self):
        return max(abs(self.support[0]), abs(self.support[1]))

    @property
    def is_zero(self):
        return self.kind == "square-well" and self.params.get("value") == 0.0

    @property
    def edges(self):
        """Support endpoints together with interior breakpoints."""
        lo, hi = self.support
        inner = [b for b in self.breakpoints if lo < b < hi]
        return np.array(sorted({lo, hi, *inner}))

    def sup_norm(self):
        """Maximum of |V|, sampled densely with one-sided limits at the edges."""
        edges = self.edges
        xs = np.concatenate([np.linspace(a, b, 2001) for a, b in zip(edges[:-1], edges[1:])])
        vals = np.concatenate([np.abs(self.eval(xs)), np.abs(self.limit(edges, 1)),
                               np.abs(self.limit(edges, -1))])
        return float(vals.max())

    # -- norms --------------------------------------------------------
    def integrate(self, g):
        """Adaptive quadrature of g(x) over the support, split at breakpoints."""
        edges = self.edges
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(g, a, b, epsabs=NORM_TOL, epsrel=1e-12, limit=200)
            total += val
        return total

    def moment_norm(self, n=0):
        """Return the integral of |x|^n |V(x)| over the line, n in 0..3."""
        if n not in (0, 1, 2, 3):
            raise ValueError("moment order must be 0, 1, 2 or 3")
        if self.is_zero:
            return 0.0
        return self.integrate(lambda x: abs(x) ** n * abs(self.eval(x)))

    def l1_norm(self):
        return self.moment_norm(0)

    def negative_part_norm(self):
        """Integral of the negative part max(-V, 0)."""
        if self.is_zero:
            return 0.0
        return self.integrate(lambda x: max(-self.eval(x), 0.0))

    def integral(self):
        """Signed integral of V."""
        if self.is_zero:
            return 0.0
        return self.integrate(lambda x: self.eval(x))

    def birman_solomyak(self, q=0.5):
        """Sum over unit cells [j, j+1] of (integral of |V| over the cell)^q."""
        check_positive(q, "q")
        if self.is_zero:
            return 0.0
        lo, hi = self.support
        total = 0.0
        for j in range(math.floor(lo), math.ceil(hi)):
            a, b = max(lo, j), min(hi, j + 1)
            if b <= a:
                continue
            pts = [p for p in self.breakpoints if a < p < b]
            cell, _ = integrate.quad(lambda x: abs(self.eval(x)), a, b,
                                     points=pts or None, epsabs=NORM_TOL, limit=200)
            total += cell ** q
        return total

    # -- transformations ---------------------------------------------
    def scaled(self, factor):
        """Return factor * V as a new potential of the same kind."""
        factor = float(factor)
        params = dict(self.params, scale=self.params.get("scale", 1.0) * factor)
        func = self._func
        return Potential(self.kind, params, self.support, self.breakpoints,
                         self.symmetric, lambda x: factor * func(x))

    def reflected(self):
        """Return the mirror image x -> V(-x)."""
        lo, hi = self.support
        func = self._func
        return Potential(self.kind, dict(self.params, reflected=True), (-hi, -lo),
                         tuple(sorted(-b for b in self.breakpoints)), self.symmetric,
                         lambda x: func(-x))

    def describe(self):
        return {"kind": self.kind, **{k: v for k, v in self.params.items()}}


# -- presets ------------------------------------------------------------

def square_well(value=-2.0, left=-1.0, right=1.0):
    """Constant value on [left, right], zero elsewhere."""
    value, left, right = float(value), float(left), float(right)
    if right <= left:
        raise ValueError("square well needs left < right")
    return Potential("square-well", {"value": value, "left": left, "right": right},
                     (left, right), (), left == -right,
                     lambda x: np.full_like(np.asarray(x, dtype=float), value))


def zero_potential():
    """The zero potential, represented as a square well of height 0."""
    return square_well(0.0, -1.0, 1.0)


def gaussian(amplitude=1.0, width=1.0, center=0.0):
    """amplitude * exp(-(x-center)^2 / (2 width^2)), truncated.

    The truncation radius is chosen so the discarded tail mass is below 1e-12.
    """
    amplitude, width, center = float(amplitude), float(width), float(center)
    check_positive(width, "width")
    if amplitude == 0.0:
        radius = width
    else:
        # both tails: |a| w sqrt(2 pi) erfc(R / (w sqrt 2)) < TAIL_MASS
        target = TAIL_MASS / (abs(amplitude) * width * math.sqrt(2 * math.pi))
        radius = width * math.sqrt(2.0) * float(special.erfcinv(min(target, 1.0)))
    return Potential("gaussian",
                     {"amplitude": amplitude, "width": width, "center": center,
                      "radius": radius},
                     (center - radius, center + radius), (), center == 0.0,
                     lambda x: amplitude * np.exp(-0.5 * ((np.asarray(x) - center) / width) ** 2))


def poeschl_teller(amplitude=-2.0, alpha=1.0):
    """amplitude * sech^2(alpha x), truncated where the tail mass drops below 1e-12."""
    amplitude, alpha = float(amplitude), float(alpha)
    check_positive(alpha, "alpha")
    if amplitude == 0.0:
        radius = 1.0
    else:
        # tail of sech^2 beyond R on both sides is 2 (1 - tanh(alpha R)) / alpha
        # and 1 - tanh(y) < 2 exp(-2y)
        radius = math.log(4.0 * abs(amplitude) / (alpha * TAIL_MASS)) / (2.0 * alpha)
    return Potential("poeschl-teller",
                     {"amplitude": amplitude, "alpha": alpha, "radius": radius},
                     (-radius, radius), (), True,
                     lambda x: amplitude / np.cosh(alpha * np.asarray(x)) ** 2)


def piecewise_linear(xs: Sequence[float], values: Sequence[float]):
    """Linear interpolation of a table; zero outside the table range."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != values.shape or xs.size < 2:
        raise ValueError("table needs two equal-length columns with at least two rows")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("table positions must be strictly increasing")
    check_finite(values, "values")
    symmetric = bool(np.allclose(xs, -xs[::-1]) and np.allclose(values, values[::-1]))
    return Potential("piecewise-linear",
                     {"rows": int(xs.size), "x_min": float(xs[0]), "x_max": float(xs[-1])},
                     (float(xs[0]), float(xs[-1])), tuple(float(x) for x in xs[1:-1]),
                     symmetric, lambda x: np.interp(x, xs, values))


def load_table(path):
    """Read a two-column (x, V) CSV file into a piecewise-linear potential."""
    xs, vs = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                x, v = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if not xs:  # header line
                    continue
                raise ValueError(f"{path}: malformed row {row!r}")
            xs.append(x)
            vs.append(v)
    return piecewise_linear(xs, vs)


PRESETS = {
    "square-well": square_well,
    "gaussian": gaussian,
    "poeschl-teller": poeschl_teller,
    "zero": zero_potential,
}


# -- weight functions ---------------------------------------------------

@dataclass(frozen=True)
class WeightFunction:
    """A holomorphic weight f given by value and derivative evaluators."""

    name: str
    value: Callable
    derivative: Callable

    def __call__(self, z):
        return self.value(z)


def identity_weight():
    return WeightFunction("identity", lambda z: z, lambda z: np.ones_like(np.asarray(z)) * 1.0)


def power_weight(p):
    p = float(p)
    return WeightFunction(f"power{p:g}", lambda z: np.asarray(z) ** p,
                          lambda z: p * np.asarray(z) ** (p - 1))


WEIGHTS = {"identity": identity_weight}
