"""Independent reference implementations used only by the tests."""
import numpy as np
from scipy import integrate, linalg


def piecewise_constant_scattering(k, pieces):
    """Transfer-matrix t, r_left, r_right for piecewise-constant V.

    pieces: list of (x_left, x_right, value) in increasing order.
    Each region carries psi = a e^{iqx} + b e^{-iqx}.
    """
    k = complex(k)

    def mat(q, x):
        e = np.exp(1j * q * x)
        return np.array([[e, 1 / e], [1j * q * e, -1j * q / e]])

    def q_of(v):
        q = np.sqrt(complex(k * k - v))
        return q if abs(q) > 1e-14 else 1e-14

    # propagate coefficient vector from the left free region to the right one
    total = np.eye(2, dtype=complex)
    q_prev = k
    for xl, xr, v in pieces:
        q = q_of(v)
        total = linalg.solve(mat(q, xl), mat(q_prev, xl)) @ total
        q_prev = q
        last_x = xr
    total = linalg.solve(mat(k, last_x), mat(q_prev, last_x)) @ total
    # left incidence: (1, r) -> (t, 0)
    r_left = -total[1, 0] / total[1, 1]
    t = total[0, 0] + total[0, 1] * r_left
    # right incidence: (0, t') -> (r', 1)
    t2 = 1.0 / total[1, 1]
    r_right = total[0, 1] * t2
    return t, r_left, r_right


def ode_scattering(potential, k, x_far=None):
    """t and reflections by integrating psi'' = (V - k^2) psi with DOP853."""
    lo, hi = potential.support
    x_far = x_far or (hi + 1.0)
    x_start = lo - 1.0

    def rhs(x, y):
        v = potential.eval(x)
        return [y[1], (v - k * k) * y[0]]

    # start from e^{-ikx} ... solve for right-incident wave: psi = t e^{-ikx} at left
    y0 = [np.exp(-1j * k * x_start), -1j * k * np.exp(-1j * k * x_start)]
    sol = integrate.solve_ivp(rhs, (x_start, x_far), np.array(y0, dtype=complex),
                              method="DOP853", rtol=1e-12, atol=1e-14,
                              max_step=0.01)
    psi, dpsi = sol.y[0, -1], sol.y[1, -1]
    x = x_far
    # psi = A e^{-ikx} + B e^{ikx}
    A = (psi - dpsi / (1j * k)) / 2 * np.exp(1j * k * x)
    B = (psi + dpsi / (1j * k)) / 2 * np.exp(-1j * k * x)
    t = 1 / A
    r1 = B / A
    return t, r1


def cell_average(potential, x, h, samples=1024):
    """Mean of V over [x - h/2, x + h/2]; keeps the scheme second order across jumps."""
    offsets = ((np.arange(samples) + 0.5) / samples - 0.5) * h
    return np.mean(potential.eval(x[:, None] + offsets[None, :]), axis=1)


def fd_eigenvalues(potential, L, n, count, bc="dirichlet"):
    """Lowest eigenvalues of -d2/dx2 + V on [-L, L] by a 3-point Laplacian."""
    from scipy.linalg import eigh_tridiagonal
    h = 2 * L / n
    if bc == "dirichlet":
        x = -L + h * np.arange(1, n)
        diag = 2 / h**2 + cell_average(potential, x, h)
        off = -np.ones(n - 2) / h**2
    else:
        raise ValueError(bc)
    vals = eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1),
                            eigvals_only=True)
    return vals
