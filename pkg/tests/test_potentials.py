import math

import numpy as np
import pytest
from scipy import integrate

from fermibox import potentials
from fermibox.exceptions import ConfigError


def test_square_well_values_and_support(well):
    assert well.eval(0.0) == -2.0
    assert well.eval(1.5) == 0.0
    assert well.support == (-1.0, 1.0)
    assert well.symmetric
    assert np.allclose(well.eval(np.array([-2.0, -0.5, 0.5, 2.0])), [0, -2, -2, 0])


def test_square_well_norms(well):
    assert well.l1_norm() == pytest.approx(4.0, rel=1e-12)
    assert well.integral() == pytest.approx(-4.0, rel=1e-12)
    assert well.sup_norm() == pytest.approx(2.0)


def test_bad_square_well():
    with pytest.raises(ValueError):
        potentials.square_well(-1.0, 1.0, -1.0)


def test_gaussian_truncation_keeps_mass():
    g = potentials.gaussian(1.5, 0.7)
    exact = 1.5 * 0.7 * math.sqrt(2 * math.pi)
    assert g.integral() == pytest.approx(exact, abs=1e-10)
    lo, hi = g.support
    assert abs(g.eval(hi - 1e-9)) < 1e-11


def test_poeschl_teller_integral():
    pt = potentials.poeschl_teller(-2.0, 1.0)
    # integral of sech^2 over the line is 2
    assert pt.integral() == pytest.approx(-4.0, abs=1e-10)


def test_scaled_and_reflected():
    p = potentials.piecewise_linear([-1.0, 0.0, 2.0], [0.0, 3.0, 0.0])
    assert p.scaled(2.0).eval(0.0) == pytest.approx(6.0)
    r = p.reflected()
    xs = np.linspace(-2, 2, 17)
    assert np.allclose(r.eval(xs), p.eval(-xs))
    assert r.support == (-2.0, 1.0)


def test_piecewise_linear_integral_matches_quad():
    xs = [-1.0, -0.2, 0.5, 1.3]
    vs = [0.0, -1.0, 2.0, 0.0]
    p = potentials.piecewise_linear(xs, vs)
    ref, _ = integrate.quad(lambda x: np.interp(x, xs, vs), -1.0, 1.3, points=xs[1:-1])
    assert p.integral() == pytest.approx(ref, rel=1e-12)


def test_piecewise_linear_rejects_unsorted():
    with pytest.raises(ValueError):
        potentials.piecewise_linear([0.0, -1.0], [1.0, 2.0])


def test_load_table(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("x,V\n-1,0\n0,-1\n1,0\n")
    p = potentials.load_table(path)
    assert p.eval(0.0) == pytest.approx(-1.0)
    assert p.l1_norm() == pytest.approx(1.0)


def test_load_table_malformed(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("-1,0\n0,oops\n")
    with pytest.raises(ValueError):
        potentials.load_table(path)


def test_zero_potential_is_zero():
    assert potentials.zero_potential().is_zero


def test_weights():
    f = potentials.power_weight(2.0)
    assert f(3.0) == pytest.approx(9.0)
    assert f.derivative(3.0) == pytest.approx(6.0)
    g = potentials.identity_weight()
    assert g.derivative(2.0) == pytest.approx(1.0)


def test_config_error_is_value_error():
    assert issubclass(ConfigError, ValueError)
