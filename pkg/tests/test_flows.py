import numpy as np
import pytest

from radonweights import systems
from radonweights._kernels import eval_poly, pack_fields, pack_polynomial, rk4_combination
from radonweights.flows import (cauchy_taylor, cc_ball, fd_jacobian_det, loglog_slope, numeric_flow)
from radonweights.jets import det_jacobian_taylor, psi_jet
from radonweights.poly import Polynomial, VectorField
from radonweights.words import lambda_at, tuple_degree

BACKENDS = ["numpy", "numba"]


@pytest.mark.parametrize("backend", BACKENDS)
def test_translation_exact(backend):
    X = VectorField.coordinate(0, 3)
    for h in (1.0, 0.3, 0.01):
        out = numeric_flow(X, [0.25, 1.0, -2.0], 1.5, h, backend)
        assert np.allclose(out, [1.75, 1.0, -2.0], rtol=0, atol=1e-14)


@pytest.mark.parametrize("backend", BACKENDS)
def test_parabola_closed_form(backend):
    par = systems.parabola()
    out = numeric_flow(par.fields[1], [0.0, 0.0, 0.0], 1.0, 0.1, backend)
    assert np.allclose(out, [1, 1, 1], atol=1e-10, rtol=0)


def test_rk4_order():
    # x' = x^3 from x(0)=1/2 has x(t) = 1/sqrt(4 - 2t)
    x = Polynomial.variable(0, 1)
    X = VectorField([x ** 3])
    exact = 1 / np.sqrt(4 - 2.0)
    errs = [abs(numeric_flow(X, [0.5], 1.0, h)[0] - exact) for h in (0.1, 0.05, 0.025)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(12 < r < 20 for r in ratios)


def test_step_guard():
    with pytest.raises(OverflowError):
        numeric_flow(VectorField.coordinate(0, 1), [0.0], 1.0, 1e-9)


def test_backends_agree():
    m3 = systems.moment_curve(3)
    I = ((1,), (2,), (1, 2), (1, 2, 2))
    packed = pack_fields([m3.table.field(w) for w in I])
    rng = np.random.default_rng(1)
    W = rng.uniform(-0.2, 0.2, size=(500, 4))
    Z = rng.uniform(-0.5, 0.5, size=(500, 4))
    a = rk4_combination(packed, W, Z, 4, "numpy")
    b = rk4_combination(packed, W, Z, 4, "numba")
    assert np.allclose(a, b, rtol=0, atol=1e-13)
    p = sum(Polynomial.variables(4), Polynomial.constant(1, 4)) ** 4
    e, c = pack_polynomial(p)
    assert np.allclose(eval_poly(e, c, Z, "numpy"), eval_poly(e, c, Z, "numba"), rtol=1e-12)


def test_complex_flow():
    par = systems.parabola()
    out = numeric_flow(par.fields[1], [0, 0, 0], 1j, 0.1)
    assert np.allclose(out, [1j, 1j, -1], atol=1e-10)


def test_fd_jacobian_commuting_frame():
    cf = systems.commuting_frame(3)
    vals = fd_jacobian_det(cf, (1, 2, 3), [0, 0, 0], np.zeros((2, 3)))
    assert np.allclose(vals, 1)


def test_cauchy_oracle_parabola():
    par = systems.parabola()
    J = (1, 2, 1)
    exact = det_jacobian_taylor(psi_jet(par, J, (0, 0, 0), 4))
    num = cauchy_taylor(par, J, [0.0, 0.0, 0.0], 3)
    for a, c in exact.items():
        if sum(a) <= 3:
            assert num[a] == pytest.approx(float(c), rel=1e-6)
    for a, v in num.items():
        if a not in exact:
            assert abs(v) < 1e-8


def test_cc_ball_shrinks_and_scales():
    par = systems.parabola()
    I = ((1,), (2,), (1, 2))
    x0 = (0, 0, 0)
    small = cc_ball(par, x0, I, (1, 1), 1e-6, 2000, 0)
    assert np.max(np.abs(small.points)) < 1e-5
    deltas = [2.0 ** -k for k in range(3, 7)]
    vols = [cc_ball(par, x0, I, (1, 1), d, 100_000, k).volume(40) for k, d in enumerate(deltas)]
    expected = sum(tuple_degree(I, 2))  # v0 . deg I with v0 = (1,1)
    assert loglog_slope(deltas, vols) == pytest.approx(expected, rel=0.1)
    # volume ~ delta^4 |lambda_I(x0)| with the parameter cube of volume 2^3
    ratio = vols[-1] / (deltas[-1] ** 4 * abs(float(lambda_at(par.table, I, x0))) * 8)
    assert 0.25 < ratio < 4


def test_cc_ball_frame_is_box():
    cf = systems.commuting_frame(3)
    cloud = cc_ball(cf, (0, 0, 0), ((1,), (2,), (3,)), (1, 1, 1), 0.5, 50_000, 3)
    assert np.allclose(cloud.points, cloud.params * 0.5)
    assert cloud.volume(16) == pytest.approx(1.0, rel=0.05)


def test_cc_ball_rejects_degenerate_tuple():
    with pytest.raises(ValueError):
        cc_ball(systems.t4_curve(), (0, 0, 0), ((1,), (2,), (1, 2)), (1, 1), 0.1, 10, 0)
