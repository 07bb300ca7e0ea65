import random
from fractions import Fraction

import pytest

from radonweights import systems
from radonweights.arclength import (ExponentVector, MinimalityError, SystemSpec,
                                    diffeo_invariance_check, exponent_region_check,
                                    newton_polytope_at, newton_polytope_of_region, q_map,
                                    weight_rho)
from radonweights.poly import PolyMap, Polynomial, VectorField

F = Fraction
SAMPLES3 = [(F(1, 2), F(1, 3), F(-1, 4)), (F(-1, 2), F(2, 3), F(1, 5)), (F(1, 3), F(-1, 7), F(3, 4)),
            (F(2, 5), F(1, 2), F(-2, 3)), (F(-3, 4), F(1, 6), F(1, 2))]


def test_system_validation():
    X = VectorField.coordinate(0, 2)
    with pytest.raises(ValueError):
        SystemSpec(2, [X])
    with pytest.raises(ValueError):
        SystemSpec(2, [X, X], box=[(0, 1), (1, 1)])


def test_moment_curve_extremes():
    rep = newton_polytope_at(systems.moment_curve(3), (F(1, 3), 0, 0, 0), 9)
    assert rep.extreme_degrees() == {(3, 4), (4, 3)}
    assert all(e.certified for e in rep.extremes)


def test_xray_and_frame():
    rep = newton_polytope_at(systems.restricted_xray(), (1, F(1, 2), 0, 0), 9)
    assert rep.extreme_degrees() == {(3, 4)}
    rep = newton_polytope_at(systems.commuting_frame(3), (0, 0, 0), 5)
    assert rep.extreme_degrees() == {(1, 1, 1)}


def test_region_polytope():
    par = systems.parabola()
    one = newton_polytope_of_region(par, [(0, 0, 0)], 6)
    at = newton_polytope_at(par, (0, 0, 0), 6)
    assert one.generators() == at.generators()
    two = newton_polytope_of_region(par, [(0, 0, 0), (1, F(1, 2), -1)], 6)
    assert two.extreme_degrees() == {(2, 2)}
    t4 = systems.t4_curve()
    g0 = set(newton_polytope_at(t4, (0, 0, 0), 7).generators())
    g1 = set(newton_polytope_at(t4, (1, 0, 0), 7).generators())
    union = set(newton_polytope_of_region(t4, [(0, 0, 0), (1, 0, 0)], 7).generators())
    assert g0 <= g1
    assert union == g1


def test_weights():
    par = systems.parabola()
    w = weight_rho(par, ((1,), (2,), (1, 2)), (F(1, 5), 2, -1))
    assert w.radicand == 2 and w.exponent == F(1, 3)
    assert w.value == pytest.approx(2 ** (1 / 3), rel=1e-15)
    t4 = systems.t4_curve()
    assert weight_rho(t4, ((1,), (2,), (1, 2)), (0, 0, 0)).value == 0
    lw = systems.loomis_whitney(2)
    assert weight_rho(lw, ((1,), (2,)), (F(3, 7), -1)).value == 1


def test_q_map():
    assert q_map((2, 2)) == (F(2, 3), F(2, 3))
    assert q_map((3, 4)) == (F(1, 2), F(2, 3))
    with pytest.raises(ValueError):
        q_map((1, 0))
    rng = random.Random(7)
    for _ in range(50):
        b = tuple(F(rng.randint(1, 30), rng.randint(1, 9)) for _ in range(3))
        if sum(b) > 1 and sum(q_map(b)) > 1:
            assert q_map(q_map(b)) == b


def test_exponent_region():
    assert exponent_region_check((2, 2), ExponentVector(["8/5", "8/5"]))
    v = exponent_region_check((2, 2), ExponentVector(["3/2", "3/2"]))
    assert not v and len(v.reasons) == 2
    # zero entry of b0 waives strictness
    assert exponent_region_check((0, 2), ExponentVector(["inf", "1"]))


def test_exponent_vector_parsing():
    p = ExponentVector(["inf", "2"])
    assert p.reciprocal() == (0, F(1, 2))
    assert not p.finite()
    with pytest.raises(ValueError):
        ExponentVector(["1/2", "2"])


def shear():
    t, x1, x2 = Polynomial.variables(3)
    return PolyMap([t, x1 + t ** 2, x2])


def test_invariance_identity_maps():
    par = systems.parabola()
    idG = [PolyMap.identity(2)] * 2
    rep = diffeo_invariance_check(par, ((1,), (2,), (1, 2)), PolyMap.identity(3), idG, SAMPLES3)
    assert rep.holds and rep.minimal


def test_invariance_shear_and_reparametrisation():
    par = systems.parabola()
    t, x1, x2 = Polynomial.variables(3)
    idG = [PolyMap.identity(2)] * 2
    I0 = ((1,), (2,), (1, 2))
    assert diffeo_invariance_check(par, I0, shear(), idG, SAMPLES3).holds
    rep = diffeo_invariance_check(par, I0, PolyMap([t + t ** 3, x1, x2]), idG, SAMPLES3)
    assert rep.holds
    # the weight picks up |phi'|^(|b0|-1) = (1 + 3t^2)^3 at each sample
    for r in rep.rows:
        assert r.lhs == 2 * (1 + 3 * r.point[0] ** 2) ** 3


def test_invariance_non_minimal():
    cub = systems.cubic_graph()
    t, x1, x2 = Polynomial.variables(3)
    I0 = ((1,), (2,), (1, 2, 2))
    idG = [PolyMap.identity(2)] * 2
    with pytest.raises(MinimalityError):
        diffeo_invariance_check(cub, I0, PolyMap([t + t ** 3, x1, x2]), idG, SAMPLES3)
    rep = diffeo_invariance_check(cub, I0, PolyMap([t + t ** 3, x1, x2]), idG, SAMPLES3, force=True)
    assert not rep.minimal and not rep.holds
