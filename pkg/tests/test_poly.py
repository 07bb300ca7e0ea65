from fractions import Fraction

import pytest

from radonweights.poly import (DimensionError, PolyMap, Polynomial, VectorField, as_fraction,
                               determinant_at, determinant_of_fields, hodge_star_fields, lie_bracket,
                               parse_polynomial, partial_derivative, poly_arith, pullback_field)

T, X1, X2 = Polynomial.variables(3)


def field(*comps):
    return VectorField([c if isinstance(c, Polynomial) else Polynomial.constant(c, 3) for c in comps])


def test_arith_basics():
    x = Polynomial.variable(0, 1)
    assert poly_arith("add", x, -x).is_zero()
    assert poly_arith("mul", x + 1, x - 1) == x ** 2 - 1


def test_compose_substitution():
    t = Polynomial.variable(0, 2)
    F = PolyMap([t, t ** 2], 2)
    x2 = Polynomial.variable(1, 2)
    assert poly_arith("compose", x2 ** 2, F) == t ** 4


def test_compose_dimension_mismatch():
    with pytest.raises(DimensionError):
        poly_arith("compose", X1, PolyMap([T, T], 3))


def test_partials():
    a, b = Polynomial.variables(2)
    assert partial_derivative(a ** 2 * b, 0) == 2 * a * b
    assert partial_derivative(a ** 3, 1).is_zero()
    assert partial_derivative(T ** 4, 0) == 4 * T ** 3


def test_bracket_examples():
    X = field(1, 0, 0)
    Y = field(1, 1, 2 * T)
    assert lie_bracket(X, X).is_zero()
    assert lie_bracket(X, Y) == field(0, 0, 2)
    a, b = Polynomial.variables(2)
    d1 = VectorField([Polynomial.constant(1, 2), Polynomial.zero(2)])
    x1d2 = VectorField([Polynomial.zero(2), a])
    assert lie_bracket(d1, x1d2) == VectorField([Polynomial.zero(2), Polynomial.constant(1, 2)])


def test_bracket_dimension_mismatch():
    with pytest.raises(DimensionError):
        lie_bracket(field(1, 0, 0), VectorField.coordinate(0, 2))


def test_determinants():
    frame = [VectorField.coordinate(i, 4) for i in range(4)]
    assert determinant_of_fields(frame) == Polynomial.constant(1, 4)
    assert determinant_of_fields([frame[0], frame[0], frame[2], frame[3]]).is_zero()
    fs = [field(1, 0, 0), field(1, 1, 2 * T), field(0, 0, 2)]
    assert determinant_of_fields(fs) == Polynomial.constant(2, 3)
    assert determinant_at(fs, (5, -1, 3)) == 2


def test_hodge_star_parabola():
    X1f, X2f = hodge_star_fields([PolyMap([X1, X2]), PolyMap([X1 - T, X2 - T ** 2])], 3)
    assert X1f in (field(1, 0, 0), field(-1, 0, 0))
    assert X2f in (field(1, 1, 2 * T), -field(1, 1, 2 * T))
    # tangent to the fibres
    for pi, X in ((PolyMap([X1 - T, X2 - T ** 2]), X2f), (PolyMap([X1, X2]), X1f)):
        assert all(X.apply(c).is_zero() for c in pi.components)


def test_hodge_star_loomis_whitney_2():
    a, b = Polynomial.variables(2)
    f1, f2 = hodge_star_fields([PolyMap([b]), PolyMap([a])], 2)
    e1, e2 = VectorField.coordinate(0, 2), VectorField.coordinate(1, 2)
    assert f1 in (e1, -e1)
    assert f2 in (e2, -e2)


def test_hodge_star_rejects_wrong_target():
    with pytest.raises(DimensionError):
        hodge_star_fields([PolyMap([X1])], 3)


def test_pullback():
    X = field(1, 0, 0)
    assert pullback_field(PolyMap.identity(3), X) == X
    shear = PolyMap([T, X1 + T ** 2, X2])
    assert pullback_field(shear, X) == field(1, -2 * T, 0)
    trans = PolyMap([T + 1, X1 - 2, X2])
    Y = field(3, 0, -1)
    assert pullback_field(trans, Y) == Y


def test_pullback_nonconstant_jacobian_needs_inverse():
    with pytest.raises(ValueError):
        pullback_field(PolyMap([T + T ** 3, X1, X2]), field(1, 0, 0))


def test_parse_polynomial():
    p = parse_polynomial("x2 - t**2/3 + 1", ["t", "x1", "x2"])
    assert p == X2 - T ** 2 * Fraction(1, 3) + 1
    with pytest.raises(ValueError):
        parse_polynomial("x1 + 0.5", ["t", "x1", "x2"])
    with pytest.raises(ValueError):
        parse_polynomial("y", ["t"])


def test_as_fraction_rejects_floats():
    assert as_fraction("3/4") == Fraction(3, 4)
    with pytest.raises(TypeError):
        as_fraction(0.5)
