from fractions import Fraction

import pytest

from radonweights import systems
from radonweights.poly import Polynomial, VectorField
from radonweights.words import (BracketTable, canonical, contract, enumerate_degree_tuples,
                                enumerate_words, jacobi_expand, lambda_I, lambda_at,
                                minimality_check, minimality_witness, nonvanishing_tuples,
                                tuple_degree, word_degree, words_of_degree_at_most)


def test_word_counts():
    assert enumerate_words(2, 1) == [(1,), (2,)]
    assert len(enumerate_words(2, 2)) == 6
    assert len(enumerate_words(3, 2)) == 12


def test_word_degree():
    assert word_degree((1, 2, 2), 2) == (1, 2)
    assert tuple_degree([(1,), (2,), (1, 2)], 2) == (2, 2)
    with pytest.raises(ValueError):
        word_degree((3,), 2)


def test_words_of_degree_at_most():
    ws = words_of_degree_at_most((1, 1))
    assert sorted(ws) == sorted([(1,), (2,), (1, 2), (2, 1)])


def test_bracket_fields_parabola():
    sys = systems.parabola()
    tab = sys.table
    assert tab.field((1,)) == sys.fields[0]
    assert tab.field((1, 1)).is_zero()
    c = tab.field((1, 2))
    assert c.components[0].is_zero() and c.components[1].is_zero()
    assert abs(c.components[2].constant_value()) == 2


def test_jacobi_expansions():
    assert jacobi_expand((1, 2), (1,)) == {(1, 2, 1): 1}
    assert jacobi_expand((1,), (2, 1)) == {(1, 2, 1): 1}
    assert jacobi_expand((1, 2), (1, 2)) == {}


def test_jacobi_expand_matches_direct_bracket():
    from radonweights.poly import lie_bracket
    sys = systems.moment_curve(3)
    tab = sys.table
    for w in tab.nonzero_words(3):
        for wp in [(1,), (2,), (1, 2), (2, 1)]:
            direct = lie_bracket(tab.field(w), tab.field(wp))
            assert contract(tab, jacobi_expand(w, wp)) == direct


def test_lambda_examples():
    par = systems.parabola()
    assert lambda_I(par.table, [(1,), (2,), (1, 2)]).is_constant()
    assert abs(lambda_at(par.table, [(1,), (2,), (1, 2)], (3, 1, 2))) == 2
    xr = systems.restricted_xray()
    lam = lambda_I(xr.table, [(1,), (2,), (1, 2), (1, 2, 2)])
    assert lam.is_constant() and abs(lam.constant_value()) == 2
    assert lambda_I(par.table, [(1,), (1,), (2,)]).is_zero()


def test_degree_tuples():
    single = enumerate_degree_tuples(3, (2, 1))
    assert all(len(w) == 1 for I in single for w in I)
    both = enumerate_degree_tuples(3, (2, 2))
    assert canonical([(1,), (2,), (1, 2)]) in both
    assert canonical([(1,), (2,), (2, 1)]) in both
    assert enumerate_degree_tuples(3, (1, 1)) == []


def test_minimality():
    par = systems.parabola()
    assert minimality_check(par.table, (2, 2))
    cf = systems.commuting_frame(3)
    assert minimality_check(cf.table, (1, 1, 1))
    # (1,1,1) lies strictly below (2,1,1) and its determinant is 1
    assert not minimality_check(cf.table, (2, 1, 1))
    deg, I = minimality_witness(cf.table, (2, 1, 1))
    assert deg == (1, 1, 1)


def test_nonvanishing_tuples_are_independent():
    par = systems.parabola()
    recs = list(nonvanishing_tuples(par.table, (0, 0, 0), 5))
    assert recs
    for r in recs:
        assert r.value == lambda_at(par.table, r.words, (0, 0, 0)) != 0
        assert r.degree == tuple_degree(r.words, 2)
    assert {r.degree for r in recs if sum(r.degree) == 4} == {(2, 2)}


def test_bracket_table_single_field_vanishes():
    d = 2
    X = VectorField([Polynomial.constant(1, d), Polynomial.variable(0, d)])
    tab = BracketTable([X, X])
    assert tab.field((1, 2)).is_zero()
    assert tab.nonzero_words(3) == [(1,), (2,)]
