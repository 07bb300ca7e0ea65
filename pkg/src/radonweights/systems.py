"""Fixture systems: the worked examples plus a few test curves.

Each builder returns a :class:`~radonweights.arclength.SystemSpec`.  Curves
are given by integer coefficient lists so that everything stays exact.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .arclength import SystemSpec
from .poly import Polynomial, PolyMap, VectorField


def _curve(coeffs: Sequence[Sequence], t: Polynomial) -> list[Polynomial]:
    """``gamma_i(t) = sum_n coeffs[i][n] t^n``."""
    out = []
    for row in coeffs:
        acc = t * 0
        for n, c in enumerate(row):
            if c:
                acc = acc + (t ** n) * Fraction(c)
        out.append(acc)
    return out


def monomial_curve(d: int) -> list[list[int]]:
    """Coefficients of ``(t, t^2, ..., t^d)``."""
    return [[1 if n == i + 1 else 0 for n in range(d + 1)] for i in range(d)]


def translation_invariant(coeffs: Sequence[Sequence], box=None, N=None, name=None) -> SystemSpec:
    """``pi_1(t, x) = x`` and ``pi_2(t, x) = x - gamma(t)`` on R^(1+n)."""
    n = len(coeffs)
    D = n + 1
    v = Polynomial.variables(D)
    t, xs = v[0], v[1:]
    gamma = _curve(coeffs, t)
    pi1 = PolyMap(xs)
    pi2 = PolyMap([x - g for x, g in zip(xs, gamma)])
    box = box or [(Fraction(-1), Fraction(1))] * D
    names = ["t"] + [f"x{i + 1}" for i in range(n)]
    return SystemSpec.from_submersions([pi1, pi2], box=box, N=N, names=names,
                                       name=name or "translation-invariant")


def parabola(**kw) -> SystemSpec:
    return translation_invariant(monomial_curve(2), name="parabola", **kw)


def moment_curve(d: int, **kw) -> SystemSpec:
    return translation_invariant(monomial_curve(d), name=f"moment-curve-{d}", **kw)


def t4_curve(**kw) -> SystemSpec:
    """gamma = (t, t^4): affine arclength degenerates at t = 0."""
    return translation_invariant([[0, 1], [0, 0, 0, 0, 1]], name="t4-curve", **kw)


def gamma_c(c, **kw) -> SystemSpec:
    """gamma_c = (t, c t^2 + t^3)."""
    return translation_invariant([[0, 1], [0, 0, Fraction(c), 1]], name=f"gamma_c={c}", **kw)


def cubic_graph(**kw) -> SystemSpec:
    """gamma = (t, t^3); the tuple ((1),(2),(1,2,2)) of degree (2,3) is not minimal."""
    return translation_invariant([[0, 1], [0, 0, 0, 1]], name="cubic-graph", **kw)


def restricted_xray(coeffs: Sequence[Sequence] | None = None, box=None, N=None) -> SystemSpec:
    """``pi_1(s,t,x) = (t,x)``, ``pi_2(s,t,x) = (s, x - s gamma(t))`` on R^(2+n)."""
    coeffs = monomial_curve(2) if coeffs is None else coeffs
    n = len(coeffs)
    D = n + 2
    v = Polynomial.variables(D)
    s, t, xs = v[0], v[1], v[2:]
    gamma = _curve(coeffs, t)
    pi1 = PolyMap([t] + xs)
    pi2 = PolyMap([s] + [x - s * g for x, g in zip(xs, gamma)])
    box = box or [(Fraction(1, 2), Fraction(3, 2))] + [(Fraction(-1), Fraction(1))] * (D - 1)
    names = ["s", "t"] + [f"x{i + 1}" for i in range(n)]
    return SystemSpec.from_submersions([pi1, pi2], box=box, N=N, names=names,
                                       name="restricted-xray")


def loomis_whitney(d: int, box=None, N=None) -> SystemSpec:
    """Linear coordinate projections ``pi_j`` forgetting ``x_j``."""
    v = Polynomial.variables(d)
    pis = [PolyMap([v[i] for i in range(d) if i != j]) for j in range(d)]
    box = box or [(Fraction(-1), Fraction(1))] * d
    return SystemSpec.from_submersions(pis, box=box, N=N, name=f"loomis-whitney-{d}")


def commuting_frame(d: int, box=None, N=None) -> SystemSpec:
    fields = [VectorField.coordinate(i, d) for i in range(d)]
    box = box or [(Fraction(-1), Fraction(1))] * d
    return SystemSpec(d, fields, box=box, N=N, name=f"commuting-frame-{d}")


def remark_system(d: int = 3, box=None, N=None) -> SystemSpec:
    """``X_0 = d_t`` and ``X_i = d_t - gamma'(t).grad_x`` (i = 1..d), gamma = (t,...,t^d).

    Letter 1 is ``X_0``; letters 2..d+1 are the d copies.
    """
    D = d + 1
    t = Polynomial.variable(0, D)
    gamma = _curve(monomial_curve(d), t)
    X0 = VectorField.coordinate(0, D)
    Xi = VectorField([Polynomial.constant(1, D)] + [-g.diff(0) for g in gamma])
    box = box or [(Fraction(-1), Fraction(1))] * D
    names = ["t"] + [f"x{i + 1}" for i in range(d)]
    return SystemSpec(D, [X0] + [Xi] * d, box=box, N=N, names=names, name=f"remark-{d}")


FIXTURES = {
    "parabola": parabola,
    "moment-curve-3": lambda: moment_curve(3),
    "restricted-xray": restricted_xray,
    "loomis-whitney-2": lambda: loomis_whitney(2),
    "loomis-whitney-3": lambda: loomis_whitney(3),
    "commuting-frame-3": lambda: commuting_frame(3),
    "remark-3": lambda: remark_system(3),
    "t4-curve": t4_curve,
}
