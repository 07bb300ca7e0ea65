"""Truncated power series (jets), exact flow maps Psi^J and the polytope
built from Taylor coefficients of det D_t Psi^J at t = 0.

Jets are generic in the coefficient ring: Fractions for evaluation at a
rational base point, :class:`Polynomial` when the base point is symbolic.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .arclength import NewtonPolytopeReport, SystemSpec, newton_polytope_at, root, _mark_extremes
from .poly import Polynomial, VectorField, as_fraction, determinant, evaluate_in_ring
from .polytope import UpwardPolytope, contains, dot
from .words import Degree, enumerate_degree_tuples, lambda_at

Exp = tuple[int, ...]


class Jet:
    """Power series in ``nvars`` variables truncated at total degree ``order``."""

    __slots__ = ("nvars", "order", "coeffs")

    def __init__(self, nvars: int, order: int, coeffs: dict | None = None):
        self.nvars = nvars
        self.order = order
        self.coeffs = {e: c for e, c in (coeffs or {}).items() if c and sum(e) <= order}

    @classmethod
    def _raw(cls, nvars, order, coeffs):
        j = cls.__new__(cls)
        j.nvars, j.order, j.coeffs = nvars, order, coeffs
        return j

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        return cls._raw(nvars, order, {(0,) * nvars: value} if value else {})

    @classmethod
    def variable(cls, i: int, nvars: int, order: int) -> "Jet":
        e = tuple(int(j == i) for j in range(nvars))
        return cls._raw(nvars, order, {e: Fraction(1)} if order >= 1 else {})

    def one_like(self) -> "Jet":
        return Jet.constant(Fraction(1), self.nvars, self.order)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return self.nvars == other.nvars and self.order == other.order and self.coeffs == other.coeffs

    def __repr__(self):
        body = " + ".join(f"{c}*t^{e}" for e, c in sorted(self.coeffs.items())) or "0"
        return f"Jet[{self.order}]({body})"

    def constant_term(self):
        return self.coeffs.get((0,) * self.nvars, 0)

    def _match(self, other: "Jet") -> int:
        if other.nvars != self.nvars:
            raise ValueError("jets in different numbers of variables")
        return min(self.order, other.order)

    def __add__(self, other):
        if not isinstance(other, Jet):
            if not other:
                return self
            other = Jet.constant(other, self.nvars, self.order)
        order = self._match(other)
        out = {e: c for e, c in self.coeffs.items() if sum(e) <= order}
        for e, c in other.coeffs.items():
            if sum(e) > order:
                continue
            v = out.get(e)
            v = c if v is None else v + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Jet._raw(self.nvars, order, out)

    __radd__ = __add__

    def __neg__(self):
        return Jet._raw(self.nvars, self.order, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            if not other:
                return Jet._raw(self.nvars, self.order, {})
            return Jet._raw(self.nvars, self.order,
                            {e: v for e, c in self.coeffs.items() if (v := c * other)})
        order = self._match(other)
        a = sorted(self.coeffs.items(), key=lambda kv: sum(kv[0]))
        b = sorted(other.coeffs.items(), key=lambda kv: sum(kv[0]))
        bdeg = [sum(e) for e, _ in b]
        out: dict = {}
        for ea, ca in a:
            room = order - sum(ea)
            if room < 0:
                break
            for (eb, cb), db in zip(b, bdeg):
                if db > room:
                    break
                e = tuple(x + y for x, y in zip(ea, eb))
                v = out.get(e)
                out[e] = ca * cb if v is None else v + ca * cb
        return Jet._raw(self.nvars, order, {e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        return self * other

    def diff(self, i: int) -> "Jet":
        """Derivative in variable i; the result is only reliable to order - 1."""
        out = {}
        for e, c in self.coeffs.items():
            if e[i]:
                out[e[:i] + (e[i] - 1,) + e[i + 1:]] = c * e[i]
        return Jet._raw(self.nvars, max(self.order - 1, 0), out)

    def integrate(self, i: int) -> "Jet":
        """Antiderivative in variable i vanishing at t_i = 0."""
        out = {}
        for e, c in self.coeffs.items():
            if sum(e) + 1 <= self.order:
                out[e[:i] + (e[i] + 1,) + e[i + 1:]] = c * Fraction(1, e[i] + 1)
        return Jet._raw(self.nvars, self.order, out)

    def map_coeffs(self, f) -> "Jet":
        return Jet(self.nvars, self.order, {e: f(c) for e, c in self.coeffs.items()})


def flow_jet(X: VectorField, x0, order: int) -> list[Jet]:
    """Taylor jet in t of ``e^{tX}(x0)`` by Picard iteration (exact)."""
    if order < 1:
        raise ValueError("jet order must be at least 1")
    start = [Jet.constant(v, 1, order) for v in x0]
    one = Jet.constant(Fraction(1), 1, order)
    z = start
    for _ in range(order + 1):
        vel = [evaluate_in_ring(comp, z, one) for comp in X.components]
        new = [s + v.integrate(0) for s, v in zip(start, vel)]
        if new == z:
            break
        z = new
    return z


def flow_polynomial(X: VectorField, order: int) -> list[Polynomial]:
    """Flow ``e^{sX}(y)`` as polynomials in ``(s, y)`` truncated at ``s^order``."""
    d = X.dim
    ys = Polynomial.variables(d)
    comps = flow_jet(X, ys, order)
    out = []
    for jet in comps:
        terms = {}
        for (n,), poly in jet.coeffs.items():
            poly = poly if isinstance(poly, Polynomial) else Polynomial.constant(poly, d)
            for e, c in poly.terms.items():
                terms[(n,) + e] = c
        out.append(Polynomial(d + 1, terms))
    return out


@dataclass
class FlowJet:
    J: tuple[int, ...]
    x0: tuple
    order: int
    components: list[Jet]


class FlowCache:
    """Per-system cache of flow polynomials, keyed by (letter, order)."""

    def __init__(self, sys: SystemSpec):
        self.sys = sys
        self._flows: dict = {}

    def flow(self, letter: int, order: int) -> list[Polynomial]:
        key = (letter, order)
        if key not in self._flows:
            self._flows[key] = flow_polynomial(self.sys.fields[letter - 1], order)
        return self._flows[key]


def psi_jet(sys: SystemSpec, J: Sequence[int], x0, order: int,
            cache: FlowCache | None = None) -> FlowJet:
    """Jet of ``Psi^J(t) = e^{t_d X_{J_d}} o ... o e^{t_1 X_{J_1}}(x0)``.

    ``x0`` may hold rationals or polynomials (symbolic base point).
    """
    d = sys.d
    J = tuple(int(j) for j in J)
    if len(J) != d:
        raise ValueError(f"J must have length {d}")
    cache = cache or FlowCache(sys)
    x0 = tuple(v if isinstance(v, Polynomial) else as_fraction(v) for v in x0)
    y = [Jet.constant(v, d, order) for v in x0]
    one = Jet.constant(Fraction(1), d, order)
    for l, letter in enumerate(J):
        phi = cache.flow(letter, order)
        args = [Jet.variable(l, d, order)] + y
        y = [evaluate_in_ring(p, args, one) for p in phi]
    return FlowJet(J, x0, order, y)


def det_jacobian_jet(fj: FlowJet) -> Jet:
    d = len(fj.components)
    mat = [[c.diff(j) for j in range(d)] for c in fj.components]
    zero = Jet._raw(d, max(fj.order - 1, 0), {})
    return determinant(mat, zero)


def det_jacobian_taylor(fj: FlowJet) -> dict[Exp, object]:
    """Nonzero coefficients ``c_alpha = d^alpha det D_t Psi(0) / alpha!``, |alpha| <= order - 1."""
    if fj.order < 1:
        raise ValueError("flow jet order must be at least 1")
    return dict(det_jacobian_jet(fj).coeffs)


def factorial_multi(alpha: Exp) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def derivative_value(alpha: Exp, coef):
    """``d^alpha`` from the stored ``c_alpha``."""
    return coef * factorial_multi(alpha)


def deg_J(J: Sequence[int], k: int) -> Degree:
    out = [0] * k
    for j in J:
        out[j - 1] += 1
    return tuple(out)


def deg_J_alpha(J: Sequence[int], alpha: Exp, k: int) -> Degree:
    out = [0] * k
    for j, a in zip(J, alpha):
        out[j - 1] += a
    return tuple(out)


@dataclass(frozen=True)
class JDegreeData:
    J: tuple[int, ...]
    k: int

    @property
    def degree(self) -> Degree:
        return deg_J(self.J, self.k)

    def of(self, alpha: Exp) -> Degree:
        return deg_J_alpha(self.J, alpha, self.k)

    def total(self, alpha: Exp) -> Degree:
        return tuple(a + b for a, b in zip(self.degree, self.of(alpha)))


@dataclass
class TildeEntry:
    J: tuple[int, ...]
    alpha: Exp
    coefficient: Fraction

    @property
    def derivative(self) -> Fraction:
        return derivative_value(self.alpha, self.coefficient)


def _all_J(k: int, d: int, cap: Degree | None = None):
    for J in itertools.product(range(1, k + 1), repeat=d):
        if cap is None or all(a <= c for a, c in zip(deg_J(J, k), cap)):
            yield J


def coefficient_entries(sys: SystemSpec, x0, order: int, cap: Degree | None = None,
                        cache: FlowCache | None = None) -> list[TildeEntry]:
    """Every nonzero Taylor coefficient, over all J (optionally with deg J <= cap)."""
    cache = cache or FlowCache(sys)
    out = []
    for J in _all_J(sys.k, sys.d, cap):
        fj = psi_jet(sys, J, x0, order, cache)
        for alpha, c in sorted(det_jacobian_taylor(fj).items()):
            out.append(TildeEntry(J, alpha, c))
    return out


def tilde_polytope_at(sys: SystemSpec, x0, M: int) -> NewtonPolytopeReport:
    """Generators ``deg J + deg_J alpha`` over nonzero coefficients with |alpha| <= M - 1."""
    if M < 1:
        raise ValueError("jet order must be at least 1")
    x0 = tuple(as_fraction(v) for v in x0)
    entries = coefficient_entries(sys, x0, M)
    by_degree: dict = {}
    for e in entries:
        b = JDegreeData(e.J, sys.k).total(e.alpha)
        by_degree.setdefault(b, []).append(e)
    P = UpwardPolytope(sys.k, by_degree)
    level = sys.d + M - 1
    return NewtonPolytopeReport(level, P, _mark_extremes(P, level), x0=x0, tuples=by_degree,
                                note=f"jet side, order {M} (complete for |b|_1 <= {level})")


@dataclass
class PolytopeComparison:
    level: int
    missing_from_tilde: list  # generators of P not in the tilde polytope
    missing_from_lambda: list

    @property
    def agree(self) -> bool:
        return not self.missing_from_tilde and not self.missing_from_lambda


def compare_polytopes(lam: NewtonPolytopeReport, tilde: NewtonPolytopeReport) -> PolytopeComparison:
    """Mutual membership of generators up to the common complete level."""
    level = min(lam.N, tilde.N)
    A = lam.polytope.truncated(level)
    B = tilde.polytope.truncated(level)
    miss_t = [b for b in A.sorted_generators() if not contains(B, b)]
    miss_l = [b for b in B.sorted_generators() if not contains(A, b)]
    return PolytopeComparison(level, miss_t, miss_l)


@dataclass
class EquivalenceReport:
    b0: Degree
    N: int
    M: int
    extreme: bool
    S_lambda: Fraction
    S_psi: Fraction
    lambda_terms: list = field(default_factory=list)
    psi_terms: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ratio(self) -> Fraction | None:
        if self.S_lambda and self.S_psi:
            return self.S_psi / self.S_lambda
        return None

    @property
    def zero_equivalent(self) -> bool:
        return (self.S_lambda == 0) == (self.S_psi == 0)

    @property
    def verdict(self) -> str:
        if self.zero_equivalent:
            return "pass" if self.extreme else "pass (b0 not extreme)"
        if not self.extreme and self.S_lambda > 0 and self.S_psi == 0:
            return "non-extreme failure reproduced"
        return "fail"


def s_lambda(sys: SystemSpec, x0, b0: Degree):
    terms = []
    for I in enumerate_degree_tuples(sys.d, b0):
        if len(set(I)) < sys.d:
            continue
        v = lambda_at(sys.table, I, x0)
        if v:
            terms.append((I, v))
    return sum((abs(v) for _, v in terms), Fraction(0)), terms


def s_psi(sys: SystemSpec, x0, b0: Degree, M: int, cache: FlowCache | None = None):
    k, d = sys.k, sys.d
    need = sum(b0) - d
    if need > M - 1:
        raise ValueError(f"jet order {M} too small for |b0|_1 = {sum(b0)}")
    terms = []
    cache = cache or FlowCache(sys)
    for J in _all_J(k, d, b0):
        fj = psi_jet(sys, J, x0, need + 1, cache)
        data = JDegreeData(J, k)
        for alpha, c in det_jacobian_taylor(fj).items():
            if sum(alpha) == need and data.total(alpha) == tuple(b0):
                terms.append(TildeEntry(J, alpha, c))
    return sum((abs(t.derivative) for t in terms), Fraction(0)), terms


def equivalence_report(sys: SystemSpec, x0, b0, N: int | None = None,
                       M: int | None = None) -> EquivalenceReport:
    """Both sides of the lambda / Jacobian-coefficient comparison at degree b0, exactly.

    Tuples are counted once per canonical (sorted) representative.
    """
    x0 = tuple(as_fraction(v) for v in x0)
    b0 = tuple(int(v) for v in b0)
    N = sys.default_N(b0) if N is None else N
    M = sum(b0) + 1 if M is None else M
    rep = newton_polytope_at(sys, x0, N)
    extreme = b0 in rep.extreme_degrees()
    warnings = [] if extreme else [f"b0 = {b0} is not an extreme point of the truncated polytope"]
    SL, lt = s_lambda(sys, x0, b0)
    SP, pt = s_psi(sys, x0, b0, M)
    return EquivalenceReport(b0, N, M, extreme, SL, SP, lt, pt, warnings)


@dataclass
class VanishingReport:
    v0: tuple
    level: Fraction
    checked: int
    violations: list

    @property
    def holds(self) -> bool:
        return not self.violations


def vanishing_check(sys: SystemSpec, x0, b0, v0, M: int) -> VanishingReport:
    """Coefficients with ``v0.(deg J + deg_J alpha) < v0.b0`` must be exactly zero."""
    level = dot(v0, b0)
    k = sys.k
    checked, bad = 0, []
    cache = FlowCache(sys)
    for J in _all_J(k, sys.d):
        data = JDegreeData(J, k)
        if dot(v0, data.degree) >= level:
            continue
        fj = psi_jet(sys, J, x0, M, cache)
        coeffs = det_jacobian_taylor(fj)
        for alpha in _alphas(sys.d, M - 1):
            if dot(v0, data.total(alpha)) < level:
                checked += 1
                if coeffs.get(alpha):
                    bad.append((J, alpha, coeffs[alpha]))
    return VanishingReport(tuple(v0), level, checked, bad)


def _alphas(d: int, n: int):
    for total in range(n + 1):
        for c in itertools.combinations_with_replacement(range(d), total):
            a = [0] * d
            for i in c:
                a[i] += 1
            yield tuple(a)


@dataclass(frozen=True)
class TildeWeight:
    radicand: Fraction
    exponent: Fraction
    value: float


def _tilde_b0(sys, J0, beta0):
    data = JDegreeData(tuple(J0), sys.k)
    b0 = data.total(tuple(beta0))
    if sum(b0) < 2:
        raise ValueError("|b0|_1 must be at least 2")
    return b0


def weight_rho_tilde(sys: SystemSpec, J0, beta0, x, cache: FlowCache | None = None) -> TildeWeight:
    b0 = _tilde_b0(sys, J0, beta0)
    beta0 = tuple(beta0)
    fj = psi_jet(sys, J0, x, sum(beta0) + 1, cache)
    c = det_jacobian_taylor(fj).get(beta0, Fraction(0))
    rad = abs(derivative_value(beta0, c))
    e = Fraction(1, sum(b0) - 1)
    return TildeWeight(rad, e, root(rad, e))


def rho_tilde_radicand(sys: SystemSpec, J0, beta0) -> Polynomial:
    """``d^beta0 det D_t Psi_x^{J0}(0)`` as a polynomial in the base point x."""
    _tilde_b0(sys, J0, beta0)
    beta0 = tuple(beta0)
    xs = Polynomial.variables(sys.d)
    fj = psi_jet(sys, J0, xs, sum(beta0) + 1)
    c = det_jacobian_taylor(fj).get(beta0)
    if c is None:
        return Polynomial.zero(sys.d)
    c = c if isinstance(c, Polynomial) else Polynomial.constant(c, sys.d)
    return c.scale(factorial_multi(beta0))


def coefficients_csv(entries: Iterable[TildeEntry], k: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["J", "alpha", "degree", "coefficient", "derivative"])
    for e in entries:
        deg = JDegreeData(e.J, k).total(e.alpha)
        w.writerow([" ".join(map(str, e.J)), " ".join(map(str, e.alpha)),
                    " ".join(map(str, deg)), str(e.coefficient), str(e.derivative)])
    return buf.getvalue()
