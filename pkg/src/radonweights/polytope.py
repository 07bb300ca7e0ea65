"""Upward-closed polytopes P(B) = ch U_{b in B} (b + [0, inf)^k).

Everything is exact: memberships come from rational LPs and every certificate
or witness can be replayed with plain Fraction arithmetic.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .lp import solve_standard
from .poly import as_fraction

Point = tuple[Fraction, ...]


class MemberError(ValueError):
    """Raised when a construction needs b0 outside the polytope but it is inside."""


def _point(b) -> Point:
    return tuple(as_fraction(v) for v in b)


@dataclass(frozen=True)
class UpwardPolytope:
    k: int
    generators: frozenset

    def __init__(self, k: int, generators: Iterable = ()):
        gens = set()
        for b in generators:
            b = tuple(int(v) for v in b)
            if len(b) != k or min(b, default=0) < 0:
                raise ValueError(f"generator {b} is not in Z_{{>=0}}^{k}")
            gens.add(b)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "generators", frozenset(gens))

    def sorted_generators(self) -> list[tuple[int, ...]]:
        return sorted(self.generators, key=lambda b: (sum(b), b))

    def __contains__(self, b) -> bool:
        return membership(self, b) is not None

    def __len__(self):
        return len(self.generators)

    def truncated(self, level: int) -> "UpwardPolytope":
        return UpwardPolytope(self.k, (b for b in self.generators if sum(b) <= level))

    def without(self, b) -> "UpwardPolytope":
        return UpwardPolytope(self.k, self.generators - {tuple(b)})


@dataclass(frozen=True)
class MembershipCertificate:
    support: tuple  # ((generator, weight), ...)
    slack: Point

    def verify(self, b0) -> bool:
        b0 = _point(b0)
        if any(w < 0 for _, w in self.support) or any(s < 0 for s in self.slack):
            return False
        if sum(w for _, w in self.support) != 1:
            return False
        k = len(b0)
        if len(self.support) > k + 1:
            return False
        combo = [sum((w * g[i] for g, w in self.support), Fraction(0)) + self.slack[i]
                 for i in range(k)]
        return tuple(combo) == b0


@dataclass(frozen=True)
class SeparationWitness:
    v0: Point
    epsilon: Fraction

    def verify(self, generators: Iterable, b0) -> bool:
        """``v0 in (eps, 1]^k`` and ``v0.b0 + eps < v0.b`` for every generator."""
        b0 = _point(b0)
        eps = self.epsilon
        if eps <= 0 or any(not (eps < v <= 1) for v in self.v0):
            return False
        level = dot(self.v0, b0) + eps
        return all(dot(self.v0, b) > level for b in generators)


def dot(u, v) -> Fraction:
    return sum((Fraction(a) * b for a, b in zip(u, v)), Fraction(0))


def caratheodory_reduce(points: Sequence, weights: Sequence[Fraction]):
    """Shrink a convex combination to at most k+1 points with the same barycentre."""
    pts = [tuple(Fraction(v) for v in p) for p in points]
    ws = [Fraction(w) for w in weights]
    k = len(pts[0]) if pts else 0
    while True:
        live = [i for i, w in enumerate(ws) if w > 0]
        if len(live) <= k + 1:
            return [(pts[i], ws[i]) for i in live]
        # affine dependence: sum c_i p_i = 0, sum c_i = 0, c != 0
        cols = live[: k + 2]
        mat = [[pts[i][r] for i in cols] for r in range(k)] + [[Fraction(1)] * len(cols)]
        c = _null_vector(mat)
        if not any(x > 0 for x in c):
            c = [-x for x in c]
        t = min(ws[i] / x for i, x in zip(cols, c) if x > 0)
        for i, x in zip(cols, c):
            ws[i] -= t * x
        # exact arithmetic: the minimising weight is now exactly zero


def _null_vector(mat: list[list[Fraction]]) -> list[Fraction]:
    rows = [list(r) for r in mat]
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        rows[r] = [a / p for a in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    free = next(c for c in range(ncols) if c not in pivots)
    vec = [Fraction(0)] * ncols
    vec[free] = Fraction(1)
    for i, c in enumerate(pivots):
        vec[c] = -rows[i][free]
    return vec


def membership(P: UpwardPolytope, b0) -> MembershipCertificate | None:
    """Certificate that b0 lies in P (support <= k+1), or None when it does not."""
    b0 = _point(b0)
    if len(b0) != P.k:
        raise ValueError(f"query of length {len(b0)} for k={P.k}")
    if any(v < 0 for v in b0):
        raise ValueError("query point must have nonnegative coordinates")
    gens = P.sorted_generators()
    if not gens:
        return None
    for g in gens:
        if all(a <= b for a, b in zip(g, b0)):
            return MembershipCertificate(((g, Fraction(1)),), tuple(b - a for a, b in zip(g, b0)))
    k, m = P.k, len(gens)
    # columns: theta_1..theta_m, slack_1..slack_k
    A = [[Fraction(g[i]) for g in gens] + [Fraction(int(j == i)) for j in range(k)]
         for i in range(k)]
    A.append([Fraction(1)] * m + [Fraction(0)] * k)
    res = solve_standard(A, list(b0) + [Fraction(1)])
    if res.status != "optimal":
        return None
    theta, slack = res.x[:m], res.x[m:]
    support = caratheodory_reduce([gens[i] for i in range(m)], theta)
    support = tuple((tuple(int(v) for v in p), w) for p, w in support)
    cert = MembershipCertificate(support, tuple(slack))
    assert cert.verify(b0)
    return cert


def contains(P: UpwardPolytope, b0) -> bool:
    return membership(P, b0) is not None


def is_extreme(P: UpwardPolytope, b) -> bool:
    b = tuple(int(v) for v in b)
    if b not in P.generators:
        raise ValueError(f"{b} is not a generator")
    return membership(P.without(b), b) is None


def extreme_points(P: UpwardPolytope) -> list[tuple[int, ...]]:
    gens = P.sorted_generators()
    out = []
    for b in gens:
        # anything dominating another generator is not extreme
        if any(g != b and all(x <= y for x, y in zip(g, b)) for g in gens):
            continue
        if is_extreme(P, b):
            out.append(b)
    return out


def max_margin_vector(A: Iterable, b0):
    """LP: maximise s subject to v.(b - b0) >= s for b in A, v in [0, 1]^k.

    Returns ``(v, s)``; ``s > 0`` exactly when b0 lies outside P(A).
    """
    b0 = _point(b0)
    gens = sorted(set(tuple(b) for b in A))
    k = len(b0)
    m = len(gens)
    # columns: v (k), s, sigma (m), u (k)
    ncol = k + 1 + m + k
    rows, rhs = [], []
    for j, b in enumerate(gens):
        row = [Fraction(0)] * ncol
        for i in range(k):
            row[i] = Fraction(b[i]) - b0[i]
        row[k] = Fraction(-1)
        row[k + 1 + j] = Fraction(-1)
        rows.append(row)
        rhs.append(Fraction(0))
    for i in range(k):
        row = [Fraction(0)] * ncol
        row[i] = Fraction(1)
        row[k + 1 + m + i] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(1))
    cost = [Fraction(0)] * ncol
    cost[k] = Fraction(-1)
    res = solve_standard(rows, rhs, cost)
    assert res.status == "optimal"
    return tuple(res.x[:k]), res.x[k]


def separating_vector(A: Iterable, b0) -> SeparationWitness:
    """Witness (v0, eps) with ``v0.b0 + eps < v0.p`` on P(A), built as in the
    classical argument: a max-margin v1, then a uniform lift by delta."""
    b0 = _point(b0)
    k = len(b0)
    gens = sorted(set(tuple(int(v) for v in b) for b in A))
    if not gens or not any(b0):
        if gens and any(not any(b) for b in gens):
            raise MemberError("b0 lies in P(A)")
        wit = SeparationWitness(tuple(Fraction(1) for _ in range(k)), Fraction(1, 2))
        assert wit.verify(gens, b0)
        return wit
    v1, margin = max_margin_vector(gens, b0)
    if margin <= 0:
        raise MemberError(f"{tuple(b0)} lies in P(A)")
    l1 = sum(b0)
    delta = Fraction(1, 2) / l1 * min(dot(v1, b) - dot(v1, b0) for b in gens)
    v2 = tuple(v + delta for v in v1)
    eps = Fraction(1, 2) * delta / (1 + delta)
    v0 = tuple(v / (1 + delta) for v in v2)
    wit = SeparationWitness(v0, eps)
    if not wit.verify(gens, b0):
        raise AssertionError("separation postcondition failed; this is a bug")
    return wit


def certify_extreme(P: UpwardPolytope, b, level: int) -> SeparationWitness | None:
    """Witness that b stays extreme when generators of |.|_1 > level are added.

    Maximises s subject to ``v.(a - b) >= s`` (a in P minus b),
    ``v_i >= m``, ``(level + 1) m - v.b >= s``, ``v in [0, 1]^k``.
    """
    b = tuple(int(x) for x in b)
    k = P.k
    others = sorted(P.generators - {b})
    m_ = len(others)
    # columns: v (k), m, s, sigma (m_), tau (k), rho, u (k)
    iv, im, is_ = 0, k, k + 1
    isig = k + 2
    itau = isig + m_
    irho = itau + k
    iu = irho + 1
    ncol = iu + k
    rows, rhs = [], []

    def new_row():
        return [Fraction(0)] * ncol

    for j, a in enumerate(others):
        row = new_row()
        for i in range(k):
            row[iv + i] = Fraction(a[i] - b[i])
        row[is_] = Fraction(-1)
        row[isig + j] = Fraction(-1)
        rows.append(row)
        rhs.append(Fraction(0))
    for i in range(k):
        row = new_row()
        row[iv + i] = Fraction(1)
        row[im] = Fraction(-1)
        row[itau + i] = Fraction(-1)
        rows.append(row)
        rhs.append(Fraction(0))
    row = new_row()
    row[im] = Fraction(level + 1)
    for i in range(k):
        row[iv + i] = Fraction(-b[i])
    row[is_] = Fraction(-1)
    row[irho] = Fraction(-1)
    rows.append(row)
    rhs.append(Fraction(0))
    for i in range(k):
        row = new_row()
        row[iv + i] = Fraction(1)
        row[iu + i] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(1))
    cost = new_row()
    cost[is_] = Fraction(-1)
    res = solve_standard(rows, rhs, cost)
    if res.status != "optimal":
        return None
    v = tuple(res.x[:k])
    s = res.x[is_]
    if s <= 0:
        return None
    eps = min(s, min(v)) / 2
    wit = SeparationWitness(v, eps)
    assert wit.verify(others, b)
    assert min(v) * (level + 1) > dot(v, b)
    return wit


def stability_holds(wit: SeparationWitness, b, level: int) -> bool:
    """``min_i v0_i (level + 1) > v0 . b``: higher generators cannot interfere."""
    return min(wit.v0) * (level + 1) > dot(wit.v0, b)


def envelope_level(v0, b0) -> int:
    v0, b0 = _point(v0), _point(b0)
    eps = min(v0)
    return math.ceil(len(v0) / eps * (dot(v0, b0) + 1))


def finite_envelope(v0, b0, minimal: bool = True) -> UpwardPolytope:
    """Finite generator set for {b in Z_{>=0}^k : v0.b > v0.b0}.

    With ``minimal=False`` every lattice point of the open halfspace with
    ``|b|_1 <= N`` is listed.  By default only the vertex-relevant generators
    are returned: minimal lattice points of the halfspace, with the mass of
    each block of equal weights concentrated on one coordinate.  Every other
    listed point dominates one of these or is a convex combination of them,
    so the polytope is the same.
    """
    v0, b0 = _point(v0), _point(b0)
    k = len(v0)
    if any(v <= 0 for v in v0):
        raise ValueError("v0 must have positive entries")
    N = envelope_level(v0, b0)
    c = dot(v0, b0)
    if not minimal:
        pts = [b for n in range(N + 1) for b in _compositions(n, k) if dot(v0, b) > c]
        return UpwardPolytope(k, pts)
    weights = sorted(set(v0), reverse=True)
    groups = [[i for i in range(k) if v0[i] == w] for w in weights]
    r = len(groups)
    caps = [math.floor(c / w) + 1 for w in weights]
    gens = set()

    def totals(g: int, acc: Fraction, chosen: list[int]):
        if g == r - 1:
            w = weights[g]
            s_last = 0 if acc > c else math.floor((c - acc) / w) + 1
            S = chosen + [s_last]
            W = acc + w * s_last
            if W <= c:
                return
            if any(S[h] and W - weights[h] > c for h in range(r)):
                return
            yield S
            return
        for s in range(caps[g] + 1):
            val = acc + weights[g] * s
            if val > c + weights[g] and s > 0:
                break
            yield from totals(g + 1, val, chosen + [s])

    for S in totals(0, Fraction(0), []):
        choices = [groups[h] if S[h] else [None] for h in range(r)]
        for pick in itertools.product(*choices):
            b = [0] * k
            for h, i in enumerate(pick):
                if i is not None:
                    b[i] = S[h]
            assert sum(b) <= N
            gens.add(tuple(b))
    return UpwardPolytope(k, gens)


def _compositions(n: int, k: int):
    for cut in itertools.combinations(range(n + k - 1), k - 1):
        prev, out = -1, []
        for c in cut + (n + k - 1,):
            out.append(c - prev - 1)
            prev = c
        yield tuple(out)


def admissible_reduction(B: UpwardPolytope, b0, max_doublings: int = 64) -> UpwardPolytope:
    """Replace far generators by axis points C e_i while keeping b0 outside."""
    b0 = _point(b0)
    if contains(B, b0):
        raise MemberError(f"{tuple(b0)} lies in P(B)")
    k = B.k
    base = math.ceil(sum(b0)) + 1
    for m in range(max_doublings):
        C = base * 2 ** m
        near = [b for b in B.generators if sum(b) <= C]
        axes = [tuple(C if j == i else 0 for j in range(k)) for i in range(k)]
        A = UpwardPolytope(k, near + axes)
        if not contains(A, b0):
            for b in B.generators:
                if sum(b) > C and not contains(A, b):
                    raise AssertionError("containment failed; this is a bug")
            return A
    raise RuntimeError("admissible reduction did not terminate; this is a bug")
