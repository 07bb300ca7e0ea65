"""Words over {1..k}, iterated brackets X_w, and determinants lambda_I.

Letters are 1-based labels, matching how words are written by hand:
``(1, 2)`` is the bracket ``[X_1, X_2]`` and ``(w, i)`` is ``[X_w, X_i]``.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .poly import Polynomial, VectorField, determinant_at, determinant_of_fields, lie_bracket

Word = tuple[int, ...]
Degree = tuple[int, ...]
WordTuple = tuple[Word, ...]


def check_word(w: Word, k: int) -> Word:
    w = tuple(int(a) for a in w)
    if not w:
        raise ValueError("words are nonempty")
    if any(not 1 <= a <= k for a in w):
        raise ValueError(f"letters of {w} must lie in 1..{k}")
    return w


def word_degree(w: Word, k: int) -> Degree:
    deg = [0] * k
    for a in check_word(w, k):
        deg[a - 1] += 1
    return tuple(deg)


def tuple_degree(I: Iterable[Word], k: int) -> Degree:
    deg = [0] * k
    for w in I:
        for a in w:
            deg[a - 1] += 1
    return tuple(deg)


def canonical(I: Iterable[Word]) -> WordTuple:
    """Representative of a tuple up to reordering: words sorted lexicographically."""
    return tuple(sorted(tuple(w) for w in I))


def enumerate_words(k: int, N: int) -> list[Word]:
    """All words of length <= N, shortest first and lexicographic within a length."""
    if N < 1:
        raise ValueError("degree bound must be at least 1")
    out: list[Word] = []
    for n in range(1, N + 1):
        out.extend(itertools.product(range(1, k + 1), repeat=n))
    return out


def words_of_degree_at_most(b: Degree) -> list[Word]:
    """Every word w with deg w <= b coordinatewise (b nonzero entries only)."""
    k = len(b)
    out: list[Word] = []

    def rec(prefix: list[int], budget: list[int]):
        if prefix:
            out.append(tuple(prefix))
        for a in range(1, k + 1):
            if budget[a - 1]:
                budget[a - 1] -= 1
                prefix.append(a)
                rec(prefix, budget)
                prefix.pop()
                budget[a - 1] += 1

    rec([], list(b))
    return sorted(out, key=lambda w: (len(w), w))


class BracketTable:
    """Memoised ``X_w``; ``X_(w,i) = [X_w, X_i]``."""

    def __init__(self, fields: Sequence[VectorField]):
        fields = tuple(fields)
        if len(fields) < 1:
            raise ValueError("need at least one field")
        self.fields = fields
        self.k = len(fields)
        self.d = fields[0].dim
        self._memo: dict[Word, VectorField] = {(i + 1,): X for i, X in enumerate(fields)}

    def __call__(self, w: Word) -> VectorField:
        return self.field(w)

    def field(self, w: Word) -> VectorField:
        w = tuple(w)
        got = self._memo.get(w)
        if got is not None:
            return got
        check_word(w, self.k)
        if len(w) >= 2 and w[0] == w[1]:
            val = VectorField.zero(self.d)
        else:
            head = self.field(w[:-1])
            if head.is_zero():
                val = head
            else:
                val = lie_bracket(head, self.fields[w[-1] - 1])
        self._memo[w] = val
        return val

    def nonzero_words(self, max_length: int) -> list[Word]:
        """Words of length <= max_length with X_w not identically zero.

        Extensions of a vanishing word vanish, so the search stops there.
        """
        out: list[Word] = []
        frontier = [(i,) for i in range(1, self.k + 1)]
        for _ in range(max_length):
            nxt = []
            for w in frontier:
                if not self.field(w).is_zero():
                    out.append(w)
                    nxt.extend(w + (i,) for i in range(1, self.k + 1))
            frontier = nxt
        return out


def bracket_field(table: BracketTable, w: Word) -> VectorField:
    return table.field(w)


def jacobi_expand(w: Word, wp: Word) -> dict[Word, int]:
    """Integer coefficients C with ``[X_w, X_w'] = sum C[u] X_u`` in any Lie algebra.

    Uses ``[X_w, [X_u, X_i]] = [[X_w, X_u], X_i] - [X_(w,i), X_u]`` recursively
    on the length of ``w'``.  Words starting with a repeated letter are zero and
    are dropped; ``[X_w, X_w]`` is returned as the empty expansion.
    """
    w, wp = tuple(w), tuple(wp)
    if w == wp:
        return {}
    out: Counter = Counter()
    _expand(w, wp, 1, out)
    return {u: c for u, c in sorted(out.items()) if c and not _trivially_zero(u)}


def _trivially_zero(u: Word) -> bool:
    return len(u) >= 2 and u[0] == u[1]


def _expand(w: Word, wp: Word, coef: int, out: Counter):
    if _trivially_zero(w) or _trivially_zero(wp):
        return
    if len(wp) == 1:
        out[w + wp] += coef
        return
    u, i = wp[:-1], wp[-1:]
    inner: Counter = Counter()
    _expand(w, u, 1, inner)
    for v, c in inner.items():
        out[v + i] += coef * c
    _expand(w + i, u, -coef, out)


def contract(table: BracketTable, expansion: dict[Word, int]) -> VectorField:
    total = VectorField.zero(table.d)
    for u, c in expansion.items():
        total = total + table.field(u) * Fraction(c)
    return total


def lambda_I(table: BracketTable, I: Sequence[Word]) -> Polynomial:
    """``det(X_w1, ..., X_wd)`` as an exact polynomial."""
    if len(I) != table.d:
        raise ValueError(f"need a {table.d}-tuple of words, got {len(I)}")
    return determinant_of_fields([table.field(w) for w in I])


def lambda_at(table: BracketTable, I: Sequence[Word], x) -> Fraction:
    if len(I) != table.d:
        raise ValueError(f"need a {table.d}-tuple of words, got {len(I)}")
    return determinant_at([table.field(w) for w in I], x)


def enumerate_degree_tuples(d: int, b: Degree) -> list[WordTuple]:
    """Canonical d-tuples (multisets of words) with total degree exactly b."""
    b = tuple(b)
    if sum(b) < d:
        return []
    cands = sorted(words_of_degree_at_most(b))
    k = len(b)
    degs = [word_degree(w, k) for w in cands]
    out: list[WordTuple] = []

    def rec(start: int, chosen: list[Word], rem: list[int]):
        slots = d - len(chosen)
        if slots == 0:
            if not any(rem):
                out.append(tuple(chosen))
            return
        if sum(rem) < slots:
            return
        for idx in range(start, len(cands)):
            dg = degs[idx]
            if all(a <= r for a, r in zip(dg, rem)):
                for i, a in enumerate(dg):
                    rem[i] -= a
                chosen.append(cands[idx])
                rec(idx, chosen, rem)
                chosen.pop()
                for i, a in enumerate(dg):
                    rem[i] += a

    rec(0, [], list(b))
    return out


def strictly_below(b: Degree) -> Iterable[Degree]:
    """Degrees b' with b' <= b coordinatewise and b' != b."""
    for bp in itertools.product(*(range(x + 1) for x in b)):
        if bp != tuple(b):
            yield bp


def minimality_check(table: BracketTable, b0: Degree, degree_bound: int | None = None) -> bool:
    """True iff lambda_I vanishes identically for every tuple with deg I < b0."""
    d = table.d
    for bp in strictly_below(tuple(b0)):
        if sum(bp) < d or (degree_bound is not None and sum(bp) > degree_bound):
            continue
        for I in enumerate_degree_tuples(d, bp):
            if len(set(I)) < d:
                continue
            if not lambda_I(table, I).is_zero():
                return False
    return True


def minimality_witness(table: BracketTable, b0: Degree):
    """First (degree, tuple) below b0 with a nonvanishing determinant, or None."""
    d = table.d
    for bp in strictly_below(tuple(b0)):
        if sum(bp) < d:
            continue
        for I in enumerate_degree_tuples(d, bp):
            if len(set(I)) == d and not lambda_I(table, I).is_zero():
                return bp, I
    return None


@dataclass(frozen=True)
class IndependentTuple:
    words: WordTuple
    degree: Degree
    value: Fraction


def nonvanishing_tuples(table: BracketTable, x0, N: int):
    """Canonical d-tuples with |deg I| <= N and lambda_I(x0) != 0.

    Depth-first over nonzero words, dropping any partial tuple whose vectors
    at x0 are already dependent (no completion can have nonzero determinant).
    Yields :class:`IndependentTuple` records.
    """
    d, k = table.d, table.k
    max_len = N - d + 1
    if max_len < 1:
        return
    words = sorted(table.nonzero_words(max_len))
    vecs = []
    for w in words:
        v = table.field(w)(x0)
        vecs.append(v)
    cand = [(w, v) for w, v in zip(words, vecs) if any(v)]

    def rec(start: int, chosen: list[int], basis: list[tuple[int, list[Fraction]]], used: int):
        if len(chosen) == d:
            I = tuple(cand[i][0] for i in chosen)
            val = determinant_at([table.field(w) for w in I], x0)
            yield IndependentTuple(I, tuple_degree(I, k), val)
            return
        slots = d - len(chosen)
        for idx in range(start, len(cand)):
            w, v = cand[idx]
            if used + len(w) + (slots - 1) > N:
                continue
            reduced = _reduce(list(v), basis)
            if reduced is None:
                continue
            chosen.append(idx)
            yield from rec(idx + 1, chosen, basis + [reduced], used + len(w))
            chosen.pop()

    yield from rec(0, [], [], 0)


def _reduce(v: list[Fraction], basis):
    """Reduce v against an echelon basis; None if v lies in its span."""
    for piv, b in basis:
        if v[piv]:
            f = v[piv] / b[piv]
            v = [a - f * c for a, c in zip(v, b)]
    piv = next((i for i, a in enumerate(v) if a), None)
    if piv is None:
        return None
    return piv, v
