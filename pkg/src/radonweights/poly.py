"""Exact multivariate polynomials over the rationals, vector fields and maps.

Variables are indexed from 0.  Coefficients are :class:`fractions.Fraction`;
floats are rejected so that every quantity built here stays exact.
"""
from __future__ import annotations

import ast
import warnings
from fractions import Fraction
from typing import Iterable, Sequence

Exp = tuple[int, ...]


class DimensionError(ValueError):
    pass


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings; refuse floats."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _is_rational_literal(text):
            raise ValueError(f"not an integer-fraction string: {value!r}")
        return Fraction(text)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def _is_rational_literal(text: str) -> bool:
    parts = text.split("/")
    if len(parts) > 2:
        return False
    for i, part in enumerate(parts):
        part = part.strip()
        if i == 0 and part[:1] in "+-":
            part = part[1:]
        if not part.isdigit():
            return False
    return True


class Polynomial:
    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms=None):
        if nvars < 1:
            raise DimensionError("a polynomial needs at least one variable")
        self.nvars = nvars
        clean: dict[Exp, Fraction] = {}
        if terms:
            for exp, coef in dict(terms).items():
                exp = tuple(int(e) for e in exp)
                if len(exp) != nvars or min(exp) < 0:
                    raise DimensionError(f"bad exponent {exp} for {nvars} variables")
                coef = as_fraction(coef)
                if coef:
                    clean[exp] = clean.get(exp, 0) + coef
            clean = {e: c for e, c in clean.items() if c}
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "Polynomial":
        # trusted constructor: terms already canonical
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, value, nvars: int) -> "Polynomial":
        value = as_fraction(value)
        return cls._raw(nvars, {(0,) * nvars: value} if value else {})

    @classmethod
    def variable(cls, i: int, nvars: int) -> "Polynomial":
        if not 0 <= i < nvars:
            raise DimensionError(f"variable index {i} out of range for {nvars} variables")
        exp = tuple(1 if j == i else 0 for j in range(nvars))
        return cls._raw(nvars, {exp: Fraction(1)})

    @classmethod
    def variables(cls, nvars: int) -> list["Polynomial"]:
        return [cls.variable(i, nvars) for i in range(nvars)]

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0,) * self.nvars in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise DimensionError(f"{self.nvars} vs {other.nvars} variables")
            return other
        return Polynomial.constant(other, self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Polynomial._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, value) -> "Polynomial":
        value = as_fraction(value)
        if not value:
            return Polynomial.zero(self.nvars)
        return Polynomial._raw(self.nvars, {e: c * value for e, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        other = self._coerce(other)
        out: dict[Exp, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial._raw(self.nvars, {e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = Polynomial.constant(1, self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Polynomial.constant(other, self.nvars).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def diff(self, i: int) -> "Polynomial":
        if not 0 <= i < self.nvars:
            raise DimensionError(f"variable index {i} out of range for {self.nvars} variables")
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[ne] = c * e[i]
        return Polynomial._raw(self.nvars, out)

    def __call__(self, point: Sequence) -> Fraction:
        """Exact evaluation at a rational point."""
        if len(point) != self.nvars:
            raise DimensionError(f"point of length {len(point)} for {self.nvars} variables")
        pt = [as_fraction(v) for v in point]
        powers = [dict() for _ in pt]
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for i, k in enumerate(e):
                if k:
                    pw = powers[i].get(k)
                    if pw is None:
                        pw = powers[i][k] = pt[i] ** k
                    term *= pw
            total += term
        return total

    def compose(self, components: Sequence) -> "Polynomial":
        """Substitute ``components[i]`` for variable ``i``."""
        if len(components) != self.nvars:
            raise DimensionError(f"{len(components)} components for {self.nvars} variables")
        return evaluate_in_ring(self, components, one=_one_like(components[0]))

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"x{i}" for i in range(self.nvars)]
        pieces = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), tuple(-k for k in e))):
            c = self.terms[e]
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}**{k}" for i, k in enumerate(e) if k
            )
            if not mono:
                pieces.append(f"{c}")
            elif c == 1:
                pieces.append(mono)
            elif c == -1:
                pieces.append(f"-{mono}")
            else:
                pieces.append(f"{c}*{mono}")
        return " + ".join(pieces).replace("+ -", "- ")

    def __repr__(self):
        return f"Polynomial({self.to_str()})"


def _one_like(x):
    if isinstance(x, Polynomial):
        return Polynomial.constant(1, x.nvars)
    if hasattr(x, "one_like"):
        return x.one_like()
    return Fraction(1)


def evaluate_in_ring(p: Polynomial, values: Sequence, one):
    """Evaluate ``p`` at ring elements ``values`` (polynomials, jets, rationals).

    Only ``+``, ``*`` and multiplication by a Fraction are required of the ring.
    """
    powers: list[dict[int, object]] = [{0: one, 1: v} for v in values]

    def power(i: int, k: int):
        cache = powers[i]
        if k not in cache:
            half = power(i, k // 2)
            sq = half * half
            cache[k] = sq * values[i] if k % 2 else sq
        return cache[k]

    total = None
    for e, c in p.terms.items():
        term = None
        for i, k in enumerate(e):
            if k:
                term = power(i, k) if term is None else term * power(i, k)
        term = one * c if term is None else term * c
        total = term if total is None else total + term
    if total is None:
        return one * 0
    return total


def parse_polynomial(expr: str, names: Sequence[str]) -> Polynomial:
    """Parse an arithmetic expression in ``names`` with integer/rational constants.

    Supported: ``+ - * / **`` (division only by constants) and parentheses.
    Float literals are rejected.
    """
    names = list(names)
    nvars = len(names)
    gens = {n: Polynomial.variable(i, nvars) for i, n in enumerate(names)}
    tree = ast.parse(expr, mode="eval")

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise ValueError(f"non-integer literal {node.value!r} in {expr!r}")
            return Polynomial.constant(node.value, nvars)
        if isinstance(node, ast.Name):
            if node.id not in gens:
                raise ValueError(f"unknown variable {node.id!r} in {expr!r}")
            return gens[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = walk(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.BinOp):
            left, right = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if not right.is_constant() or right.is_zero():
                    raise ValueError(f"division by a non-constant in {expr!r}")
                return left.scale(1 / right.constant_value())
            if isinstance(node.op, ast.Pow):
                if not right.is_constant() or right.constant_value().denominator != 1:
                    raise ValueError(f"non-integer exponent in {expr!r}")
                return left ** int(right.constant_value())
        raise ValueError(f"unsupported syntax in {expr!r}")

    return walk(tree)


def determinant(matrix: Sequence[Sequence], zero):
    """Laplace expansion with memoised minors; works over any commutative ring.

    Entries must support ``+``, ``-``, ``*`` and truthiness (falsy == zero).
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise DimensionError("determinant of a non-square matrix")
    if n == 0:
        return zero + 1
    memo: dict[tuple[int, int], object] = {}

    def minor(row: int, cols: int):
        if row == n:
            return None  # stands for 1
        key = (row, cols)
        if key in memo:
            return memo[key]
        total = zero
        sign = 1
        for c in range(n):
            bit = 1 << c
            if not cols & bit:
                continue
            entry = matrix[row][c]
            if entry:
                sub = minor(row + 1, cols & ~bit)
                if sub is None:
                    term = entry
                elif sub:
                    term = entry * sub
                else:
                    term = None
                if term is not None:
                    total = total + term if sign > 0 else total - term
            sign = -sign
        memo[key] = total
        return total

    result = minor(0, (1 << n) - 1)
    return result


def rank(matrix: Sequence[Sequence]) -> int:
    """Exact rank of a rational matrix by Gaussian elimination."""
    rows = [[as_fraction(v) for v in r] for r in matrix]
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, len(rows)):
            if rows[i][c]:
                f = rows[i][c] / rows[r][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


class VectorField:
    """A polynomial vector field ``sum_i components[i] * d/dx_i``."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable[Polynomial]):
        comps = tuple(components)
        if not comps:
            raise DimensionError("empty vector field")
        d = comps[0].nvars
        if len(comps) != d or any(c.nvars != d for c in comps):
            raise DimensionError("vector field components must match the dimension")
        self.components = comps

    @classmethod
    def coordinate(cls, i: int, d: int) -> "VectorField":
        return cls(Polynomial.constant(1 if j == i else 0, d) for j in range(d))

    @classmethod
    def zero(cls, d: int) -> "VectorField":
        return cls(Polynomial.zero(d) for _ in range(d))

    @property
    def dim(self) -> int:
        return len(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __bool__(self):
        return not self.is_zero()

    def apply(self, f: Polynomial) -> Polynomial:
        """Directional derivative ``X(f)``."""
        out = Polynomial.zero(self.dim)
        for i, c in enumerate(self.components):
            if c:
                df = f.diff(i)
                if df:
                    out = out + c * df
        return out

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_dims(self, other)
        return VectorField(a + b for a, b in zip(self.components, other.components))

    def __sub__(self, other: "VectorField") -> "VectorField":
        _check_dims(self, other)
        return VectorField(a - b for a, b in zip(self.components, other.components))

    def __neg__(self):
        return VectorField(-a for a in self.components)

    def __mul__(self, f):
        # multiplication by a scalar or polynomial function
        return VectorField(a * f for a in self.components)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __call__(self, point) -> tuple[Fraction, ...]:
        return tuple(c(point) for c in self.components)

    def compose(self, F: "PolyMap") -> "VectorField":
        """Components composed with a map: ``X o F`` (not a pushforward)."""
        return VectorField(c.compose(F.components) for c in self.components)

    def to_str(self, names=None) -> str:
        return "(" + ", ".join(c.to_str(names) for c in self.components) + ")"

    def __repr__(self):
        return f"VectorField{self.to_str()}"


def _check_dims(X: VectorField, Y: VectorField):
    if X.dim != Y.dim:
        raise DimensionError(f"fields of dimension {X.dim} and {Y.dim}")


class PolyMap:
    """Polynomial map from R^source to R^target."""

    __slots__ = ("components", "source")

    def __init__(self, components: Iterable[Polynomial], source: int | None = None):
        comps = tuple(components)
        if not comps and source is None:
            raise DimensionError("empty map needs an explicit source dimension")
        src = comps[0].nvars if comps else source
        if source is not None and src != source:
            raise DimensionError("components disagree with the source dimension")
        if any(c.nvars != src for c in comps):
            raise DimensionError("all components must share the source variables")
        self.components = comps
        self.source = src

    @classmethod
    def identity(cls, d: int) -> "PolyMap":
        return cls(Polynomial.variables(d))

    @property
    def target(self) -> int:
        return len(self.components)

    def jacobian(self) -> list[list[Polynomial]]:
        return [[c.diff(i) for i in range(self.source)] for c in self.components]

    def jacobian_determinant(self) -> Polynomial:
        if self.source != self.target:
            raise DimensionError("Jacobian determinant needs a square map")
        return determinant(self.jacobian(), Polynomial.zero(self.source))

    def compose(self, inner: "PolyMap") -> "PolyMap":
        """``self o inner``."""
        if inner.target != self.source:
            raise DimensionError(f"cannot compose: {inner.target} -> {self.source}")
        return PolyMap((c.compose(inner.components) for c in self.components), inner.source)

    def __call__(self, point):
        return tuple(c(point) for c in self.components)

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.source == other.source and self.components == other.components

    def __hash__(self):
        return hash((self.source, self.components))

    def __repr__(self):
        return "PolyMap(" + ", ".join(c.to_str() for c in self.components) + ")"


def poly_arith(op: str, *args):
    """Dispatcher over the four basic operations (add, mul, scale, compose)."""
    if op == "add":
        a, b = args
        return a + b
    if op == "mul":
        a, b = args
        return a * b
    if op == "scale":
        a, c = args
        return a.scale(c)
    if op == "compose":
        p, F = args
        if isinstance(F, PolyMap):
            if F.target != p.nvars:
                raise DimensionError(f"map target {F.target} vs {p.nvars} variables")
            return p.compose(F.components)
        return p.compose(F)
    raise ValueError(f"unknown operation {op!r}")


def partial_derivative(p: Polynomial, i: int) -> Polynomial:
    return p.diff(i)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """``[X, Y]_i = sum_l X_l d_l Y_i - Y_l d_l X_i``."""
    _check_dims(X, Y)
    return VectorField(X.apply(yi) - Y.apply(xi) for xi, yi in zip(X.components, Y.components))


def determinant_of_fields(fields: Sequence[VectorField]) -> Polynomial:
    """Determinant of the matrix whose columns are the given fields."""
    if not fields:
        raise DimensionError("no fields")
    d = fields[0].dim
    if len(fields) != d or any(f.dim != d for f in fields):
        raise DimensionError(f"need exactly {d} fields of dimension {d}")
    matrix = [[f.components[i] for f in fields] for i in range(d)]
    return determinant(matrix, Polynomial.zero(d))


def determinant_at(fields: Sequence[VectorField], point) -> Fraction:
    """Exact ``det(fields)(point)``, evaluating the fields first."""
    cols = [f(point) for f in fields]
    return rational_det([[c[i] for c in cols] for i in range(len(cols))])


def rational_det(matrix) -> Fraction:
    rows = [list(r) for r in matrix]
    n = len(rows)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if rows[i][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            det = -det
        p = rows[c][c]
        det *= p
        for i in range(c + 1, n):
            if rows[i][c]:
                f = rows[i][c] / p
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return det


def hodge_star_fields(pis: Sequence[PolyMap], d: int, sample_points=()) -> list[VectorField]:
    """Tangent fields to the fibres of submersions R^d -> R^(d-1).

    Component ``i`` of ``X_j`` is ``(-1)^i`` times the minor of ``D pi_j``
    with column ``i`` removed (0-based ``i``, so the first sign is ``+``).
    """
    fields = []
    for j, pi in enumerate(pis):
        if pi.source != d or pi.target != d - 1:
            raise DimensionError(f"map {j} must go from R^{d} to R^{d - 1}")
        jac = pi.jacobian()
        comps = []
        for i in range(d):
            minor = [[row[c] for c in range(d) if c != i] for row in jac]
            m = determinant(minor, Polynomial.zero(d)) if d > 1 else Polynomial.constant(1, d)
            comps.append(m if i % 2 == 0 else -m)
        for pt in sample_points:
            jac_at = [[e(pt) for e in row] for row in jac]
            if rank(jac_at) < d - 1:
                warnings.warn(f"map {j} is not a submersion at {tuple(pt)}", stacklevel=2)
        fields.append(VectorField(comps))
    return fields


def adjugate(matrix: Sequence[Sequence[Polynomial]]) -> list[list[Polynomial]]:
    n = len(matrix)
    zero = matrix[0][0] * 0
    adj = [[zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[matrix[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            m = determinant(minor, zero) if n > 1 else zero + 1
            adj[i][j] = m if (i + j) % 2 == 0 else -m
    return adj


def pullback_field(F: PolyMap, X: VectorField, det_DF: Polynomial | None = None,
                   inverse: PolyMap | None = None) -> VectorField:
    """``F^* X = (DF)^{-1} X o F`` for maps with polynomial inverse Jacobian.

    Either a polynomial inverse of ``F`` is supplied, or ``det DF`` must be a
    nonzero constant (shears and unipotent triangular maps).
    """
    d = F.source
    if F.target != d or X.dim != d:
        raise DimensionError("pullback needs a square map matching the field")
    XF = X.compose(F)
    if inverse is not None:
        if inverse.compose(F) != PolyMap.identity(d):
            raise ValueError("supplied inverse does not invert F")
        jinv = [[e.compose(F.components) for e in row] for row in inverse.jacobian()]
    else:
        det_DF = F.jacobian_determinant() if det_DF is None else det_DF
        if not det_DF.is_constant() or det_DF.is_zero():
            raise ValueError("F is not invertible with a polynomial inverse Jacobian")
        inv = 1 / det_DF.constant_value()
        jinv = [[e.scale(inv) for e in row] for row in adjugate(F.jacobian())]
    comps = []
    for i in range(d):
        acc = Polynomial.zero(d)
        for l in range(d):
            if jinv[i][l] and XF.components[l]:
                acc = acc + jinv[i][l] * XF.components[l]
        comps.append(acc)
    return VectorField(comps)
