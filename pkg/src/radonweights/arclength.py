"""Newton polytopes of vector-field systems, the arclength weight rho,
the exponent map q and the diffeomorphism-invariance check."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .poly import (DimensionError, PolyMap, Polynomial, VectorField, as_fraction,
                   determinant_at, hodge_star_fields)
from .polytope import (SeparationWitness, UpwardPolytope, certify_extreme, extreme_points,
                       separating_vector)
from .words import (BracketTable, Degree, WordTuple, canonical, lambda_at,
                    minimality_witness, nonvanishing_tuples, tuple_degree)


@dataclass
class SystemSpec:
    d: int
    fields: list[VectorField]
    submersions: list[PolyMap] | None = None
    box: list[tuple[Fraction, Fraction]] | None = None
    N: int | None = None
    names: list[str] | None = None
    name: str = "system"
    _table: BracketTable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.fields = list(self.fields)
        if len(self.fields) < 2:
            raise ValueError(f"need k >= 2 fields, got {len(self.fields)}")
        if any(X.dim != self.d for X in self.fields):
            raise DimensionError(f"every field must have dimension {self.d}")
        if self.submersions is not None:
            built = hodge_star_fields(self.submersions, self.d)
            if built != self.fields:
                raise ValueError("fields do not match the Hodge star of the submersions")
        if self.box is None:
            self.box = [(Fraction(-1), Fraction(1))] * self.d
        self.box = [(as_fraction(a), as_fraction(b)) for a, b in self.box]
        if len(self.box) != self.d or any(a >= b for a, b in self.box):
            raise ValueError("cutoff box must have d nondegenerate sides")
        if self.names is None:
            self.names = [f"x{i}" for i in range(self.d)]

    @classmethod
    def from_submersions(cls, pis: Sequence[PolyMap], **kw) -> "SystemSpec":
        pis = list(pis)
        d = pis[0].source
        return cls(d, hodge_star_fields(pis, d), submersions=pis, **kw)

    @property
    def k(self) -> int:
        return len(self.fields)

    @property
    def table(self) -> BracketTable:
        if self._table is None:
            self._table = BracketTable(self.fields)
        return self._table

    def in_box(self, x) -> bool:
        return all(a <= v <= b for v, (a, b) in zip(x, self.box))

    def default_N(self, b0=None) -> int:
        if self.N is not None:
            return self.N
        if b0 is not None:
            return int(sum(b0)) + 2
        return self.d * (self.d + 1) // 2 + 2


@dataclass(frozen=True)
class ExtremeRecord:
    degree: Degree
    certified: bool
    witness: SeparationWitness


@dataclass
class NewtonPolytopeReport:
    N: int
    polytope: UpwardPolytope
    extremes: list[ExtremeRecord]
    x0: tuple | None = None
    samples: list | None = None
    tuples: dict = field(default_factory=dict)  # degree -> list of (tuple, lambda value)
    note: str = ""

    def extreme_degrees(self) -> set[Degree]:
        return {e.degree for e in self.extremes}

    def generators(self) -> list[Degree]:
        return self.polytope.sorted_generators()


def _mark_extremes(P: UpwardPolytope, N: int) -> list[ExtremeRecord]:
    out = []
    for b in extreme_points(P):
        wit = certify_extreme(P, b, N)
        if wit is not None:
            out.append(ExtremeRecord(b, True, wit))
        else:
            rest = P.without(b).generators
            out.append(ExtremeRecord(b, False, separating_vector(rest, b)))
    return out


def collect_tuples(sys: SystemSpec, x0, N: int) -> dict:
    by_degree: dict = {}
    for rec in nonvanishing_tuples(sys.table, x0, N):
        by_degree.setdefault(rec.degree, []).append((rec.words, rec.value))
    return by_degree


def newton_polytope_at(sys: SystemSpec, x0, N: int | None = None) -> NewtonPolytopeReport:
    x0 = tuple(as_fraction(v) for v in x0)
    N = sys.default_N() if N is None else N
    if N < 1:
        raise ValueError("degree bound must be at least 1")
    tuples = collect_tuples(sys, x0, N)
    P = UpwardPolytope(sys.k, tuples.keys())
    return NewtonPolytopeReport(N, P, _mark_extremes(P, N), x0=x0, tuples=tuples,
                                note=f"truncated at |deg I| <= {N}")


def newton_polytope_of_region(sys: SystemSpec, samples, N: int | None = None) -> NewtonPolytopeReport:
    samples = [tuple(as_fraction(v) for v in x) for x in samples]
    if not samples:
        raise ValueError("need at least one sample point")
    for x in samples:
        if not sys.in_box(x):
            raise ValueError(f"sample {x} lies outside the cutoff box")
    N = sys.default_N() if N is None else N
    gens = set()
    for x in samples:
        gens.update(collect_tuples(sys, x, N).keys())
    P = UpwardPolytope(sys.k, gens)
    return NewtonPolytopeReport(N, P, _mark_extremes(P, N), samples=samples,
                                note=f"union over {len(samples)} samples (lower approximation); "
                                     f"truncated at |deg I| <= {N}")


@dataclass(frozen=True)
class Weight:
    radicand: Fraction
    exponent: Fraction
    value: float


def root(radicand: Fraction, exponent: Fraction) -> float:
    radicand = abs(radicand)
    if radicand == 0:
        return 0.0
    # log form keeps huge numerators/denominators out of float overflow
    return math.exp(float(exponent) * (math.log(radicand.numerator) - math.log(radicand.denominator)))


def weight_rho(sys: SystemSpec, I0: WordTuple, x) -> Weight:
    b0 = tuple_degree(I0, sys.k)
    n = sum(b0)
    if n < 2:
        raise ValueError("|deg I0|_1 must be at least 2")
    lam = abs(lambda_at(sys.table, I0, x))
    e = Fraction(1, n - 1)
    return Weight(lam, e, root(lam, e))


def q_map(b) -> tuple[Fraction, ...]:
    b = tuple(as_fraction(v) for v in b)
    s = sum(b)
    if s <= 1:
        raise ValueError(f"q needs |b|_1 > 1, got {s}")
    return tuple(v / (s - 1) for v in b)


INF = math.inf


@dataclass(frozen=True)
class ExponentVector:
    p: tuple  # Fraction entries or math.inf

    def __init__(self, p):
        vals = []
        for v in p:
            if v == INF or (isinstance(v, str) and v.strip().lower() in ("inf", "infinity")):
                vals.append(INF)
                continue
            v = as_fraction(v)
            if v < 1:
                raise ValueError(f"exponent {v} is below 1")
            vals.append(v)
        object.__setattr__(self, "p", tuple(vals))

    @classmethod
    def from_reciprocals(cls, r) -> "ExponentVector":
        return cls(INF if as_fraction(v) == 0 else 1 / as_fraction(v) for v in r)

    def reciprocal(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(0) if v == INF else 1 / v for v in self.p)

    def finite(self) -> bool:
        return all(v != INF for v in self.p)

    def as_strings(self) -> list[str]:
        return ["inf" if v == INF else str(v) for v in self.p]


@dataclass
class RegionVerdict:
    ok: bool
    reasons: list[str]

    def __bool__(self):
        return self.ok


def exponent_region_check(b0, p: ExponentVector) -> RegionVerdict:
    b0 = tuple(as_fraction(v) for v in b0)
    if len(p.p) != len(b0):
        raise DimensionError("exponent vector and b0 differ in length")
    q = q_map(b0)
    r = p.reciprocal()
    reasons = []
    for j, (rj, qj, bj) in enumerate(zip(r, q, b0)):
        if rj > qj:
            reasons.append(f"1/p_{j + 1} = {rj} exceeds q_{j + 1}(b0) = {qj}")
        elif rj == qj and bj != 0:
            reasons.append(f"1/p_{j + 1} = q_{j + 1}(b0) = {qj} but b0_{j + 1} != 0 (strict)")
    return RegionVerdict(not reasons, reasons)


class MinimalityError(ValueError):
    pass


@dataclass
class InvarianceRow:
    point: tuple
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs


@dataclass
class InvarianceReport:
    b0: Degree
    minimal: bool
    rows: list[InvarianceRow]
    witness: object = None

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.rows)


def diffeo_invariance_check(sys: SystemSpec, I0: WordTuple, F: PolyMap, Gs: Sequence[PolyMap],
                            samples, force: bool = False) -> InvarianceReport:
    """Exact check of ``|l~| = prod |det DG_j o pi_j o F|^(b0_j) |det DF|^(|b0|-1) |l o F|``.

    ``l~`` is lambda_I0 for the fields built from ``G_j o pi_j o F``.  The
    identity needs ``deg I0`` to be minimal; otherwise a MinimalityError is
    raised unless ``force`` is set, in which case the rows are still computed.
    """
    if sys.submersions is None:
        raise ValueError("invariance check needs the submersions")
    I0 = canonical(I0)
    k, d = sys.k, sys.d
    if len(Gs) != k:
        raise ValueError(f"need {k} target maps, got {len(Gs)}")
    b0 = tuple_degree(I0, k)
    wit = minimality_witness(sys.table, b0)
    if wit is not None and not force:
        raise MinimalityError(f"deg I0 = {b0} is not minimal: lambda at degree {wit[0]} "
                              f"for tuple {wit[1]} is not identically zero")
    new_pis = [G.compose(pi.compose(F)) for G, pi in zip(Gs, sys.submersions)]
    tilde = SystemSpec.from_submersions(new_pis, box=sys.box, name=sys.name + "~")
    detG = [G.jacobian_determinant() for G in Gs]
    detF = F.jacobian_determinant()
    n = sum(b0)
    rows = []
    for x in samples:
        x = tuple(as_fraction(v) for v in x)
        Fx = F(x)
        lhs = abs(lambda_at(tilde.table, I0, x))
        rhs = abs(detF(x)) ** (n - 1) * abs(lambda_at(sys.table, I0, Fx))
        for j in range(k):
            rhs *= abs(detG[j](sys.submersions[j](Fx))) ** b0[j]
        rows.append(InvarianceRow(x, lhs, rhs))
    return InvarianceReport(b0, wit is None, rows, wit)
