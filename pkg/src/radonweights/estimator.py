"""Desk-scale numerics for the weighted forms: Riemann-sum quadrature over
occupancy sets, restricted-type ratio sweeps and the optimality probe."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .arclength import (ExponentVector, SystemSpec, newton_polytope_at, q_map)
from .flows import BallCloud, cc_ball, loglog_slope
from .grids import NumericMap, OccupancyGrid
from .jets import rho_tilde_radicand
from .poly import Polynomial, as_fraction
from .words import WordTuple, canonical, lambda_I, lambda_at, tuple_degree


@dataclass(frozen=True)
class Tolerances:
    quad_halving: float = 0.05
    measure_halving: float = 0.10
    bounded_slope: float = 0.1
    blowup_slope: float = -0.2
    band_factor: float = 4.0
    mu_vs_rho_volume: float = 0.25
    volume_slope: float = 0.10
    fd_relative: float = 1e-6
    family_ratio: float = 10.0

    @classmethod
    def load(cls, path) -> "Tolerances":
        with open(path) as fh:
            data = json.load(fh)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class WeightSpec:
    """``rho`` (needs I0), ``rho_tilde`` (needs J0, beta0) or ``unweighted``."""

    kind: str = "rho"
    I0: WordTuple | None = None
    J0: tuple | None = None
    beta0: tuple | None = None
    extra: Callable[[np.ndarray], np.ndarray] | None = None

    def build(self, sys: SystemSpec) -> Callable[[np.ndarray], np.ndarray]:
        if self.kind == "unweighted":
            base = None
        elif self.kind == "rho":
            if self.I0 is None:
                raise ValueError("rho weight needs I0")
            rad = lambda_I(sys.table, self.I0)
            n = sum(tuple_degree(self.I0, sys.k))
            base = _root_fn(rad, n)
        elif self.kind == "rho_tilde":
            if self.J0 is None or self.beta0 is None:
                raise ValueError("rho_tilde weight needs J0 and beta0")
            rad = rho_tilde_radicand(sys, self.J0, self.beta0)
            n = sys.d + sum(self.beta0)
            base = _root_fn(rad, n)
        else:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        extra = self.extra

        def weight(X: np.ndarray) -> np.ndarray:
            w = np.ones(len(X)) if base is None else base(X)
            if extra is not None:
                w = w * extra(X)
            return w

        return weight

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.I0 is not None:
            out["I0"] = [list(w) for w in self.I0]
        if self.J0 is not None:
            out["J0"] = list(self.J0)
            out["beta0"] = list(self.beta0)
        if self.extra is not None:
            out["extra"] = getattr(self.extra, "__name__", "callable")
        return out


def _root_fn(rad: Polynomial, n: int):
    if n < 2:
        raise ValueError("|b0|_1 must be at least 2")
    f = NumericMap([rad])
    e = 1.0 / (n - 1)
    return lambda X: np.abs(f(X)[:, 0]) ** e


def cutoff(sys: SystemSpec) -> Callable[[np.ndarray], np.ndarray]:
    lo = np.asarray([float(a) for a, _ in sys.box])
    hi = np.asarray([float(b) for _, b in sys.box])
    return lambda X: np.all((X >= lo) & (X <= hi), axis=1).astype(float)


@dataclass
class QuadratureGrid:
    lo: np.ndarray
    hi: np.ndarray
    cells: int

    @property
    def h(self) -> np.ndarray:
        return (self.hi - self.lo) / self.cells

    def chunks(self, size: int = 1 << 18):
        D = len(self.lo)
        total = self.cells ** D
        h = self.h
        for start in range(0, total, size):
            flat = np.arange(start, min(start + size, total))
            idx = np.stack(np.unravel_index(flat, (self.cells,) * D), axis=1)
            yield idx, self.lo + (idx + 0.5) * h


@dataclass
class QuadratureResult:
    value: float  # on the finer grid
    coarse: float
    rel_change: float
    converged: bool
    grid: QuadratureGrid


def _integrand(sys, weight, sets, X, pis, a):
    val = weight(X) * a(X)
    for E, pi in zip(sets, pis):
        live = val != 0
        if not live.any():
            break
        inside = np.zeros(len(X), dtype=bool)
        inside[live] = E.contains(pi(X[live]))
        val = np.where(inside, val, 0.0)
    return val


def _riemann(sys, weight, sets, grid: QuadratureGrid, pis, a):
    total = 0.0
    touch = False
    D = len(grid.lo)
    for idx, X in grid.chunks():
        v = _integrand(sys, weight, sets, X, pis, a)
        total += float(v.sum())
        nz = v != 0
        if nz.any():
            edge = np.any((idx[nz] == 0) | (idx[nz] == grid.cells - 1), axis=1)
            touch = touch or bool(edge.any())
    return total * float(np.prod(grid.h)), touch


def form_quadrature(sys: SystemSpec, weight: WeightSpec | Callable, sets: Sequence[OccupancyGrid],
                    cells: int = 48, domain: tuple | None = None, tol: Tolerances = Tolerances(),
                    max_expand: int = 6) -> QuadratureResult:
    """Riemann sum of ``prod_j chi_{E_j}(pi_j(x)) w(x) a(x)`` with an h-halving check.

    ``domain`` is a starting box (lo, hi); it is enlarged while the support of
    the integrand touches its boundary.  Without one, the cutoff box is used.
    """
    if sys.submersions is None:
        raise ValueError("quadrature needs the submersions")
    if len(sets) != sys.k:
        raise ValueError(f"need {sys.k} sets")
    w = weight.build(sys) if isinstance(weight, WeightSpec) else weight
    pis = [NumericMap(pi.components) for pi in sys.submersions]
    a = cutoff(sys)
    if domain is None:
        lo = np.asarray([float(x) for x, _ in sys.box])
        hi = np.asarray([float(y) for _, y in sys.box])
    else:
        lo, hi = (np.asarray(v, dtype=float) for v in domain)
    box_lo = np.asarray([float(x) for x, _ in sys.box])
    box_hi = np.asarray([float(y) for _, y in sys.box])
    for _ in range(max_expand):
        grid = QuadratureGrid(lo, hi, cells)
        value, touch = _riemann(sys, w, sets, grid, pis, a)
        if not touch or (np.all(lo <= box_lo) and np.all(hi >= box_hi)):
            break
        # the cutoff vanishes outside its box, so never grow past it
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        lo = np.maximum(mid - 2 * half, np.minimum(lo, box_lo))
        hi = np.minimum(mid + 2 * half, np.maximum(hi, box_hi))
    fine = QuadratureGrid(grid.lo, grid.hi, 2 * cells)
    value_fine, _ = _riemann(sys, w, sets, fine, pis, a)
    if value_fine:
        rel = abs(value_fine - value) / abs(value_fine)
    else:
        rel = 0.0 if value == 0 else np.inf
    return QuadratureResult(value_fine, value, rel, rel < tol.quad_halving, fine)


@dataclass
class ImageMeasure:
    value: float
    coarse: float
    rel_change: float
    stable: bool
    degenerate: bool
    grid: OccupancyGrid


def measure_image(sys: SystemSpec, j: int, cloud: np.ndarray | BallCloud, cells: int = 128,
                  tol: Tolerances = Tolerances()) -> ImageMeasure:
    """Occupancy area of ``pi_j(cloud)`` (j is 1-based) with a resolution-halving check."""
    pts = cloud.points if isinstance(cloud, BallCloud) else np.asarray(cloud, dtype=float)
    if len(pts) == 0:
        raise ValueError("empty cloud")
    if sys.submersions is None:
        raise ValueError("image measures need the submersions")
    img = NumericMap(sys.submersions[j - 1].components)(pts)
    fine = OccupancyGrid.from_points(img, cells)
    coarse = OccupancyGrid.from_points(img, cells // 2)
    rel = abs(coarse.measure - fine.measure) / fine.measure if fine.measure else np.inf
    degenerate = fine.degenerate or fine.measure == 0
    return ImageMeasure(fine.measure, coarse.measure, rel, rel < tol.measure_halving and not degenerate,
                        degenerate, fine)


@dataclass
class SetFamily:
    """Sets E_j = pi_j(Omega) for a sweep of generating sets Omega.

    ``kind`` is ``cc-ball`` (Omega = B(x0, delta) from the words I and weights
    v0) or ``box`` (Omega = x0 + prod [-delta^a_i, delta^a_i]).
    """

    kind: str
    x0: tuple
    deltas: list[float]
    I: WordTuple | None = None
    v0: tuple | None = None
    exponents: tuple | None = None
    n_samples: int = 200_000
    seed: int = 0
    image_cells: int = 128
    nsteps: int = 4

    def cloud(self, sys: SystemSpec, index: int) -> BallCloud:
        delta = self.deltas[index]
        seed = self.seed * 1_000_003 + index
        if self.kind == "cc-ball":
            v0 = self.v0 or (1,) * sys.k
            return cc_ball(sys, self.x0, self.I, v0, delta, self.n_samples, seed, self.nsteps)
        if self.kind == "box":
            rng = np.random.default_rng(seed)
            ex = np.asarray(self.exponents or (1,) * sys.d, dtype=float)
            u = rng.uniform(-1, 1, size=(self.n_samples, sys.d))
            pts = np.asarray([float(v) for v in self.x0]) + u * delta ** ex
            return BallCloud(tuple(self.x0), (), (), delta, u, pts)
        raise ValueError(f"unknown family kind {self.kind!r}")


@dataclass
class RatioRow:
    delta: float
    M: float
    measures: list[float]
    ratio: float
    quad_rel_change: float
    measure_rel_change: list[float]


@dataclass
class RatioTable:
    rows: list[RatioRow]
    slope: float
    p: list[str]
    notes: list[str] = field(default_factory=list)

    def csv(self) -> str:
        k = len(self.rows[0].measures) if self.rows else 0
        head = ["delta", "M"] + [f"E{j + 1}" for j in range(k)] + ["ratio"]
        lines = [",".join(head)]
        for r in self.rows:
            vals = [r.delta, r.M] + list(r.measures) + [r.ratio]
            lines.append(",".join(repr(float(v)) for v in vals))
        return "\n".join(lines) + "\n"

    @property
    def max_quad_change(self) -> float:
        return max((r.quad_rel_change for r in self.rows), default=0.0)

    @property
    def max_measure_change(self) -> float:
        return max((c for r in self.rows for c in r.measure_rel_change), default=0.0)

    @property
    def band(self) -> float:
        vals = [r.ratio for r in self.rows]
        return max(vals) / min(vals) if vals else float("nan")


def _domain_from_cloud(points: np.ndarray, grow: float = 0.5):
    lo, hi = points.min(axis=0), points.max(axis=0)
    span = np.maximum(hi - lo, 1e-300)
    return lo - grow * span, hi + grow * span


def ratio_sweep(sys: SystemSpec, weight: WeightSpec, family: SetFamily, p: ExponentVector,
                cells: int = 48, tol: Tolerances = Tolerances()) -> RatioTable:
    """One row per delta: ``M(E) / prod |E_j|^{1/p_j}`` and the log-log slope in delta."""
    if not p.finite():
        raise ValueError("ratio sweeps need finite exponents")
    if not family.deltas:
        raise ValueError("empty family")
    recip = [float(r) for r in p.reciprocal()]
    rows, notes = [], []
    for i, delta in enumerate(family.deltas):
        cloud = family.cloud(sys, i)
        ims = [measure_image(sys, j + 1, cloud, family.image_cells, tol) for j in range(sys.k)]
        if any(m.value == 0 for m in ims):
            notes.append(f"delta={delta}: zero image measure, row skipped")
            continue
        q = form_quadrature(sys, weight, [m.grid for m in ims], cells,
                            domain=_domain_from_cloud(cloud.points), tol=tol)
        denom = float(np.prod([m.value ** r for m, r in zip(ims, recip)]))
        rows.append(RatioRow(delta, q.value, [m.value for m in ims], q.value / denom,
                             q.rel_change, [m.rel_change for m in ims]))
    live = [r for r in rows if r.ratio > 0]
    slope = loglog_slope([r.delta for r in live], [r.ratio for r in live]) if len(live) >= 2 else float("nan")
    return RatioTable(rows, slope, p.as_strings(), notes)


@dataclass
class ProbeRow:
    delta: float
    volume: float
    mu: float
    rho_volume: float
    measures: list[float]
    ratio: float


@dataclass
class ProbeReport:
    b0: tuple
    I: WordTuple
    v0: tuple
    p: list[str]
    rows: list[ProbeRow]
    band: float
    slope: float
    volume_slope: float
    expected_volume_slope: float
    mu_vs_rho: float
    tol: Tolerances

    @property
    def band_ok(self) -> bool:
        return self.band <= self.tol.band_factor and abs(self.slope) <= self.tol.bounded_slope

    @property
    def volume_ok(self) -> bool:
        e = self.expected_volume_slope
        return abs(self.volume_slope - e) <= self.tol.volume_slope * abs(e)

    @property
    def mu_ok(self) -> bool:
        return self.mu_vs_rho <= self.tol.mu_vs_rho_volume

    @property
    def passed(self) -> bool:
        return self.band_ok and self.volume_ok and self.mu_ok

    def csv(self) -> str:
        k = len(self.rows[0].measures) if self.rows else 0
        head = ["delta", "volume", "mu", "rho_volume"] + [f"pi{j + 1}" for j in range(k)] + ["ratio"]
        lines = [",".join(head)]
        for r in self.rows:
            vals = [r.delta, r.volume, r.mu, r.rho_volume] + list(r.measures) + [r.ratio]
            lines.append(",".join(repr(float(v)) for v in vals))
        return "\n".join(lines) + "\n"


class ProbeRefused(ValueError):
    pass


def optimality_probe(sys: SystemSpec, b0, x0, deltas: Sequence[float], p: ExponentVector | None = None,
                     n_samples: int = 200_000, seed: int = 0, ball_cells: int = 48,
                     image_cells: int = 128, extra_weight=None, N: int | None = None,
                     tol: Tolerances = Tolerances()) -> ProbeReport:
    """mu(B) / prod |pi_j(B)|^{1/p_j} over shrinking balls, mu = rho dx.

    Refuses when b0 is not extreme at x0 or when sum 1/p_j <= 1.
    """
    b0 = tuple(int(v) for v in b0)
    x0 = tuple(as_fraction(v) for v in x0)
    p = p or ExponentVector.from_reciprocals(q_map(b0))
    if sum(p.reciprocal()) <= 1:
        raise ProbeRefused("sum of 1/p_j must exceed 1")
    rep = newton_polytope_at(sys, x0, sys.default_N(b0) if N is None else N)
    rec = next((e for e in rep.extremes if e.degree == b0), None)
    if rec is None:
        raise ProbeRefused(f"b0 = {b0} is not an extreme point at x0")
    I = max(rep.tuples[b0], key=lambda iv: (abs(iv[1]), [-len(w) for w in iv[0]]))[0]
    v0 = tuple(rec.witness.v0)
    weight = WeightSpec("rho", I0=I, extra=extra_weight).build(sys)
    with np.errstate(divide="ignore"):
        rho0 = float(weight(np.asarray([[float(v) for v in x0]]))[0])
    recip = [float(r) for r in p.reciprocal()]
    rows = []
    for i, delta in enumerate(deltas):
        cloud = cc_ball(sys, x0, I, v0, delta, n_samples, seed * 1_000_003 + i)
        ball = OccupancyGrid.from_points(cloud.points, ball_cells)
        centers = ball.centers()
        mu = float(weight(centers).sum()) * ball.cell_volume
        vol = ball.measure
        ims = [measure_image(sys, j + 1, cloud, image_cells, tol).value for j in range(sys.k)]
        ratio = mu / float(np.prod([m ** r for m, r in zip(ims, recip)]))
        rows.append(ProbeRow(delta, vol, mu, rho0 * vol, ims, ratio))
    ds = [r.delta for r in rows]
    ratios = [r.ratio for r in rows]
    band = max(ratios) / min(ratios)
    slope = loglog_slope(ds, ratios)
    vslope = loglog_slope(ds, [r.volume for r in rows])
    expected = float(sum(Fraction(v) * b for v, b in zip(v0, b0)))
    small = rows[int(np.argmin(ds))]
    mu_rel = abs(small.mu - small.rho_volume) / small.rho_volume if small.rho_volume else float("inf")
    return ProbeReport(b0, I, v0, p.as_strings(), rows, band, slope, vslope, expected, mu_rel, tol)


def monte_carlo_form(sys: SystemSpec, weight: WeightSpec, sets: Sequence[OccupancyGrid],
                     domain: tuple, n: int, seed: int) -> float:
    """Independent Monte-Carlo estimate of the same integral over a box domain."""
    w = weight.build(sys)
    pis = [NumericMap(pi.components) for pi in sys.submersions]
    a = cutoff(sys)
    lo, hi = (np.asarray(v, dtype=float) for v in domain)
    rng = np.random.default_rng(seed)
    total = 0.0
    done = 0
    while done < n:
        m = min(1 << 18, n - done)
        X = lo + rng.uniform(size=(m, len(lo))) * (hi - lo)
        total += float(_integrand(sys, w, sets, X, pis, a).sum())
        done += m
    return total / n * float(np.prod(hi - lo))
