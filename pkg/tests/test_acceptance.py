"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

The lines are also collected and repeated in the pytest terminal summary
(see conftest.py), so ``pytest -v tests/test_acceptance.py`` shows all ten.
"""
import functools
import itertools
import random
import time
from fractions import Fraction

import numpy as np

from radonweights import systems
from radonweights.arclength import (ExponentVector, MinimalityError, diffeo_invariance_check,
                                    newton_polytope_at, q_map)
from radonweights.estimator import (SetFamily, Tolerances, WeightSpec, optimality_probe,
                                    ratio_sweep)
from radonweights.flows import cauchy_taylor
from radonweights.jets import (compare_polytopes, det_jacobian_taylor, equivalence_report,
                               psi_jet, tilde_polytope_at, vanishing_check, FlowCache)
from radonweights.poly import PolyMap
from radonweights.polytope import (UpwardPolytope, admissible_reduction, contains, finite_envelope,
                                   membership, separating_vector)
from radonweights.specfile import parse_spec

F = Fraction
TOL = Tolerances()
RESULTS: list[str] = []


def criterion(number: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:
                ok, detail = False, f"{type(exc).__name__}: {exc}"
                line = f"[criterion {number:2d}] FAIL  {title}  ({detail})"
                RESULTS.append(line)
                print(line)
                raise
            line = (f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}  "
                    f"({detail}; {time.perf_counter() - t0:.1f}s)")
            RESULTS.append(line)
            print(line)
            assert ok, line
        return run
    return wrap


# fixture systems with a base point at which everything is evaluated
def fixture_systems():
    return [
        ("parabola", systems.parabola(), (0, 0, 0)),
        ("moment-3", systems.moment_curve(3), (F(1, 3), 0, 0, 0)),
        ("xray", systems.restricted_xray(), (1, F(1, 2), 0, 0)),
        ("lw-2", systems.loomis_whitney(2), (0, 0)),
        ("lw-3", systems.loomis_whitney(3), (0, 0, 0)),
        ("frame-3", systems.commuting_frame(3), (0, 0, 0)),
        ("t4", systems.t4_curve(), (0, 0, 0)),
        ("remark-3", systems.remark_system(3), (0, 0, 0, 0)),
    ]


@criterion(1, "closed-form polytopes")
def test_closed_form_polytopes():
    checks = []
    for d in (2, 3):
        sys = systems.moment_curve(d)
        x0 = (F(2, 7),) + (0,) * d
        N = d + d * (d - 1) // 2 + 3
        got = newton_polytope_at(sys, x0, N).extreme_degrees()
        a = d * (d - 1) // 2 + 1
        checks.append((f"moment d={d}", got == {(a, d), (d, a)}, got))
    # restricted X-ray with gamma = (t, t^2): ambient 4, pattern (d, 1 + d(d-1)/2) at d = 3
    got = newton_polytope_at(systems.restricted_xray(), (F(5, 4), F(-1, 3), F(1, 2), 0), 9).extreme_degrees()
    checks.append(("xray", got == {(3, 4)}, got))
    for d in (2, 3, 4):
        got = newton_polytope_at(systems.loomis_whitney(d), (F(1, 5),) * d, d + 2).extreme_degrees()
        checks.append((f"lw d={d}", got == {(1,) * d}, got))
    bad = [f"{n}: {g}" for n, ok, g in checks if not ok]
    return not bad, f"{len(checks) - len(bad)}/{len(checks)} exact matches" + (f"; {bad}" if bad else "")


@criterion(2, "bracket/jet polytope equivalence")
def test_polytope_equivalence():
    t0 = time.perf_counter()
    problems, n_ext = [], 0
    for name, sys, x0 in fixture_systems():
        N = 9 if sys.d == 4 else 7
        lam = newton_polytope_at(sys, x0, N)
        M = max(sum(b) for b in lam.extreme_degrees()) + 1
        cmp = compare_polytopes(lam, tilde_polytope_at(sys, x0, M))
        if not cmp.agree:
            problems.append(f"{name}: generators differ {cmp.missing_from_tilde} {cmp.missing_from_lambda}")
        for b0 in sorted(lam.extreme_degrees()):
            rep = equivalence_report(sys, x0, b0, N, M)
            n_ext += 1
            if not rep.zero_equivalent:
                problems.append(f"{name} {b0}: S_lambda={rep.S_lambda} S_psi={rep.S_psi}")
    ratios = []
    for c in (F(1, 4), F(1, 2), 1, 2, 4):
        rep = equivalence_report(systems.gamma_c(c), (0, 0, 0), (2, 2))
        if rep.ratio is None:
            problems.append(f"gamma_c c={c}: a side vanished")
        else:
            ratios.append(rep.ratio)
    spread = max(ratios) / min(ratios) if ratios else float("inf")
    if spread >= TOL.family_ratio:
        problems.append(f"gamma_c ratio spread {spread}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 60:
        problems.append(f"runtime {elapsed:.0f}s exceeds 1 min")
    return not problems, (f"{n_ext} extremes zero-equivalent, gamma_c ratio spread {float(spread):.3g}"
                          + (f"; {problems}" if problems else ""))


@criterion(3, "non-extreme failure (remark system)")
def test_remark_failure():
    d = 3
    b = (1 + d * (d - 1) // 2,) + (1,) * d
    rep = equivalence_report(systems.remark_system(d), (0,) * (d + 1), b, N=9)
    ok = rep.S_lambda > 0 and rep.S_psi == 0 and not rep.extreme
    return ok, f"b={b}: S_lambda={rep.S_lambda}, S_psi={rep.S_psi}, verdict={rep.verdict!r}"


@criterion(4, "vanishing law below v0.b0")
def test_vanishing_law():
    checked, bad = 0, []
    for name, sys, x0 in fixture_systems():
        if name == "remark-3":
            continue
        lam = newton_polytope_at(sys, x0, 9 if sys.d == 4 else 7)
        for e in lam.extremes:
            M = sum(e.degree) + 1
            van = vanishing_check(sys, x0, e.degree, e.witness.v0, M)
            checked += van.checked
            if not van.holds:
                bad.append(f"{name} {e.degree}: {van.violations[:3]}")
    return not bad and checked > 0, f"{checked} coefficients checked exactly zero" + (f"; {bad}" if bad else "")


def _random_case(rng: random.Random):
    k = rng.randint(2, 4)
    gens = {tuple(rng.randint(0, 6) for _ in range(k)) for _ in range(rng.randint(1, 5))}
    P = UpwardPolytope(k, gens)
    for _ in range(100):
        b0 = tuple(F(rng.randint(0, 36), rng.randint(1, 6)) for _ in range(k))
        if not contains(P, b0):
            return P, b0
    return P, (F(0),) * k if (0,) * k not in gens else None


@criterion(5, "separation round-trips on 200 random sets")
def test_separation_round_trips():
    t0 = time.perf_counter()
    rng = random.Random(20240601)
    failures, done = [], 0
    while done < 200:
        P, b0 = _random_case(rng)
        if b0 is None:
            continue
        done += 1
        gens = P.generators
        wit = separating_vector(gens, b0)
        if not wit.verify(gens, b0):
            failures.append(("separating_vector", gens, b0))
            continue
        env = finite_envelope(wit.v0, b0)
        if membership(env, b0) is not None or not all(contains(env, g) for g in gens):
            failures.append(("finite_envelope", gens, b0))
        red = admissible_reduction(P, b0)
        if contains(red, b0) or not all(contains(red, g) for g in gens):
            failures.append(("admissible_reduction", gens, b0))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60
    return ok, f"{done} cases, {len(failures)} failures" + (f"; first {failures[0]}" if failures else "")


@criterion(6, "diffeomorphism invariance")
def test_diffeo_invariance():
    rows, pairs, problems = 0, 0, []
    for name in ("parabola", "moment3", "xray", "lw3"):
        spec = parse_spec(name)
        sys = spec.system()
        inv = spec.invariance
        if len(inv["pairs"]) < 3 or len(inv["samples"]) < 5:
            problems.append(f"{name}: fixture too small")
        for pr in inv["pairs"]:
            F_ = PolyMap(pr["F"], sys.d)
            Gs = [PolyMap(g, sys.d - 1) for g in pr["G"]]
            try:
                rep = diffeo_invariance_check(sys, spec.I0, F_, Gs, inv["samples"])
            except MinimalityError as exc:
                problems.append(f"{name}: {exc}")
                continue
            pairs += 1
            rows += len(rep.rows)
            if not rep.holds:
                problems.append(f"{name}: identity fails for {pr}")
    # deliberately non-minimal degree: the check must refuse, and forcing it must expose a mismatch
    cub = parse_spec("cubic")
    csys = cub.system()
    detected = 0
    for pr in cub.invariance["pairs"]:
        F_ = PolyMap(pr["F"], csys.d)
        Gs = [PolyMap(g, csys.d - 1) for g in pr["G"]]
        try:
            diffeo_invariance_check(csys, cub.I0, F_, Gs, cub.invariance["samples"])
            problems.append("cubic: minimality not flagged")
        except MinimalityError:
            pass
        rep = diffeo_invariance_check(csys, cub.I0, F_, Gs, cub.invariance["samples"], force=True)
        detected += not rep.holds
    if detected == 0:
        problems.append("cubic: forced check never failed")
    return not problems, (f"{pairs} pairs x samples = {rows} exact rows; non-minimal failure detected "
                          f"in {detected} pair(s)" + (f"; {problems}" if problems else ""))


@criterion(7, "q involution")
def test_q_involution():
    rng = random.Random(99)
    n, bad = 0, []
    while n < 100:
        k = rng.randint(2, 5)
        b = tuple(F(rng.randint(0, 40), rng.randint(1, 12)) for _ in range(k))
        if sum(b) <= 1 or sum(q_map(b)) <= 1:
            continue
        n += 1
        if q_map(q_map(b)) != b:
            bad.append(b)
    return not bad, f"{n} random vectors, {len(bad)} mismatches"


DELTAS8 = [2.0 ** -j for j in range(3, 9)]


def _sweep(sys, kind, I, I0):
    fam = SetFamily("cc-ball", (0, 0, 0), DELTAS8, I=I, v0=(1, 1), n_samples=200_000, seed=0)
    return ratio_sweep(sys, WeightSpec(kind, I0=I0), fam, ExponentVector(["3/2", "3/2"]), cells=48, tol=TOL)


@criterion(8, "estimator contrasts")
def test_estimator_contrasts():
    I_par = ((1,), (2,), (1, 2))
    I_t4 = ((1,), (2,), (1, 2, 2, 2))
    par = _sweep(systems.parabola(), "rho", I_par, I_par)
    t4u = _sweep(systems.t4_curve(), "unweighted", I_t4, None)
    t4w = _sweep(systems.t4_curve(), "rho", I_t4, I_par)
    quad = max(t.max_quad_change for t in (par, t4u, t4w))
    ok = (abs(par.slope) <= TOL.bounded_slope and t4u.slope <= TOL.blowup_slope
          and abs(t4w.slope) <= TOL.bounded_slope and quad < TOL.quad_halving)
    return ok, (f"parabola weighted slope {par.slope:+.4f}, t4 unweighted {t4u.slope:+.4f}, "
                f"t4 weighted {t4w.slope:+.4f}, max h-halving change {quad:.2%}")


@criterion(9, "optimality scaling")
def test_optimality_scaling():
    deltas = [2.0 ** -j for j in range(3, 8)]
    rep = optimality_probe(systems.parabola(), (2, 2), (0, 0, 0), deltas, n_samples=200_000, seed=0, tol=TOL)
    ok = rep.band_ok and rep.volume_ok
    return ok, (f"band {rep.band:.3f} (<= {TOL.band_factor}), trend slope {rep.slope:+.4f}, "
                f"log-volume slope {rep.volume_slope:.4f} vs v0.deg I = {rep.expected_volume_slope:g}")


@criterion(10, "jet coefficients vs finite differences")
def test_fd_cross_validation():
    worst, count, where = 0.0, 0, None
    for name, sys, x0 in fixture_systems():
        lam = newton_polytope_at(sys, x0, 9 if sys.d == 4 else 7)
        top = max(sum(b) for b in lam.generators()) - sys.d
        order = min(top + 1, 4)
        cache = FlowCache(sys)
        xf = [float(v) for v in x0]
        for J in itertools.product(range(1, sys.k + 1), repeat=sys.d):
            exact = det_jacobian_taylor(psi_jet(sys, J, x0, order + 1, cache))
            live = {a: c for a, c in exact.items() if c and sum(a) <= order}
            if not live:
                continue
            num = cauchy_taylor(sys, J, xf, order)
            for a, c in live.items():
                err = abs(num[a] - float(c)) / abs(float(c))
                count += 1
                if err > worst:
                    worst, where = err, (name, J, a)
    ok = count > 0 and worst <= TOL.fd_relative
    return ok, f"{count} nonzero entries, max relative error {worst:.2e} at {where}"
