"""Command line front end.

    radonweights SUBCOMMAND SPEC [--out DIR] [--seed INT] [--jobs INT] [--tolerances PATH]

SPEC is a path or the name of a bundled fixture (``parabola``, ``remark``...).
``report.json`` is deterministic for a given spec and seed; wall-clock times
go to ``timing.json``.  Exit status: 0 when every check passes, 1 when some
check fails, 2 for unusable input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys as _sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .arclength import (ExponentVector, MinimalityError, diffeo_invariance_check, exponent_region_check,
                        newton_polytope_at, newton_polytope_of_region, q_map, weight_rho)
from .estimator import (ProbeRefused, SetFamily, Tolerances, WeightSpec, optimality_probe,
                        ratio_sweep)
from .flows import cauchy_taylor
from .jets import (FlowCache, coefficients_csv, compare_polytopes, det_jacobian_taylor,
                   equivalence_report, psi_jet, tilde_polytope_at, vanishing_check, weight_rho_tilde,
                   TildeEntry)
from .poly import PolyMap, lie_bracket
from .polytope import (MemberError, UpwardPolytope, admissible_reduction, contains, finite_envelope,
                       membership, separating_vector)
from .specfile import ProblemSpec, SpecError, SpecIssue, emit, parse_spec, parse_spec_data
from .words import contract, jacobi_expand, lambda_I, lambda_at, minimality_witness, tuple_degree, word_degree

SUBCOMMANDS = ("brackets", "polytope", "separate", "weight", "equivalence", "invariance", "estimate",
               "optimality")


def _js(obj):
    """JSON-ready copy: rationals as "num/den" strings, tuples as lists."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else " ".join(map(str, k)): _js(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_js(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _words_str(I) -> str:
    return " ".join("(" + ",".join(map(str, w)) + ")" for w in I)


class Run:
    def __init__(self, spec: ProblemSpec, tol: Tolerances, jobs: int = 1):
        self.spec = spec
        self.tol = tol
        self.jobs = jobs
        self.results: dict = {}
        self.checks: list[dict] = []
        self.tables: dict[str, str] = {}
        self.timing: dict[str, float] = {}
        self._sys = None

    @property
    def system(self):
        if self._sys is None:
            self._sys = self.spec.system()
        return self._sys

    def check(self, name: str, ok: bool, detail: str = ""):
        self.checks.append({"name": name, "ok": bool(ok), "detail": detail})

    def need(self, *keys):
        missing = [k for k in keys if getattr(self.spec, k) is None]
        if missing:
            raise SpecError([SpecIssue(k, "required by this subcommand") for k in missing])

    @property
    def failures(self) -> list[dict]:
        return [c for c in self.checks if not c["ok"]]

    def report(self, subcommand: str) -> dict:
        try:
            import numba
            nb = numba.__version__
        except ImportError:
            nb = None
        return _js({
            "subcommand": subcommand,
            "ok": not self.failures,
            "spec": emit(self.spec),
            "tolerances": self.tol.as_dict(),
            "versions": {"radonweights": __version__, "numpy": np.__version__, "numba": nb,
                         "backend": BACKEND},
            "results": self.results,
            "checks": self.checks,
            "failures": self.failures,
        })


# subcommands ---------------------------------------------------------------------------

def cmd_brackets(run: Run):
    sp, sys = run.spec, run.system
    L = min(sys.default_N(sp.b0), 4) if sp.N is None else min(sp.N, 4)
    words = sys.table.nonzero_words(L)
    rows = []
    for w in words:
        rows.append([",".join(map(str, w)), " ".join(map(str, word_degree(w, sys.k))),
                     sys.table.field(w).to_str(sys.names)])
    run.tables["brackets.csv"] = _csv(["word", "degree", "field"], rows)
    run.results["max_length"] = L
    run.results["nonzero_words"] = len(words)
    # expansion of [X_w, X_w'] into right-nested words must agree with the direct bracket
    short = [w for w in words if len(w) <= 2]
    bad = []
    for w in words:
        for wp in short:
            if len(w) + len(wp) > L:
                continue
            lhs = lie_bracket(sys.table.field(w), sys.table.field(wp))
            if contract(sys.table, jacobi_expand(w, wp)) != lhs:
                bad.append([list(w), list(wp)])
    run.check("bracket expansion consistency", not bad, f"{len(bad)} mismatched pairs")
    if sp.I0 is not None:
        lam = lambda_I(sys.table, sp.I0)
        b0 = tuple_degree(sp.I0, sys.k)
        wit = minimality_witness(sys.table, b0)
        info = {"I0": sp.I0, "degree": b0, "lambda": lam.to_str(sys.names), "minimal": wit is None}
        if wit is not None:
            info["below"] = {"degree": wit[0], "tuple": wit[1]}
        if sp.x0 is not None:
            info["lambda_at_x0"] = lambda_at(sys.table, sp.I0, sp.x0)
        run.results["I0"] = info


def _polytope_report(run: Run):
    sp, sys = run.spec, run.system
    if sp.x0 is not None:
        return newton_polytope_at(sys, sp.x0, sp.N)
    if sp.samples:
        return newton_polytope_of_region(sys, sp.samples, sp.N)
    raise SpecError([SpecIssue("x0", "x0 or samples required")])


def cmd_polytope(run: Run):
    sp = run.spec
    rep = _polytope_report(run)
    gens = rep.generators()
    run.results.update({"N": rep.N, "note": rep.note, "generators": gens,
                        "extremes": [{"degree": e.degree, "certified": e.certified,
                                      "v0": e.witness.v0, "epsilon": e.witness.epsilon}
                                     for e in rep.extremes]})
    for e in rep.extremes:
        others = [g for g in gens if g != e.degree]
        run.check(f"witness for {e.degree}", e.witness.verify(others, e.degree),
                  "certified" if e.certified else "separating vector only")
    if "extremes" in sp.expect:
        want = sorted(tuple(b) for b in sp.expect["extremes"])
        got = sorted(rep.extreme_degrees())
        run.check("expected extremes", want == got, f"got {got}, expected {want}")
    rows = []
    for deg in sorted(rep.tuples):
        for I, v in rep.tuples[deg]:
            rows.append([" ".join(map(str, deg)), _words_str(I), str(v)])
    run.tables["tuples.csv"] = _csv(["degree", "tuple", "lambda"], rows)


def cmd_separate(run: Run):
    sp = run.spec
    if sp.generators is not None:
        gens = [tuple(g) for g in sp.generators]
        k = len(gens[0]) if gens else run.system.k
    else:
        rep = _polytope_report(run)
        gens, k = rep.generators(), rep.polytope.k
    query = sp.query if sp.query is not None else sp.b0
    if query is None:
        raise SpecError([SpecIssue("query", "query or b0 required")])
    query = tuple(Fraction(v) for v in query)
    if len(query) != k:
        raise SpecError([SpecIssue("query", f"expected {k} entries")])
    P = UpwardPolytope(k, gens)
    run.results["generators"] = P.sorted_generators()
    run.results["query"] = query
    cert = membership(P, query)
    if cert is not None:
        run.results["member"] = True
        run.results["certificate"] = {"support": [{"generator": g, "weight": w} for g, w in cert.support],
                                      "slack": cert.slack}
        run.check("membership certificate", cert.verify(query))
        return
    run.results["member"] = False
    wit = separating_vector(P.generators, query)
    run.results["separation"] = {"v0": wit.v0, "epsilon": wit.epsilon}
    run.check("separation inequalities", wit.verify(P.generators, query))
    env = finite_envelope(wit.v0, query)
    run.results["envelope"] = env.sorted_generators()
    run.check("envelope excludes query", not contains(env, query))
    run.check("envelope contains generators", all(contains(env, g) for g in P.generators))
    red = admissible_reduction(P, query)
    run.results["reduction"] = red.sorted_generators()
    run.check("reduction excludes query", not contains(red, query))
    run.check("reduction contains generators", all(contains(red, g) for g in P.generators))


def _points(sp: ProblemSpec):
    pts = ([sp.x0] if sp.x0 is not None else []) + list(sp.samples or [])
    if not pts:
        raise SpecError([SpecIssue("x0", "x0 or samples required")])
    return pts


def cmd_weight(run: Run):
    sp, sys = run.spec, run.system
    if sp.I0 is None and sp.J0 is None:
        raise SpecError([SpecIssue("I0", "I0 or J0/beta0 required")])
    pts = _points(sp)
    if sp.I0 is not None:
        rows = []
        for x in pts:
            w = weight_rho(sys, sp.I0, x)
            rows.append({"x": x, "radicand": w.radicand, "exponent": w.exponent, "value": w.value})
        run.results["rho"] = {"I0": sp.I0, "values": rows}
        b0 = tuple_degree(sp.I0, sys.k)
    if sp.J0 is not None:
        if sp.beta0 is None:
            raise SpecError([SpecIssue("beta0", "required with J0")])
        cache = FlowCache(sys)
        rows = []
        for x in pts:
            w = weight_rho_tilde(sys, sp.J0, sp.beta0, x, cache)
            rows.append({"x": x, "radicand": w.radicand, "exponent": w.exponent, "value": w.value})
        run.results["rho_tilde"] = {"J0": sp.J0, "beta0": sp.beta0, "values": rows}
        if sp.x0 is not None:
            _fd_cross_check(run, cache)
    b0 = sp.b0 if sp.b0 is not None else (b0 if sp.I0 is not None else None)
    if b0 is not None and sum(b0) > 1:
        q = q_map(b0)
        run.results["q"] = q
        run.check("q involution", q_map(q) == tuple(Fraction(v) for v in b0))
        verdicts = []
        for p in sp.exponent_vectors():
            v = exponent_region_check(b0, p)
            verdicts.append({"p": p.as_strings(), "admissible": v.ok, "reasons": v.reasons})
        run.results["exponents"] = verdicts
        if "admissible" in sp.expect:
            got = [v["admissible"] for v in verdicts]
            run.check("expected exponent verdicts", got == list(sp.expect["admissible"]), str(got))


def _fd_cross_check(run: Run, cache):
    sp, sys = run.spec, run.system
    order = sum(sp.beta0) + 2
    fj = psi_jet(sys, sp.J0, sp.x0, order, cache)
    exact = det_jacobian_taylor(fj)
    entries = [TildeEntry(tuple(sp.J0), a, c) for a, c in sorted(exact.items())]
    run.tables["coefficients.csv"] = coefficients_csv(entries, sys.k)
    num = cauchy_taylor(sys, sp.J0, [float(v) for v in sp.x0], order - 1)
    worst = 0.0
    for a, c in exact.items():
        if sum(a) <= order - 1 and c:
            worst = max(worst, abs(num[a] - float(c)) / abs(float(c)))
    run.results["fd_max_relative_error"] = worst
    run.check("jet coefficients vs numerical flow", worst <= run.tol.fd_relative,
              f"max relative error {worst:.3e}")


def cmd_equivalence(run: Run):
    sp, sys = run.spec, run.system
    run.need("x0")
    lam = newton_polytope_at(sys, sp.x0, sp.N if sp.N is not None else sys.default_N(sp.b0))
    targets = [tuple(sp.b0)] if sp.b0 is not None else sorted(lam.extreme_degrees())
    out, rows = [], []
    for b0 in targets:
        rep = equivalence_report(sys, sp.x0, b0, lam.N, sp.M)
        entry = {"b0": b0, "N": rep.N, "M": rep.M, "extreme": rep.extreme, "S_lambda": rep.S_lambda,
                 "S_psi": rep.S_psi, "ratio": rep.ratio, "verdict": rep.verdict, "warnings": rep.warnings}
        want = sp.expect.get("verdict")
        if want is not None and sp.b0 is not None:
            run.check(f"verdict at {b0}", rep.verdict == want, f"got {rep.verdict!r}, expected {want!r}")
        else:
            run.check(f"verdict at {b0}", rep.verdict.startswith("pass"), rep.verdict)
        if rep.extreme:
            v0 = next(e.witness.v0 for e in lam.extremes if e.degree == b0)
            van = vanishing_check(sys, sp.x0, b0, v0, rep.M)
            entry["vanishing"] = {"v0": v0, "checked": van.checked, "violations": len(van.violations)}
            run.check(f"vanishing below v0.b0 at {b0}", van.holds, f"{van.checked} coefficients checked")
        out.append(entry)
        for I, v in rep.lambda_terms:
            rows.append([" ".join(map(str, b0)), "lambda", _words_str(I), "", str(v)])
        for t in rep.psi_terms:
            rows.append([" ".join(map(str, b0)), "psi", " ".join(map(str, t.J)),
                         " ".join(map(str, t.alpha)), str(t.derivative)])
    run.results["targets"] = out
    M = sp.M if sp.M is not None else max(sum(b) for b in targets) + 1
    tilde = tilde_polytope_at(sys, sp.x0, M)
    cmp = compare_polytopes(lam, tilde)
    run.results["comparison"] = {"level": cmp.level, "lambda_generators": lam.generators(),
                                 "tilde_generators": tilde.generators(),
                                 "missing_from_tilde": cmp.missing_from_tilde,
                                 "missing_from_lambda": cmp.missing_from_lambda}
    run.check("bracket and jet polytopes agree", cmp.agree, f"compared up to |b|_1 <= {cmp.level}")
    run.tables["equivalence_terms.csv"] = _csv(["b0", "side", "tuple", "alpha", "value"], rows)


def cmd_invariance(run: Run):
    sp, sys = run.spec, run.system
    inv = sp.invariance
    if not inv or not inv["pairs"]:
        raise SpecError([SpecIssue("invariance.pairs", "at least one (F, G) pair required")])
    I0 = inv.get("I0") or sp.I0
    if I0 is None:
        raise SpecError([SpecIssue("I0", "required")])
    samples = inv["samples"] or _points(sp)
    expect_fail = sp.expect.get("invariance") == "fails"
    out, any_failed, minimal = [], False, None
    for i, pr in enumerate(inv["pairs"]):
        F = PolyMap(pr["F"], sys.d)
        Gs = [PolyMap(g, sys.d - 1) for g in pr["G"]]
        try:
            rep = diffeo_invariance_check(sys, I0, F, Gs, samples, force=expect_fail)
        except MinimalityError as exc:
            run.check(f"pair {i}", False, str(exc))
            out.append({"pair": i, "error": str(exc)})
            continue
        minimal = rep.minimal
        rows = [{"x": r.point, "lhs": r.lhs, "rhs": r.rhs, "holds": r.holds} for r in rep.rows]
        out.append({"pair": i, "F": [c.to_str(sys.names) for c in F.components],
                    "G": [[c.to_str([f"y{m + 1}" for m in range(sys.d - 1)]) for c in G.components] for G in Gs],
                    "minimal": rep.minimal, "holds": rep.holds, "rows": rows})
        any_failed = any_failed or not rep.holds
        if not expect_fail:
            run.check(f"pair {i}", rep.holds, f"{len(rep.rows)} sample points")
    run.results["I0"] = I0
    run.results["pairs"] = out
    if expect_fail:
        run.check("non-minimal degree detected", minimal is False and any_failed,
                  f"minimal={minimal}, identity failed on some pair: {any_failed}")


def _sweep_p(sp: ProblemSpec, sweep: dict) -> ExponentVector:
    if "p" in sweep:
        return ExponentVector(sweep["p"])
    if sp.exponents:
        return sp.exponent_vectors()[0]
    if sp.b0 is not None:
        return ExponentVector.from_reciprocals(q_map(sp.b0))
    raise SpecError([SpecIssue("sweep.p", "no exponent vector given")])


def _one_sweep(spec_data: dict, kind: str, tol_data: dict):
    sp = parse_spec_data(spec_data)
    sys = sp.system()
    sw = sp.sweep
    fam = SetFamily(sw["kind"], sp.x0, [float(v) for v in sw["deltas"]], I=sw.get("I"),
                    v0=sw.get("v0"), exponents=sw.get("box_exponents"),
                    n_samples=sw.get("n_samples", 200_000), seed=sp.seed,
                    image_cells=sw.get("image_cells", 128))
    weight = WeightSpec(kind, I0=sp.I0, J0=sp.J0, beta0=sp.beta0)
    table = ratio_sweep(sys, weight, fam, _sweep_p(sp, sw), sw.get("cells", 48), Tolerances(**tol_data))
    return kind, table


def _slope_flag(slope: float, tol: Tolerances) -> str:
    if abs(slope) <= tol.bounded_slope:
        return "bounded"
    if slope <= tol.blowup_slope:
        return "blowup"
    return "indeterminate"


def cmd_estimate(run: Run):
    sp = run.spec
    run.need("x0", "sweep")
    sw = sp.sweep
    if sw["kind"] == "cc-ball" and sw.get("I") is None:
        raise SpecError([SpecIssue("sweep.I", "cc-ball sweeps need the word tuple I")])
    data = emit(sp)
    tol_data = run.tol.as_dict()
    jobs = [(data, kind, tol_data) for kind in sw["weights"]]
    if run.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=run.jobs) as ex:
            done = list(ex.map(_one_sweep, *zip(*jobs)))
    else:
        done = [_one_sweep(*j) for j in jobs]
    expected = sp.expect.get("slopes", {})
    out = {}
    for kind, table in done:
        flag = _slope_flag(table.slope, run.tol)
        out[kind] = {"p": table.p, "slope": table.slope, "flag": flag, "band": table.band,
                     "max_quad_change": table.max_quad_change,
                     "max_measure_change": table.max_measure_change, "notes": table.notes}
        run.tables[f"sweep_{kind}.csv"] = table.csv()
        run.check(f"{kind}: quadrature h-halving", table.max_quad_change < run.tol.quad_halving,
                  f"max relative change {table.max_quad_change:.4f}")
        if kind in expected:
            run.check(f"{kind}: slope {expected[kind]}", flag == expected[kind],
                      f"slope {table.slope:.4f} flagged {flag}")
        if table.max_measure_change >= run.tol.measure_halving:
            out[kind]["notes"] = out[kind]["notes"] + ["image measure not resolution-stable"]
    run.results["sweeps"] = out


def cmd_optimality(run: Run):
    sp, sys = run.spec, run.system
    run.need("x0", "b0", "probe")
    pr = sp.probe
    p = ExponentVector(pr["p"]) if "p" in pr else None
    want = sp.expect.get("probe", "pass")
    try:
        rep = optimality_probe(sys, sp.b0, sp.x0, [float(v) for v in pr["deltas"]], p,
                               n_samples=pr.get("n_samples", 200_000), seed=sp.seed,
                               ball_cells=pr.get("ball_cells", 48), image_cells=pr.get("image_cells", 128),
                               N=sp.N, tol=run.tol)
    except ProbeRefused as exc:
        run.results["refused"] = str(exc)
        run.check("probe refused", want == "refused", str(exc))
        return
    run.results.update({"b0": rep.b0, "I": rep.I, "v0": rep.v0, "p": rep.p, "band": rep.band,
                        "slope": rep.slope, "volume_slope": rep.volume_slope,
                        "expected_volume_slope": rep.expected_volume_slope, "mu_vs_rho": rep.mu_vs_rho})
    run.tables["probe.csv"] = rep.csv()
    if want == "refused":
        run.check("probe refused", False, "probe ran")
        return
    run.check("ratio band", rep.band_ok, f"band {rep.band:.3f}, slope {rep.slope:.4f}")
    run.check("ball volume scaling", rep.volume_ok,
              f"slope {rep.volume_slope:.4f} vs {rep.expected_volume_slope:.4f}")
    run.check("mu vs rho times volume", rep.mu_ok, f"relative gap {rep.mu_vs_rho:.4f}")


COMMANDS = {name: globals()[f"cmd_{name}"] for name in SUBCOMMANDS}


def run(subcommand: str, spec: ProblemSpec, tol: Tolerances = Tolerances(), jobs: int = 1) -> Run:
    if subcommand not in COMMANDS:
        raise ValueError(f"unknown subcommand {subcommand!r}")
    r = Run(spec, tol, jobs)
    t0 = time.perf_counter()
    COMMANDS[subcommand](r)
    r.timing[subcommand] = time.perf_counter() - t0
    return r


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec_pos", nargs="?", metavar="SPEC", help="spec path or bundled fixture name")
    common.add_argument("--spec", dest="spec_opt", metavar="PATH")
    common.add_argument("--out", metavar="DIR", help="write report.json, timing.json and CSVs here")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--tolerances", metavar="PATH")
    ap = argparse.ArgumentParser(prog="radonweights", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def _fail_input(out: Path | None, issues: list[dict]) -> int:
    doc = json.dumps({"ok": False, "failures": issues}, indent=1, sort_keys=True)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "failures.json").write_text(doc + "\n")
    print(doc, file=_sys.stderr)
    return 2


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out = Path(args.out) if args.out else None
    path = args.spec_opt or args.spec_pos
    if path is None:
        return _fail_input(out, [{"name": "spec", "detail": "no spec given"}])
    if args.jobs < 1:
        return _fail_input(out, [{"name": "--jobs", "detail": "must be at least 1"}])
    try:
        spec = parse_spec(path)
        tol = Tolerances.load(args.tolerances) if args.tolerances else Tolerances()
    except SpecError as exc:
        return _fail_input(out, [{"name": i.path, "detail": i.message} for i in exc.issues])
    except (OSError, ValueError) as exc:
        return _fail_input(out, [{"name": "input", "detail": str(exc)}])
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    try:
        r = run(args.command, spec, tol, args.jobs)
    except SpecError as exc:
        return _fail_input(out, [{"name": i.path, "detail": i.message} for i in exc.issues])
    except (ValueError, MemberError) as exc:
        return _fail_input(out, [{"name": args.command, "detail": str(exc)}])
    report = json.dumps(r.report(args.command), indent=1, sort_keys=True) + "\n"
    if out is None:
        _sys.stdout.write(report)
    else:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report)
        (out / "timing.json").write_text(json.dumps(r.timing, indent=1, sort_keys=True) + "\n")
        (out / "failures.json").write_text(json.dumps(_js(r.failures), indent=1) + "\n")
        for name, text in sorted(r.tables.items()):
            (out / name).write_text(text)
        for c in r.checks:
            print(("ok   " if c["ok"] else "FAIL ") + c["name"] + (f"  [{c['detail']}]" if c["detail"] else ""))
    return 0 if not r.failures else 1


if __name__ == "__main__":
    raise SystemExit(main())
