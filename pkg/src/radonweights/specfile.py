"""Problem specifications: a JSON document with exact rationals as strings.

Polynomials are either expression strings over the declared variable names
(``"x2 - t**2"``) or lists of ``[exponents, numerator, denominator]`` triples.
``emit`` writes the triple form, so ``parse_spec_data(emit(spec)) == spec``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields as dc_fields
from fractions import Fraction
from pathlib import Path
from typing import Any

from .arclength import ExponentVector, SystemSpec
from .poly import Polynomial, PolyMap, VectorField, as_fraction, parse_polynomial

FIXTURE_DIR = Path(__file__).parent / "fixtures"

TOP_KEYS = {
    "name", "d", "variables", "mode", "submersions", "fields", "box", "N", "M", "x0", "samples",
    "b0", "I0", "J0", "beta0", "exponents", "generators", "query", "sweep", "invariance",
    "probe", "seed", "expect",
}
SWEEP_KEYS = {"kind", "deltas", "I", "v0", "box_exponents", "n_samples", "image_cells", "cells",
              "weights", "p"}
PROBE_KEYS = {"deltas", "n_samples", "ball_cells", "image_cells", "p"}
INVARIANCE_KEYS = {"pairs", "samples", "I0"}
EXPECT_KEYS = {"extremes", "verdict", "slopes", "admissible", "invariance", "probe"}


@dataclass
class SpecIssue:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


class SpecError(ValueError):
    def __init__(self, issues: list[SpecIssue]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))


@dataclass
class ProblemSpec:
    name: str
    d: int
    variables: list[str]
    mode: str
    submersions: list[list[Polynomial]] | None
    fields: list[list[Polynomial]] | None
    box: list[tuple[Fraction, Fraction]]
    N: int | None = None
    M: int | None = None
    x0: tuple | None = None
    samples: list[tuple] | None = None
    b0: tuple | None = None
    I0: tuple | None = None
    J0: tuple | None = None
    beta0: tuple | None = None
    exponents: list[list] | None = None
    generators: list[tuple] | None = None
    query: tuple | None = None
    sweep: dict | None = None
    invariance: dict | None = None
    probe: dict | None = None
    seed: int = 0
    expect: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.submersions if self.mode == "submersions" else self.fields)

    def system(self) -> SystemSpec:
        if self.mode == "submersions":
            pis = [PolyMap(c, self.d) for c in self.submersions]
            return SystemSpec.from_submersions(pis, box=self.box, N=self.N, names=self.variables,
                                               name=self.name)
        return SystemSpec(self.d, [VectorField(c) for c in self.fields], box=self.box, N=self.N,
                          names=self.variables, name=self.name)

    def exponent_vectors(self) -> list[ExponentVector]:
        return [ExponentVector(p) for p in (self.exponents or [])]


class _Reader:
    def __init__(self):
        self.issues: list[SpecIssue] = []

    def fail(self, path, msg):
        self.issues.append(SpecIssue(path, msg))
        return None

    def rational(self, v, path) -> Fraction | None:
        if isinstance(v, float):
            return self.fail(path, f"float literal {v!r}; write rationals as \"num/den\" strings")
        try:
            return as_fraction(v)
        except (TypeError, ValueError) as exc:
            return self.fail(path, str(exc))

    def integer(self, v, path, minimum=None) -> int | None:
        if isinstance(v, bool) or not isinstance(v, int):
            return self.fail(path, f"expected an integer, got {v!r}")
        if minimum is not None and v < minimum:
            return self.fail(path, f"must be at least {minimum}")
        return v

    def point(self, v, path, n=None):
        if not isinstance(v, list):
            return self.fail(path, "expected a list")
        if n is not None and len(v) != n:
            return self.fail(path, f"expected {n} entries, got {len(v)}")
        vals = [self.rational(x, f"{path}[{i}]") for i, x in enumerate(v)]
        return None if any(x is None for x in vals) else tuple(vals)

    def int_tuple(self, v, path, n=None, minimum=0):
        if not isinstance(v, list):
            return self.fail(path, "expected a list of integers")
        if n is not None and len(v) != n:
            return self.fail(path, f"expected {n} entries, got {len(v)}")
        vals = [self.integer(x, f"{path}[{i}]", minimum) for i, x in enumerate(v)]
        return None if any(x is None for x in vals) else tuple(vals)

    def polynomial(self, v, names, path) -> Polynomial | None:
        n = len(names)
        if isinstance(v, str):
            try:
                return parse_polynomial(v, names)
            except (ValueError, SyntaxError) as exc:
                return self.fail(path, f"cannot parse polynomial: {exc}")
        if isinstance(v, list):
            terms = {}
            for i, t in enumerate(v):
                p = f"{path}[{i}]"
                if not (isinstance(t, list) and len(t) == 3):
                    return self.fail(p, "expected [exponents, numerator, denominator]")
                exps = self.int_tuple(t[0], p + "[0]", n)
                num = self.integer(t[1], p + "[1]")
                den = self.integer(t[2], p + "[2]", 1)
                if exps is None or num is None or den is None:
                    return None
                terms[exps] = terms.get(exps, 0) + Fraction(num, den)
            return Polynomial(n, terms)
        return self.fail(path, "polynomial must be an expression string or a triple list")

    def word_tuple(self, v, path, k):
        if not isinstance(v, list):
            return self.fail(path, "expected a list of words")
        out = []
        for i, w in enumerate(v):
            w = self.int_tuple(w, f"{path}[{i}]", minimum=1)
            if w is None:
                return None
            if not w or max(w) > k:
                return self.fail(f"{path}[{i}]", f"letters must lie in 1..{k}")
            out.append(w)
        return tuple(out)


def _check_keys(r: _Reader, obj: dict, allowed: set, path: str):
    for key in obj:
        if key not in allowed:
            r.fail(f"{path}.{key}" if path else key, "unknown key")


def parse_spec_data(data: Any) -> ProblemSpec:
    r = _Reader()
    if not isinstance(data, dict):
        raise SpecError([SpecIssue("$", "top level must be an object")])
    _check_keys(r, data, TOP_KEYS, "")
    d = r.integer(data.get("d"), "d", 1) if "d" in data else r.fail("d", "required")
    if d is None:
        raise SpecError(r.issues)
    names = data.get("variables") or [f"x{i}" for i in range(d)]
    if not (isinstance(names, list) and all(isinstance(n, str) and n.isidentifier() for n in names)):
        r.fail("variables", "expected a list of identifier strings")
        names = [f"x{i}" for i in range(d)]
    if len(names) != d:
        r.fail("variables", f"expected {d} names, got {len(names)}")
        raise SpecError(r.issues)
    mode = data.get("mode", "submersions" if "submersions" in data else "fields")
    subs = flds = None
    if mode == "submersions":
        raw = data.get("submersions")
        if not isinstance(raw, list):
            r.fail("submersions", "required list of maps")
        else:
            subs = []
            for j, comps in enumerate(raw):
                if not isinstance(comps, list) or len(comps) != d - 1:
                    r.fail(f"submersions[{j}]", f"a submersion needs {d - 1} components")
                    continue
                subs.append([r.polynomial(c, names, f"submersions[{j}][{i}]") for i, c in enumerate(comps)])
            k = len(raw)
    elif mode == "fields":
        raw = data.get("fields")
        if not isinstance(raw, list):
            r.fail("fields", "required list of vector fields")
        else:
            flds = []
            for j, comps in enumerate(raw):
                if not isinstance(comps, list) or len(comps) != d:
                    r.fail(f"fields[{j}]", f"a field needs {d} components")
                    continue
                flds.append([r.polynomial(c, names, f"fields[{j}][{i}]") for i, c in enumerate(comps)])
            k = len(raw)
    else:
        r.fail("mode", "must be 'submersions' or 'fields'")
    if subs is None and flds is None:
        raise SpecError(r.issues)
    if k < 2:
        r.fail("submersions" if mode == "submersions" else "fields", f"need k >= 2, got {k}")
    box_raw = data.get("box", [["-1", "1"]] * d)
    box = []
    if not isinstance(box_raw, list) or len(box_raw) != d:
        r.fail("box", f"expected {d} [lo, hi] pairs")
    else:
        for i, side in enumerate(box_raw):
            pt = r.point(side, f"box[{i}]", 2)
            if pt is not None:
                if pt[0] >= pt[1]:
                    r.fail(f"box[{i}]", "lower end must be below upper end")
                box.append(pt)
    out: dict[str, Any] = dict(name=str(data.get("name", "system")), d=d, variables=list(names),
                               mode=mode, submersions=subs, fields=flds, box=box)
    for key in ("N", "M"):
        if key in data:
            out[key] = r.integer(data[key], key, 1)
    if "seed" in data:
        out["seed"] = r.integer(data["seed"], "seed", 0)
    if "x0" in data:
        out["x0"] = r.point(data["x0"], "x0", d)
    if "samples" in data:
        if not isinstance(data["samples"], list) or not data["samples"]:
            r.fail("samples", "expected a nonempty list of points")
        else:
            out["samples"] = [r.point(s, f"samples[{i}]", d) for i, s in enumerate(data["samples"])]
    if "b0" in data:
        out["b0"] = r.int_tuple(data["b0"], "b0", k)
    if "I0" in data:
        out["I0"] = r.word_tuple(data["I0"], "I0", k)
        if out["I0"] is not None and len(out["I0"]) != d:
            r.fail("I0", f"need {d} words")
    if "J0" in data:
        out["J0"] = r.int_tuple(data["J0"], "J0", d, 1)
        if out["J0"] and max(out["J0"]) > k:
            r.fail("J0", f"letters must lie in 1..{k}")
    if "beta0" in data:
        out["beta0"] = r.int_tuple(data["beta0"], "beta0", d)
    if "exponents" in data:
        exps = []
        for i, p in enumerate(data["exponents"] if isinstance(data["exponents"], list) else []):
            if not isinstance(p, list) or len(p) != k:
                r.fail(f"exponents[{i}]", f"expected {k} entries")
                continue
            row = []
            for j, v in enumerate(p):
                if isinstance(v, str) and v.strip().lower() in ("inf", "infinity"):
                    row.append("inf")
                    continue
                f = r.rational(v, f"exponents[{i}][{j}]")
                if f is not None and f < 1:
                    r.fail(f"exponents[{i}][{j}]", "exponents must be at least 1")
                row.append(f)
            exps.append(row)
        out["exponents"] = exps
    if "generators" in data:
        if not isinstance(data["generators"], list):
            r.fail("generators", "expected a list of integer tuples")
        else:
            out["generators"] = [r.int_tuple(g, f"generators[{i}]") for i, g in enumerate(data["generators"])]
            dims = {len(g) for g in out["generators"] if g is not None}
            if len(dims) > 1:
                r.fail("generators", "generators have different lengths")
    if "query" in data:
        out["query"] = r.point(data["query"], "query")
    if "sweep" in data:
        out["sweep"] = _parse_sweep(r, data["sweep"], k, d)
    if "probe" in data:
        out["probe"] = _parse_probe(r, data["probe"])
    if "invariance" in data:
        out["invariance"] = _parse_invariance(r, data["invariance"], names, d, k)
    if "expect" in data:
        if not isinstance(data["expect"], dict):
            r.fail("expect", "expected an object")
        else:
            _check_keys(r, data["expect"], EXPECT_KEYS, "expect")
            out["expect"] = data["expect"]
    if r.issues:
        raise SpecError(r.issues)
    return ProblemSpec(**out)


def _parse_deltas(r, v, path):
    if not isinstance(v, list) or not v:
        return r.fail(path, "expected a nonempty list of rationals")
    vals = [r.rational(x, f"{path}[{i}]") for i, x in enumerate(v)]
    if any(x is None for x in vals):
        return None
    if any(x <= 0 for x in vals):
        return r.fail(path, "deltas must be positive")
    return vals


def _parse_sweep(r, s, k, d):
    if not isinstance(s, dict):
        return r.fail("sweep", "expected an object")
    _check_keys(r, s, SWEEP_KEYS, "sweep")
    out = {"kind": s.get("kind", "cc-ball"), "deltas": _parse_deltas(r, s.get("deltas"), "sweep.deltas")}
    if out["kind"] not in ("cc-ball", "box"):
        r.fail("sweep.kind", "must be 'cc-ball' or 'box'")
    if "I" in s:
        out["I"] = r.word_tuple(s["I"], "sweep.I", k)
    if "v0" in s:
        out["v0"] = r.point(s["v0"], "sweep.v0", k)
    if "box_exponents" in s:
        out["box_exponents"] = r.point(s["box_exponents"], "sweep.box_exponents", d)
    for key in ("n_samples", "image_cells", "cells"):
        if key in s:
            out[key] = r.integer(s[key], f"sweep.{key}", 2)
    weights = s.get("weights", ["rho"])
    if not isinstance(weights, list) or any(w not in ("rho", "rho_tilde", "unweighted") for w in weights):
        r.fail("sweep.weights", "entries must be rho, rho_tilde or unweighted")
    out["weights"] = weights
    if "p" in s:
        out["p"] = r.point(s["p"], "sweep.p", k)
    return out


def _parse_probe(r, s):
    if not isinstance(s, dict):
        return r.fail("probe", "expected an object")
    _check_keys(r, s, PROBE_KEYS, "probe")
    out = {"deltas": _parse_deltas(r, s.get("deltas"), "probe.deltas")}
    for key in ("n_samples", "ball_cells", "image_cells"):
        if key in s:
            out[key] = r.integer(s[key], f"probe.{key}", 2)
    if "p" in s:
        out["p"] = r.point(s["p"], "probe.p")
    return out


def _parse_invariance(r, s, names, d, k):
    if not isinstance(s, dict):
        return r.fail("invariance", "expected an object")
    _check_keys(r, s, INVARIANCE_KEYS, "invariance")
    ynames = [f"y{i + 1}" for i in range(d - 1)]
    pairs = []
    for i, pr in enumerate(s.get("pairs", [])):
        path = f"invariance.pairs[{i}]"
        if not isinstance(pr, dict) or set(pr) - {"F", "G"}:
            r.fail(path, "expected {F, G}")
            continue
        F = pr.get("F", list(names))
        if not isinstance(F, list) or len(F) != d:
            r.fail(path + ".F", f"need {d} components")
            continue
        Fp = [r.polynomial(c, names, f"{path}.F[{m}]") for m, c in enumerate(F)]
        G = pr.get("G", [list(ynames)] * k)
        if not isinstance(G, list) or len(G) != k:
            r.fail(path + ".G", f"need {k} maps")
            continue
        Gp = []
        for j, g in enumerate(G):
            if not isinstance(g, list) or len(g) != d - 1:
                r.fail(f"{path}.G[{j}]", f"need {d - 1} components in {ynames}")
                Gp = None
                break
            Gp.append([r.polynomial(c, ynames, f"{path}.G[{j}][{m}]") for m, c in enumerate(g)])
        pairs.append({"F": Fp, "G": Gp})
    samples = s.get("samples", [])
    pts = [r.point(p, f"invariance.samples[{i}]", d) for i, p in enumerate(samples)] if isinstance(samples, list) else []
    out = {"pairs": pairs, "samples": pts}
    if "I0" in s:
        out["I0"] = r.word_tuple(s["I0"], "invariance.I0", k)
    return out


def parse_spec(path) -> ProblemSpec:
    p = resolve_spec_path(path)
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError([SpecIssue(f"{p}:{exc.lineno}:{exc.colno}", exc.msg)]) from None
    return parse_spec_data(data)


def resolve_spec_path(path) -> Path:
    p = Path(path)
    if p.exists():
        return p
    for cand in (FIXTURE_DIR / p.name, FIXTURE_DIR / (p.name + ".spec")):
        if cand.exists():
            return cand
    raise FileNotFoundError(f"no spec file at {path} (and no bundled fixture of that name)")


# emission ---------------------------------------------------------------------------

def _q(x) -> str:
    return str(Fraction(x))


def _poly_out(p: Polynomial) -> list:
    return [[list(e), c.numerator, c.denominator] for e, c in sorted(p.terms.items())]


def _words_out(I) -> list:
    return [list(w) for w in I]


def emit(spec: ProblemSpec) -> dict:
    """Canonical JSON-ready form; parse_spec_data(emit(s)) == s."""
    out: dict[str, Any] = {"name": spec.name, "d": spec.d, "variables": list(spec.variables),
                           "mode": spec.mode}
    if spec.mode == "submersions":
        out["submersions"] = [[_poly_out(c) for c in m] for m in spec.submersions]
    else:
        out["fields"] = [[_poly_out(c) for c in X] for X in spec.fields]
    out["box"] = [[_q(a), _q(b)] for a, b in spec.box]
    for key in ("N", "M"):
        if getattr(spec, key) is not None:
            out[key] = getattr(spec, key)
    if spec.x0 is not None:
        out["x0"] = [_q(v) for v in spec.x0]
    if spec.samples is not None:
        out["samples"] = [[_q(v) for v in s] for s in spec.samples]
    if spec.b0 is not None:
        out["b0"] = list(spec.b0)
    if spec.I0 is not None:
        out["I0"] = _words_out(spec.I0)
    if spec.J0 is not None:
        out["J0"] = list(spec.J0)
    if spec.beta0 is not None:
        out["beta0"] = list(spec.beta0)
    if spec.exponents is not None:
        out["exponents"] = [[v if v == "inf" else _q(v) for v in p] for p in spec.exponents]
    if spec.generators is not None:
        out["generators"] = [list(g) for g in spec.generators]
    if spec.query is not None:
        out["query"] = [_q(v) for v in spec.query]
    if spec.sweep is not None:
        s = dict(spec.sweep)
        s["deltas"] = [_q(v) for v in s["deltas"]]
        for key in ("v0", "box_exponents", "p"):
            if key in s:
                s[key] = [_q(v) for v in s[key]]
        if "I" in s:
            s["I"] = _words_out(s["I"])
        out["sweep"] = s
    if spec.probe is not None:
        s = dict(spec.probe)
        s["deltas"] = [_q(v) for v in s["deltas"]]
        if "p" in s:
            s["p"] = [_q(v) for v in s["p"]]
        out["probe"] = s
    if spec.invariance is not None:
        inv = spec.invariance
        o = {"pairs": [{"F": [_poly_out(c) for c in pr["F"]],
                        "G": [[_poly_out(c) for c in g] for g in pr["G"]]} for pr in inv["pairs"]],
             "samples": [[_q(v) for v in s] for s in inv["samples"]]}
        if "I0" in inv:
            o["I0"] = _words_out(inv["I0"])
        out["invariance"] = o
    out["seed"] = spec.seed
    if spec.expect:
        out["expect"] = spec.expect
    return out


def spec_equal(a: ProblemSpec, b: ProblemSpec) -> bool:
    return all(getattr(a, f.name) == getattr(b, f.name) for f in dc_fields(ProblemSpec))
