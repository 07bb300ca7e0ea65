"""Hot loops for the numerical side: packed polynomial fields and batch RK4.

Two interchangeable backends.  ``RADONWEIGHTS_BACKEND=numpy`` forces the
vectorised numpy path; otherwise numba is used when it imports.
"""
from __future__ import annotations

import os

import numpy as np

_requested = os.environ.get("RADONWEIGHTS_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"RADONWEIGHTS_BACKEND must be 'numba' or 'numpy', not {_requested!r}")

try:
    if _requested != "numba":
        raise ImportError
    from numba import njit
except ImportError:
    njit = None

BACKEND = "numba" if njit is not None else "numpy"


def pack_fields(fields) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Flatten polynomial vector fields into (exps, coefs, comp, word) arrays.

    Row r of the packing is the monomial ``coefs[r] * z**exps[r]`` contributing
    to component ``comp[r]`` of field number ``word[r]``.
    """
    exps, coefs, comp, word = [], [], [], []
    d = fields[0].dim
    for w, X in enumerate(fields):
        for i, p in enumerate(X.components):
            for e, c in p.terms.items():
                exps.append(e)
                coefs.append(float(c))
                comp.append(i)
                word.append(w)
    if not exps:
        exps.append((0,) * d)
        coefs.append(0.0)
        comp.append(0)
        word.append(0)
    return (np.asarray(exps, dtype=np.int64), np.asarray(coefs, dtype=np.float64),
            np.asarray(comp, dtype=np.int64), np.asarray(word, dtype=np.int64))


# numpy path -----------------------------------------------------------------

def _np_velocity(exps, coefs, comp, word, W, Z):
    # monomials: (B, R)
    mono = np.ones((Z.shape[0], exps.shape[0]), dtype=Z.dtype)
    for i in range(Z.shape[1]):
        col = exps[:, i]
        if col.any():
            mono = mono * Z[:, i:i + 1] ** col[None, :]
    terms = mono * coefs[None, :] * W[:, word]
    out = np.zeros_like(Z)
    for i in range(Z.shape[1]):
        sel = comp == i
        if sel.any():
            out[:, i] = terms[:, sel].sum(axis=1)
    return out


def _np_rk4(exps, coefs, comp, word, W, Z, nsteps):
    Z = Z.copy()
    h = 1.0 / nsteps
    for _ in range(nsteps):
        k1 = _np_velocity(exps, coefs, comp, word, W, Z)
        k2 = _np_velocity(exps, coefs, comp, word, W, Z + 0.5 * h * k1)
        k3 = _np_velocity(exps, coefs, comp, word, W, Z + 0.5 * h * k2)
        k4 = _np_velocity(exps, coefs, comp, word, W, Z + h * k3)
        Z += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return Z


def _np_eval_poly(exps, coefs, Z):
    mono = np.ones((Z.shape[0], exps.shape[0]), dtype=np.result_type(Z, coefs))
    for i in range(Z.shape[1]):
        col = exps[:, i]
        if col.any():
            mono = mono * Z[:, i:i + 1] ** col[None, :]
    return mono @ coefs


# numba path -----------------------------------------------------------------

if njit is not None:

    @njit(cache=True)
    def _nb_velocity_one(exps, coefs, comp, word, w, z, out):
        for i in range(out.shape[0]):
            out[i] = 0
        for r in range(exps.shape[0]):
            term = coefs[r] * w[word[r]]
            for i in range(z.shape[0]):
                e = exps[r, i]
                for _ in range(e):
                    term = term * z[i]
            out[comp[r]] += term

    @njit(cache=True)
    def _nb_rk4(exps, coefs, comp, word, W, Z, nsteps):
        B, d = Z.shape
        out = Z.copy()
        h = 1.0 / nsteps
        k1 = np.empty(d, dtype=Z.dtype)
        k2 = np.empty(d, dtype=Z.dtype)
        k3 = np.empty(d, dtype=Z.dtype)
        k4 = np.empty(d, dtype=Z.dtype)
        tmp = np.empty(d, dtype=Z.dtype)
        for b in range(B):
            z = out[b]
            w = W[b]
            for _ in range(nsteps):
                _nb_velocity_one(exps, coefs, comp, word, w, z, k1)
                for i in range(d):
                    tmp[i] = z[i] + 0.5 * h * k1[i]
                _nb_velocity_one(exps, coefs, comp, word, w, tmp, k2)
                for i in range(d):
                    tmp[i] = z[i] + 0.5 * h * k2[i]
                _nb_velocity_one(exps, coefs, comp, word, w, tmp, k3)
                for i in range(d):
                    tmp[i] = z[i] + h * k3[i]
                _nb_velocity_one(exps, coefs, comp, word, w, tmp, k4)
                for i in range(d):
                    z[i] = z[i] + (h / 6.0) * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i])
        return out

    @njit(cache=True)
    def _nb_eval_poly(exps, coefs, Z):
        B = Z.shape[0]
        out = np.zeros(B, dtype=Z.dtype)
        for b in range(B):
            acc = out[b]
            for r in range(exps.shape[0]):
                term = coefs[r] + 0 * acc
                for i in range(Z.shape[1]):
                    for _ in range(exps[r, i]):
                        term = term * Z[b, i]
                acc += term
            out[b] = acc
        return out


def rk4_combination(packed, W: np.ndarray, Z: np.ndarray, nsteps: int,
                    backend: str | None = None) -> np.ndarray:
    """Flow each row of Z for unit time along ``sum_w W[b, w] X_w``."""
    exps, coefs, comp, word = packed
    dtype = np.result_type(Z, W, np.float64)
    Z = np.ascontiguousarray(Z, dtype=dtype)
    W = np.ascontiguousarray(W, dtype=dtype)
    backend = backend or BACKEND
    if backend == "numba":
        if njit is None:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return _nb_rk4(exps, coefs.astype(dtype), comp, word, W, Z, int(nsteps))
    return _np_rk4(exps, coefs.astype(dtype), comp, word, W, Z, int(nsteps))


def eval_poly(exps: np.ndarray, coefs: np.ndarray, Z: np.ndarray,
              backend: str | None = None) -> np.ndarray:
    dtype = np.result_type(Z, np.float64)
    Z = np.ascontiguousarray(Z, dtype=dtype)
    backend = backend or BACKEND
    if backend == "numba" and njit is not None:
        return _nb_eval_poly(exps, coefs.astype(dtype), Z)
    return _np_eval_poly(exps, coefs.astype(dtype), Z)


def pack_polynomial(p) -> tuple[np.ndarray, np.ndarray]:
    items = list(p.terms.items()) or [((0,) * p.nvars, 0)]
    return (np.asarray([e for e, _ in items], dtype=np.int64),
            np.asarray([float(c) for _, c in items], dtype=np.float64))
