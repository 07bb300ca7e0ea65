"""Floating-point flows: RK4 integration, sampled balls B(x0, delta) and a
finite-difference oracle for the Taylor coefficients of det D_t Psi^J."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._kernels import pack_fields, rk4_combination
from .arclength import SystemSpec
from .grids import OccupancyGrid
from .poly import VectorField
from .words import WordTuple, lambda_at, word_degree

MAX_STEPS = 10_000_000


def numeric_flow(X: VectorField, x0, t, h: float, backend: str | None = None) -> np.ndarray:
    """``e^{tX}(x0)`` by classical RK4 with step at most ``h``; complex input allowed."""
    if h <= 0:
        raise ValueError("step must be positive")
    nsteps = max(1, math.ceil(abs(t) / h))
    if nsteps > MAX_STEPS:
        raise OverflowError(f"{nsteps} steps requested (cap {MAX_STEPS})")
    Z = np.asarray([x0], dtype=np.result_type(np.asarray(x0), np.asarray(t), np.float64))
    W = np.asarray([[t]], dtype=Z.dtype)
    return rk4_combination(pack_fields([X]), W, Z, nsteps, backend)[0]


def numeric_psi(sys: SystemSpec, J: Sequence[int], x0, T: np.ndarray, nsteps: int = 8,
                backend: str | None = None) -> np.ndarray:
    """Rows ``Psi^J(T[b])``, flowing ``X_{J_1}`` first."""
    T = np.atleast_2d(T)
    Z = np.tile(np.asarray(x0, dtype=T.dtype if np.iscomplexobj(T) else float), (len(T), 1))
    Z = Z.astype(np.result_type(Z, T, np.float64))
    packs = {}
    for l, letter in enumerate(J):
        if letter not in packs:
            packs[letter] = pack_fields([sys.fields[letter - 1]])
        Z = rk4_combination(packs[letter], T[:, l:l + 1], Z, nsteps, backend)
    return Z


def fd_jacobian_det(sys: SystemSpec, J, x0, T: np.ndarray, eta: float = 1e-5,
                    nsteps: int = 8, backend: str | None = None) -> np.ndarray:
    """``det D_t Psi^J`` at each row of T from central differences."""
    T = np.atleast_2d(T)
    B, d = T.shape
    shifted = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = eta
        shifted.append(T + e)
        shifted.append(T - e)
    vals = numeric_psi(sys, J, x0, np.concatenate(shifted), nsteps, backend)
    vals = vals.reshape(2 * d, B, -1)
    jac = np.empty((B, vals.shape[2], d), dtype=vals.dtype)
    for j in range(d):
        jac[:, :, j] = (vals[2 * j] - vals[2 * j + 1]) / (2 * eta)
    return np.linalg.det(jac)


def cauchy_taylor(sys: SystemSpec, J, x0, max_order: int, radius: float = 0.5,
                  nodes: int | None = None, eta: float = 1e-5, nsteps: int = 8,
                  backend: str | None = None) -> dict:
    """Taylor coefficients of ``det D_t Psi^J`` at 0 from a trapezoid rule on a polycircle.

    Values on the torus come from :func:`fd_jacobian_det`, so this is a purely
    numerical oracle independent of the exact jets.
    """
    d = sys.d
    K = nodes or max_order + 3
    theta = 2 * np.pi * np.arange(K) / K
    grids = np.meshgrid(*([theta] * d), indexing="ij")
    T = radius * np.exp(1j * np.stack([g.ravel() for g in grids], axis=1))
    g = fd_jacobian_det(sys, J, x0, T, eta, nsteps, backend).reshape((K,) * d)
    coef = np.fft.fftn(g) / K ** d
    out = {}
    for idx in np.ndindex(*coef.shape):
        n = sum(idx)
        if n <= max_order:
            out[idx] = coef[idx].real / radius ** n
    return out


@dataclass
class BallCloud:
    x0: tuple
    words: WordTuple
    v0: tuple
    delta: float
    params: np.ndarray  # (n, d) sampled t
    points: np.ndarray  # (n, D)

    def volume(self, cells: int = 48) -> float:
        return OccupancyGrid.from_points(self.points, cells).measure


def _scales(sys: SystemSpec, I: WordTuple, v0, delta: float) -> np.ndarray:
    return np.asarray([delta ** float(sum(float(a) * b for a, b in zip(v0, word_degree(w, sys.k))))
                       for w in I])


def cc_ball(sys: SystemSpec, x0, I: WordTuple, v0, delta: float, n_samples: int, seed: int,
            nsteps: int = 4, backend: str | None = None) -> BallCloud:
    """Samples of ``exp(sum_i t_i delta^{v0.deg w_i} X_{w_i})(x0)``, t uniform in (-1, 1)^d."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not lambda_at(sys.table, I, x0):
        raise ValueError(f"lambda_I vanishes at {tuple(x0)} for I = {I}")
    rng = np.random.default_rng(seed)
    t = rng.uniform(-1.0, 1.0, size=(n_samples, sys.d))
    W = t * _scales(sys, I, v0, delta)[None, :]
    packed = pack_fields([sys.table.field(w) for w in I])
    Z = np.tile(np.asarray([float(v) for v in x0]), (n_samples, 1))
    pts = rk4_combination(packed, W, Z, nsteps, backend)
    return BallCloud(tuple(x0), tuple(I), tuple(v0), delta, t, pts)


def loglog_slope(xs, ys) -> float:
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(lx, ly, 1)[0])
