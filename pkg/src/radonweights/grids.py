"""Occupancy grids: sets represented by the cells a point cloud hits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import eval_poly, pack_polynomial


@dataclass
class OccupancyGrid:
    origin: np.ndarray  # lower corner, shape (m,)
    cell: np.ndarray  # cell sides, shape (m,)
    mask: np.ndarray  # bool, shape (r,)*m

    @classmethod
    def from_points(cls, points: np.ndarray, cells: int, pad: float = 1e-9) -> "OccupancyGrid":
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or len(pts) == 0:
            raise ValueError("need a nonempty (n, m) point array")
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        span = hi - lo
        scale = np.maximum(np.abs(hi), np.abs(lo))
        span = np.where(span > 0, span, np.maximum(scale, 1.0) * 1e-12)
        lo = lo - pad * span
        span = span * (1 + 2 * pad)
        cell = span / cells
        idx = np.floor((pts - lo) / cell).astype(np.int64)
        idx = np.clip(idx, 0, cells - 1)
        mask = np.zeros((cells,) * pts.shape[1], dtype=bool)
        mask[tuple(idx.T)] = True
        return cls(lo, cell, mask)

    @property
    def dim(self) -> int:
        return self.mask.ndim

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.cell))

    @property
    def measure(self) -> float:
        return float(self.mask.sum()) * self.cell_volume

    @property
    def degenerate(self) -> bool:
        occ = np.argwhere(self.mask)
        if len(occ) == 0:
            return True
        return bool(np.any(occ.max(axis=0) == occ.min(axis=0)))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        idx = np.floor((pts - self.origin) / self.cell).astype(np.int64)
        shape = np.asarray(self.mask.shape)
        ok = np.all((idx >= 0) & (idx < shape), axis=1)
        out = np.zeros(len(pts), dtype=bool)
        if ok.any():
            out[ok] = self.mask[tuple(idx[ok].T)]
        return out

    def centers(self) -> np.ndarray:
        """Centres of occupied cells."""
        idx = np.argwhere(self.mask)
        return self.origin + (idx + 0.5) * self.cell

    def dilated(self) -> "OccupancyGrid":
        """Grow the set by one cell in every axis direction."""
        m = self.mask.copy()
        for ax in range(self.dim):
            fwd = np.zeros_like(m)
            bwd = np.zeros_like(m)
            sl_a = [slice(None)] * self.dim
            sl_b = [slice(None)] * self.dim
            sl_a[ax], sl_b[ax] = slice(1, None), slice(None, -1)
            fwd[tuple(sl_a)] = self.mask[tuple(sl_b)]
            bwd[tuple(sl_b)] = self.mask[tuple(sl_a)]
            m |= fwd | bwd
        return OccupancyGrid(self.origin.copy(), self.cell.copy(), m)


class NumericMap:
    """Float evaluation of a polynomial map, vectorised over rows."""

    def __init__(self, components):
        self.packed = [pack_polynomial(p) for p in components]

    def __call__(self, Z: np.ndarray) -> np.ndarray:
        return np.stack([eval_poly(e, c, Z) for e, c in self.packed], axis=1)
