"""Embedding of a domain into a uniform lattice.

Grid points are the integer multiples of the spacing ``h``, so two domains
rasterized with the same spacing share one lattice and nested domains give
nested masks.  Unknowns live on lattice points strictly inside the domain;
every other value is zero, which is the discrete form of extending a function
by zero outside the domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import geometry
from .errors import ResolutionTooCoarseError

MARGIN = 2


@dataclass(frozen=True, eq=False)
class GridEmbedding:
    """Interior lattice points of a domain.

    Attributes
    ----------
    offset : (int, int)
        Lattice index of ``mask[0, 0]``; the point ``mask[i, j]`` sits at
        ``((offset[0] + i) * h, (offset[1] + j) * h)``.
    h : float
        Grid spacing.
    inside : ndarray of bool, shape (nx, ny)
        Interior mask, with at least ``MARGIN`` false cells on every side.
    interior_index : ndarray of int, shape (nx, ny)
        Unknown number of each interior point in row-major order, -1 elsewhere.
    """

    offset: tuple
    h: float
    inside: np.ndarray
    interior_index: np.ndarray = field(repr=False)

    @classmethod
    def from_mask(cls, inside, h, offset=(0, 0)):
        inside = np.array(inside, dtype=bool)
        if inside.ndim != 2:
            raise ValueError("mask must be two-dimensional")
        if inside.any():
            pad = MARGIN
            rows = np.flatnonzero(inside.any(axis=1))
            cols = np.flatnonzero(inside.any(axis=0))
            lo = (rows[0] - pad, cols[0] - pad)
            shifted = np.zeros((rows[-1] - rows[0] + 1 + 2 * pad, cols[-1] - cols[0] + 1 + 2 * pad), bool)
            shifted[pad:-pad, pad:-pad] = inside[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
            inside = shifted
            offset = (offset[0] + lo[0], offset[1] + lo[1])
        index = np.full(inside.shape, -1, dtype=np.int64)
        index[inside] = np.arange(int(inside.sum()))
        inside.setflags(write=False)
        index.setflags(write=False)
        return cls((int(offset[0]), int(offset[1])), float(h), inside, index)

    @property
    def N(self) -> int:
        return int(self.inside.sum())

    @property
    def nx(self) -> int:
        return self.inside.shape[0]

    @property
    def ny(self) -> int:
        return self.inside.shape[1]

    @property
    def origin(self) -> tuple:
        return (self.offset[0] * self.h, self.offset[1] * self.h)

    def points(self) -> np.ndarray:
        """Coordinates of the unknowns, shape (N, 2), in unknown order."""
        i, j = np.nonzero(self.inside)
        return np.column_stack([(i + self.offset[0]) * self.h, (j + self.offset[1]) * self.h])

    def rescaled(self, t: float) -> "GridEmbedding":
        """Same mask on the lattice of spacing ``t * h`` (the embedding of ``t * domain``)."""
        if not t > 0:
            raise ValueError("scale factor must be positive")
        return GridEmbedding(self.offset, self.h * t, self.inside, self.interior_index)

    def lattice_set(self) -> set:
        i, j = np.nonzero(self.inside)
        return set(zip((i + self.offset[0]).tolist(), (j + self.offset[1]).tolist()))

    def to_csv(self) -> str:
        return "\n".join(",".join("1" if v else "0" for v in row) for row in self.inside) + "\n"

    def to_pgm(self) -> str:
        """Plain (P2) PGM image of the mask, one image row per grid row."""
        lines = ["P2", f"{self.ny} {self.nx}", "1"]
        lines += [" ".join("1" if v else "0" for v in row) for row in self.inside]
        return "\n".join(lines) + "\n"


def rasterize(domain, h: float) -> GridEmbedding:
    """Interior lattice points of ``domain`` at spacing ``h``.

    Raises
    ------
    ResolutionTooCoarseError
        If no lattice point lies strictly inside the domain.
    """
    h = float(h)
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"grid spacing must be positive, got {h}")
    xmin, ymin, xmax, ymax = geometry.bounding_box(domain)
    i0 = math.floor(xmin / h) - MARGIN
    j0 = math.floor(ymin / h) - MARGIN
    i1 = math.ceil(xmax / h) + MARGIN
    j1 = math.ceil(ymax / h) + MARGIN
    xs = np.arange(i0, i1 + 1) * h
    ys = np.arange(j0, j1 + 1) * h
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    inside = geometry.contains(domain, X, Y)
    if not inside.any():
        raise ResolutionTooCoarseError(f"no lattice point of spacing {h} lies inside the domain")
    return GridEmbedding.from_mask(inside, h, (i0, j0))


def union_frame(*grids: GridEmbedding) -> tuple:
    """Masks of several embeddings on one common index window.

    All embeddings must share the spacing; returns ``(offset, masks)``.
    """
    h = grids[0].h
    if any(g.h != h for g in grids):
        raise ValueError("embeddings live on different lattices")
    lo = np.min([g.offset for g in grids], axis=0)
    hi = np.max([(g.offset[0] + g.nx, g.offset[1] + g.ny) for g in grids], axis=0)
    masks = []
    for g in grids:
        m = np.zeros(tuple(hi - lo), dtype=bool)
        a, b = g.offset[0] - lo[0], g.offset[1] - lo[1]
        m[a:a + g.nx, b:b + g.ny] = g.inside
        masks.append(m)
    return (int(lo[0]), int(lo[1])), masks


def mask_included(inner: GridEmbedding, outer: GridEmbedding) -> bool:
    _, (a, b) = union_frame(inner, outer)
    return bool(np.all(b[a]))


def connected_components(g: GridEmbedding) -> int:
    """Number of 4-connected components of the interior mask."""
    _, count = ndimage.label(g.inside)
    return int(count)
