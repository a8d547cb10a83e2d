"""Finite-difference operators on the interior unknowns of a grid embedding.

``B`` is the five-point negative Laplacian with zero exterior values.  ``A``
is the clamped biharmonic operator ``B_ext.T @ B_ext``, where ``B_ext`` maps
interior unknowns to the five-point Laplacian evaluated on the interior *and*
its one-cell neighbourhood.  Hence ``x @ A @ x == |B_ext x|**2`` exactly, the
discrete counterpart of integrating ``(Lap u)**2`` over the whole plane for a
function extended by zero.  The clamped boundary conditions are implied by the
zero extension; no row is modified.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .raster import GridEmbedding

_NEIGHBOURS = ((1, 0), (-1, 0), (0, 1), (0, -1))
# 13-point stencil of the squared five-point Laplacian (times h**4)
BIHARMONIC_STENCIL = (
    ((0, 0), 20.0),
    *(((di, dj), -8.0) for di, dj in _NEIGHBOURS),
    *(((di, dj), 2.0) for di in (-1, 1) for dj in (-1, 1)),
    *(((2 * di, 2 * dj), 1.0) for di, dj in _NEIGHBOURS),
)


@dataclass(frozen=True, eq=False)
class SymmetricSparseOperator:
    """Symmetric sparse matrix, optionally carried as ``factor.T @ factor``.

    ``matrix`` holds both triangles in CSR form.  When ``factor`` is present
    products are evaluated through it, which avoids the cancellation of the
    large stencil weights of the biharmonic operator.
    """

    matrix: sp.csr_matrix
    factor: sp.csr_matrix | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return int(sp.triu(self.matrix).nnz)

    def matvec(self, x):
        if self.factor is not None:
            return self.factor.T @ (self.factor @ x)
        return self.matrix @ x

    def matvec_extended(self, x):
        """Product evaluated in extended precision (``np.longdouble``)."""
        x = np.asarray(x, dtype=np.longdouble)
        if self.factor is not None:
            F = self.factor.astype(np.longdouble)
            return F.T @ (F @ x)
        return self.matrix.astype(np.longdouble) @ x

    def triplets(self):
        """Upper-triangle ``(row, col, value)`` arrays, row <= col, row-major."""
        upper = sp.triu(self.matrix).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return upper.row[order], upper.col[order], upper.data[order]

    def is_symmetric(self) -> bool:
        diff = self.matrix - self.matrix.T
        return diff.nnz == 0 or not np.any(diff.data)

    def scaled(self, factor: float) -> "SymmetricSparseOperator":
        return SymmetricSparseOperator(
            (self.matrix * factor).tocsr(),
            None if self.factor is None else (self.factor * np.sqrt(factor)).tocsr(),
        )

    def to_matrix_market(self) -> str:
        rows, cols, vals = self.triplets()
        lines = ["%%MatrixMarket matrix coordinate real symmetric", f"{self.n} {self.n} {len(vals)}"]
        # symmetric Matrix Market stores the lower triangle
        lines += [f"{c + 1} {r + 1} {v:.17g}" for r, c, v in zip(rows, cols, vals)]
        return "\n".join(lines) + "\n"


def _extended_laplacian(g: GridEmbedding):
    """Five-point Laplacian from interior unknowns to interior-plus-neighbours.

    Returns ``(B_ext, interior_rows)`` where ``interior_rows`` selects the rows
    belonging to interior points.
    """
    h2 = g.h * g.h
    I, J = np.nonzero(g.inside)
    N = len(I)
    ext = g.inside.copy()
    for di, dj in _NEIGHBOURS:
        ext[I + di, J + dj] = True
    ext_index = np.full(ext.shape, -1, dtype=np.int64)
    ext_index[ext] = np.arange(int(ext.sum()))
    cols = np.arange(N)
    rows = [ext_index[I, J]]
    vals = [np.full(N, 4.0 / h2)]
    for di, dj in _NEIGHBOURS:
        rows.append(ext_index[I + di, J + dj])
        vals.append(np.full(N, -1.0 / h2))
    B_ext = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.tile(cols, 5))),
        shape=(int(ext.sum()), N),
    )
    return B_ext, ext_index[I, J]


def assemble_laplacian(g: GridEmbedding) -> SymmetricSparseOperator:
    """Five-point ``-Lap`` on the interior unknowns (Dirichlet by zero extension)."""
    B_ext, interior_rows = _extended_laplacian(g)
    B = B_ext[interior_rows].tocsr()
    B.sort_indices()
    return SymmetricSparseOperator(B)


def stencil_biharmonic(g: GridEmbedding) -> sp.csr_matrix:
    """Direct 13-point assembly with couplings to exterior points dropped."""
    h4 = g.h**4
    I, J = np.nonzero(g.inside)
    idx = g.interior_index
    nx, ny = g.inside.shape
    rows, cols, vals = [], [], []
    for (di, dj), w in BIHARMONIC_STENCIL:
        ti, tj = I + di, J + dj
        ok = (ti >= 0) & (ti < nx) & (tj >= 0) & (tj < ny)
        target = np.full(len(I), -1)
        target[ok] = idx[ti[ok], tj[ok]]
        keep = target >= 0
        rows.append(idx[I[keep], J[keep]])
        cols.append(target[keep])
        vals.append(np.full(int(keep.sum()), w / h4))
    N = len(I)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    A.sort_indices()
    return A


def assemble_biharmonic(g: GridEmbedding, *, self_check: bool = True) -> SymmetricSparseOperator:
    """Clamped ``Lap**2`` as ``B_ext.T @ B_ext``.

    With ``self_check`` the product is compared entrywise with the direct
    13-point assembly (relative tolerance 1e-12).
    """
    B_ext, _ = _extended_laplacian(g)
    A = (B_ext.T @ B_ext).tocsr()
    A.eliminate_zeros()
    A.sort_indices()
    if self_check:
        direct = stencil_biharmonic(g)
        scale = 20.0 / g.h**4
        diff = abs(A - direct)
        if diff.nnz and diff.max() > 1e-12 * scale:
            raise RuntimeError("biharmonic assembly disagrees with the 13-point stencil")
    return SymmetricSparseOperator(A, B_ext.tocsr())
