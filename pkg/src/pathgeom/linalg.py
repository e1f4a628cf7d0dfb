"""Exact Gaussian elimination over :class:`~pathgeom.symexpr.Expr` entries."""

from __future__ import annotations

from .symexpr import PoleError


class SingularMatrixError(PoleError):
    pass


def _pick_pivot(rows, col, start):
    best, best_size = None, None
    for r in range(start, len(rows)):
        entry = rows[r][col]
        if not entry.is_zero():
            size = entry.size()
            if best is None or size < best_size:
                best, best_size = r, size
    return best


def inverse_and_det(matrix):
    """Return ``(inverse, determinant)`` of a square matrix of Exprs.

    Gauss-Jordan elimination with the smallest available pivot; rows are
    lists of :class:`Expr`.  Raises :class:`SingularMatrixError` when the
    determinant is the zero rational function.
    """
    n = len(matrix)
    reg = matrix[0][0].reg
    rows = [list(row) + [reg.one if i == j else reg.zero for j in range(n)]
            for i, row in enumerate(matrix)]
    det = reg.one
    for col in range(n):
        piv = _pick_pivot(rows, col, col)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            det = -det
        pivot = rows[col][col]
        det = det * pivot
        inv = pivot.inverse()
        rows[col] = [x * inv if not x.is_zero() else x for x in rows[col]]
        for r in range(n):
            if r == col:
                continue
            factor = rows[r][col]
            if factor.is_zero():
                continue
            prow = rows[col]
            rows[r] = [x - factor * y if not y.is_zero() else x for x, y in zip(rows[r], prow)]
    return [row[n:] for row in rows], det


def determinant(matrix):
    n = len(matrix)
    reg = matrix[0][0].reg
    rows = [list(r) for r in matrix]
    det = reg.one
    for col in range(n):
        piv = _pick_pivot(rows, col, col)
        if piv is None:
            return reg.zero
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            det = -det
        pivot = rows[col][col]
        det = det * pivot
        inv = pivot.inverse()
        for r in range(col + 1, n):
            factor = rows[r][col]
            if factor.is_zero():
                continue
            m = factor * inv
            rows[r] = [x - m * y if not y.is_zero() else x for x, y in zip(rows[r], rows[col])]
    return det


def matmul(a, b):
    reg = a[0][0].reg
    out = []
    for row in a:
        out_row = []
        for j in range(len(b[0])):
            acc = reg.zero
            for k, x in enumerate(row):
                if x.is_zero():
                    continue
                y = b[k][j]
                if not y.is_zero():
                    acc = acc + x * y
            out_row.append(acc)
        out.append(out_row)
    return out
