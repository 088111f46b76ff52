"""Row reduction over exact rationals (or floats with a pivot tolerance)."""

from __future__ import annotations

from typing import Optional, Sequence


def _is_zero(x, tol: Optional[float]) -> bool:
    if tol is None:
        return x == 0
    return abs(x) <= tol


def row_reduce(rows: Sequence[Sequence], ncols: int, tol: Optional[float] = None):
    """Reduced row echelon form.

    Columns are scanned left to right, so callers put the columns they want
    eliminated first on the left.  With `tol=None` arithmetic is exact;
    otherwise partial pivoting is used and entries below `tol` count as 0.
    Returns (rows, pivot_columns) with one row per pivot.
    """
    mat = [list(r) for r in rows if any(not _is_zero(x, tol) for x in r)]
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= len(mat):
            break
        if tol is None:
            best = next((k for k in range(r, len(mat)) if mat[k][c] != 0), None)
        else:
            best = max(range(r, len(mat)), key=lambda k: abs(mat[k][c]))
            if abs(mat[best][c]) <= tol:
                best = None
        if best is None:
            continue
        mat[r], mat[best] = mat[best], mat[r]
        pv = mat[r][c]
        row = [x / pv for x in mat[r]]
        mat[r] = row
        for k in range(len(mat)):
            if k != r and not _is_zero(mat[k][c], tol):
                f = mat[k][c]
                mat[k] = [a - f * b for a, b in zip(mat[k], row)]
                if tol is not None:
                    mat[k][c] = 0.0
        pivots.append(c)
        r += 1
    return mat[:r], pivots


def reduce_vector(vec: Sequence, rref_rows, pivots, tol: Optional[float] = None) -> list:
    """Remainder of `vec` after subtracting its component in the row span."""
    out = list(vec)
    for row, c in zip(rref_rows, pivots):
        f = out[c]
        if not _is_zero(f, tol):
            out = [a - f * b for a, b in zip(out, row)]
    return out


def in_row_span(vec: Sequence, rref_rows, pivots, tol: Optional[float] = None) -> bool:
    return all(_is_zero(x, tol) for x in reduce_vector(vec, rref_rows, pivots, tol))
